use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use qmlcha::cha::{self, CriticalPointConfig};
use qmlcha::ensemble::{evaluate, train_bcha, ChaClassifier, Classifier, TreeParams};
use qmlcha::io::{self, fmt_sig, ModelFile};
use qmlcha::sampling::{self, Labeler, SamplerConfig};
use qmlcha::{qstate, Dims, LabeledDataset};
use serde::Serialize;
use serde_json::json;

/// Bad command-line input that clap cannot catch on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// `<out>.config.json`, next to the output it describes.
pub fn config_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

pub fn write_config(path: &Path, command: &str, config: &impl Serialize) -> Result<()> {
    let doc = json!({
        "command": command,
        "threads": rayon::current_num_threads(),
        "config": config,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn dims(d_a: usize, d_b: usize) -> Result<Dims> {
    Ok(Dims::new(d_a, d_b)?)
}

#[derive(Args, Serialize)]
pub struct GenData {
    #[arg(long)]
    pub da: usize,
    #[arg(long)]
    pub db: usize,
    #[arg(long)]
    pub count: usize,
    /// Spectral exponent; the spectrum is Dirichlet(1 - lambda).
    #[arg(long, default_value_t = sampling::DEFAULT_DIRICHLET_EXPONENT)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `ppt`, or `hull:PATH` to label by membership in a saved hull.
    #[arg(long, default_value = "ppt")]
    pub label: String,
    /// Keep only states that pass the PPT test.
    #[arg(long)]
    pub ppt_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn gen_data(a: GenData) -> Result<()> {
    let mut cfg = SamplerConfig::new(dims(a.da, a.db)?, a.seed);
    cfg.dirichlet_exponent = a.lambda;
    cfg.ppt_only = a.ppt_only;
    let hull = match a.label.as_str() {
        "ppt" => None,
        s => match s.strip_prefix("hull:") {
            Some(p) => Some(io::load_qhul(p).with_context(|| format!("reading hull {p}"))?),
            None => {
                return Err(usage(format!(
                    "--label must be `ppt` or `hull:PATH`, got `{s}`"
                )))
            }
        },
    };
    let labeler = hull.as_ref().map_or(Labeler::Ppt, Labeler::HullOracle);
    eprintln!("seed {}", a.seed);
    let ds = sampling::build_dataset(&cfg, a.count, labeler, &mut cfg.rng())?;
    io::save_qsds(&a.out, &ds)?;
    write_config(&config_path(&a.out), "gen-data", &a)?;
    println!(
        "wrote {} states, separable fraction {}",
        ds.len(),
        fmt_sig(ds.separable_fraction())
    );
    Ok(())
}

#[derive(Args, Serialize)]
pub struct BuildHull {
    #[arg(long)]
    pub da: usize,
    #[arg(long)]
    pub db: usize,
    /// Number of pure product extreme points.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn build_hull(a: BuildHull) -> Result<()> {
    eprintln!("seed {}", a.seed);
    let hull = cha::build_hull(dims(a.da, a.db)?, a.m, &mut sampling::rng_from_seed(a.seed))?;
    io::save_qhul(&a.out, &hull)?;
    write_config(&config_path(&a.out), "build-hull", &a)?;
    println!(
        "wrote {} points, sha256 {}",
        hull.len(),
        io::hull_sha256(&hull)
    );
    Ok(())
}

#[derive(Args, Serialize)]
pub struct Classify {
    #[arg(long)]
    pub hull: PathBuf,
    /// BCHA model from `train`; without it the plain hull rule is used.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn classify(a: Classify) -> Result<()> {
    let hull = io::load_qhul(&a.hull)?;
    let ds = cha::extend_dataset(&hull, &io::load_qsds(&a.input)?)?;
    let committee = match &a.model {
        Some(p) => Some(io::load_model(p)?.into_bcha(hull.clone())?.committee),
        None => None,
    };
    let cha_rule = ChaClassifier { hull: &hull };
    let mut csv = io::create_csv(&a.out, &["index", "alpha", "label"])?;
    for (i, rec) in ds.records.iter().enumerate() {
        let label = match &committee {
            Some(c) => c.classify(rec)?,
            None => cha_rule.classify(rec)?,
        };
        let alpha = rec.alpha.expect("extended above");
        csv.row(&[i.to_string(), fmt_sig(alpha), label.as_i8().to_string()])?;
    }
    csv.finish()?;
    write_config(&config_path(&a.out), "classify", &a)?;
    println!("classified {} states", ds.len());
    Ok(())
}

#[derive(Args, Serialize)]
pub struct Train {
    #[arg(long)]
    pub hull: PathBuf,
    /// Labeled QSDS file.
    #[arg(long)]
    pub data: PathBuf,
    /// Committee size.
    #[arg(long = "L", default_value_t = qmlcha::ensemble::DEFAULT_COMMITTEE_SIZE)]
    #[serde(rename = "L")]
    pub committee_size: usize,
    /// Training fraction; the rest is held out for the report.
    #[arg(long, default_value_t = 0.5)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TreeParams::default().max_depth)]
    pub max_depth: usize,
    #[arg(long, default_value_t = TreeParams::default().min_leaf)]
    pub min_leaf: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct TrainReport {
    train: usize,
    test: usize,
    cha_error: f64,
    bcha_error: f64,
}

pub fn train(a: Train) -> Result<()> {
    if !(a.split > 0.0 && a.split < 1.0) {
        return Err(usage("--split must lie strictly between 0 and 1"));
    }
    let hull = io::load_qhul(&a.hull)?;
    let mut ds = io::load_qsds(&a.data)?;
    if !ds.has_labels() {
        return Err(usage(format!("{} has no labels", a.data.display())));
    }
    // Alphas stored in the file may come from another hull.
    for r in &mut ds.records {
        r.alpha = None;
    }
    let ds = cha::extend_dataset(&hull, &ds)?;
    eprintln!("seed {}", a.seed);
    let mut rng = sampling::rng_from_seed(a.seed);
    let (train, test): (LabeledDataset, LabeledDataset) = ds.split(a.split, &mut rng);
    if train.is_empty() || test.is_empty() {
        return Err(usage("split leaves an empty training or test set"));
    }
    let params = TreeParams {
        max_depth: a.max_depth,
        min_leaf: a.min_leaf,
        ..TreeParams::default()
    };
    let model = train_bcha(&hull, &train, a.committee_size, &params, &mut rng)?;
    let report = TrainReport {
        train: train.len(),
        test: test.len(),
        cha_error: evaluate(&ChaClassifier { hull: &hull }, &test)?,
        bcha_error: evaluate(&model.committee, &test)?,
    };
    io::save_model(&a.out, &ModelFile::from_bcha(&model, params))?;
    write_config(&config_path(&a.out), "train", &a)?;
    let mut report_path = a.out.as_os_str().to_owned();
    report_path.push(".report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;
    println!(
        "train {} test {}: CHA error {}, BCHA error {}",
        report.train,
        report.test,
        fmt_sig(report.cha_error),
        fmt_sig(report.bcha_error)
    );
    Ok(())
}

#[derive(Args, Serialize)]
pub struct CriticalPoint {
    /// `tiles`, `singlet`, or `file:PATH` (JSON with dims, real, imag).
    #[arg(long)]
    pub state: String,
    /// JSON overrides for the refinement parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-round alpha trace.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn critical_point(a: CriticalPoint) -> Result<()> {
    let rho = match a.state.as_str() {
        "tiles" => qstate::tiles_state(),
        "singlet" => qstate::singlet(),
        s => match s.strip_prefix("file:") {
            Some(p) => io::load_state(p).with_context(|| format!("reading state {p}"))?,
            None => return Err(usage(format!("unknown state `{s}`"))),
        },
    };
    let cfg: CriticalPointConfig = match &a.config {
        Some(p) => serde_json::from_str(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => CriticalPointConfig::default(),
    };
    eprintln!("seed {}", a.seed);
    let res = cha::critical_point(&rho, &cfg, &mut sampling::rng_from_seed(a.seed))?;
    let mut csv = io::create_csv(&a.out, &["iteration", "alpha"])?;
    for (i, v) in res.trace.iter().enumerate() {
        csv.row(&[(i + 1).to_string(), fmt_sig(*v)])?;
    }
    csv.finish()?;
    let resolved = json!({
        "state": a.state,
        "seed": a.seed,
        "critical_point": cfg,
    });
    write_config(&config_path(&a.out), "critical-point", &resolved)?;
    println!(
        "alpha {} after {} rounds ({:?})",
        fmt_sig(res.alpha),
        res.trace.len(),
        res.stop
    );
    Ok(())
}
