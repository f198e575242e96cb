use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use qmlcha::bench::{self, ErrorRow, ProtocolConfig, TABLE1_REFERENCE};
use qmlcha::io::{self, fmt_sig};
use serde::Serialize;
use serde_json::json;

use crate::commands::{usage, write_config};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Suite {
    #[value(name = "table1")]
    Table1,
    #[value(name = "tableS1")]
    TableS1,
    #[value(name = "tableS2-partial")]
    TableS2Partial,
    #[value(name = "tableS3-scaled")]
    TableS3Scaled,
    #[value(name = "figS1")]
    FigS1,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Table1 => "table1",
            Suite::TableS1 => "tableS1",
            Suite::TableS2Partial => "tableS2-partial",
            Suite::TableS3Scaled => "tableS3-scaled",
            Suite::FigS1 => "figS1",
        }
    }
}

#[derive(Args, Serialize)]
pub struct Bench {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Protocol overrides as JSON (tableS1, tableS2-partial, tableS3-scaled).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Include the full-scale points: m up to 10^5 in table1, a 10^5-point
    /// oracle in tableS3-scaled.
    #[arg(long)]
    pub long_running: bool,
    /// Oracle hull size for tableS3-scaled.
    #[arg(long)]
    pub oracle_m: Option<usize>,
    /// Sampled directions for figS1.
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    /// Largest extension order for figS1.
    #[arg(long, default_value_t = 12)]
    pub max_k: usize,
    /// Product states behind the separable curve of figS1.
    #[arg(long, default_value_t = 10_000)]
    pub products: usize,
}

// Rough single-core cost of one two-qutrit hull LP, per hull point.
const SECONDS_PER_COLUMN: f64 = 5e-6;

fn estimate(seconds: f64) {
    let threads = rayon::current_num_threads() as f64;
    eprintln!(
        "estimated runtime: {:.0} min on {} threads",
        (seconds / threads / 60.0).ceil(),
        threads
    );
}

fn protocol(a: &Bench, default: ProtocolConfig) -> Result<ProtocolConfig> {
    let Some(path) = &a.config else {
        return Ok(default);
    };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    // Missing keys fall back to the suite defaults.
    let mut merged = serde_json::to_value(&default)?;
    let overrides: serde_json::Value = serde_json::from_str(&text)?;
    let Some(obj) = overrides.as_object() else {
        return Err(usage("--config must hold a JSON object"));
    };
    for (k, v) in obj {
        merged[k] = v.clone();
    }
    let mut cfg: ProtocolConfig = serde_json::from_value(merged)?;
    cfg.seed = a.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn percent(x: f64) -> String {
    fmt_sig(100.0 * x)
}

/// One row per method, one column per hull size, errors in percent.
fn write_error_table(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    let ms: Vec<String> = rows.iter().map(|r| r.m.to_string()).collect();
    let mut header = vec!["method"];
    header.extend(ms.iter().map(String::as_str));
    let mut csv = io::create_csv(path, &header)?;
    for (name, pick) in [("CHA", 0), ("BCHA", 1)] {
        let mut cells = vec![name.to_string()];
        cells.extend(
            rows.iter()
                .map(|r| percent(if pick == 0 { r.cha_error } else { r.bcha_error })),
        );
        csv.row(&cells)?;
    }
    csv.finish()?;
    Ok(())
}

fn print_error_rows(rows: &[ErrorRow]) {
    for r in rows {
        println!(
            "m={:>6}  CHA {:>7}%  BCHA {:>7}%",
            r.m,
            percent(r.cha_error),
            percent(r.bcha_error)
        );
    }
}

pub fn run(a: Bench) -> Result<()> {
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let name = a.suite.name();
    let csv_path = a.out.join(format!("{name}.csv"));
    let config_path = a.out.join(format!("{name}.config.json"));
    eprintln!("seed {}", a.seed);
    match a.suite {
        Suite::Table1 => {
            let ms: Vec<usize> = TABLE1_REFERENCE
                .iter()
                .map(|r| r.0)
                .filter(|&m| a.long_running || m <= 20000)
                .collect();
            if a.long_running {
                estimate(
                    ms.iter()
                        .map(|&m| m as f64 * SECONDS_PER_COLUMN)
                        .sum::<f64>()
                        + 60.0,
                );
            }
            write_config(&config_path, "bench", &json!({ "bench": &a, "ms": &ms }))?;
            let rows = bench::table1(a.seed, &ms)?;
            let mut csv = io::create_csv(&csv_path, &["m", "alpha", "reference_alpha"])?;
            for (r, p) in rows.iter().zip(TABLE1_REFERENCE) {
                csv.row(&[r.m.to_string(), fmt_sig(r.alpha), fmt_sig(p.1)])?;
                println!(
                    "m={:>6}  alpha {}  (reference {})",
                    r.m,
                    fmt_sig(r.alpha),
                    p.1
                );
            }
            csv.finish()?;
        }
        Suite::TableS1 => {
            let cfg = protocol(&a, ProtocolConfig::two_qubit(a.seed))?;
            write_config(
                &config_path,
                "bench",
                &json!({ "bench": &a, "protocol": &cfg }),
            )?;
            let rows = bench::table_s1(&cfg)?;
            write_error_table(&csv_path, &rows)?;
            print_error_rows(&rows);
        }
        Suite::TableS2Partial => {
            let cfg = protocol(&a, ProtocolConfig::two_qubit(a.seed))?;
            write_config(
                &config_path,
                "bench",
                &json!({ "bench": &a, "protocol": &cfg }),
            )?;
            let rows = bench::table_s2_partial(&cfg)?;
            let mut csv = io::create_csv(&csv_path, &["method", "error_percent"])?;
            for r in &rows {
                csv.row(&[r.method.clone(), percent(r.error)])?;
                println!("{:<14} {}%", r.method, percent(r.error));
            }
            csv.finish()?;
        }
        Suite::TableS3Scaled => {
            let mut cfg = protocol(&a, ProtocolConfig::two_qutrit_scaled(a.seed))?;
            let oracle_m = match (a.oracle_m, a.long_running) {
                (Some(m), _) => m,
                (None, true) => 100_000,
                (None, false) => 20_000,
            };
            if a.long_running && a.config.is_none() {
                cfg.ms = vec![10_000, 20_000, 50_000];
            }
            if a.long_running {
                let lp = cfg.states as f64 * oracle_m as f64
                    + cfg.states as f64 * cfg.ms.iter().sum::<usize>() as f64;
                estimate(lp * SECONDS_PER_COLUMN);
            }
            write_config(
                &config_path,
                "bench",
                &json!({ "bench": &a, "protocol": &cfg, "oracle_m": oracle_m }),
            )?;
            let run = bench::table_s3_scaled(&cfg, oracle_m)?;
            write_error_table(&csv_path, &run.rows)?;
            println!(
                "oracle m={oracle_m}, separable fraction {}",
                fmt_sig(run.separable_fraction)
            );
            print_error_rows(&run.rows);
        }
        Suite::FigS1 => {
            if a.max_k == 0 {
                return Err(usage("--max-k must be positive"));
            }
            let ks: Vec<usize> = (1..=a.max_k).collect();
            write_config(&config_path, "bench", &json!({ "bench": &a, "ks": &ks }))?;
            let fig = bench::fig_s1(a.seed, &ks, a.angles, a.products)?;
            let mut csv = io::create_csv(&csv_path, &["theta", "x1", "x2", "k"])?;
            for p in &fig.points {
                csv.row(&[
                    fmt_sig(p.theta),
                    fmt_sig(p.x1),
                    fmt_sig(p.x2),
                    p.k.to_string(),
                ])?;
            }
            csv.finish()?;
            println!(
                "{} points; min gap of k={} over the separable curve {}",
                fig.points.len(),
                a.max_k,
                fmt_sig(fig.min_gap(a.max_k))
            );
        }
    }
    Ok(())
}
