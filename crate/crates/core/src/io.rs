//! On-disk formats: QSDS datasets, QHUL hulls, JSON models and CSV numbers.
//!
//! Both binary formats are little-endian with a short fixed header. Readers
//! reject bad magic, unknown versions, out-of-range labels, truncation and
//! trailing bytes.

use crate::cha::ConvexHull;
use crate::ensemble::{BaggedCommittee, BchaModel, TreeParams};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qstate::{DensityMatrix, Dims};
use crate::sampling::{Label, LabelSource, LabeledDataset, Record};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const QSDS_MAGIC: &[u8; 4] = b"QSDS";
pub const QHUL_MAGIC: &[u8; 4] = b"QHUL";
pub const FORMAT_VERSION: u32 = 1;

const FLAG_ALPHA: u8 = 1;
const FLAG_LABEL: u8 = 1 << 1;
const FLAG_SOURCE_HULL: u8 = 1 << 2;
const FLAG_SOURCE_PPT: u8 = 1 << 3;

fn format_err(format: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        format,
        reason: reason.into(),
    }
}

struct Input<R> {
    inner: R,
    format: &'static str,
}

impl<R: Read> Input<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => format_err(self.format, "truncated input"),
                _ => Error::Io(e),
            })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<Dims> {
        if &self.bytes::<4>()? != magic {
            return Err(format_err(self.format, "bad magic"));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(format_err(
                self.format,
                format!("unsupported version {version}"),
            ));
        }
        let (da, db) = (self.u16()?, self.u16()?);
        Dims::new(da as usize, db as usize)
    }

    fn expect_end(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe)? {
            0 => Ok(()),
            _ => Err(format_err(self.format, "trailing bytes")),
        }
    }
}

fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], dims: Dims) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(dims.d_a() as u16).to_le_bytes())?;
    w.write_all(&(dims.d_b() as u16).to_le_bytes())?;
    Ok(())
}

fn check_u16(dims: Dims) -> Result<()> {
    if dims.d_a() > u16::MAX as usize || dims.d_b() > u16::MAX as usize {
        return Err(Error::InvalidDimension(format!(
            "{dims} does not fit the file header"
        )));
    }
    Ok(())
}

/// Alpha and label presence must be uniform across records.
pub fn write_qsds<W: Write>(mut w: W, ds: &LabeledDataset) -> Result<()> {
    ds.validate()?;
    check_u16(ds.dims)?;
    let has_alpha = ds.records.first().is_some_and(|r| r.alpha.is_some());
    let has_label = ds.records.first().is_some_and(|r| r.label.is_some());
    for (i, r) in ds.records.iter().enumerate() {
        if r.alpha.is_some() != has_alpha {
            return Err(Error::MissingAlpha(i));
        }
        if r.label.is_some() != has_label {
            return Err(Error::MissingLabel(i));
        }
    }
    let mut flags = 0u8;
    if has_alpha {
        flags |= FLAG_ALPHA;
    }
    if has_label {
        flags |= FLAG_LABEL;
    }
    flags |= match ds.label_source {
        Some(LabelSource::HullOracle) => FLAG_SOURCE_HULL,
        Some(LabelSource::Ppt) => FLAG_SOURCE_PPT,
        None => 0,
    };
    write_header(&mut w, QSDS_MAGIC, ds.dims)?;
    w.write_all(&[flags])?;
    w.write_all(&(ds.records.len() as u64).to_le_bytes())?;
    for r in &ds.records {
        for x in &r.coords {
            w.write_all(&x.to_le_bytes())?;
        }
        if let Some(a) = r.alpha {
            w.write_all(&a.to_le_bytes())?;
        }
        if let Some(l) = r.label {
            w.write_all(&l.as_i8().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_qsds<R: Read>(r: R) -> Result<LabeledDataset> {
    let mut input = Input {
        inner: r,
        format: "QSDS",
    };
    let dims = input.header(QSDS_MAGIC)?;
    let flags = input.u8()?;
    if flags & !(FLAG_ALPHA | FLAG_LABEL | FLAG_SOURCE_HULL | FLAG_SOURCE_PPT) != 0 {
        return Err(format_err("QSDS", format!("unknown flags {flags:#04x}")));
    }
    let label_source = match (flags & FLAG_SOURCE_HULL != 0, flags & FLAG_SOURCE_PPT != 0) {
        (true, true) => return Err(format_err("QSDS", "conflicting label-source flags")),
        (true, false) => Some(LabelSource::HullOracle),
        (false, true) => Some(LabelSource::Ppt),
        (false, false) => None,
    };
    let count = input.u64()?;
    let fd = dims.feature_dim();
    let mut records = Vec::with_capacity(count.min(1 << 20) as usize);
    for _ in 0..count {
        let coords = (0..fd).map(|_| input.f64()).collect::<Result<Vec<_>>>()?;
        let alpha = if flags & FLAG_ALPHA != 0 {
            Some(input.f64()?)
        } else {
            None
        };
        let label = if flags & FLAG_LABEL != 0 {
            let raw = input.u8()? as i8;
            Some(Label::try_from(raw).map_err(|_| format_err("QSDS", format!("label {raw}")))?)
        } else {
            None
        };
        records.push(Record {
            coords,
            alpha,
            label,
        });
    }
    input.expect_end()?;
    let ds = LabeledDataset {
        dims,
        records,
        label_source,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn save_qsds(path: impl AsRef<Path>, ds: &LabeledDataset) -> Result<()> {
    write_qsds(BufWriter::new(File::create(path)?), ds)
}

pub fn load_qsds(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    read_qsds(BufReader::new(File::open(path)?))
}

pub fn write_qhul<W: Write>(mut w: W, hull: &ConvexHull) -> Result<()> {
    check_u16(hull.dims())?;
    write_header(&mut w, QHUL_MAGIC, hull.dims())?;
    w.write_all(&(hull.len() as u64).to_le_bytes())?;
    w.write_all(&[hull.include_origin() as u8])?;
    for x in hull.raw_points() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_qhul<R: Read>(r: R) -> Result<ConvexHull> {
    let mut input = Input {
        inner: r,
        format: "QHUL",
    };
    let dims = input.header(QHUL_MAGIC)?;
    let m = input.u64()?;
    let include_origin = match input.u8()? {
        0 => false,
        1 => true,
        other => return Err(format_err("QHUL", format!("include_origin byte {other}"))),
    };
    let total = (m as usize)
        .checked_mul(dims.feature_dim())
        .ok_or_else(|| format_err("QHUL", "point count overflows"))?;
    let mut points = Vec::with_capacity(total.min(1 << 24));
    for _ in 0..total {
        points.push(input.f64()?);
    }
    input.expect_end()?;
    ConvexHull::new(dims, points, include_origin)
}

pub fn save_qhul(path: impl AsRef<Path>, hull: &ConvexHull) -> Result<()> {
    write_qhul(BufWriter::new(File::create(path)?), hull)
}

pub fn load_qhul(path: impl AsRef<Path>) -> Result<ConvexHull> {
    read_qhul(BufReader::new(File::open(path)?))
}

/// Hex SHA-256 of the hull's QHUL encoding.
pub fn hull_sha256(hull: &ConvexHull) -> String {
    let mut bytes = Vec::with_capacity(32 + 8 * hull.raw_points().len());
    write_qhul(&mut bytes, hull).expect("writing to memory cannot fail");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A saved committee. `hull_sha256` is set when the committee was trained on
/// alpha-extended features, and pins the hull it must be paired with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dims: Dims,
    #[serde(rename = "L")]
    pub committee_size: usize,
    pub params: TreeParams,
    pub hull_sha256: Option<String>,
    pub committee: BaggedCommittee,
}

impl ModelFile {
    pub fn from_bcha(model: &BchaModel, params: TreeParams) -> Self {
        ModelFile {
            dims: model.hull.dims(),
            committee_size: model.committee.size(),
            params,
            hull_sha256: Some(hull_sha256(&model.hull)),
            committee: model.committee.clone(),
        }
    }

    pub fn from_committee(dims: Dims, committee: &BaggedCommittee, params: TreeParams) -> Self {
        ModelFile {
            dims,
            committee_size: committee.size(),
            params,
            hull_sha256: None,
            committee: committee.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.committee.validate()?;
        if self.committee.size() != self.committee_size {
            return Err(format_err("model", "L does not match the number of trees"));
        }
        let want = self.dims.feature_dim() + self.hull_sha256.is_some() as usize;
        if self.committee.input_dim != want {
            return Err(format_err(
                "model",
                format!("input_dim {} but {want} expected", self.committee.input_dim),
            ));
        }
        Ok(())
    }

    /// Pairs the committee with `hull`, checking the recorded hash.
    pub fn into_bcha(self, hull: ConvexHull) -> Result<BchaModel> {
        let Some(expected) = &self.hull_sha256 else {
            return Err(format_err(
                "model",
                "model was not trained with alpha features",
            ));
        };
        if hull.dims() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "model is {}, hull is {}",
                self.dims,
                hull.dims()
            )));
        }
        if &hull_sha256(&hull) != expected {
            return Err(format_err(
                "model",
                "hull does not match the one used in training",
            ));
        }
        BchaModel::new(self.committee, hull)
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &ModelFile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, model)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let model: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    model.validate()?;
    Ok(model)
}

/// Nine significant digits, shortest of fixed or scientific notation.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

/// A tiny CSV writer: a header, then rows of preformatted cells.
pub struct CsvWriter<W: Write> {
    inner: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut inner: W, header: &[&str]) -> Result<Self> {
        writeln!(inner, "{}", header.join(","))?;
        Ok(CsvWriter {
            inner,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        if cells.len() != self.columns {
            return Err(Error::LengthMismatch {
                expected: self.columns,
                got: cells.len(),
            });
        }
        writeln!(self.inner, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn create_csv(path: impl AsRef<Path>, header: &[&str]) -> Result<CsvWriter<BufWriter<File>>> {
    CsvWriter::new(BufWriter::new(File::create(path)?), header)
}

/// A dense state as JSON. `imag` may be omitted for real matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Dims,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.entries();
        let part = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        StateFile {
            dims: rho.dims(),
            real: part(|z| z.re),
            imag: Some(part(|z| z.im)),
        }
    }

    pub fn into_density(self) -> Result<DensityMatrix> {
        let n = self.dims.n();
        let square = |rows: &[Vec<f64>]| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !square(&self.real) || !self.imag.as_deref().is_none_or(square) {
            return Err(format_err("state", format!("expected {n}x{n} matrices")));
        }
        let m = CMatrix::from_fn(n, n, |i, j| {
            let im = self.imag.as_ref().map_or(0.0, |v| v[i][j]);
            Complex64::new(self.real[i][j], im)
        });
        DensityMatrix::new(self.dims, m)
    }
}

pub fn load_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    let f: StateFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    f.into_density()
}
