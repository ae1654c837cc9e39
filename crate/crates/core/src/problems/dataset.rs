//! Synthetic classification data and delimited-text import/export.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RandomState, Vector};
use crate::problems::{MAX_DIM, MAX_SAMPLES};

/// Full-precision float formatting (17 significant digits), shared by every
/// text artifact so identical runs produce byte-identical files.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// An `n x d` design matrix with labels: +-1 for classification, arbitrary
/// reals for regression targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    seed: u64,
    flip_prob: f64,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("labels"));
        }
        check_shape(x.rows(), x.cols())?;
        Ok(Dataset {
            x,
            y,
            seed: 0,
            flip_prob: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Generation seed; 0 for imported data.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Label-noise probability used at generation time; 0 for imported data.
    pub fn flip_prob(&self) -> f64 {
        self.flip_prob
    }

    pub fn feature_row(&self, i: usize) -> Vector {
        Vector::new(self.x.row(i).to_vec()).expect("dataset rows are finite and nonempty")
    }

    pub fn has_pm1_labels(&self) -> bool {
        self.y.iter().all(|&v| v == 1.0 || v == -1.0)
    }

    /// Serializes as delimited text: a header line `x0,...,x{d-1},label`,
    /// then one sample per line, features before the label, full double
    /// precision.
    pub fn to_delimited(&self) -> String {
        let mut out = String::new();
        for j in 0..self.dim() {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("label\n");
        for i in 0..self.n() {
            let fields: Vec<String> = self
                .x
                .row(i)
                .iter()
                .map(|&v| fmt_f64(v))
                .chain(std::iter::once(fmt_f64(self.y[i])))
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`Dataset::to_delimited`]. Provenance
    /// fields (seed, flip probability) are unknown for imported data and
    /// read back as zero.
    pub fn from_delimited(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Empty("dataset file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols.last() != Some(&"label") {
            return Err(Error::invalid(
                "dataset header must be 'x0,...,x{d-1},label'",
            ));
        }
        let d = cols.len() - 1;
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 1 {
                return Err(Error::invalid(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    d + 1,
                    fields.len()
                )));
            }
            let mut row = Vec::with_capacity(d);
            for f in &fields[..d] {
                row.push(parse_field(f, lineno)?);
            }
            y.push(parse_field(fields[d], lineno)?);
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Empty("dataset file"));
        }
        Dataset::new(Matrix::from_rows(&rows)?, y)
    }

    pub fn write_file(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_delimited())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_delimited(&text)
    }
}

fn parse_field(s: &str, lineno: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("line {}: bad float '{s}'", lineno + 2)))
}

fn check_shape(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::Empty("dataset"));
    }
    if n > MAX_SAMPLES || d > MAX_DIM {
        return Err(Error::invalid(format!(
            "dataset {n}x{d} exceeds desk-scale limits {MAX_SAMPLES}x{MAX_DIM}"
        )));
    }
    Ok(())
}

/// Two isotropic Gaussian clusters with mean separation `class_sep`; labels
/// are the cluster assignment (alternating +1/-1 by index), each flipped
/// independently with probability `flip_prob`. Deterministic under `seed`:
/// every sample consumes exactly `d` Gaussian draws and one uniform draw, so
/// changing `flip_prob` changes labels only.
pub fn synth_classification(
    n: usize,
    d: usize,
    class_sep: f64,
    flip_prob: f64,
    seed: u64,
) -> Result<Dataset> {
    check_shape(n, d)?;
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(Error::invalid(format!(
            "flip probability must be in [0, 1], got {flip_prob}"
        )));
    }
    if !(class_sep >= 0.0) || !class_sep.is_finite() {
        return Err(Error::invalid(format!(
            "class separation must be finite and >= 0, got {class_sep}"
        )));
    }
    let mut rng = RandomState::new(seed);
    let offset = class_sep / 2.0 / (d as f64).sqrt();
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let cluster = if i % 2 == 0 { 1.0 } else { -1.0 };
        let row: Vec<f64> = (0..d)
            .map(|_| cluster * offset + rng.next_gaussian())
            .collect();
        let flip = rng.next_f64() < flip_prob;
        rows.push(row);
        y.push(if flip { -cluster } else { cluster });
    }
    let mut ds = Dataset::new(Matrix::from_rows(&rows)?, y)?;
    ds.seed = seed;
    ds.flip_prob = flip_prob;
    Ok(ds)
}
