//! Uniform sampling grids and sampled complex-valued functions.
//!
//! A [`GridSpec`] is a product of uniform axes; zero axes is the scalar
//! (dimension-0) case used for boundary data on the half-line. Values are
//! stored row-major with the **last** axis fastest, and are validated to be
//! finite on construction so downstream fits never see NaN.

use crate::error::{SgError, SgResult};
use num_complex::Complex64;
use std::io::{BufRead, Write};

/// One uniform axis `min = t_0 < … < t_{count-1} = max`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, count: usize) -> SgResult<Self> {
        if !min.is_finite() || !max.is_finite() || count < 2 || !(max > min) {
            return Err(SgError::InvalidParameter(format!(
                "bad axis: [{min}, {max}] with {count} nodes"
            )));
        }
        Ok(AxisSpec { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }
}

/// Product grid; `axes` may be empty (a single scalar sample).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
}

impl GridSpec {
    pub fn scalar() -> Self {
        GridSpec { axes: Vec::new() }
    }

    pub fn line(axis: AxisSpec) -> Self {
        GridSpec { axes: vec![axis] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        false // the empty product still has one point
    }

    /// Coordinates of the flat index (last axis fastest).
    pub fn node(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            out[k] = ax.node(flat % ax.count);
            flat /= ax.count;
        }
        out
    }
}

/// Complex samples over a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> SgResult<Self> {
        if values.len() != spec.len() {
            return Err(SgError::InvalidParameter(format!(
                "grid function has {} values for a grid of {} nodes",
                values.len(),
                spec.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(SgError::InvalidParameter(format!(
                    "grid function has a non-finite value at index {i}"
                )));
            }
        }
        Ok(GridFunction { spec, values })
    }

    pub fn from_fn<F>(spec: GridSpec, f: F) -> SgResult<Self>
    where
        F: Fn(&[f64]) -> SgResult<Complex64>,
    {
        let values = (0..spec.len())
            .map(|i| f(&spec.node(i)))
            .collect::<SgResult<Vec<_>>>()?;
        GridFunction::new(spec, values)
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let len = spec.len();
        GridFunction {
            spec,
            values: vec![Complex64::default(); len],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup-norm of the difference; grids must match.
    pub fn linf_diff(&self, other: &GridFunction) -> SgResult<f64> {
        if self.spec != other.spec {
            return Err(SgError::InvalidParameter(
                "grid mismatch in linf_diff".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// CSV dump: one row per node, columns `x1,…,xd,re,im`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let d = self.spec.dim();
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        header.push("re".into());
        header.push("im".into());
        writeln!(w, "{}", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self
                .spec
                .node(i)
                .iter()
                .map(|c| format!("{c:.17e}"))
                .collect();
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &std::path::Path) -> SgResult<()> {
        let mut f = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| SgError::io(path, e))?,
        );
        self.write_csv(&mut f).map_err(|e| SgError::io(path, e))
    }

    /// Read a one-axis CSV produced by [`write_csv`]; the axis is inferred
    /// from the (uniform, increasing) coordinate column.
    pub fn read_csv_1d<R: BufRead>(r: R) -> SgResult<Self> {
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| SgError::Io {
                path: "<csv>".into(),
                message: e.to_string(),
            })?;
            let line = line.trim();
            if lineno == 0 || line.is_empty() {
                continue; // header
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(SgError::Parse {
                    position: lineno,
                    message: format!("expected 3 CSV columns, found {}", cols.len()),
                });
            }
            let parse = |s: &str| -> SgResult<f64> {
                s.trim().parse::<f64>().map_err(|e| SgError::Parse {
                    position: lineno,
                    message: format!("bad float '{s}': {e}"),
                })
            };
            coords.push(parse(cols[0])?);
            values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        if coords.len() < 2 {
            return Err(SgError::InvalidParameter(
                "CSV grid needs at least two rows".into(),
            ));
        }
        let axis = AxisSpec::new(coords[0], *coords.last().unwrap(), coords.len())?;
        let step = axis.step();
        for (i, c) in coords.iter().enumerate() {
            if (c - axis.node(i)).abs() > 1e-9 * (1.0 + step) {
                return Err(SgError::InvalidParameter(format!(
                    "CSV coordinates are not uniform near row {i}"
                )));
            }
        }
        GridFunction::new(GridSpec::line(axis), values)
    }
}
