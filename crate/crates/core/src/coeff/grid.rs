//! Coefficients sampled on a uniform grid.
//!
//! File format: a CSV with header `x,y,a11,a12,a22`, one row per grid node, and
//! a comment line `# alpha=<value>` declaring the coercivity constant. Values
//! between nodes are bilinear.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{Mat2, Point};

#[derive(Debug, Clone)]
pub struct SampledGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `(a11, a12, a22)` at node `(i, j)`, stored at `j * nx + i`.
    values: Vec<[f64; 3]>,
    alpha: f64,
}

impl SampledGrid {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.xs.len(), self.ys.len())
    }

    /// Samples `f` on an `(n + 1) x (n + 1)` grid over the unit square.
    pub fn sample(n: usize, alpha: f64, f: impl Fn(Point) -> Mat2) -> Self {
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for &y in &nodes {
            for &x in &nodes {
                let m = f([x, y]);
                values.push([m.entry(0, 0), m.entry(0, 1), m.entry(1, 1)]);
            }
        }
        SampledGrid {
            xs: nodes.clone(),
            ys: nodes,
            values,
            alpha,
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|detail| Error::Format {
            path: path.to_path_buf(),
            detail,
        })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut alpha = None;
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("alpha=") {
                    alpha = Some(v.trim().parse::<f64>().map_err(|e| format!("bad alpha: {e}"))?);
                }
            }
        }
        let alpha = alpha.ok_or("missing `# alpha=<value>` line")?;
        if !(alpha > 0.0) {
            return Err(format!("alpha must be positive, got {alpha}"));
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| e.to_string())?.clone();
        if header.iter().collect::<Vec<_>>() != ["x", "y", "a11", "a12", "a22"] {
            return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let vals = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| format!("line {:?}: {e}", rec.position().map(|p| p.line())))
                })
                .collect::<std::result::Result<Vec<f64>, String>>()?;
            rows.push([vals[0], vals[1], vals[2], vals[3], vals[4]]);
        }
        let xs = distinct(rows.iter().map(|r| r[0]));
        let ys = distinct(rows.iter().map(|r| r[1]));
        if xs.len() < 2 || ys.len() < 2 || xs.len() * ys.len() != rows.len() {
            return Err(format!(
                "{} rows do not form a grid ({} x {})",
                rows.len(),
                xs.len(),
                ys.len()
            ));
        }
        for axis in [&xs, &ys] {
            let h = axis[1] - axis[0];
            if axis.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
                return Err("grid spacing is not uniform".into());
            }
            if axis[0] > 1e-12 || *axis.last().unwrap() < 1.0 - 1e-12 {
                return Err("grid does not cover the unit square".into());
            }
        }
        let nx = xs.len();
        let mut values = vec![[f64::NAN; 3]; rows.len()];
        for r in &rows {
            let i = locate(&xs, r[0]);
            let j = locate(&ys, r[1]);
            let m = Mat2::symmetric(r[2], r[3], r[4]);
            if !m.is_finite() || m.min_eigenvalue() < alpha * (1.0 - 1e-12) {
                return Err(format!("sample at ({}, {}) violates alpha = {alpha}", r[0], r[1]));
            }
            values[j * nx + i] = [r[2], r[3], r[4]];
        }
        if values.iter().any(|v| v[0].is_nan()) {
            return Err("duplicate grid node".into());
        }
        Ok(SampledGrid { xs, ys, values, alpha })
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# alpha={}\nx,y,a11,a12,a22\n", self.alpha);
        for (j, y) in self.ys.iter().enumerate() {
            for (i, x) in self.xs.iter().enumerate() {
                let v = self.values[j * self.xs.len() + i];
                let _ = writeln!(s, "{x},{y},{},{},{}", v[0], v[1], v[2]);
            }
        }
        s
    }

    pub fn evaluate(&self, p: Point) -> Mat2 {
        let (i, s) = cell_coord(&self.xs, p[0]);
        let (j, t) = cell_coord(&self.ys, p[1]);
        let nx = self.xs.len();
        let v00 = self.values[j * nx + i];
        let v10 = self.values[j * nx + i + 1];
        let v01 = self.values[(j + 1) * nx + i];
        let v11 = self.values[(j + 1) * nx + i + 1];
        let mix = |k: usize| {
            (1.0 - s) * (1.0 - t) * v00[k] + s * (1.0 - t) * v10[k] + (1.0 - s) * t * v01[k] + s * t * v11[k]
        };
        Mat2::symmetric(mix(0), mix(1), mix(2))
    }
}

fn distinct(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn locate(axis: &[f64], t: f64) -> usize {
    axis.binary_search_by(|a| a.total_cmp(&t))
        .expect("value taken from the axis")
}

/// Interval index and local coordinate in `[0, 1]`, clamped to the grid.
fn cell_coord(axis: &[f64], t: f64) -> (usize, f64) {
    let n = axis.len() - 1;
    let h = (axis[n] - axis[0]) / n as f64;
    let s = ((t - axis[0]) / h).clamp(0.0, n as f64);
    let i = (s.floor() as usize).min(n - 1);
    (i, s - i as f64)
}
