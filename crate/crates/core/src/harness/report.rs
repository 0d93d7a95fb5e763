use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

pub const CSV_HEADER: [&str; 10] = [
    "level",
    "cells",
    "grad_lp",
    "f_lp",
    "stability_ratio",
    "err_phat",
    "order",
    "coeff_err_l2",
    "conj_gap_ratio",
    "flux_ratio",
];

/// One level of a study. Absent quantities are `None` and become empty fields.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Row {
    pub level: u32,
    pub cells: usize,
    pub grad_lp: Option<f64>,
    pub f_lp: Option<f64>,
    pub stability_ratio: Option<f64>,
    pub err_phat: Option<f64>,
    pub order: Option<f64>,
    pub coeff_err_l2: Option<f64>,
    pub conj_gap_ratio: Option<f64>,
    pub flux_ratio: Option<f64>,
}

impl Row {
    pub fn new(level: u32, cells: usize) -> Self {
        Row {
            level,
            cells,
            ..Row::default()
        }
    }

    fn fields(&self) -> [String; 10] {
        [
            self.level.to_string(),
            self.cells.to_string(),
            real(self.grad_lp),
            real(self.f_lp),
            real(self.stability_ratio),
            real(self.err_phat),
            real(self.order),
            real(self.coeff_err_l2),
            real(self.conj_gap_ratio),
            real(self.flux_ratio),
        ]
    }
}

/// 17 significant digits, or empty.
pub fn real(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Real(x) => real(Some(*x)),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Int(i) => *i as f64,
            Value::Real(x) => *x,
        }
    }
}

/// Auxiliary table written next to the main CSV as `<stem>.<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        render_csv(
            &self.header,
            self.rows.iter().map(|r| r.iter().map(Value::render).collect()),
        )
    }
}

fn render_csv(header: &[impl AsRef<str>], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.iter().map(|h| h.as_ref()))
        .expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub config: ExperimentConfig,
    /// Rows in strictly increasing level order.
    pub rows: Vec<Row>,
    pub tables: Vec<Table>,
    /// Wall-clock seconds per level, in row order.
    pub timings: Vec<(u32, f64)>,
}

impl StudyReport {
    pub fn to_csv(&self) -> String {
        render_csv(&CSV_HEADER, self.rows.iter().map(|r| r.fields().to_vec()))
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn column(&self, f: impl Fn(&Row) -> Option<f64>) -> Vec<f64> {
        self.rows.iter().filter_map(f).collect()
    }

    /// `max / min` of a column over the rows that have it.
    pub fn spread(&self, f: impl Fn(&Row) -> Option<f64>) -> Option<f64> {
        let v = self.column(f);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        (!v.is_empty()).then_some(max / min)
    }

    fn metadata(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            timings: Vec<Timing>,
            stability_spread: Option<f64>,
            conj_gap_spread: Option<f64>,
            flux_spread: Option<f64>,
            rows: &'a [Row],
        }
        #[derive(Serialize)]
        struct Timing {
            level: u32,
            seconds: f64,
        }
        let meta = Meta {
            timings: self
                .timings
                .iter()
                .map(|&(level, seconds)| Timing { level, seconds })
                .collect(),
            stability_spread: self.spread(|r| r.stability_ratio),
            conj_gap_spread: self.spread(|r| r.conj_gap_ratio.filter(|&x| x > 0.0)),
            flux_spread: self.spread(|r| r.flux_ratio),
            rows: &self.rows,
        };
        serde_json::to_string_pretty(&meta).expect("metadata serializes")
    }

    /// Files produced for the main output path `out`, in write order.
    pub fn outputs(&self, out: &Path) -> Vec<(PathBuf, String)> {
        let mut files: Vec<(PathBuf, String)> = self
            .tables
            .iter()
            .map(|t| (sidecar(out, &format!("{}.csv", t.name)), t.to_csv()))
            .collect();
        files.push((sidecar(out, "config.json"), self.config.to_json()));
        files.push((sidecar(out, "meta.json"), self.metadata()));
        files.push((out.to_path_buf(), self.to_csv()));
        files
    }

    /// Writes the CSV, its tables, the config echo and the run metadata. Every
    /// file is staged in the target directory first, and nothing is moved into
    /// place until all of them are staged.
    pub fn write(&self, out: &Path) -> Result<()> {
        let files = self.outputs(out);
        let mut staged = Vec::with_capacity(files.len());
        for (path, text) in files {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
            tmp.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))?;
            tmp.as_file().sync_all().map_err(|e| Error::io(&path, e))?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        }
        Ok(())
    }
}

/// `dir/stem.<suffix>` for the output `dir/stem.csv`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}
