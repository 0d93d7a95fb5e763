use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coeff::{CoefficientField, SampledGrid, DEFAULT_PROJECTION_TOL};
use crate::error::{Error, Result};
use crate::fem::{P1Function, VectorField, DEFAULT_SOLVER_TOL};
use crate::geom::Point;
use crate::mesh::{Mesh, MAX_LEVEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    #[default]
    Stability,
    Convergence,
    HodgeSuite,
    CoeffDecay,
    BmoDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffName {
    #[default]
    Identity,
    ScaledIdentity,
    Smooth,
    LogSingular,
    Checkerboard,
    SampledGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RhsName {
    Zero,
    /// `(1, 0)`
    Constant,
    /// `(sin(pi x), cos(pi y))`
    #[default]
    SinCos,
    /// gradient of `sin(pi x) sin(pi y)`
    ManufacturedSine,
    /// gradient of the level-1 hat function at the centre
    CenterHatGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    #[default]
    FineGrid,
    Exact,
}

/// Inclusive level range written `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub start: u32,
    pub end: u32,
}

impl LevelRange {
    pub fn new(start: u32, end: u32) -> Self {
        LevelRange { start, end }
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        (self.end + 1).saturating_sub(self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("level range `{s}` is not of the form a..b"))?;
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("level range `{s}`: {e}"));
        Ok(LevelRange::new(parse(a)?, parse(b)?))
    }
}

impl Serialize for LevelRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LevelRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of the linear solver.
    pub solver: f64,
    /// Relative tolerance of cell averages and cell integrals.
    pub quadrature: f64,
    /// Relative tolerance of the dyadic maximal-function averages.
    pub diagnostic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: DEFAULT_SOLVER_TOL,
            quadrature: DEFAULT_PROJECTION_TOL,
            diagnostic: 1e-6,
        }
    }
}

/// Everything needed to reproduce one study. Missing keys take their defaults;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: StudyKind,
    pub coeff: CoeffName,
    /// Amplitude of the log-singular fixture.
    pub beta: f64,
    /// Location of the log singularity.
    pub center: Point,
    /// Contrast of the checkerboard fixture.
    pub kappa: f64,
    /// Factor of the scaled-identity fixture.
    pub scale: f64,
    /// Grid file for the sampled-grid fixture.
    pub coeff_path: Option<PathBuf>,
    pub rhs: RhsName,
    /// Exponent of the stability norms.
    pub p: f64,
    /// Exponent of the convergence error norm.
    pub p_hat: f64,
    /// Exponent of the coefficient error in coeff-decay studies.
    pub r: f64,
    pub levels: LevelRange,
    /// Fine-grid reference level; defaults to two above the last study level.
    pub reference_level: Option<u32>,
    pub reference: Reference,
    pub tolerances: Tolerances,
    /// Deepest dyadic level of the seminorm estimate.
    pub depth: u32,
    /// Thresholds of the distribution table.
    pub lambdas: Vec<f64>,
    /// Sampling depth of the distribution table.
    pub jn_depth: u32,
    /// Random fields per level in the Hodge suite.
    pub samples: usize,
    pub seed: u64,
    /// Threads over which levels are distributed.
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: StudyKind::Stability,
            coeff: CoeffName::Identity,
            beta: 0.5,
            center: [0.0, 0.0],
            kappa: 100.0,
            scale: 1.0,
            coeff_path: None,
            rhs: RhsName::SinCos,
            p: 2.0,
            p_hat: 2.0,
            r: 2.0,
            levels: LevelRange::new(2, 5),
            reference_level: None,
            reference: Reference::FineGrid,
            tolerances: Tolerances::default(),
            depth: 6,
            lambdas: vec![1.0, 2.0, 3.0, 4.0],
            jn_depth: 10,
            samples: 50,
            seed: 0,
            workers: 1,
            out: None,
        }
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_range(what: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(config_error(format!("{what} = {v} outside [{lo:e}, {hi:e}]")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn reference_level(&self) -> u32 {
        self.reference_level.unwrap_or(self.levels.end + 2)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.levels;
        if l.start > l.end {
            return Err(config_error(format!("empty level range {l}")));
        }
        if l.end > MAX_LEVEL {
            return Err(config_error(format!("level {} exceeds the limit {MAX_LEVEL}", l.end)));
        }
        check_range("p", self.p, 1.1, 10.0)?;
        check_range("p_hat", self.p_hat, 1.1, 10.0)?;
        check_range("r", self.r, 1.1, 10.0)?;
        check_range("tolerances.solver", self.tolerances.solver, 1e-14, 1e-6)?;
        check_range("tolerances.quadrature", self.tolerances.quadrature, 1e-12, 1e-4)?;
        check_range("tolerances.diagnostic", self.tolerances.diagnostic, 1e-12, 1e-4)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(config_error(format!("beta = {} must be nonnegative", self.beta)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(config_error(format!("kappa = {} must be positive", self.kappa)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(config_error(format!("scale = {} must be positive", self.scale)));
        }
        if !self.center.iter().all(|c| (0.0..=1.0).contains(c)) {
            return Err(config_error(format!(
                "center {:?} outside the unit square",
                self.center
            )));
        }
        if self.coeff == CoeffName::SampledGrid && self.coeff_path.is_none() {
            return Err(config_error("sampled-grid coefficient needs coeff_path"));
        }
        if self.workers == 0 {
            return Err(config_error("workers must be at least 1"));
        }
        match self.kind {
            StudyKind::Convergence => {
                if self.p_hat > self.p {
                    return Err(config_error(format!("p_hat = {} exceeds p = {}", self.p_hat, self.p)));
                }
                match self.reference {
                    Reference::FineGrid => {
                        let r = self.reference_level();
                        if r < l.end + 2 || r > MAX_LEVEL {
                            return Err(config_error(format!(
                                "reference level {r} must lie in [{}, {MAX_LEVEL}]",
                                l.end + 2
                            )));
                        }
                    }
                    Reference::Exact => {
                        if self.exact_scale().is_none() {
                            return Err(config_error(
                                "exact reference needs a constant scalar coefficient and a right-hand side \
                                 with zero-trace potential",
                            ));
                        }
                    }
                }
            }
            StudyKind::HodgeSuite => {
                if self.samples == 0 {
                    return Err(config_error("samples must be at least 1"));
                }
            }
            StudyKind::BmoDiagnostics => {
                if self.depth > 8 {
                    return Err(config_error(format!("depth {} exceeds 8", self.depth)));
                }
                if self.jn_depth > 12 {
                    return Err(config_error(format!("jn_depth {} exceeds 12", self.jn_depth)));
                }
                if l.end > 10 {
                    return Err(config_error("maximal-function levels are limited to 10"));
                }
                if self.lambdas.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(config_error("lambdas must be positive"));
                }
            }
            StudyKind::Stability | StudyKind::CoeffDecay => {}
        }
        Ok(())
    }

    pub fn coefficient(&self) -> Result<CoefficientField> {
        Ok(match self.coeff {
            CoeffName::Identity => CoefficientField::identity(),
            CoeffName::ScaledIdentity => CoefficientField::scaled_identity(self.scale),
            CoeffName::Smooth => CoefficientField::smooth(),
            CoeffName::LogSingular => CoefficientField::log_singular(self.beta, self.center),
            CoeffName::Checkerboard => CoefficientField::checkerboard(self.kappa),
            CoeffName::SampledGrid => {
                let path = self
                    .coeff_path
                    .as_ref()
                    .ok_or_else(|| config_error("sampled-grid coefficient needs coeff_path"))?;
                CoefficientField::sampled(SampledGrid::from_path(path)?)
            }
        })
    }

    pub fn rhs_field(&self) -> VectorField {
        rhs_field(self.rhs)
    }

    /// `c` when the coefficient is `c I` and the right-hand side is the gradient
    /// of a zero-trace potential, so that the exact solution is that potential
    /// divided by `c`.
    pub fn exact_scale(&self) -> Option<f64> {
        let c = match self.coeff {
            CoeffName::Identity => 1.0,
            CoeffName::ScaledIdentity => self.scale,
            _ => return None,
        };
        match self.rhs {
            RhsName::Zero | RhsName::ManufacturedSine | RhsName::CenterHatGradient => Some(c),
            RhsName::Constant | RhsName::SinCos => None,
        }
    }
}

pub fn rhs_field(name: RhsName) -> VectorField {
    match name {
        RhsName::Zero => VectorField::constant([0.0, 0.0]),
        RhsName::Constant => VectorField::constant([1.0, 0.0]),
        RhsName::SinCos => VectorField::new(|x| [(PI * x[0]).sin(), (PI * x[1]).cos()]),
        RhsName::ManufacturedSine => VectorField::new(|x| {
            [
                PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
            ]
        }),
        RhsName::CenterHatGradient => VectorField::from_p1_gradient(&center_hat()),
    }
}

/// Hat function of the vertex `(1/2, 1/2)` on the level-1 mesh.
pub fn center_hat() -> P1Function {
    let mesh = Arc::new(Mesh::uniform(1).expect("level 1 is valid"));
    let centre = mesh.interior_vertices()[0];
    P1Function::hat(mesh, centre).expect("centre is interior")
}
