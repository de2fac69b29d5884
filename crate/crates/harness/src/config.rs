use std::path::{Path, PathBuf};

use horotorus::geometry::{AffineLatticePoint, SpecialLinearMatrix, SplittingSignature, TorusPoint};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;
/// Statistical kinds refuse smaller runs.
pub const MIN_STATISTICAL_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Zeta,
    Weyl,
    Reduce,
    Orbit,
    Fourier,
    Concentration,
    GammaOrbit,
    Siegel,
    Acceptance,
}

impl Kind {
    pub fn is_statistical(self) -> bool {
        matches!(self, Kind::Orbit | Kind::Fourier | Kind::Concentration | Kind::GammaOrbit | Kind::Siegel)
    }

    fn uses_flow(self) -> bool {
        self.is_statistical()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Criteria with exact or oracle pass conditions.
    Exact,
    /// Monte Carlo and exponent fits.
    Statistical,
    All,
}

fn one() -> usize {
    1
}

fn default_samples() -> usize {
    10_000
}

fn default_max_freq() -> i64 {
    4
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "one")]
    pub n: usize,
    /// Rows of the starting matrix; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<Vec<Vec<f64>>>,
    /// Torus point, each coordinate `"p/q"` or a decimal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<Vec<String>>,
    /// Flow time, or `T` for `zeta` and `weyl`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default = "default_max_freq")]
    pub max_freq: i64,
    /// Starting frequency for `gamma-orbit`; `e₁` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<Vec<i64>>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Enumeration node budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    /// Explicit acceptance criteria, overriding `suite`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u32>>,
}

/// Largest `n·t` for which the decomposition stays inside its residual
/// tolerance in double precision.
pub fn precision_cap(d: usize) -> f64 {
    if d <= 2 {
        25.0
    } else {
        16.0
    }
}

impl ExperimentConfig {
    pub fn new(kind: Kind) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind,
            m: 1,
            n: 1,
            g0: None,
            b0: None,
            t: None,
            t_grid: None,
            samples: default_samples(),
            seed: 0,
            epsilon: None,
            rho: None,
            max_freq: default_max_freq(),
            m0: None,
            out: default_out(),
            budget: None,
            suite: None,
            criteria: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn sig(&self) -> Result<SplittingSignature> {
        SplittingSignature::new(self.m, self.n).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// `t_grid` if given, otherwise the single `t`.
    pub fn times(&self) -> Vec<f64> {
        match (&self.t_grid, self.t) {
            (Some(g), _) => g.clone(),
            (None, Some(t)) => vec![t],
            (None, None) => Vec::new(),
        }
    }

    pub fn start_matrix(&self) -> Result<SpecialLinearMatrix> {
        match &self.g0 {
            None => Ok(SpecialLinearMatrix::identity(self.dim())),
            Some(rows) => SpecialLinearMatrix::from_rows(rows).map_err(|e| HarnessError::Config(format!("g0: {e}"))),
        }
    }

    /// The torus point `b0` with `len` coordinates, zero when absent.
    pub fn torus_point(&self, len: usize) -> Result<TorusPoint> {
        let point = match &self.b0 {
            None => TorusPoint::from_fractions(&vec![(0, 1); len]),
            Some(items) => {
                let refs: Vec<&str> = items.iter().map(String::as_str).collect();
                TorusPoint::parse(&refs)
            }
        }
        .map_err(|e| HarnessError::Config(format!("b0: {e}")))?;
        if point.dim() != len {
            return Err(HarnessError::Config(format!("b0 has {} coordinates, expected {len}", point.dim())));
        }
        Ok(point)
    }

    pub fn start(&self) -> Result<AffineLatticePoint> {
        Ok(AffineLatticePoint::new(self.start_matrix()?, self.torus_point(self.dim())?)?)
    }

    pub fn m0(&self) -> Vec<i64> {
        self.m0.clone().unwrap_or_else(|| {
            let mut e = vec![0; self.dim()];
            e[0] = 1;
            e
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} unsupported, expected {SCHEMA_VERSION}", self.schema_version));
        }
        self.sig()?;
        let d = self.dim();
        if self.kind != Kind::Weyl && self.kind != Kind::Acceptance {
            self.start_matrix()?;
            self.torus_point(if self.kind == Kind::Zeta { self.torus_len() } else { d })?;
        }
        if self.kind.is_statistical() && self.samples < MIN_STATISTICAL_SAMPLES {
            return bad(format!("{} samples, statistical runs need at least {MIN_STATISTICAL_SAMPLES}", self.samples));
        }
        let times = self.times();
        if times.iter().any(|t| !t.is_finite()) {
            return bad("non-finite time".into());
        }
        if self.kind.uses_flow() {
            if times.is_empty() {
                return bad("need --t or --t-grid".into());
            }
            let cap = precision_cap(d);
            for &t in &times {
                if t < 0.0 {
                    return bad(format!("t = {t} is negative"));
                }
                if self.n as f64 * t > cap {
                    return bad(format!("n·t = {} exceeds the precision cap {cap} for d = {d}", self.n as f64 * t));
                }
            }
        }
        if matches!(self.kind, Kind::Zeta | Kind::Weyl) && (times.is_empty() || times.iter().any(|&t| t < 1.0)) {
            return bad("zeta and weyl need T ≥ 1".into());
        }
        if self.kind == Kind::Weyl {
            self.torus_point(1)?;
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e <= 0.5) {
                return bad(format!("epsilon {e} not in (0, 1/2]"));
            }
        }
        if let Some(r) = self.rho {
            if !(r > 0.0 && r < 0.5) {
                return bad(format!("rho {r} not in (0, 1/2)"));
            }
        }
        if self.max_freq < 1 {
            return bad("max_freq must be at least 1".into());
        }
        if self.m0().len() != d || self.m0().iter().all(|&x| x == 0) {
            return bad("m0 must be a nonzero vector of length d".into());
        }
        if self.budget == Some(0) {
            return bad("budget must be positive".into());
        }
        Ok(())
    }

    /// `zeta` takes `b0` in any dimension.
    pub fn torus_len(&self) -> usize {
        match (&self.b0, self.kind) {
            (Some(b), Kind::Zeta) => b.len(),
            _ => self.dim(),
        }
    }
}
