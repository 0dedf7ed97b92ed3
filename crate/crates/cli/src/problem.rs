//! Problem files: a lattice, a polarization and optional experiment sections.

use std::path::Path;

use serde::Deserialize;
use tropical_torus::equidist::{CollapseConfig, EquidistConfig, DEFAULT_WITNESS_LEVEL};
use tropical_torus::{Lattice, Polarization, Rational, RationalVector, Simplex};

pub const VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub version: u32,
    /// Basis columns.
    pub lattice: Lattice,
    pub gram: Polarization,
    #[serde(default)]
    pub linear: Option<RationalVector>,
    #[serde(default)]
    pub epsilon: Option<EpsilonChoice>,
    #[serde(default)]
    pub level: u32,
    #[serde(default = "default_iterations")]
    pub iterations: u32,
    #[serde(default)]
    pub equidist: Option<EquidistSection>,
    #[serde(default)]
    pub collapse: Option<CollapseSection>,
    #[serde(default)]
    pub obstruction: Option<ObstructionSection>,
}

fn default_iterations() -> u32 {
    4
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EpsilonChoice {
    Auto,
    Fixed(Rational),
}

impl std::str::FromStr for EpsilonChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            Ok(Self::Auto)
        } else {
            s.parse().map(Self::Fixed).map_err(|e| format!("{e}"))
        }
    }
}

impl<'de> Deserialize<'de> for EpsilonChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquidistSection {
    pub level: Option<u32>,
    pub grid_orders: Option<Vec<u64>>,
    pub random_tests: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSection {
    pub copies: Option<usize>,
    pub face: Option<Simplex>,
    pub deltas: Option<Vec<Rational>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionSection {
    pub denominator: Option<u64>,
    pub witness_level: Option<u32>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported problem version {0}, expected {VERSION}")]
    Version(u32),
    #[error("{what} has dimension {found}, lattice has {expected}")]
    Dimension { what: &'static str, expected: usize, found: usize },
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ProblemError::Io { path: path.display().to_string(), source })?;
        let p: Problem = serde_json::from_str(&text)?;
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), ProblemError> {
        if self.version != VERSION {
            return Err(ProblemError::Version(self.version));
        }
        let n = self.lattice.dim();
        let check = |what, found| {
            if found == n {
                Ok(())
            } else {
                Err(ProblemError::Dimension { what, expected: n, found })
            }
        };
        check("gram", self.gram.dim())?;
        if let Some(l) = &self.linear {
            check("linear", l.dim())?;
        }
        Ok(())
    }

    pub fn linear(&self) -> RationalVector {
        self.linear.clone().unwrap_or_else(|| RationalVector::zeros(self.lattice.dim()))
    }

    pub fn equidist_config(&self) -> EquidistConfig {
        let s = self.equidist.as_ref();
        let mut cfg = EquidistConfig::standard(self.lattice.clone());
        cfg.polarization = self.gram.clone();
        let s = match s {
            Some(s) => s,
            None => return cfg,
        };
        if let Some(l) = s.level {
            cfg.level = l;
        }
        if let Some(m) = &s.grid_orders {
            cfg.grid_orders = m.clone();
        }
        if let Some(r) = s.random_tests {
            cfg.random_tests = r;
        }
        if let Some(seed) = s.seed {
            cfg.seed = seed;
        }
        cfg
    }

    pub fn collapse_config(&self) -> CollapseConfig {
        let s = self.collapse.as_ref();
        let copies = s.and_then(|s| s.copies).unwrap_or(2);
        let mut cfg = CollapseConfig::standard(self.lattice.clone(), copies);
        let Some(s) = s else {
            return cfg;
        };
        cfg.face = s.face.clone();
        if let Some(d) = &s.deltas {
            cfg.deltas = d.clone();
        }
        if let Some(n) = s.samples {
            cfg.samples = n;
        }
        if let Some(seed) = s.seed {
            cfg.seed = seed;
        }
        cfg
    }

    /// `(denominator, witness_level, trials, seed)`.
    pub fn obstruction_params(&self) -> (u64, u32, usize, u64) {
        let s = self.obstruction.as_ref();
        (
            s.and_then(|s| s.denominator).unwrap_or(1),
            s.and_then(|s| s.witness_level).unwrap_or(DEFAULT_WITNESS_LEVEL),
            s.and_then(|s| s.trials).unwrap_or(100),
            s.and_then(|s| s.seed).unwrap_or(0),
        )
    }
}
