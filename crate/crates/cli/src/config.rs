//! Family configuration files.
//!
//! A configuration lists the base roots of the family in consecutive pairs,
//! tags the pairs that collide, and carries the parameter grid of the scan.
//! TOML and JSON are accepted; the format is chosen by file extension.

use std::path::Path;

use num_complex::Complex64;
use periodlab::contour::BasisMode;
use periodlab::family::{Family, FamilyPair, Param};
use periodlab::periods::{EndpointRule, QuadConfig};
use periodlab::polyfield::ComplexPoly;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    PairCollision,
    MultiCollision,
    Radial,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    LoopChain,
    SummedLoops,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Endpoint {
    #[default]
    Substitution,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default)]
    pub abs_tol: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub endpoint_rule: Endpoint,
}

fn default_rel_tol() -> f64 {
    1e-12
}

fn default_max_depth() -> usize {
    40
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: default_rel_tol(),
            abs_tol: 0.0,
            max_depth: default_max_depth(),
            endpoint_rule: Endpoint::Substitution,
        }
    }
}

/// `count` values `start * 10^(-k / per_decade)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    pub start: f64,
    pub per_decade: usize,
    pub count: usize,
}

/// Grid `modulus * exp(i * phase)` over all combinations; must contain 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    pub moduli: Vec<f64>,
    pub phases_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonodromySpec {
    pub eps: f64,
    pub steps: usize,
    #[serde(default = "one_turn")]
    pub turns: u32,
}

fn one_turn() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub schema_version: u32,
    pub name: String,
    pub kind: Kind,
    /// Leading coefficient of `Q`.
    #[serde(default = "unit")]
    pub lead: [f64; 2],
    #[serde(default)]
    pub mode: Mode,
    /// Base roots at `eps0`, read as consecutive pairs.
    #[serde(default)]
    pub roots: Vec<[f64; 2]>,
    /// Indices of the pairs that collide as `eps -> 0`.
    #[serde(default)]
    pub collisions: Vec<usize>,
    /// Parameter at which the roots are given and the basis is built.
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    /// Coefficients of `Q` in ascending order (raw kind only).
    #[serde(default)]
    pub coefficients: Vec<[f64; 2]>,
    pub ladder: Option<LadderSpec>,
    pub radial: Option<RadialSpec>,
    pub monodromy: Option<MonodromySpec>,
    #[serde(default)]
    pub quad: QuadSpec,
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_eps0() -> f64 {
    0.1
}

fn c(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl FamilyConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e == "json");
        Self::parse(&text, json).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        let cfg: FamilyConfig = if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if c(self.lead).norm() == 0.0 {
            return Err(invalid("lead", "leading coefficient is zero"));
        }
        if !(self.eps0 > 0.0) {
            return Err(invalid("eps0", "must be positive"));
        }
        self.quad_config()?;
        match self.kind {
            Kind::Raw => {
                if self.coefficients.len() < 3 {
                    return Err(invalid("coefficients", "raw kind needs a polynomial of degree >= 2"));
                }
                if (self.coefficients.len() - 1) % 2 != 0 {
                    return Err(invalid("coefficients", "degree of Q must be even"));
                }
                return Ok(());
            }
            _ => {
                if self.roots.len() < 4 || self.roots.len() % 2 != 0 {
                    return Err(invalid(
                        "roots",
                        format!("need an even number (>= 4) of roots, got {}", self.roots.len()),
                    ));
                }
            }
        }
        let npairs = self.roots.len() / 2;
        for &k in &self.collisions {
            if k >= npairs {
                return Err(invalid("collisions", format!("pair {k} out of range 0..{npairs}")));
            }
        }
        match self.kind {
            Kind::PairCollision if self.collisions.len() != 1 => {
                return Err(invalid("collisions", "pair-collision needs exactly one tag"));
            }
            Kind::MultiCollision if self.collisions.len() < 2 => {
                return Err(invalid("collisions", "multi-collision needs at least two tags"));
            }
            Kind::Radial if self.radial.is_none() => {
                return Err(invalid("radial", "radial kind requires an l grid"));
            }
            _ => {}
        }
        if matches!(self.kind, Kind::PairCollision | Kind::MultiCollision) && self.ladder.is_none() {
            return Err(invalid("ladder", "collision kinds require a ladder"));
        }
        if let Some(l) = &self.ladder {
            if !(l.start > 0.0) || l.per_decade == 0 || l.count == 0 {
                return Err(invalid("ladder", "start > 0, per_decade >= 1 and count >= 1 required"));
            }
        }
        if let Some(r) = &self.radial {
            if r.moduli.iter().any(|m| !(*m > 0.0)) {
                return Err(invalid("radial.moduli", "moduli must be positive"));
            }
            if !r.moduli.contains(&1.0) || !r.phases_deg.contains(&0.0) {
                return Err(invalid("radial", "grid must contain l = 1"));
            }
        }
        if let Some(m) = &self.monodromy {
            if !(m.eps > 0.0) || m.steps == 0 {
                return Err(invalid("monodromy", "eps > 0 and steps >= 1 required"));
            }
        }
        Ok(())
    }

    pub fn quad_config(&self) -> Result<QuadConfig, CliError> {
        let q = QuadConfig {
            rel_tol: self.quad.rel_tol,
            abs_tol: self.quad.abs_tol,
            max_depth: self.quad.max_depth,
            endpoint_rule: match self.quad.endpoint_rule {
                Endpoint::Substitution => EndpointRule::Substitution,
                Endpoint::None => EndpointRule::None,
            },
        };
        q.validate().map_err(|e| invalid("quad", e))?;
        Ok(q)
    }

    /// The root family described by the config (not available for raw).
    pub fn family(&self) -> Result<Family, CliError> {
        if self.kind == Kind::Raw {
            return Err(invalid("kind", "raw configs describe a single curve, not a family"));
        }
        let pairs = self
            .roots
            .chunks(2)
            .enumerate()
            .map(|(k, p)| {
                let (a, b) = (c(p[0]), c(p[1]));
                if self.collisions.contains(&k) {
                    FamilyPair::Colliding {
                        center: 0.5 * (a + b),
                        direction: (a - b) / (2.0 * self.eps0),
                        fixed_eps: None,
                    }
                } else {
                    FamilyPair::Spectator { roots: [a, b] }
                }
            })
            .collect();
        Ok(Family {
            pairs,
            lead: c(self.lead),
            mode: match self.mode {
                Mode::LoopChain => BasisMode::LoopChain,
                Mode::SummedLoops => BasisMode::SummedLoops,
            },
            base: Param::eps(self.eps0),
        })
    }

    pub fn polynomial(&self) -> ComplexPoly {
        ComplexPoly::new(self.coefficients.iter().map(|&v| c(v)).collect())
    }

    pub fn ladder(&self) -> Option<Vec<f64>> {
        self.ladder.as_ref().map(|l| {
            (0..l.count)
                .map(|k| l.start * 10f64.powf(-(k as f64) / l.per_decade as f64))
                .collect()
        })
    }

    pub fn radial_grid(&self) -> Option<Vec<Complex64>> {
        self.radial.as_ref().map(|r| {
            let mut out = Vec::new();
            for &m in &r.moduli {
                for &p in &r.phases_deg {
                    out.push(if m == 1.0 && p == 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::from_polar(m, p.to_radians())
                    });
                }
            }
            out
        })
    }
}

/// Bundled reference configurations, by name.
pub const BUNDLED: [(&str, &str); 3] = [
    ("f1", include_str!("../configs/f1.toml")),
    ("f3", include_str!("../configs/f3.toml")),
    ("r1", include_str!("../configs/r1.toml")),
];

pub fn bundled(name: &str) -> FamilyConfig {
    let text = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .expect("bundled config exists");
    FamilyConfig::parse(text, false).expect("bundled config is valid")
}
