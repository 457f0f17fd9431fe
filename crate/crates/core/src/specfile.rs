//! JSON problem files.
//!
//! ```json
//! {
//!   "beta": 0.5,
//!   "x0": 1.0,
//!   "rhs": {"kind": "structured", "l": "t^(-1/2)", "phi": "cbrt(x)", "mu": 0.3333333333333333, "alpha_l": 0.5},
//!   "solver": {"T0": 10.0, "Tmax": 1000000.0, "N": 256, "ratio": 1.25, "tol": 1e-10}
//! }
//! ```
//!
//! Unknown keys are rejected. Serialization writes keys in the order of the
//! struct fields and omits absent optional keys, so `write(parse(file))`
//! is canonical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Formula;
use crate::fracint::SingularFunction;
use crate::solver::{Envelopes, General, ProblemSpec, Rhs, SolverConfig, Structured};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Structured,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopesFile {
    pub l: String,
    pub k: String,
    pub l1: String,
    pub k1: String,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
}

/// Right-hand side. Structured files use `l`, `phi`, `k`, `mu`, `alpha_l`,
/// `alpha_k`, `gamma`; general files use `f`, `alpha_f`, `envelopes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsFile {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelopes: Option<EnvelopesFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverFile {
    #[serde(rename = "T0", default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(rename = "Tmax", default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub beta: f64,
    pub x0: f64,
    pub rhs: RhsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverFile>,
}

fn require<T: Clone>(value: &Option<T>, key: &str, kind: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::InvalidSpec(format!("{kind} rhs needs `{key}`")))
}

fn reject(present: bool, key: &str, kind: &str) -> Result<()> {
    if present {
        Err(Error::InvalidSpec(format!("`{key}` does not apply to a {kind} rhs")))
    } else {
        Ok(())
    }
}

fn time_formula(src: &str) -> Result<Formula> {
    Ok(Formula::parse(src, &["t"])?)
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let r = &self.rhs;
        let rhs = match r.kind {
            Kind::Structured => {
                let kind = "structured";
                reject(r.f.is_some(), "f", kind)?;
                reject(r.alpha_f.is_some(), "alpha_f", kind)?;
                reject(r.envelopes.is_some(), "envelopes", kind)?;
                let l = require(&r.l, "l", kind)?;
                let k = r.k.clone().unwrap_or_else(|| "0".to_string());
                Rhs::Structured(Structured {
                    l: SingularFunction::parse_in(&l, "t", r.alpha_l.unwrap_or(0.0))?,
                    phi: Formula::parse(&require(&r.phi, "phi", kind)?, &["x"])?,
                    k: SingularFunction::parse_in(&k, "t", r.alpha_k.unwrap_or(0.0))?,
                    mu: require(&r.mu, "mu", kind)?,
                    gamma: r.gamma,
                })
            }
            Kind::General => {
                let kind = "general";
                for (present, key) in [
                    (r.l.is_some(), "l"),
                    (r.phi.is_some(), "phi"),
                    (r.k.is_some(), "k"),
                    (r.mu.is_some(), "mu"),
                    (r.alpha_l.is_some(), "alpha_l"),
                    (r.alpha_k.is_some(), "alpha_k"),
                    (r.gamma.is_some(), "gamma"),
                ] {
                    reject(present, key, kind)?;
                }
                let envelopes = match &r.envelopes {
                    None => None,
                    Some(e) => Some(Envelopes {
                        l: time_formula(&e.l)?,
                        k: time_formula(&e.k)?,
                        l1: time_formula(&e.l1)?,
                        k1: time_formula(&e.k1)?,
                        mu: e.mu,
                        gamma: e.gamma,
                        x_min: e.x_min,
                        x_max: e.x_max,
                    }),
                };
                Rhs::General(General {
                    f: Formula::parse(&require(&r.f, "f", kind)?, &["t", "x"])?,
                    alpha_f: r.alpha_f.unwrap_or(0.0),
                    envelopes,
                })
            }
        };
        ProblemSpec::new(self.beta, self.x0, rhs)
    }

    /// Solver settings, with defaults for anything the file leaves out.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut c = SolverConfig::default();
        if let Some(s) = &self.solver {
            c.t0 = s.t0.unwrap_or(c.t0);
            c.t_max = s.t_max.unwrap_or(c.t_max);
            c.intervals = s.intervals.unwrap_or(c.intervals);
            c.grading = s.grading.or(c.grading);
            c.ratio = s.ratio.unwrap_or(c.ratio);
            c.tol = s.tol.unwrap_or(c.tol);
        }
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !(finite_pos(c.t0) && finite_pos(c.t_max) && finite_pos(c.tol) && c.intervals >= 2 && c.ratio > 1.0) {
            return Err(Error::InvalidSpec(format!(
                "solver settings out of range: T0 = {}, Tmax = {}, N = {}, ratio = {}, tol = {}",
                c.t0, c.t_max, c.intervals, c.ratio, c.tol
            )));
        }
        if let Some(g) = c.grading {
            if !(g >= 1.0 && g.is_finite()) {
                return Err(Error::InvalidSpec(format!("grading must be >= 1, got {g}")));
            }
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STRUCTURED: &str = r#"{"beta": 0.5, "x0": 1, "rhs": {"kind": "structured", "l": "t^(-1/2)", "phi": "cbrt(x)", "mu": 0.3333333333333333, "alpha_l": 0.5}}"#;

    #[test]
    fn parses_structured() {
        let f = SpecFile::from_json(STRUCTURED).unwrap();
        let p = f.problem().unwrap();
        assert!(matches!(p.rhs, Rhs::Structured(_)));
        assert_eq!(f.solver_config().unwrap(), SolverConfig::default());
    }

    #[test]
    fn rejects_unknown_and_misplaced_keys() {
        let bad = STRUCTURED.replace("\"mu\"", "\"nu\"");
        assert!(matches!(SpecFile::from_json(&bad), Err(Error::Json(_))));
        let bad = STRUCTURED.replace("\"alpha_l\"", "\"alpha_f\"");
        assert!(SpecFile::from_json(&bad).unwrap().problem().is_err());
        let bad = STRUCTURED.replace("cbrt(x)", "cbrt(y)");
        assert!(SpecFile::from_json(&bad).unwrap().problem().is_err());
        let bad = STRUCTURED.replace("}}", "}, \"solver\": {\"N\": 1}}");
        assert!(SpecFile::from_json(&bad).unwrap().solver_config().is_err());
    }

    #[test]
    fn round_trip_is_canonical() {
        let f = SpecFile::from_json(STRUCTURED).unwrap();
        let once = f.to_json().unwrap();
        let g = SpecFile::from_json(&once).unwrap();
        assert_eq!(f, g);
        assert_eq!(once, g.to_json().unwrap());
    }
}
