//! Pass/fail outcomes of property checks on sampled grids.

use std::fmt;

use serde::Serialize;

use crate::num;

/// Grid points and values that violate (or attain) a checked property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "num::ser_vec")]
    pub points: Vec<f64>,
    #[serde(serialize_with = "num::ser_vec")]
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Witness {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Self {
        Witness {
            points,
            values,
            note: None,
        }
    }

    pub fn note(note: impl Into<String>) -> Self {
        Witness {
            points: Vec::new(),
            values: Vec::new(),
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// `pass == false` always carries a witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyVerdict {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(serialize_with = "num::ser")]
    pub tolerance: f64,
}

impl PropertyVerdict {
    pub fn pass(name: impl Into<String>, tolerance: f64) -> Self {
        PropertyVerdict {
            name: name.into(),
            pass: true,
            witness: None,
            tolerance,
        }
    }

    pub fn fail(name: impl Into<String>, tolerance: f64, witness: Witness) -> Self {
        PropertyVerdict {
            name: name.into(),
            pass: false,
            witness: Some(witness),
            tolerance,
        }
    }

    /// Passing verdict that still records what it saw.
    pub fn pass_with(name: impl Into<String>, tolerance: f64, witness: Witness) -> Self {
        PropertyVerdict {
            witness: Some(witness),
            ..PropertyVerdict::pass(name, tolerance)
        }
    }

    pub fn from_check(name: impl Into<String>, tolerance: f64, ok: bool, witness: Witness) -> Self {
        if ok {
            PropertyVerdict::pass(name, tolerance)
        } else {
            PropertyVerdict::fail(name, tolerance, witness)
        }
    }
}

impl fmt::Display for PropertyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.pass { "PASS" } else { "FAIL" }, self.name)?;
        if let Some(w) = &self.witness {
            if let Some(note) = &w.note {
                write!(f, ": {note}")?;
            }
            if !self.pass && !w.points.is_empty() {
                write!(f, " at t = {}", num::fmt17(w.points[0]))?;
            }
        }
        Ok(())
    }
}
