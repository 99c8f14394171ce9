//! Validation reports: named checks with an optional failure witness.

use std::fmt;

use crate::scalar::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// Where an identity failed. Indices are 1-based, in the order the identity
/// names its arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub identity: String,
    pub indices: Vec<i64>,
    pub residual: String,
}

impl Witness {
    pub fn new(identity: impl Into<String>, indices: &[usize], residual: &Poly) -> Self {
        Witness {
            identity: identity.into(),
            indices: indices.iter().map(|&i| i as i64).collect(),
            residual: residual.to_string(),
        }
    }

    pub fn with_text(identity: impl Into<String>, indices: &[usize], residual: impl Into<String>) -> Self {
        Witness {
            identity: identity.into(),
            indices: indices.iter().map(|&i| i as i64).collect(),
            residual: residual.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub witness: Option<Witness>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Pass, witness: None }
    }

    pub fn fail(name: impl Into<String>, witness: Witness) -> Self {
        Check { name: name.into(), status: Status::Fail, witness: Some(witness) }
    }

    /// Pass when `witness` is `None`.
    pub fn from_witness(name: impl Into<String>, witness: Option<Witness>) -> Self {
        match witness {
            None => Check::pass(name),
            Some(w) => Check::fail(name, w),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match (&c.status, &c.witness) {
                (Status::Pass, _) => writeln!(f, "PASS {}", c.name)?,
                (Status::Fail, Some(w)) => {
                    writeln!(f, "FAIL {} [{} at {:?}: {}]", c.name, w.identity, w.indices, w.residual)?
                }
                (Status::Fail, None) => writeln!(f, "FAIL {}", c.name)?,
            }
        }
        Ok(())
    }
}
