//! Checkers for the sufficient and necessary criteria on schedules, and
//! estimators of the growth hypotheses of weight families.

mod basic;
mod boxindex;
mod carac;
mod hypotheses;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub(crate) use basic::CellLocator;
pub use basic::{check_basic_criterion, BasicOptions};
pub(crate) use boxindex::BoxIndex;
pub use carac::{check_carac_general, check_caracstandard, check_walpha, COVERAGE_TOLERANCE};
pub use hypotheses::{estimate_hypotheses, HypothesisEstimate, HypothesisGrid};

/// Outcome of one clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    /// A term left the representable range; never counted as a pass.
    Indeterminate,
}

/// Where the worst margin of a clause was attained.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
}

impl Witness {
    pub fn entry(k: usize) -> Self {
        Witness {
            entry: Some(k),
            ..Witness::default()
        }
    }

    pub fn pair(k: usize, j: usize, coordinate: usize) -> Self {
        Witness {
            entry: Some(k),
            other: Some(j),
            coordinate: Some(coordinate),
            ..Witness::default()
        }
    }

    pub fn point(p: &[f64]) -> Self {
        Witness {
            point: Some(p.to_vec()),
            ..Witness::default()
        }
    }
}

/// One checked clause with its worst-case margin (negative when violated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub id: String,
    pub status: ClauseStatus,
    pub margin: f64,
    pub witness: Witness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn finite(margin: f64) -> f64 {
    margin.clamp(-f64::MAX, f64::MAX)
}

impl Clause {
    /// Passes iff `margin > 0` (the `< ε` clauses).
    pub fn strict(id: &str, margin: f64, witness: Witness) -> Self {
        let status = if margin.is_nan() {
            ClauseStatus::Indeterminate
        } else if margin > 0.0 {
            ClauseStatus::Pass
        } else {
            ClauseStatus::Fail
        };
        Clause {
            id: id.into(),
            status,
            margin: finite(margin),
            witness,
            note: None,
        }
    }

    /// Passes iff `margin ≥ −tolerance` (the `≥` and coverage clauses).
    pub fn at_least(id: &str, margin: f64, tolerance: f64, witness: Witness) -> Self {
        let status = if margin.is_nan() {
            ClauseStatus::Indeterminate
        } else if margin >= -tolerance {
            ClauseStatus::Pass
        } else {
            ClauseStatus::Fail
        };
        Clause {
            id: id.into(),
            status,
            margin: finite(margin),
            witness,
            note: None,
        }
    }

    pub fn indeterminate(id: &str, witness: Witness, note: impl Into<String>) -> Self {
        Clause {
            id: id.into(),
            status: ClauseStatus::Indeterminate,
            margin: 0.0,
            witness,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == ClauseStatus::Pass
    }
}

/// Structured evidence for one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub clauses: Vec<Clause>,
}

impl CriterionReport {
    pub fn new(criterion: &str, clauses: Vec<Clause>) -> Self {
        CriterionReport {
            criterion: criterion.into(),
            clauses,
        }
    }

    /// Overall pass: every clause passes.
    pub fn passed(&self) -> bool {
        !self.clauses.is_empty() && self.clauses.iter().all(Clause::passed)
    }

    pub fn clause(&self, id: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }

    /// Fixed-width table for terminals.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.criterion,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        for c in &self.clauses {
            let status = match c.status {
                ClauseStatus::Pass => "pass",
                ClauseStatus::Fail => "FAIL",
                ClauseStatus::Indeterminate => "indeterminate",
            };
            let _ = write!(
                out,
                "  {:<16} {:<13} margin {:>12.4e}",
                c.id, status, c.margin
            );
            if let Some(k) = c.witness.entry {
                let _ = write!(out, "  at entry {k}");
            }
            if let Some(j) = c.witness.other {
                let _ = write!(out, " vs {j}");
            }
            if let Some(note) = &c.note {
                let _ = write!(out, "  ({note})");
            }
            out.push('\n');
        }
        out
    }
}

/// Worst (smallest) value and its position; ties keep the first position.
pub(crate) fn argmin<I: IntoIterator<Item = (f64, Witness)>>(items: I) -> (f64, Witness) {
    let mut best = (f64::INFINITY, Witness::default());
    for (v, w) in items {
        if v < best.0 || (v.is_nan() && !best.0.is_nan()) {
            best = (v, w);
        }
    }
    best
}
