//! Fuzzy metric spaces under a t-norm, contractive gauge classes, threshold
//! (CM) contraction classifiers and a Picard fixed-point solver that
//! certifies Cauchy behaviour of its orbits.
//!
//! Every "for all" statement is evaluated on explicit, recorded grids.
//! Verdicts are certificates about what was tested, never proofs.

// NaN must fail comparisons, so `!(a >= b)` is used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod contractions;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod grid;
pub mod par;
pub mod spaces;
pub mod suites;

pub use error::{Error, Result};

/// Slack allowed on non-strict inequalities between computed nearness values.
pub const CMP_TOL: f64 = 1e-12;

/// Three-valued outcome shared by every checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        }
    }

    pub fn is_satisfied(self) -> bool {
        self == Verdict::Satisfied
    }

    /// Worst-of combination: any violation wins, then any inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Satisfied,
        }
    }

    pub fn all<I: IntoIterator<Item = Verdict>>(it: I) -> Verdict {
        it.into_iter().fold(Verdict::Satisfied, Verdict::and)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}
