use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: `{what}` has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cost domain exceeded at station {station}: ({d}, {b})")]
    Domain { station: usize, d: i64, b: i64 },
    #[error("infeasible: {0}")]
    Infeasible(Infeasibility),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration refused: estimated {estimated} points exceeds cap {cap}")]
    OracleCap { estimated: u128, cap: u128 },
    #[error("empty feasible set")]
    EmptyFeasibleSet,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

/// Certificate explaining why a problem has no feasible point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infeasibility {
    /// `ℓ(N) > D + B`.
    LowerBoundsExceedTotal { ell_sum: i64, total: i64 },
    /// `u(N) < D + B`.
    UpperBoundsBelowTotal { u_sum: i64, total: i64 },
    /// The smallest achievable half ℓ1 distance exceeds the budget.
    GammaMinExceedsBudget { gamma_min: i64, gamma: i64 },
    /// A station admits no dock total inside its bounds.
    EmptyStationRange { station: usize, lo: i64, hi: i64 },
    /// The restricted problem's group totals cannot be met.
    GroupTotals(String),
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::LowerBoundsExceedTotal { ell_sum, total } => {
                write!(f, "lower bounds sum to {ell_sum} > D+B = {total}")
            }
            Infeasibility::UpperBoundsBelowTotal { u_sum, total } => {
                write!(f, "upper bounds sum to {u_sum} < D+B = {total}")
            }
            Infeasibility::GammaMinExceedsBudget { gamma_min, gamma } => {
                write!(f, "gamma_min = {gamma_min} exceeds gamma = {gamma}")
            }
            Infeasibility::EmptyStationRange { station, lo, hi } => {
                write!(f, "station {station} has empty dock range [{lo}, {hi}]")
            }
            Infeasibility::GroupTotals(msg) => f.write_str(msg),
        }
    }
}

pub(crate) fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension {
            what,
            got,
            expected,
        });
    }
    Ok(())
}
