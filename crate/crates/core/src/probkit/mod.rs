//! Exact and numerical binomial tooling: Chernoff tails, the standard normal
//! CDF, exact distributions of binomial differences, and numerical checks of
//! the shift, equality, coupling and Berry–Esseen estimates those
//! distributions obey.
//!
//! Everything here is deterministic double-precision arithmetic. Exact
//! distributions are built by direct convolution, so the total number of
//! trials per call is capped at [`EXACT_TRIALS_LIMIT`].

mod bounds;
mod lemmas;
mod normal;
mod pmf;
mod suite;

pub use bounds::{chernoff_lower, chernoff_upper};
pub use lemmas::{
    berry_esseen_gap, check_binom_shift, check_coupling, check_equality_prob, check_four_rv, CouplingCheck,
    EqualityCheck, FourRvCheck, ShiftCheck,
};
pub use normal::{phi, psi};
pub use pmf::{binom_diff_pmf, Pmf};
pub use suite::{verify_lemmas, LemmaRow, SuiteConfig, Tolerances};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest total trial count accepted by exact-convolution operations.
pub const EXACT_TRIALS_LIMIT: u64 = 20_000;
/// Largest trial count accepted by [`berry_esseen_gap`].
pub const BERRY_ESSEEN_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ProbError {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("{name} = {value} must be finite and non-negative")]
    NegativeInput { name: &'static str, value: f64 },
    #[error("{total} total trials exceed the exact-computation limit of {limit}")]
    GuardExceeded { total: u64, limit: u64 },
    #[error("probability {0} makes the bound degenerate")]
    DegenerateProbability(f64),
    #[error("the compared binomials must share one success probability ({0} vs {1})")]
    MismatchedProbabilities(f64, f64),
    #[error("trial counts must be positive")]
    ZeroTrials,
}

/// Bin(trials, prob).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomSpec {
    pub trials: u64,
    pub prob: f64,
}

impl BinomSpec {
    pub fn new(trials: u64, prob: f64) -> Result<Self, ProbError> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(ProbError::InvalidProbability(prob));
        }
        Ok(Self { trials, prob })
    }

    pub fn mean(&self) -> f64 {
        self.trials as f64 * self.prob
    }

    pub fn variance(&self) -> f64 {
        self.trials as f64 * self.prob * (1.0 - self.prob)
    }

    fn validate(&self) -> Result<(), ProbError> {
        Self::new(self.trials, self.prob).map(|_| ())
    }
}

fn guard(specs: &[BinomSpec]) -> Result<(), ProbError> {
    for s in specs {
        s.validate()?;
    }
    let total: u64 = specs.iter().map(|s| s.trials).sum();
    if total > EXACT_TRIALS_LIMIT {
        return Err(ProbError::GuardExceeded { total, limit: EXACT_TRIALS_LIMIT });
    }
    Ok(())
}

/// Kahan-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for x in values {
        let y = x - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
