//! Average Percentage of Faults Detected.
//!
//! Every failing test is taken to reveal exactly one fault of its own, so
//! with n executed tests and m failing ones at 1-based positions p_i:
//!
//! ```text
//! APFD = 1 - (p_1 + ... + p_m) / (n * m) + 1 / (2n)
//! ```
//!
//! Excluded outcomes are dropped before n is counted.

use crate::dynamic::ExecutionTrace;
use crate::error::{Error, Result};
use crate::model::Outcome;

/// APFD of outcomes given in execution order.
pub fn apfd_of_outcomes<I>(outcomes: I) -> Result<f64>
where
    I: IntoIterator<Item = Outcome>,
{
    let mut n = 0u64;
    let mut m = 0u64;
    let mut position_sum = 0u64;
    for outcome in outcomes {
        match outcome {
            Outcome::Excluded => continue,
            Outcome::Pass => n += 1,
            Outcome::Fault => {
                n += 1;
                m += 1;
                position_sum += n;
            }
        }
    }
    if m == 0 {
        return Err(Error::UndefinedMetric);
    }
    let (n, m) = (n as f64, m as f64);
    Ok(1.0 - position_sum as f64 / (n * m) + 1.0 / (2.0 * n))
}

pub fn apfd(trace: &ExecutionTrace) -> Result<f64> {
    apfd_of_outcomes(trace.outcomes())
}
