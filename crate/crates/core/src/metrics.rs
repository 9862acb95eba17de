//! Success rate and success weighted by path length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three numbers each metric needs from an episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub success: bool,
    /// Executed path length `p`, meters.
    pub path_length_m: f64,
    /// Optimal path length `l`, meters.
    pub optimal_length_m: f64,
}

fn check(o: &Outcome) -> Result<()> {
    if !(o.optimal_length_m > 0.0) {
        return Err(Error::NonPositiveOptimal(o.optimal_length_m));
    }
    if !(o.path_length_m >= 0.0) {
        return Err(Error::Negative { name: "path_length_m", value: o.path_length_m });
    }
    Ok(())
}

/// `(100 / N) · Σ S_i · l_i / max(p_i, l_i)`; 0 for an empty list.
pub fn spl(outcomes: &[Outcome]) -> Result<f64> {
    let mut sum = 0.0;
    for o in outcomes {
        check(o)?;
        if o.success {
            sum += o.optimal_length_m / o.path_length_m.max(o.optimal_length_m);
        }
    }
    Ok(if outcomes.is_empty() { 0.0 } else { 100.0 * sum / outcomes.len() as f64 })
}

/// Percentage of successful episodes; 0 for an empty list.
pub fn success_rate(outcomes: &[Outcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    100.0 * outcomes.iter().filter(|o| o.success).count() as f64 / outcomes.len() as f64
}
