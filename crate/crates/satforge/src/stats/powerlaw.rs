//! Maximum-likelihood power-law fitting for degree sequences.
//!
//! Follows the standard Clauset–Shalizi–Newman recipe: for each candidate
//! `xmin`, the exponent of the tail `x >= xmin` is estimated with the
//! discrete MLE under the 1/2-shift approximation,
//!
//! ```text
//!     alpha = 1 + n_tail / sum(ln(x_i / (xmin - 1/2)))
//! ```
//!
//! and the `xmin` minimizing the Kolmogorov–Smirnov distance between the
//! empirical tail and the fitted tail is selected.

use super::StatsError;

/// How tail values are modeled when estimating the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailModel {
    /// Discrete data approximated by a continuous power law shifted by 1/2.
    DiscreteHalfShift,
    /// Plain continuous Pareto MLE (no shift).
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerlawFit {
    pub alpha: f64,
    pub xmin: u64,
    /// KS distance between the empirical and fitted tail distributions.
    pub ks: f64,
    pub tail_size: usize,
}

const MIN_TAIL: usize = 10;

fn mle_alpha(tail: &[u64], xmin: u64, model: TailModel) -> Result<f64, StatsError> {
    debug_assert!(tail.iter().all(|&x| x >= xmin));
    let shift = match model {
        TailModel::DiscreteHalfShift => xmin as f64 - 0.5,
        TailModel::Continuous => xmin as f64,
    };
    let log_sum: f64 = tail.iter().map(|&x| (x as f64 / shift).ln()).sum();
    if log_sum <= 0.0 {
        return Err(StatsError::DegenerateTail);
    }
    Ok(1.0 + tail.len() as f64 / log_sum)
}

/// KS distance between the empirical tail CCDF and the fitted CCDF
/// `S(x) = ((x - 1/2) / (xmin - 1/2))^(1 - alpha)`, evaluated at the
/// distinct tail values.
fn ks_distance(sorted_tail: &[u64], xmin: u64, alpha: f64) -> f64 {
    let n = sorted_tail.len() as f64;
    let shift = xmin as f64 - 0.5;
    let mut max_dev = 0.0f64;
    let mut i = 0;
    while i < sorted_tail.len() {
        let x = sorted_tail[i];
        // Index of the first element >= x is i, so P(X >= x) = (n - i)/n.
        let emp = (sorted_tail.len() - i) as f64 / n;
        let model = ((x as f64 - 0.5) / shift).powf(1.0 - alpha);
        max_dev = max_dev.max((emp - model).abs());
        while i < sorted_tail.len() && sorted_tail[i] == x {
            i += 1;
        }
    }
    max_dev
}

/// Fits alpha for a fixed `xmin` with the given tail model.
pub fn powerlaw_alpha_fixed(
    degrees: &[u64],
    xmin: u64,
    model: TailModel,
) -> Result<PowerlawFit, StatsError> {
    if degrees.is_empty() {
        return Err(StatsError::EmptyDegrees);
    }
    let mut tail: Vec<u64> = degrees.iter().copied().filter(|&x| x >= xmin).collect();
    if tail.len() < MIN_TAIL {
        return Err(StatsError::TailTooSmall {
            need: MIN_TAIL,
            got: tail.len(),
        });
    }
    tail.sort_unstable();
    if tail.first() == tail.last() {
        return Err(StatsError::DegenerateTail);
    }
    let alpha = mle_alpha(&tail, xmin, model)?;
    let ks = ks_distance(&tail, xmin, alpha);
    Ok(PowerlawFit {
        alpha,
        xmin,
        ks,
        tail_size: tail.len(),
    })
}

/// Fits (alpha, xmin) by scanning every distinct value as an xmin candidate
/// and keeping the one with the smallest KS distance. Candidates whose tail
/// is shorter than 10 or degenerate are skipped.
pub fn powerlaw_alpha(degrees: &[u64]) -> Result<PowerlawFit, StatsError> {
    if degrees.is_empty() {
        return Err(StatsError::EmptyDegrees);
    }
    let mut values: Vec<u64> = degrees.to_vec();
    values.sort_unstable();
    if values.first() == values.last() {
        return Err(StatsError::DegenerateTail);
    }
    let mut candidates = values.clone();
    candidates.dedup();

    let mut best: Option<PowerlawFit> = None;
    let mut last_err = StatsError::TailTooSmall {
        need: MIN_TAIL,
        got: 0,
    };
    for &xmin in &candidates {
        match powerlaw_alpha_fixed(&values, xmin, TailModel::DiscreteHalfShift) {
            Ok(fit) => {
                let better = match &best {
                    None => true,
                    Some(b) => fit.ks < b.ks,
                };
                if better {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = e,
        }
    }
    best.ok_or(last_err)
}
