//! Geometric weight classes, randomized shifted rounding, and the
//! closed-form constants of the rounding matcher's analysis.
//!
//! Weights are partitioned into classes `[phi*theta^i, phi*theta^(i+1))`
//! where `phi = theta^tau` and `tau` is drawn uniformly from `(0, 1]` once
//! per run. Rounding maps a weight to its class's lower endpoint, so
//! `w_rounded <= w < theta * w_rounded` always holds.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoundingError {
    #[error("theta must be > 1 (got {0})")]
    ThetaAtMostOne(f64),
    #[error("theta must be > 2 (got {0})")]
    ThetaAtMostTwo(f64),
    #[error("tau must lie in (0, 1] (got {0})")]
    TauOutOfRange(f64),
    #[error("weight must be positive (got {0})")]
    NonPositiveWeight(f64),
}

/// A sampled rounding scheme: base `theta`, shift `tau`, and the induced
/// class anchor `phi = theta^tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingScheme {
    pub theta: f64,
    pub tau: f64,
    pub phi: f64,
}

impl RoundingScheme {
    pub fn new(theta: f64, tau: f64) -> Result<Self, RoundingError> {
        if !(theta > 1.0) || !theta.is_finite() {
            return Err(RoundingError::ThetaAtMostOne(theta));
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(RoundingError::TauOutOfRange(tau));
        }
        Ok(RoundingScheme {
            theta,
            tau,
            phi: theta.powf(tau),
        })
    }

    /// Draws `tau ~ Uniform(0, 1]` from `rng` (a uniform draw in `[0, 1)`
    /// mapped through `x -> 1 - x`, so `tau = 0` is impossible).
    pub fn sample(theta: f64, rng: &mut impl Rng) -> Result<Self, RoundingError> {
        let x: f64 = rng.gen();
        RoundingScheme::new(theta, 1.0 - x)
    }

    /// Lower endpoint of class `i`: `phi * theta^i`.
    pub fn class_lower(&self, i: i32) -> f64 {
        self.phi * self.theta.powi(i)
    }

    /// The unique `i` with `phi*theta^i <= w < phi*theta^(i+1)` under
    /// floating-point comparison. A log-space guess is corrected by stepping
    /// so the interval membership holds exactly, even at class boundaries.
    pub fn class_index(&self, w: f64) -> Result<i32, RoundingError> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(RoundingError::NonPositiveWeight(w));
        }
        let mut i = (w.ln() / self.theta.ln() - self.tau).floor() as i32;
        while self.class_lower(i + 1) <= w {
            i += 1;
        }
        while self.class_lower(i) > w {
            i -= 1;
        }
        Ok(i)
    }

    /// `phi * theta^class_index(w)` for positive weights; zero weights round
    /// to zero (the classes only cover positive weights, and a zero-weight
    /// edge contributes nothing to any objective).
    pub fn rounded_weight(&self, w: f64) -> f64 {
        if w == 0.0 {
            return 0.0;
        }
        let i = self
            .class_index(w)
            .expect("rounded_weight requires w >= 0");
        self.class_lower(i)
    }
}

/// Expected value of `rounded/original` over the shift draw: `(theta-1)/(theta ln theta)`.
pub fn expected_rounding_ratio(theta: f64) -> Result<f64, RoundingError> {
    if !(theta > 1.0) || !theta.is_finite() {
        return Err(RoundingError::ThetaAtMostOne(theta));
    }
    Ok((theta - 1.0) / (theta * theta.ln()))
}

/// Worst-case expected competitive ratio of the geometric matcher:
/// `2 theta ln theta / (theta - 2)`, defined for `theta > 2`.
pub fn competitive_ratio(theta: f64) -> Result<f64, RoundingError> {
    if !(theta > 2.0) || !theta.is_finite() {
        return Err(RoundingError::ThetaAtMostTwo(theta));
    }
    Ok(2.0 * theta * theta.ln() / (theta - 2.0))
}

/// The base minimizing the competitive ratio: the unique root of
/// `f(theta) = theta - 2 ln theta - 2` in `(2, inf)`, located by bisection
/// on `[3, 10]` (`f(3) < 0 < f(10)`; `f` is increasing past its minimum at
/// `theta = 2`, so the bracket contains exactly one root). At the root the
/// ratio equals the base itself.
pub fn optimal_theta(tolerance: f64) -> f64 {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let f = |t: f64| t - 2.0 * t.ln() - 2.0;
    let (mut lo, mut hi) = (3.0_f64, 10.0_f64);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    // |f'| < 1 on the bracket, so interval width <= tolerance bounds the
    // residual |f(mid)| below tolerance as well.
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Monte Carlo estimate of `E[rounded/original]` for a fixed weight: mean of
/// `rounded_weight(w)/w` over fresh shift draws.
pub fn monte_carlo_rounding_ratio(
    theta: f64,
    w: f64,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<f64, RoundingError> {
    if !(w > 0.0) {
        return Err(RoundingError::NonPositiveWeight(w));
    }
    let mut sum = 0.0;
    for _ in 0..trials {
        let s = RoundingScheme::sample(theta, rng)?;
        sum += s.rounded_weight(w) / w;
    }
    Ok(sum / trials as f64)
}
