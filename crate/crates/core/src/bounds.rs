//! Sample-size bounds below which the generalization gap between standard
//! and robust training keeps growing, for per-coordinate means `μ_j` and
//! deviations `σ_j`.
//!
//! Every bound is a minimum over the coordinates with `μ_j > 0` of
//! `max(a_j, b_j)·(σ_j/μ_j)²` with `b_j = 2·log(μ_j/(μ_j − ε))` and
//!
//! * original: `a_j = 3/2`
//! * improved: `a_j = (μ_j/ε)·log((μ_j + ε)/(μ_j − ε))`
//!
//! The label-noise variant is the improved bound with `μ_j` replaced by
//! `(2ζ − 1)·μ_j`. Coordinates count toward the minimum when their
//! effective mean is positive, as in the noiseless case.
//!
//! Bounds are real-valued; compare with an integer sample size via `floor`.

use crate::error::{invalid, Error, Result};
use crate::normal::normal_cdf;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSpec {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl VectorSpec {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                actual: sigma.len(),
            });
        }
        if mu.is_empty() {
            return Err(invalid("mu", "need at least one coordinate"));
        }
        if let Some(j) = mu.iter().position(|m| !m.is_finite()) {
            return Err(invalid("mu", format!("mu[{j}] is not finite")));
        }
        if let Some(j) = sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(invalid("sigma", format!("sigma[{j}] must be finite and > 0")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// `κ(x) = 2Φ(x) − Φ(x(1+δ)) − Φ(x(1−δ))`.
///
/// For `x > 0` the same quantity is summed from upper tails,
/// `Φ̄(x(1+δ)) + Φ̄(x(1−δ)) − 2Φ̄(x)`, which stays accurate as `x → ∞`.
pub fn kappa(x: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let k = |t: f64| {
        2.0 * normal_cdf(t) - normal_cdf(t * (1.0 + delta)) - normal_cdf(t * (1.0 - delta))
    };
    Ok(if x > 0.0 { -k(-x) } else { k(x) })
}

#[derive(Clone, Copy)]
enum FirstTerm {
    Original,
    Improved,
}

fn bound(spec: &VectorSpec, eps: f64, scale: f64, first: FirstTerm) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("eps", format!("must be finite and > 0, got {eps}")));
    }
    let mut best: Option<f64> = None;
    for (j, (&m, &s)) in spec.mu.iter().zip(&spec.sigma).enumerate() {
        let mu = scale * m;
        if !(mu > 0.0) {
            continue;
        }
        if eps >= mu {
            return Err(invalid(
                "eps",
                format!("eps = {eps} is not below the mean {mu} of coordinate {j}"),
            ));
        }
        // log(μ/(μ−ε)) and log((μ+ε)/(μ−ε)) without cancellation for small ε.
        let log_shift = -(-eps / mu).ln_1p();
        let a = match first {
            FirstTerm::Original => 1.5,
            FirstTerm::Improved => mu / eps * (2.0 * eps / (mu - eps)).ln_1p(),
        };
        let r = s / mu;
        let v = a.max(2.0 * log_shift) * r * r;
        best = Some(best.map_or(v, |b| b.min(v)));
    }
    best.ok_or_else(|| invalid("mu", "no coordinate has a positive mean"))
}

pub fn bound_original(spec: &VectorSpec, eps: f64) -> Result<f64> {
    bound(spec, eps, 1.0, FirstTerm::Original)
}

pub fn bound_improved(spec: &VectorSpec, eps: f64) -> Result<f64> {
    bound(spec, eps, 1.0, FirstTerm::Improved)
}

/// Improved bound under per-coordinate mean-sign noise with keep rate `zeta`.
pub fn bound_label_noise(spec: &VectorSpec, eps: f64, zeta: f64) -> Result<f64> {
    if !(zeta > 0.5 && zeta <= 1.0) {
        return Err(invalid("zeta", format!("must lie in (0.5, 1], got {zeta}")));
    }
    bound(spec, eps, 2.0 * zeta - 1.0, FirstTerm::Improved)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(mu: f64, sigma: f64) -> VectorSpec {
        VectorSpec::new(vec![mu], vec![sigma]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(VectorSpec::new(vec![1.0], vec![]).is_err());
        assert!(VectorSpec::new(vec![], vec![]).is_err());
        assert!(VectorSpec::new(vec![1.0], vec![0.0]).is_err());
        assert!(kappa(1.0, 0.0).is_err());
        assert!(kappa(1.0, 1.0).is_err());
        let neg = VectorSpec::new(vec![-1.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(bound_original(&neg, 0.1).is_err());
        assert!(bound_original(&one(1.0, 1.0), 1.0).is_err());
        assert!(bound_original(&one(1.0, 1.0), 0.0).is_err());
        assert!(bound_label_noise(&one(1.0, 1.0), 0.1, 0.5).is_err());
        assert!(bound_label_noise(&one(1.0, 1.0), 0.6, 0.75).is_err());
    }

    #[test]
    fn worked_values() {
        let s = one(1.0, 1.0);
        assert_eq!(bound_original(&s, 0.5).unwrap(), 1.5);
        assert!((bound_improved(&s, 0.5).unwrap() - 2.0 * 3f64.ln()).abs() < 1e-15);
        let v = bound_label_noise(&s, 0.1, 0.75).unwrap();
        assert!((v - 4.0 * 5.0 * 1.5f64.ln()).abs() < 1e-13, "{v}");
        assert!((bound_improved(&s, 1e-8).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_scaling_and_min() {
        let a = bound_original(&one(1.0, 1.0), 0.5).unwrap();
        assert_eq!(bound_original(&one(1.0, 2.0), 0.5).unwrap(), 4.0 * a);
        let two = VectorSpec::new(vec![1.0, 1.0], vec![1.0, 0.5]).unwrap();
        assert_eq!(bound_original(&two, 0.5).unwrap(), a / 4.0);
        // Non-positive means are skipped.
        let mixed = VectorSpec::new(vec![-3.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(bound_original(&mixed, 0.5).unwrap(), a);
    }

    #[test]
    fn kappa_basics() {
        assert_eq!(kappa(0.0, 0.3).unwrap(), 0.0);
        assert!(kappa(10.0, 0.1).unwrap().abs() < 1e-12);
        // At δ = 0.3 the Φ̄(7) term still dominates: κ(10) ≈ 1.28e-12.
        let k = kappa(10.0, 0.3).unwrap();
        assert!((k - 1.279_812_543_885_835e-12).abs() < 1e-20, "{k}");
        for x in [0.3, 1.0, 2.7] {
            assert_eq!(kappa(-x, 0.2).unwrap(), -kappa(x, 0.2).unwrap());
        }
    }
}
