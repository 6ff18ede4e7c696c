//! Closed-form loss gaps for sup-norm-bounded linear models on the
//! symmetric Gaussian mixture `x_j ~ N(y·μ, σ²)`, `y ~ ±1`.
//!
//! With `u` the mean margin of the training set, standard ERM gives
//! `θ = γ·sign(u)` and robust ERM `θ = γ·sign(u − ε·sign(u))`. The expected
//! gap between test and train linear loss is then
//!
//! ```text
//! r_std(n)    = dγσ·√(2/(nπ)) · e^{−nμ²/2σ²}
//! r_rob(n, ε) = dγσ·√(2/(nπ)) · (e^{−n(ε+μ)²/2σ²} + e^{−n(ε−μ)²/2σ²} − e^{−nμ²/2σ²})
//! ```
//!
//! `n` is accepted as a positive real everywhere in this module so curves
//! can be drawn smoothly; simulation code uses integer `n`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::normal::normal_cdf;
use crate::optimize::{bisect, expand_bracket, golden_section};

/// Absolute tolerance used by [`compare_rob_std`] on the normalized gap difference.
pub const COMPARE_TOL: f64 = 1e-12;
/// Relative width at which [`rob_root`] stops bisecting.
pub const ROOT_REL_TOL: f64 = 1e-12;
/// Width of the final golden-section interval in [`rob_minimum`].
pub const MIN_ABS_TOL: f64 = 1e-9;
/// Default search ceiling in `n` for [`rob_minimum`].
pub const DEFAULT_N_CEILING: f64 = 1e6;

/// Parameters of the Gaussian data model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct GaussianSpec {
    /// Dimension.
    pub d: usize,
    /// Per-coordinate class mean.
    pub mu: f64,
    /// Per-coordinate standard deviation.
    pub sigma: f64,
    /// Sup-norm bound on the weights.
    pub gamma: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    d: usize,
    mu: f64,
    sigma: f64,
    gamma: f64,
}

impl TryFrom<RawSpec> for GaussianSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        GaussianSpec::new(r.d, r.mu, r.sigma, r.gamma)
    }
}

impl GaussianSpec {
    pub fn new(d: usize, mu: f64, sigma: f64, gamma: f64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        for (name, v) in [("mu", mu), ("sigma", sigma), ("gamma", gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { d, mu, sigma, gamma })
    }

    /// d = 100, μ = σ = γ = 1.
    pub fn reference() -> Self {
        Self {
            d: 100,
            mu: 1.0,
            sigma: 1.0,
            gamma: 1.0,
        }
    }

    fn scale(&self, n: f64) -> f64 {
        self.d as f64 * self.gamma * self.sigma * (2.0 / (n * PI)).sqrt()
    }

    /// `exp(−n·shift²/2σ²)`
    fn gauss(&self, n: f64, shift: f64) -> f64 {
        (-(n * shift * shift) / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// `n/2σ²`, the rate in every exponent.
    fn rate(&self, n: f64) -> f64 {
        n / (2.0 * self.sigma * self.sigma)
    }
}

fn check_n(n: f64) -> Result<()> {
    if n.is_finite() && n > 0.0 {
        Ok(())
    } else {
        Err(invalid("n", format!("must be finite and > 0, got {n}")))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(invalid("eps", format!("must be finite and >= 0, got {eps}")))
    }
}

/// Expected train/test loss gap of standard ERM.
pub fn loss_gap_std(spec: &GaussianSpec, n: f64) -> Result<f64> {
    check_n(n)?;
    Ok(spec.scale(n) * spec.gauss(n, spec.mu))
}

/// Expected train/test loss gap of robust ERM with radius `eps`.
///
/// Negative once `eps > 2μ` and `n` passes the root reported by [`rob_root`].
/// The difference of the last two exponentials is formed with `expm1`, so
/// there is no cancellation near `ε = 2μ`.
pub fn loss_gap_rob(spec: &GaussianSpec, n: f64, eps: f64) -> Result<f64> {
    check_n(n)?;
    check_eps(eps)?;
    let mu = spec.mu;
    // e^{−c(ε−μ)²} − e^{−cμ²} = e^{−cμ²}·expm1(B) = −e^{−c(ε−μ)²}·expm1(−B),
    // B = cε(2μ−ε); whichever form keeps the larger exponential is used.
    let (_, b) = factor_exponents(spec, n, eps);
    let tail = if b <= 0.0 {
        spec.gauss(n, mu) * b.exp_m1()
    } else {
        -spec.gauss(n, eps - mu) * (-b).exp_m1()
    };
    Ok(spec.scale(n) * (spec.gauss(n, eps + mu) + tail))
}

/// The robust gap divided by the standard gap:
/// `h(n) = e^{−nε(ε+2μ)/2σ²} + e^{−nε(ε−2μ)/2σ²} − 1`.
///
/// It has the sign of `r_rob` and does not underflow where `r_rob` does.
pub fn rob_factor(spec: &GaussianSpec, n: f64, eps: f64) -> Result<f64> {
    check_n(n)?;
    check_eps(eps)?;
    let (a, b) = factor_exponents(spec, n, eps);
    Ok((-a).exp() + b.exp_m1())
}

/// `(A, B)` with `h = e^{−A} + e^{B} − 1`.
fn factor_exponents(spec: &GaussianSpec, n: f64, eps: f64) -> (f64, f64) {
    let k = spec.rate(n) * eps;
    (k * (eps + 2.0 * spec.mu), k * (2.0 * spec.mu - eps))
}

/// A real number stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// −1, 0 or +1.
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// `r_std` in log form; finite for every `n` where `r_std` itself underflows.
pub fn log_loss_gap_std(spec: &GaussianSpec, n: f64) -> Result<f64> {
    check_n(n)?;
    let ln_scale = (spec.d as f64 * spec.gamma * spec.sigma).ln() + 0.5 * (2.0 / (n * PI)).ln();
    Ok(ln_scale - spec.rate(n) * spec.mu * spec.mu)
}

/// `r_rob` as sign and log-magnitude.
pub fn log_loss_gap_rob(spec: &GaussianSpec, n: f64, eps: f64) -> Result<SignedLog> {
    let ln_std = log_loss_gap_std(spec, n)?;
    check_eps(eps)?;
    let (a, b) = factor_exponents(spec, n, eps);
    let (sign, ln_h) = if b == 0.0 {
        (1.0, -a)
    } else if b > 1.0 {
        // h = e^B (1 + e^{−A−B} − e^{−B}), the bracket lies in (1 − e^{−1}, 2).
        (1.0, b + ((-a - b).exp() - (-b).exp()).ln_1p())
    } else {
        let h = (-a).exp() + b.exp_m1();
        if h == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (h.signum(), h.abs().ln())
        }
    };
    Ok(SignedLog {
        sign,
        ln_abs: ln_std + ln_h,
    })
}

/// `∂r_std/∂n`; strictly negative.
pub fn dstd_dn(spec: &GaussianSpec, n: f64) -> Result<f64> {
    check_n(n)?;
    let d = spec.d as f64;
    let (mu, sigma, gamma) = (spec.mu, spec.sigma, spec.gamma);
    let e = spec.gauss(n, mu);
    let first = -d * gamma * mu * mu / (sigma * (2.0 * n * PI).sqrt()) * e;
    let second = -d * gamma * sigma / ((2.0 * PI).sqrt() * n.powf(1.5)) * e;
    Ok(first + second)
}

/// `∂r_rob/∂ε`.
pub fn drob_deps(spec: &GaussianSpec, n: f64, eps: f64) -> Result<f64> {
    check_n(n)?;
    check_eps(eps)?;
    let (mu, sigma) = (spec.mu, spec.sigma);
    let scale = spec.d as f64 * spec.gamma / sigma * (2.0 * n / PI).sqrt();
    let inner = (mu - eps) * spec.gauss(n, mu - eps) - (mu + eps) * spec.gauss(n, mu + eps);
    Ok(scale * inner)
}

/// Sign of `∂r_rob/∂ε` evaluated without underflow (−1, 0 or +1).
pub fn drob_deps_sign(spec: &GaussianSpec, n: f64, eps: f64) -> Result<f64> {
    check_n(n)?;
    check_eps(eps)?;
    let (mu, rate) = (spec.mu, spec.rate(n));
    let l1 = -rate * (mu - eps) * (mu - eps);
    let l2 = -rate * (mu + eps) * (mu + eps);
    let top = l1.max(l2);
    let s = (mu - eps) * (l1 - top).exp() - (mu + eps) * (l2 - top).exp();
    Ok(if s == 0.0 { 0.0 } else { s.signum() })
}

/// `n* = (σ²/2με)·log((μ+ε)/(μ−ε))`, defined for `0 < ε < μ`.
pub fn regime_threshold(spec: &GaussianSpec, eps: f64) -> Result<f64> {
    let mu = spec.mu;
    if !(eps > 0.0 && eps < mu) {
        return Err(invalid("eps", format!("threshold needs 0 < eps < mu, got {eps}")));
    }
    let log_ratio = (2.0 * eps / (mu - eps)).ln_1p();
    Ok(spec.sigma * spec.sigma / (2.0 * mu * eps) * log_ratio)
}

/// How `r_rob` responds to a small increase of `ε` at a given `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRegime {
    /// `0 < ε < μ` and `n < n*`.
    DecreasingInEps { threshold: f64 },
    /// `0 < ε < μ` and `n >= n*`.
    IncreasingInEps { threshold: f64 },
    /// `ε >= μ`: decreasing for every `n`.
    AlwaysDecreasing,
}

impl EpsRegime {
    pub fn threshold(&self) -> Option<f64> {
        match *self {
            EpsRegime::DecreasingInEps { threshold } | EpsRegime::IncreasingInEps { threshold } => {
                Some(threshold)
            }
            EpsRegime::AlwaysDecreasing => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EpsRegime::DecreasingInEps { .. } => "decreasing",
            EpsRegime::IncreasingInEps { .. } => "increasing",
            EpsRegime::AlwaysDecreasing => "always_decreasing",
        }
    }
}

/// Classify the ε-monotonicity of the robust gap at `(n, eps)`.
///
/// `eps = μ` (where the threshold's logarithm diverges) is reported as
/// [`EpsRegime::AlwaysDecreasing`]. For `eps >= 2μ` the sign of
/// `∂r_rob/∂ε` is evaluated numerically rather than assumed.
pub fn eps_regime(spec: &GaussianSpec, n: f64, eps: f64) -> Result<EpsRegime> {
    check_n(n)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("eps", format!("must be finite and > 0, got {eps}")));
    }
    if eps < spec.mu {
        let threshold = regime_threshold(spec, eps)?;
        return Ok(if n < threshold {
            EpsRegime::DecreasingInEps { threshold }
        } else {
            EpsRegime::IncreasingInEps { threshold }
        });
    }
    if eps >= 2.0 * spec.mu && drob_deps_sign(spec, n, eps)? >= 0.0 {
        return Err(Error::TheoryViolation(format!(
            "dr_rob/deps is not negative at n = {n}, eps = {eps}"
        )));
    }
    Ok(EpsRegime::AlwaysDecreasing)
}

/// Unique positive root of `r_rob(·, ε)` for `ε > 2μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobRoot {
    pub root: f64,
    /// Open interval `(2σ²ln2/ε(ε+2μ), 2σ²ln2/ε(ε−2μ))` known to contain the root.
    pub bracket: (f64, f64),
}

/// Root of the robust gap in `n`, or `None` when `ε <= 2μ` (no finite root).
///
/// The root is located by bisection of [`rob_factor`] on the analytic
/// bracket. A bracket without a sign change is reported as
/// [`Error::TheoryViolation`].
pub fn rob_root(spec: &GaussianSpec, eps: f64) -> Result<Option<RobRoot>> {
    check_eps(eps)?;
    let mu = spec.mu;
    if eps <= 2.0 * mu {
        return Ok(None);
    }
    let num = 2.0 * spec.sigma * spec.sigma * LN_2;
    let lo = num / (eps * (eps + 2.0 * mu));
    let hi = num / (eps * (eps - 2.0 * mu));
    let h = |n: f64| {
        let (a, b) = factor_exponents(spec, n, eps);
        (-a).exp() + b.exp_m1()
    };
    match bisect(h, lo, hi, ROOT_REL_TOL) {
        Some(root) => Ok(Some(RobRoot {
            root,
            bracket: (lo, hi),
        })),
        None => Err(Error::TheoryViolation(format!(
            "h(n) does not change sign on ({lo}, {hi}) for eps = {eps}"
        ))),
    }
}

/// Local minimum of `r_rob(·, ε)` beyond its root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobMinimum {
    pub n: f64,
    pub value: f64,
}

/// Minimizer of `n ↦ r_rob(n, ε)` for `ε > 2μ`, with the default ceiling.
pub fn rob_minimum(spec: &GaussianSpec, eps: f64) -> Result<RobMinimum> {
    rob_minimum_with_ceiling(spec, eps, DEFAULT_N_CEILING)
}

/// Bracket expansion from the root, then golden-section refinement.
pub fn rob_minimum_with_ceiling(spec: &GaussianSpec, eps: f64, ceiling: f64) -> Result<RobMinimum> {
    check_eps(eps)?;
    if eps <= 2.0 * spec.mu {
        return Err(invalid("eps", format!("a negative minimum needs eps > 2 mu, got {eps}")));
    }
    let n0 = rob_root(spec, eps)?
        .expect("eps > 2 mu always has a root")
        .root;
    let f = |n: f64| loss_gap_rob(spec, n, eps).unwrap_or(f64::NAN);
    let br = expand_bracket(&f, n0, 2.0 * n0, ceiling).ok_or(Error::NoBracket { ceiling })?;
    let (n, value) = golden_section(f, br.a, br.c, MIN_ABS_TOL);
    if !(value < 0.0 && n > n0) {
        return Err(Error::TheoryViolation(format!(
            "minimum at n = {n} has value {value}, root n0 = {n0}"
        )));
    }
    Ok(RobMinimum { n, value })
}

/// Ordering of the robust gap against the standard gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapOrdering {
    RobGreater,
    StdGreater,
    Equal,
}

/// Compare `r_rob(n, ε)` with `r_std(n)`.
///
/// Both share the positive factor `r_std`, so the comparison is made on
/// `(r_rob − r_std)/r_std = expm1(−A) + expm1(B)` with tolerance
/// [`COMPARE_TOL`]. This keeps the answer meaningful at large `n` where
/// both gaps underflow.
pub fn compare_rob_std(spec: &GaussianSpec, n: f64, eps: f64) -> Result<GapOrdering> {
    check_n(n)?;
    check_eps(eps)?;
    let (a, b) = factor_exponents(spec, n, eps);
    let diff = (-a).exp_m1() + b.exp_m1();
    Ok(if diff.abs() <= COMPARE_TOL {
        GapOrdering::Equal
    } else if diff > 0.0 {
        GapOrdering::RobGreater
    } else {
        GapOrdering::StdGreater
    })
}

/// Accuracy of the Bayes classifier, `Φ(√d·μ/σ)`.
pub fn bayes_accuracy(spec: &GaussianSpec) -> f64 {
    normal_cdf((spec.d as f64).sqrt() * spec.mu / spec.sigma)
}

/// One point of a loss-gap curve, optionally joined with a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub n: f64,
    pub eps: f64,
    pub analytic_gap: f64,
    pub empirical: Option<Empirical>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Empirical {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl GapPoint {
    /// Analytic point; uses `r_std` when `eps == 0`.
    pub fn analytic(spec: &GaussianSpec, n: f64, eps: f64) -> Result<Self> {
        let analytic_gap = if eps == 0.0 {
            loss_gap_std(spec, n)?
        } else {
            loss_gap_rob(spec, n, eps)?
        };
        Ok(Self {
            n,
            eps,
            analytic_gap,
            empirical: None,
        })
    }

    pub fn with_empirical(mut self, mean: f64, stderr: f64, trials: usize) -> Result<Self> {
        if !(stderr >= 0.0) {
            return Err(invalid("stderr", format!("must be >= 0, got {stderr}")));
        }
        self.empirical = Some(Empirical { mean, stderr, trials });
        Ok(self)
    }

    /// `(empirical − analytic)/stderr`, when a simulation is attached.
    pub fn z_score(&self) -> Option<f64> {
        self.empirical.map(|e| (e.mean - self.analytic_gap) / e.stderr)
    }
}

pub type GapCurve = Vec<GapPoint>;
