//! Sampling, exact ERM and Monte Carlo estimates for the Gaussian model.

use rayon::prelude::*;

use crate::analytic::GaussianSpec;
use crate::error::{invalid, Error, Result};
use crate::rng::{mix, trial_seed, Stream, STREAM_ACCURACY, STREAM_GAP};
use crate::stats;
use crate::trainer::{train, TrainConfig};

/// `sign` with `sign(0) = 0` (unlike `f64::signum`).
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    x: Vec<f64>,
    y: f64,
}

impl LabeledSample {
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        if y != 1.0 && y != -1.0 {
            return Err(invalid("y", format!("label must be +1 or -1, got {y}")));
        }
        if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("x", "features must be non-empty and finite"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    spec: GaussianSpec,
    seed_tag: u64,
}

impl Dataset {
    /// Wrap hand-built samples; all must have dimension `spec.d`.
    pub fn new(samples: Vec<LabeledSample>, spec: GaussianSpec, seed_tag: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("samples", "dataset must be non-empty"));
        }
        for s in &samples {
            if s.x.len() != spec.d {
                return Err(Error::DimensionMismatch {
                    expected: spec.d,
                    actual: s.x.len(),
                });
            }
        }
        Ok(Self {
            samples,
            spec,
            seed_tag,
        })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn spec(&self) -> &GaussianSpec {
        &self.spec
    }

    pub fn seed_tag(&self) -> u64 {
        self.seed_tag
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same samples with every label negated.
    pub fn flipped_labels(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| LabeledSample {
                x: s.x.clone(),
                y: -s.y,
            })
            .collect();
        Self {
            samples,
            spec: self.spec,
            seed_tag: self.seed_tag,
        }
    }

    /// Per-coordinate mean margin `u_j = (1/n) Σ y_i x_ij`.
    pub fn mean_margin(&self) -> Vec<f64> {
        let mut u = self.sum_margin();
        let n = self.samples.len() as f64;
        for v in &mut u {
            *v /= n;
        }
        u
    }

    /// Per-coordinate unnormalized margin `Σ y_i x_ij`.
    pub fn sum_margin(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.spec.d];
        for s in &self.samples {
            for (acc, &x) in u.iter_mut().zip(&s.x) {
                *acc += s.y * x;
            }
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    theta: Vec<f64>,
    gamma: f64,
}

impl LinearModel {
    /// Checks `|θ_j| <= γ + 1e-12` for every coordinate.
    pub fn new(theta: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("must be finite and > 0, got {gamma}")));
        }
        if let Some((j, t)) = theta
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.abs() <= gamma + 1e-12))
        {
            return Err(invalid("theta", format!("|theta[{j}]| = {} exceeds gamma {gamma}", t.abs())));
        }
        Ok(Self { theta, gamma })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    fn dot(&self, x: &[f64]) -> f64 {
        self.theta.iter().zip(x).map(|(t, x)| t * x).sum()
    }

    fn l1(&self) -> f64 {
        self.theta.iter().map(|t| t.abs()).sum()
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl GapEstimate {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("trials", "need at least 2 values for a standard error"));
        }
        Ok(Self {
            mean: stats::mean(values),
            stderr: stats::stderr(values),
            trials: values.len(),
        })
    }

    /// `(mean − reference)/stderr`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.stderr
    }
}

fn draw_sample(spec: &GaussianSpec, label_flip: f64, rng: &mut Stream) -> LabeledSample {
    let y = rng.sign();
    let x = (0..spec.d)
        .map(|_| {
            let mean_sign = if label_flip > 0.0 && rng.uniform() < label_flip {
                -y
            } else {
                y
            };
            rng.normal(mean_sign * spec.mu, spec.sigma)
        })
        .collect();
    LabeledSample { x, y }
}

/// `n` samples with `y` uniform on ±1 and `x_j ~ N(y·μ, σ²)`.
///
/// With `label_flip = p > 0` each coordinate independently has its mean
/// sign flipped with probability `p`, i.e. `x_j ~ N(y·μ, σ²)` w.p. `ζ = 1 − p`
/// and `N(−y·μ, σ²)` otherwise. With `p = 0` no extra uniforms are drawn.
pub fn sample_dataset(spec: &GaussianSpec, n: usize, seed: u64, label_flip: f64) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(0.0..0.5).contains(&label_flip) {
        return Err(invalid("label_flip", format!("must lie in [0, 0.5), got {label_flip}")));
    }
    let mut rng = Stream::new(seed);
    let samples = (0..n).map(|_| draw_sample(spec, label_flip, &mut rng)).collect();
    Ok(Dataset {
        samples,
        spec: *spec,
        seed_tag: seed,
    })
}

/// `θ_j = γ·sign(u_j)`.
pub fn erm_std(data: &Dataset, gamma: f64) -> Result<LinearModel> {
    let theta = data.mean_margin().into_iter().map(|u| gamma * sign(u)).collect();
    LinearModel::new(theta, gamma)
}

/// Which margin enters the robust closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RobForm {
    /// `u = (1/n) Σ y_i x_i`.
    #[default]
    Mean,
    /// `Σ y_i x_i`; differs from `Mean` when `|u| < ε < n|u|`.
    Sum,
}

/// `θ_j = γ·sign(u_j − ε·sign(u_j))` with the mean margin.
pub fn erm_rob(data: &Dataset, gamma: f64, eps: f64) -> Result<LinearModel> {
    erm_rob_with(data, gamma, eps, RobForm::Mean)
}

pub fn erm_rob_with(data: &Dataset, gamma: f64, eps: f64, form: RobForm) -> Result<LinearModel> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(invalid("eps", format!("must be finite and >= 0, got {eps}")));
    }
    let u = match form {
        RobForm::Mean => data.mean_margin(),
        RobForm::Sum => data.sum_margin(),
    };
    let theta = u.into_iter().map(|u| gamma * sign(u - eps * sign(u))).collect();
    LinearModel::new(theta, gamma)
}

/// `−y·⟨θ, x⟩`.
pub fn linear_loss(model: &LinearModel, sample: &LabeledSample) -> Result<f64> {
    if model.dim() != sample.x.len() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: sample.x.len(),
        });
    }
    Ok(-sample.y * model.dot(&sample.x))
}

/// Worst case of the linear loss over `‖δ‖_∞ <= ε`: `−y·⟨θ, x⟩ + ε·‖θ‖₁`.
pub fn adversarial_linear_loss(model: &LinearModel, sample: &LabeledSample, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(invalid("eps", format!("must be >= 0, got {eps}")));
    }
    Ok(linear_loss(model, sample)? + eps * model.l1())
}

/// Mean linear loss over a dataset.
pub fn mean_linear_loss(model: &LinearModel, data: &Dataset) -> Result<f64> {
    let mut total = 0.0;
    for s in &data.samples {
        total += linear_loss(model, s)?;
    }
    Ok(total / data.len() as f64)
}

/// How each trial fits its model.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Solver {
    /// Closed-form ERM with the mean margin.
    #[default]
    ExactErm,
    /// Closed-form ERM with the unnormalized margin.
    ExactErmSum,
    /// Projected gradient descent; the trial's `eps` replaces `config.eps`.
    GradientDescent(TrainConfig),
}

impl Solver {
    pub fn fit(&self, data: &Dataset, gamma: f64, eps: f64) -> Result<LinearModel> {
        match self {
            Solver::ExactErm if eps == 0.0 => erm_std(data, gamma),
            Solver::ExactErm => erm_rob(data, gamma, eps),
            Solver::ExactErmSum => erm_rob_with(data, gamma, eps, RobForm::Sum),
            Solver::GradientDescent(cfg) => {
                let cfg = TrainConfig { eps, ..cfg.clone() };
                Ok(train(data, gamma, &cfg)?.0)
            }
        }
    }
}

/// The train and test sets a trial with seed `seed` draws.
pub fn trial_datasets(spec: &GaussianSpec, n: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    Ok((
        sample_dataset(spec, n, mix(seed, 1), 0.0)?,
        sample_dataset(spec, n, mix(seed, 2), 0.0)?,
    ))
}

/// One trial: fresh train and test sets of size `n`, fitted on train,
/// returns mean test loss minus mean train loss.
pub fn trial_gap(spec: &GaussianSpec, n: usize, eps: f64, seed: u64, solver: &Solver) -> Result<f64> {
    let (train_set, test_set) = trial_datasets(spec, n, seed)?;
    let model = solver.fit(&train_set, spec.gamma, eps)?;
    Ok(mean_linear_loss(&model, &test_set)? - mean_linear_loss(&model, &train_set)?)
}

/// Monte Carlo estimate of the expected loss gap.
///
/// Trial `t` is seeded with `trial_seed(master_seed, STREAM_GAP, t)`, so the
/// same trial index sees the same data for every `eps`. Trials run in
/// parallel; results are collected in trial order and reduced sequentially,
/// which makes the estimate independent of thread scheduling.
pub fn empirical_loss_gap(
    spec: &GaussianSpec,
    n: usize,
    eps: f64,
    trials: usize,
    master_seed: u64,
    solver: &Solver,
) -> Result<GapEstimate> {
    if trials < 2 {
        return Err(invalid("trials", format!("must be at least 2, got {trials}")));
    }
    GapEstimate::from_values(&trial_gaps(spec, n, eps, trials, master_seed, solver)?)
}

/// The per-trial gaps behind [`empirical_loss_gap`], in trial order.
pub fn trial_gaps(
    spec: &GaussianSpec,
    n: usize,
    eps: f64,
    trials: usize,
    master_seed: u64,
    solver: &Solver,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let results: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| trial_gap(spec, n, eps, trial_seed(master_seed, STREAM_GAP, t as u64), solver))
        .collect();
    collect_trials(results)
}

/// Unwrap per-trial results in order; the lowest failing trial index wins.
pub(crate) fn collect_trials<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results
        .into_iter()
        .enumerate()
        .map(|(trial, r)| {
            r.map_err(|e| Error::Trial {
                trial,
                source: Box::new(e),
            })
        })
        .collect()
}

const ACCURACY_CHUNK: usize = 1 << 14;

/// Fraction of `n_test` fresh samples with `sign(⟨θ, x⟩) = y`; a zero score
/// counts as an error. Samples are drawn in fixed-size chunks, each with its
/// own stream, and counted in parallel.
pub fn test_accuracy(model: &LinearModel, spec: &GaussianSpec, n_test: usize, seed: u64) -> Result<f64> {
    if model.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            actual: model.dim(),
        });
    }
    if n_test == 0 {
        return Err(invalid("n_test", "must be at least 1"));
    }
    let chunks = n_test.div_ceil(ACCURACY_CHUNK);
    let correct: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = Stream::new(trial_seed(seed, STREAM_ACCURACY, c as u64));
            let len = ACCURACY_CHUNK.min(n_test - c * ACCURACY_CHUNK);
            (0..len)
                .filter(|_| {
                    let s = draw_sample(spec, 0.0, &mut rng);
                    sign(model.dot(&s.x)) == s.y
                })
                .count()
        })
        .sum();
    Ok(correct as f64 / n_test as f64)
}
