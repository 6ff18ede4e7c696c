//! Full-batch projected gradient descent on the (adversarial) linear loss.
//!
//! For the mean linear loss the gradient in `θ` is `−(1/n) Σ y_i (x_i + δ_i)`,
//! so every mode reduces to a step along the mean margin `u`, shifted by the
//! adversary:
//!
//! | adversary  | `δ_i`                  | step direction         |
//! |------------|------------------------|------------------------|
//! | `None`     | 0                      | `u`                    |
//! | `GradSign` | `−ε·y_i·sign(θ)`       | `u − ε·sign(θ)`        |
//! | `MeanSign` | `−ε·y_i·sign(u)`       | `u − ε·sign(u)`        |
//!
//! `GradSign` is the FGSM perturbation of the current model; `MeanSign`
//! fixes the perturbation from the data, and its clamped fixed point is the
//! closed-form robust minimizer. After each step θ is clamped to `[−γ, γ]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lab::{sign, Dataset, LinearModel};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adversary {
    None,
    GradSign,
    #[default]
    MeanSign,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    Zeros,
    /// Coordinates uniform on `[−scale, scale]` (then clamped to `[−γ, γ]`).
    SeededUniform { scale: f64, seed: u64 },
    /// Explicit starting point (clamped to `[−γ, γ]`).
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub eps: f64,
    pub adversary: Adversary,
    pub init: Init,
    /// Keep a copy of θ in every epoch record.
    pub record_theta: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 200,
            eps: 0.0,
            adversary: Adversary::default(),
            init: Init::default(),
            record_theta: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(invalid(
                "learning_rate",
                format!("must be finite and > 0, got {}", self.learning_rate),
            ));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(invalid("eps", format!("must be finite and >= 0, got {}", self.eps)));
        }
        match &self.init {
            Init::SeededUniform { scale, .. } if !(scale.is_finite() && *scale >= 0.0) => {
                return Err(invalid("init.scale", format!("must be finite and >= 0, got {scale}")));
            }
            Init::Given(t) if t.iter().any(|v| !v.is_finite()) => {
                return Err(invalid("init", "starting point must be finite"));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean standard linear loss on the training set after this epoch's step.
    pub mean_loss: f64,
    /// Mean loss under the configured adversary after the step.
    pub objective: f64,
    /// FNV-1a over the bit patterns of θ.
    pub theta_hash: u64,
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

pub fn theta_hash(theta: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in theta {
        for b in t.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Train a sup-norm-bounded linear model on `data`.
pub fn train(data: &Dataset, gamma: f64, config: &TrainConfig) -> Result<(LinearModel, TrainTrace)> {
    config.validate()?;
    if data.is_empty() {
        return Err(invalid("data", "dataset must be non-empty"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid("gamma", format!("must be finite and > 0, got {gamma}")));
    }
    let d = data.spec().d;
    let u = data.mean_margin();
    let eps = config.eps;
    let u_sign: Vec<f64> = u.iter().map(|&v| sign(v)).collect();

    let mut theta = match &config.init {
        Init::Zeros => vec![0.0; d],
        Init::Given(t) if t.len() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: t.len(),
            })
        }
        Init::Given(t) => t.iter().map(|v| v.clamp(-gamma, gamma)).collect(),
        &Init::SeededUniform { scale, seed } => {
            let mut rng = Stream::new(seed);
            (0..d)
                .map(|_| (scale * (2.0 * rng.uniform() - 1.0)).clamp(-gamma, gamma))
                .collect()
        }
    };

    let mut records = Vec::with_capacity(config.epochs);
    let mut direction = vec![0.0; d];
    for epoch in 1..=config.epochs {
        for j in 0..d {
            let shift = match config.adversary {
                Adversary::None => 0.0,
                Adversary::GradSign => eps * sign(theta[j]),
                Adversary::MeanSign => eps * u_sign[j],
            };
            direction[j] = u[j] - shift;
        }
        for (t, g) in theta.iter_mut().zip(&direction) {
            *t = (*t + config.learning_rate * g).clamp(-gamma, gamma);
        }

        let mean_loss = -dot(&theta, &u);
        let penalty = match config.adversary {
            Adversary::None => 0.0,
            Adversary::GradSign => eps * theta.iter().map(|t| t.abs()).sum::<f64>(),
            Adversary::MeanSign => eps * dot(&theta, &u_sign),
        };
        let objective = mean_loss + penalty;
        if !(mean_loss.is_finite() && objective.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
        records.push(EpochRecord {
            epoch,
            mean_loss,
            objective,
            theta_hash: theta_hash(&theta),
            theta: config.record_theta.then(|| theta.clone()),
        });
    }
    Ok((LinearModel::new(theta, gamma)?, TrainTrace { records }))
}
