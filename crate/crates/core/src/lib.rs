//! Train/test loss gaps of standard and adversarially trained linear
//! classifiers on a symmetric Gaussian mixture, with Monte Carlo checks,
//! a loss-threshold membership inference attack, and sample-size bounds
//! for an increasing generalization gap.

pub mod analytic;
pub mod attack;
pub mod bounds;
pub mod error;
pub mod lab;
pub mod normal;
pub mod optimize;
pub mod rng;
pub mod stats;
pub mod trainer;

pub use analytic::{EpsRegime, GapCurve, GapOrdering, GapPoint, GaussianSpec};
pub use attack::{AttackReport, Calibration, LossRecord, ThresholdMethod};
pub use bounds::VectorSpec;
pub use error::{Error, Result};
pub use lab::{Dataset, GapEstimate, LabeledSample, LinearModel, Solver};
pub use normal::normal_cdf;
pub use trainer::{Adversary, Init, TrainConfig, TrainTrace};
