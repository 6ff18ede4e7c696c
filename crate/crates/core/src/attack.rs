//! Loss-threshold membership inference.
//!
//! An example is predicted to be a training member iff its loss is strictly
//! below a constant threshold `τ`. `τ` is calibrated on a shadow model as the
//! midpoint of the member and nonmember medians (or means).

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::GaussianSpec;
use crate::error::{invalid, Error, Result};
use crate::lab::{collect_trials, linear_loss, trial_datasets, Solver};
use crate::rng::{trial_seed, Stream, STREAM_SHADOW, STREAM_TARGET};
use crate::stats;

pub const TRACE_HEADER: &str = "example_id,loss,is_member";

#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    pub example_id: String,
    pub loss: f64,
    pub is_member: bool,
}

impl LossRecord {
    pub fn new(example_id: impl Into<String>, loss: f64, is_member: bool) -> Result<Self> {
        if !loss.is_finite() {
            return Err(invalid("loss", format!("must be finite, got {loss}")));
        }
        Ok(Self {
            example_id: example_id.into(),
            loss,
            is_member,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ThresholdMethod {
    #[default]
    #[serde(rename = "median", alias = "median_midpoint")]
    MedianMidpoint,
    #[serde(rename = "mean", alias = "mean_midpoint")]
    MeanMidpoint,
}

impl ThresholdMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ThresholdMethod::MedianMidpoint => "median",
            ThresholdMethod::MeanMidpoint => "mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub tau: f64,
    /// The member and nonmember statistics coincide.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub tau: f64,
    pub accuracy: f64,
    /// Mean nonmember loss minus mean member loss.
    pub loss_gap: f64,
    pub n_members: usize,
    pub n_nonmembers: usize,
    /// `None` when `τ` was supplied rather than calibrated.
    pub method: Option<ThresholdMethod>,
    pub degenerate: bool,
}

fn check_losses(losses: &[f64], class: &'static str) -> Result<()> {
    if losses.is_empty() {
        return Err(Error::MissingClass(class));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(invalid("loss", format!("{class} losses must be finite")));
    }
    Ok(())
}

/// `τ = (stat(members) + stat(nonmembers))/2`.
pub fn calibrate_threshold(members: &[f64], nonmembers: &[f64], method: ThresholdMethod) -> Result<Calibration> {
    check_losses(members, "members")?;
    check_losses(nonmembers, "nonmembers")?;
    let stat = match method {
        ThresholdMethod::MedianMidpoint => stats::median,
        ThresholdMethod::MeanMidpoint => stats::mean,
    };
    let (a, b) = (stat(members), stat(nonmembers));
    if a == b {
        return Ok(Calibration {
            tau: a,
            degenerate: true,
        });
    }
    Ok(Calibration {
        tau: 0.5 * (a + b),
        degenerate: false,
    })
}

/// Score `records` against `τ`: member iff `loss < τ`.
pub fn attack_accuracy(records: &[LossRecord], tau: f64) -> Result<AttackReport> {
    let (mut n_members, mut n_nonmembers) = (0usize, 0usize);
    let (mut sum_m, mut sum_n) = (0.0, 0.0);
    let mut correct = 0usize;
    for r in records {
        if r.is_member {
            n_members += 1;
            sum_m += r.loss;
        } else {
            n_nonmembers += 1;
            sum_n += r.loss;
        }
        if (r.loss < tau) == r.is_member {
            correct += 1;
        }
    }
    if n_members == 0 {
        return Err(Error::MissingClass("members"));
    }
    if n_nonmembers == 0 {
        return Err(Error::MissingClass("nonmembers"));
    }
    Ok(AttackReport {
        tau,
        accuracy: correct as f64 / records.len() as f64,
        loss_gap: sum_n / n_nonmembers as f64 - sum_m / n_members as f64,
        n_members,
        n_nonmembers,
        method: None,
        degenerate: false,
    })
}

/// `ℓ(b) − ℓ(a)`: positive when `b` looks less like a member than `a`.
pub fn comparative_leakage(loss_a: f64, loss_b: f64) -> f64 {
    loss_b - loss_a
}

/// Losses of the fitted model on a fresh train (members) and test
/// (nonmembers) draw of size `n` each.
fn member_split(spec: &GaussianSpec, n: usize, eps: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (train_set, test_set) = trial_datasets(spec, n, seed)?;
    let model = Solver::ExactErm.fit(&train_set, spec.gamma, eps)?;
    let losses = |ds: &crate::lab::Dataset| -> Result<Vec<f64>> {
        ds.samples().iter().map(|s| linear_loss(&model, s)).collect()
    };
    Ok((losses(&train_set)?, losses(&test_set)?))
}

fn experiment_trial(
    spec: &GaussianSpec,
    n: usize,
    eps: f64,
    master_seed: u64,
    trial: u64,
    method: ThresholdMethod,
) -> Result<AttackReport> {
    let (sm, sn) = member_split(spec, n, eps, trial_seed(master_seed, STREAM_SHADOW, trial))?;
    let cal = calibrate_threshold(&sm, &sn, method)?;
    let (tm, tn) = member_split(spec, n, eps, trial_seed(master_seed, STREAM_TARGET, trial))?;
    let records: Vec<LossRecord> = tm
        .iter()
        .map(|&l| (l, true))
        .chain(tn.iter().map(|&l| (l, false)))
        .enumerate()
        .map(|(i, (loss, is_member))| LossRecord {
            example_id: i.to_string(),
            loss,
            is_member,
        })
        .collect();
    let mut report = attack_accuracy(&records, cal.tau)?;
    report.method = Some(method);
    report.degenerate = cal.degenerate;
    Ok(report)
}

/// Shadow-calibrated attack against exact-ERM models, one report per trial.
///
/// Shadow and target data come from the disjoint seed streams
/// `STREAM_SHADOW` and `STREAM_TARGET`; trials run in parallel and are
/// returned in trial order.
pub fn run_membership_experiment(
    spec: &GaussianSpec,
    n: usize,
    eps: f64,
    trials: usize,
    master_seed: u64,
    method: ThresholdMethod,
) -> Result<Vec<AttackReport>> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|t| experiment_trial(spec, n, eps, master_seed, t as u64, method))
        .collect();
    collect_trials(results)
}

/// Parse a loss trace: header `example_id,loss,is_member`, then one record
/// per line with `is_member` exactly `0` or `1`. A trailing newline is optional.
pub fn parse_loss_trace(text: &str) -> Result<Vec<LossRecord>> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n');
    match lines.next() {
        Some(TRACE_HEADER) => {}
        other => {
            return Err(Error::Trace {
                line: 1,
                reason: format!("expected header `{TRACE_HEADER}`, got `{}`", other.unwrap_or("")),
            })
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let err = |reason: String| Error::Trace { line: line_no, reason };
        let fields: Vec<&str> = line.split(',').collect();
        let [id, loss, member] = fields[..] else {
            return Err(err(format!("expected 3 fields, got {}", fields.len())));
        };
        if id.is_empty() {
            return Err(err("empty example_id".into()));
        }
        let loss: f64 = loss
            .parse()
            .map_err(|_| err(format!("loss `{loss}` is not a number")))?;
        if !loss.is_finite() {
            return Err(err(format!("loss `{loss}` is not finite")));
        }
        let is_member = match member {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("is_member must be 0 or 1, got `{other}`"))),
        };
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.to_string()));
        }
        out.push(LossRecord {
            example_id: id.to_string(),
            loss,
            is_member,
        });
    }
    Ok(out)
}

pub fn read_loss_trace<R: Read>(mut reader: R) -> Result<Vec<LossRecord>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_loss_trace(&text)
}

pub fn load_loss_trace(path: impl AsRef<Path>) -> Result<Vec<LossRecord>> {
    read_loss_trace(std::fs::File::open(path)?)
}

/// Render records in the trace schema (shortest round-trip floats).
pub fn format_loss_trace(records: &[LossRecord]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!("{},{:?},{}\n", r.example_id, r.loss, u8::from(r.is_member)));
    }
    s
}

/// Randomly drop records of the larger class (without replacement) until
/// both classes have the same size. Order within each class is preserved.
pub fn balanced_subsample(records: &[LossRecord], seed: u64) -> Result<Vec<LossRecord>> {
    let members: Vec<usize> = (0..records.len()).filter(|&i| records[i].is_member).collect();
    let nonmembers: Vec<usize> = (0..records.len()).filter(|&i| !records[i].is_member).collect();
    if members.is_empty() {
        return Err(Error::MissingClass("members"));
    }
    if nonmembers.is_empty() {
        return Err(Error::MissingClass("nonmembers"));
    }
    let k = members.len().min(nonmembers.len());
    let mut rng = Stream::new(seed);
    let mut pick = |mut idx: Vec<usize>| {
        // Partial Fisher–Yates, then restore input order.
        for i in 0..k {
            let j = i + rng.below(idx.len() - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx.sort_unstable();
        idx
    };
    let mut keep = pick(members);
    keep.extend(pick(nonmembers));
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| records[i].clone()).collect())
}
