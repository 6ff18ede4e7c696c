use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use robgap::analytic::{self, GapOrdering};
use robgap::attack::{self, AttackReport, LossRecord, ThresholdMethod};
use robgap::bounds::{self, VectorSpec};
use robgap::lab::{self, LinearModel, Solver};
use robgap::rng::{trial_seed, STREAM_GAP, STREAM_SUBSAMPLE};
use robgap::stats;
use robgap::trainer::{self, Init, TrainConfig};
use robgap::GaussianSpec;

use crate::manifest::{Settings, SolverKind};
use crate::plot::{self, PlotOptions};
use crate::table::{num, opt, Table};

fn ordering_label(o: GapOrdering) -> &'static str {
    match o {
        GapOrdering::RobGreater => "rob_greater",
        GapOrdering::StdGreater => "std_greater",
        GapOrdering::Equal => "equal",
    }
}

fn write_svg(table: &Table, path: &Path, opts: PlotOptions) -> Result<()> {
    let svg = plot::render(table, &opts)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

pub const THEORY_HEADER: [&str; 11] = [
    "n",
    "eps",
    "gap_std",
    "gap_rob",
    "gap_diff",
    "ordering",
    "regime",
    "threshold",
    "root",
    "min_n",
    "min_value",
];

pub fn theory(s: &Settings) -> Result<Table> {
    let spec = &s.spec;
    let mut t = Table::new(&THEORY_HEADER);
    for &eps in &s.eps_list {
        let (mut root, mut min_n, mut min_value) = (None, None, None);
        if eps > 2.0 * spec.mu {
            root = analytic::rob_root(spec, eps)?.map(|r| r.root);
            match analytic::rob_minimum(spec, eps) {
                Ok(m) => {
                    min_n = Some(m.n);
                    min_value = Some(m.value);
                }
                Err(e) => eprintln!("warning: eps = {eps}: {e}"),
            }
        }
        for &n in &s.n_grid {
            let std = analytic::loss_gap_std(spec, n)?;
            let rob = analytic::loss_gap_rob(spec, n, eps)?;
            let (regime, threshold) = if eps > 0.0 {
                let r = analytic::eps_regime(spec, n, eps)?;
                (r.label(), r.threshold())
            } else {
                ("none", None)
            };
            t.push(vec![
                num(n),
                num(eps),
                num(std),
                num(rob),
                num(rob - std),
                ordering_label(analytic::compare_rob_std(spec, n, eps)?).into(),
                regime.into(),
                opt(threshold),
                opt(root),
                opt(min_n),
                opt(min_value),
            ]);
        }
    }
    if let Some(p) = &s.svg {
        write_svg(
            &t,
            p,
            PlotOptions {
                x: "n".into(),
                y: "gap_rob".into(),
                series: Some("eps".into()),
                log_x: true,
                title: Some("analytic loss gap".into()),
            },
        )?;
    }
    Ok(t)
}

fn train_config(s: &Settings) -> TrainConfig {
    TrainConfig {
        learning_rate: s.learning_rate,
        epochs: s.epochs,
        adversary: s.adversary,
        init: Init::Zeros,
        ..TrainConfig::default()
    }
}

fn solver(s: &Settings) -> Solver {
    match s.solver {
        SolverKind::Exact => Solver::ExactErm,
        SolverKind::Gd => Solver::GradientDescent(train_config(s)),
    }
}

pub const MC_HEADER: [&str; 8] = ["n", "eps", "solver", "trials", "empirical_mean", "empirical_stderr", "analytic", "z"];

pub fn mc(s: &Settings, train_trace: Option<&Path>) -> Result<Table> {
    if s.trials < 2 {
        bail!("invalid parameter `trials`: mc needs at least 2 for a standard error");
    }
    let grid = s.integer_grid()?;
    let solver = solver(s);
    let label = match s.solver {
        SolverKind::Exact => "exact",
        SolverKind::Gd => "gd",
    };
    let mut t = Table::new(&MC_HEADER);
    let mut traces = Table::new(&["n", "eps", "epoch", "mean_loss", "objective", "theta_hash"]);
    for &eps in &s.eps_list {
        for &n in &grid {
            let est = lab::empirical_loss_gap(&s.spec, n, eps, s.trials, s.seed, &solver)
                .with_context(|| format!("n = {n}, eps = {eps}"))?;
            let analytic = analytic::loss_gap_rob(&s.spec, n as f64, eps)?;
            t.push(vec![
                n.to_string(),
                num(eps),
                label.into(),
                est.trials.to_string(),
                num(est.mean),
                num(est.stderr),
                num(analytic),
                num(est.z_score(analytic)),
            ]);
            if train_trace.is_some() {
                // Trial 0's training run for this cell.
                let (train_set, _) = lab::trial_datasets(&s.spec, n, trial_seed(s.seed, STREAM_GAP, 0))?;
                let cfg = TrainConfig { eps, ..train_config(s) };
                let (_, trace) = trainer::train(&train_set, s.spec.gamma, &cfg)?;
                for r in trace.records {
                    traces.push(vec![
                        n.to_string(),
                        num(eps),
                        r.epoch.to_string(),
                        num(r.mean_loss),
                        num(r.objective),
                        format!("{:016x}", r.theta_hash),
                    ]);
                }
            }
        }
    }
    if let Some(p) = train_trace {
        traces.emit(Some(p))?;
    }
    if let Some(p) = &s.svg {
        write_svg(
            &t,
            p,
            PlotOptions {
                x: "n".into(),
                y: "empirical_mean".into(),
                series: Some("eps".into()),
                log_x: true,
                title: Some(format!("empirical loss gap ({label}, {} trials)", s.trials)),
            },
        )?;
    }
    Ok(t)
}

pub const ATTACK_HEADER: [&str; 15] = [
    "kind",
    "n",
    "eps",
    "trial",
    "method",
    "tau",
    "accuracy",
    "accuracy_stderr",
    "loss_gap",
    "loss_gap_stderr",
    "analytic_gap",
    "n_members",
    "n_nonmembers",
    "degenerate",
    "trials",
];

fn se_cell(xs: &[f64]) -> String {
    if xs.len() < 2 {
        String::new()
    } else {
        num(stats::stderr(xs))
    }
}

pub fn attack_gaussian(s: &Settings) -> Result<Table> {
    let grid = s.integer_grid()?;
    let method = s.threshold;
    let mut t = Table::new(&ATTACK_HEADER);
    for &eps in &s.eps_list {
        for &n in &grid {
            let reports = attack::run_membership_experiment(&s.spec, n, eps, s.trials, s.seed, method)
                .with_context(|| format!("n = {n}, eps = {eps}"))?;
            let analytic = analytic::loss_gap_rob(&s.spec, n as f64, eps)?;
            for (i, r) in reports.iter().enumerate() {
                t.push(vec![
                    "trial".into(),
                    n.to_string(),
                    num(eps),
                    i.to_string(),
                    method.label().into(),
                    num(r.tau),
                    num(r.accuracy),
                    String::new(),
                    num(r.loss_gap),
                    String::new(),
                    num(analytic),
                    r.n_members.to_string(),
                    r.n_nonmembers.to_string(),
                    u8::from(r.degenerate).to_string(),
                    "1".into(),
                ]);
            }
            t.push(aggregate_row(&reports, n.to_string(), num(eps), method.label(), num(analytic)));
        }
    }
    if let Some(p) = &s.svg {
        let mut agg = Table::new(&ATTACK_HEADER);
        agg.rows = t.rows.iter().filter(|r| r[0] == "aggregate").cloned().collect();
        write_svg(
            &agg,
            p,
            PlotOptions {
                x: "n".into(),
                y: "accuracy".into(),
                series: Some("eps".into()),
                log_x: true,
                title: Some("membership attack accuracy".into()),
            },
        )?;
    }
    Ok(t)
}

fn aggregate_row(reports: &[AttackReport], n: String, eps: String, method: &str, analytic: String) -> Vec<String> {
    let acc: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let gap: Vec<f64> = reports.iter().map(|r| r.loss_gap).collect();
    let tau: Vec<f64> = reports.iter().map(|r| r.tau).collect();
    vec![
        "aggregate".into(),
        n,
        eps,
        String::new(),
        method.into(),
        num(stats::mean(&tau)),
        num(stats::mean(&acc)),
        se_cell(&acc),
        num(stats::mean(&gap)),
        se_cell(&gap),
        analytic,
        reports.iter().map(|r| r.n_members).sum::<usize>().to_string(),
        reports.iter().map(|r| r.n_nonmembers).sum::<usize>().to_string(),
        reports.iter().filter(|r| r.degenerate).count().to_string(),
        reports.len().to_string(),
    ]
}

pub struct TraceArgs {
    pub trace: PathBuf,
    pub shadow: Option<PathBuf>,
    pub tau: Option<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub method: ThresholdMethod,
}

fn split(records: &[LossRecord]) -> (Vec<f64>, Vec<f64>) {
    let m = records.iter().filter(|r| r.is_member).map(|r| r.loss).collect();
    let n = records.iter().filter(|r| !r.is_member).map(|r| r.loss).collect();
    (m, n)
}

/// Attack an externally produced loss trace.
///
/// `τ` comes from `--tau`, else from the shadow trace, else from the target
/// trace itself. Unbalanced targets are subsampled without replacement to
/// equal class sizes, independently for each repeat.
pub fn attack_trace(a: &TraceArgs) -> Result<Table> {
    if a.repeats == 0 {
        bail!("invalid parameter `repeats`: must be at least 1");
    }
    let target = attack::load_loss_trace(&a.trace).with_context(|| format!("loading {}", a.trace.display()))?;
    let shadow_cal = match (&a.tau, &a.shadow) {
        (Some(_), _) => None,
        (None, Some(p)) => {
            let shadow = attack::load_loss_trace(p).with_context(|| format!("loading {}", p.display()))?;
            let (m, n) = split(&shadow);
            Some(attack::calibrate_threshold(&m, &n, a.method)?)
        }
        (None, None) => None,
    };
    let (m, n) = split(&target);
    let balanced = !m.is_empty() && m.len() == n.len();
    let mut t = Table::new(&ATTACK_HEADER);
    let mut reports = Vec::new();
    for rep in 0..a.repeats {
        let sample = if balanced {
            target.clone()
        } else {
            attack::balanced_subsample(&target, trial_seed(a.seed, STREAM_SUBSAMPLE, rep as u64))?
        };
        let (tau, method, degenerate) = match (a.tau, shadow_cal) {
            (Some(tau), _) => (tau, None, false),
            (None, Some(c)) => (c.tau, Some(a.method), c.degenerate),
            (None, None) => {
                let (sm, sn) = split(&sample);
                let c = attack::calibrate_threshold(&sm, &sn, a.method)?;
                (c.tau, Some(a.method), c.degenerate)
            }
        };
        let mut r = attack::attack_accuracy(&sample, tau)?;
        r.method = method;
        r.degenerate = degenerate;
        t.push(vec![
            "repeat".into(),
            String::new(),
            String::new(),
            rep.to_string(),
            method.map(|m| m.label()).unwrap_or("fixed").into(),
            num(r.tau),
            num(r.accuracy),
            String::new(),
            num(r.loss_gap),
            String::new(),
            String::new(),
            r.n_members.to_string(),
            r.n_nonmembers.to_string(),
            u8::from(r.degenerate).to_string(),
            "1".into(),
        ]);
        reports.push(r);
    }
    let label = reports[0].method.map(|m| m.label()).unwrap_or("fixed");
    t.push(aggregate_row(&reports, String::new(), String::new(), label, String::new()));
    Ok(t)
}

pub fn bounds(mu: Vec<f64>, sigma: Vec<f64>, eps: f64, zeta: Option<f64>) -> Result<Table> {
    let spec = VectorSpec::new(mu, sigma)?;
    let mut t = Table::new(&["bound", "eps", "zeta", "value", "n_max"]);
    let mut row = |name: &str, z: Option<f64>, v: f64| {
        t.push(vec![name.into(), num(eps), opt(z), num(v), format!("{}", v.floor())]);
    };
    row("original", None, bounds::bound_original(&spec, eps)?);
    row("improved", None, bounds::bound_improved(&spec, eps)?);
    if let Some(z) = zeta {
        row("label_noise", Some(z), bounds::bound_label_noise(&spec, eps, z)?);
    }
    Ok(t)
}

pub fn bayes(spec: &GaussianSpec, samples: Option<usize>, seed: u64) -> Result<Table> {
    let p = analytic::bayes_accuracy(spec);
    let mut t = Table::new(&["d", "mu", "sigma", "bayes_accuracy", "mc_samples", "mc_accuracy", "mc_stderr"]);
    let (mut ns, mut acc, mut se) = (String::new(), String::new(), String::new());
    if let Some(k) = samples {
        let model = LinearModel::new(vec![spec.gamma; spec.d], spec.gamma)?;
        let a = lab::test_accuracy(&model, spec, k, seed)?;
        ns = k.to_string();
        acc = num(a);
        se = num((p * (1.0 - p) / k as f64).sqrt());
    }
    t.push(vec![spec.d.to_string(), num(spec.mu), num(spec.sigma), num(p), ns, acc, se]);
    Ok(t)
}

pub fn plot_file(input: &Path, output: &Path, opts: PlotOptions) -> Result<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let table = Table::parse(&text)?;
    write_svg(&table, output, opts)
}
