//! Experiment manifests (JSON) and their merge with command-line flags.
//!
//! Every manifest field is optional; a flag given on the command line
//! replaces the manifest value, and missing values fall back to the
//! per-command defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use robgap::attack::ThresholdMethod;
use robgap::trainer::Adversary;
use robgap::GaussianSpec;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFields {
    pub d: Option<usize>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
}

/// `[1, 2, 5]` or `"log:start:end:count"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Gd,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// `root` expands to `root.csv` and `root.svg` when those are unset.
    pub root: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub spec: SpecFields,
    pub n_grid: Option<GridSpec>,
    pub eps_list: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub solver: Option<SolverKind>,
    pub adversary: Option<Adversary>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub attack_method: Option<ThresholdMethod>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// Merged settings for one command run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub spec: GaussianSpec,
    pub n_grid: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub adversary: Adversary,
    pub learning_rate: f64,
    pub epochs: usize,
    pub threshold: ThresholdMethod,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub spec: SpecFields,
    pub n_grid: Option<String>,
    pub eps_list: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub solver: Option<SolverKind>,
    pub adversary: Option<Adversary>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub threshold: Option<ThresholdMethod>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

pub struct Defaults {
    pub n_grid: &'static str,
    pub trials: usize,
}

pub const DEFAULT_EPS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [a, b, k] = parts[..] else {
            bail!("invalid parameter `n_grid`: expected log:start:end:count, got `{text}`");
        };
        let a: f64 = a.parse().with_context(|| format!("invalid parameter `n_grid`: start `{a}`"))?;
        let b: f64 = b.parse().with_context(|| format!("invalid parameter `n_grid`: end `{b}`"))?;
        let k: usize = k.parse().with_context(|| format!("invalid parameter `n_grid`: count `{k}`"))?;
        if !(a > 0.0 && b > a && a.is_finite() && b.is_finite()) || k < 2 {
            bail!("invalid parameter `n_grid`: need 0 < start < end and count >= 2");
        }
        let (la, lb) = (a.ln(), b.ln());
        return Ok((0..k)
            .map(|i| {
                if i == 0 {
                    a
                } else if i == k - 1 {
                    b
                } else {
                    (la + (lb - la) * i as f64 / (k - 1) as f64).exp()
                }
            })
            .collect());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid parameter `n_grid`: `{s}` is not a number"))
        })
        .collect()
}

fn grid_from(spec: &GridSpec) -> Result<Vec<f64>> {
    match spec {
        GridSpec::List(v) => Ok(v.clone()),
        GridSpec::Text(t) => parse_grid(t),
    }
}

impl Settings {
    pub fn resolve(manifest: Option<&Path>, o: Overrides, defaults: Defaults) -> Result<Self> {
        let m = match manifest {
            Some(p) => Manifest::load(p)?,
            None => Manifest::default(),
        };
        let reference = GaussianSpec::reference();
        let d = o.spec.d.or(m.spec.d).unwrap_or(reference.d);
        let mu = o.spec.mu.or(m.spec.mu).unwrap_or(reference.mu);
        let sigma = o.spec.sigma.or(m.spec.sigma).unwrap_or(reference.sigma);
        let gamma = o.spec.gamma.or(m.spec.gamma).unwrap_or(reference.gamma);
        let spec = GaussianSpec::new(d, mu, sigma, gamma)?;

        let n_grid = match (&o.n_grid, &m.n_grid) {
            (Some(t), _) => parse_grid(t)?,
            (None, Some(g)) => grid_from(g)?,
            (None, None) => parse_grid(defaults.n_grid)?,
        };
        if n_grid.is_empty() {
            bail!("invalid parameter `n_grid`: must be non-empty");
        }
        if let Some(bad) = n_grid.iter().find(|n| !(n.is_finite() && **n > 0.0)) {
            bail!("invalid parameter `n_grid`: every n must be finite and > 0, got {bad}");
        }
        let eps_list = o.eps_list.or(m.eps_list).unwrap_or_else(|| DEFAULT_EPS.to_vec());
        if eps_list.is_empty() {
            bail!("invalid parameter `eps_list`: must be non-empty");
        }
        if let Some(bad) = eps_list.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            bail!("invalid parameter `eps_list`: every eps must be finite and >= 0, got {bad}");
        }
        let trials = o.trials.or(m.trials).unwrap_or(defaults.trials);
        if trials == 0 {
            bail!("invalid parameter `trials`: must be at least 1");
        }
        let root_csv = m.outputs.root.as_ref().map(|r| r.with_extension("csv"));
        let root_svg = m.outputs.root.as_ref().map(|r| r.with_extension("svg"));
        Ok(Self {
            spec,
            n_grid,
            eps_list,
            trials,
            seed: o.seed.or(m.master_seed).unwrap_or(0),
            solver: o.solver.or(m.solver).unwrap_or(SolverKind::Exact),
            adversary: o.adversary.or(m.adversary).unwrap_or_default(),
            learning_rate: o.learning_rate.or(m.learning_rate).unwrap_or(0.001),
            epochs: o.epochs.or(m.epochs).unwrap_or(200),
            threshold: o.threshold.or(m.attack_method).unwrap_or_default(),
            csv: o.csv.or(m.outputs.csv).or(root_csv),
            svg: o.svg.or(m.outputs.svg).or(root_svg),
        })
    }

    /// The grid as sample sizes; every entry must be a whole number.
    pub fn integer_grid(&self) -> Result<Vec<usize>> {
        self.n_grid
            .iter()
            .map(|&n| {
                if n.fract() != 0.0 || n < 1.0 {
                    bail!("invalid parameter `n_grid`: simulations need whole n >= 1, got {n}");
                }
                Ok(n as usize)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2, 5").unwrap(), vec![1.0, 2.0, 5.0]);
        let g = parse_grid("log:1:100:3").unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(g[2], 100.0);
        assert!(parse_grid("log:1:100").is_err());
        assert!(parse_grid("log:0:100:5").is_err());
        assert!(parse_grid("1,x").is_err());
    }

    #[test]
    fn manifest_parses() {
        let m: Manifest = serde_json::from_str(
            r#"{"spec":{"d":10,"mu":0.5},"n_grid":"log:1:10:4","eps_list":[0,1],
                "trials":5,"master_seed":9,"solver":"gd","adversary":"gradsign",
                "attack_method":"mean","outputs":{"root":"out/run"}}"#,
        )
        .unwrap();
        assert_eq!(m.spec.d, Some(10));
        assert_eq!(m.solver, Some(SolverKind::Gd));
        assert_eq!(m.adversary, Some(Adversary::GradSign));
        assert_eq!(m.attack_method, Some(ThresholdMethod::MeanMidpoint));
        assert!(serde_json::from_str::<Manifest>(r#"{"bogus":1}"#).is_err());
    }
}
