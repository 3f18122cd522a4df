use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sls_core::LatticeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Free evolution on the chain and on the finite ring.
    Free,
    /// Site occupations under stochastic resets.
    Reset,
    /// Site occupations under projective measurements.
    Measure,
    /// Stationary distribution under resets, swept over rates.
    Stationary,
    /// Survival probability under projective measurements.
    Survival,
    /// Frequent measurements at the initial site.
    Zeno,
    /// Analytic, resolvent and Monte Carlo paths on a small ring.
    Crosscheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Free => "free",
            Experiment::Reset => "reset",
            Experiment::Measure => "measure",
            Experiment::Stationary => "stationary",
            Experiment::Survival => "survival",
            Experiment::Zeno => "zeno",
            Experiment::Crosscheck => "crosscheck",
        }
    }

    fn uses_monte_carlo(self) -> bool {
        !matches!(self, Experiment::Free | Experiment::Stationary)
    }

    fn uses_lattice_sites(self) -> bool {
        !matches!(self, Experiment::Stationary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Crosscheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything a run needs. Unset fields in a config file take the defaults
/// below; command-line flags override both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_sites: usize,
    pub delta: f64,
    pub lambdas: Vec<f64>,
    pub n0: i64,
    pub target: i64,
    /// Observed sites; empty means every lattice site.
    pub sites: Vec<i64>,
    pub realizations: usize,
    pub seed: u64,
    pub t_max: f64,
    pub t_steps: usize,
    /// Explicit observation times, replacing the uniform `t_max/t_steps` grid.
    pub times: Option<Vec<f64>>,
    pub p_max: Option<usize>,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Reset,
            n_sites: 30,
            delta: 1.0,
            lambdas: vec![0.5],
            n0: 1,
            target: 10,
            sites: vec![5, 10],
            realizations: 4000,
            seed: 42,
            t_max: 30.0,
            t_steps: 100,
            times: None,
            p_max: None,
            out: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = Self::default();
        match preset {
            Preset::Fig2 => base,
            Preset::Fig3 => Self {
                experiment: Experiment::Stationary,
                lambdas: vec![0.25, 0.5, 1.0, 2.0, 100.0],
                target: 25,
                n0: 25,
                sites: (0..=50).collect(),
                ..base
            },
            Preset::Fig4 => Self {
                experiment: Experiment::Measure,
                realizations: 10_000,
                t_max: 20.0,
                ..base
            },
            Preset::Fig5 => Self {
                experiment: Experiment::Survival,
                lambdas: vec![0.25, 0.5, 0.75],
                realizations: 5000,
                t_max: 20.0,
                sites: Vec::new(),
                ..base
            },
            Preset::Fig6 => Self {
                experiment: Experiment::Zeno,
                lambdas: vec![20.0, 50.0, 100.0],
                n0: 10,
                sites: vec![10],
                t_max: 1.0,
                t_steps: 50,
                ..base
            },
            Preset::Crosscheck => Self {
                experiment: Experiment::Crosscheck,
                n_sites: 16,
                target: 5,
                sites: Vec::new(),
                times: Some(vec![1.0, 2.0, 5.0]),
                ..base
            },
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(anyhow::Error::from),
            _ => toml::from_str(&text).map_err(anyhow::Error::from),
        };
        parsed.with_context(|| format!("parsing {}", path.display()))
    }

    pub fn observation_times(&self) -> Vec<f64> {
        match &self.times {
            Some(times) => times.clone(),
            None => (1..=self.t_steps)
                .map(|k| self.t_max * k as f64 / self.t_steps as f64)
                .collect(),
        }
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        Ok(LatticeSpec::new(self.n_sites, self.delta)?)
    }

    /// Sites reported in the tables.
    pub fn observed_sites(&self) -> Result<Vec<i64>> {
        if !self.sites.is_empty() {
            return Ok(self.sites.clone());
        }
        match self.experiment {
            Experiment::Survival => Ok(Vec::new()),
            Experiment::Stationary => Ok((self.target - 30..=self.target + 30).collect()),
            _ => Ok(self.lattice()?.labels().collect()),
        }
    }

    /// Checks every parameter against the preconditions of the routines the
    /// experiment will call, before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let spec = self.lattice()?;
        if !(self.delta.is_finite() && self.delta > 0.0) {
            bail!("delta must be positive, got {}", self.delta);
        }
        if self.lambdas.is_empty() {
            bail!("at least one rate is required");
        }
        if let Some(bad) = self.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            bail!("rates must be positive and finite, got {bad}");
        }
        if self.experiment.uses_lattice_sites() {
            spec.index(self.n0).context("initial site")?;
            spec.index(self.target).context("target site")?;
            for &m in &self.sites {
                spec.index(m).with_context(|| format!("observed site {m}"))?;
            }
        }
        if self.experiment.uses_monte_carlo() && self.realizations == 0 {
            bail!("realizations must be at least 1");
        }
        if self.experiment == Experiment::Zeno && self.n0 != self.target {
            bail!("zeno experiment needs n0 == target, got {} and {}", self.n0, self.target);
        }
        if self.experiment == Experiment::Crosscheck && spec.n_sites() > sls_core::superop::DENSE_LIMIT {
            bail!(
                "crosscheck uses dense Liouville-space solves and needs n_sites <= {}",
                sls_core::superop::DENSE_LIMIT
            );
        }
        if let Some(0) = self.p_max {
            bail!("p_max must be at least 1");
        }
        if self.experiment != Experiment::Stationary {
            let times = self.observation_times();
            if times.is_empty() {
                bail!("no observation times");
            }
            if times[0] <= 0.0 || times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
                bail!("observation times must be positive, finite and strictly increasing");
            }
        }
        Ok(())
    }
}
