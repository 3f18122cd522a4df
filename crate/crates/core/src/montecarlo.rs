//! Trajectory sampling: unitary evolution interrupted at random times by an
//! intervention, averaged over independent realizations.

use crate::error::{Error, Result};
use crate::lattice::{build_propagator, evolve, DensityMatrix, LatticeSpec, C64};
use crate::superop::{apply_intervention, InterventionKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Realizations per reduction chunk. Chunks are reduced in index order, so
/// results do not depend on the number of worker threads.
pub const CHUNK_SIZE: usize = 64;

/// Source of i.i.d. waiting times between interventions.
pub trait WaitingTime: Send + Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64;
}

/// Exponential waiting times with the given rate, by inverse transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl WaitingTime for Exponential {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        // u in (0, 1] so that ln(u) is finite
        let u = 1.0 - rng.gen::<f64>();
        -u.ln() / self.rate
    }
}

/// Event times in `(0, t_total)`; the remaining stretch up to `t_total` is
/// free evolution.
pub fn sample_event_times<W: WaitingTime + ?Sized>(t_total: f64, waiting: &W, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut times = Vec::new();
    let mut clock = 0.0;
    loop {
        clock += waiting.sample(rng);
        if clock >= t_total {
            return times;
        }
        times.push(clock);
    }
}

/// Event times for exponential waiting times of rate `lambda`.
pub fn sample_exponential_events(t_total: f64, lambda: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    sample_event_times(t_total, &Exponential { rate: lambda }, rng)
}

/// Per-realization generator: one ChaCha stream per realization index under
/// the master seed.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    /// Propagate `N×N` density matrices.
    Density,
    /// Propagate amplitudes. Valid because both interventions map pure states
    /// to (unnormalized) pure states; agrees with `Density` to rounding.
    #[default]
    StateVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub spec: LatticeSpec,
    pub kind: InterventionKind,
    pub n0: i64,
    pub lambda: f64,
    pub t_grid: Vec<f64>,
    pub n_realizations: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: EvolutionMode,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.index(self.n0)?;
        self.kind.validate(&self.spec)?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("rate must be positive, got {}", self.lambda)));
        }
        if self.n_realizations == 0 {
            return Err(Error::InvalidArgument("need at least one realization".into()));
        }
        match self.t_grid.first() {
            Some(&t) if t > 0.0 => {}
            _ => return Err(Error::InvalidArgument("time grid must be non-empty and start after 0".into())),
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("time grid must be finite and strictly increasing".into()));
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        *self.t_grid.last().unwrap_or(&0.0)
    }
}

/// Diagonals and traces of one realization at the observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// `occupations[k][i]`: storage-order site `i` at observation `k`.
    pub occupations: Vec<Vec<f64>>,
    pub traces: Vec<f64>,
    pub events: usize,
}

enum State {
    Density(DensityMatrix),
    Vector(Vec<C64>),
}

impl State {
    fn initial(spec: LatticeSpec, n0: i64, mode: EvolutionMode) -> Result<Self> {
        Ok(match mode {
            EvolutionMode::Density => State::Density(DensityMatrix::localized(spec, n0)?),
            EvolutionMode::StateVector => {
                let mut psi = vec![C64::new(0.0, 0.0); spec.n_sites()];
                psi[spec.index(n0)?] = C64::new(1.0, 0.0);
                State::Vector(psi)
            }
        })
    }

    fn propagate(&mut self, spec: &LatticeSpec, tau: f64) -> Result<()> {
        if tau <= 0.0 {
            return Ok(());
        }
        let u = build_propagator(spec, tau)?;
        match self {
            State::Density(rho) => *rho = evolve(rho, &u)?,
            State::Vector(psi) => *psi = u.apply(psi),
        }
        Ok(())
    }

    fn intervene(&mut self, spec: &LatticeSpec, kind: InterventionKind) -> Result<()> {
        match self {
            State::Density(rho) => *rho = apply_intervention(rho, kind)?,
            State::Vector(psi) => {
                let target = kind.validate(spec)?;
                let amplitude = match kind {
                    InterventionKind::Reset(_) => C64::new(psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(), 0.0),
                    InterventionKind::Projection(_) => psi[target],
                };
                psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                psi[target] = amplitude;
            }
        }
        Ok(())
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            State::Density(rho) => rho.diagonal(),
            State::Vector(psi) => psi.iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

/// One realization with exponential waiting times. Deterministic in
/// `(config.seed, index)`.
pub fn run_trajectory(config: &TrajectoryConfig, index: u64) -> Result<TrajectoryRecord> {
    run_trajectory_with(config, index, &Exponential { rate: config.lambda })
}

pub fn run_trajectory_with<W: WaitingTime + ?Sized>(config: &TrajectoryConfig, index: u64, waiting: &W) -> Result<TrajectoryRecord> {
    config.validate()?;
    let mut rng = realization_rng(config.seed, index);
    let events = sample_event_times(config.t_max(), waiting, &mut rng);
    trajectory_from_events(config, &events)
}

/// Evolves through the given event times, splitting free segments at
/// observation times. An event coinciding with an observation is applied
/// after recording.
pub fn trajectory_from_events(config: &TrajectoryConfig, events: &[f64]) -> Result<TrajectoryRecord> {
    let spec = config.spec;
    let mut state = State::initial(spec, config.n0, config.mode)?;
    let mut clock = 0.0;
    let mut occupations = Vec::with_capacity(config.t_grid.len());
    let mut traces = Vec::with_capacity(config.t_grid.len());
    let mut next_event = events.iter().peekable();
    for &t_obs in &config.t_grid {
        while let Some(&&t_ev) = next_event.peek() {
            if t_ev >= t_obs {
                break;
            }
            state.propagate(&spec, t_ev - clock)?;
            state.intervene(&spec, config.kind)?;
            clock = t_ev;
            next_event.next();
        }
        state.propagate(&spec, t_obs - clock)?;
        clock = t_obs;
        let diag = state.diagonal();
        traces.push(diag.iter().sum());
        occupations.push(diag);
    }
    Ok(TrajectoryRecord {
        occupations,
        traces,
        events: events.len(),
    })
}

/// Running mean and sum of squared deviations, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count / count;
        self.m2 += other.m2 + d * d * self.count * other.count / count;
        self.count = count;
    }

    fn stderr(&self) -> f64 {
        if self.count < 2.0 {
            f64::NAN
        } else {
            (self.m2 / (self.count - 1.0) / self.count).sqrt()
        }
    }
}

struct Accumulator {
    cells: Vec<Moments>,
    traces: Vec<Moments>,
    events: Moments,
}

impl Accumulator {
    fn new(times: usize, sites: usize) -> Self {
        Self {
            cells: vec![Moments::default(); times * sites],
            traces: vec![Moments::default(); times],
            events: Moments::default(),
        }
    }

    fn push(&mut self, record: &TrajectoryRecord) {
        for (k, row) in record.occupations.iter().enumerate() {
            let base = k * row.len();
            for (i, &v) in row.iter().enumerate() {
                self.cells[base + i].push(v);
            }
            self.traces[k].push(record.traces[k]);
        }
        self.events.push(record.events as f64);
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.merge(b);
        }
        for (a, b) in self.traces.iter_mut().zip(&other.traces) {
            a.merge(b);
        }
        self.events.merge(&other.events);
    }
}

/// Ensemble averages at each observation time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    /// Site labels in storage order.
    pub sites: Vec<i64>,
    /// `mean[k][i]`: average occupation of `sites[i]` at `times[k]`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    /// Average trace, the survival probability for projective measurements.
    pub trace_mean: Vec<f64>,
    pub trace_stderr: Vec<f64>,
    pub mean_events: f64,
    pub n_realizations: usize,
}

impl EnsembleResult {
    /// `(mean, stderr)` for site label `m` at observation index `k`.
    pub fn occupation(&self, m: i64, k: usize) -> Option<(f64, f64)> {
        let i = self.sites.iter().position(|&s| s == m)?;
        Some((*self.mean.get(k)?.get(i)?, self.stderr[k][i]))
    }

    pub fn site_sum(&self, k: usize) -> f64 {
        self.mean[k].iter().sum()
    }
}

/// Runs all realizations, in parallel over fixed-size chunks.
pub fn run_ensemble(config: &TrajectoryConfig) -> Result<EnsembleResult> {
    run_ensemble_with(config, &Exponential { rate: config.lambda })
}

pub fn run_ensemble_with<W: WaitingTime + ?Sized>(config: &TrajectoryConfig, waiting: &W) -> Result<EnsembleResult> {
    config.validate()?;
    let n_times = config.t_grid.len();
    let n_sites = config.spec.n_sites();
    let chunks = config.n_realizations.div_ceil(CHUNK_SIZE);
    let partials: Vec<Result<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::new(n_times, n_sites);
            let start = c * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(config.n_realizations);
            for index in start..end {
                acc.push(&run_trajectory_with(config, index as u64, waiting)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new(n_times, n_sites);
    for part in partials {
        total.merge(&part?);
    }
    let reshape = |f: &dyn Fn(&Moments) -> f64| -> Vec<Vec<f64>> {
        total.cells.chunks(n_sites).map(|row| row.iter().map(f).collect()).collect()
    };
    Ok(EnsembleResult {
        times: config.t_grid.clone(),
        sites: config.spec.labels().collect(),
        mean: reshape(&|m| m.mean),
        stderr: reshape(&|m| m.stderr()),
        trace_mean: total.traces.iter().map(|m| m.mean).collect(),
        trace_stderr: total.traces.iter().map(|m| m.stderr()).collect(),
        mean_events: total.events.mean,
        n_realizations: config.n_realizations,
    })
}
