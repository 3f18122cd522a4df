use anyhow::Result;
use serde::Serialize;
use sls_core::analytic::{
    default_p_max, projective_occupation_with, reset_occupation, reset_occupation_with, reset_stationary,
    stationary_quadrature, survival_probability, zeno_occupation, ConvolutionGrid, FreeKernel, ProjectiveSeries,
    ResetParams,
};
use sls_core::lattice::{build_propagator, evolve, free_occupation, DEFAULT_BOUNDARY_MARGIN};
use sls_core::montecarlo::{run_ensemble, EnsembleResult, EvolutionMode, TrajectoryConfig};
use sls_core::resolvent::{averaged_state, Solver};
use sls_core::{DensityMatrix, InterventionKind, LatticeSpec};

use crate::config::{Experiment, ExperimentConfig};

/// One table line. Columns that do not apply to an experiment stay empty.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub kind: Option<&'static str>,
    pub lambda: Option<f64>,
    pub t: Option<f64>,
    pub m: Option<i64>,
    pub analytic: Option<f64>,
    pub montecarlo_mean: Option<f64>,
    pub montecarlo_stderr: Option<f64>,
    pub resolvent: Option<f64>,
    pub reference: Option<f64>,
}

pub const ROW_COLUMNS: &[&str] = &[
    "kind",
    "lambda",
    "t",
    "m",
    "analytic",
    "montecarlo_mean",
    "montecarlo_stderr",
    "resolvent",
    "reference",
];

/// Per-time agreement between the three paths of the crosscheck.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub kind: &'static str,
    pub lambda: f64,
    pub t: f64,
    pub max_abs_analytic_resolvent: f64,
    pub max_montecarlo_deviation_stderr: f64,
    pub fraction_within_2_stderr: f64,
}

pub const SUMMARY_COLUMNS: &[&str] = &[
    "kind",
    "lambda",
    "t",
    "max_abs_analytic_resolvent",
    "max_montecarlo_deviation_stderr",
    "fraction_within_2_stderr",
];

pub enum TableRows {
    Curves(Vec<Row>),
    Summary(Vec<SummaryRow>),
}

pub struct Table {
    pub name: &'static str,
    /// What the `reference` column holds, recorded in the schema header.
    pub reference: &'static str,
    pub rows: TableRows,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Default)]
pub struct Output {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
    /// Largest amount any probability was moved to bring it into `[0, 1]`.
    pub max_clamp: f64,
}

impl Output {
    fn probability(&mut self, p: f64) -> f64 {
        let clamped = p.clamp(0.0, 1.0);
        self.max_clamp = self.max_clamp.max((clamped - p).abs());
        clamped
    }

    fn boundary_warning(&mut self, spec: &LatticeSpec, times: &[f64]) {
        if let Some(t) = times.iter().find(|&&t| !spec.is_boundary_free(t, DEFAULT_BOUNDARY_MARGIN)) {
            self.warnings.push(format!(
                "infinite-chain analytic values are boundary-contaminated on the {}-site ring from t = {t}",
                spec.n_sites()
            ));
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Output> {
    let mut out = Output::default();
    match cfg.experiment {
        Experiment::Free => free(cfg, &mut out)?,
        Experiment::Reset => reset(cfg, &mut out)?,
        Experiment::Measure => measure(cfg, &mut out)?,
        Experiment::Stationary => stationary(cfg, &mut out)?,
        Experiment::Survival => survival(cfg, &mut out)?,
        Experiment::Zeno => zeno(cfg, &mut out)?,
        Experiment::Crosscheck => crosscheck(cfg, &mut out)?,
    }
    if out.max_clamp > 1e-6 {
        let msg = format!("probabilities clamped into [0, 1] by up to {:.2e}", out.max_clamp);
        out.warnings.push(msg);
    }
    Ok(out)
}

fn ensemble(cfg: &ExperimentConfig, kind: InterventionKind, lambda: f64) -> Result<EnsembleResult> {
    let config = TrajectoryConfig {
        spec: cfg.lattice()?,
        kind,
        n0: cfg.n0,
        lambda,
        t_grid: cfg.observation_times(),
        n_realizations: cfg.realizations,
        seed: cfg.seed,
        mode: EvolutionMode::StateVector,
    };
    log::info!("{} realizations of {kind} at lambda = {lambda}", cfg.realizations);
    Ok(run_ensemble(&config)?)
}

/// Diagonals of the Laplace-inverted averaged state at each time.
fn inverted_diagonals(
    cfg: &ExperimentConfig,
    kind: InterventionKind,
    lambda: f64,
    solver: Solver,
    out: &mut Output,
) -> Result<Vec<Vec<f64>>> {
    let spec = cfg.lattice()?;
    let rho0 = DensityMatrix::localized(spec, cfg.n0)?;
    let mut diagonals = Vec::new();
    for t in cfg.observation_times() {
        let inv = averaged_state(&spec, &rho0, kind, lambda, t, solver)?;
        if inv.warning {
            out.warnings.push(format!(
                "Laplace inversion at t = {t}, lambda = {lambda}: node-doubling discrepancy {:.2e}",
                inv.discrepancy
            ));
        }
        diagonals.push(inv.rho.diagonal());
    }
    Ok(diagonals)
}

fn params(cfg: &ExperimentConfig, lambda: f64) -> Result<ResetParams> {
    Ok(ResetParams::new(cfg.n0, cfg.target, cfg.delta, lambda)?)
}

fn free(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let spec = cfg.lattice()?;
    let times = cfg.observation_times();
    out.boundary_warning(&spec, &times);
    let rho0 = DensityMatrix::localized(spec, cfg.n0)?;
    let mut rows = Vec::new();
    for &t in &times {
        let ring = evolve(&rho0, &build_propagator(&spec, t)?)?;
        for m in cfg.observed_sites()? {
            let analytic = out.probability(free_occupation(m, cfg.n0, cfg.delta, t));
            let reference = out.probability(ring.occupation(m)?);
            rows.push(Row {
                t: Some(t),
                m: Some(m),
                analytic: Some(analytic),
                reference: Some(reference),
                ..Row::default()
            });
        }
    }
    out.tables.push(Table {
        name: "occupation",
        reference: "exact occupation on the finite ring",
        rows: TableRows::Curves(rows),
    });
    Ok(())
}

fn reset(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let spec = cfg.lattice()?;
    let times = cfg.observation_times();
    out.boundary_warning(&spec, &times);
    let kind = InterventionKind::Reset(cfg.target);
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let p = params(cfg, lambda)?;
        let mc = ensemble(cfg, kind, lambda)?;
        let inverted = inverted_diagonals(cfg, kind, lambda, Solver::RankOne, out)?;
        for m in cfg.observed_sites()? {
            let stationary = out.probability(reset_stationary(m, &p)?);
            let i = spec.index(m)?;
            for (k, &t) in times.iter().enumerate() {
                let (mean, se) = mc.occupation(m, k).expect("observed site on the lattice");
                let analytic = out.probability(reset_occupation(m, t, &p)?);
                let resolvent = out.probability(inverted[k][i]);
                rows.push(Row {
                    lambda: Some(lambda),
                    t: Some(t),
                    m: Some(m),
                    analytic: Some(analytic),
                    montecarlo_mean: Some(mean),
                    montecarlo_stderr: Some(se),
                    resolvent: Some(resolvent),
                    reference: Some(stationary),
                    ..Row::default()
                });
            }
        }
    }
    out.tables.push(Table {
        name: "occupation",
        reference: "stationary occupation (long-time limit)",
        rows: TableRows::Curves(rows),
    });
    Ok(())
}

/// Series values at each observation time: one shared grid when the times
/// are the uniform grid, otherwise one evaluation per time.
fn series_curves(cfg: &ExperimentConfig, p: &ResetParams, sites: &[i64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let times = cfg.observation_times();
    let t_last = *times.last().expect("validated non-empty");
    let p_max = cfg.p_max.unwrap_or_else(|| default_p_max(p.lambda, t_last));
    if cfg.times.is_none() {
        let grid = ConvolutionGrid::aligned(t_last, cfg.t_steps, p.delta)?;
        let series = ProjectiveSeries::new(FreeKernel::Infinite, p, grid, p_max)?;
        let pick = |curve: Vec<f64>| -> Vec<f64> {
            times.iter().map(|&t| curve[grid.node(t).expect("aligned grid")]).collect()
        };
        let per_site = sites.iter().map(|&m| pick(series.occupation_curve(m))).collect();
        return Ok((per_site, pick(series.survival_curve())));
    }
    let mut per_site = Vec::new();
    for &m in sites {
        let values: Result<Vec<f64>> = times
            .iter()
            .map(|&t| Ok(projective_occupation_with(FreeKernel::Infinite, m, t, p, p_max)?.value))
            .collect();
        per_site.push(values?);
    }
    let survival: Result<Vec<f64>> = times
        .iter()
        .map(|&t| Ok(survival_probability(t, p, p_max)?.value))
        .collect();
    Ok((per_site, survival?))
}

fn measure(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let spec = cfg.lattice()?;
    let times = cfg.observation_times();
    out.boundary_warning(&spec, &times);
    let kind = InterventionKind::Projection(cfg.target);
    let sites = cfg.observed_sites()?;
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let p = params(cfg, lambda)?;
        let (series, _) = series_curves(cfg, &p, &sites)?;
        let mc = ensemble(cfg, kind, lambda)?;
        let inverted = inverted_diagonals(cfg, kind, lambda, Solver::RankOne, out)?;
        for (j, &m) in sites.iter().enumerate() {
            let i = spec.index(m)?;
            for (k, &t) in times.iter().enumerate() {
                let (mean, se) = mc.occupation(m, k).expect("observed site on the lattice");
                let analytic = out.probability(series[j][k]);
                let resolvent = out.probability(inverted[k][i]);
                rows.push(Row {
                    lambda: Some(lambda),
                    t: Some(t),
                    m: Some(m),
                    analytic: Some(analytic),
                    montecarlo_mean: Some(mean),
                    montecarlo_stderr: Some(se),
                    resolvent: Some(resolvent),
                    ..Row::default()
                });
            }
        }
    }
    out.tables.push(Table {
        name: "occupation",
        reference: "unused",
        rows: TableRows::Curves(rows),
    });
    Ok(())
}

fn survival(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let spec = cfg.lattice()?;
    let times = cfg.observation_times();
    out.boundary_warning(&spec, &times);
    let kind = InterventionKind::Projection(cfg.target);
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let p = params(cfg, lambda)?;
        let (_, series) = series_curves(cfg, &p, &[])?;
        let mc = ensemble(cfg, kind, lambda)?;
        let inverted = inverted_diagonals(cfg, kind, lambda, Solver::RankOne, out)?;
        for (k, &t) in times.iter().enumerate() {
            let analytic = out.probability(series[k]);
            let resolvent = out.probability(inverted[k].iter().sum());
            rows.push(Row {
                lambda: Some(lambda),
                t: Some(t),
                analytic: Some(analytic),
                montecarlo_mean: Some(mc.trace_mean[k]),
                montecarlo_stderr: Some(mc.trace_stderr[k]),
                resolvent: Some(resolvent),
                reference: Some((-lambda * t).exp()),
                ..Row::default()
            });
        }
    }
    out.tables.push(Table {
        name: "survival",
        reference: "exp(-lambda t)",
        rows: TableRows::Curves(rows),
    });
    Ok(())
}

fn zeno(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let spec = cfg.lattice()?;
    let times = cfg.observation_times();
    let kind = InterventionKind::Projection(cfg.target);
    let m = cfg.n0;
    let i = spec.index(m)?;
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let mc = ensemble(cfg, kind, lambda)?;
        let inverted = inverted_diagonals(cfg, kind, lambda, Solver::RankOne, out)?;
        for (k, &t) in times.iter().enumerate() {
            let z = zeno_occupation(t, lambda, cfg.delta);
            let (mean, se) = mc.occupation(m, k).expect("initial site on the lattice");
            let analytic = out.probability(z.full);
            let resolvent = out.probability(inverted[k][i]);
            rows.push(Row {
                lambda: Some(lambda),
                t: Some(t),
                m: Some(m),
                analytic: Some(analytic),
                montecarlo_mean: Some(mean),
                montecarlo_stderr: Some(se),
                resolvent: Some(resolvent),
                reference: Some(z.leading),
                ..Row::default()
            });
        }
    }
    out.tables.push(Table {
        name: "zeno",
        reference: "leading Zeno form 1 - delta^2 t / lambda",
        rows: TableRows::Curves(rows),
    });
    Ok(())
}

fn stationary(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let p = params(cfg, lambda)?;
        for m in cfg.observed_sites()? {
            let analytic = out.probability(reset_stationary(m, &p)?);
            let quadrature = out.probability(stationary_quadrature(FreeKernel::Infinite, m, &p, 1e-10)?);
            rows.push(Row {
                lambda: Some(lambda),
                m: Some(m),
                analytic: Some(analytic),
                reference: Some(quadrature),
                ..Row::default()
            });
        }
    }
    out.tables.push(Table {
        name: "stationary",
        reference: "adaptive quadrature of the Laplace integral",
        rows: TableRows::Curves(rows),
    });
    Ok(())
}

/// Tolerance on the analytic-resolvent gap in the crosscheck.
pub const CROSSCHECK_RESOLVENT_TOL: f64 = 1e-5;
/// Largest Monte Carlo deviation, in standard errors, accepted by the crosscheck.
pub const CROSSCHECK_MC_SIGMAS: f64 = 5.0;

fn crosscheck(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let spec = cfg.lattice()?;
    let n = spec.n_sites();
    let times = cfg.observation_times();
    let sites = cfg.observed_sites()?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &lambda in &cfg.lambdas {
        let p = params(cfg, lambda)?;
        for kind in [InterventionKind::Reset(cfg.target), InterventionKind::Projection(cfg.target)] {
            let mc = ensemble(cfg, kind, lambda)?;
            let inverted = inverted_diagonals(cfg, kind, lambda, Solver::DenseLu, out)?;
            let (mut worst_resolvent, mut worst_sigma): (f64, f64) = (0.0, 0.0);
            for (k, &t) in times.iter().enumerate() {
                let p_max = cfg.p_max.unwrap_or_else(|| default_p_max(lambda, t));
                let grid = ConvolutionGrid::default_for(t, cfg.delta)?;
                let series = match kind {
                    InterventionKind::Projection(_) => {
                        Some(ProjectiveSeries::new(FreeKernel::Ring(n), &p, grid, p_max)?)
                    }
                    InterventionKind::Reset(_) => None,
                };
                let (mut gap, mut sigma, mut inside): (f64, f64, usize) = (0.0, 0.0, 0);
                for &m in &sites {
                    let analytic = match &series {
                        Some(s) => s.occupation_curve(m)[grid.steps],
                        None => reset_occupation_with(FreeKernel::Ring(n), m, t, &p)?,
                    };
                    let resolvent = inverted[k][spec.index(m)?];
                    let (mean, se) = mc.occupation(m, k).expect("observed site on the lattice");
                    gap = gap.max((analytic - resolvent).abs());
                    let dev = (mean - analytic).abs();
                    let z = if se > 0.0 { dev / se } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
                    sigma = sigma.max(z);
                    inside += (z <= 2.0) as usize;
                    rows.push(Row {
                        kind: Some(kind.name()),
                        lambda: Some(lambda),
                        t: Some(t),
                        m: Some(m),
                        analytic: Some(out.probability(analytic)),
                        montecarlo_mean: Some(mean),
                        montecarlo_stderr: Some(se),
                        resolvent: Some(out.probability(resolvent)),
                        ..Row::default()
                    });
                }
                worst_resolvent = worst_resolvent.max(gap);
                worst_sigma = worst_sigma.max(sigma);
                summary.push(SummaryRow {
                    kind: kind.name(),
                    lambda,
                    t,
                    max_abs_analytic_resolvent: gap,
                    max_montecarlo_deviation_stderr: sigma,
                    fraction_within_2_stderr: inside as f64 / sites.len() as f64,
                });
            }
            out.checks.push(Check {
                name: format!("{} analytic vs resolvent, lambda = {lambda}", kind.name()),
                value: worst_resolvent,
                tolerance: CROSSCHECK_RESOLVENT_TOL,
                pass: worst_resolvent <= CROSSCHECK_RESOLVENT_TOL,
            });
            out.checks.push(Check {
                name: format!("{} analytic vs Monte Carlo (stderr units), lambda = {lambda}", kind.name()),
                value: worst_sigma,
                tolerance: CROSSCHECK_MC_SIGMAS,
                pass: worst_sigma <= CROSSCHECK_MC_SIGMAS,
            });
        }
    }
    out.tables.push(Table {
        name: "crosscheck",
        reference: "unused",
        rows: TableRows::Curves(rows),
    });
    out.tables.push(Table {
        name: "crosscheck_summary",
        reference: "unused",
        rows: TableRows::Summary(summary),
    });
    Ok(())
}
