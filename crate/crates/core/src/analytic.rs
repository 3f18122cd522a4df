//! Closed-form and semi-closed-form observables for the chain under
//! exponentially distributed resets or projective measurements.

use crate::error::{Error, Result};
use crate::quad::{integrate_panels, integrate_panels_tol};
use crate::special::{bessel_j, bessel_k0, digamma, legendre_q_half, ln_hyp2f1, ln_gamma, EULER_GAMMA};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Absolute tolerance for time integrals of occupation kernels.
pub const QUAD_TOL: f64 = 1e-10;
/// Sites farther than `Δt + SITE_WINDOW_PAD` from the wavefront source are
/// dropped from site sums.
pub const SITE_WINDOW_PAD: f64 = 40.0;
/// Grid spacing target, in units of `1/Δ`.
pub const DEFAULT_DT_DELTA: f64 = 0.02;
/// Coarsest grid spacing, in units of `1/Δ`, before a warning is issued.
pub const MAX_DT_DELTA: f64 = 0.05;
pub const MIN_GRID_STEPS: usize = 100;
/// Largest hypergeometric argument handled by the series form.
const STATIONARY_Z_LIMIT: f64 = 1.0 - 1e-12;
/// Stationary time integrals run to about `QUADRATURE_HORIZON/λ`.
const QUADRATURE_HORIZON: f64 = 40.0;
/// Longest integration span, in units of `1/Δ`, attempted by quadrature.
const MAX_QUADRATURE_SPAN: f64 = 2.0e5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetParams {
    /// Initial site `n₀`.
    pub n0: i64,
    /// Site `𝒩` the particle is reset to or measured at.
    pub target: i64,
    pub delta: f64,
    pub lambda: f64,
}

impl ResetParams {
    pub fn new(n0: i64, target: i64, delta: f64, lambda: f64) -> Result<Self> {
        let p = Self { n0, target, delta, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }

    fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")))
    }
}

/// Free-evolution occupation kernel `|⟨m|e^{-iHt}|n⟩|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FreeKernel {
    /// Infinite chain: `J²_{m-n}(Δt)`.
    #[default]
    Infinite,
    /// Periodic ring of the given (even) number of sites.
    Ring(usize),
}

impl FreeKernel {
    pub fn occupation(&self, m: i64, n: i64, delta: f64, t: f64) -> f64 {
        match *self {
            FreeKernel::Infinite => {
                let j = bessel_j((m - n) as i32, delta * t);
                j * j
            }
            FreeKernel::Ring(size) => {
                let d = (m - n).rem_euclid(size as i64) as f64;
                let (mut re, mut im) = (0.0, 0.0);
                for q in 0..size {
                    let k = 2.0 * PI * q as f64 / size as f64;
                    let phase = k * d + delta * t * k.cos();
                    re += phase.cos();
                    im += phase.sin();
                }
                (re * re + im * im) / (size * size) as f64
            }
        }
    }

    /// Sites a full site sum runs over, given the wavefront sources and time.
    fn window(&self, centers: &[i64], delta: f64, t: f64) -> Vec<i64> {
        match *self {
            FreeKernel::Infinite => {
                let w = (delta * t + SITE_WINDOW_PAD).ceil() as i64;
                let lo = centers.iter().min().copied().unwrap_or(0) - w;
                let hi = centers.iter().max().copied().unwrap_or(0) + w;
                (lo..=hi).collect()
            }
            FreeKernel::Ring(size) => {
                let half = size as i64 / 2;
                (-half..half).collect()
            }
        }
    }
}

/// Site window `|m - center| <= Δt + 40` used for truncated sums on the infinite chain.
pub fn site_window(center: i64, delta: f64, t: f64) -> std::ops::RangeInclusive<i64> {
    let w = (delta * t + SITE_WINDOW_PAD).ceil() as i64;
    center - w..=center + w
}

// ---------------------------------------------------------------------------
// Resets

/// Average occupation of site `m` at time `t` under stochastic resets.
pub fn reset_occupation(m: i64, t: f64, p: &ResetParams) -> Result<f64> {
    reset_occupation_with(FreeKernel::Infinite, m, t, p)
}

pub fn reset_occupation_with(kernel: FreeKernel, m: i64, t: f64, p: &ResetParams) -> Result<f64> {
    p.validate()?;
    check_time(t)?;
    let (delta, lambda) = (p.delta, p.lambda);
    let no_reset = (-lambda * t).exp() * kernel.occupation(m, p.n0, delta, t);
    let integrand = |s: f64| lambda * (-lambda * s).exp() * kernel.occupation(m, p.target, delta, s);
    let since_reset = integrate_panels(integrand, 0.0, t, PI / delta, QUAD_TOL)?.value;
    Ok((no_reset + since_reset).clamp(0.0, 1.0))
}

/// `⟨m - n₀⟩` under resets.
pub fn reset_mean(t: f64, p: &ResetParams) -> f64 {
    (p.target - p.n0) as f64 * -(-p.lambda * t).exp_m1()
}

/// Mean-squared displacement about `n₀` under resets.
pub fn reset_msd(t: f64, p: &ResetParams) -> f64 {
    let (l, d) = (p.lambda, p.delta);
    let x = l * t;
    let saturation = one_minus_exp_poly(x);
    let shift = (p.target - p.n0) as f64;
    d * d / (l * l) * saturation + shift * shift * -(-x).exp_m1()
}

/// `1 - e^{-x}(1+x)`; series `Σ_{k≥2} (-1)^k (k-1) x^k / k!` for small `x`.
fn one_minus_exp_poly(x: f64) -> f64 {
    if x > 0.1 {
        return -(-x).exp_m1() - x * (-x).exp();
    }
    let mut power = x;
    let mut sum = 0.0;
    for k in 2..20 {
        power *= -x / k as f64;
        sum -= (k - 1) as f64 * power;
    }
    sum
}

/// Stationary occupation of site `m` under resets, from the Gamma/₂F₁ form.
/// Falls back to quadrature when the series argument approaches 1.
pub fn reset_stationary(m: i64, p: &ResetParams) -> Result<f64> {
    p.validate()?;
    let nu = (m - p.target).unsigned_abs() as f64;
    let r2 = (p.lambda / p.delta).powi(2);
    let base = 2.0 + r2;
    let z = 4.0 / (base * base);
    if z > STATIONARY_Z_LIMIT {
        return stationary_fallback(m, p);
    }
    let ln_f = match ln_hyp2f1(nu / 2.0 + 0.75, nu / 2.0 + 0.25, nu + 1.0, z) {
        Ok(f) => f,
        Err(Error::NoConvergence { .. }) => return stationary_fallback(m, p),
        Err(e) => return Err(e),
    };
    let log_prefactor = -0.5 * (1.0 + 2.0 / r2).ln() - nu * base.ln() + ln_gamma(nu + 0.5)
        - 0.5 * PI.ln()
        - ln_gamma(nu + 1.0);
    Ok((log_prefactor + ln_f).exp())
}

/// Quadrature when the time integral is tractable, otherwise the small-rate
/// asymptotics: the logarithmic expansion of `Q` near 1 for `λ|m-𝒩|/Δ` small,
/// the `K₀` form beyond.
fn stationary_fallback(m: i64, p: &ResetParams) -> Result<f64> {
    let r = p.lambda / p.delta;
    if QUADRATURE_HORIZON / r < MAX_QUADRATURE_SPAN {
        return stationary_quadrature(FreeKernel::Infinite, m, p, 1e-10);
    }
    let nu = (m - p.target).unsigned_abs() as f64;
    log::debug!("stationary state at lambda/delta = {r:e} uses the small-rate asymptote");
    if nu * r < 1e-2 {
        Ok(r / PI * (-(0.5 * r).ln() - EULER_GAMMA - digamma(nu + 0.5)?))
    } else {
        Ok(r / PI * bessel_k0(r * nu)?)
    }
}

/// Stationary occupation from the Legendre-function form
/// `(λ/πΔ) Q_{|m-𝒩|-1/2}(1 + λ²/2Δ²)`.
pub fn reset_stationary_legendre(m: i64, p: &ResetParams) -> Result<f64> {
    p.validate()?;
    let order = (m - p.target).unsigned_abs() as u32;
    let x = 1.0 + 0.5 * (p.lambda / p.delta).powi(2);
    Ok(p.lambda / (PI * p.delta) * legendre_q_half(order, x)?)
}

/// `λ∫₀^∞ e^{-λt} K(m, 𝒩, t) dt` by adaptive quadrature to relative accuracy
/// `rel_tol`. The upper limit grows until the exponential tail bound is below
/// `rel_tol` times the running value.
pub fn stationary_quadrature(kernel: FreeKernel, m: i64, p: &ResetParams, rel_tol: f64) -> Result<f64> {
    p.validate()?;
    let (delta, lambda) = (p.delta, p.lambda);
    let integrand = |s: f64| lambda * (-lambda * s).exp() * kernel.occupation(m, p.target, delta, s);
    let chunk = 10.0 / lambda;
    let mut total = 0.0;
    let mut lo = 0.0;
    loop {
        let hi = lo + chunk;
        if delta * hi > MAX_QUADRATURE_SPAN {
            return Err(Error::NoConvergence {
                what: "stationary quadrature horizon",
                iterations: (lo / chunk) as usize,
            });
        }
        total += integrate_panels_tol(integrand, lo, hi, PI / delta, 1e-300, rel_tol)?.value;
        lo = hi;
        let tail = (-lambda * lo).exp();
        if tail <= rel_tol * total || tail < 1e-300 {
            return Ok(total);
        }
    }
}

/// Small-`λ/Δ` asymptote `(λ/πΔ) K₀(λ|m-𝒩|/Δ)` of the stationary state, valid
/// with `λ|m-𝒩|/Δ` held fixed.
pub fn reset_stationary_smalllambda(m: i64, p: &ResetParams) -> Result<f64> {
    p.validate()?;
    if m == p.target {
        return Err(Error::InvalidArgument("asymptote is singular at the reset site".into()));
    }
    let ratio = p.lambda / p.delta;
    if ratio > 0.1 {
        return Err(Error::InvalidArgument(format!("asymptote requires lambda/delta <= 0.1, got {ratio}")));
    }
    let d = (m - p.target).unsigned_abs() as f64;
    Ok(ratio / PI * bessel_k0(ratio * d)?)
}

// ---------------------------------------------------------------------------
// Projective measurements

/// Uniform grid `t_k = k·dt`, `k = 0..=steps`, for the nested time convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl ConvolutionGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidArgument(format!("grid t_max must be positive, got {t_max}")));
        }
        if steps < MIN_GRID_STEPS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {MIN_GRID_STEPS} steps, got {steps}"
            )));
        }
        Ok(Self { t_max, steps })
    }

    /// `dt = min(0.02/Δ, t_max/2000)`.
    pub fn default_for(t_max: f64, delta: f64) -> Result<Self> {
        Self::aligned(t_max, 1, delta)
    }

    /// Default spacing, with `steps` a multiple of `divisions` so that the
    /// points `k·t_max/divisions` fall on grid nodes.
    pub fn aligned(t_max: f64, divisions: usize, delta: f64) -> Result<Self> {
        let divisions = divisions.max(1);
        let dt = (DEFAULT_DT_DELTA / delta).min(t_max / 2000.0);
        let wanted = (t_max / dt).ceil().max(MIN_GRID_STEPS as f64) as usize;
        let steps = wanted.div_ceil(divisions) * divisions;
        Self::new(t_max, steps)
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Index of the node at `t`, if `t` lies on the grid.
    pub fn node(&self, t: f64) -> Option<usize> {
        let x = t / self.dt();
        let k = x.round();
        if k < 0.0 || k as usize > self.steps || (x - k).abs() > 1e-7 {
            None
        } else {
            Some(k as usize)
        }
    }

    fn halved(&self) -> Self {
        Self { t_max: self.t_max, steps: self.steps * 2 }
    }
}

/// Trapezoid-rule convolution `(f*g)(t_k) = ∫₀^{t_k} f(t_k - s) g(s) ds` on a
/// uniform grid.
fn convolve(f: &[f64], g: &[f64], dt: f64) -> Vec<f64> {
    let n = f.len().min(g.len());
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.5 * (f[k] * g[0] + f[0] * g[k]);
        for j in 1..k {
            acc += f[k - j] * g[j];
        }
        *slot = acc * dt;
    }
    out
}

fn sample(kernel: FreeKernel, m: i64, n: i64, delta: f64, grid: &ConvolutionGrid) -> Vec<f64> {
    (0..=grid.steps)
        .map(|k| kernel.occupation(m, n, delta, grid.time(k)))
        .collect()
}

/// Chains `g_p = b^{*(p-1)} * a`, `p = 1..=p_max`, with `a = K(𝒩, n₀)` and
/// `b = K(𝒩, 𝒩)`, on one grid.
struct Chains {
    grid: ConvolutionGrid,
    /// `g[p - 1]`.
    g: Vec<Vec<f64>>,
}

impl Chains {
    fn build(kernel: FreeKernel, p: &ResetParams, grid: ConvolutionGrid, p_max: usize) -> Self {
        let dt = grid.dt();
        let a = sample(kernel, p.target, p.n0, p.delta, &grid);
        let b = sample(kernel, p.target, p.target, p.delta, &grid);
        let mut g = Vec::with_capacity(p_max);
        if p_max >= 1 {
            g.push(a);
            for _ in 1..p_max {
                let next = convolve(&b, g.last().expect("non-empty"), dt);
                g.push(next);
            }
        }
        Self { grid, g }
    }

    /// `Σ_p w_p (c * g_p)` at every node, for the final kernel `c`.
    fn weighted(&self, c: &[f64], weights: &[f64]) -> Vec<f64> {
        let mut sum = vec![0.0; self.grid.steps + 1];
        for (gp, w) in self.g.iter().zip(weights) {
            for (s, v) in sum.iter_mut().zip(gp) {
                *s += w * v;
            }
        }
        convolve(c, &sum, self.grid.dt())
    }
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Poisson tail `e^{-x} Σ_{p>p_max} x^p/p!`.
pub fn poisson_tail(x: f64, p_max: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = (-x + (p_max as f64 + 1.0) * x.ln() - ln_gamma(p_max as f64 + 2.0)).exp();
    let mut sum: f64 = 0.0;
    let mut k = p_max + 1;
    while term > 1e-18 * sum.max(1e-300) || (k as f64) < x {
        sum += term;
        k += 1;
        term *= x / k as f64;
        if term == 0.0 {
            break;
        }
    }
    sum
}

/// Poisson weight `e^{-x} x^p / p!`.
pub fn poisson_weight(x: f64, p: usize) -> f64 {
    if x == 0.0 {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    (-x + p as f64 * x.ln() - ln_gamma(p as f64 + 1.0)).exp()
}

/// `p_max = max(10, ⌈λt + 5√(λt)⌉)`.
pub fn default_p_max(lambda: f64, t: f64) -> usize {
    let x = lambda * t;
    (x + 5.0 * x.sqrt()).ceil().max(10.0) as usize
}

/// Precomputed series for projective measurements: the `p`-th term is the
/// contribution of trajectories with exactly `p` measurements, each finding
/// the particle elsewhere. All results are Richardson-extrapolated from grid
/// spacings `dt` and `dt/2`.
pub struct ProjectiveSeries {
    params: ResetParams,
    kernel: FreeKernel,
    p_max: usize,
    coarse: Chains,
    fine: Chains,
}

/// Truncated series value with the Poisson bound on the dropped terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub truncation_bound: f64,
}

impl ProjectiveSeries {
    pub fn new(kernel: FreeKernel, params: &ResetParams, grid: ConvolutionGrid, p_max: usize) -> Result<Self> {
        params.validate()?;
        if grid.dt() * params.delta > MAX_DT_DELTA {
            log::warn!(
                "convolution grid is coarse: dt*delta = {:.3} > {MAX_DT_DELTA}",
                grid.dt() * params.delta
            );
        }
        Ok(Self {
            params: *params,
            kernel,
            p_max,
            coarse: Chains::build(kernel, params, grid, p_max),
            fine: Chains::build(kernel, params, grid.halved(), p_max),
        })
    }

    pub fn grid(&self) -> ConvolutionGrid {
        self.coarse.grid
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    fn node(&self, t: f64) -> Result<usize> {
        check_time(t)?;
        self.coarse.grid.node(t).ok_or_else(|| {
            Error::InvalidArgument(format!("time {t} is not a node of the convolution grid (dt = {})", self.grid().dt()))
        })
    }

    /// Contribution of exactly `order` measurements to the occupation of `m`
    /// at grid time `t`.
    pub fn term(&self, m: i64, t: f64, order: usize) -> Result<f64> {
        let k = self.node(t)?;
        let (lambda, delta) = (self.params.lambda, self.params.delta);
        let decay = (-lambda * t).exp();
        if order == 0 {
            return Ok(decay * self.kernel.occupation(m, self.params.n0, delta, t));
        }
        if order > self.p_max {
            return Err(Error::InvalidArgument(format!("order {order} exceeds p_max {}", self.p_max)));
        }
        let mut weights = vec![0.0; self.p_max];
        weights[order - 1] = 1.0;
        let c = sample(self.kernel, m, self.params.target, delta, &self.coarse.grid);
        let cf = sample(self.kernel, m, self.params.target, delta, &self.fine.grid);
        let lo = self.coarse.weighted(&c, &weights)[k];
        let hi = self.fine.weighted(&cf, &weights)[2 * k];
        Ok((lambda.powi(order as i32) * decay * richardson(lo, hi)).max(0.0))
    }

    /// Occupation of site `m` at every grid node up to `p_max` measurements.
    pub fn occupation_curve(&self, m: i64) -> Vec<f64> {
        let c = sample(self.kernel, m, self.params.target, self.params.delta, &self.coarse.grid);
        let cf = sample(self.kernel, m, self.params.target, self.params.delta, &self.fine.grid);
        self.assemble(&c, &cf, |t| self.kernel.occupation(m, self.params.n0, self.params.delta, t))
    }

    /// Survival probability (total occupation) at every grid node.
    pub fn survival_curve(&self) -> Vec<f64> {
        let (p, delta) = (&self.params, self.params.delta);
        let t_max = self.grid().t_max;
        let last = self.kernel.window(&[p.target], delta, t_max);
        let first = self.kernel.window(&[p.n0], delta, t_max);
        let summed = |grid: &ConvolutionGrid| -> Vec<f64> {
            let mut acc = vec![0.0; grid.steps + 1];
            for &m in &last {
                for (a, v) in acc.iter_mut().zip(sample(self.kernel, m, p.target, delta, grid)) {
                    *a += v;
                }
            }
            acc
        };
        let c = summed(&self.coarse.grid);
        let cf = summed(&self.fine.grid);
        self.assemble(&c, &cf, |t| first.iter().map(|&m| self.kernel.occupation(m, p.n0, delta, t)).sum())
    }

    fn assemble<F: Fn(f64) -> f64>(&self, c: &[f64], cf: &[f64], free: F) -> Vec<f64> {
        let lambda = self.params.lambda;
        let weights: Vec<f64> = (1..=self.p_max).map(|q| lambda.powi(q as i32)).collect();
        let lo = self.coarse.weighted(c, &weights);
        let hi = self.fine.weighted(cf, &weights);
        (0..=self.coarse.grid.steps)
            .map(|k| {
                let t = self.coarse.grid.time(k);
                let decay = (-lambda * t).exp();
                (decay * (free(t) + richardson(lo[k], hi[2 * k]))).max(0.0)
            })
            .collect()
    }

    pub fn truncation_bound(&self, t: f64) -> f64 {
        poisson_tail(self.params.lambda * t, self.p_max)
    }
}

/// Single `p`-measurement contribution to the occupation of `m` at time `t`.
pub fn projective_term(m: i64, t: f64, order: usize, p: &ResetParams, grid: &ConvolutionGrid) -> Result<f64> {
    check_time(t)?;
    if t > grid.t_max * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("time {t} exceeds grid t_max {}", grid.t_max)));
    }
    if order == 0 {
        return Ok((-p.lambda * t).exp() * FreeKernel::Infinite.occupation(m, p.n0, p.delta, t));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    // re-grid so that t is a node with the requested spacing or finer
    let steps = ((t / grid.dt()).ceil() as usize).max(MIN_GRID_STEPS);
    let local = ConvolutionGrid::new(t, steps)?;
    ProjectiveSeries::new(FreeKernel::Infinite, p, local, order)?.term(m, t, order)
}

/// Occupation of `m` at time `t` under projective measurements, summed up to
/// `p_max` measurements.
pub fn projective_occupation(m: i64, t: f64, p: &ResetParams, p_max: usize) -> Result<SeriesValue> {
    projective_occupation_with(FreeKernel::Infinite, m, t, p, p_max)
}

pub fn projective_occupation_with(
    kernel: FreeKernel,
    m: i64,
    t: f64,
    p: &ResetParams,
    p_max: usize,
) -> Result<SeriesValue> {
    p.validate()?;
    check_time(t)?;
    if p_max < 1 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    if t == 0.0 {
        let value = if m == p.n0 { 1.0 } else { 0.0 };
        return Ok(SeriesValue { value, truncation_bound: 0.0 });
    }
    let grid = ConvolutionGrid::default_for(t, p.delta)?;
    let series = ProjectiveSeries::new(kernel, p, grid, p_max)?;
    Ok(SeriesValue {
        value: series.occupation_curve(m)[grid.steps],
        truncation_bound: series.truncation_bound(t),
    })
}

/// Probability that no measurement has found the particle at `𝒩` by time `t`.
pub fn survival_probability(t: f64, p: &ResetParams, p_max: usize) -> Result<SeriesValue> {
    p.validate()?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(SeriesValue { value: 1.0, truncation_bound: 0.0 });
    }
    let grid = ConvolutionGrid::default_for(t, p.delta)?;
    let series = ProjectiveSeries::new(FreeKernel::Infinite, p, grid, p_max)?;
    Ok(SeriesValue {
        value: series.survival_curve()[grid.steps].min(1.0),
        truncation_bound: series.truncation_bound(t),
    })
}

/// Frequent-measurement forms for the occupation of the measured initial site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZenoOccupation {
    /// `1 - Δ²t/λ`.
    pub leading: f64,
    /// `1 - Δ²t/λ + Δ²/λ² + e^{-λt}[J₀²(Δt) - 1 + Δ²t²/2 - Δ²/λ²]`.
    pub full: f64,
}

/// Validity requires `λ/Δ >= 20`; smaller ratios are evaluated but logged.
pub fn zeno_occupation(t: f64, lambda: f64, delta: f64) -> ZenoOccupation {
    if lambda / delta < 20.0 {
        log::debug!("zeno form used outside lambda/delta >= 20 (ratio {})", lambda / delta);
    }
    let r = delta * delta / (lambda * lambda);
    let leading = 1.0 - delta * delta * t / lambda;
    let j0 = bessel_j(0, delta * t);
    let bracket = j0 * j0 - 1.0 + 0.5 * (delta * t).powi(2) - r;
    ZenoOccupation {
        leading,
        full: leading + r + (-lambda * t).exp() * bracket,
    }
}

/// Regular-interval measurement comparator `1 - tτΔ²/2`.
pub fn zeno_regular_interval(t: f64, tau: f64, delta: f64) -> f64 {
    1.0 - t * tau * delta * delta / 2.0
}

/// Free-evolution limit of [`reset_occupation`] and [`projective_occupation`].
pub fn vanishing_rate(p: &ResetParams) -> ResetParams {
    p.with_lambda(f64::MIN_POSITIVE)
}
