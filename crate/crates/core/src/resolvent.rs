//! Laplace-domain solution of the averaged dynamics,
//! `ρ̃(s) = [(s+λ)I + iL − λT]⁻¹ ρ₀`, its interaction series, and numerical
//! inversion back to the time domain.

use crate::error::{Error, Result};
use crate::lattice::{DensityMatrix, LatticeSpec, C64};
use crate::superop::{apply_intervention, build_intervention_matrix, InterventionKind, LiouvilleIndex, SuperMatrix, DENSE_LIMIT};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::f64::consts::PI;

pub const DEFAULT_TALBOT_NODES: usize = 32;
/// Inversions whose `M` and `2M` node results differ by more than this are flagged.
pub const TALBOT_WARN_THRESHOLD: f64 = 1e-4;
/// Vertical stretch `ν` of the contour `s(θ) = r(θ cot θ + iνθ)`. Hopping
/// puts poles at `|Im s|` up to `2Δ`; the unstretched contour stops enclosing
/// them once `t` exceeds a few `1/Δ`.
pub const TALBOT_STRETCH: f64 = 3.0;
/// Largest accepted relative residual of a direct solve.
pub const RESIDUAL_TOL: f64 = 1e-9;
const POWER_ITERATIONS: usize = 200;

/// Laplace variable with `Re(s) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFrequency(C64);

impl ComplexFrequency {
    pub fn new(s: C64) -> Result<Self> {
        if !(s.re > 0.0 && s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("Laplace variable needs Re(s) > 0, got {s}")));
        }
        Ok(Self(s))
    }

    /// Any finite `s`, for evaluating the analytic continuation of a
    /// transform on an inversion contour that reaches into `Re(s) <= 0`.
    pub fn continued(s: C64) -> Result<Self> {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("Laplace variable must be finite, got {s}")));
        }
        Ok(Self(s))
    }

    pub fn real(s: f64) -> Result<Self> {
        Self::new(C64::new(s, 0.0))
    }

    pub fn value(&self) -> C64 {
        self.0
    }
}

fn check_dense(spec: &LatticeSpec) -> Result<()> {
    let n = spec.n_sites();
    if n > DENSE_LIMIT {
        Err(Error::TooLarge { n, limit: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rate must be finite and non-negative, got {lambda}")))
    }
}

/// Liouvillian `(mn|L|m'n') = H_{mm'}δ_{nn'} − δ_{mm'}H_{n'n}` as an `N²×N²` matrix.
pub fn liouvillian(spec: &LatticeSpec) -> Result<DMatrix<C64>> {
    check_dense(spec)?;
    let n = spec.n_sites();
    let h = spec.hamiltonian();
    let idx = LiouvilleIndex::new(spec);
    let mut l = DMatrix::zeros(n * n, n * n);
    for m in 0..n {
        for k in 0..n {
            let hmk = h[(m, k)];
            let hkm = h[(k, m)];
            for j in 0..n {
                // H acting from the left on the row index
                l[(idx.flatten(m, j), idx.flatten(k, j))] += hmk;
                // ρH: (ρH)_{jm} = Σ_k ρ_{jk} H_{km}
                l[(idx.flatten(j, m), idx.flatten(j, k))] -= hkm;
            }
        }
    }
    Ok(l)
}

/// `Lρ = Hρ − ρH`.
fn commutator(h: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    h * rho - rho * h
}

fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Factorized `(s+λ)I + iL − λT` for one `s`.
pub struct ResolventOperator {
    spec: LatticeSpec,
    s: ComplexFrequency,
    lambda: f64,
    kind: Option<InterventionKind>,
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ResolventOperator {
    /// `kind = None` gives the interaction-free resolvent `Ũ₀(s) = [(s+λ)I + iL]⁻¹`.
    pub fn new(spec: &LatticeSpec, s: ComplexFrequency, lambda: f64, kind: Option<InterventionKind>) -> Result<Self> {
        check_dense(spec)?;
        check_rate(lambda)?;
        let n2 = spec.n_sites().pow(2);
        let mut a = liouvillian(spec)? * C64::new(0.0, 1.0);
        let shift = s.value() + lambda;
        for i in 0..n2 {
            a[(i, i)] += shift;
        }
        if let Some(kind) = kind {
            let t = build_intervention_matrix(kind, spec)?;
            let t = t.dense().expect("dense below the size limit");
            a -= t * C64::new(lambda, 0.0);
        }
        Ok(Self {
            spec: *spec,
            s,
            lambda,
            kind,
            lu: a.lu(),
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.n_sites().pow(2)
    }

    /// Applies the operator itself (not its inverse) by its action on matrices.
    fn apply_forward(&self, x: &DensityMatrix) -> Result<DMatrix<C64>> {
        let h = self.spec.hamiltonian();
        let shift = self.s.value() + self.lambda;
        let mut out = x.matrix() * shift + commutator(&h, x.matrix()) * C64::new(0.0, 1.0);
        if let Some(kind) = self.kind {
            out -= apply_intervention(x, kind)?.into_matrix() * C64::new(self.lambda, 0.0);
        }
        Ok(out)
    }

    pub fn solve(&self, rho0: &DensityMatrix) -> Result<DensityMatrix> {
        if rho0.dim() != self.spec.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.n_sites(),
                got: rho0.dim(),
            });
        }
        let singular = || Error::Singular {
            re: self.s.value().re,
            im: self.s.value().im,
        };
        let b = DVector::from_vec(rho0.flatten());
        let x = self.lu.solve(&b).ok_or_else(singular)?;
        let x = DensityMatrix::unflatten(self.spec, x.as_slice())?;
        let residual = frobenius(&(self.apply_forward(&x)? - rho0.matrix()));
        let scale = frobenius(rho0.matrix());
        if !(residual <= RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE)) {
            return Err(singular());
        }
        Ok(x)
    }
}

/// `ρ̃(s)` solving `[(s+λ)I + iL − λT] ρ̃ = ρ₀` by dense LU.
pub fn resolvent_solve(
    s: ComplexFrequency,
    rho0: &DensityMatrix,
    kind: InterventionKind,
    lambda: f64,
    spec: &LatticeSpec,
) -> Result<DensityMatrix> {
    ResolventOperator::new(spec, s, lambda, Some(kind))?.solve(rho0)
}

/// Same solution as [`resolvent_solve`], using that `T` has rank one: with
/// `T x = v(x)|𝒩⟩⟨𝒩|`, the Sherman–Morrison formula reduces the solve to two
/// applications of the spectral `Ũ₀(s)`. Costs `O(N³)` and has no size ceiling.
pub fn resolvent_solve_rank_one(
    s: ComplexFrequency,
    rho0: &DensityMatrix,
    kind: InterventionKind,
    lambda: f64,
    spec: &LatticeSpec,
) -> Result<DensityMatrix> {
    let target = kind.validate(spec)?;
    let functional = |x: &DensityMatrix| -> C64 {
        match kind {
            InterventionKind::Reset(_) => x.matrix().trace(),
            InterventionKind::Projection(_) => x.matrix()[(target, target)],
        }
    };
    let x0 = free_resolvent_apply(spec, s, lambda, rho0)?;
    let w = free_resolvent_apply(spec, s, lambda, &DensityMatrix::localized(*spec, kind.target())?)?;
    let denom = C64::new(1.0, 0.0) - lambda * functional(&w);
    if denom.norm() < 1e-300 {
        return Err(Error::Singular {
            re: s.value().re,
            im: s.value().im,
        });
    }
    let coef = lambda * functional(&x0) / denom;
    DensityMatrix::from_matrix(*spec, x0.into_matrix() + w.into_matrix() * coef)
}

/// Momentum eigenbasis `V_{jq} = e^{2πiqj/N}/√N` of the hopping Hamiltonian.
fn bloch_basis(spec: &LatticeSpec) -> DMatrix<C64> {
    let n = spec.n_sites();
    let norm = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |j, q| C64::from_polar(norm, 2.0 * PI * ((q * j) % n) as f64 / n as f64))
}

/// `Ũ₀(s)ρ = ∫₀^∞ e^{-(s+λ)t} e^{-iHt} ρ e^{iHt} dt`, evaluated in the momentum
/// basis where it is diagonal.
pub fn free_resolvent_apply(spec: &LatticeSpec, s: ComplexFrequency, lambda: f64, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_rate(lambda)?;
    if rho.dim() != spec.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_sites(),
            got: rho.dim(),
        });
    }
    let n = spec.n_sites();
    let v = bloch_basis(spec);
    let shift = s.value() + lambda;
    let energies: Vec<f64> = (0..n).map(|q| spec.energy(q)).collect();
    let mut hat = v.adjoint() * rho.matrix() * &v;
    for q in 0..n {
        for qp in 0..n {
            hat[(q, qp)] /= shift + C64::new(0.0, energies[q] - energies[qp]);
        }
    }
    DensityMatrix::from_matrix(*spec, &v * hat * v.adjoint())
}

/// Partial sums `Σ_{k<K} (λŨ₀T)^k Ũ₀ρ₀` of the interaction series.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    pub partial_sums: Vec<DensityMatrix>,
    /// Frobenius norm of each term.
    pub term_norms: Vec<f64>,
    /// Power-iteration estimate of the spectral radius of `λŨ₀(s)T`.
    pub spectral_radius: f64,
}

impl SeriesExpansion {
    /// Geometric bound on the norm of the terms not included.
    pub fn tail_bound(&self) -> f64 {
        let last = *self.term_norms.last().unwrap_or(&0.0);
        last * self.spectral_radius / (1.0 - self.spectral_radius)
    }
}

/// Spectral radius of `x ↦ λŨ₀(s)Tx` by power iteration.
pub fn interaction_spectral_radius(spec: &LatticeSpec, s: ComplexFrequency, lambda: f64, kind: InterventionKind) -> Result<f64> {
    kind.validate(spec)?;
    let n = spec.n_sites();
    // generic start with overlap on every diagonal and off-diagonal entry
    let mut x = DensityMatrix::from_matrix(
        *spec,
        DMatrix::from_fn(n, n, |i, j| C64::new(1.0 + 0.1 * i as f64, 0.05 * j as f64)),
    )?;
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let norm_x = frobenius(x.matrix());
        if norm_x == 0.0 {
            return Ok(0.0);
        }
        let y = free_resolvent_apply(spec, s, lambda, &apply_intervention(&x, kind)?)?;
        let y = DensityMatrix::from_matrix(*spec, y.into_matrix() * C64::new(lambda, 0.0))?;
        let norm_y = frobenius(y.matrix());
        let next = norm_y / norm_x;
        let settled = (next - estimate).abs() <= 1e-14 * next.max(1e-300);
        estimate = next;
        if settled || norm_y == 0.0 {
            break;
        }
        x = DensityMatrix::from_matrix(*spec, y.into_matrix() / C64::new(norm_y, 0.0))?;
    }
    Ok(estimate)
}

/// Expands `ρ̃(s)` in powers of the interaction; `orders` is the number of terms.
pub fn series_expand(
    s: ComplexFrequency,
    rho0: &DensityMatrix,
    kind: InterventionKind,
    lambda: f64,
    spec: &LatticeSpec,
    orders: usize,
) -> Result<SeriesExpansion> {
    if orders < 1 {
        return Err(Error::InvalidArgument("series needs at least one term".into()));
    }
    let radius = interaction_spectral_radius(spec, s, lambda, kind)?;
    if radius >= 1.0 {
        return Err(Error::Divergent(radius));
    }
    let mut term = free_resolvent_apply(spec, s, lambda, rho0)?;
    let mut sum = term.matrix().clone();
    let mut partial_sums = vec![DensityMatrix::from_matrix(*spec, sum.clone())?];
    let mut term_norms = vec![frobenius(term.matrix())];
    for _ in 1..orders {
        let next = free_resolvent_apply(spec, s, lambda, &apply_intervention(&term, kind)?)?;
        term = DensityMatrix::from_matrix(*spec, next.into_matrix() * C64::new(lambda, 0.0))?;
        sum += term.matrix();
        term_norms.push(frobenius(term.matrix()));
        partial_sums.push(DensityMatrix::from_matrix(*spec, sum.clone())?);
    }
    Ok(SeriesExpansion {
        partial_sums,
        term_norms,
        spectral_radius: radius,
    })
}

/// General waiting-time form `ρ̃(s) = [I − P̃(s)T]⁻¹ F̃(s)ρ₀`, with the caller
/// supplying `P̃(s) = L[p(t)e^{-iLt}](s)` and `F̃(s) = L[F(t)e^{-iLt}](s)`
/// as `N²×N²` matrices, `F(t)` being the probability of no event up to `t`.
pub fn general_resolvent_solve(
    p_tilde: &DMatrix<C64>,
    f_tilde: &DMatrix<C64>,
    intervention: &SuperMatrix,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    let spec = *rho0.spec();
    let n2 = spec.n_sites().pow(2);
    for m in [p_tilde, f_tilde] {
        if m.nrows() != n2 || m.ncols() != n2 {
            return Err(Error::DimensionMismatch {
                expected: n2,
                got: m.nrows().max(m.ncols()),
            });
        }
    }
    let t = intervention
        .dense()
        .ok_or(Error::TooLarge { n: spec.n_sites(), limit: DENSE_LIMIT })?;
    let a = DMatrix::<C64>::identity(n2, n2) - p_tilde * t;
    let b = f_tilde * DVector::from_vec(rho0.flatten());
    let x = a.lu().solve(&b).ok_or(Error::Singular { re: f64::NAN, im: f64::NAN })?;
    DensityMatrix::unflatten(spec, x.as_slice())
}

/// Time-domain operator recovered from its transform.
#[derive(Debug, Clone)]
pub struct Inversion {
    pub rho: DensityMatrix,
    pub nodes: usize,
    /// Largest entrywise difference between the `M`- and `2M`-node results.
    pub discrepancy: f64,
    pub warning: bool,
}

/// Fixed-Talbot inversion with `nodes` contour points on the contour
/// stretched by [`TALBOT_STRETCH`]. The transform is assumed to satisfy
/// `F(s̄) = F(s)†`, so the two contour halves combine into a Hermitian part.
pub fn talbot<F>(sampler: &F, t: f64, nodes: usize) -> Result<DensityMatrix>
where
    F: Fn(C64) -> Result<DensityMatrix> + Sync,
{
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("inversion time must be positive, got {t}")));
    }
    if nodes < 2 {
        return Err(Error::InvalidArgument("Talbot contour needs at least two nodes".into()));
    }
    let m = nodes as f64;
    let r = 2.0 * m / (5.0 * t);
    let first = sampler(C64::new(r, 0.0))?;
    let spec = *first.spec();
    let nu = TALBOT_STRETCH;
    let mut acc = first.into_matrix() * C64::new(0.5 * nu * (r * t).exp(), 0.0);
    let samples: Vec<Result<DMatrix<C64>>> = (1..nodes)
        .into_par_iter()
        .map(|k| {
            let theta = k as f64 * PI / m;
            let cot = theta.cos() / theta.sin();
            let s = C64::new(r * theta * cot, r * nu * theta);
            let sigma = theta + (theta * cot - 1.0) * cot;
            let f = sampler(s)?;
            let weight = (s * t).exp() * C64::new(nu, sigma);
            Ok(hermitian_part(&(f.into_matrix() * weight)))
        })
        .collect();
    // fixed summation order keeps results reproducible across thread counts
    for term in samples {
        acc += term?;
    }
    DensityMatrix::from_matrix(spec, acc * C64::new(r / m, 0.0))
}

/// Inverts at `t` with the default node count and estimates the error from a
/// second inversion with twice as many nodes.
pub fn invert_laplace<F>(sampler: F, t: f64) -> Result<Inversion>
where
    F: Fn(C64) -> Result<DensityMatrix> + Sync,
{
    invert_laplace_with(sampler, t, DEFAULT_TALBOT_NODES)
}

pub fn invert_laplace_with<F>(sampler: F, t: f64, nodes: usize) -> Result<Inversion>
where
    F: Fn(C64) -> Result<DensityMatrix> + Sync,
{
    let base = talbot(&sampler, t, nodes)?;
    let doubled = talbot(&sampler, t, 2 * nodes)?;
    let discrepancy = (base.matrix() - doubled.matrix()).map(|z| z.norm()).max();
    let warning = discrepancy > TALBOT_WARN_THRESHOLD;
    if warning {
        log::debug!("Laplace inversion at t = {t}: {nodes}- and {}-node results differ by {discrepancy:.2e}", 2 * nodes);
    }
    Ok(Inversion {
        rho: base,
        nodes,
        discrepancy,
        warning,
    })
}

/// How `ρ̃(s)` is computed at each contour node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Dense LU on the `N²×N²` system.
    #[default]
    DenseLu,
    /// Rank-one update of the spectral free resolvent.
    RankOne,
}

/// `ρ̄(t)` for the exponential-waiting-time dynamics by Laplace inversion.
pub fn averaged_state(
    spec: &LatticeSpec,
    rho0: &DensityMatrix,
    kind: InterventionKind,
    lambda: f64,
    t: f64,
    solver: Solver,
) -> Result<Inversion> {
    match solver {
        Solver::DenseLu => {
            check_dense(spec)?;
            let sampler = |s: C64| resolvent_solve(ComplexFrequency::continued(s)?, rho0, kind, lambda, spec);
            invert_laplace(sampler, t)
        }
        Solver::RankOne => {
            let sampler = |s: C64| resolvent_solve_rank_one(ComplexFrequency::continued(s)?, rho0, kind, lambda, spec);
            invert_laplace(sampler, t)
        }
    }
}
