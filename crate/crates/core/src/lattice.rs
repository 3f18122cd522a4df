//! Finite periodic tight-binding chain.
//!
//! Sites carry labels `-N/2 ..= N/2 - 1`. Internally they are stored as offsets
//! `label + N/2` in `0..N`; every public function takes and returns labels.

use crate::error::{Error, Result};
use crate::special::bessel_j;
use lru::LruCache;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

pub type C64 = Complex64;

/// Sites kept free between a spreading wavefront and its periodic image before
/// a finite-lattice result is trusted as an infinite-chain one.
pub const DEFAULT_BOUNDARY_MARGIN: f64 = 10.0;

pub const DEFAULT_CACHE_CAPACITY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    n_sites: usize,
    delta: f64,
}

impl LatticeSpec {
    pub fn new(n_sites: usize, delta: f64) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 {
            return Err(Error::InvalidLattice(format!(
                "number of sites must be even and at least 2, got {n_sites}"
            )));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "hopping strength must be positive and finite, got {delta}"
            )));
        }
        Ok(Self { n_sites, delta })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn min_label(&self) -> i64 {
        -(self.n_sites as i64 / 2)
    }

    pub fn max_label(&self) -> i64 {
        self.n_sites as i64 / 2 - 1
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> {
        self.min_label()..=self.max_label()
    }

    /// Storage offset of a site label.
    pub fn index(&self, label: i64) -> Result<usize> {
        if label < self.min_label() || label > self.max_label() {
            return Err(Error::SiteOutOfRange {
                site: label,
                min: self.min_label(),
                max: self.max_label(),
            });
        }
        Ok((label - self.min_label()) as usize)
    }

    /// Label of a storage offset.
    pub fn label(&self, index: usize) -> i64 {
        index as i64 + self.min_label()
    }

    /// Storage offset of any integer site, folded periodically onto the ring.
    pub fn wrap(&self, label: i64) -> usize {
        (label - self.min_label()).rem_euclid(self.n_sites as i64) as usize
    }

    /// Single-particle energy of momentum mode `q`: `-Δ cos(2πq/N)`.
    pub fn energy(&self, q: usize) -> f64 {
        -self.delta * (2.0 * PI * q as f64 / self.n_sites as f64).cos()
    }

    /// True when a wavefront launched at `t = 0` (speed `Δ` each way) has not
    /// yet met its periodic image at time `t`.
    pub fn is_boundary_free(&self, t: f64, margin: f64) -> bool {
        2.0 * self.delta * t + margin < self.n_sites as f64
    }

    /// Hamiltonian `-(Δ/2)(K + K†)` as a dense matrix in storage order.
    pub fn hamiltonian(&self) -> DMatrix<C64> {
        let n = self.n_sites;
        let hop = C64::new(-0.5 * self.delta, 0.0);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let j = (i + 1) % n;
            h[(i, j)] += hop;
            h[(j, i)] += hop;
        }
        h
    }
}

/// `N×N` density matrix in storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spec: LatticeSpec,
    data: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn zeros(spec: LatticeSpec) -> Self {
        let n = spec.n_sites();
        Self {
            spec,
            data: DMatrix::zeros(n, n),
        }
    }

    /// `|site⟩⟨site|`.
    pub fn localized(spec: LatticeSpec, site: i64) -> Result<Self> {
        let i = spec.index(site)?;
        let mut rho = Self::zeros(spec);
        rho.data[(i, i)] = C64::new(1.0, 0.0);
        Ok(rho)
    }

    pub fn from_matrix(spec: LatticeSpec, data: DMatrix<C64>) -> Result<Self> {
        let n = spec.n_sites();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { spec, data })
    }

    /// `|ψ⟩⟨ψ|` for an amplitude vector in storage order.
    pub fn from_amplitudes(spec: LatticeSpec, psi: &[C64]) -> Result<Self> {
        let n = spec.n_sites();
        if psi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: psi.len(),
            });
        }
        let data = DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Ok(Self { spec, data })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.n_sites()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    /// `⟨m|ρ|n⟩` by site labels.
    pub fn entry(&self, m: i64, n: i64) -> Result<C64> {
        Ok(self.data[(self.spec.index(m)?, self.spec.index(n)?)])
    }

    /// `⟨m|ρ|m⟩`.
    pub fn occupation(&self, m: i64) -> Result<f64> {
        Ok(self.entry(m, m)?.re)
    }

    /// Site occupations in storage order.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Largest `|ρ_mn - conj(ρ_nm)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Row-major flattening over `(m, n)`: index `m * N + n` in storage order.
    pub fn flatten(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn unflatten(spec: LatticeSpec, flat: &[C64]) -> Result<Self> {
        let n = spec.n_sites();
        if flat.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: flat.len(),
            });
        }
        let data = DMatrix::from_fn(n, n, |i, j| flat[i * n + j]);
        Ok(Self { spec, data })
    }
}

/// Free-evolution operator `e^{-iHτ}` on the periodic lattice.
///
/// The matrix is circulant: entry `(m, m')` depends only on `(m - m') mod N`,
/// so only the first column is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    spec: LatticeSpec,
    tau: f64,
    column: Vec<C64>,
}

/// Builds `e^{-iHτ}` by summing over the `N` momentum eigenmodes:
/// `⟨m|e^{-iHτ}|m'⟩ = (1/N) Σ_q exp[i 2πq(m-m')/N + iΔτ cos(2πq/N)]`.
pub fn build_propagator(spec: &LatticeSpec, tau: f64) -> Result<Propagator> {
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("propagation time must be finite, got {tau}")));
    }
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!("propagation time must be non-negative, got {tau}")));
    }
    let n = spec.n_sites();
    let roots: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let phases: Vec<C64> = (0..n)
        .map(|q| C64::from_polar(1.0 / n as f64, -spec.energy(q) * tau))
        .collect();
    let column = (0..n)
        .map(|d| {
            phases
                .iter()
                .enumerate()
                .map(|(q, p)| p * roots[(q * d) % n])
                .sum()
        })
        .collect();
    Ok(Propagator {
        spec: *spec,
        tau,
        column,
    })
}

impl Propagator {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.column.len()
    }

    /// Entry by storage offsets.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        let n = self.column.len();
        self.column[(i + n - j) % n]
    }

    /// `⟨m|e^{-iHτ}|m'⟩` by site labels.
    pub fn element(&self, m: i64, m_prime: i64) -> Result<C64> {
        Ok(self.at(self.spec.index(m)?, self.spec.index(m_prime)?))
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.at(i, j))
    }

    /// `U ψ` for an amplitude vector in storage order.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, p) in psi.iter().enumerate() {
                acc += self.column[(i + n - j) % n] * p;
            }
            *o = acc;
        }
        out
    }

    /// Largest entry of `|U U† - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.to_matrix();
        let prod = &u * u.adjoint();
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `U ρ U†`.
pub fn evolve(rho: &DensityMatrix, u: &Propagator) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: rho.dim(),
        });
    }
    let um = u.to_matrix();
    let data = &um * rho.matrix() * um.adjoint();
    Ok(DensityMatrix {
        spec: rho.spec,
        data,
    })
}

/// Free-chain occupation `J²_{m-n0}(Δt)` of site `m` for a particle started
/// at `n0`.
pub fn free_occupation(m: i64, n0: i64, delta: f64, t: f64) -> f64 {
    let order = match i32::try_from(m - n0) {
        Ok(o) => o,
        Err(_) => return 0.0,
    };
    let j = bessel_j(order, delta * t);
    j * j
}

/// Free-chain mean-squared displacement `Δ²t²/2`.
pub fn free_msd(delta: f64, t: f64) -> f64 {
    0.5 * delta * delta * t * t
}

/// Bounded LRU cache of propagators keyed on `(N, Δ, τ)`.
pub struct PropagatorCache {
    inner: Mutex<LruCache<(usize, u64, u64), Arc<Propagator>>>,
}

impl Default for PropagatorCache {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_CAPACITY)
    }
}

impl PropagatorCache {
    pub fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).expect("capacity is at least 1");
        Self {
            inner: Mutex::new(LruCache::new(cap)),
        }
    }

    pub fn get(&self, spec: &LatticeSpec, tau: f64) -> Result<Arc<Propagator>> {
        let key = (spec.n_sites(), spec.delta().to_bits(), tau.to_bits());
        if let Some(p) = self.inner.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(p));
        }
        let built = Arc::new(build_propagator(spec, tau)?);
        self.inner
            .lock()
            .expect("cache lock")
            .put(key, Arc::clone(&built));
        Ok(built)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec30() -> LatticeSpec {
        LatticeSpec::new(30, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_lattices() {
        assert!(LatticeSpec::new(7, 1.0).is_err());
        assert!(LatticeSpec::new(0, 1.0).is_err());
        assert!(LatticeSpec::new(10, 0.0).is_err());
        assert!(LatticeSpec::new(10, -1.0).is_err());
        assert!(LatticeSpec::new(10, f64::NAN).is_err());
    }

    #[test]
    fn label_bijection() {
        let s = LatticeSpec::new(8, 1.0).unwrap();
        assert_eq!(s.min_label(), -4);
        assert_eq!(s.max_label(), 3);
        for l in s.labels() {
            assert_eq!(s.label(s.index(l).unwrap()), l);
        }
        assert!(s.index(4).is_err());
        assert_eq!(s.wrap(4), s.index(-4).unwrap());
        assert_eq!(s.wrap(-5), s.index(3).unwrap());
    }

    #[test]
    fn zero_time_is_identity() {
        let u = build_propagator(&spec30(), 0.0).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.at(i, j) - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_non_finite_tau() {
        assert!(build_propagator(&spec30(), f64::NAN).is_err());
        assert!(build_propagator(&spec30(), f64::INFINITY).is_err());
        assert!(build_propagator(&spec30(), -1.0).is_err());
    }

    #[test]
    fn semigroup() {
        let s = spec30();
        let a = build_propagator(&s, 0.3).unwrap().to_matrix();
        let b = build_propagator(&s, 0.7).unwrap().to_matrix();
        let c = build_propagator(&s, 1.0).unwrap().to_matrix();
        let diff = (&a * &b - c).map(|z| z.norm()).max();
        assert!(diff < 1e-10);
    }

    #[test]
    fn return_amplitude_matches_bessel() {
        let u = build_propagator(&spec30(), 1.0).unwrap();
        let amp = u.element(1, 1).unwrap().norm_sqr();
        // J_0(1)^2
        assert!((amp - 0.585_527_499_513_664).abs() < 1e-6, "{amp}");
    }

    #[test]
    fn matches_exponential_of_hamiltonian() {
        // independent route: e^{-iHτ} from the Hermitian eigendecomposition of H
        let s = LatticeSpec::new(12, 0.8).unwrap();
        let tau = 2.3;
        let h = s.hamiltonian();
        let hr = h.map(|z| z.re);
        let eig = hr.symmetric_eigen();
        let n = s.n_sites();
        let mut expected = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let phase = C64::from_polar(1.0, -eig.eigenvalues[k] * tau);
            for i in 0..n {
                for j in 0..n {
                    expected[(i, j)] += phase * eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)];
                }
            }
        }
        let got = build_propagator(&s, tau).unwrap().to_matrix();
        assert!((got - expected).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn evolve_identity_and_bessel() {
        let s = spec30();
        let rho = DensityMatrix::localized(s, 1).unwrap();
        let id = build_propagator(&s, 0.0).unwrap();
        let same = evolve(&rho, &id).unwrap();
        assert!((same.matrix() - rho.matrix()).map(|z| z.norm()).max() < 1e-14);

        let u = build_propagator(&s, 1.0).unwrap();
        let out = evolve(&rho, &u).unwrap();
        // J_2(1)^2
        assert!((out.occupation(3).unwrap() - 0.013_202_810_849_495).abs() < 1e-6);
        assert!((out.trace() - 1.0).abs() < 1e-12);
        assert!(out.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn evolve_rejects_dimension_mismatch() {
        let rho = DensityMatrix::localized(LatticeSpec::new(10, 1.0).unwrap(), 0).unwrap();
        let u = build_propagator(&spec30(), 1.0).unwrap();
        assert!(matches!(evolve(&rho, &u), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn state_vector_apply_matches_density_evolution() {
        let s = LatticeSpec::new(10, 1.3).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); 10];
        psi[2] = C64::new(0.6, 0.0);
        psi[7] = C64::new(0.0, 0.8);
        let u = build_propagator(&s, 0.9).unwrap();
        let rho = DensityMatrix::from_amplitudes(s, &psi).unwrap();
        let via_rho = evolve(&rho, &u).unwrap();
        let via_psi = DensityMatrix::from_amplitudes(s, &u.apply(&psi)).unwrap();
        assert!((via_rho.matrix() - via_psi.matrix()).map(|z| z.norm()).max() < 1e-14);
    }

    #[test]
    fn free_occupation_values() {
        assert_eq!(free_occupation(4, 4, 1.0, 0.0), 1.0);
        let a = free_occupation(6, 4, 0.7, 3.1);
        let b = free_occupation(2, 4, 0.7, 3.1);
        assert!((a - b).abs() < 1e-16);
        assert!((free_occupation(5, 0, 1.0, 1.0) - 6.237_892_380_026_776e-8).abs() < 1e-12);
    }

    #[test]
    fn free_msd_values() {
        assert_eq!(free_msd(1.0, 0.0), 0.0);
        assert_eq!(free_msd(1.0, 2.0), 2.0);
        for &(delta, t) in &[(1.0, 0.5), (0.5, 7.0), (2.0, 5.0)] {
            let sum: f64 = (-60..=60).map(|d| (d * d) as f64 * free_occupation(d, 0, delta, t)).sum();
            assert!((sum - free_msd(delta, t)).abs() < 1e-8);
        }
    }

    #[test]
    fn cache_is_bounded() {
        let cache = PropagatorCache::new(3);
        let s = spec30();
        for k in 0..5 {
            cache.get(&s, k as f64 * 0.1).unwrap();
        }
        assert_eq!(cache.len(), 3);
        let a = cache.get(&s, 0.4).unwrap();
        let b = cache.get(&s, 0.4).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
