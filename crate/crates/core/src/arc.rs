//! One ARC cycle on correlation matrices: coherent evolution for `τ`
//! followed by partial relaxation of every reservoir mode toward its
//! isolated equilibrium, `C ← M C M† + P` with `M = G e^{−iτH̄}`.

use std::sync::{Arc, Mutex};

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};
use crate::linalg::{dagger, eigh, eigh_real, hermitize, real_if_real, Eigen, C64, ZERO};
use crate::model::SingleParticleHamiltonian;

/// Total relaxation `γτ` applied per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Relaxation {
    Finite(f64),
    /// `γτ = ∞`: reservoirs are reset exactly (periodic refresh).
    Full,
}

impl Relaxation {
    pub fn gamma_tau(&self) -> f64 {
        match *self {
            Relaxation::Finite(s) => s,
            Relaxation::Full => f64::INFINITY,
        }
    }

    /// Amplitude factor `e^{−γτ/2}` kept by a reservoir mode.
    pub fn retained(&self) -> f64 {
        match *self {
            Relaxation::Finite(s) => (-0.5 * s).exp(),
            Relaxation::Full => 0.0,
        }
    }

    /// Fraction `1 − e^{−γτ}` of the equilibrium occupation refilled.
    pub fn refilled(&self) -> f64 {
        match *self {
            Relaxation::Finite(s) => -(-s).exp_m1(),
            Relaxation::Full => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcParams {
    pub tau: f64,
    pub relaxation: Relaxation,
}

impl ArcParams {
    pub fn new(gamma: f64, tau: f64) -> Self {
        ArcParams { tau, relaxation: Relaxation::Finite(gamma * tau) }
    }

    pub fn periodic_refresh(tau: f64) -> Self {
        ArcParams { tau, relaxation: Relaxation::Full }
    }

    /// Inverse of the action parametrization: with `s = γτ`,
    /// `τ = τ̃ s/√(s² + 4)` and `γ = s/τ`.
    pub fn from_action(gamma_tau: f64, action: f64) -> Result<Self> {
        if !(action > 0.0) {
            return Err(ArcError::InvalidParameter(format!("action must be positive, got {action}")));
        }
        if gamma_tau == f64::INFINITY {
            return Ok(ArcParams::periodic_refresh(action));
        }
        if !(gamma_tau > 0.0) || gamma_tau.is_nan() {
            return Err(ArcError::InvalidParameter(format!(
                "total relaxation must be positive, got {gamma_tau}"
            )));
        }
        let tau = action * gamma_tau / gamma_tau.hypot(2.0);
        Ok(ArcParams { tau, relaxation: Relaxation::Finite(gamma_tau) })
    }

    pub fn gamma_tau(&self) -> f64 {
        self.relaxation.gamma_tau()
    }

    pub fn gamma(&self) -> f64 {
        match self.relaxation {
            Relaxation::Finite(s) => s / self.tau,
            Relaxation::Full => f64::INFINITY,
        }
    }

    /// `τ̃ = |τ − 2i/γ| = √(τ² + 4/γ²)`.
    pub fn action(&self) -> f64 {
        match self.relaxation {
            Relaxation::Finite(_) => self.tau.hypot(2.0 / self.gamma()),
            Relaxation::Full => self.tau,
        }
    }
}

#[derive(Debug, Clone)]
enum Basis {
    Real(Array2<f64>),
    Complex(Array2<C64>),
}

/// `e^{−itH̄}` built from one Hermitian eigendecomposition of `H̄`.
///
/// Real Hamiltonians (the usual case) keep a real eigenbasis, so products
/// with it are real GEMMs.
#[derive(Debug)]
pub struct Propagator {
    values: Array1<f64>,
    basis: Basis,
    cache: Mutex<Vec<(u64, Arc<Array2<C64>>)>>,
}

const CACHE_SLOTS: usize = 4;

/// `a · x` for real `a` and complex `x`.
pub(crate) fn real_dot(a: &Array2<f64>, x: &Array2<C64>) -> Array2<C64> {
    let re = a.dot(&x.mapv(|z| z.re));
    let im = a.dot(&x.mapv(|z| z.im));
    let mut out = Array2::from_elem(re.raw_dim(), ZERO);
    ndarray::Zip::from(&mut out).and(&re).and(&im).for_each(|o, &r, &i| *o = C64::new(r, i));
    out
}

impl Propagator {
    pub fn new(h: &Array2<C64>) -> Result<Self> {
        let (values, basis) = match real_if_real(h) {
            Some(hr) => {
                let (w, v) = eigh_real(&hr)?;
                (w, Basis::Real(v))
            }
            None => {
                let (w, v) = eigh(h)?;
                (w, Basis::Complex(v))
            }
        };
        Ok(Propagator { values, basis, cache: Mutex::new(Vec::new()) })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.values
    }

    fn phases(&self, t: f64) -> Array1<C64> {
        self.values.mapv(|e| C64::from_polar(1.0, -e * t))
    }

    /// Dense `e^{−itH̄}`; the last few distinct `t` are cached.
    pub fn unitary(&self, t: f64) -> Arc<Array2<C64>> {
        let key = t.to_bits();
        if let Some((_, u)) = self.cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Arc::clone(u);
        }
        let u = Arc::new(self.build(t));
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_SLOTS {
            cache.remove(0);
        }
        cache.push((key, Arc::clone(&u)));
        u
    }

    fn build(&self, t: f64) -> Array2<C64> {
        match &self.basis {
            Basis::Real(w) => {
                let c = self.values.mapv(|e| (e * t).cos());
                let s = self.values.mapv(|e| (e * t).sin());
                let re = (w * &c.view().insert_axis(Axis(0))).dot(&w.t());
                let im = (w * &s.view().insert_axis(Axis(0))).dot(&w.t());
                let mut out = Array2::from_elem(re.raw_dim(), ZERO);
                ndarray::Zip::from(&mut out)
                    .and(&re)
                    .and(&im)
                    .for_each(|o, &r, &i| *o = C64::new(r, -i));
                out
            }
            Basis::Complex(v) => {
                let ph = self.phases(t);
                (v * &ph.view().insert_axis(Axis(0))).dot(&dagger(&v.view()))
            }
        }
    }

    /// `e^{−itH̄} x` without forming the dense unitary.
    pub fn apply(&self, t: f64, x: &Array2<C64>) -> Array2<C64> {
        let ph = self.phases(t).insert_axis(Axis(1));
        match &self.basis {
            Basis::Real(w) => {
                let y = real_dot(&w.t().to_owned(), x) * &ph;
                real_dot(w, &y)
            }
            Basis::Complex(v) => {
                let y = dagger(&v.view()).dot(x) * &ph;
                v.dot(&y)
            }
        }
    }

    /// Rows `rows` of `e^{−itH̄}`.
    pub fn rows(&self, t: f64, rows: &[usize]) -> Array2<C64> {
        let ph = self.phases(t).insert_axis(Axis(0));
        match &self.basis {
            Basis::Real(w) => {
                let wr = w.select(Axis(0), rows).mapv(|x| C64::new(x, 0.0)) * &ph;
                real_dot(w, &wr.t().to_owned()).reversed_axes()
            }
            Basis::Complex(v) => {
                let vr = v.select(Axis(0), rows) * &ph;
                vr.dot(&dagger(&v.view()))
            }
        }
    }
}

/// `U C U†` with `U = e^{−iτH̄}`.
pub fn unitary_step(c: &Array2<C64>, propagator: &Propagator, tau: f64) -> Array2<C64> {
    if tau == 0.0 {
        return c.clone();
    }
    let u = propagator.unitary(tau);
    let mut out = u.dot(c).dot(&dagger(&u.view()));
    hermitize(&mut out);
    out
}

/// Diagonals of `G` and `P`: `G = e^{−γτ/2}`, `P = (1 − e^{−γτ}) f` on
/// reservoir modes; `G = 1`, `P = 0` on the system.
pub fn dissipation_matrices(h: &SingleParticleHamiltonian, relaxation: Relaxation) -> (Array1<f64>, Array1<f64>) {
    let n = h.dim();
    let mut g = Array1::ones(n);
    let mut p = Array1::zeros(n);
    let keep = relaxation.retained();
    let fill = relaxation.refilled();
    for m in h.modes.iter().filter(|m| m.is_reservoir()) {
        g[m.id] = keep;
        p[m.id] = fill * h.occupations[m.id];
    }
    (g, p)
}

/// Reset every reservoir mode to its isolated equilibrium and erase
/// reservoir–system and reservoir–reservoir coherences.
pub fn refresh(c: &Array2<C64>, h: &SingleParticleHamiltonian) -> Array2<C64> {
    let mut out = c.clone();
    let res = h.reservoir_mask();
    let n = h.dim();
    for i in 0..n {
        for j in 0..n {
            if res[i] > 0.0 || res[j] > 0.0 {
                out[[i, j]] = if i == j { C64::new(h.occupations[i], 0.0) } else { ZERO };
            }
        }
    }
    out
}

/// The affine map of one ARC cycle with its spectral data.
#[derive(Debug, Clone)]
pub struct CycleMap {
    pub params: ArcParams,
    pub m: Array2<C64>,
    pub g: Array1<f64>,
    pub p: Array1<f64>,
    pub unitary: Arc<Array2<C64>>,
    /// `|m₀|`, largest eigenvalue magnitude of `M`.
    pub spectral_radius: f64,
    pub tau_c: f64,
    pub eigen: Option<Eigen>,
}

impl CycleMap {
    pub fn apply(&self, c: &Array2<C64>) -> Array2<C64> {
        let pre = self.unitary.dot(c).dot(&dagger(&self.unitary.view()));
        self.dissipate(&pre)
    }

    /// `G C G + P` applied to an already evolved state.
    pub fn dissipate(&self, pre: &Array2<C64>) -> Array2<C64> {
        let mut out = pre.clone();
        let n = out.nrows();
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] *= self.g[i] * self.g[j];
            }
            out[[i, i]] += self.p[i];
        }
        hermitize(&mut out);
        out
    }

    pub fn p_matrix(&self) -> Array2<C64> {
        crate::linalg::diag_matrix(&self.p)
    }
}

/// `τ/(−ln|m₀|)`; zero when the whole state is replaced every cycle.
pub fn tau_c_from_radius(tau: f64, radius: f64) -> Result<f64> {
    if radius >= 1.0 {
        return Err(ArcError::NoUniqueNess(radius));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    Ok(tau / -radius.ln())
}

pub fn cycle_map(h: &SingleParticleHamiltonian, propagator: &Propagator, params: ArcParams) -> Result<CycleMap> {
    if !(params.tau > 0.0) || !params.tau.is_finite() {
        return Err(ArcError::InvalidParameter(format!("cycle time must be positive, got {}", params.tau)));
    }
    if params.relaxation == Relaxation::Finite(0.0) {
        return Err(ArcError::NoUniqueNess(1.0));
    }
    if let Relaxation::Finite(s) = params.relaxation {
        if !(s > 0.0) {
            return Err(ArcError::InvalidParameter(format!("total relaxation must be positive, got {s}")));
        }
    }
    let (g, p) = dissipation_matrices(h, params.relaxation);
    let unitary = propagator.unitary(params.tau);
    let m = &*unitary * &g.view().insert_axis(Axis(1));
    let (radius, eigen) = match params.relaxation {
        Relaxation::Full => {
            // Reservoir rows of M vanish, so its nonzero spectrum is that of
            // the system block of the unitary.
            let s = h.system.clone();
            let block = unitary.slice(ndarray::s![s.clone(), s]).to_owned();
            (Eigen::new(&block)?.spectral_radius(), None)
        }
        Relaxation::Finite(_) => {
            let e = Eigen::new(&m)?;
            (e.spectral_radius(), Some(e))
        }
    };
    let tau_c = tau_c_from_radius(params.tau, radius)?;
    Ok(CycleMap { params, m, g, p, unitary, spectral_radius: radius, tau_c, eigen })
}

/// Where in the cycle an observed state sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// After dissipation, at the start of a cycle (stroboscopic time `pτ`).
    Start,
    /// Inside the coherent step; only the unitary has acted.
    Within,
    /// Right before dissipation, time `(p+1)τ`.
    BeforeDissipation,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub cycle: usize,
    pub time: f64,
    pub phase: Phase,
    pub corr: Array2<C64>,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    /// Stroboscopic states `C(pτ)` for `p = 0..=cycles`.
    pub stroboscopic: Vec<Sample>,
    /// Optional intra-cycle states at `pτ + τ′`.
    pub intra: Vec<Sample>,
}

/// Iterate the cycle map, handing every state to `observe`. Time advances
/// only with the coherent step; `intra` lists offsets `τ′ ∈ (0, τ)` at
/// which the partially evolved state is also observed.
pub fn evolve_with<F>(
    c0: &Array2<C64>,
    map: &CycleMap,
    propagator: &Propagator,
    cycles: usize,
    intra: &[f64],
    mut observe: F,
) -> Array2<C64>
where
    F: FnMut(usize, f64, Phase, &Array2<C64>),
{
    let tau = map.params.tau;
    let mut c = c0.clone();
    observe(0, 0.0, Phase::Start, &c);
    for p in 0..cycles {
        let t0 = p as f64 * tau;
        for &dt in intra.iter().filter(|&&dt| dt > 0.0 && dt < tau) {
            observe(p, t0 + dt, Phase::Within, &unitary_step(&c, propagator, dt));
        }
        let mut pre = map.unitary.dot(&c).dot(&dagger(&map.unitary.view()));
        hermitize(&mut pre);
        observe(p, t0 + tau, Phase::BeforeDissipation, &pre);
        c = map.dissipate(&pre);
        observe(p + 1, t0 + tau, Phase::Start, &c);
    }
    c
}

pub fn evolve(
    c0: &Array2<C64>,
    map: &CycleMap,
    propagator: &Propagator,
    cycles: usize,
    intra: &[f64],
) -> Trajectory {
    let mut traj = Trajectory::default();
    evolve_with(c0, map, propagator, cycles, intra, |cycle, time, phase, c| {
        let sample = Sample { cycle, time, phase, corr: c.clone() };
        match phase {
            Phase::Start => traj.stroboscopic.push(sample),
            Phase::Within => traj.intra.push(sample),
            Phase::BeforeDissipation => {}
        }
    });
    traj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, hermiticity_error, max_abs_diff};
    use crate::model::Junction;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> (SingleParticleHamiltonian, Propagator) {
        let h = Junction::resonant_level(12, 1.0 / 40.0, 0.5).assemble().unwrap();
        let p = Propagator::new(&h.matrix).unwrap();
        (h, p)
    }

    pub(crate) fn random_state(n: usize, rng: &mut impl Rng) -> Array2<C64> {
        // U diag(ε) U† with U from the eigenvectors of a random Hermitian matrix.
        let mut a = Array2::from_shape_fn((n, n), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        hermitize(&mut a);
        let (_, u) = eigh(&a).unwrap();
        let eps: Array1<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut c = (&u * &eps.view().insert_axis(Axis(0))).dot(&dagger(&u.view()));
        hermitize(&mut c);
        c
    }

    #[test]
    fn action_round_trip() {
        let p = ArcParams::from_action(2.0, 2f64.sqrt()).unwrap();
        assert_relative_eq!(p.tau, 1.0, max_relative = 1e-15);
        assert_relative_eq!(p.gamma(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(p.action(), 2f64.sqrt(), max_relative = 1e-15);
        let pr = ArcParams::from_action(f64::INFINITY, 5.0).unwrap();
        assert_eq!(pr.tau, 5.0);
        assert!(ArcParams::from_action(0.0, 1.0).is_err());
        assert!(ArcParams::from_action(-1.0, 1.0).is_err());
    }

    #[test]
    fn dissipation_values() {
        let (h, _) = small();
        let (g, p) = dissipation_matrices(&h, Relaxation::Finite(0.0));
        assert!(g.iter().all(|&x| x == 1.0));
        assert!(p.iter().all(|&x| x == 0.0));
        let (g, p) = dissipation_matrices(&h, Relaxation::Full);
        for m in &h.modes {
            if m.is_reservoir() {
                assert_eq!(g[m.id], 0.0);
                assert_eq!(p[m.id], h.occupations[m.id]);
            } else {
                assert_eq!((g[m.id], p[m.id]), (1.0, 0.0));
            }
        }
        let r = Relaxation::Finite(4f64.ln());
        assert_relative_eq!(r.retained(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.refilled() * 0.8, 0.6, max_relative = 1e-15);
    }

    #[test]
    fn unitary_step_properties() {
        let (h, prop) = small();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_state(h.dim(), &mut rng);
        assert_eq!(unitary_step(&c, &prop, 0.0), c);
        let out = unitary_step(&c, &prop, 3.7);
        let a = eigvalsh(&c).unwrap();
        let b = eigvalsh(&out).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-11);
        }
        let u = prop.unitary(3.7);
        let id = u.dot(&dagger(&u.view()));
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_and_rows_match_dense_unitary() {
        let (h, prop) = small();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_state(h.dim(), &mut rng).slice(ndarray::s![.., 0..4]).to_owned();
        let u = prop.unitary(2.3);
        assert!(max_abs_diff(&prop.apply(2.3, &x), &u.dot(&x)) < 1e-12);
        let rows = [12, 13, 14];
        let r = prop.rows(2.3, &rows);
        assert!(max_abs_diff(&r, &u.select(Axis(0), &rows)) < 1e-12);
        // Complex basis agrees with the real one.
        let mut hc = h.matrix.clone();
        hc[[0, 12]] = C64::new(hc[[0, 12]].re, 1e-3);
        hc[[12, 0]] = hc[[0, 12]].conj();
        let pc = Propagator::new(&hc).unwrap();
        let dense = pc.unitary(1.1);
        assert!(max_abs_diff(&pc.apply(1.1, &x), &dense.dot(&x)) < 1e-12);
        assert!(max_abs_diff(&pc.rows(1.1, &rows), &dense.select(Axis(0), &rows)) < 1e-12);
    }

    #[test]
    fn commuting_diagonal_state_is_stationary() {
        let j = Junction::resonant_level(4, 0.1, 0.5);
        let mut j0 = j.clone();
        j0.left.boundary_coupling = 0.0;
        j0.right.boundary_coupling = 0.0;
        j0.system = crate::model::SystemSpec::uniform_chain(3, 0.2, 0.0);
        let h = j0.assemble().unwrap();
        let prop = Propagator::new(&h.matrix).unwrap();
        let c = h.initial_correlation();
        assert!(max_abs_diff(&unitary_step(&c, &prop, 5.0), &c) < 1e-14);
    }

    #[test]
    fn cycle_map_rejects_zero_relaxation() {
        let (h, prop) = small();
        assert!(matches!(cycle_map(&h, &prop, ArcParams::new(0.0, 1.0)), Err(ArcError::NoUniqueNess(_))));
        assert!(cycle_map(&h, &prop, ArcParams::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn tau_c_arithmetic() {
        assert_relative_eq!(tau_c_from_radius(1.0, (-1f64).exp()).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(tau_c_from_radius(1.0, 0.0).unwrap(), 0.0);
        assert!(tau_c_from_radius(1.0, 1.0).is_err());
    }

    #[test]
    fn full_refresh_map_structure() {
        let (h, prop) = small();
        let map = cycle_map(&h, &prop, ArcParams::periodic_refresh(6.0)).unwrap();
        for m in h.reservoir_indices() {
            assert!(map.m.row(m).iter().all(|z| *z == ZERO));
        }
        assert!(map.spectral_radius <= 1.0);
        let e = Eigen::new(&map.m).unwrap();
        assert_relative_eq!(e.spectral_radius(), map.spectral_radius, max_relative = 1e-10);
    }

    #[test]
    fn refresh_behaviour() {
        let (h, prop) = small();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = random_state(h.dim(), &mut rng);
        let r = refresh(&c, &h);
        assert_eq!(refresh(&r, &h), r);
        let s = h.system.clone();
        assert_eq!(r.slice(ndarray::s![s.clone(), s.clone()]), c.slice(ndarray::s![s.clone(), s]));
        // Limit of the partial-relaxation path.
        let map = cycle_map(&h, &prop, ArcParams { tau: 1.0, relaxation: Relaxation::Finite(1e3) }).unwrap();
        let (g, p) = dissipation_matrices(&h, Relaxation::Finite(1e3));
        let mut via_map = c.clone();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                via_map[[i, j]] *= g[i] * g[j];
            }
            via_map[[i, i]] += p[i];
        }
        assert!(max_abs_diff(&via_map, &r) < 1e-10);
        assert!(map.spectral_radius < 1.0);
    }

    #[test]
    fn decoupled_mode_relaxes_geometrically() {
        let mut j = Junction::resonant_level(3, 0.2, 0.5);
        j.left.boundary_coupling = 0.0;
        j.right.boundary_coupling = 0.0;
        let h = j.assemble().unwrap();
        let prop = Propagator::new(&h.matrix).unwrap();
        let gt = 0.3;
        let map = cycle_map(&h, &prop, ArcParams { tau: 0.7, relaxation: Relaxation::Finite(gt) }).unwrap();
        let mut c0 = h.initial_correlation();
        c0[[0, 0]] = C64::new(0.9, 0.0);
        let f = h.occupations[0];
        let traj = evolve(&c0, &map, &prop, 6, &[]);
        for (p, s) in traj.stroboscopic.iter().enumerate() {
            let want = f + (0.9 - f) * (-gt * p as f64).exp();
            assert_relative_eq!(s.corr[[0, 0]].re, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn evolve_composes_and_stays_physical() {
        let (h, prop) = small();
        let map = cycle_map(&h, &prop, ArcParams::new(0.3, 2.0)).unwrap();
        let c0 = h.initial_correlation();
        let t = evolve(&c0, &map, &prop, 0, &[]);
        assert_eq!(t.stroboscopic.len(), 1);
        assert_eq!(t.stroboscopic[0].corr, c0);
        let a = evolve(&c0, &map, &prop, 7, &[0.5, 1.0]);
        let mid = &a.stroboscopic[3].corr;
        let b = evolve(mid, &map, &prop, 4, &[]);
        assert!(max_abs_diff(&a.stroboscopic[7].corr, &b.stroboscopic[4].corr) < 1e-13);
        assert_eq!(a.intra.len(), 14);
        // Second cycle, offset τ′ = 1.
        assert_relative_eq!(a.intra[3].time, 3.0, epsilon = 1e-12);
        for s in a.stroboscopic.iter().chain(&a.intra) {
            assert!(hermiticity_error(&s.corr) < 1e-12);
            let ev = eigvalsh(&s.corr).unwrap();
            assert!(ev[0] > -1e-9 && ev[ev.len() - 1] < 1.0 + 1e-9);
        }
    }
}
