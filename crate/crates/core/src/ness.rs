//! Direct steady-state solvers: discrete Lyapunov for ARC cycles, continuous
//! Lyapunov for continuous relaxation, and the reduced system-only problem
//! of periodic refresh.

use std::sync::Arc;

use ndarray::{s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::arc::{cycle_map, tau_c_from_radius, ArcParams, CycleMap, Propagator, Relaxation};
use crate::error::{ArcError, Result};
use crate::linalg::{
    dagger, eigvalsh, hermiticity_error, hermitize, max_abs, norm_one, Eigen, C64, ZERO,
};
use crate::model::SingleParticleHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    EigenTransform,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Eigenvector condition number above which the fixed point is used.
    pub condition_limit: f64,
    /// Smallest admissible `|1 − λ_i λ̄_j|` (or `|a_i + ā_j|`).
    pub denominator_floor: f64,
    /// Max-norm residual accepted from the direct solve.
    pub tolerance: f64,
    pub max_doublings: usize,
    /// Compute the spectrum and Hermiticity of every solution.
    pub check_physicality: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            condition_limit: 1e10,
            denominator_floor: 1e-14,
            tolerance: 1e-8,
            max_doublings: 64,
            check_physicality: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    pub corr: Array2<C64>,
    pub residual: f64,
    pub method: Method,
}

fn diagonal_of(p: &Array2<C64>) -> Option<Array1<C64>> {
    let n = p.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && p[[i, j]] != ZERO {
                return None;
            }
        }
    }
    Some(p.diag().to_owned())
}

/// `X P X†`, exploiting a diagonal `P`.
fn congruence(x: &Array2<C64>, p: &Array2<C64>) -> Array2<C64> {
    let xd = dagger(&x.view());
    match diagonal_of(p) {
        Some(d) => (x * &d.view().insert_axis(Axis(0))).dot(&xd),
        None => x.dot(p).dot(&xd),
    }
}

/// `max |M C M† + P − C|`.
pub fn discrete_residual(m: &Array2<C64>, p: &Array2<C64>, c: &Array2<C64>) -> f64 {
    let r = m.dot(c).dot(&dagger(&m.view())) + p - c;
    max_abs(&r)
}

/// `max |A C + C A† + Q|`.
pub fn continuous_residual(a: &Array2<C64>, q: &Array2<C64>, c: &Array2<C64>) -> f64 {
    let ac = a.dot(c);
    let r = &ac + &dagger(&ac.view()) + q;
    max_abs(&r)
}

fn check_square(m: &Array2<C64>, p: &Array2<C64>) -> Result<()> {
    let n = m.nrows();
    for d in [m.ncols(), p.nrows(), p.ncols()] {
        if d != n {
            return Err(ArcError::DimensionMismatch { expected: n, found: d });
        }
    }
    Ok(())
}

/// Solve `C = M C M† + P`.
pub fn solve_discrete(m: &Array2<C64>, p: &Array2<C64>, opts: &SolverOptions) -> Result<LyapunovSolution> {
    check_square(m, p)?;
    let eigen = Eigen::new(m)?;
    solve_discrete_with(&eigen, m, p, opts)
}

/// As [`solve_discrete`], reusing an eigendecomposition of `M`.
pub fn solve_discrete_with(
    eigen: &Eigen,
    m: &Array2<C64>,
    p: &Array2<C64>,
    opts: &SolverOptions,
) -> Result<LyapunovSolution> {
    check_square(m, p)?;
    let radius = eigen.spectral_radius();
    if radius >= 1.0 - 1e-12 {
        return Err(ArcError::NoUniqueNess(radius));
    }
    if let Some(sol) = discrete_eigen_transform(eigen, m, p, opts) {
        return Ok(sol);
    }
    log::debug!("discrete Lyapunov: falling back to doubling (condition {:.3e})", eigen.condition);
    doubling(m, p, opts)
}

fn discrete_eigen_transform(
    eigen: &Eigen,
    m: &Array2<C64>,
    p: &Array2<C64>,
    opts: &SolverOptions,
) -> Option<LyapunovSolution> {
    if !(eigen.condition <= opts.condition_limit) {
        return None;
    }
    let lam = &eigen.values;
    let n = lam.len();
    let mut cp = congruence(&eigen.inverse, p);
    for i in 0..n {
        for j in 0..n {
            let d = C64::new(1.0, 0.0) - lam[i] * lam[j].conj();
            if d.norm() < opts.denominator_floor {
                return None;
            }
            cp[[i, j]] /= d;
        }
    }
    let mut c = eigen.vectors.dot(&cp).dot(&dagger(&eigen.vectors.view()));
    hermitize(&mut c);
    let residual = discrete_residual(m, p, &c);
    (residual <= opts.tolerance).then_some(LyapunovSolution { corr: c, residual, method: Method::EigenTransform })
}

/// Smith doubling: `C ← C + A C A†`, `A ← A²`, starting from `C = P`,
/// `A = M`; after `k` steps `C` sums the first `2^k` terms of the series.
pub fn doubling(m: &Array2<C64>, p: &Array2<C64>, opts: &SolverOptions) -> Result<LyapunovSolution> {
    check_square(m, p)?;
    let mut c = p.clone();
    let mut a = m.clone();
    for _ in 0..opts.max_doublings {
        let inc = a.dot(&c).dot(&dagger(&a.view()));
        let size = max_abs(&inc);
        c = c + inc;
        if size <= 1e-17 * max_abs(&c).max(1.0) {
            break;
        }
        a = a.dot(&a);
        if !a.iter().all(|z| z.is_finite()) {
            return Err(ArcError::NoUniqueNess(f64::INFINITY));
        }
    }
    hermitize(&mut c);
    let residual = discrete_residual(m, p, &c);
    if residual > opts.tolerance {
        return Err(ArcError::NotConverged { residual });
    }
    Ok(LyapunovSolution { corr: c, residual, method: Method::FixedPoint })
}

/// Solve `A C + C A† + Q = 0` for a stable `A`.
pub fn solve_continuous(a: &Array2<C64>, q: &Array2<C64>, opts: &SolverOptions) -> Result<LyapunovSolution> {
    check_square(a, q)?;
    let eigen = Eigen::new(a)?;
    solve_continuous_with(&eigen, a, q, opts)
}

pub fn solve_continuous_with(
    eigen: &Eigen,
    a: &Array2<C64>,
    q: &Array2<C64>,
    opts: &SolverOptions,
) -> Result<LyapunovSolution> {
    let gap = max_real_part(&eigen.values);
    if gap >= 0.0 {
        return Err(ArcError::NoUniqueNess(gap.exp()));
    }
    if eigen.condition <= opts.condition_limit {
        let lam = &eigen.values;
        let n = lam.len();
        let mut cp = congruence(&eigen.inverse, q);
        let mut ok = true;
        'outer: for i in 0..n {
            for j in 0..n {
                let d = lam[i] + lam[j].conj();
                if d.norm() < opts.denominator_floor {
                    ok = false;
                    break 'outer;
                }
                cp[[i, j]] /= -d;
            }
        }
        if ok {
            let mut c = eigen.vectors.dot(&cp).dot(&dagger(&eigen.vectors.view()));
            hermitize(&mut c);
            let residual = continuous_residual(a, q, &c);
            if residual <= opts.tolerance {
                return Ok(LyapunovSolution { corr: c, residual, method: Method::EigenTransform });
            }
        }
    }
    log::debug!("continuous Lyapunov: falling back to Cayley doubling");
    cayley_doubling(a, q, eigen, opts)
}

fn max_real_part(values: &Array1<C64>) -> f64 {
    values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Map the continuous problem onto a discrete one with the Cayley transform
/// `M = (sI + A)(sI − A)⁻¹`, `P = 2s (sI − A)⁻¹ Q (sI − A)⁻†`.
fn cayley_doubling(a: &Array2<C64>, q: &Array2<C64>, eigen: &Eigen, opts: &SolverOptions) -> Result<LyapunovSolution> {
    use ndarray_linalg::Inverse;
    let n = a.nrows();
    let slow = eigen.values.iter().map(|z| -z.re).fold(f64::INFINITY, f64::min);
    let fast = norm_one(a);
    let shift = if slow.is_finite() && slow > 0.0 { (slow * fast).sqrt() } else { fast };
    let mut minus = a.mapv(|z| -z);
    let mut plus = a.clone();
    for i in 0..n {
        minus[[i, i]] += shift;
        plus[[i, i]] += shift;
    }
    let inv = minus.inv()?;
    let m = plus.dot(&inv);
    let p = congruence(&inv, q) * C64::new(2.0 * shift, 0.0);
    let mut sol = doubling(&m, &p, opts)?;
    sol.residual = continuous_residual(a, q, &sol.corr);
    if sol.residual > opts.tolerance * (1.0 + norm_one(a)) {
        return Err(ArcError::NotConverged { residual: sol.residual });
    }
    Ok(sol)
}

/// Generator of continuous relaxation, `Ċ = A C + C A† + Q` with
/// `A = −iH̄ − (γ/2) δ_{m∈LR}` and `Q = γ f δ_{m∈LR}`.
#[derive(Debug, Clone)]
pub struct CrGenerator {
    pub gamma: f64,
    pub a: Array2<C64>,
    pub q: Array2<C64>,
    pub eigen: Eigen,
}

impl CrGenerator {
    pub fn new(h: &SingleParticleHamiltonian, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(ArcError::InvalidParameter(format!("relaxation rate must be positive, got {gamma}")));
        }
        let n = h.dim();
        let mask = h.reservoir_mask();
        let mut a = h.matrix.mapv(|z| z * C64::new(0.0, -1.0));
        let mut q = Array2::from_elem((n, n), ZERO);
        for i in 0..n {
            a[[i, i]] -= 0.5 * gamma * mask[i];
            q[[i, i]] = C64::new(gamma * mask[i] * h.occupations[i], 0.0);
        }
        let eigen = Eigen::new(&a)?;
        Ok(CrGenerator { gamma, a, q, eigen })
    }

    /// Slowest amplitude decay rate `−max Re a_i`.
    pub fn gap(&self) -> f64 {
        -max_real_part(&self.eigen.values)
    }

    /// `1/(−max Re a_i)`, the continuous counterpart of `τ/(−ln|m₀|)`.
    pub fn convergence_time(&self) -> Result<f64> {
        let g = self.gap();
        if g <= 0.0 {
            return Err(ArcError::NoUniqueNess(1.0));
        }
        Ok(1.0 / g)
    }

    pub fn ness(&self, opts: &SolverOptions) -> Result<LyapunovSolution> {
        solve_continuous_with(&self.eigen, &self.a, &self.q, opts)
    }

    /// `C(t) = C∞ + e^{At}(C₀ − C∞)e^{A†t}` at each requested time.
    pub fn trajectory(&self, c0: &Array2<C64>, c_inf: &Array2<C64>, times: &[f64]) -> Vec<Array2<C64>> {
        let v = &self.eigen.vectors;
        let vd = dagger(&v.view());
        let delta = congruence(&self.eigen.inverse, &(c0 - c_inf));
        let lam = &self.eigen.values;
        times
            .iter()
            .map(|&t| {
                let e = lam.mapv(|l| (l * t).exp());
                let mut d = delta.clone();
                for ((i, j), x) in d.indexed_iter_mut() {
                    *x *= e[i] * e[j].conj();
                }
                let mut c = v.dot(&d).dot(&vd) + c_inf;
                hermitize(&mut c);
                c
            })
            .collect()
    }
}

pub fn solve_continuous_cr(h: &SingleParticleHamiltonian, gamma: f64, opts: &SolverOptions) -> Result<LyapunovSolution> {
    CrGenerator::new(h, gamma)?.ness(opts)
}

/// `τ/(−ln|m₀|)` for a cycle map.
pub fn convergence_time(map: &CycleMap) -> Result<f64> {
    tau_c_from_radius(map.params.tau, map.spectral_radius)
}

/// Exact periodic-refresh fixed point. The reservoirs are reset every
/// cycle, so only the system block is unknown:
/// `C_SS = U_SS C_SS U_SS† + U_SR F U_SR†`.
#[derive(Debug, Clone)]
pub struct RefreshSolution {
    pub system: Array2<C64>,
    /// Rows of `e^{−iτH̄}` belonging to the system.
    pub system_rows: Array2<C64>,
    pub spectral_radius: f64,
    pub tau_c: f64,
    pub residual: f64,
    pub method: Method,
}

pub fn solve_periodic_refresh(
    h: &SingleParticleHamiltonian,
    propagator: &Propagator,
    tau: f64,
    opts: &SolverOptions,
) -> Result<RefreshSolution> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(ArcError::InvalidParameter(format!("cycle time must be positive, got {tau}")));
    }
    let sys: Vec<usize> = h.system.clone().collect();
    let rows = propagator.rows(tau, &sys);
    let u_ss = rows.select(Axis(1), &sys);
    let res = h.reservoir_indices();
    let u_sr = rows.select(Axis(1), &res);
    let f: Array1<C64> = res.iter().map(|&k| C64::new(h.occupations[k], 0.0)).collect();
    let p = (&u_sr * &f.view().insert_axis(Axis(0))).dot(&dagger(&u_sr.view()));
    let eigen = Eigen::new(&u_ss)?;
    let radius = eigen.spectral_radius();
    let tau_c = tau_c_from_radius(tau, radius)?;
    let sol = solve_discrete_with(&eigen, &u_ss, &p, opts)?;
    Ok(RefreshSolution {
        system: sol.corr,
        system_rows: rows,
        spectral_radius: radius,
        tau_c,
        residual: sol.residual,
        method: sol.method,
    })
}

/// Which relaxation protocol produced a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Protocol {
    /// `τ → 0` at fixed `γ`.
    Continuous { gamma: f64 },
    /// A finite cycle; `Relaxation::Full` is periodic refresh.
    Cycle(ArcParams),
}

#[derive(Debug, Clone)]
pub enum NessState {
    /// Full correlation matrix at the start of a cycle (or the CR state).
    Dense(Array2<C64>),
    /// Periodic refresh: reservoirs at equilibrium, no cross correlations.
    Refreshed(Array2<C64>),
}

/// A steady state plus what is needed to measure it. For cycle protocols
/// observables refer to the state right before dissipation.
#[derive(Debug, Clone)]
pub struct Ness {
    pub protocol: Protocol,
    pub state: NessState,
    /// Columns of the measured state at the system sites (`N × N_S`).
    pub measured_columns: Array2<C64>,
    pub unitary: Option<Arc<Array2<C64>>>,
    pub residual: f64,
    pub method: Method,
    /// `|m₀|` for cycles; `None` for continuous relaxation.
    pub spectral_radius: Option<f64>,
    pub tau_c: f64,
    /// Smallest and largest eigenvalue of the state (NaN when unchecked).
    pub spectrum: (f64, f64),
    pub hermiticity: f64,
}

impl Ness {
    pub fn is_physical(&self, tol: f64) -> bool {
        self.spectrum.0 >= -tol && self.spectrum.1 <= 1.0 + tol
    }

    /// System block of the measured state.
    pub fn system_block(&self, h: &SingleParticleHamiltonian) -> Array2<C64> {
        self.measured_columns.slice(s![h.system.clone(), ..]).to_owned()
    }

    /// The full measured state: `U C U†` for cycles, `C` for continuous
    /// relaxation.
    pub fn measured_state(&self, h: &SingleParticleHamiltonian, propagator: &Propagator) -> Array2<C64> {
        let mut out = match (&self.state, self.protocol) {
            (NessState::Dense(c), Protocol::Continuous { .. }) => c.clone(),
            (NessState::Dense(c), Protocol::Cycle(p)) => {
                let u = self.unitary.clone().unwrap_or_else(|| propagator.unitary(p.tau));
                u.dot(c).dot(&dagger(&u.view()))
            }
            (NessState::Refreshed(css), Protocol::Cycle(p)) => {
                let c = refreshed_dense(h, css);
                let x = propagator.apply(p.tau, &c);
                propagator.apply(p.tau, &dagger(&x.view()))
            }
            (NessState::Refreshed(css), Protocol::Continuous { .. }) => refreshed_dense(h, css),
        };
        hermitize(&mut out);
        out
    }
}

fn refreshed_dense(h: &SingleParticleHamiltonian, css: &Array2<C64>) -> Array2<C64> {
    let mut c = Array2::from_elem((h.dim(), h.dim()), ZERO);
    for k in h.reservoir_indices() {
        c[[k, k]] = C64::new(h.occupations[k], 0.0);
    }
    c.slice_mut(s![h.system.clone(), h.system.clone()]).assign(css);
    c
}

fn spectrum_of(c: &Array2<C64>) -> Result<(f64, f64)> {
    let ev = eigvalsh(c)?;
    Ok((ev[0], ev[ev.len() - 1]))
}

/// Solve for the steady state of any protocol.
pub fn solve_ness(
    h: &SingleParticleHamiltonian,
    propagator: &Propagator,
    protocol: Protocol,
    opts: &SolverOptions,
) -> Result<Ness> {
    let sys: Vec<usize> = h.system.clone().collect();
    let nan = (f64::NAN, f64::NAN);
    match protocol {
        Protocol::Continuous { gamma } => {
            let gen = CrGenerator::new(h, gamma)?;
            let sol = gen.ness(opts)?;
            let (spectrum, hermiticity) = if opts.check_physicality {
                (spectrum_of(&sol.corr)?, hermiticity_error(&sol.corr))
            } else {
                (nan, 0.0)
            };
            Ok(Ness {
                protocol,
                measured_columns: sol.corr.select(Axis(1), &sys),
                state: NessState::Dense(sol.corr),
                unitary: None,
                residual: sol.residual,
                method: sol.method,
                spectral_radius: None,
                tau_c: gen.convergence_time()?,
                spectrum,
                hermiticity,
            })
        }
        Protocol::Cycle(params) if params.relaxation == Relaxation::Full => {
            let sol = solve_periodic_refresh(h, propagator, params.tau, opts)?;
            // Measured columns U C U†[:, S] = U (C · rows_S(U)†).
            let rows_d = dagger(&sol.system_rows.view());
            let mut x = Array2::from_elem((h.dim(), sys.len()), ZERO);
            for k in h.reservoir_indices() {
                let f = h.occupations[k];
                x.row_mut(k).assign(&rows_d.row(k).mapv(|z| z * f));
            }
            let s0 = h.system.start;
            let block = sol.system.dot(&rows_d.slice(s![h.system.clone(), ..]));
            x.slice_mut(s![s0..s0 + sys.len(), ..]).assign(&block);
            let measured_columns = propagator.apply(params.tau, &x);
            let (spectrum, hermiticity) = if opts.check_physicality {
                let (lo, hi) = spectrum_of(&sol.system)?;
                let f_lo = h.reservoir_indices().iter().map(|&k| h.occupations[k]).fold(lo, f64::min);
                let f_hi = h.reservoir_indices().iter().map(|&k| h.occupations[k]).fold(hi, f64::max);
                ((f_lo, f_hi), hermiticity_error(&sol.system))
            } else {
                (nan, 0.0)
            };
            Ok(Ness {
                protocol,
                state: NessState::Refreshed(sol.system),
                measured_columns,
                unitary: None,
                residual: sol.residual,
                method: sol.method,
                spectral_radius: Some(sol.spectral_radius),
                tau_c: sol.tau_c,
                spectrum,
                hermiticity,
            })
        }
        Protocol::Cycle(params) => {
            let map = cycle_map(h, propagator, params)?;
            let p = map.p_matrix();
            let sol = match &map.eigen {
                Some(e) => solve_discrete_with(e, &map.m, &p, opts)?,
                None => solve_discrete(&map.m, &p, opts)?,
            };
            let rows = map.unitary.select(Axis(0), &sys);
            let measured_columns = map.unitary.dot(&sol.corr.dot(&dagger(&rows.view())));
            let (spectrum, hermiticity) = if opts.check_physicality {
                (spectrum_of(&sol.corr)?, hermiticity_error(&sol.corr))
            } else {
                (nan, 0.0)
            };
            Ok(Ness {
                protocol,
                state: NessState::Dense(sol.corr),
                measured_columns,
                unitary: Some(Arc::clone(&map.unitary)),
                residual: sol.residual,
                method: sol.method,
                spectral_radius: Some(map.spectral_radius),
                tau_c: map.tau_c,
                spectrum,
                hermiticity,
            })
        }
    }
}
