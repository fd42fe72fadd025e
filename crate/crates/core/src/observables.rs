//! Physical readouts of a correlation matrix: interfacial currents, the
//! current error split, trace distance, operator-space entanglement entropy
//! and the cost estimate built from them.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};
use crate::linalg::{dagger, eigh, eigvalsh, hermiticity_error, C64, ZERO};
use crate::model::{Lead, MixedBasisOrder, SingleParticleHamiltonian};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interface {
    /// Between the left reservoir and the system.
    LS,
    /// Between the system and the right reservoir.
    SR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentReading {
    pub i_ls: f64,
    pub i_sr: f64,
    /// `(I_LS + I_SR)/2`.
    pub i: f64,
}

impl CurrentReading {
    pub fn new(i_ls: f64, i_sr: f64) -> Self {
        CurrentReading { i_ls, i_sr, i: 0.5 * (i_ls + i_sr) }
    }
}

/// Current through one interface from the columns `C[:, S]` of a state.
/// Positive values mean particles flowing `L → S → R` at both interfaces.
pub fn interface_current_from_columns(
    h: &SingleParticleHamiltonian,
    columns: &Array2<C64>,
    side: Interface,
) -> f64 {
    let s0 = h.system.start;
    let (lead, sign) = match side {
        Interface::LS => (Lead::Left, 2.0),
        Interface::SR => (Lead::Right, -2.0),
    };
    let total: f64 = h
        .couplings_to(lead)
        .map(|c| (c.value.conj() * columns[[c.mode, c.site - s0]]).im)
        .sum();
    sign * total
}

/// `I_LS = 2 Σ Im v_ik C_ki` (`k ∈ L`), and `I_SR` with `k ∈ R` and the
/// opposite sign, on a full correlation matrix.
pub fn interface_current(c: &Array2<C64>, h: &SingleParticleHamiltonian, side: Interface) -> f64 {
    let sys: Vec<usize> = h.system.clone().collect();
    interface_current_from_columns(h, &c.select(Axis(1), &sys), side)
}

pub fn currents_from_columns(h: &SingleParticleHamiltonian, columns: &Array2<C64>) -> CurrentReading {
    CurrentReading::new(
        interface_current_from_columns(h, columns, Interface::LS),
        interface_current_from_columns(h, columns, Interface::SR),
    )
}

pub fn currents(c: &Array2<C64>, h: &SingleParticleHamiltonian) -> CurrentReading {
    let sys: Vec<usize> = h.system.clone().collect();
    currents_from_columns(h, &c.select(Axis(1), &sys))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma_sq: f64,
    pub reference: f64,
    /// True when the errors are absolute because the reference vanishes.
    pub absolute: bool,
}

impl ErrorReport {
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }
}

/// `σ₁² = ((I − I°)/I°)²`, `σ₂² = ((I_LS − I_SR)/(2I°))²`.
pub fn current_error(reading: &CurrentReading, reference: f64) -> Result<ErrorReport> {
    if reference == 0.0 || !reference.is_finite() {
        return Err(ArcError::ZeroReference);
    }
    let s1 = ((reading.i - reference) / reference).powi(2);
    let s2 = ((reading.i_ls - reading.i_sr) / (2.0 * reference)).powi(2);
    Ok(ErrorReport { sigma1_sq: s1, sigma2_sq: s2, sigma_sq: s1 + s2, reference, absolute: false })
}

/// Unnormalized counterpart of [`current_error`] for a vanishing reference.
pub fn absolute_current_error(reading: &CurrentReading, reference: f64) -> ErrorReport {
    let s1 = (reading.i - reference).powi(2);
    let s2 = (0.5 * (reading.i_ls - reading.i_sr)).powi(2);
    ErrorReport { sigma1_sq: s1, sigma2_sq: s2, sigma_sq: s1 + s2, reference, absolute: true }
}

/// `½ Σ |eig(A − B)|` for Hermitian `A`, `B`.
pub fn trace_distance(a: &Array2<C64>, b: &Array2<C64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(ArcError::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    let ev = eigvalsh(&(a - b))?;
    Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
}

/// `−p log₂ p − (1−p) log₂(1−p)`, with vanishing terms below `1e-14`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 1e-14 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OseeReport {
    pub cut_position: usize,
    /// Entropy in bits.
    pub s_o: f64,
}

const EPS_CLAMP: f64 = 1e-14;

/// Eigenvalues must lie in `[−tol, 1 + tol]`.
pub fn check_physical(c: &Array2<C64>, tol: f64) -> Result<(f64, f64)> {
    let scale = 1.0_f64.max(crate::linalg::max_abs(c));
    if hermiticity_error(c) > 1e-10 * scale {
        return Err(ArcError::InvalidParameter("correlation matrix is not Hermitian".into()));
    }
    let ev = eigvalsh(c)?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo < -tol {
        return Err(ArcError::Unphysical(lo));
    }
    if hi > 1.0 + tol {
        return Err(ArcError::Unphysical(hi));
    }
    Ok((lo, hi))
}

/// Operator-space entanglement entropy of the vectorized Gaussian state
/// across the cut that keeps `order.permutation[..cut]` on one side.
pub fn osee(c: &Array2<C64>, order: &MixedBasisOrder, cut: usize) -> Result<OseeReport> {
    let n = c.nrows();
    if order.permutation.len() != n {
        return Err(ArcError::DimensionMismatch { expected: n, found: order.permutation.len() });
    }
    let cut = cut.min(n);
    if cut == 0 || cut == n {
        return Ok(OseeReport { cut_position: cut, s_o: 0.0 });
    }
    let (eps, u) = eigh(c)?;
    for &e in eps.iter() {
        if !(-1e-9..=1.0 + 1e-9).contains(&e) {
            return Err(ArcError::Unphysical(e));
        }
    }
    let eps = eps.mapv(|e| e.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP));
    let norm = eps.mapv(|e| ((1.0 - e).powi(2) + e * e).sqrt());
    let alpha: Array1<f64> = &eps / &norm;
    let beta: Array1<f64> = -(1.0 - &eps) / &norm;

    let ua = u.select(Axis(0), &order.permutation[..cut]);
    let uad = dagger(&ua.view());
    let weighted = |w: Array1<f64>| {
        let w = w.mapv(|x| C64::new(x, 0.0)).insert_axis(Axis(0));
        (&ua * &w).dot(&uad)
    };
    let b11 = weighted(&alpha * &alpha);
    let b12 = weighted(&alpha * &beta);
    let b22 = weighted(&beta * &beta);
    let mut gamma = Array2::from_elem((2 * cut, 2 * cut), ZERO);
    gamma.slice_mut(ndarray::s![..cut, ..cut]).assign(&b11);
    gamma.slice_mut(ndarray::s![..cut, cut..]).assign(&b12);
    gamma.slice_mut(ndarray::s![cut.., ..cut]).assign(&b12);
    gamma.slice_mut(ndarray::s![cut.., cut..]).assign(&b22);
    crate::linalg::hermitize(&mut gamma);
    let nu = eigvalsh(&gamma)?;
    let s_o = nu.iter().map(|&x| binary_entropy(x.clamp(0.0, 1.0))).sum();
    Ok(OseeReport { cut_position: cut, s_o })
}

/// `C ~ τ_c · N_W · 2^{3 S_O}`.
pub fn cost_estimate(tau_c: f64, n_modes: usize, s_o: f64) -> f64 {
    tau_c * n_modes as f64 * (3.0 * s_o).exp2()
}

/// `C^MPS ~ τ_c · N_W · D³`.
pub fn cost_estimate_mps(tau_c: f64, n_modes: usize, bond_dimension: f64) -> f64 {
    tau_c * n_modes as f64 * bond_dimension.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::Propagator;
    use crate::model::{mixed_basis_order, Junction};
    use crate::ness::{solve_ness, Protocol, SolverOptions};
    use approx::assert_relative_eq;

    #[test]
    fn real_or_diagonal_states_carry_no_current() {
        let h = Junction::resonant_level(6, 0.1, 0.5).assemble().unwrap();
        let c = h.initial_correlation();
        assert_eq!(currents(&c, &h).i, 0.0);
        let mut r = Array2::from_elem((h.dim(), h.dim()), C64::new(0.1, 0.0));
        r.diag_mut().fill(C64::new(0.5, 0.0));
        let reading = currents(&r, &h);
        assert_eq!((reading.i_ls, reading.i_sr), (0.0, 0.0));
    }

    #[test]
    fn error_arithmetic() {
        let r = current_error(&CurrentReading::new(1.0, 1.0), 1.0).unwrap();
        assert_eq!(r.sigma_sq, 0.0);
        let r = current_error(&CurrentReading::new(1.2, 0.8), 1.0).unwrap();
        assert_relative_eq!(r.sigma1_sq, 0.0, epsilon = 1e-30);
        assert_relative_eq!(r.sigma2_sq, 0.04, max_relative = 1e-14);
        assert_eq!(r.sigma_sq - r.sigma1_sq - r.sigma2_sq, 0.0);
        assert!(matches!(current_error(&CurrentReading::new(1.0, 1.0), 0.0), Err(ArcError::ZeroReference)));
        let a = absolute_current_error(&CurrentReading::new(0.1, -0.1), 0.0);
        assert!(a.absolute);
        assert_relative_eq!(a.sigma2_sq, 0.01, max_relative = 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let d = |v: [f64; 3]| Array2::from_diag(&Array1::from(v.map(|x| C64::new(x, 0.0)).to_vec()));
        let a = d([1.0, 0.0, 0.0]);
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert_relative_eq!(trace_distance(&a, &d([0.0, 1.0, 0.0])).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn cost_formulas() {
        assert_eq!(cost_estimate(2.0, 10, 0.0), 20.0);
        assert_relative_eq!(cost_estimate(2.0, 10, 1.5) / cost_estimate(2.0, 10, 0.5), 8.0, max_relative = 1e-14);
        assert_eq!(cost_estimate_mps(2.0, 10, 3.0), 540.0);
    }

    #[test]
    fn osee_trivial_states() {
        let h = Junction::resonant_level(8, 0.1, 0.5).assemble().unwrap();
        let order = mixed_basis_order(&h);
        let c = h.initial_correlation();
        assert!(osee(&c, &order, order.cut_position).unwrap().s_o.abs() < 1e-10);
        let half = Array2::from_diag(&Array1::from_elem(h.dim(), C64::new(0.5, 0.0)));
        assert!(osee(&half, &order, order.cut_position).unwrap().s_o.abs() < 1e-10);
        let mut bad = c.clone();
        bad[[0, 0]] = C64::new(1.5, 0.0);
        assert!(osee(&bad, &order, 3).is_err());
    }

    #[test]
    fn cr_ness_currents_balance() {
        let h = Junction::resonant_level(32, 1.0 / 40.0, 0.5).assemble().unwrap();
        let prop = Propagator::new(&h.matrix).unwrap();
        let ness = solve_ness(&h, &prop, Protocol::Continuous { gamma: 0.15 }, &SolverOptions::default()).unwrap();
        let r = currents_from_columns(&h, &ness.measured_columns);
        assert!(r.i > 0.0);
        assert!((r.i_ls - r.i_sr).abs() < 1e-9 * r.i.abs());
    }
}
