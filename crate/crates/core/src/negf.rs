//! Continuum reference for the junction: retarded Green's function of the
//! system dressed by semi-infinite 1D leads, the Landauer current and the
//! steady-state system correlation matrix.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::Inverse;
use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};
use crate::linalg::{dagger, C64, ZERO};
use crate::model::{fermi_occupation, Junction, ReservoirSpec, SystemSpec};
use crate::quad;

/// Retarded self-energy of a semi-infinite chain with hopping `ω₀` coupled
/// through a bond of the same strength.
///
/// In the band, `(ω − i√(4ω₀² − ω²))/2`; outside it the decaying real branch
/// `(ω − sign(ω)√(ω² − 4ω₀²))/2`, which behaves as `ω₀²/ω` for large `|ω|`.
pub fn lead_self_energy_r(omega: f64, omega0: f64) -> C64 {
    let disc = 4.0 * omega0 * omega0 - omega * omega;
    if disc >= 0.0 {
        C64::new(0.5 * omega, -0.5 * disc.sqrt())
    } else {
        C64::new(0.5 * (omega - omega.signum() * (-disc).sqrt()), 0.0)
    }
}

/// Self-energy one lead contributes at its contact site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadSelfEnergy {
    pub hopping: f64,
    pub coupling: f64,
    pub shift: f64,
}

impl LeadSelfEnergy {
    pub fn from_spec(spec: &ReservoirSpec) -> Self {
        LeadSelfEnergy {
            hopping: spec.hopping,
            coupling: spec.boundary_coupling,
            shift: spec.frequency_shift,
        }
    }

    pub fn retarded(&self, omega: f64) -> C64 {
        let scale = (self.coupling / self.hopping).powi(2);
        lead_self_energy_r(omega - self.shift, self.hopping) * scale
    }

    pub fn advanced(&self, omega: f64) -> C64 {
        self.retarded(omega).conj()
    }

    /// `Γ(ω) = −2 Im Σʳ(ω)`.
    pub fn broadening(&self, omega: f64) -> f64 {
        -2.0 * self.retarded(omega).im
    }

    pub fn band(&self) -> (f64, f64) {
        (self.shift - 2.0 * self.hopping, self.shift + 2.0 * self.hopping)
    }
}

/// `Gʳ = [ω − H_S − Σʳ_L − Σʳ_R]⁻¹` and `Gᵃ = (Gʳ)†`.
pub fn greens_functions(
    omega: f64,
    system: &SystemSpec,
    left: &LeadSelfEnergy,
    right: &LeadSelfEnergy,
) -> Result<(Array2<C64>, Array2<C64>)> {
    let n = system.n_sites();
    let mut m = system.hamiltonian.mapv(|z| -z);
    for i in 0..n {
        m[[i, i]] += omega;
    }
    m[[system.left_contact, system.left_contact]] -= left.retarded(omega);
    m[[system.right_contact, system.right_contact]] -= right.retarded(omega);
    let gr = m.inv().map_err(|_| ArcError::SingularGreensFunction(omega))?;
    if gr.iter().any(|z| !z.is_finite()) {
        return Err(ArcError::SingularGreensFunction(omega));
    }
    let ga = dagger(&gr.view());
    Ok((gr, ga))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    /// Absolute tolerance on every integrated component.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { abs_tol: 1e-10, max_panels: 20_000 }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceResult {
    pub current: f64,
    pub current_error: f64,
    pub corr_s: Array2<C64>,
    pub corr_error: f64,
    /// `N_S − ∫ tr A(ω) dω/2π` over the band; nonzero when bound states
    /// outside the continuum carry weight the band integral cannot see.
    pub spectral_deficit: f64,
    pub evaluations: usize,
}

/// Integrate the current, the system correlation matrix and the spectral
/// weight in a single adaptive pass.
pub fn reference(junction: &Junction, spec: &QuadSpec) -> Result<ReferenceResult> {
    junction.validate()?;
    let system = &junction.system;
    let n = system.n_sites();
    let left = LeadSelfEnergy::from_spec(&junction.left);
    let right = LeadSelfEnergy::from_spec(&junction.right);
    let (l_lo, l_hi) = left.band();
    let (r_lo, r_hi) = right.band();
    let lo = l_lo.min(r_lo);
    let hi = l_hi.max(r_hi);

    let mut nodes = vec![lo, hi, l_lo, l_hi, r_lo, r_hi];
    for mu in [junction.left.chemical_potential, junction.right.chemical_potential] {
        if mu > lo && mu < hi {
            nodes.push(mu);
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    // Each piece [a, b] is mapped by ω = c + h sin θ, which turns the
    // square-root band edges into smooth endpoints.
    let pieces: Vec<(f64, f64)> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
    let dim = 2 + 2 * n * n;
    let lc = system.left_contact;
    let rc = system.right_contact;

    let integrand = |omega: f64| -> Result<Vec<f64>> {
        let mut out = vec![0.0; dim];
        let (gr, _) = greens_functions(omega, system, &left, &right)?;
        let gl = left.broadening(omega).max(0.0);
        let gamma_r = right.broadening(omega).max(0.0);
        let fl = fermi_occupation(omega, junction.left.temperature, junction.left.chemical_potential);
        let fr = fermi_occupation(omega, junction.right.temperature, junction.right.chemical_potential);
        let t = gl * gamma_r * gr[[lc, rc]].norm_sqr();
        out[0] = (fl - fr) * t / (2.0 * PI);
        let mut trace = 0.0;
        for i in 0..n {
            for j in 0..n {
                let z = (gr[[i, lc]] * gr[[j, lc]].conj() * (fl * gl)
                    + gr[[i, rc]] * gr[[j, rc]].conj() * (fr * gamma_r))
                    / (2.0 * PI);
                out[2 + 2 * (i * n + j)] = z.re;
                out[3 + 2 * (i * n + j)] = z.im;
            }
            trace += (gr[[i, lc]].norm_sqr() * gl + gr[[i, rc]].norm_sqr() * gamma_r) / (2.0 * PI);
        }
        out[1] = trace;
        Ok(out)
    };

    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    let mut evaluations = 0;
    let tol = spec.abs_tol / pieces.len().max(1) as f64;
    for (a, b) in pieces {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let failure = std::cell::Cell::new(None);
        let mapped = |theta: f64| -> Vec<f64> {
            let omega = c + h * theta.sin();
            let jac = h * theta.cos();
            match integrand(omega) {
                Ok(v) => v.into_iter().map(|x| x * jac).collect(),
                Err(_) => {
                    failure.set(Some(omega));
                    vec![0.0; dim]
                }
            }
        };
        let r = quad::integrate(mapped, &[-0.5 * PI, 0.5 * PI], tol, spec.max_panels);
        if let Some(omega) = failure.get() {
            return Err(ArcError::SingularGreensFunction(omega));
        }
        for k in 0..dim {
            value[k] += r.value[k];
            error[k] += r.error[k];
        }
        evaluations += r.evaluations;
        if !r.converged {
            return Err(ArcError::Quadrature { estimate: value[0], error: r.max_error() });
        }
    }

    let mut corr_s = Array2::from_elem((n, n), ZERO);
    let mut corr_error: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            corr_s[[i, j]] = C64::new(value[2 + 2 * (i * n + j)], value[3 + 2 * (i * n + j)]);
            corr_error = corr_error.max(error[2 + 2 * (i * n + j)]).max(error[3 + 2 * (i * n + j)]);
        }
    }
    crate::linalg::hermitize(&mut corr_s);
    Ok(ReferenceResult {
        current: value[0],
        current_error: error[0],
        corr_s,
        corr_error,
        spectral_deficit: n as f64 - value[1],
        evaluations,
    })
}

/// Landauer current `I° = ∫ dω/2π (f_L − f_R) tr[Γ_L Gʳ Γ_R Gᵃ]` with its
/// error estimate.
pub fn landauer_current(junction: &Junction, spec: &QuadSpec) -> Result<(f64, f64)> {
    reference(junction, spec).map(|r| (r.current, r.current_error))
}

/// Steady-state system correlation `C°_S = ∫ dω/2π Gʳ (f_L Γ_L + f_R Γ_R) Gᵃ`.
pub fn reference_correlation(junction: &Junction, spec: &QuadSpec) -> Result<Array2<C64>> {
    reference(junction, spec).map(|r| r.corr_s)
}

/// Transmission `tr[Γ_L Gʳ Γ_R Gᵃ]` at a single frequency.
pub fn transmission(junction: &Junction, omega: f64) -> Result<f64> {
    let left = LeadSelfEnergy::from_spec(&junction.left);
    let right = LeadSelfEnergy::from_spec(&junction.right);
    let (gr, _) = greens_functions(omega, &junction.system, &left, &right)?;
    let s = &junction.system;
    Ok(left.broadening(omega) * right.broadening(omega) * gr[[s.left_contact, s.right_contact]].norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigvalsh;
    use crate::model::discretize_reservoir;
    use approx::assert_relative_eq;

    fn paper() -> Junction {
        Junction::resonant_level(128, 1.0 / 40.0, 0.5)
    }

    #[test]
    fn self_energy_values() {
        let s = lead_self_energy_r(0.0, 1.0);
        assert_relative_eq!(s.re, 0.0);
        assert_relative_eq!(s.im, -1.0);
        let s = lead_self_energy_r(2.0, 1.0);
        assert_relative_eq!(s.re, 1.0);
        assert_eq!(s.im, 0.0);
        let s = lead_self_energy_r(3.0, 1.0);
        assert_relative_eq!(s.re, (3.0 - 5f64.sqrt()) / 2.0, max_relative = 1e-14);
        let s = lead_self_energy_r(-3.0, 1.0);
        assert_relative_eq!(s.re, -(3.0 - 5f64.sqrt()) / 2.0, max_relative = 1e-14);
        assert!(lead_self_energy_r(1e6, 1.0).norm() < 2e-6);
    }

    // Finite chain Σ_k v_k²/(z − ω_k) against the analytic continuation of
    // the surface Green's function, z = ω + iη.
    #[test]
    fn self_energy_matches_long_chain() {
        let d = discretize_reservoir(&ReservoirSpec::new(4000, 0.0, 0.0)).unwrap();
        let eta = 0.05;
        for &w in &[-2.5, -1.3, -0.2, 0.0, 0.7, 1.9, 3.1] {
            let z = C64::new(w, eta);
            let finite: C64 = d
                .frequencies
                .iter()
                .zip(&d.couplings)
                .map(|(wk, vk)| vk * vk / (z - wk))
                .sum();
            let exact = (z - (z - 2.0).sqrt() * (z + 2.0).sqrt()) / 2.0;
            assert!((finite - exact).norm() < 1e-6, "ω={w}: {finite} vs {exact}");
            // η → 0 limit agrees with the closed form to O(η).
            assert!((exact - lead_self_energy_r(w, 1.0)).norm() < 0.1);
        }
    }

    #[test]
    fn greens_function_single_site() {
        let sys = SystemSpec::uniform_chain(1, 0.0, 0.0);
        let lead = LeadSelfEnergy { hopping: 1.0, coupling: 1.0, shift: 0.0 };
        let (gr, ga) = greens_functions(0.0, &sys, &lead, &lead).unwrap();
        assert_relative_eq!(gr[[0, 0]].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(gr[[0, 0]].im, -0.5, epsilon = 1e-15);
        assert_eq!(ga[[0, 0]], gr[[0, 0]].conj());
    }

    #[test]
    fn greens_function_decoupled_is_resolvent() {
        let sys = SystemSpec::resonant_level(0.5, 0.5);
        let lead = LeadSelfEnergy { hopping: 1.0, coupling: 0.0, shift: 0.0 };
        let (gr, _) = greens_functions(0.3, &sys, &lead, &lead).unwrap();
        for z in gr.iter() {
            assert_eq!(z.im, 0.0);
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(gr[[i, j]].re, gr[[j, i]].re, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn transmission_bounded() {
        let j = paper();
        for k in 0..=400 {
            let w = -2.0 + 4.0 * k as f64 / 400.0;
            let t = transmission(&j, w).unwrap();
            assert!((-1e-14..=1.0 + 1e-12).contains(&t), "T({w}) = {t}");
        }
    }

    #[test]
    fn zero_bias_gives_zero_current() {
        let j = Junction::resonant_level(128, 1.0 / 40.0, 0.0);
        let (i, _) = landauer_current(&j, &QuadSpec::default()).unwrap();
        assert!(i.abs() < 1e-12);
    }

    #[test]
    fn swapping_leads_negates_current() {
        let j = paper();
        let mut swapped = j.clone();
        std::mem::swap(&mut swapped.left, &mut swapped.right);
        let (a, _) = landauer_current(&j, &QuadSpec::default()).unwrap();
        let (b, _) = landauer_current(&swapped, &QuadSpec::default()).unwrap();
        assert!(a > 0.0);
        assert_relative_eq!(a, -b, max_relative = 1e-9);
    }

    #[test]
    fn particle_hole_point_half_filled() {
        let mut j = Junction::resonant_level(16, 0.1, 0.0);
        j.system = SystemSpec::resonant_level(0.0, 0.5);
        let r = reference(&j, &QuadSpec::default()).unwrap();
        for i in 0..3 {
            assert_relative_eq!(r.corr_s[[i, i]].re, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn high_temperature_maximally_mixed() {
        let j = Junction::resonant_level(16, 1e9, 0.0);
        let r = reference(&j, &QuadSpec::default()).unwrap();
        assert!(r.spectral_deficit.abs() < 1e-8, "deficit {}", r.spectral_deficit);
        for i in 0..3 {
            for k in 0..3 {
                let want = if i == k { 0.5 } else { 0.0 };
                assert!((r.corr_s[[i, k]] - want).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn paper_reference_is_physical() {
        let r = reference(&paper(), &QuadSpec::default()).unwrap();
        assert!(r.current > 0.0);
        assert!(r.current_error < 1e-10);
        let ev = eigvalsh(&r.corr_s).unwrap();
        assert!(ev.iter().all(|&e| e > -1e-9 && e < 1.0 + 1e-9));
        assert!(r.spectral_deficit.abs() < 1e-8);
    }

    #[test]
    fn tighter_tolerance_within_error_estimate() {
        let j = paper();
        let (a, ea) = landauer_current(&j, &QuadSpec { abs_tol: 1e-8, max_panels: 20_000 }).unwrap();
        let (b, _) = landauer_current(&j, &QuadSpec { abs_tol: 5e-9, max_panels: 20_000 }).unwrap();
        assert!((a - b).abs() <= ea.max(1e-15));
    }
}
