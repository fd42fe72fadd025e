//! Parameter sweeps over `(γτ, τ̃)` and the analyses built on them:
//! moving-average error, optimal action, the shifted-reservoir heuristic
//! for the CR rate, power-law fits and the thermal-length collapse.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc::{ArcParams, Propagator};
use crate::error::{ArcError, Result};
use crate::model::{mixed_basis_order, Junction, MixedBasisOrder, SingleParticleHamiltonian};
use crate::negf::{reference, QuadSpec, ReferenceResult};
use crate::ness::{solve_ness, Ness, Protocol, SolverOptions};
use crate::observables::{
    absolute_current_error, cost_estimate, current_error, currents_from_columns, osee, trace_distance,
    CurrentReading,
};

/// `(γ, τ)` from `(γτ, τ̃)`; `γτ = ∞` gives `(∞, τ̃)`.
pub fn params_from_action(gamma_tau: f64, action: f64) -> Result<(f64, f64)> {
    let p = ArcParams::from_action(gamma_tau, action)?;
    Ok((p.gamma(), p.tau))
}

/// Protocol at a phase-diagram coordinate. `γτ = 0` is the CR row, where
/// `τ̃ = 2/γ`; `γτ = ∞` is the PR row, where `τ̃ = τ`.
pub fn protocol_at(gamma_tau: f64, action: f64) -> Result<Protocol> {
    if !(action > 0.0) || !action.is_finite() {
        return Err(ArcError::InvalidParameter(format!("action must be positive and finite, got {action}")));
    }
    if gamma_tau == 0.0 {
        Ok(Protocol::Continuous { gamma: 2.0 / action })
    } else {
        Ok(Protocol::Cycle(ArcParams::from_action(gamma_tau, action)?))
    }
}

/// Everything that depends only on the junction: assembled Hamiltonian,
/// propagator, mixed-basis order and continuum reference.
pub struct Workspace {
    pub junction: Junction,
    pub h: SingleParticleHamiltonian,
    pub propagator: Propagator,
    pub order: MixedBasisOrder,
    pub reference: Option<ReferenceResult>,
    pub options: SolverOptions,
}

impl Workspace {
    pub fn new(junction: Junction, quad: Option<&QuadSpec>, options: SolverOptions) -> Result<Self> {
        let h = junction.assemble()?;
        let propagator = Propagator::new(&h.matrix)?;
        let order = mixed_basis_order(&h);
        let reference = quad.map(|q| reference(&junction, q)).transpose()?;
        Ok(Workspace { junction, h, propagator, order, reference, options })
    }

    pub fn n_modes(&self) -> usize {
        self.junction.n_modes()
    }

    pub fn reference_current(&self) -> Option<f64> {
        self.reference.as_ref().map(|r| r.current)
    }

    pub fn solve(&self, protocol: Protocol) -> Result<Ness> {
        solve_ness(&self.h, &self.propagator, protocol, &self.options)
    }

    pub fn current(&self, protocol: Protocol) -> Result<(CurrentReading, Ness)> {
        let ness = self.solve(protocol)?;
        Ok((currents_from_columns(&self.h, &ness.measured_columns), ness))
    }

    /// Solve and measure one point; OSEE (and with it the cost) only when
    /// requested since it needs a full eigendecomposition.
    pub fn evaluate(&self, protocol: Protocol, with_osee: bool) -> Result<NessResult> {
        let (reading, ness) = self.current(protocol)?;
        let (gamma_tau, action, gamma, tau) = coordinates(protocol);
        let (err, td) = match &self.reference {
            Some(r) => {
                let e = if r.current != 0.0 {
                    current_error(&reading, r.current)?
                } else {
                    absolute_current_error(&reading, r.current)
                };
                (Some(e), trace_distance(&ness.system_block(&self.h), &r.corr_s)?)
            }
            None => (None, f64::NAN),
        };
        let s_o = if with_osee {
            let c = ness.measured_state(&self.h, &self.propagator);
            osee(&c, &self.order, self.order.cut_position)?.s_o
        } else {
            f64::NAN
        };
        Ok(NessResult {
            gamma_tau,
            action,
            gamma,
            tau,
            n_modes: self.n_modes(),
            temperature: self.junction.left.temperature,
            current: reading.i,
            i_ls: reading.i_ls,
            i_sr: reading.i_sr,
            reference: self.reference_current().unwrap_or(f64::NAN),
            sigma1_sq: err.map_or(f64::NAN, |e| e.sigma1_sq),
            sigma2_sq: err.map_or(f64::NAN, |e| e.sigma2_sq),
            sigma_sq: err.map_or(f64::NAN, |e| e.sigma_sq),
            trace_distance: td,
            s_o,
            tau_c: ness.tau_c,
            cost: cost_estimate(ness.tau_c, self.n_modes(), s_o),
            spectral_radius: ness.spectral_radius.unwrap_or(f64::NAN),
            residual: ness.residual,
            spectrum_min: ness.spectrum.0,
            spectrum_max: ness.spectrum.1,
            hermiticity: ness.hermiticity,
        })
    }
}

fn coordinates(protocol: Protocol) -> (f64, f64, f64, f64) {
    match protocol {
        Protocol::Continuous { gamma } => (0.0, 2.0 / gamma, gamma, 0.0),
        Protocol::Cycle(p) => (p.gamma_tau(), p.action(), p.gamma(), p.tau),
    }
}

/// One measured steady state. Column order of the CSV export is the field
/// order here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NessResult {
    pub gamma_tau: f64,
    pub action: f64,
    pub gamma: f64,
    pub tau: f64,
    pub n_modes: usize,
    pub temperature: f64,
    pub current: f64,
    pub i_ls: f64,
    pub i_sr: f64,
    pub reference: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma_sq: f64,
    pub trace_distance: f64,
    pub s_o: f64,
    pub tau_c: f64,
    pub cost: f64,
    pub spectral_radius: f64,
    pub residual: f64,
    pub spectrum_min: f64,
    pub spectrum_max: f64,
    pub hermiticity: f64,
}

/// Scientific notation with 17 significant digits; `inf`/`-inf`/`nan`
/// spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl NessResult {
    pub const HEADER: [&'static str; 22] = [
        "gamma_tau",
        "action",
        "gamma",
        "tau",
        "n_modes",
        "temperature",
        "current",
        "i_ls",
        "i_sr",
        "reference",
        "sigma1_sq",
        "sigma2_sq",
        "sigma_sq",
        "trace_distance",
        "s_o",
        "tau_c",
        "cost",
        "spectral_radius",
        "residual",
        "spectrum_min",
        "spectrum_max",
        "hermiticity",
    ];

    pub fn record(&self) -> Vec<String> {
        let f = format_float;
        vec![
            f(self.gamma_tau),
            f(self.action),
            f(self.gamma),
            f(self.tau),
            self.n_modes.to_string(),
            f(self.temperature),
            f(self.current),
            f(self.i_ls),
            f(self.i_sr),
            f(self.reference),
            f(self.sigma1_sq),
            f(self.sigma2_sq),
            f(self.sigma_sq),
            f(self.trace_distance),
            f(self.s_o),
            f(self.tau_c),
            f(self.cost),
            f(self.spectral_radius),
            f(self.residual),
            f(self.spectrum_min),
            f(self.spectrum_max),
            f(self.hermiticity),
        ]
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.spectrum_min >= -tol && self.spectrum_max <= 1.0 + tol && self.hermiticity <= 1e-12
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Rows; `0` is the CR row and `inf` the PR row.
    pub gamma_tau: Vec<f64>,
    /// Columns, ascending.
    pub actions: Vec<f64>,
}

impl GridSpec {
    /// 60 log-spaced `γτ ∈ [10⁻², 10³]` plus the CR and PR rows, and 120
    /// log-spaced `τ̃ ∈ [0.1, 4τ_W]`.
    pub fn standard(reservoir_time: f64) -> Self {
        let mut gamma_tau = vec![0.0];
        gamma_tau.extend(log_space(1e-2, 1e3, 60));
        gamma_tau.push(f64::INFINITY);
        GridSpec { gamma_tau, actions: log_space(0.1, 4.0 * reservoir_time, 120) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_tau.is_empty() || self.actions.is_empty() {
            return Err(ArcError::InvalidParameter("grid needs at least one row and one column".into()));
        }
        if self.gamma_tau.iter().any(|&g| !(g >= 0.0)) {
            return Err(ArcError::InvalidParameter("total relaxation values must be ≥ 0".into()));
        }
        if self.actions.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(ArcError::InvalidParameter("actions must be positive and finite".into()));
        }
        if self.actions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ArcError::InvalidParameter("actions must be strictly ascending".into()));
        }
        Ok(())
    }

    /// Fewest grid points inside any averaging window of half-width `half`.
    pub fn min_window_points(&self, half: f64) -> usize {
        self.actions
            .iter()
            .map(|&a| self.actions.iter().filter(|&&b| (b - a).abs() <= half).count())
            .min()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub gamma_tau: f64,
    pub action: f64,
    pub outcome: std::result::Result<NessResult, String>,
}

/// Evaluate every grid point in parallel. Output is row-major in the grid
/// order regardless of scheduling; failures are recorded per point.
pub fn phase_diagram(ws: &Workspace, grid: &GridSpec, with_osee: bool) -> Result<Vec<GridPoint>> {
    grid.validate()?;
    let coords: Vec<(f64, f64)> = grid
        .gamma_tau
        .iter()
        .flat_map(|&g| grid.actions.iter().map(move |&a| (g, a)))
        .collect();
    Ok(coords
        .par_iter()
        .map(|&(gamma_tau, action)| {
            let outcome = protocol_at(gamma_tau, action)
                .and_then(|p| ws.evaluate(p, with_osee))
                .map_err(|e| e.to_string());
            if let Err(e) = &outcome {
                log::warn!("point (γτ={gamma_tau}, τ̃={action}) failed: {e}");
            }
            GridPoint { gamma_tau, action, outcome }
        })
        .collect())
}

/// Mean of `σ²` over `|τ̃′ − τ̃| ≤ half_width`, truncated at the curve ends.
/// `curve` must be sorted by `τ̃`.
pub fn moving_average_error(curve: &[(f64, f64)], half_width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(curve.len());
    let mut lo = 0;
    let mut hi = 0;
    let mut sum = 0.0;
    for &(x, _) in curve {
        while hi < curve.len() && curve[hi].0 <= x + half_width {
            sum += curve[hi].1;
            hi += 1;
        }
        while curve[lo].0 < x - half_width {
            sum -= curve[lo].1;
            lo += 1;
        }
        // Re-sum rather than trust the running total for long curves.
        let exact: f64 = curve[lo..hi].iter().map(|p| p.1).sum();
        let _ = sum;
        sum = exact;
        out.push((x, exact / (hi - lo) as f64));
    }
    out
}

/// `τ̃` minimizing the averaged error; ties go to the smaller `τ̃`.
pub fn optimal_action(averaged: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &(x, y) in averaged {
        if y.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if y >= b => {}
            _ => best = Some((x, y)),
        }
    }
    best
}

/// Averaging half-width `τ_S/2`.
pub fn default_half_width(junction: &Junction) -> f64 {
    0.5 * junction.system_time()
}

#[derive(Debug, Clone)]
pub struct OptimalPoint {
    pub gamma_tau: f64,
    pub action: f64,
    /// `σ̄² ` at the optimum.
    pub mean_sigma_sq: f64,
    /// The point itself evaluated with OSEE and cost.
    pub result: NessResult,
    /// Every evaluated point, coarse and refined.
    pub evaluated: Vec<NessResult>,
}

/// Evaluate `σ²` on a uniform grid of spacing `half_width/3` covering the
/// averaging windows around `center`, and return the averaged curve.
fn refined_window(
    ws: &Workspace,
    gamma_tau: f64,
    center: f64,
    half_width: f64,
    evaluated: &mut Vec<NessResult>,
) -> Result<Vec<(f64, f64)>> {
    let step = half_width / 3.0;
    let xs: Vec<f64> = (-6..=6)
        .map(|k| center + k as f64 * step)
        .filter(|&x| x > 0.0)
        .collect();
    let results: Vec<Result<NessResult>> = xs
        .par_iter()
        .map(|&x| protocol_at(gamma_tau, x).and_then(|p| ws.evaluate(p, false)))
        .collect();
    let mut curve = Vec::new();
    for r in results {
        let r = r?;
        curve.push((r.action, r.sigma_sq));
        evaluated.push(r);
    }
    let avg = moving_average_error(&curve, half_width);
    // Only centres whose full window lies inside the refined grid count.
    let lo = xs[0] + half_width - 1e-12;
    let hi = xs[xs.len() - 1] - half_width + 1e-12;
    Ok(avg.into_iter().filter(|&(x, _)| x >= lo.min(center) && x <= hi.max(center)).collect())
}

/// Best action at fixed `γτ`: scan `coarse`, then refine the `candidates`
/// lowest coarse points on locally uniform grids so every window holds
/// enough samples, and take the refined minimum of `σ̄²`.
pub fn search_optimal_action(
    ws: &Workspace,
    gamma_tau: f64,
    coarse: &[f64],
    half_width: f64,
    candidates: usize,
) -> Result<OptimalPoint> {
    let mut evaluated = Vec::new();
    let results: Vec<Result<NessResult>> = coarse
        .par_iter()
        .map(|&x| protocol_at(gamma_tau, x).and_then(|p| ws.evaluate(p, false)))
        .collect();
    let mut curve = Vec::new();
    for r in results {
        match r {
            Ok(r) => {
                curve.push((r.action, r.sigma_sq));
                evaluated.push(r);
            }
            Err(e) => log::warn!("coarse point failed: {e}"),
        }
    }
    if curve.is_empty() {
        return Err(ArcError::DegenerateFit("no coarse point could be evaluated".into()));
    }
    let mut ranked = moving_average_error(&curve, half_width);
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut best: Option<(f64, f64)> = None;
    for &(center, _) in ranked.iter().take(candidates.max(1)) {
        let avg = refined_window(ws, gamma_tau, center, half_width, &mut evaluated)?;
        if let Some((x, y)) = optimal_action(&avg) {
            if best.map_or(true, |(bx, by)| y < by || (y == by && x < bx)) {
                best = Some((x, y));
            }
        }
    }
    let (action, mean_sigma_sq) = best.ok_or_else(|| ArcError::DegenerateFit("no refined optimum".into()))?;
    let result = ws.evaluate(protocol_at(gamma_tau, action)?, true)?;
    Ok(OptimalPoint { gamma_tau, action, mean_sigma_sq, result, evaluated })
}

/// `σ̄²` at a fixed action, averaged over a uniform window grid.
pub fn mean_error_at(ws: &Workspace, gamma_tau: f64, action: f64, half_width: f64, points: usize) -> Result<(f64, Vec<NessResult>)> {
    let n = points.max(1);
    let xs = if n == 1 { vec![action] } else { lin_space(action - half_width, action + half_width, n) };
    let results: Vec<Result<NessResult>> = xs
        .par_iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| protocol_at(gamma_tau, x).and_then(|p| ws.evaluate(p, false)))
        .collect();
    let results: Vec<NessResult> = results.into_iter().collect::<Result<_>>()?;
    let mean = results.iter().map(|r| r.sigma_sq).sum::<f64>() / results.len() as f64;
    Ok((mean, results))
}

/// CR current over a set of relaxation rates (Kramers turnover).
pub fn turnover(ws: &Workspace, gammas: &[f64]) -> Result<Vec<NessResult>> {
    if gammas.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(ArcError::InvalidParameter("relaxation rates must be positive and finite".into()));
    }
    gammas
        .par_iter()
        .map(|&gamma| ws.evaluate(Protocol::Continuous { gamma }, false))
        .collect()
}

/// Log-log slope between the first two and between the last two points.
pub fn limiting_slopes(curve: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = curve.len();
    if n < 2 || curve.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let slope = |a: (f64, f64), b: (f64, f64)| (b.1 / a.1).ln() / (b.0 / a.0).ln();
    Some((slope(curve[0], curve[1]), slope(curve[n - 2], curve[n - 1])))
}

/// Widest contiguous run of abscissae whose ordinate lies in `[lo, hi]`.
pub fn plateau_span(curve: &[(f64, f64)], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let mut start: Option<f64> = None;
    let mut last = 0.0;
    for &(x, y) in curve.iter().chain(std::iter::once(&(f64::NAN, f64::NAN))) {
        if y >= lo && y <= hi {
            start.get_or_insert(x);
            last = x;
        } else if let Some(s) = start.take() {
            if best.map_or(true, |(a, b)| last / s > b / a) {
                best = Some((s, last));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeuristicOptions {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub points_per_decade: usize,
    /// Relative width of the final bisection bracket.
    pub rel_tol: f64,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions { gamma_min: 1e-3, gamma_max: 2.0, points_per_decade: 8, rel_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnoverSample {
    pub gamma: f64,
    pub aligned: f64,
    pub shifted: f64,
}

#[derive(Debug, Clone)]
pub struct HeuristicResult {
    pub gamma: f64,
    pub shift: f64,
    /// Every bracketing sign change of `I_aligned − I_shifted` in the scan.
    pub crossings: Vec<(f64, f64)>,
    pub samples: Vec<TurnoverSample>,
    /// Spectrum bounds and Hermiticity of every steady state solved, and
    /// the largest `|I_LS − I_SR|`.
    pub checks: Vec<NessCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NessCheck {
    pub spectrum_min: f64,
    pub spectrum_max: f64,
    pub hermiticity: f64,
    pub mismatch: f64,
}

impl NessCheck {
    pub fn of(ness: &Ness, reading: &CurrentReading) -> Self {
        NessCheck {
            spectrum_min: ness.spectrum.0,
            spectrum_max: ness.spectrum.1,
            hermiticity: ness.hermiticity,
            mismatch: (reading.i_ls - reading.i_sr).abs(),
        }
    }
}

/// Junction with the left and right reservoir spectra moved apart by
/// `shift`, half each way, so the pair stays symmetric about the bias
/// midpoint.
pub fn misaligned_junction(junction: &Junction, shift: f64) -> Junction {
    let mut j = junction.clone();
    j.left.frequency_shift -= 0.5 * shift;
    j.right.frequency_shift += 0.5 * shift;
    j
}

/// Default shift: half the mean level spacing of the right reservoir.
pub fn default_shift(junction: &Junction) -> f64 {
    0.5 * junction.right.mean_level_spacing()
}

/// CR current as a function of `γ` for the aligned junction and for one
/// whose right reservoir is shifted by `shift`; the estimate is the first
/// `γ` (scanning upward) where the two curves cross. The shift is the
/// relative offset between left and right modes.
pub fn heuristic_cr_gamma(junction: &Junction, shift: f64, opts: &HeuristicOptions, solver: &SolverOptions) -> Result<HeuristicResult> {
    if !(shift > 0.0) || !shift.is_finite() {
        return Err(ArcError::InvalidParameter(format!("shift must be positive, got {shift}")));
    }
    if !(opts.gamma_min > 0.0 && opts.gamma_max > opts.gamma_min) {
        return Err(ArcError::InvalidParameter("invalid γ scan range".into()));
    }
    let aligned = Workspace::new(junction.clone(), None, *solver)?;
    let shifted = Workspace::new(misaligned_junction(junction, shift), None, *solver)?;
    let checks = std::sync::Mutex::new(Vec::new());
    let diff = |gamma: f64| -> Result<TurnoverSample> {
        let p = Protocol::Continuous { gamma };
        let (a, na) = aligned.current(p)?;
        let (b, nb) = shifted.current(p)?;
        let mut c = checks.lock().unwrap();
        c.push(NessCheck::of(&na, &a));
        c.push(NessCheck::of(&nb, &b));
        Ok(TurnoverSample { gamma, aligned: a.i, shifted: b.i })
    };

    let decades = (opts.gamma_max / opts.gamma_min).log10();
    let n = ((decades * opts.points_per_decade as f64).ceil() as usize).max(2) + 1;
    let gammas = log_space(opts.gamma_min, opts.gamma_max, n);
    let samples: Vec<TurnoverSample> = gammas.par_iter().map(|&g| diff(g)).collect::<Result<_>>()?;
    let d = |s: &TurnoverSample| s.aligned - s.shifted;
    let crossings: Vec<(f64, f64)> = samples
        .windows(2)
        .filter(|w| d(&w[0]).signum() != d(&w[1]).signum())
        .map(|w| (w[0].gamma, w[1].gamma))
        .collect();
    let (mut lo, mut hi) = *crossings
        .first()
        .ok_or(ArcError::NoCrossing { lo: opts.gamma_min, hi: opts.gamma_max })?;
    if crossings.len() > 1 {
        log::warn!("{} crossings found; using the first at γ ∈ [{lo}, {hi}]", crossings.len());
    }
    let mut d_lo = d(&samples.iter().find(|s| s.gamma == lo).copied().unwrap());
    while hi / lo - 1.0 > opts.rel_tol {
        let mid = (lo * hi).sqrt();
        let s = diff(mid)?;
        if d(&s).signum() == d_lo.signum() {
            lo = mid;
            d_lo = d(&s);
        } else {
            hi = mid;
        }
    }
    Ok(HeuristicResult {
        gamma: (lo * hi).sqrt(),
        shift,
        crossings,
        samples,
        checks: checks.into_inner().unwrap(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// `y = A x^e`.
    pub prefactor: f64,
    pub exponent: f64,
    /// Covariance of `(ln A, e)`.
    pub covariance: [[f64; 2]; 2],
    pub domain: (f64, f64),
    pub points: usize,
}

impl PowerLawFit {
    pub fn exponent_error(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }
}

/// Ordinary least squares on `(ln x, ln y)`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(ArcError::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(ArcError::DegenerateFit("power-law fit needs positive finite data".into()));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(ArcError::DegenerateFit("abscissae are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let s2 = ssr / (n - 2.0);
    let var_slope = s2 / sxx;
    let var_icpt = s2 * (1.0 / n + mx * mx / sxx);
    let cov = -s2 * mx / sxx;
    let xmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(PowerLawFit {
        prefactor: intercept.exp(),
        exponent: slope,
        covariance: [[var_icpt, cov], [cov, var_slope]],
        domain: (xmin, xmax),
        points: points.len(),
    })
}

/// `σ̄ = A C^{−ν}` fitted on `(cost, σ̄)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    pub nu: f64,
    /// Covariance of `(ln A, ν)`.
    pub covariance: [[f64; 2]; 2],
    pub domain: (f64, f64),
}

pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let f = power_law_fit(points)?;
    let c = f.covariance;
    Ok(ScalingFit {
        a: f.prefactor,
        nu: -f.exponent,
        covariance: [[c[0][0], -c[0][1]], [-c[1][0], c[1][1]]],
        domain: f.domain,
    })
}

/// Thermal correlation length `N_th = 2β/π` (lattice sites, `ω₀ = 1`).
pub fn thermal_length(temperature: f64) -> f64 {
    2.0 / (PI * temperature)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub temperature: f64,
    pub n_modes: usize,
    pub n_th: f64,
    /// `N_W / N_th`.
    pub x: f64,
    /// `σ̄ · N_th²`.
    pub y: f64,
    pub mean_sigma: f64,
}

/// Periodic refresh at the physical cycle time `τ_W` for each temperature
/// and reservoir size, rescaled by the thermal length.
pub fn thermal_collapse(
    base: &Junction,
    temperatures: &[f64],
    n_modes: &[usize],
    quad: &QuadSpec,
    solver: &SolverOptions,
    window_points: usize,
) -> Result<Vec<(CollapsePoint, Vec<NessResult>)>> {
    let jobs: Vec<(f64, usize)> = temperatures
        .iter()
        .flat_map(|&t| n_modes.iter().map(move |&n| (t, n)))
        .collect();
    jobs.par_iter()
        .map(|&(t, n)| {
            let j = base.clone().with_temperature(t).with_n_modes(n);
            let half = default_half_width(&j);
            let tau_w = j.reservoir_time();
            let ws = Workspace::new(j, Some(quad), *solver)?;
            let (mean, samples) = mean_error_at(&ws, f64::INFINITY, tau_w, half.min(0.9 * tau_w), window_points)?;
            let n_th = thermal_length(t);
            let point = CollapsePoint {
                temperature: t,
                n_modes: n,
                n_th,
                x: n as f64 / n_th,
                y: mean.sqrt() * n_th * n_th,
                mean_sigma: mean.sqrt(),
            };
            Ok((point, samples))
        })
        .collect()
}
