//! One function per experiment. Each writes its tables through `Output`
//! and returns a JSON summary for the manifest.

use crate::config::{Point, RunConfig};
use crate::output::{f, file_name, Output};
use anyhow::{bail, Context, Result};
use arc_core::arc::{cycle_map, evolve_with, Phase};
use arc_core::negf::transmission;
use arc_core::ness::CrGenerator;
use arc_core::observables::{currents, osee};
use arc_core::sweep::{
    default_half_width, default_shift, heuristic_cr_gamma, lin_space, log_space, mean_error_at, moving_average_error,
    optimal_action, phase_diagram, power_law_fit, protocol_at, search_optimal_action, thermal_collapse, thermal_length,
    turnover, Workspace,
};
use arc_core::{Junction, Protocol};
use clap::ValueEnum;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Continuum current and transmission.
    Reference,
    /// Current versus time from the empty-system initial state.
    Timeseries,
    /// Steady states at the configured points.
    Ness,
    /// Current versus γ under continuous relaxation, plus the crossing heuristic.
    Turnover,
    /// Error and cost over a (γτ, τ̃) grid.
    PhaseDiagram,
    /// Best action at each configured γτ.
    Optimal,
    /// Averaged error versus reservoir size.
    Scaling,
    /// Periodic-refresh error rescaled by the thermal length.
    Collapse,
    /// Operator-space entanglement across every cut.
    Osee,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Reference => "reference",
            Experiment::Timeseries => "timeseries",
            Experiment::Ness => "ness",
            Experiment::Turnover => "turnover",
            Experiment::PhaseDiagram => "phase_diagram",
            Experiment::Optimal => "optimal",
            Experiment::Scaling => "scaling",
            Experiment::Collapse => "collapse",
            Experiment::Osee => "osee",
        }
    }
}

pub fn run(exp: Experiment, cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let junction = cfg.model.junction()?;
    match exp {
        Experiment::Reference => reference(cfg, junction, out),
        Experiment::Timeseries => timeseries(cfg, junction, out),
        Experiment::Ness => ness(cfg, junction, out),
        Experiment::Turnover => turnover_run(cfg, junction, out),
        Experiment::PhaseDiagram => phase(cfg, junction, out),
        Experiment::Optimal => optimal(cfg, junction, out),
        Experiment::Scaling => scaling(cfg, junction, out),
        Experiment::Collapse => collapse(cfg, junction, out),
        Experiment::Osee => osee_run(cfg, junction, out),
    }
}

fn workspace(cfg: &RunConfig, junction: Junction) -> Result<Workspace> {
    Ok(Workspace::new(junction, Some(&cfg.quadrature), cfg.solver)?)
}

fn name_for(exp: &str, j: &Junction) -> String {
    file_name(exp, Some(j.n_modes()), Some(j.left.temperature))
}

fn label(p: &Point) -> Vec<String> {
    vec![p.label()]
}

fn reference(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let r = arc_core::reference(&junction, &cfg.quadrature)?;
    let rows: Vec<Vec<String>> = lin_space(-2.0, 2.0, 401)
        .into_iter()
        .map(|w| Ok(vec![f(w), f(transmission(&junction, w)?)]))
        .collect::<Result<_>>()?;
    out.table(&name_for("reference", &junction), &["omega", "transmission"], &rows)?;
    Ok(json!({
        "current": r.current,
        "current_error": r.current_error,
        "corr_error": r.corr_error,
        "spectral_deficit": r.spectral_deficit,
        "evaluations": r.evaluations,
        "reservoir_time": junction.reservoir_time(),
        "system_time": junction.system_time(),
        "rise_time": junction.rise_time(),
    }))
}

fn timeseries(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let ts = &cfg.timeseries;
    if !(ts.duration > 0.0) || ts.samples < 2 {
        bail!("timeseries: need duration > 0 and at least two samples");
    }
    let ws = workspace(cfg, junction)?;
    let i0 = ws.reference_current().unwrap_or(f64::NAN);
    let c0 = ws.h.initial_correlation();
    let mut rows = Vec::new();
    for pt in &ts.points {
        let protocol = protocol_at(pt.gamma_tau.0, pt.action)?;
        let mut push = |t: f64, phase: &str, c: &ndarray::Array2<arc_core::C64>| {
            let r = currents(c, &ws.h);
            rows.push(vec![pt.label(), f(pt.gamma_tau.0), f(pt.action), f(t), phase.to_string(), f(r.i), f(r.i_ls), f(r.i_sr), f(r.i / i0)]);
        };
        match protocol {
            Protocol::Continuous { gamma } => {
                let gen = CrGenerator::new(&ws.h, gamma)?;
                let c_inf = gen.ness(&ws.options)?.corr;
                let times = lin_space(0.0, ts.duration, ts.samples);
                for (t, c) in times.iter().zip(gen.trajectory(&c0, &c_inf, &times)) {
                    push(*t, "continuous", &c);
                }
            }
            Protocol::Cycle(params) => {
                let map = cycle_map(&ws.h, &ws.propagator, params)?;
                let cycles = (ts.duration / params.tau).ceil().max(1.0) as usize;
                let intra: Vec<f64> = (1..ts.intra.max(1)).map(|k| k as f64 * params.tau / ts.intra as f64).collect();
                evolve_with(&c0, &map, &ws.propagator, cycles, &intra, |_, t, phase, c| match phase {
                    Phase::Within => push(t, "within", c),
                    Phase::BeforeDissipation => push(t, "before_dissipation", c),
                    Phase::Start => {}
                });
            }
        }
    }
    out.table(
        &name_for("timeseries", &ws.junction),
        &["protocol", "gamma_tau", "action", "time", "phase", "current", "i_ls", "i_sr", "ratio"],
        &rows,
    )?;
    Ok(json!({ "reference": i0, "rows": rows.len() }))
}

fn ness(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let ws = workspace(cfg, junction)?;
    let mut rows = Vec::new();
    for pt in &cfg.ness.points {
        match protocol_at(pt.gamma_tau.0, pt.action).and_then(|p| ws.evaluate(p, cfg.ness.osee)) {
            Ok(r) => rows.push((label(pt), r)),
            Err(e) => out.fail(format!("ness {pt:?}"), e),
        }
    }
    out.results(&name_for("ness", &ws.junction), &["protocol"], &rows)?;
    Ok(json!({
        "reference": ws.reference_current(),
        "points": rows.iter().map(|(l, r)| json!({"protocol": l[0], "current": r.current, "ratio": r.current / r.reference, "sigma_sq": r.sigma_sq, "s_o": r.s_o})).collect::<Vec<_>>(),
    }))
}

fn turnover_run(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let tc = &cfg.turnover;
    let ws = workspace(cfg, junction.clone())?;
    let curve = turnover(&ws, &tc.gammas()?)?;
    let rows: Vec<_> = curve.iter().map(|r| (vec!["cr".to_string()], *r)).collect();
    out.results(&name_for("turnover", &junction), &["protocol"], &rows)?;
    let mut summary = json!({ "reference": ws.reference_current() });
    if tc.heuristic {
        let delta = tc.shift.unwrap_or_else(|| default_shift(&junction));
        let mut found = Vec::new();
        let mut samples = Vec::new();
        for (tag, shift) in [("nominal", delta), ("half", 0.5 * delta), ("double", 2.0 * delta)] {
            match heuristic_cr_gamma(&junction, shift, &tc.search, &cfg.solver) {
                Ok(h) => {
                    for s in &h.samples {
                        samples.push(vec![tag.to_string(), f(shift), f(s.gamma), f(s.aligned), f(s.shifted)]);
                    }
                    found.push(json!({"shift": tag, "delta": shift, "gamma": h.gamma, "action": 2.0 / h.gamma, "crossings": h.crossings.len()}));
                }
                Err(e) => out.fail(format!("heuristic shift {shift}"), e),
            }
        }
        out.table(&name_for("heuristic", &junction), &["shift", "delta", "gamma", "aligned", "shifted"], &samples)?;
        summary["heuristic"] = Value::Array(found);
    }
    Ok(summary)
}

fn phase(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let ws = workspace(cfg, junction)?;
    let grid = cfg.phase_diagram.grid(ws.junction.reservoir_time())?;
    let points = phase_diagram(&ws, &grid, cfg.phase_diagram.osee)?;
    let mut ok = Vec::new();
    for p in points {
        match p.outcome {
            Ok(r) => ok.push((vec![], r)),
            Err(e) => out.fail(format!("grid γτ={} τ̃={}", p.gamma_tau, p.action), e),
        }
    }
    out.results(&name_for("phase_diagram", &ws.junction), &[], &ok)?;

    // Best averaged error along each row.
    let half = default_half_width(&ws.junction);
    let mut best = Vec::new();
    for &g in &grid.gamma_tau {
        let curve: Vec<(f64, f64)> = ok.iter().filter(|(_, r)| r.gamma_tau == g).map(|(_, r)| (r.action, r.sigma_sq)).collect();
        if let Some((a, m)) = optimal_action(&moving_average_error(&curve, half)) {
            best.push(vec![f(g), f(a), f(m)]);
        }
    }
    out.table(&name_for("phase_optimum", &ws.junction), &["gamma_tau", "action", "mean_sigma_sq"], &best)?;
    Ok(json!({
        "rows": grid.gamma_tau.len(),
        "columns": grid.actions.len(),
        "window_points": grid.min_window_points(half),
        "evaluated": ok.len(),
    }))
}

fn coarse_actions(cfg: &RunConfig, j: &Junction) -> Result<Vec<f64>> {
    match &cfg.optimal.coarse {
        Some(axis) => axis.values(),
        None => Ok(log_space(j.rise_time(), 2.0 * j.reservoir_time(), 16)),
    }
}

fn optimal(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let ws = workspace(cfg, junction)?;
    let half = cfg.optimal.half_width.unwrap_or_else(|| default_half_width(&ws.junction));
    let coarse = coarse_actions(cfg, &ws.junction)?;
    let mut best = Vec::new();
    let mut evaluated = Vec::new();
    let mut summary = Vec::new();
    for g in &cfg.optimal.gamma_tau {
        match search_optimal_action(&ws, g.0, &coarse, half, cfg.optimal.candidates.max(1)) {
            Ok(o) => {
                best.push((vec![f(o.mean_sigma_sq)], o.result));
                evaluated.extend(o.evaluated.iter().map(|r| (vec![], *r)));
                summary.push(json!({"gamma_tau": g, "action": o.action, "mean_sigma_sq": o.mean_sigma_sq, "cost": o.result.cost}));
            }
            Err(e) => out.fail(format!("optimal γτ={}", g.0), e),
        }
    }
    out.results(&name_for("optimal", &ws.junction), &["mean_sigma_sq"], &best)?;
    out.results(&name_for("optimal_scan", &ws.junction), &[], &evaluated)?;
    Ok(json!({ "half_width": half, "optima": summary }))
}

fn scaling(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let sc = &cfg.scaling;
    if sc.n_modes.is_empty() {
        bail!("scaling.n_modes: empty");
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut add = |name: String, n: usize, action: f64, m: f64, cost: f64, rows: &mut Vec<Vec<String>>| {
        rows.push(vec![name.clone(), n.to_string(), f(action), f(m), f(m.sqrt()), f(cost)]);
        match curves.iter_mut().find(|(k, _)| *k == name) {
            Some((_, c)) => c.push((n as f64, m.sqrt())),
            None => curves.push((name, vec![(n as f64, m.sqrt())])),
        }
    };
    for &n in &sc.n_modes {
        let j = junction.clone().with_n_modes(n);
        let ws = workspace(cfg, j.clone()).with_context(|| format!("N_W = {n}"))?;
        let half = default_half_width(&j);
        let tau_w = j.reservoir_time();
        if sc.include_pr {
            match mean_error_at(&ws, f64::INFINITY, tau_w, half.min(0.9 * tau_w), sc.window_points) {
                Ok((m, r)) => add("pr".into(), n, tau_w, m, r[r.len() / 2].cost, &mut rows),
                Err(e) => out.fail(format!("PR N_W={n}"), e),
            }
        }
        if sc.include_cr {
            let res = heuristic_cr_gamma(&j, default_shift(&j), &cfg.turnover.search, &cfg.solver)
                .and_then(|h| mean_error_at(&ws, 0.0, 2.0 / h.gamma, half, sc.window_points).map(|(m, r)| (h.gamma, m, r)));
            match res {
                Ok((g, m, r)) => add("cr".into(), n, 2.0 / g, m, r[r.len() / 2].cost, &mut rows),
                Err(e) => out.fail(format!("CR N_W={n}"), e),
            }
        }
        let coarse = log_space(4.0_f64.min(tau_w), 1.9 * tau_w, 12);
        for g in &sc.gamma_tau {
            match search_optimal_action(&ws, g.0, &coarse, half, 2) {
                Ok(o) => add(format!("arc{}", g.0), n, o.action, o.mean_sigma_sq, o.result.cost, &mut rows),
                Err(e) => out.fail(format!("ARC γτ={} N_W={n}", g.0), e),
            }
        }
    }
    let t = junction.left.temperature;
    out.table(&file_name("scaling", None, Some(t)), &["protocol", "n_modes", "action", "mean_sigma_sq", "mean_sigma", "cost"], &rows)?;
    let fits: Vec<Value> = curves
        .iter()
        .map(|(name, pts)| match power_law_fit(pts) {
            Ok(fit) => json!({"protocol": name, "nu": -fit.exponent, "nu_error": fit.exponent_error(), "prefactor": fit.prefactor}),
            Err(e) => json!({"protocol": name, "error": e.to_string()}),
        })
        .collect();
    Ok(json!({ "fits": fits }))
}

fn collapse(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let cc = &cfg.collapse;
    if !(cc.x_min > 0.0 && cc.x_max >= cc.x_min && cc.points >= 1) {
        bail!("collapse: need 0 < x_min ≤ x_max and at least one point");
    }
    let mut rows = Vec::new();
    let mut pooled = Vec::new();
    for &t in &cc.temperatures {
        let nth = thermal_length(t);
        let mut ns: Vec<usize> = log_space(cc.x_min, cc.x_max, cc.points).iter().map(|x| (x * nth).round().max(2.0) as usize).collect();
        ns.dedup();
        match thermal_collapse(&junction, &[t], &ns, &cfg.quadrature, &cfg.solver, cc.window_points) {
            Ok(pts) => {
                for (p, _) in pts {
                    rows.push(vec![f(p.temperature), p.n_modes.to_string(), f(p.n_th), f(p.x), f(p.y), f(p.mean_sigma)]);
                    pooled.push((p.x, p.y));
                }
            }
            Err(e) => out.fail(format!("collapse T={t}"), e),
        }
    }
    out.table(&file_name("collapse", None, None), &["temperature", "n_modes", "n_th", "x", "y", "mean_sigma"], &rows)?;
    let slope = |lo: f64, hi: f64| {
        let pts: Vec<_> = pooled.iter().copied().filter(|p| p.0 >= lo && p.0 <= hi).collect();
        power_law_fit(&pts).map(|f| f.exponent).ok()
    };
    Ok(json!({ "slope_below_1": slope(0.0, 1.0), "slope_above_2": slope(2.0, f64::INFINITY) }))
}

fn osee_run(cfg: &RunConfig, junction: Junction, out: &mut Output) -> Result<Value> {
    let ws = workspace(cfg, junction)?;
    let pt = cfg.osee.point;
    let ness = ws.solve(protocol_at(pt.gamma_tau.0, pt.action)?)?;
    let c = ness.measured_state(&ws.h, &ws.propagator);
    let mixed = ws.order.cut_position;
    let cuts: Vec<usize> = if cfg.osee.all_cuts { (0..=ws.h.dim()).collect() } else { vec![mixed] };
    let mut rows = Vec::new();
    let mut at_mixed = f64::NAN;
    for cut in cuts {
        let s = osee(&c, &ws.order, cut)?.s_o;
        if cut == mixed {
            at_mixed = s;
        }
        rows.push(vec![cut.to_string(), f(s), (cut == mixed).to_string()]);
    }
    out.table(&name_for("osee", &ws.junction), &["cut", "s_o", "mixed_cut"], &rows)?;
    Ok(json!({ "protocol": pt, "cut_position": mixed, "s_o": at_mixed, "current": currents(&c, &ws.h).i }))
}
