//! Run configuration.
//!
//! A single JSON document. Every section is optional and falls back to the
//! resonant-level defaults; a section that is present must be complete
//! where noted, and unknown keys are rejected everywhere.
//!
//! ```json
//! {
//!   "model": {
//!     "system": { "n_sites": 3, "omega_s": 0.5, "v_s": 0.5 },
//!     "reservoirs": { "n_modes": 128, "temperature": 0.025,
//!                     "mu_left": 0.25, "mu_right": -0.25,
//!                     "hopping": 1.0, "boundary_coupling": 1.0, "shift": 0.0 }
//!   },
//!   "units": "omega0",
//!   "quadrature": { "abs_tol": 1e-10, "max_panels": 20000 },
//!   "solver": { "condition_limit": 1e10, "tolerance": 1e-8 },
//!   "ness": { "points": [ { "gamma_tau": 1.0, "action": 37.3 } ], "osee": true },
//!   "seed": 0
//! }
//! ```
//!
//! `system` takes either `n_sites`/`omega_s`/`v_s` (a chain with hopping
//! `v_s` and on-site `omega_s` on every site not touching a reservoir) or a
//! real symmetric `matrix` with optional `left_contact`/`right_contact`.
//! In `points`, `gamma_tau = 0` selects continuous relaxation with
//! `γ = 2/action` and `"inf"` selects periodic refresh with `τ = action`.

use anyhow::{anyhow, bail, Context, Result};
use arc_core::sweep::{log_space, GridSpec, HeuristicOptions};
use arc_core::{Junction, QuadSpec, ReservoirSpec, SolverOptions, SystemSpec, C64};
use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// Float that also accepts the strings `"inf"` and `"infinity"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Real(x)),
            Raw::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(Real(f64::INFINITY)),
                other => other
                    .parse()
                    .map(Real)
                    .map_err(|_| serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_contact: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_contact: Option<usize>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    pub n_modes: usize,
    pub temperature: f64,
    pub mu_left: f64,
    pub mu_right: f64,
    #[serde(default = "one")]
    pub hopping: f64,
    #[serde(default = "one")]
    pub boundary_coupling: f64,
    /// Rigid shift of the right reservoir spectrum.
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub system: SystemConfig,
    pub reservoirs: ReservoirConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            system: SystemConfig {
                n_sites: Some(3),
                omega_s: Some(0.5),
                v_s: Some(0.5),
                matrix: None,
                left_contact: None,
                right_contact: None,
            },
            reservoirs: ReservoirConfig {
                n_modes: 128,
                temperature: 1.0 / 40.0,
                mu_left: 0.25,
                mu_right: -0.25,
                hopping: 1.0,
                boundary_coupling: 1.0,
                shift: 0.0,
            },
        }
    }
}

impl SystemConfig {
    pub fn to_spec(&self) -> Result<SystemSpec> {
        let mut spec = if let Some(rows) = &self.matrix {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                bail!("model.system.matrix: expected a non-empty square matrix");
            }
            let h = Array2::from_shape_fn((n, n), |(i, j)| C64::new(rows[i][j], 0.0));
            SystemSpec { hamiltonian: h, left_contact: 0, right_contact: n - 1 }
        } else {
            let n = self.n_sites.ok_or_else(|| anyhow!("model.system: missing field `n_sites` (or give `matrix`)"))?;
            let omega_s = self.omega_s.ok_or_else(|| anyhow!("model.system: missing field `omega_s`"))?;
            let v_s = self.v_s.ok_or_else(|| anyhow!("model.system: missing field `v_s`"))?;
            if n == 0 {
                bail!("model.system.n_sites: must be at least 1");
            }
            let mut spec = SystemSpec::uniform_chain(n, 0.0, v_s);
            for i in 1..n.saturating_sub(1) {
                spec.hamiltonian[[i, i]] = C64::new(omega_s, 0.0);
            }
            spec
        };
        if let Some(l) = self.left_contact {
            spec.left_contact = l;
        }
        if let Some(r) = self.right_contact {
            spec.right_contact = r;
        }
        spec.validate().context("model.system")?;
        Ok(spec)
    }
}

impl ModelConfig {
    pub fn junction(&self) -> Result<Junction> {
        let r = &self.reservoirs;
        let lead = |mu: f64, shift: f64| ReservoirSpec {
            n_modes: r.n_modes,
            hopping: r.hopping,
            boundary_coupling: r.boundary_coupling,
            frequency_shift: shift,
            temperature: r.temperature,
            chemical_potential: mu,
        };
        let j = Junction { system: self.system.to_spec()?, left: lead(r.mu_left, 0.0), right: lead(r.mu_right, r.shift) };
        j.validate().context("model.reservoirs")?;
        Ok(j)
    }
}

/// One protocol coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub gamma_tau: Real,
    pub action: f64,
}

impl Point {
    pub fn new(gamma_tau: f64, action: f64) -> Self {
        Point { gamma_tau: Real(gamma_tau), action }
    }

    pub fn label(&self) -> String {
        match self.gamma_tau.0 {
            g if g == 0.0 => "cr".into(),
            g if g.is_infinite() => "pr".into(),
            g => format!("arc{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeseriesConfig {
    pub points: Vec<Point>,
    /// Total coherent time simulated.
    pub duration: f64,
    /// Samples of the continuous trajectory.
    pub samples: usize,
    /// Intra-cycle samples per cycle.
    pub intra: usize,
}

impl Default for TimeseriesConfig {
    fn default() -> Self {
        TimeseriesConfig {
            points: vec![
                Point::new(0.0, 2.0 / 0.084),
                Point::new(0.1, 37.90),
                Point::new(1.0, 37.30),
                Point::new(f64::INFINITY, 64.0),
            ],
            duration: 640.0,
            samples: 400,
            intra: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NessConfig {
    pub points: Vec<Point>,
    pub osee: bool,
}

impl Default for NessConfig {
    fn default() -> Self {
        NessConfig { points: TimeseriesConfig::default().points, osee: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurnoverConfig {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub points: usize,
    /// Run the shifted-reservoir crossing as well.
    pub heuristic: bool,
    /// Relative L/R offset; default half the mean level spacing.
    pub shift: Option<f64>,
    pub search: HeuristicOptions,
}

impl Default for TurnoverConfig {
    fn default() -> Self {
        TurnoverConfig {
            gamma_min: 1e-5,
            gamma_max: 1e3,
            points: 33,
            heuristic: true,
            shift: None,
            search: HeuristicOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max >= self.min && self.points >= 1) {
            bail!("axis needs 0 < min ≤ max and at least one point, got {self:?}");
        }
        Ok(log_space(self.min, self.max, self.points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseDiagramConfig {
    /// Rows; `null` uses 60 log-spaced values in [1e-2, 1e3] plus CR and PR.
    pub gamma_tau: Option<Vec<Real>>,
    /// Columns; `null` uses 120 log-spaced values in [0.1, 4τ_W].
    pub actions: Option<Axis>,
    pub osee: bool,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        PhaseDiagramConfig { gamma_tau: None, actions: None, osee: false }
    }
}

impl PhaseDiagramConfig {
    pub fn grid(&self, reservoir_time: f64) -> Result<GridSpec> {
        let mut grid = GridSpec::standard(reservoir_time);
        if let Some(rows) = &self.gamma_tau {
            grid.gamma_tau = rows.iter().map(|r| r.0).collect();
        }
        if let Some(axis) = &self.actions {
            grid.actions = axis.values().context("phase_diagram.actions")?;
        }
        grid.validate().context("phase_diagram")?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimalConfig {
    pub gamma_tau: Vec<Real>,
    /// Coarse scan; `null` uses 16 log-spaced actions in [τ*, 2τ_W].
    pub coarse: Option<Axis>,
    /// Averaging half-width; `null` uses τ_S/2.
    pub half_width: Option<f64>,
    pub candidates: usize,
}

impl Default for OptimalConfig {
    fn default() -> Self {
        OptimalConfig { gamma_tau: vec![Real(0.1), Real(1.0), Real(10.0)], coarse: None, half_width: None, candidates: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub n_modes: Vec<usize>,
    pub gamma_tau: Vec<Real>,
    pub include_cr: bool,
    pub include_pr: bool,
    /// Samples in each averaging window.
    pub window_points: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { n_modes: vec![128, 256, 512], gamma_tau: vec![Real(1.0)], include_cr: true, include_pr: true, window_points: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollapseConfig {
    pub temperatures: Vec<f64>,
    /// Range of `N_W / N_th`.
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub window_points: usize,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        CollapseConfig { temperatures: vec![0.1, 0.05, 0.025], x_min: 0.5, x_max: 10.0, points: 14, window_points: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OseeConfig {
    pub point: Point,
    /// Report every cut rather than only the mixed-basis one.
    pub all_cuts: bool,
}

impl Default for OseeConfig {
    fn default() -> Self {
        OseeConfig { point: Point::new(1.0, 37.30), all_cuts: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default = "default_units")]
    pub units: String,
    #[serde(default)]
    pub quadrature: QuadSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub timeseries: TimeseriesConfig,
    #[serde(default)]
    pub ness: NessConfig,
    #[serde(default)]
    pub turnover: TurnoverConfig,
    #[serde(default)]
    pub phase_diagram: PhaseDiagramConfig,
    #[serde(default)]
    pub optimal: OptimalConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub collapse: CollapseConfig,
    #[serde(default)]
    pub osee: OseeConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_units() -> String {
    "omega0".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Set `path` (dot separated) in `tree` to `raw`, parsed as JSON when
/// possible and as a string otherwise. Intermediate objects are created.
pub fn apply_override(tree: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("--set {path}: empty path component");
    }
    let mut node = tree;
    for (i, key) in keys.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("--set {path}: `{}` is not an object", keys[..i].join(".")))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!()
}

fn located<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("{origin}: invalid config at `{path}`: {}", e.into_inner())
    })
}

/// Parse a config document, apply `key=value` overrides and validate.
/// `text = None` starts from the defaults. An override into a section the
/// document leaves out starts from that section's defaults.
pub fn load(text: Option<&str>, origin: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut tree: Value = match text {
        Some(t) => located(t, origin)?,
        None => Value::Object(Default::default()),
    };
    if !tree.is_object() {
        bail!("{origin}: expected a JSON object at the top level");
    }
    if text.is_some() && overrides.is_empty() {
        // Keep line and column information for errors in the file itself.
        located::<RunConfig>(text.unwrap_or_default(), origin)?;
    }
    let defaults = serde_json::to_value(RunConfig::default())?;
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| anyhow!("--set expects key=value, got {o:?}"))?;
        let k = k.trim();
        let section = k.split('.').next().unwrap_or_default();
        if let (Some(obj), Some(d)) = (tree.as_object_mut(), defaults.get(section)) {
            obj.entry(section.to_string()).or_insert_with(|| d.clone());
        }
        apply_override(&mut tree, k, v.trim())?;
    }
    let origin = if overrides.is_empty() { origin.to_string() } else { format!("{origin} with overrides") };
    let cfg: RunConfig = located(&serde_json::to_string_pretty(&tree)?, &origin)?;
    if cfg.units != "omega0" {
        bail!("units: only \"omega0\" is supported, got {:?}", cfg.units);
    }
    cfg.model.junction()?;
    Ok(cfg)
}

impl TurnoverConfig {
    pub fn gammas(&self) -> Result<Vec<f64>> {
        Axis { min: self.gamma_min, max: self.gamma_max, points: self.points }.values().context("turnover")
    }
}
