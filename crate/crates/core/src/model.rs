//! Junction model: reservoir discretization, single-particle Hamiltonian
//! assembly, equilibrium occupations and the mixed-basis mode ordering.
//!
//! Storage order of the assembled Hamiltonian is always `L ⊕ S ⊕ R`: the
//! `N_W` left reservoir eigenmodes (ascending frequency), the `N_S` system
//! sites, then the `N_W` right reservoir eigenmodes. All quantities are in
//! units of the reservoir hopping `ω₀` (frequencies) and `1/ω₀` (times).

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};
use crate::linalg::{hermiticity_error, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    LeftReservoir,
    System,
    RightReservoir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lead {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDescriptor {
    pub id: usize,
    pub region: Region,
    /// Reservoir eigenfrequency `ω_k`, or the on-site frequency for system sites.
    pub frequency: f64,
}

impl ModeDescriptor {
    pub fn lead(&self) -> Option<Lead> {
        match self.region {
            Region::LeftReservoir => Some(Lead::Left),
            Region::RightReservoir => Some(Lead::Right),
            Region::System => None,
        }
    }

    pub fn is_reservoir(&self) -> bool {
        self.region != Region::System
    }
}

fn default_hopping() -> f64 {
    1.0
}

/// A finite 1D tight-binding chain standing in for one reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSpec {
    pub n_modes: usize,
    #[serde(default = "default_hopping")]
    pub hopping: f64,
    #[serde(default = "default_hopping")]
    pub boundary_coupling: f64,
    #[serde(default)]
    pub frequency_shift: f64,
    pub temperature: f64,
    pub chemical_potential: f64,
}

impl ReservoirSpec {
    pub fn new(n_modes: usize, temperature: f64, chemical_potential: f64) -> Self {
        ReservoirSpec {
            n_modes,
            hopping: 1.0,
            boundary_coupling: 1.0,
            frequency_shift: 0.0,
            temperature,
            chemical_potential,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(ArcError::InvalidParameter("reservoir needs at least one mode".into()));
        }
        if !(self.hopping > 0.0 && self.hopping.is_finite()) {
            return Err(ArcError::InvalidParameter(format!(
                "reservoir hopping must be positive, got {}",
                self.hopping
            )));
        }
        if !(self.temperature >= 0.0) {
            return Err(ArcError::InvalidParameter(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if !self.boundary_coupling.is_finite()
            || !self.chemical_potential.is_finite()
            || !self.frequency_shift.is_finite()
        {
            return Err(ArcError::InvalidParameter("non-finite reservoir parameter".into()));
        }
        Ok(())
    }

    pub fn occupation(&self, frequency: f64) -> f64 {
        fermi_occupation(frequency, self.temperature, self.chemical_potential)
    }

    /// Lieb–Robinson traversal time `N_W / (2ω₀)` of the finite chain.
    pub fn traversal_time(&self) -> f64 {
        self.n_modes as f64 / (2.0 * self.hopping)
    }

    /// Mean spacing of the discrete levels across the band `4ω₀`.
    pub fn mean_level_spacing(&self) -> f64 {
        4.0 * self.hopping / (self.n_modes as f64 + 1.0)
    }
}

/// Eigenfrequencies of an open chain and their couplings to the contact site.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedReservoir {
    /// Ascending eigenfrequencies `ω_k` (including any frequency shift).
    pub frequencies: Vec<f64>,
    /// Coupling `v_k` between eigenmode `k` and the system contact site.
    pub couplings: Vec<f64>,
}

/// Closed-form eigensystem of an `N_W`-site open chain with hopping `ω₀`:
/// `ω_k = 2ω₀ cos(kπ/(N_W+1))`, with the boundary site carrying amplitude
/// `√(2/(N_W+1)) sin(kπ/(N_W+1))` in mode `k`.
pub fn discretize_reservoir(spec: &ReservoirSpec) -> Result<DiscretizedReservoir> {
    spec.validate()?;
    let n = spec.n_modes;
    let denom = (n + 1) as f64;
    let norm = (2.0 / denom).sqrt();
    let mut frequencies = Vec::with_capacity(n);
    let mut couplings = Vec::with_capacity(n);
    // k = n..1 gives ascending cos(kπ/(n+1)).
    for k in (1..=n).rev() {
        let theta = k as f64 * PI / denom;
        frequencies.push(2.0 * spec.hopping * theta.cos() + spec.frequency_shift);
        couplings.push(spec.boundary_coupling * norm * theta.sin());
    }
    Ok(DiscretizedReservoir { frequencies, couplings })
}

/// Fermi–Dirac occupation; `T = 0` gives the step function with `f(μ) = 1/2`.
pub fn fermi_occupation(frequency: f64, temperature: f64, chemical_potential: f64) -> f64 {
    let de = frequency - chemical_potential;
    if temperature == 0.0 {
        return if de > 0.0 {
            0.0
        } else if de < 0.0 {
            1.0
        } else {
            0.5
        };
    }
    let x = de / temperature;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Quadratic system Hamiltonian with the sites that touch each reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub hamiltonian: Array2<C64>,
    pub left_contact: usize,
    pub right_contact: usize,
}

impl SystemSpec {
    /// Three-site resonant level: on-site `ω_S` on the middle site and
    /// hopping `v_S` to both neighbours.
    pub fn resonant_level(omega_s: f64, v_s: f64) -> Self {
        let mut h = Array2::zeros((3, 3));
        h[[1, 1]] = C64::new(omega_s, 0.0);
        for (i, j) in [(0, 1), (1, 2)] {
            h[[i, j]] = C64::new(v_s, 0.0);
            h[[j, i]] = C64::new(v_s, 0.0);
        }
        SystemSpec { hamiltonian: h, left_contact: 0, right_contact: 2 }
    }

    /// Uniform chain of `n` sites with on-site `onsite` and hopping `hopping`.
    pub fn uniform_chain(n: usize, onsite: f64, hopping: f64) -> Self {
        let mut h = Array2::zeros((n, n));
        for i in 0..n {
            h[[i, i]] = C64::new(onsite, 0.0);
            if i + 1 < n {
                h[[i, i + 1]] = C64::new(hopping, 0.0);
                h[[i + 1, i]] = C64::new(hopping, 0.0);
            }
        }
        SystemSpec { hamiltonian: h, left_contact: 0, right_contact: n.saturating_sub(1) }
    }

    pub fn n_sites(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.hamiltonian.nrows();
        if n == 0 {
            return Err(ArcError::InvalidParameter("system needs at least one site".into()));
        }
        if self.hamiltonian.ncols() != n {
            return Err(ArcError::DimensionMismatch { expected: n, found: self.hamiltonian.ncols() });
        }
        if self.left_contact >= n || self.right_contact >= n {
            return Err(ArcError::InvalidParameter(format!(
                "contact sites ({}, {}) out of range for {n} system sites",
                self.left_contact, self.right_contact
            )));
        }
        let scale = self.hamiltonian.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        if hermiticity_error(&self.hamiltonian) > 1e-12 * scale {
            return Err(ArcError::InvalidParameter("system Hamiltonian is not Hermitian".into()));
        }
        Ok(())
    }

    /// Transit time `N_S / (2 v_S)`, with `v_S` the largest nearest-neighbour
    /// hopping magnitude.
    pub fn transit_time(&self) -> f64 {
        let n = self.n_sites();
        let v = (0..n.saturating_sub(1))
            .map(|i| self.hamiltonian[[i, i + 1]].norm())
            .fold(0.0, f64::max);
        if v == 0.0 {
            f64::INFINITY
        } else {
            n as f64 / (2.0 * v)
        }
    }
}

/// System plus the two reservoirs.
#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub system: SystemSpec,
    pub left: ReservoirSpec,
    pub right: ReservoirSpec,
}

impl Junction {
    /// Resonant-level example: `ω_S = v_S = ω₀/2`, unit hopping and boundary
    /// coupling, bias applied symmetrically as `μ_L = −μ_R = bias/2`.
    pub fn resonant_level(n_modes: usize, temperature: f64, bias: f64) -> Self {
        Junction {
            system: SystemSpec::resonant_level(0.5, 0.5),
            left: ReservoirSpec::new(n_modes, temperature, bias / 2.0),
            right: ReservoirSpec::new(n_modes, temperature, -bias / 2.0),
        }
    }

    pub fn with_n_modes(mut self, n_modes: usize) -> Self {
        self.left.n_modes = n_modes;
        self.right.n_modes = n_modes;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.left.temperature = temperature;
        self.right.temperature = temperature;
        self
    }

    /// Shift the right reservoir's levels by `shift` relative to the left.
    pub fn with_right_shift(mut self, shift: f64) -> Self {
        self.right.frequency_shift = shift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.left.validate()?;
        self.right.validate()
    }

    pub fn n_modes(&self) -> usize {
        self.left.n_modes
    }

    /// `τ_W = N_W / (2ω₀)`.
    pub fn reservoir_time(&self) -> f64 {
        self.left.traversal_time()
    }

    /// `τ_S = N_S / (2v_S)`.
    pub fn system_time(&self) -> f64 {
        self.system.transit_time()
    }

    /// `τ* = π/W` with bandwidth `W = 4ω₀`.
    pub fn rise_time(&self) -> f64 {
        PI / (4.0 * self.left.hopping)
    }

    pub fn assemble(&self) -> Result<SingleParticleHamiltonian> {
        assemble(&self.system, &self.left, &self.right)
    }
}

/// One reservoir–system coupling `v_{ik}` (matrix element `H̄[site, mode]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub mode: usize,
    pub site: usize,
    pub value: C64,
}

#[derive(Debug, Clone)]
pub struct SingleParticleHamiltonian {
    pub matrix: Array2<C64>,
    pub modes: Vec<ModeDescriptor>,
    pub couplings: Vec<Coupling>,
    /// Isolated-equilibrium occupation `f^α(ω_k)` of each reservoir mode;
    /// zero on system sites.
    pub occupations: Array1<f64>,
    /// Storage range of the system block.
    pub system: Range<usize>,
}

impl SingleParticleHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_system(&self) -> usize {
        self.system.len()
    }

    /// `δ_{m∈LR}` for every mode.
    pub fn reservoir_mask(&self) -> Array1<f64> {
        self.modes.iter().map(|m| if m.is_reservoir() { 1.0 } else { 0.0 }).collect()
    }

    pub fn reservoir_indices(&self) -> Vec<usize> {
        self.modes.iter().filter(|m| m.is_reservoir()).map(|m| m.id).collect()
    }

    pub fn couplings_to(&self, lead: Lead) -> impl Iterator<Item = &Coupling> {
        self.couplings.iter().filter(move |c| self.modes[c.mode].lead() == Some(lead))
    }

    /// Initial state: isolated reservoir equilibria and a maximally mixed
    /// system (`C_S = 1/2`).
    pub fn initial_correlation(&self) -> Array2<C64> {
        let n = self.dim();
        let mut c = Array2::zeros((n, n));
        for m in &self.modes {
            let occ = if m.is_reservoir() { self.occupations[m.id] } else { 0.5 };
            c[[m.id, m.id]] = C64::new(occ, 0.0);
        }
        c
    }
}

/// Build `H̄` over `L ⊕ S ⊕ R` with reservoirs in their eigenbasis.
pub fn assemble(
    system: &SystemSpec,
    left: &ReservoirSpec,
    right: &ReservoirSpec,
) -> Result<SingleParticleHamiltonian> {
    system.validate()?;
    let l = discretize_reservoir(left)?;
    let r = discretize_reservoir(right)?;
    let n_l = l.frequencies.len();
    let n_s = system.n_sites();
    let n_r = r.frequencies.len();
    let n = n_l + n_s + n_r;
    let s0 = n_l;
    let r0 = n_l + n_s;

    let mut matrix = Array2::from_elem((n, n), ZERO);
    let mut modes = Vec::with_capacity(n);
    let mut couplings = Vec::with_capacity(n_l + n_r);
    let mut occupations = Array1::zeros(n);

    for (k, (&w, &v)) in l.frequencies.iter().zip(&l.couplings).enumerate() {
        matrix[[k, k]] = C64::new(w, 0.0);
        modes.push(ModeDescriptor { id: k, region: Region::LeftReservoir, frequency: w });
        occupations[k] = left.occupation(w);
        let site = s0 + system.left_contact;
        if v != 0.0 {
            matrix[[k, site]] = C64::new(v, 0.0);
            matrix[[site, k]] = C64::new(v, 0.0);
            couplings.push(Coupling { mode: k, site, value: C64::new(v, 0.0) });
        }
    }
    for i in 0..n_s {
        for j in 0..n_s {
            matrix[[s0 + i, s0 + j]] = system.hamiltonian[[i, j]];
        }
        modes.push(ModeDescriptor {
            id: s0 + i,
            region: Region::System,
            frequency: system.hamiltonian[[i, i]].re,
        });
    }
    for (k, (&w, &v)) in r.frequencies.iter().zip(&r.couplings).enumerate() {
        let id = r0 + k;
        matrix[[id, id]] = C64::new(w, 0.0);
        modes.push(ModeDescriptor { id, region: Region::RightReservoir, frequency: w });
        occupations[id] = right.occupation(w);
        let site = s0 + system.right_contact;
        if v != 0.0 {
            matrix[[id, site]] = C64::new(v, 0.0);
            matrix[[site, id]] = C64::new(v, 0.0);
            couplings.push(Coupling { mode: id, site, value: C64::new(v, 0.0) });
        }
    }

    Ok(SingleParticleHamiltonian { matrix, modes, couplings, occupations, system: s0..r0 })
}

/// Mixed-basis ordering: reservoir eigenmodes of both leads merged by
/// frequency (left before right on ties), system block inserted before the
/// first reservoir mode with non-negative frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedBasisOrder {
    /// `permutation[position] = mode id`.
    pub permutation: Vec<usize>,
    /// Number of modes in the left part `A` of the bipartition.
    pub cut_position: usize,
}

impl MixedBasisOrder {
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.permutation.len()];
        for (pos, &id) in self.permutation.iter().enumerate() {
            inv[id] = pos;
        }
        inv
    }

    pub fn with_cut(mut self, cut: usize) -> Self {
        self.cut_position = cut.min(self.permutation.len());
        self
    }

    /// Mode ids on the left of the cut.
    pub fn left_part(&self) -> &[usize] {
        &self.permutation[..self.cut_position]
    }
}

pub fn mixed_basis_order(h: &SingleParticleHamiltonian) -> MixedBasisOrder {
    let mut reservoir: Vec<&ModeDescriptor> = h.modes.iter().filter(|m| m.is_reservoir()).collect();
    let lead_rank = |m: &ModeDescriptor| if m.region == Region::LeftReservoir { 0 } else { 1 };
    reservoir.sort_by(|a, b| {
        a.frequency
            .total_cmp(&b.frequency)
            .then(lead_rank(a).cmp(&lead_rank(b)))
    });
    let split = reservoir.iter().position(|m| m.frequency >= 0.0).unwrap_or(reservoir.len());
    let mut permutation: Vec<usize> = reservoir[..split].iter().map(|m| m.id).collect();
    permutation.extend(h.system.clone());
    permutation.extend(reservoir[split..].iter().map(|m| m.id));
    MixedBasisOrder { permutation, cut_position: split }
}
