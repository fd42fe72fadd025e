//! Accumulative reservoir construction (ARC) for non-interacting fermionic
//! junctions.
//!
//! A finite system `S` is coupled to two finite reservoirs `L` and `R`,
//! each relaxed toward its own equilibrium either continuously (CR),
//! by periodic refresh (PR), or by the general ARC cycle interpolating
//! between the two. Everything is expressed through single-particle
//! correlation matrices `C_mn = ⟨c†_n c_m⟩`.

pub mod arc;
pub mod error;
pub mod linalg;
pub mod model;
pub mod negf;
pub mod ness;
pub mod observables;
pub mod quad;
pub mod sweep;

pub use error::{ArcError, Result};
pub use linalg::C64;
pub use model::{
    assemble, discretize_reservoir, fermi_occupation, mixed_basis_order, Junction, Lead,
    MixedBasisOrder, ModeDescriptor, Region, ReservoirSpec, SingleParticleHamiltonian, SystemSpec,
};
pub use negf::{landauer_current, reference, reference_correlation, QuadSpec, ReferenceResult};
pub use arc::{cycle_map, evolve, ArcParams, CycleMap, Propagator, Relaxation, Trajectory};
pub use ness::{solve_ness, LyapunovSolution, Method, Ness, Protocol, SolverOptions};
pub use observables::{current_error, currents, osee, trace_distance, CurrentReading, ErrorReport, OseeReport};
pub use sweep::{params_from_action, phase_diagram, GridSpec, NessResult, Workspace};
