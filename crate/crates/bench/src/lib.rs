//! Shared fixtures for the benchmarks.

use arc_core::sweep::Workspace;
use arc_core::{Junction, QuadSpec, SolverOptions};

/// Resonant-level junction at the default temperature and bias.
pub fn junction(n_modes: usize) -> Junction {
    Junction::resonant_level(n_modes, 1.0 / 40.0, 0.5)
}

pub fn workspace(n_modes: usize, with_reference: bool) -> Workspace {
    let quad = QuadSpec::default();
    Workspace::new(junction(n_modes), with_reference.then_some(&quad), SolverOptions::default()).expect("workspace")
}
