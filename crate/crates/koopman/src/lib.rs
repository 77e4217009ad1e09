//! Spectral decomposition of the Koopman operator of measure-preserving
//! torus maps, computed through permutation (periodic) approximations.
//!
//! The pipeline has three stages:
//!
//! 1. **Discretize the map.** Partition 𝕋^m into ñ^m equal cubes
//!    ([`lattice::LatticePartition`]) and replace the map by a bijection of
//!    cells, either analytically from its primitive structure or by maximum
//!    bipartite matching of a neighborhood graph ([`discretizer`]).
//! 2. **Sample the observable** at the cell midpoints
//!    ([`observables::Observable::sample`]).
//! 3. **Read the spectrum off the permutation.** Its cycles are diagonalized
//!    by per-cycle DFTs, giving spectral projections onto arcs of the unit
//!    circle and mollified spectral density functions ([`spectral`]).
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! outputs. [`oracles`] holds closed-form spectra for the classical examples
//! and a dense eigendecomposition for small instances, used to validate the
//! fast path.

pub mod discretizer;
pub mod error;
pub mod interval;
pub mod io;
pub mod lattice;
pub mod maps;
pub mod matching;
pub mod mollifier;
pub mod observables;
pub mod oracles;
pub mod spectral;

pub use discretizer::{discretize_analytic, discretize_matching, quality_report, PermutationMap};
pub use error::{Error, Result};
pub use interval::{circle_distance, wrap_angle, Interval};
pub use lattice::{torus_distance, LatticePartition, LinearIndex, MultiIndex, TorusPoint};
pub use maps::{MapPrimitive, TorusMap};
pub use mollifier::Mollifier;
pub use observables::{builtin_observable, fourier_modes, Observable, ObservableFn};
pub use spectral::{
    atoms, autocorrelation, cycle_decompose, density, koopman_apply, project,
    CycleDecomposition, ProjectionMode, SpectralAtom, SpectralAtomSet,
};
