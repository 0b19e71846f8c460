//! Stern-Gerlach splitting of a spin-1/2 wavepacket and the branch counting
//! that turns the split into observed frequencies.
//!
//! - [`spin`]: spin states at an angle to the measurement axis, Born weights
//!   and the branch multiplicities `f = 2q`, `g = 2(1 − q)`.
//! - [`dynamics`]: split-operator propagation through the field gradient.
//! - [`branching`]: naive and weighted universe counting over `N` runs.
//! - [`analysis`]: naive vs weighted distributions, sampling, and the full
//!   simulation-to-counts pipeline.

pub mod analysis;
pub mod branching;
pub mod combinatorics;
pub mod dynamics;
pub mod spin;

pub use analysis::{born_convergence, compare_narratives, end_to_end, DistributionReport, EndToEndReport};
pub use branching::{
    closed_form, enumerate_tree, peak, sample_histories, BranchConfig, HistoryTally, Mode, ObserverHistory,
};
pub use dynamics::{diagnostics, evolve, init_packet, projection_infidelity, PacketState, SgParams, SplitDiagnostics};
pub use spin::{born_weight, branch_weights, make_skew_state, BranchWeights, Spinor};
