//! Adiabatic Grover search weakly coupled to a bath.
//!
//! The register evolves under H(s) = 1 - (1-s)|psi0><psi0| - s|w><w|, which
//! reduces to a two-level problem on span{|w>, |w_perp>}. The failure
//! probability, i.e. the population of the excited level at t = T caused by
//! the bath, is computed to second order in the coupling by several
//! independent routes (see [`failure`]) and checked against brute force
//! ([`oracle`]).

pub mod error;
pub mod failure;
pub mod grover;
pub mod integrators;
pub mod oracle;
pub mod phase;
pub mod schedule;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use failure::{
    p1, p1_asymptotic, p1_frequency_domain, p1_markovian, p1_scaling_law, p1_time_domain, p1_time_domain_with_kernel,
    AsymptoticTerms, AsymptoticVariant, EngineOptions, FailureEstimate, Method,
};
pub use grover::{
    adiabatic_error_estimate, channel_profile, gap_raw, matrix_element, Channel, EffectiveHamiltonian, GroverInstance,
    MatrixElement, MatrixElementForm,
};
pub use oracle::{evolve_full, p1_brute_double_integral, propagator_2x2, FullState, Propagator2x2};
pub use phase::PhaseIntegral;
pub use schedule::{runtime_scaling_sweep, Schedule, ScheduleDocument, ScheduleKind, Target};
pub use spectral::{
    correlation_kernel, detailed_balance, preset, topology_weights, effective_weight, ChannelWeights, CorrelationKernel,
    CouplingConfig, Preset, PresetParams, SpectralKind, SpectralModel, Topology,
};
pub use sweep::{fit_exponent, run_sweep, threshold_report, Bath, PowerFit, Scalability, SweepResult, SweepRow, SweepSpec};
