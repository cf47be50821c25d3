//! Simulation of a qubit coupled to a Lorentzian bath — represented exactly
//! as one damped bosonic mode — under repeated projective measurements.
//!
//! The crate propagates the dense qubit ⊗ Fock density matrix through the
//! master equation dρ/dt = −i[H, ρ] − Γ(a†a ρ + ρ a†a − 2 a ρ a†), applies
//! selective or non-selective measurement channels at scheduled instants, and
//! turns the resulting survival-probability series into decay-rate
//! diagnostics: per-interval rates λ_n and w_n = λ_n/τ, total average rates
//! Λ_N(τ), and the measurement-interval values where dΛ_N/dτ changes sign
//! (measurement-induced suppression ↔ enhancement). Closed-form baselines —
//! the rotating-wave amplitude, the continuous-measurement-limit rate w(t),
//! the bath-reset survival, and a perturbative rate equation — live in
//! [`analytic`] for cross-checks.
//!
//! Start with the runnable examples (`cargo run --example survival_series`)
//! or the `zeno-lab` binary (`simulate`, `sweep-tau`, `figure`, `compare-rw`,
//! `compare-rate`, `check-convergence`).

pub mod analysis;
pub mod analytic;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod numeric;
pub mod output;

pub use dynamics::{
    evolve, lindblad_rhs, nonselective_measure, run_zeno, selective_measure, IntegratorConfig,
    MeasurementKind, RunConfig, SurvivalSeries, TruncationConfig, ZenoProtocol,
};
pub use error::{Error, Result};
pub use model::{
    build_operators, initial_state, DensityMatrix, HilbertConfig, ModelParams, OperatorSet,
    QubitState, Variant,
};
