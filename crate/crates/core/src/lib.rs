//! Two-state discrimination with postselection.
//!
//! Given two density operators `ρ`, `σ` and a prior, a three-outcome
//! measurement `{Λ_ρ, Λ_σ, I − Λ_ρ − Λ_σ}` either names a hypothesis or
//! rejects. This crate computes the smallest achievable error conditioned on
//! acceptance, builds every measurement that attains it, and finds the
//! largest acceptance probability among those measurements.

pub mod accept;
pub mod construct;
pub mod error;
pub mod examples;
pub mod io;
pub mod lemmas;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod sim;
pub mod state;
pub mod upsilon;

pub use error::{Error, Result};
pub use linalg::{Hermitian, Projector, Tolerances};
pub use metrics::{
    acceptance, classify, classify_support_relation, critical_prior, min_postselected_error, postselected_error,
    thompson_xi, CaseLabel, MetricsReport, SupportRelation,
};
pub use state::{DensityOperator, Prior, ProblemInstance, ThreeOutcomeMeasurement};
