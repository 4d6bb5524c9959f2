//! Dichotomy spectra of nonautonomous linear systems relative to general
//! growth rates, numerical comparison of growth rates, and executable
//! checks of the spectral theorems that connect the two.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32` or `f64`).
//! The aliases below fix the scalar type for the common cases; the
//! theorem harness runs in `f64` only.

pub mod evolution;
pub mod exprparse;
pub mod rates;
pub mod relations;
pub mod scalar;
pub mod spectrum;
pub mod theorems;

use thiserror::Error;

pub use evolution::{Evolution, EvolutionError, LinearSystem, ScaledMatrix, Structure, SystemDescriptor, WeightedSystem};
pub use exprparse::{parse, Expr, ExprError};
pub use rates::{GrowthRate, RateDescriptor, RateError, TimeDomain};
pub use relations::{chain_check, check_almost, check_faster, check_weakly_faster, classify_pair, RelationVerdict};
pub use scalar::{ExtReal, Real};
pub use spectrum::{compute_spectrum, has_mu_dichotomy, has_mu_growth, EstimatorParams, SpectrumReport};
pub use theorems::{TheoremReport, Verifier};

pub type Rate64 = GrowthRate<f64>;
pub type Rate32 = GrowthRate<f32>;
pub type System64 = LinearSystem<f64>;
pub type System32 = LinearSystem<f32>;
pub type Report64 = SpectrumReport<f64>;
pub type Report32 = SpectrumReport<f32>;
pub type Verdict64 = RelationVerdict<f64>;
pub type Verdict32 = RelationVerdict<f32>;

/// Any error the library can raise.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Spectrum(#[from] spectrum::SpectrumError),
    #[error(transparent)]
    Relation(#[from] relations::RelationError),
    #[error(transparent)]
    Theorem(#[from] theorems::TheoremError),
}
