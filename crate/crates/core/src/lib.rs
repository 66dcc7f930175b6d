//! Cross correlation between an m-sequence of period `2^(2n) - 1` and a decimated
//! m-sequence of period `2^n - 1`, for decimations `d` with
//! `d (2^l + 1) ≡ 2^i (mod 2^n - 1)`.
//!
//! * [`gf2m`]: GF(2^m) arithmetic in a polynomial basis.
//! * [`decimation`]: solving the congruence and deriving `k, r, s, t`.
//! * [`sequences`]: the sequences and `C_d(τ)` by several independent routes.
//! * [`quadform`]: the quadratic forms `ρ_a`, their ranks and the related root counts.
//! * [`analysis`]: closed-form predictions, moment identities and the decimation search.

pub mod analysis;
pub mod bitmatrix;
pub mod decimation;
pub mod gf2m;
pub mod quadform;
pub mod sequences;

pub use analysis::{
    classify_valuedness, count_nu, lemma6_check, search_decimations, theorem1_prediction,
    verify_theorem1, AnalysisError, SearchRecord, TheoremPrediction, VerifyReport,
};
pub use decimation::{
    derive_params, enumerate_decimations, find_l_i, DecimationError, DecimationParams,
};
pub use gf2m::{build_field, Field, FieldElement, FieldError};
pub use quadform::{rank_census, FormParams, QuadForm, QuadFormError, RankCensus};
pub use sequences::{spectrum, CorrelationSpectrum, Correlator, Route, SequenceError};

/// Any error raised by this crate.
#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Decimation(#[from] DecimationError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    QuadForm(#[from] QuadFormError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl Error {
    /// True when the inputs were fine but a computed result disagreed with its closed form.
    pub fn is_verification_failure(&self) -> bool {
        match self {
            Error::Decimation(DecimationError::InvariantViolation(_)) => false,
            Error::QuadForm(e) => quadform_failure(e),
            Error::Sequence(SequenceError::QuadForm(e)) => quadform_failure(e),
            Error::Analysis(AnalysisError::PredictionMismatch { .. }) => true,
            Error::Analysis(AnalysisError::QuadForm(e)) => quadform_failure(e),
            Error::Analysis(AnalysisError::Sequence(SequenceError::QuadForm(e))) => {
                quadform_failure(e)
            }
            _ => false,
        }
    }
}

fn quadform_failure(e: &QuadFormError) -> bool {
    matches!(
        e,
        QuadFormError::CensusMismatch { .. } | QuadFormError::NonPowerOfTwoKernel { .. }
    )
}
