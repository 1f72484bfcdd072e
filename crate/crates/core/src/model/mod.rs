//! Marginal laws, the joint law of (A, B), tail models and the structural
//! flags that theorem preconditions read.

mod joint;
mod sampler;
mod scalar;
mod survival_law;
mod tail;

pub use joint::{
    sample_pair, support_unbounded_right, validate_nondegeneracy, Dependence, JointInput, JointSampler, MgfDomain,
    Nondegeneracy, StructuralFlags, Tri,
};
pub use sampler::Sampler;
pub use scalar::{convolution_survival, ScalarDistribution, Support};
pub use survival_law::{SurvivalKind, SurvivalLaw};
pub use tail::{exp_plus_remainder_of, tail_model_of, RemainderFlags, TailModel};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid survival function: {0}")]
    InvalidSurvival(String),
    #[error("no closed form: {0}")]
    NoClosedForm(String),
    #[error("nondegeneracy violated: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
