//! Step functions and L¹ names: certification, integrals, bad sets,
//! pointwise evaluation and diagonal/extremum constructions.

mod badset;
mod name;
mod ops;
mod step;

use thiserror::Error;

use crate::dyadic::Dyadic;

pub use badset::{bad_set, value_at, BadSets, PointEvaluator, PointValue};
pub use name::{interleave, names_equal, L1Name, NameComparison, StepSequence, Tail};
pub use ops::{
    diagonal_name, extremum_finite, extremum_name, inf_name, name_distance, sup_name, BoundCheck,
    Diagonal, Extremum,
};
pub use step::StepFunction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum L1Error {
    #[error("not rapidly Cauchy at index {index}: ‖f_i − f_(i+1)‖₁ = {norm}")]
    NotRapid { index: usize, norm: Dyadic },
    #[error("term {index} is not materialized")]
    NotMaterialized { index: usize },
    #[error("{check} bound violated at index {index}: {value} > {bound}")]
    BoundViolation { check: &'static str, index: usize, value: Dyadic, bound: Dyadic },
    #[error("convergence witness falsified at stage {stage}: exact norm {norm}")]
    RateFalsified { stage: usize, norm: Dyadic },
    #[error("empty family")]
    EmptyFamily,
}
