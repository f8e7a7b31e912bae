//! Measure decompositions, exact measures of finite codes, the null set
//! behind a decomposition, and regularity approximations.

mod assemble;
mod decomposition;
mod regularity;

use thiserror::Error;

use crate::borel::{Address, BorelError};
use crate::dyadic::Dyadic;
use crate::gdelta::GDeltaError;
use crate::l1::L1Error;

pub use assemble::{assemble_bad_gdelta, bad_components, evaluation_from_decomposition, pointwise_value};
pub use decomposition::{
    build_decomposition, build_decomposition_with, code_set, decomposition_from_membership, measure_of_code,
    verify_decomposition, verify_decomposition_with, ChildOrder, Law, LawViolation, MeasureDecomposition,
};
pub use regularity::{
    char_to_regularity, containment_report, overlap_bounds, regularity_to_char, regularity_to_char_search,
    search_stage, sup_open_set, CharName, ContainmentViolation, RegularityApprox, RegularityTable, StagedGDelta,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("code has complement nodes")]
    NotComplementFree,
    #[error("{} law fails at {}{}", .0.law, .0.address, .0.residual.as_ref().map(|r| format!(" (residual {r})")).unwrap_or_default())]
    Law(LawViolation),
    #[error("no name at {0}")]
    MissingName(Address),
    #[error("name is not a membership function for the relocated code: distance {distance} > {slack}")]
    NotMembership { distance: Dyadic, slack: Dyadic },
    #[error("undecided set at level {level}, stage {stage} has measure {measure} ≥ 2^-{level}")]
    Undecided { level: usize, stage: usize, measure: Dyadic },
    #[error("sequence is not nondecreasing in [0, 1) at index {index}")]
    BadSequence { index: usize },
    #[error(transparent)]
    Borel(#[from] BorelError),
    #[error(transparent)]
    L1(#[from] L1Error),
    #[error(transparent)]
    GDelta(#[from] GDeltaError),
}
