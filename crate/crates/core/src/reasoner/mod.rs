//! Subsumption closure, materialization and closed-world validation.

mod closure;
mod materialize;
mod validate;

pub use closure::{classify, SubsumptionClosure};
pub use materialize::{materialize, MaterializeConfig, ReasonerError, HIGH_GRADE_THRESHOLD};
pub use validate::{
    advise_followups, is_patient_data_class, validate, Advisory, AdvisoryKind, Violation,
    ViolationKind,
};
