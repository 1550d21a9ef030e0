//! Persona datasets with one deliberate defect or change each.

use pmdt_core::reasoner::ViolationKind;
use pmdt_core::vocab::{ex, pmdt};
use pmdt_core::{Assertion, Dataset};

/// A named variant of the persona dataset.
#[derive(Clone, Debug)]
pub struct Variant {
    pub name: &'static str,
    /// The single violation the variant seeds, if any.
    pub expected: Option<ViolationKind>,
    pub dataset: Dataset,
}

/// One variant per seeded cardinality violation: a diagnosis concerning two
/// patients, a diagnosis concerning no disease, and a patient without data.
pub fn violation_variants(personas: &Dataset) -> Vec<Variant> {
    let mut two_patients = personas.clone();
    two_patients.insert(Assertion::new(
        ex("elena-melanoma-dx"),
        pmdt("concernsPatient"),
        ex("markus"),
    ));

    let mut no_disease = personas.clone();
    no_disease.retract(&Assertion::new(
        ex("markus-hypertension-dx"),
        pmdt("concernsDisease"),
        ex("hypertension"),
    ));

    let mut no_data = personas.clone();
    for a in no_data.find(&pmdt_core::Pattern::new(
        Some(ex("aisha")),
        Some(pmdt("hasPatientData")),
        None,
    )) {
        no_data.retract(&a);
    }

    vec![
        Variant {
            name: "diagnosis-two-patients",
            expected: Some(ViolationKind::MaxCardinality),
            dataset: two_patients,
        },
        Variant {
            name: "diagnosis-without-disease",
            expected: Some(ViolationKind::MinCardinality),
            dataset: no_disease,
        },
        Variant {
            name: "patient-without-data",
            expected: Some(ViolationKind::MinCardinality),
            dataset: no_data,
        },
    ]
}

/// Markus's colitis regraded to CTCAE grade 3.
pub fn grade_three_variant(personas: &Dataset) -> Variant {
    let mut ds = personas.clone();
    let ae = ex("markus-colitis-ae");
    ds.retract(&Assertion::new(
        ae.clone(),
        pmdt("hasSeverityGrade"),
        ex("ctcae-grade-2"),
    ));
    ds.insert(Assertion::new(
        ae,
        pmdt("hasSeverityGrade"),
        ex("ctcae-grade-3"),
    ));
    Variant {
        name: "grade-three-colitis",
        expected: None,
        dataset: ds,
    }
}

/// Elena's surgery with its follow-up record removed.
pub fn missing_surgery_followup_variant(personas: &Dataset) -> Variant {
    let mut ds = personas.clone();
    ds.remove_individual(&ex("elena-surgery-followup"));
    Variant {
        name: "missing-surgery-followup",
        expected: None,
        dataset: ds,
    }
}
