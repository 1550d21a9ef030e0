//! The PMDT vocabulary: every view's classes, properties, restrictions and
//! disjointness axioms.

use crate::schema::{CardinalityRestriction, ClassDef, PropertyDef, SchemaGraph};
use crate::term::{Datatype, Literal};
use crate::vocab::pmdt;

/// (class, parent) in declaration order; parents always precede children.
const CLASSES: &[(&str, Option<&str>)] = &[
    // Main view
    ("Patient", None),
    ("MedicalStakeholder", None),
    ("Diagnosis", None),
    ("Disease", None),
    ("PatientCancerDisease", Some("Disease")),
    // Treatment, performance and follow-up view
    ("Treatment", None),
    ("Surgery", Some("Treatment")),
    ("Medication", Some("Treatment")),
    ("Vaccination", Some("Treatment")),
    ("CancerTherapy", Some("Treatment")),
    ("Immunotherapy", Some("CancerTherapy")),
    ("Chemotherapy", Some("CancerTherapy")),
    ("RadiationTherapy", Some("CancerTherapy")),
    ("TreatmentFollowup", None),
    ("SurgeryFollowup", Some("TreatmentFollowup")),
    ("MedicationFollowup", Some("TreatmentFollowup")),
    ("CancerTherapyFollowup", Some("TreatmentFollowup")),
    ("TreatmentPerformance", None),
    ("Metric", None),
    ("EfficiencyMetric", Some("Metric")),
    ("EffectivenessMetric", Some("Metric")),
    ("PatientCentredOutcome", Some("Metric")),
    // Patient data
    ("PatientData", None),
    ("LifestyleData", Some("PatientData")),
    ("NutritionData", Some("PatientData")),
    ("PsychosocialData", Some("PatientData")),
    ("PsychologicalData", Some("PatientData")),
    ("MedicalHistory", Some("PatientData")),
    ("TestData", Some("PatientData")),
    ("GenomicData", Some("PatientData")),
    ("QualityOfLifeInfo", Some("PatientData")),
    // Trajectory view
    ("Trajectory", None),
    ("PatientCancerDiseaseTrajectory", Some("Trajectory")),
    ("TreatmentTrajectory", Some("Trajectory")),
    ("QoLTrajectory", Some("Trajectory")),
    ("State", None),
    ("TreatmentState", Some("State")),
    ("PatientCancerDiseaseState", Some("State")),
    ("QoLMeasurementState", Some("State")),
    ("TimeInstant", None),
    ("TimeInterval", None),
    // Medical safety view
    ("MedicalSafetyRule", None),
    ("ClinicalGuideline", Some("MedicalSafetyRule")),
    ("SafetyProcedure", Some("MedicalSafetyRule")),
    ("PrivacyRegulation", Some("MedicalSafetyRule")),
    ("DataSecurityPolicy", Some("MedicalSafetyRule")),
    ("AccessPolicy", Some("MedicalSafetyRule")),
    ("SafetyEvent", None),
    ("DataSource", None),
    ("ConsentStatement", None),
    // Medical pathways view
    ("MedicalPathway", None),
    ("PathwayStep", None),
    ("TreatmentAction", None),
    ("ClinicalGoal", None),
    // Adverse events view
    ("AdverseEvent", None),
    ("HighGradeAdverseEvent", Some("AdverseEvent")),
    ("LowGradeAdverseEvent", Some("AdverseEvent")),
    ("AdverseEventCategory", None),
    ("OrganSpecificIrAE", Some("AdverseEventCategory")),
    ("SystemicSyndrome", Some("AdverseEventCategory")),
    ("Pneumonitis", Some("OrganSpecificIrAE")),
    ("Colitis", Some("OrganSpecificIrAE")),
    ("Endocrinopathy", Some("OrganSpecificIrAE")),
    ("Hepatitis", Some("OrganSpecificIrAE")),
    ("Myocarditis", Some("OrganSpecificIrAE")),
    ("CytokineReleaseSyndrome", Some("SystemicSyndrome")),
    ("ICANS", Some("SystemicSyndrome")),
    ("SeverityGrade", None),
    ("Test", None),
];

/// External-vocabulary stubs carried as `pmdt:alignedWith` annotations.
const ALIGNMENTS: &[(&str, &str)] = &[
    ("Patient", "FHIR:Patient"),
    ("Diagnosis", "FHIR:Condition"),
    ("Disease", "DOID:4"),
    ("PatientCancerDisease", "DOID:162"),
    ("Treatment", "FHIR:Procedure"),
    ("Medication", "FHIR:Medication"),
    ("TestData", "OMOP:Measurement"),
    ("TimeInstant", "time:Instant"),
    ("TimeInterval", "time:Interval"),
    ("AdverseEvent", "CTCAE:AdverseEvent"),
    ("SeverityGrade", "CTCAE:Grade"),
];

const INSTANT_OR_INTERVAL: &[&str] = &["TimeInstant", "TimeInterval"];

/// (property, domain, range, inverse)
type ObjectPropertyRow = (
    &'static str,
    &'static [&'static str],
    &'static [&'static str],
    Option<&'static str>,
);

const OBJECT_PROPERTIES: &[ObjectPropertyRow] = &[
    ("hasDiagnosis", &["Patient"], &["Diagnosis"], None),
    ("concernsDisease", &["Diagnosis"], &["Disease"], None),
    ("concernsPatient", &["Diagnosis"], &["Patient"], None),
    ("treatedWith", &["Patient"], &["Treatment"], None),
    ("hasPatientData", &["Patient"], &["PatientData"], None),
    ("hasTrajectory", &["Patient"], &["Trajectory"], None),
    ("followsPathway", &["Patient"], &["MedicalPathway"], None),
    (
        "evaluatesTreatment",
        &["TreatmentPerformance"],
        &["Treatment"],
        None,
    ),
    (
        "associatedWithDisease",
        &["TreatmentPerformance"],
        &["Disease"],
        None,
    ),
    ("hasMetric", &["TreatmentPerformance"], &["Metric"], None),
    (
        "basedOnQoL",
        &["PatientCentredOutcome"],
        &["QualityOfLifeInfo"],
        None,
    ),
    (
        "measuredAt",
        &["TreatmentPerformance"],
        INSTANT_OR_INTERVAL,
        None,
    ),
    (
        "partOfTrajectory",
        &["TreatmentPerformance"],
        &["Trajectory"],
        None,
    ),
    (
        "followUpOfSurgery",
        &["SurgeryFollowup"],
        &["Surgery"],
        None,
    ),
    (
        "followUpOfMedication",
        &["MedicationFollowup"],
        &["Medication"],
        None,
    ),
    (
        "followUpOfCancerTherapy",
        &["CancerTherapyFollowup"],
        &["CancerTherapy"],
        None,
    ),
    (
        "hasPerformanceEvaluation",
        &["TreatmentFollowup"],
        &["TreatmentPerformance"],
        None,
    ),
    (
        "reportsOutcome",
        &["TreatmentFollowup"],
        &["PatientCentredOutcome"],
        None,
    ),
    (
        "followUpReports",
        &["TreatmentFollowup"],
        &["AdverseEvent"],
        None,
    ),
    ("hasState", &["Trajectory"], &["State"], None),
    ("atTime", &["State"], INSTANT_OR_INTERVAL, None),
    (
        "recordsQoL",
        &["QoLMeasurementState"],
        &["QualityOfLifeInfo"],
        None,
    ),
    ("precedes", &["State"], &["State"], None),
    ("follows", &["State"], &["State"], Some("precedes")),
    ("causedBy", &["AdverseEvent"], &["Treatment"], None),
    (
        "associatedWith",
        &["AdverseEvent"],
        &["PatientCancerDisease"],
        None,
    ),
    ("recordedAt", &["AdverseEvent"], INSTANT_OR_INTERVAL, None),
    (
        "hasSeverityGrade",
        &["AdverseEvent"],
        &["SeverityGrade"],
        None,
    ),
    (
        "hasCategory",
        &["AdverseEvent"],
        &["AdverseEventCategory"],
        None,
    ),
    ("confirmedBy", &["AdverseEvent"], &["Test"], None),
    (
        "reportedBy",
        &["AdverseEvent"],
        &["Patient", "MedicalStakeholder"],
        None,
    ),
    (
        "managedByStakeholder",
        &["AdverseEvent"],
        &["MedicalStakeholder"],
        None,
    ),
    (
        "managedByTreatment",
        &["AdverseEvent"],
        &["Treatment"],
        None,
    ),
    ("violates", &["SafetyEvent"], &["MedicalSafetyRule"], None),
    (
        "mitigatedBy",
        &["SafetyEvent"],
        &["MedicalSafetyRule"],
        None,
    ),
    ("involvesPatient", &["SafetyEvent"], &["Patient"], None),
    (
        "triggeredBy",
        &["SafetyEvent"],
        &["Treatment", "PathwayStep"],
        None,
    ),
    (
        "restrictedBy",
        &["PatientData"],
        &["PrivacyRegulation"],
        None,
    ),
    ("securedBy", &["PatientData"], &["DataSecurityPolicy"], None),
    ("hasSource", &["PatientData"], &["DataSource"], None),
    ("governedBy", &["PatientData"], &["AccessPolicy"], None),
    ("consentsTo", &["Patient"], &["ConsentStatement"], None),
    ("coversData", &["ConsentStatement"], &["PatientData"], None),
    (
        "accessesData",
        &["MedicalStakeholder"],
        &["PatientData"],
        None,
    ),
    ("hasStep", &["MedicalPathway"], &["PathwayStep"], None),
    (
        "hasTreatmentAction",
        &["PathwayStep"],
        &["TreatmentAction"],
        None,
    ),
    (
        "executedBy",
        &["PathwayStep"],
        &["MedicalStakeholder"],
        None,
    ),
    ("stepPrecedes", &["PathwayStep"], &["PathwayStep"], None),
    (
        "stepFollows",
        &["PathwayStep"],
        &["PathwayStep"],
        Some("stepPrecedes"),
    ),
    ("achievesGoal", &["MedicalPathway"], &["ClinicalGoal"], None),
    (
        "groundedIn",
        &["MedicalPathway"],
        &["ClinicalGuideline"],
        None,
    ),
    ("monitoredBy", &["PathwayStep"], &["SafetyProcedure"], None),
    (
        "yieldsPerformance",
        &["PathwayStep"],
        &["TreatmentPerformance"],
        None,
    ),
];

/// (property, domain, datatype)
const DATA_PROPERTIES: &[(&str, &[&str], Datatype)] = &[
    ("ageYears", &["Patient"], Datatype::Integer),
    (
        "personName",
        &["Patient", "MedicalStakeholder"],
        Datatype::String,
    ),
    ("roleName", &["MedicalStakeholder"], Datatype::String),
    ("gradeValue", &["SeverityGrade"], Datatype::Integer),
    ("qolScore", &["QualityOfLifeInfo"], Datatype::Decimal),
    ("timestampValue", &["TimeInstant"], Datatype::DateTime),
    ("intervalStart", &["TimeInterval"], Datatype::DateTime),
    ("intervalEnd", &["TimeInterval"], Datatype::DateTime),
    ("consentGranted", &["ConsentStatement"], Datatype::Boolean),
    ("alignedWith", &[], Datatype::String),
    ("description", &[], Datatype::String),
];

/// (class, property, min, max)
const RESTRICTIONS: &[(&str, &str, u32, Option<u32>)] = &[
    ("Diagnosis", "concernsPatient", 1, Some(1)),
    ("Diagnosis", "concernsDisease", 1, None),
    ("Patient", "hasPatientData", 1, None),
    ("AdverseEvent", "recordedAt", 1, Some(1)),
    ("AdverseEvent", "hasSeverityGrade", 0, Some(1)),
    ("SurgeryFollowup", "followUpOfSurgery", 1, Some(1)),
    ("MedicationFollowup", "followUpOfMedication", 1, Some(1)),
    (
        "CancerTherapyFollowup",
        "followUpOfCancerTherapy",
        1,
        Some(1),
    ),
    ("SeverityGrade", "gradeValue", 1, Some(1)),
    ("ConsentStatement", "coversData", 1, None),
];

const DISJOINT: &[(&str, &str)] = &[
    ("TimeInstant", "TimeInterval"),
    ("Patient", "MedicalStakeholder"),
];

/// Builds the complete PMDT schema.
pub fn bootstrap_pmdt_schema() -> SchemaGraph {
    let mut s = SchemaGraph::default();
    let aligned = pmdt("alignedWith");
    for (name, parent) in CLASSES {
        let mut def = ClassDef::new(pmdt(name));
        if let Some(p) = parent {
            def = def.with_parent(pmdt(p));
        }
        if let Some((_, code)) = ALIGNMENTS.iter().find(|(c, _)| c == name) {
            def = def.with_annotation(aligned.clone(), *code);
        }
        s.define_class(def).expect("bootstrap class");
    }
    for (name, domain, range, inverse) in OBJECT_PROPERTIES {
        let mut def = PropertyDef::object(pmdt(name))
            .domain(domain.iter().map(|d| pmdt(d)))
            .range(range.iter().map(|r| pmdt(r)));
        if let Some(inv) = inverse {
            def = def.inverse_of(pmdt(inv));
        }
        s.define_property(def).expect("bootstrap object property");
    }
    for (name, domain, dt) in DATA_PROPERTIES {
        let mut def = PropertyDef::data(pmdt(name), *dt).domain(domain.iter().map(|d| pmdt(d)));
        match *name {
            "gradeValue" => def = def.bounds(Some(Literal::integer(1)), Some(Literal::integer(5))),
            "qolScore" => {
                def = def.bounds(
                    Some(Literal::decimal("0.0").expect("decimal")),
                    Some(Literal::decimal("100.0").expect("decimal")),
                )
            }
            _ => {}
        }
        s.define_property(def).expect("bootstrap data property");
    }
    for (class, prop, min, max) in RESTRICTIONS {
        s.add_restriction(CardinalityRestriction::new(
            pmdt(class),
            pmdt(prop),
            *min,
            *max,
        ))
        .expect("bootstrap restriction");
    }
    for (a, b) in DISJOINT {
        s.add_disjoint(&pmdt(a), &pmdt(b))
            .expect("bootstrap disjointness");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::PropertyKind;

    #[test]
    fn sizes() {
        let s = bootstrap_pmdt_schema();
        assert!(s.class_count() >= 60, "{} classes", s.class_count());
        assert!(s.object_property_count() >= 45);
        assert!(s.is_acyclic());
    }

    #[test]
    fn inverses_are_symmetric() {
        let s = bootstrap_pmdt_schema();
        assert_eq!(
            s.property(&pmdt("precedes")).unwrap().inverse,
            Some(pmdt("follows"))
        );
        assert_eq!(
            s.property(&pmdt("stepPrecedes")).unwrap().inverse,
            Some(pmdt("stepFollows"))
        );
        for p in s.properties() {
            if let Some(inv) = &p.inverse {
                assert_eq!(s.property(inv).unwrap().inverse.as_ref(), Some(&p.iri));
            }
        }
    }

    #[test]
    fn access_policy_is_a_safety_rule() {
        let s = bootstrap_pmdt_schema();
        assert!(s
            .class(&pmdt("AccessPolicy"))
            .unwrap()
            .parents
            .contains(&pmdt("MedicalSafetyRule")));
        assert_eq!(
            s.property(&pmdt("gradeValue")).unwrap().kind,
            PropertyKind::Data
        );
    }
}
