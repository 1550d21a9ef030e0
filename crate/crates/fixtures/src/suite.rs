//! Competency questions as queries, with expected results from the naive
//! reference evaluator.

use pmdt_core::oracle::naive_evaluate;
use pmdt_core::reasoner::{materialize, MaterializeConfig, SubsumptionClosure};
use pmdt_core::{parse_query, BindingSet, Dataset, SchemaGraph};

use crate::FixtureError;

/// (name, view, question, query text)
pub const QUERIES: &[(&str, &str, &str, &str)] = &[
    (
        "patients",
        "main",
        "Who are the patients?",
        "SELECT ?p ?name ?age WHERE { ?p a pmdt:Patient ; pmdt:personName ?name ; pmdt:ageYears ?age } ORDER BY ?name",
    ),
    (
        "comorbidity",
        "main",
        "Which comorbid diagnoses accompany a patient's cancer?",
        "SELECT ?p ?dx ?comorbidity WHERE { ?p pmdt:hasDiagnosis ?cdx . ?cdx pmdt:concernsDisease ?cancer . \
         ?cancer a pmdt:PatientCancerDisease . ?p pmdt:hasDiagnosis ?dx . ?dx pmdt:concernsDisease ?comorbidity \
         FILTER(?comorbidity != ?cancer) } ORDER BY ?p",
    ),
    (
        "treatments",
        "treatment",
        "Which treatments has each patient received?",
        "SELECT ?p ?t ?what WHERE { ?p pmdt:treatedWith ?t . ?t a pmdt:Treatment ; pmdt:description ?what } ORDER BY ?p ?t",
    ),
    (
        "followup-performance",
        "treatment",
        "How did each followed-up treatment perform?",
        "SELECT ?t ?f ?metric WHERE { ?f a pmdt:TreatmentFollowup ; pmdt:hasPerformanceEvaluation ?perf . \
         ?perf pmdt:evaluatesTreatment ?t ; pmdt:hasMetric ?m . ?m pmdt:description ?metric } ORDER BY ?t",
    ),
    (
        "reported-outcomes",
        "treatment",
        "Which quality-of-life scores underlie the reported outcomes?",
        "SELECT ?f ?score WHERE { ?f pmdt:reportsOutcome ?o . ?o pmdt:basedOnQoL ?q . ?q pmdt:qolScore ?score } ORDER BY ?f",
    ),
    (
        "qol-before-after",
        "trajectory",
        "What was Markus's quality of life before and 3 months after immunotherapy started?",
        "SELECT ?before ?after WHERE { ex:markus-qol-trajectory pmdt:hasState ?s1 . ?s1 pmdt:atTime ex:markus-baseline . \
         ?s1 pmdt:recordsQoL ?q1 . ?q1 pmdt:qolScore ?before . ex:markus-qol-trajectory pmdt:hasState ?s2 . \
         ?s2 pmdt:atTime ex:markus-month-3 . ?s2 pmdt:recordsQoL ?q2 . ?q2 pmdt:qolScore ?after }",
    ),
    (
        "qol-schedule",
        "trajectory",
        "When was Markus's quality of life measured and what were the scores?",
        "SELECT ?state ?when ?score WHERE { ex:markus-qol-trajectory pmdt:hasState ?state . ?state pmdt:atTime ?i . \
         ?i pmdt:timestampValue ?when . ?state pmdt:recordsQoL ?q . ?q pmdt:qolScore ?score } ORDER BY ?when",
    ),
    (
        "treatment-state-order",
        "trajectory",
        "In which order do treatment states follow each other?",
        "SELECT ?earlier ?later WHERE { ?tr a pmdt:TreatmentTrajectory ; pmdt:hasState ?earlier . ?earlier pmdt:precedes ?later } \
         ORDER BY ?earlier",
    ),
    (
        "privacy-regulations",
        "safety",
        "Which privacy regulations restrict access to which patient data?",
        "SELECT ?p ?data ?reg WHERE { ?p pmdt:hasPatientData ?data . ?data pmdt:restrictedBy ?reg . ?reg a pmdt:PrivacyRegulation } \
         ORDER BY ?p",
    ),
    (
        "safety-rules",
        "safety",
        "Which safety rules mitigated events involving Markus?",
        "SELECT ?event ?rule ?what WHERE { ?event a pmdt:SafetyEvent ; pmdt:involvesPatient ex:markus ; pmdt:mitigatedBy ?rule . \
         ?rule pmdt:description ?what } ORDER BY ?rule",
    ),
    (
        "pathway-responsibility",
        "pathways",
        "Which stakeholder is responsible for executing each step of Elena's pathway?",
        "SELECT ?step ?who ?role WHERE { ex:elena-pathway pmdt:hasStep ?step . ?step pmdt:executedBy ?s . \
         ?s pmdt:personName ?who ; pmdt:roleName ?role } ORDER BY ?step",
    ),
    (
        "irae-after-immunotherapy",
        "adverse-events",
        "Which immune-related adverse events were reported following immunotherapy?",
        "SELECT ?ae ?category ?grade WHERE { ?ae pmdt:causedBy ?t . ?t a pmdt:Immunotherapy . ?ae pmdt:hasCategory ?c . \
         ?c a pmdt:OrganSpecificIrAE ; pmdt:description ?category . ?ae pmdt:hasSeverityGrade ?g . ?g pmdt:gradeValue ?grade } \
         ORDER BY ?ae",
    ),
    (
        "markus-adverse-events",
        "adverse-events",
        "Which adverse events did Markus's treatments cause, and how severe were they?",
        "SELECT ?ae ?grade WHERE { ex:markus pmdt:treatedWith ?t . ?ae pmdt:causedBy ?t ; pmdt:hasSeverityGrade ?g . \
         ?g pmdt:gradeValue ?grade }",
    ),
    (
        "adverse-event-management",
        "adverse-events",
        "Which tests confirmed each adverse event and which medication managed it?",
        "SELECT ?ae ?test ?medication WHERE { ?ae a pmdt:AdverseEvent ; pmdt:confirmedBy ?test ; \
         pmdt:managedByTreatment ?medication . ?medication a pmdt:Medication } ORDER BY ?test",
    ),
    (
        "genomic-markers",
        "main",
        "Which genomic markers are recorded for each patient?",
        "SELECT ?p ?marker WHERE { ?p pmdt:hasPatientData ?d . ?d a pmdt:GenomicData ; pmdt:description ?marker } ORDER BY ?p",
    ),
    (
        "patients-over-50",
        "main",
        "Which patients are older than 50?",
        "SELECT ?name ?age WHERE { ?p pmdt:personName ?name ; pmdt:ageYears ?age FILTER(?age > 50) } ORDER BY ?age LIMIT 5",
    ),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteQuery {
    pub name: &'static str,
    pub view: &'static str,
    pub question: &'static str,
    pub text: &'static str,
    pub expected: BindingSet,
}

/// Evaluates every suite query with the naive evaluator over the
/// type-materialized dataset.
pub fn generate_query_suite(
    schema: &SchemaGraph,
    closure: &SubsumptionClosure,
    ds: &Dataset,
) -> Result<Vec<SuiteQuery>, FixtureError> {
    let typed = materialize(schema, closure, ds, &MaterializeConfig::types_only())?;
    QUERIES
        .iter()
        .map(|&(name, view, question, text)| {
            let ast = parse_query(text).map_err(|e| FixtureError::Query(name, e.to_string()))?;
            let expected = naive_evaluate(&ast, &typed)
                .map_err(|i| FixtureError::Query(name, format!("filter #{i} is not comparable")))?;
            Ok(SuiteQuery {
                name,
                view,
                question,
                text,
                expected,
            })
        })
        .collect()
}
