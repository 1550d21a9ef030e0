//! Elena, Markus and Aisha as instance data. Values the source material does
//! not pin down (scores, dates, stakeholder names, free-text descriptions)
//! are fixture-defined and frozen here.

use pmdt_core::vocab::{ex, pmdt};
use pmdt_core::{Assertion, Dataset, Literal};

/// Small helper for writing assertions about `ex:` individuals.
#[derive(Default)]
pub(crate) struct Builder {
    pub(crate) ds: Dataset,
}

impl Builder {
    pub(crate) fn ty(&mut self, s: &str, class: &str) -> &mut Self {
        self.ds.insert(Assertion::typed(ex(s), pmdt(class)));
        self
    }

    pub(crate) fn link(&mut self, s: &str, p: &str, o: &str) -> &mut Self {
        self.ds.insert(Assertion::new(ex(s), pmdt(p), ex(o)));
        self
    }

    pub(crate) fn lit(&mut self, s: &str, p: &str, o: Literal) -> &mut Self {
        self.ds.insert(Assertion::new(ex(s), pmdt(p), o));
        self
    }

    pub(crate) fn text(&mut self, s: &str, p: &str, o: &str) -> &mut Self {
        self.lit(s, p, Literal::string(o))
    }

    pub(crate) fn describe(&mut self, s: &str, class: &str, description: &str) -> &mut Self {
        self.ty(s, class).text(s, "description", description)
    }

    pub(crate) fn instant(&mut self, s: &str, when: &str) -> &mut Self {
        self.ty(s, "TimeInstant").lit(
            s,
            "timestampValue",
            Literal::new(when, pmdt_core::Datatype::DateTime).expect("timestamp"),
        )
    }

    pub(crate) fn score(&mut self, s: &str, value: &str) -> &mut Self {
        self.ty(s, "QualityOfLifeInfo")
            .lit(s, "qolScore", Literal::decimal(value).expect("score"))
    }

    pub(crate) fn patient(&mut self, s: &str, name: &str, age: i64) -> &mut Self {
        self.ty(s, "Patient")
            .text(s, "personName", name)
            .lit(s, "ageYears", Literal::integer(age))
    }

    pub(crate) fn stakeholder(&mut self, s: &str, name: &str, role: &str) -> &mut Self {
        self.ty(s, "MedicalStakeholder")
            .text(s, "personName", name)
            .text(s, "roleName", role)
    }

    pub(crate) fn diagnosis(&mut self, patient: &str, dx: &str, disease: &str) -> &mut Self {
        self.ty(dx, "Diagnosis")
            .link(patient, "hasDiagnosis", dx)
            .link(dx, "concernsPatient", patient)
            .link(dx, "concernsDisease", disease)
    }

    pub(crate) fn chain(&mut self, p: &str, items: &[&str]) -> &mut Self {
        for w in items.windows(2) {
            self.link(w[0], p, w[1]);
        }
        self
    }
}

/// Shared reference individuals: CTCAE grades, regulations, policies and
/// data sources.
pub(crate) fn reference_data(b: &mut Builder) {
    for g in 1..=5 {
        let id = format!("ctcae-grade-{g}");
        b.ty(&id, "SeverityGrade")
            .lit(&id, "gradeValue", Literal::integer(g));
    }
    b.describe(
        "gdpr",
        "PrivacyRegulation",
        "EU General Data Protection Regulation",
    )
    .describe(
        "pseudonymisation-policy",
        "DataSecurityPolicy",
        "pseudonymise before secondary use",
    )
    .describe(
        "clinical-access-policy",
        "AccessPolicy",
        "treating clinicians only",
    )
    .describe(
        "research-access-policy",
        "AccessPolicy",
        "approved research projects with consent",
    )
    .describe(
        "hospital-ehr",
        "DataSource",
        "hospital electronic health record",
    )
    .describe(
        "oncology-lab",
        "DataSource",
        "molecular oncology laboratory",
    )
    .describe("genetics-lab", "DataSource", "clinical genetics laboratory")
    .describe(
        "melanoma-guideline",
        "ClinicalGuideline",
        "cutaneous melanoma treatment guideline",
    )
    .describe(
        "irae-guideline",
        "ClinicalGuideline",
        "management of immune-related adverse events",
    )
    .describe(
        "wound-care-procedure",
        "SafetyProcedure",
        "post-operative wound inspection",
    )
    .describe(
        "steroid-taper-procedure",
        "SafetyProcedure",
        "corticosteroid tapering with glucose monitoring",
    );
}

fn elena(b: &mut Builder) {
    b.patient("elena", "Elena", 54)
        .diagnosis("elena", "elena-melanoma-dx", "elena-melanoma")
        .describe(
            "elena-melanoma",
            "PatientCancerDisease",
            "early-stage cutaneous melanoma, stage IB",
        )
        .diagnosis("elena", "elena-diabetes-dx", "type-2-diabetes")
        .describe("type-2-diabetes", "Disease", "type 2 diabetes mellitus");

    b.link("elena", "treatedWith", "elena-excision")
        .link("elena", "treatedWith", "elena-metformin")
        .describe("elena-excision", "Surgery", "wide local excision")
        .describe(
            "elena-metformin",
            "Medication",
            "metformin 500 mg twice daily",
        );

    b.instant("elena-surgery-day", "2024-02-12T09:00:00Z")
        .instant("elena-week-2", "2024-02-26T09:00:00Z")
        .instant("elena-month-3", "2024-05-13T09:00:00Z");

    b.describe(
        "elena-surgery-followup",
        "SurgeryFollowup",
        "surgical wound check",
    )
    .link(
        "elena-surgery-followup",
        "followUpOfSurgery",
        "elena-excision",
    )
    .link(
        "elena-surgery-followup",
        "hasPerformanceEvaluation",
        "elena-excision-performance",
    )
    .link(
        "elena-surgery-followup",
        "reportsOutcome",
        "elena-recovery-outcome",
    )
    .describe(
        "elena-medication-followup",
        "MedicationFollowup",
        "glycaemic control review",
    )
    .link(
        "elena-medication-followup",
        "followUpOfMedication",
        "elena-metformin",
    )
    .link(
        "elena-medication-followup",
        "hasPerformanceEvaluation",
        "elena-metformin-performance",
    )
    .link(
        "elena-medication-followup",
        "reportsOutcome",
        "elena-wellbeing-outcome",
    );

    b.ty("elena-excision-performance", "TreatmentPerformance")
        .link(
            "elena-excision-performance",
            "evaluatesTreatment",
            "elena-excision",
        )
        .link(
            "elena-excision-performance",
            "associatedWithDisease",
            "elena-melanoma",
        )
        .link(
            "elena-excision-performance",
            "hasMetric",
            "elena-margin-metric",
        )
        .link("elena-excision-performance", "measuredAt", "elena-week-2")
        .describe(
            "elena-margin-metric",
            "EffectivenessMetric",
            "histologically clear margins",
        )
        .ty("elena-metformin-performance", "TreatmentPerformance")
        .link(
            "elena-metformin-performance",
            "evaluatesTreatment",
            "elena-metformin",
        )
        .link(
            "elena-metformin-performance",
            "associatedWithDisease",
            "type-2-diabetes",
        )
        .link(
            "elena-metformin-performance",
            "hasMetric",
            "elena-hba1c-metric",
        )
        .link("elena-metformin-performance", "measuredAt", "elena-month-3")
        .describe(
            "elena-hba1c-metric",
            "EffectivenessMetric",
            "HbA1c 6.8 percent",
        );

    b.describe(
        "elena-recovery-outcome",
        "PatientCentredOutcome",
        "reported recovery after surgery",
    )
    .link("elena-recovery-outcome", "basedOnQoL", "elena-qol-week-2")
    .describe(
        "elena-wellbeing-outcome",
        "PatientCentredOutcome",
        "reported wellbeing on medication",
    )
    .link("elena-wellbeing-outcome", "basedOnQoL", "elena-qol-month-3")
    .score("elena-qol-week-2", "74.0")
    .score("elena-qol-month-3", "81.5");

    b.describe(
        "elena-history",
        "MedicalHistory",
        "type 2 diabetes since 2016",
    )
    .link("elena-history", "hasSource", "hospital-ehr")
    .link("elena-history", "governedBy", "clinical-access-policy")
    .describe(
        "elena-lifestyle",
        "LifestyleData",
        "non-smoker, moderate physical activity",
    )
    .link("elena-lifestyle", "hasSource", "hospital-ehr");
    for d in [
        "elena-history",
        "elena-lifestyle",
        "elena-qol-week-2",
        "elena-qol-month-3",
    ] {
        b.link("elena", "hasPatientData", d);
    }
    b.link("elena", "consentsTo", "elena-care-consent")
        .describe(
            "elena-care-consent",
            "ConsentStatement",
            "use of records for treatment",
        )
        .link("elena-care-consent", "coversData", "elena-history")
        .link("elena-care-consent", "coversData", "elena-lifestyle")
        .lit(
            "elena-care-consent",
            "consentGranted",
            Literal::boolean(true),
        );

    b.stakeholder("dr-novak", "Petra Novak", "dermatologist")
        .stakeholder("dr-lindqvist", "Jonas Lindqvist", "surgeon")
        .stakeholder("nurse-okafor", "Grace Okafor", "wound care nurse")
        .stakeholder("dr-haddad", "Samir Haddad", "endocrinologist");
    b.describe(
        "elena-pathway",
        "MedicalPathway",
        "early melanoma with diabetes comorbidity",
    )
    .link("elena", "followsPathway", "elena-pathway")
    .link("elena-pathway", "achievesGoal", "elena-goal")
    .link("elena-pathway", "groundedIn", "melanoma-guideline")
    .describe(
        "elena-goal",
        "ClinicalGoal",
        "complete excision with clear margins",
    );
    let steps = [
        (
            "elena-step-1",
            "dermatology consultation and biopsy review",
            "dr-novak",
        ),
        ("elena-step-2", "wide local excision", "dr-lindqvist"),
        ("elena-step-3", "surgical wound check", "nurse-okafor"),
        ("elena-step-4", "diabetes medication review", "dr-haddad"),
    ];
    for (step, what, who) in steps {
        b.describe(step, "PathwayStep", what)
            .link("elena-pathway", "hasStep", step)
            .link(step, "executedBy", who);
    }
    b.chain(
        "stepPrecedes",
        &[
            "elena-step-1",
            "elena-step-2",
            "elena-step-3",
            "elena-step-4",
        ],
    )
    .link(
        "elena-step-2",
        "hasTreatmentAction",
        "elena-excision-action",
    )
    .describe(
        "elena-excision-action",
        "TreatmentAction",
        "excise lesion with 1 cm margin",
    )
    .link(
        "elena-step-2",
        "yieldsPerformance",
        "elena-excision-performance",
    )
    .link("elena-step-3", "monitoredBy", "wound-care-procedure");
}

fn markus(b: &mut Builder) {
    b.patient("markus", "Markus", 62)
        .diagnosis("markus", "markus-melanoma-dx", "markus-melanoma")
        .describe(
            "markus-melanoma",
            "PatientCancerDisease",
            "metastatic melanoma, stage IV",
        )
        .diagnosis("markus", "markus-hypertension-dx", "hypertension")
        .describe("hypertension", "Disease", "essential hypertension");

    b.link("markus", "treatedWith", "markus-immunotherapy")
        .link("markus", "treatedWith", "markus-prednisolone")
        .describe(
            "markus-immunotherapy",
            "Immunotherapy",
            "anti-PD-1 checkpoint inhibitor",
        )
        .describe(
            "markus-prednisolone",
            "Medication",
            "prednisolone 1 mg/kg tapering course",
        );

    let months = [
        ("baseline", "2024-03-04T09:00:00Z", "72.0"),
        ("month-3", "2024-06-04T09:00:00Z", "58.5"),
        ("month-6", "2024-09-04T09:00:00Z", "66.0"),
        ("month-12", "2025-03-04T09:00:00Z", "74.5"),
        ("month-18", "2025-09-04T09:00:00Z", "79.0"),
    ];
    let mut qol_states = Vec::new();
    b.ty("markus-qol-trajectory", "QoLTrajectory").link(
        "markus",
        "hasTrajectory",
        "markus-qol-trajectory",
    );
    for (label, when, score) in months {
        let instant = format!("markus-{label}");
        let state = format!("markus-qol-state-{label}");
        let info = format!("markus-qol-{label}");
        b.instant(&instant, when)
            .ty(&state, "QoLMeasurementState")
            .link("markus-qol-trajectory", "hasState", &state)
            .link(&state, "atTime", &instant)
            .link(&state, "recordsQoL", &info)
            .score(&info, score)
            .link("markus", "hasPatientData", &info);
        qol_states.push(state);
    }
    let refs: Vec<&str> = qol_states.iter().map(String::as_str).collect();
    b.chain("precedes", &refs);

    b.ty("markus-treatment-trajectory", "TreatmentTrajectory")
        .link("markus", "hasTrajectory", "markus-treatment-trajectory");
    let phases = [
        (
            "markus-tx-state-1",
            "checkpoint inhibitor induction",
            "markus-baseline",
        ),
        (
            "markus-tx-state-2",
            "treatment paused for colitis management",
            "markus-month-3",
        ),
        (
            "markus-tx-state-3",
            "maintenance after colitis resolution",
            "markus-month-6",
        ),
    ];
    for (state, what, when) in phases {
        b.describe(state, "TreatmentState", what)
            .link("markus-treatment-trajectory", "hasState", state)
            .link(state, "atTime", when);
    }
    b.chain(
        "precedes",
        &[
            "markus-tx-state-1",
            "markus-tx-state-2",
            "markus-tx-state-3",
        ],
    );

    b.describe(
        "markus-immunotherapy-followup",
        "CancerTherapyFollowup",
        "immunotherapy response and toxicity review",
    )
    .link(
        "markus-immunotherapy-followup",
        "followUpOfCancerTherapy",
        "markus-immunotherapy",
    )
    .link(
        "markus-immunotherapy-followup",
        "hasPerformanceEvaluation",
        "markus-immunotherapy-performance",
    )
    .link(
        "markus-immunotherapy-followup",
        "reportsOutcome",
        "markus-qol-outcome",
    )
    .link(
        "markus-immunotherapy-followup",
        "followUpReports",
        "markus-colitis-ae",
    )
    .describe(
        "markus-steroid-followup",
        "MedicationFollowup",
        "steroid taper and glucose review",
    )
    .link(
        "markus-steroid-followup",
        "followUpOfMedication",
        "markus-prednisolone",
    );
    b.ty("markus-immunotherapy-performance", "TreatmentPerformance")
        .link(
            "markus-immunotherapy-performance",
            "evaluatesTreatment",
            "markus-immunotherapy",
        )
        .link(
            "markus-immunotherapy-performance",
            "associatedWithDisease",
            "markus-melanoma",
        )
        .link(
            "markus-immunotherapy-performance",
            "hasMetric",
            "markus-response-metric",
        )
        .link(
            "markus-immunotherapy-performance",
            "measuredAt",
            "markus-month-3",
        )
        .link(
            "markus-immunotherapy-performance",
            "partOfTrajectory",
            "markus-treatment-trajectory",
        )
        .describe(
            "markus-response-metric",
            "EffectivenessMetric",
            "partial response by RECIST 1.1",
        )
        .describe(
            "markus-qol-outcome",
            "PatientCentredOutcome",
            "quality of life during immunotherapy",
        )
        .link("markus-qol-outcome", "basedOnQoL", "markus-qol-month-3");

    b.stakeholder("dr-weber", "Anna Weber", "oncologist")
        .stakeholder("dr-costa", "Luis Costa", "gastroenterologist");
    b.ty("markus-colitis-ae", "AdverseEvent")
        .link("markus-colitis-ae", "causedBy", "markus-immunotherapy")
        .link("markus-colitis-ae", "associatedWith", "markus-melanoma")
        .link("markus-colitis-ae", "recordedAt", "markus-month-3")
        .link("markus-colitis-ae", "hasSeverityGrade", "ctcae-grade-2")
        .link("markus-colitis-ae", "hasCategory", "markus-colitis")
        .link("markus-colitis-ae", "confirmedBy", "markus-colonoscopy")
        .link("markus-colitis-ae", "confirmedBy", "markus-calprotectin")
        .link("markus-colitis-ae", "reportedBy", "markus")
        .link("markus-colitis-ae", "managedByStakeholder", "dr-weber")
        .link("markus-colitis-ae", "managedByStakeholder", "dr-costa")
        .link(
            "markus-colitis-ae",
            "managedByTreatment",
            "markus-prednisolone",
        )
        .describe("markus-colitis", "Colitis", "immune-mediated colitis")
        .describe("markus-colonoscopy", "Test", "colonoscopy with biopsy")
        .describe("markus-calprotectin", "Test", "faecal calprotectin");

    b.ty("markus-colitis-event", "SafetyEvent")
        .link("markus-colitis-event", "involvesPatient", "markus")
        .link(
            "markus-colitis-event",
            "triggeredBy",
            "markus-immunotherapy",
        )
        .link("markus-colitis-event", "mitigatedBy", "irae-guideline")
        .link(
            "markus-colitis-event",
            "mitigatedBy",
            "steroid-taper-procedure",
        );

    b.describe(
        "markus-genomic",
        "GenomicData",
        "BRAF V600E somatic mutation",
    )
    .link("markus-genomic", "restrictedBy", "gdpr")
    .link("markus-genomic", "securedBy", "pseudonymisation-policy")
    .link("markus-genomic", "hasSource", "oncology-lab")
    .link("markus-genomic", "governedBy", "research-access-policy")
    .describe(
        "markus-history",
        "MedicalHistory",
        "hypertension treated since 2015",
    )
    .link("markus-history", "hasSource", "hospital-ehr")
    .link("markus-history", "governedBy", "clinical-access-policy")
    .describe(
        "markus-calprotectin-result",
        "TestData",
        "faecal calprotectin 480 ug/g",
    )
    .link("markus-calprotectin-result", "hasSource", "hospital-ehr");
    for d in [
        "markus-genomic",
        "markus-history",
        "markus-calprotectin-result",
    ] {
        b.link("markus", "hasPatientData", d);
    }
    b.link("markus", "consentsTo", "markus-genomic-consent")
        .describe(
            "markus-genomic-consent",
            "ConsentStatement",
            "research use of tumour genomics",
        )
        .link("markus-genomic-consent", "coversData", "markus-genomic")
        .lit(
            "markus-genomic-consent",
            "consentGranted",
            Literal::boolean(true),
        )
        .link("dr-weber", "accessesData", "markus-genomic");
}

fn aisha(b: &mut Builder) {
    b.patient("aisha", "Aisha", 39)
        .diagnosis(
            "aisha",
            "aisha-susceptibility-dx",
            "hereditary-melanoma-susceptibility",
        )
        .describe(
            "hereditary-melanoma-susceptibility",
            "Disease",
            "hereditary melanoma susceptibility",
        );

    b.describe("aisha-genomic", "GenomicData", "CDKN2A germline mutation")
        .link("aisha-genomic", "restrictedBy", "gdpr")
        .link("aisha-genomic", "securedBy", "pseudonymisation-policy")
        .link("aisha-genomic", "hasSource", "genetics-lab")
        .link("aisha-genomic", "governedBy", "research-access-policy")
        .describe(
            "aisha-lifestyle",
            "LifestyleData",
            "outdoor work with high UV exposure",
        )
        .link("aisha-lifestyle", "hasSource", "hospital-ehr")
        .describe(
            "aisha-psychosocial",
            "PsychosocialData",
            "elevated cancer-related worry",
        )
        .link("aisha-psychosocial", "hasSource", "hospital-ehr");
    for d in ["aisha-genomic", "aisha-lifestyle", "aisha-psychosocial"] {
        b.link("aisha", "hasPatientData", d);
    }
    b.link("aisha", "consentsTo", "aisha-genomic-consent")
        .describe(
            "aisha-genomic-consent",
            "ConsentStatement",
            "revocable research use of germline genomics",
        )
        .link("aisha-genomic-consent", "coversData", "aisha-genomic")
        .lit(
            "aisha-genomic-consent",
            "consentGranted",
            Literal::boolean(true),
        )
        .link("aisha", "consentsTo", "aisha-care-consent")
        .describe(
            "aisha-care-consent",
            "ConsentStatement",
            "use of records for prevention counselling",
        )
        .link("aisha-care-consent", "coversData", "aisha-lifestyle")
        .link("aisha-care-consent", "coversData", "aisha-psychosocial")
        .lit(
            "aisha-care-consent",
            "consentGranted",
            Literal::boolean(true),
        )
        .stakeholder("counsellor-reyes", "Sam Reyes", "genetic counsellor")
        .link("counsellor-reyes", "accessesData", "aisha-genomic");
}

/// The three personas plus shared reference data.
pub fn generate_personas() -> Dataset {
    let mut b = Builder::default();
    reference_data(&mut b);
    elena(&mut b);
    markus(&mut b);
    aisha(&mut b);
    b.ds
}

/// Patient individuals of the persona corpus.
pub const PERSONAS: [&str; 3] = ["elena", "markus", "aisha"];
