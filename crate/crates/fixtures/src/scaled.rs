//! A larger synthetic cohort for timing checks.

use pmdt_core::Dataset;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::personas::{generate_personas, Builder};

const THERAPIES: &[(&str, &str, &str, &str)] = &[
    (
        "Immunotherapy",
        "CancerTherapyFollowup",
        "followUpOfCancerTherapy",
        "checkpoint inhibitor",
    ),
    (
        "Chemotherapy",
        "CancerTherapyFollowup",
        "followUpOfCancerTherapy",
        "dacarbazine",
    ),
    (
        "RadiationTherapy",
        "CancerTherapyFollowup",
        "followUpOfCancerTherapy",
        "adjuvant radiotherapy",
    ),
    (
        "Surgery",
        "SurgeryFollowup",
        "followUpOfSurgery",
        "wide local excision",
    ),
];

const CATEGORIES: &[&str] = &[
    "Colitis",
    "Pneumonitis",
    "Hepatitis",
    "Endocrinopathy",
    "Myocarditis",
    "CytokineReleaseSyndrome",
];

fn synthetic_patient(b: &mut Builder, n: usize, rng: &mut ChaCha8Rng) {
    let p = format!("pt-{n:05}");
    let id = |s: &str| format!("{p}-{s}");
    b.patient(&p, &format!("Patient {n}"), rng.gen_range(25..90))
        .diagnosis(&p, &id("dx"), &id("melanoma"))
        .describe(
            &id("melanoma"),
            "PatientCancerDisease",
            "cutaneous melanoma",
        );
    if rng.gen_bool(0.5) {
        let comorbidity = ["hypertension", "type-2-diabetes"]
            .choose(rng)
            .expect("non-empty");
        b.diagnosis(&p, &id("dx2"), comorbidity);
    }

    let (class, followup, link, what) = *THERAPIES.choose(rng).expect("non-empty");
    let tx = id("tx");
    b.describe(&tx, class, what)
        .link(&p, "treatedWith", &tx)
        .ty(&id("followup"), followup)
        .link(&id("followup"), link, &tx)
        .link(&id("followup"), "hasPerformanceEvaluation", &id("perf"))
        .ty(&id("perf"), "TreatmentPerformance")
        .link(&id("perf"), "evaluatesTreatment", &tx)
        .link(&id("perf"), "hasMetric", &id("metric"))
        .describe(
            &id("metric"),
            "EffectivenessMetric",
            ["complete response", "partial response", "stable disease"]
                .choose(rng)
                .expect("non-empty"),
        );

    let traj = id("qol-trajectory");
    b.ty(&traj, "QoLTrajectory")
        .link(&p, "hasTrajectory", &traj);
    let mut states = Vec::new();
    for (k, month) in [0u32, 3, 6].into_iter().enumerate() {
        let state = id(&format!("qol-state-{k}"));
        let instant = id(&format!("t{k}"));
        let info = id(&format!("qol-{k}"));
        b.instant(&instant, &format!("2024-{:02}-01T09:00:00Z", 1 + month))
            .ty(&state, "QoLMeasurementState")
            .link(&traj, "hasState", &state)
            .link(&state, "atTime", &instant)
            .link(&state, "recordsQoL", &info)
            .score(&info, &format!("{}.5", rng.gen_range(30..95)))
            .link(&p, "hasPatientData", &info);
        states.push(state);
    }
    let refs: Vec<&str> = states.iter().map(String::as_str).collect();
    b.chain("precedes", &refs);

    if rng.gen_bool(0.6) {
        let ae = id("ae");
        b.ty(&ae, "AdverseEvent")
            .link(&ae, "causedBy", &tx)
            .link(&ae, "recordedAt", &id("t1"))
            .link(
                &ae,
                "hasSeverityGrade",
                &format!("ctcae-grade-{}", rng.gen_range(1..=4)),
            )
            .link(&ae, "hasCategory", &id("ae-category"))
            .describe(
                &id("ae-category"),
                CATEGORIES.choose(rng).expect("non-empty"),
                "immune-related toxicity",
            );
    }
    if rng.gen_bool(0.3) {
        let g = id("genomic");
        b.describe(
            &g,
            "GenomicData",
            ["BRAF V600E", "NRAS Q61R", "CDKN2A"]
                .choose(rng)
                .expect("non-empty"),
        )
        .link(&g, "restrictedBy", "gdpr")
        .link(&p, "hasPatientData", &g);
    }
}

/// The persona corpus plus seeded synthetic patients until the dataset holds
/// at least `min_assertions` assertions.
pub fn generate_scaled(min_assertions: usize, seed: u64) -> Dataset {
    let mut b = Builder {
        ds: generate_personas(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = 0;
    while b.ds.len() < min_assertions {
        synthetic_patient(&mut b, n, &mut rng);
        n += 1;
    }
    b.ds
}
