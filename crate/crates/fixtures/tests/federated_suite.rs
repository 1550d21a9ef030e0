use pmdt_core::parse_query;
use pmdt_core::query::evaluate_local;
use pmdt_core::vocab::ex;
use pmdt_federation::{AuditAction, ConsentRecord, ExecOptions, FederationError};
use pmdt_fixtures::*;

#[test]
fn suite_over_random_partitions() {
    let bundle = generate_bundle().unwrap();
    let consents = full_consents(&bundle.personas);
    for seed in 0..8 {
        let sites = random_partition(&bundle.tables, &consents, None, seed);
        let fed = federation(bundle.schema.clone(), &sites).unwrap();
        for q in &bundle.suite {
            let ast = parse_query(q.text).unwrap();
            let plain = fed
                .execute(&ast, "clinician", &ExecOptions::default())
                .unwrap();
            assert_eq!(plain.bindings, q.expected, "seed {seed}, {}", q.name);
            let shuffled = ExecOptions {
                shuffle_seed: Some(seed),
                ..Default::default()
            };
            let again = fed.execute(&ast, "clinician", &shuffled).unwrap();
            assert_eq!(
                again.bindings.to_csv(&ast.prefixes),
                plain.bindings.to_csv(&ast.prefixes)
            );
        }
    }
}

#[test]
fn revoked_genomic_consent_matches_removing_the_record() {
    let bundle = generate_bundle().unwrap();
    let mut consents = full_consents(&bundle.personas);
    consents.push(ConsentRecord {
        patient_iri: "ex:markus".into(),
        data_category: "pmdt:GenomicData".into(),
        granted: false,
    });
    let closure = pmdt_core::reasoner::classify(&bundle.schema);
    let sites = three_site_split(&bundle.tables, &closure, &consents);
    let fed = federation(bundle.schema.clone(), &sites).unwrap();
    let mut without = bundle.personas.clone();
    without.remove_individual(&ex("markus-genomic"));
    let mut changed = 0;
    for q in &bundle.suite {
        let ast = parse_query(q.text).unwrap();
        let out = fed
            .execute(&ast, "clinician", &ExecOptions::default())
            .unwrap();
        let rewritten = pmdt_core::rewrite_with_subsumption(&ast, &closure).unwrap();
        assert_eq!(
            out.bindings,
            evaluate_local(&rewritten, &without).unwrap(),
            "{}",
            q.name
        );
        if out.bindings != q.expected {
            changed += 1;
            assert!(
                out.audit
                    .iter()
                    .any(|e| e.action == AuditAction::ConsentExclusion),
                "{}",
                q.name
            );
        }
    }
    assert_eq!(changed, 2);
}

#[test]
fn researchers_cannot_read_medical_histories() {
    let bundle = generate_bundle().unwrap();
    let fed = federation(bundle.schema.clone(), &bundle.sites).unwrap();
    let q = parse_query("SELECT ?p ?h WHERE { ?p pmdt:hasPatientData ?d . ?d a pmdt:MedicalHistory ; pmdt:description ?h }").unwrap();
    assert!(matches!(
        fed.execute(&q, "researcher", &ExecOptions::default()),
        Err(FederationError::PolicyDenied { .. })
    ));
    assert_eq!(
        fed.execute(&q, "clinician", &ExecOptions::default())
            .unwrap()
            .bindings
            .len(),
        2
    );
    let treatments = bundle
        .suite
        .iter()
        .find(|q| q.name == "treatments")
        .unwrap();
    let ast = parse_query(treatments.text).unwrap();
    assert_eq!(
        fed.execute(&ast, "researcher", &ExecOptions::default())
            .unwrap()
            .bindings,
        treatments.expected
    );
}
