mod common;

use std::collections::BTreeMap;

use common::*;
use pmdt_core::query::{evaluate_local, parse_query, rewrite_with_subsumption};
use pmdt_core::vocab::{ex, pmdt};
use pmdt_core::{bootstrap_pmdt_schema, Assertion, Literal};
use pmdt_federation::{
    translate_to_local_plan, AccessPolicyRule, AuditAction, ColumnRef, ConsentRecord, Effect,
    ExecOptions, Federation, FederationError, LocalPlan, Payload, Selection, SiteDescriptor,
};
use proptest::prelude::*;

const ALL_AT_ZERO: [usize; 9] = [0; 9];

fn centralized(fed: &Federation, q: &str) -> pmdt_core::BindingSet {
    let ast = parse_query(q).unwrap();
    let expanded = rewrite_with_subsumption(&ast, fed.closure()).unwrap();
    evaluate_local(&expanded, &fed.lifted_union()).unwrap()
}

fn single(
    tables: Vec<(pmdt_federation::TableMapping, String)>,
) -> Result<Federation, FederationError> {
    let mut fed = Federation::new(bootstrap_pmdt_schema());
    let data: BTreeMap<String, String> = tables
        .iter()
        .map(|(m, c)| (m.table_name.clone(), c.clone()))
        .collect();
    let desc = SiteDescriptor {
        site_id: "a".into(),
        tables: tables.into_iter().map(|(m, _)| m).collect(),
        policies: vec![],
        consents: vec![],
    };
    fed.register_site_with_data(&desc, &data)?;
    Ok(fed)
}

#[test]
fn integer_grade_column_is_accepted() {
    let fed = single(vec![(
        table(
            "grades",
            "pmdt:SeverityGrade",
            "ex:grade/{id}",
            vec![col("grade", "pmdt:gradeValue", "integer")],
        ),
        "id,grade\ng,2\n".into(),
    )])
    .unwrap();
    assert!(fed.lifted_union().contains(&Assertion::new(
        ex("grade/g"),
        pmdt("gradeValue"),
        Literal::integer(2)
    )));
}

#[test]
fn unknown_property_is_a_mapping_mismatch() {
    let err = single(vec![(
        table(
            "t",
            "pmdt:Patient",
            "ex:p/{id}",
            vec![col("x", "pmdt:nonexistent", "string")],
        ),
        "id,x\n1,a\n".into(),
    )])
    .unwrap_err();
    assert!(
        matches!(err, FederationError::MappingSchemaMismatch { .. }),
        "{err}"
    );
}

#[test]
fn non_integer_cell_is_a_csv_type_error() {
    let err = single(vec![(
        table(
            "grades",
            "pmdt:SeverityGrade",
            "ex:grade/{id}",
            vec![col("grade", "pmdt:gradeValue", "integer")],
        ),
        "id,grade\ng1,2\ng2,two\n".into(),
    )])
    .unwrap_err();
    match err {
        FederationError::CsvType { row, column, .. } => {
            assert_eq!(row, 2);
            assert_eq!(column, "grade");
        }
        other => panic!("{other}"),
    }
}

#[test]
fn missing_placeholder_and_duplicates() {
    let err = single(vec![(
        table("t", "pmdt:Patient", "ex:p/{nope}", vec![]),
        "id\n1\n".into(),
    )])
    .unwrap_err();
    assert!(
        matches!(err, FederationError::TemplatePlaceholderMissing { .. }),
        "{err}"
    );
    let t = (
        table("t", "pmdt:Patient", "ex:p/{id}", vec![]),
        "id\n1\n".to_string(),
    );
    let err = single(vec![t.clone(), t]).unwrap_err();
    assert!(
        matches!(err, FederationError::DuplicateTable { .. }),
        "{err}"
    );
    let mut fed = federation(&ALL_AT_ZERO, false, vec![], all_consents());
    let d = SiteDescriptor {
        site_id: "site0".into(),
        tables: vec![],
        policies: vec![],
        consents: vec![],
    };
    assert!(matches!(
        fed.register_site_with_data(&d, &BTreeMap::new()),
        Err(FederationError::DuplicateSite(_))
    ));
}

#[test]
fn lifting_rows() {
    let fed = single(vec![
        (
            table(
                "patients",
                "pmdt:Patient",
                "ex:patient/{patient_id}",
                vec![col("age", "pmdt:ageYears", "integer")],
            ),
            "patient_id,age\nmarkus,62\n".into(),
        ),
        (
            table("empty", "pmdt:Surgery", "ex:s/{id}", vec![]),
            "id\n".into(),
        ),
    ])
    .unwrap();
    let ds = fed.lifted_union();
    assert_eq!(ds.len(), 2);
    assert!(ds.contains(&Assertion::typed(ex("patient/markus"), pmdt("Patient"))));
    assert!(ds.contains(&Assertion::new(
        ex("patient/markus"),
        pmdt("ageYears"),
        Literal::integer(62)
    )));
    let empty = single(vec![(
        table("empty", "pmdt:Surgery", "ex:s/{id}", vec![]),
        "id\n".into(),
    )])
    .unwrap();
    assert!(empty.lifted_union().is_empty());
}

#[test]
fn capability_forced_split_and_broadcast() {
    let mut assignment = ALL_AT_ZERO;
    assignment[6] = 1; // grades
    let fed = federation(&assignment, false, vec![], all_consents());
    let q =
        parse_query("SELECT ?ae ?v WHERE { ?ae pmdt:hasSeverityGrade ?g . ?g pmdt:gradeValue ?v }")
            .unwrap();
    let plan = fed.decompose(&q).unwrap();
    assert_eq!(plan.groups.len(), 2);
    assert!(plan
        .groups
        .iter()
        .all(|g| g.sites.len() == 1 && g.patterns.len() == 1));
    let out = fed
        .execute(&q, "clinician", &ExecOptions::default())
        .unwrap();
    assert_eq!(out.plan.coordinator_joins.len(), 2);
    assert_eq!(out.bindings, centralized(&fed, &q.render()));

    let split = federation(&ALL_AT_ZERO, true, vec![], all_consents());
    let q = parse_query("SELECT ?p ?a WHERE { ?p pmdt:ageYears ?a }").unwrap();
    let plan = split.decompose(&q).unwrap();
    assert_eq!(plan.groups.len(), 1);
    assert_eq!(plan.groups[0].sites.len(), 2);
    let out = split
        .execute(&q, "clinician", &ExecOptions::default())
        .unwrap();
    assert_eq!(out.bindings.len(), 2);
}

#[test]
fn disconnected_patterns_are_not_grouped() {
    let fed = federation(&ALL_AT_ZERO, false, vec![], all_consents());
    let q = parse_query(
        "SELECT ?a ?b WHERE { ex:patient/markus pmdt:ageYears ?a . ex:patient/elena pmdt:ageYears ?b }",
    )
    .unwrap();
    let plan = fed.decompose(&q).unwrap();
    assert_eq!(plan.groups.len(), 2);
    let out = fed
        .execute(&q, "clinician", &ExecOptions::default())
        .unwrap();
    assert_eq!(out.bindings, centralized(&fed, &q.render()));
}

#[test]
fn unanswerable_and_unknown() {
    let fed = federation(&ALL_AT_ZERO, false, vec![], all_consents());
    let q = parse_query("SELECT ?x WHERE { ?x pmdt:qolScore ?s }").unwrap();
    match fed.decompose(&q).unwrap_err() {
        FederationError::UnanswerablePattern { term, .. } => assert_eq!(term, "pmdt:qolScore"),
        other => panic!("{other}"),
    }
    let q = parse_query("SELECT ?x WHERE { ?x a pmdt:Nope }").unwrap();
    assert!(matches!(
        fed.decompose(&q),
        Err(FederationError::UnknownClass(_))
    ));
    let q = parse_query("SELECT ?x ?p WHERE { ?x ?p ex:y . ?x a pmdt:Patient }").unwrap();
    assert!(matches!(
        fed.decompose(&q),
        Err(FederationError::UnsupportedPattern(_))
    ));
}

#[test]
fn local_plans() {
    let fed = federation(&ALL_AT_ZERO, false, vec![], all_consents());
    let site = fed.site("site0").unwrap();
    let q = parse_query("SELECT ?p ?a WHERE { ?p pmdt:ageYears ?a }").unwrap();
    let plan = translate_to_local_plan(site, &q).unwrap();
    assert_eq!(plan.units.len(), 1);
    assert_eq!(plan.units[0].scans[0].table, "patients");
    assert_eq!(
        plan.units[0].scans[0].outputs,
        vec![
            (ColumnRef::Subject, "p".to_string()),
            (ColumnRef::Column("age".into()), "a".to_string())
        ]
    );

    let q = parse_query("SELECT ?n ?a WHERE { ?p pmdt:personName ?n ; pmdt:ageYears ?a }").unwrap();
    let plan = translate_to_local_plan(site, &q).unwrap();
    assert_eq!(plan.units.len(), 1, "{}", plan.to_sql());
    assert_eq!(plan.units[0].scans.len(), 1);

    let q = parse_query("SELECT ?a WHERE { ex:patient/markus pmdt:ageYears ?a }").unwrap();
    let plan = translate_to_local_plan(site, &q).unwrap();
    assert_eq!(
        plan.units[0].scans[0].selections,
        vec![Selection::Cell {
            column: "patient_id".into(),
            value: "markus".into()
        }]
    );
}

#[test]
fn sql_rendering_round_trips() {
    let fed = federation(&ALL_AT_ZERO, false, vec![], all_consents());
    let site = fed.site("site0").unwrap();
    for text in QUERIES
        .iter()
        .chain(["SELECT ?p WHERE { ?p pmdt:treatedWith ?t . ?t a pmdt:Vaccination }"].iter())
    {
        let q = rewrite_with_subsumption(&parse_query(text).unwrap(), fed.closure()).unwrap();
        let plan = translate_to_local_plan(site, &q).unwrap();
        let sql = plan.to_sql();
        assert_eq!(LocalPlan::parse_sql(&sql).unwrap(), plan, "{sql}");
    }
}

#[test]
fn revoked_genomic_consent_is_enforced_and_audited() {
    let mut consents = all_consents();
    consents.push(ConsentRecord {
        patient_iri: "ex:patient/markus".into(),
        data_category: "pmdt:GenomicData".into(),
        granted: false,
    });
    let fed = federation(&ALL_AT_ZERO, false, vec![], consents);
    let q = parse_query(QUERIES[4]).unwrap();
    let out = fed
        .execute(&q, "researcher", &ExecOptions::default())
        .unwrap();
    let names: Vec<String> = out
        .bindings
        .rows
        .iter()
        .map(|r| r[0].to_ntriples())
        .collect();
    assert_eq!(out.bindings.len(), 1, "{names:?}");
    let exclusions: Vec<_> = out
        .audit
        .iter()
        .filter(|e| e.action == AuditAction::ConsentExclusion)
        .collect();
    assert_eq!(exclusions.len(), 1);
    assert!(exclusions[0].detail.contains("pmdt:GenomicData"));
    let unrestricted = federation(&ALL_AT_ZERO, false, vec![], all_consents());
    assert_eq!(
        unrestricted
            .execute(&q, "researcher", &ExecOptions::default())
            .unwrap()
            .bindings
            .len(),
        2
    );
    let none = federation(&ALL_AT_ZERO, false, vec![], vec![]);
    assert!(none
        .execute(&q, "researcher", &ExecOptions::default())
        .unwrap()
        .bindings
        .is_empty());
}

#[test]
fn policies() {
    let deny_history = vec![AccessPolicyRule {
        role: "researcher".into(),
        effect: Effect::Deny,
        scope: vec!["pmdt:MedicalHistory".into()],
    }];
    let fed = federation(&ALL_AT_ZERO, false, deny_history, all_consents());
    let q = parse_query(QUERIES[3]).unwrap();
    let out = fed
        .execute(&q, "researcher", &ExecOptions::default())
        .unwrap();
    assert_eq!(out.bindings, centralized(&fed, QUERIES[3]));
    assert!(out
        .audit
        .iter()
        .all(|e| e.action != AuditAction::PolicyDenial));

    let deny_genomic = vec![
        AccessPolicyRule {
            role: "researcher".into(),
            effect: Effect::Allow,
            scope: vec!["pmdt:PatientData".into()],
        },
        AccessPolicyRule {
            role: "researcher".into(),
            effect: Effect::Deny,
            scope: vec!["pmdt:GenomicData".into()],
        },
    ];
    let fed = federation(&ALL_AT_ZERO, false, deny_genomic, all_consents());
    let q =
        parse_query("SELECT ?d ?m WHERE { ?d a pmdt:GenomicData ; pmdt:description ?m }").unwrap();
    match fed.execute(&q, "researcher", &ExecOptions::default()) {
        Err(FederationError::PolicyDenied { role, .. }) => assert_eq!(role, "researcher"),
        other => panic!("{other:?}"),
    }
    assert_eq!(
        fed.execute(&q, "clinician", &ExecOptions::default())
            .unwrap()
            .bindings
            .len(),
        2
    );
    let denials: Vec<_> = fed
        .site("site0")
        .unwrap()
        .audit_log()
        .into_iter()
        .filter(|e| e.action == AuditAction::PolicyDenial)
        .collect();
    assert_eq!(denials.len(), 1);
    assert!(matches!(
        fed.execute(&q, "intruder", &ExecOptions::default()),
        Err(FederationError::UnknownRole(_))
    ));
}

#[test]
fn responses_carry_only_requested_variables() {
    let mut assignment = ALL_AT_ZERO;
    assignment[5] = 1;
    assignment[6] = 2;
    let fed = federation(&assignment, true, vec![], all_consents());
    for text in QUERIES {
        let q = parse_query(text).unwrap();
        let out = fed
            .execute(&q, "clinician", &ExecOptions::default())
            .unwrap();
        let vars: Vec<&str> = q.pattern_variables();
        for pair in out.messages.chunks(2) {
            let Payload::Query { text: sub, .. } = &pair[0].payload else {
                panic!("request first")
            };
            let requested = parse_query(sub).unwrap().select;
            let Payload::Bindings(b) = &pair[1].payload else {
                panic!("bindings expected")
            };
            assert_eq!(b.columns, requested);
            assert!(b.columns.iter().all(|c| vars.contains(&c.as_str())));
            assert_eq!(
                pmdt_federation::WireMessage::decode(&pair[1].encode()).unwrap(),
                pair[1]
            );
        }
    }
}

#[test]
fn unavailable_site() {
    let mut assignment = ALL_AT_ZERO;
    assignment[6] = 1;
    let fed = federation(&assignment, false, vec![], all_consents());
    let q = parse_query(QUERIES[2]).unwrap();
    let opts = ExecOptions {
        unavailable: ["site1".to_string()].into(),
        ..Default::default()
    };
    assert!(
        matches!(fed.execute(&q, "clinician", &opts), Err(FederationError::SiteUnavailable(s)) if s == "site1")
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn federated_equals_centralized(
        nsites in 2..=4usize,
        raw in prop::collection::vec(0..4usize, 9),
        split in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let assignment: Vec<usize> = raw.iter().map(|s| s % nsites).collect();
        let fed = federation(&assignment, split, vec![], all_consents());
        for text in QUERIES {
            let q = parse_query(text).unwrap();
            let expected = centralized(&fed, text);
            let plain = fed.execute(&q, "clinician", &ExecOptions::default()).unwrap();
            prop_assert_eq!(&plain.bindings, &expected, "{}", text);
            let shuffled = fed.execute(&q, "clinician", &ExecOptions { shuffle_seed: Some(seed), ..Default::default() }).unwrap();
            prop_assert_eq!(
                plain.bindings.to_csv(&q.prefixes),
                shuffled.bindings.to_csv(&q.prefixes)
            );
        }
    }

    #[test]
    fn revoking_consent_never_adds_rows(patient in 0..3usize, category in 0..2usize) {
        let full = federation(&ALL_AT_ZERO, false, vec![], all_consents());
        let mut consents = all_consents();
        consents.push(ConsentRecord {
            patient_iri: format!("ex:patient/{}", ["elena", "markus", "aisha"][patient]),
            data_category: ["pmdt:GenomicData", "pmdt:PatientData"][category].into(),
            granted: false,
        });
        let revoked = federation(&ALL_AT_ZERO, false, vec![], consents);
        for text in QUERIES {
            let q = parse_query(text).unwrap();
            if q.limit.is_some() {
                continue;
            }
            let a = full.execute(&q, "clinician", &ExecOptions::default()).unwrap().bindings;
            let b = revoked.execute(&q, "clinician", &ExecOptions::default()).unwrap().bindings;
            prop_assert!(b.rows.iter().all(|r| a.rows.contains(r)));
        }
    }
}
