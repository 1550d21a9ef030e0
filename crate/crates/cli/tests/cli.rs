use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pmdt_core::{bootstrap_pmdt_schema, parse_turtle, BindingSet, Dataset, Strictness};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../fixtures/data")
}

fn pmdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmdt"))
        .args(args)
        .env_remove("PMDT_PREFIXES")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let d = data();
    let clean = pmdt(&["validate", "--strict", path(&d.join("personas.ttl"))]);
    assert_eq!(clean.status.code(), Some(0));
    assert!(clean.stdout.is_empty());

    let bad = pmdt(&[
        "validate",
        path(&d.join("violations/diagnosis-two-patients.ttl")),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let out = stdout(&bad);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("violation\tmax-cardinality\t"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.ttl");
    std::fs::write(&broken, "ex:a a pmdt:Patient ;\n  pmdt:ageYears \"x\n").unwrap();
    let o = pmdt(&["validate", path(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.ttl"));
}

#[test]
fn query_formats_and_codes() {
    let d = data();
    let personas = d.join("personas.ttl");
    let q = "SELECT ?p WHERE { ?p a pmdt:Patient }";
    let table = pmdt(&["query", path(&personas), "-q", q]);
    assert_eq!(table.status.code(), Some(0));
    assert_eq!(stdout(&table).lines().count(), 5);

    let csv = pmdt(&["query", path(&personas), "-q", q, "--format", "csv"]);
    let parsed = BindingSet::from_csv(&stdout(&csv), bootstrap_pmdt_schema().prefixes()).unwrap();
    assert_eq!(parsed.len(), 3);

    let none = pmdt(&[
        "query",
        path(&personas),
        "-q",
        "SELECT ?p WHERE { ?p pmdt:ageYears 200 }",
        "--format",
        "csv",
    ]);
    assert_eq!(none.status.code(), Some(0));
    assert_eq!(stdout(&none), "p\n");

    assert_eq!(
        pmdt(&["query", path(&personas), "-q", "SELECT ?x WHERE { }"])
            .status
            .code(),
        Some(2)
    );
    let incomparable = "SELECT ?p WHERE { ?p pmdt:personName ?n FILTER(?n > 3) }";
    let o = pmdt(&["query", path(&personas), "-q", incomparable]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("evaluation-error"));
}

#[test]
fn fedquery_matches_local_query() {
    let d = data();
    let rq = d.join("suite/irae-after-immunotherapy.rq");
    let local = pmdt(&[
        "query",
        path(&d.join("personas.ttl")),
        "-q",
        path(&rq),
        "--format",
        "csv",
    ]);
    let fed = pmdt(&[
        "fedquery",
        path(&d.join("federation")),
        "-q",
        path(&rq),
        "--format",
        "csv",
    ]);
    assert_eq!(fed.status.code(), Some(0));
    assert_eq!(stdout(&fed), stdout(&local));
    assert_eq!(
        stdout(&fed),
        std::fs::read_to_string(d.join("suite/irae-after-immunotherapy.expected.csv")).unwrap()
    );
}

#[test]
fn fedquery_failures() {
    let d = data();
    let fed = d.join("federation");
    let history = "SELECT ?h WHERE { ?d a pmdt:MedicalHistory ; pmdt:description ?h }";
    let denied = pmdt(&[
        "fedquery",
        path(&fed),
        "--role",
        "researcher",
        "-q",
        history,
    ]);
    assert_eq!(denied.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&denied.stderr).contains("policy-denied"));
    let unanswerable = pmdt(&[
        "fedquery",
        path(&fed),
        "-q",
        "SELECT ?s WHERE { ?x pmdt:intervalStart ?s }",
    ]);
    assert_eq!(unanswerable.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&unanswerable.stderr).contains("unanswerable-pattern"));
    let down = pmdt(&[
        "fedquery",
        path(&fed),
        "--unavailable",
        "site-b",
        "-q",
        path(&d.join("suite/treatments.rq")),
    ]);
    assert_eq!(down.status.code(), Some(3));
}

#[test]
fn show_wire_carries_only_selected_columns() {
    let d = data();
    let q =
        "SELECT ?name WHERE { ?p pmdt:personName ?name ; pmdt:ageYears ?age FILTER(?age > 60) }";
    let o = pmdt(&[
        "fedquery",
        path(&d.join("federation")),
        "-q",
        q,
        "--show-wire",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let wire = out.split("# wire").nth(1).unwrap();
    for block in wire.split("[").filter(|b| b.contains("\nbindings\n")) {
        let header = block.lines().nth(3).unwrap();
        assert_eq!(header, "name", "{block}");
        assert!(!block.contains("62"));
    }
}

#[test]
fn export_round_trips_and_is_stable() {
    let d = data();
    let dir = tempfile::tempdir().unwrap();
    let schema_out = dir.path().join("schema.ttl");
    assert_eq!(
        pmdt(&["export", "--what", "schema", "--out", path(&schema_out)])
            .status
            .code(),
        Some(0)
    );
    let doc = parse_turtle(&std::fs::read_to_string(&schema_out).unwrap()).unwrap();
    assert_eq!(doc.schema_graph().unwrap(), bootstrap_pmdt_schema());

    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("merged-{i}.ttl"));
        let o = pmdt(&[
            "export",
            "--what",
            "merged",
            "--out",
            path(&out),
            "--federation",
            path(&d.join("federation")),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let inst = dir.path().join("instances.ttl");
    pmdt(&[
        "export",
        "--what",
        "instances",
        "--out",
        path(&inst),
        path(&d.join("personas.ttl")),
    ]);
    let schema = bootstrap_pmdt_schema();
    assert_eq!(
        Dataset::load(&inst, &schema, Strictness::Strict).unwrap(),
        Dataset::load(d.join("personas.ttl"), &schema, Strictness::Strict).unwrap()
    );
    assert_eq!(
        pmdt(&["export", "--what", "nope", "--out", path(&inst)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pmdt(&[
            "export",
            "--what",
            "schema",
            "--out",
            path(&dir.path().join("missing/x.ttl"))
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn prefixes_from_environment() {
    let d = data();
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("prefixes.ttl");
    std::fs::write(&table, "@prefix demo: <http://example.org/> .\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pmdt"))
        .args([
            "query",
            path(&d.join("personas.ttl")),
            "-q",
            "SELECT ?a WHERE { demo:markus pmdt:ageYears ?a }",
        ])
        .env("PMDT_PREFIXES", &table)
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("62"));
}

#[test]
fn fixtures_command_reproduces_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmdt(&["fixtures", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    for rel in [
        "personas.ttl",
        "federation/site-b.json",
        "suite/comorbidity.expected.csv",
    ] {
        assert_eq!(
            std::fs::read(dir.path().join(rel)).unwrap(),
            std::fs::read(data().join(rel)).unwrap(),
            "{rel}"
        );
    }
}
