#![allow(dead_code)]

use std::collections::BTreeMap;

use pmdt_core::bootstrap_pmdt_schema;
use pmdt_federation::{
    AccessPolicyRule, ColumnMapping, ColumnTarget, ConsentRecord, Federation, SiteDescriptor,
    TableMapping,
};

pub fn col(column: &str, property: &str, datatype: &str) -> ColumnMapping {
    ColumnMapping {
        column: column.into(),
        property: property.into(),
        target: ColumnTarget::Datatype(datatype.into()),
    }
}

pub fn link(column: &str, property: &str, template: &str) -> ColumnMapping {
    ColumnMapping {
        column: column.into(),
        property: property.into(),
        target: ColumnTarget::IriTemplate(template.into()),
    }
}

pub fn table(name: &str, class: &str, template: &str, columns: Vec<ColumnMapping>) -> TableMapping {
    TableMapping {
        table_name: name.into(),
        csv_path: format!("{name}.csv").into(),
        row_class: class.into(),
        iri_template: template.into(),
        patient_template: None,
        columns,
    }
}

/// A small hospital: (mapping, CSV) per table.
pub fn hospital() -> Vec<(TableMapping, String)> {
    let mut genomics = table(
        "genomics",
        "pmdt:GenomicData",
        "ex:data/{data_id}",
        vec![col("marker", "pmdt:description", "string")],
    );
    genomics.patient_template = Some("ex:patient/{patient_id}".into());
    vec![
        (
            table(
                "patients",
                "pmdt:Patient",
                "ex:patient/{patient_id}",
                vec![
                    col("name", "pmdt:personName", "string"),
                    col("age", "pmdt:ageYears", "integer"),
                ],
            ),
            "patient_id,name,age\nelena,Elena,54\nmarkus,Markus,62\naisha,Aisha,\n".into(),
        ),
        (
            table(
                "patient_treatments",
                "pmdt:Patient",
                "ex:patient/{patient_id}",
                vec![link(
                    "treatment_id",
                    "pmdt:treatedWith",
                    "ex:treatment/{treatment_id}",
                )],
            ),
            "patient_id,treatment_id\nelena,surgery1\nmarkus,io1\nmarkus,steroid1\n".into(),
        ),
        (
            table(
                "immunotherapies",
                "pmdt:Immunotherapy",
                "ex:treatment/{treatment_id}",
                vec![],
            ),
            "treatment_id\nio1\n".into(),
        ),
        (
            table(
                "surgeries",
                "pmdt:Surgery",
                "ex:treatment/{treatment_id}",
                vec![],
            ),
            "treatment_id\nsurgery1\n".into(),
        ),
        (
            table(
                "medications",
                "pmdt:Medication",
                "ex:treatment/{treatment_id}",
                vec![],
            ),
            "treatment_id\nsteroid1\n".into(),
        ),
        (
            table(
                "adverse_events",
                "pmdt:AdverseEvent",
                "ex:ae/{ae_id}",
                vec![
                    link(
                        "treatment_id",
                        "pmdt:causedBy",
                        "ex:treatment/{treatment_id}",
                    ),
                    link("grade_id", "pmdt:hasSeverityGrade", "ex:grade/{grade_id}"),
                ],
            ),
            "ae_id,treatment_id,grade_id\ncolitis,io1,g2\nwound,surgery1,g1\n".into(),
        ),
        (
            table(
                "grades",
                "pmdt:SeverityGrade",
                "ex:grade/{grade_id}",
                vec![col("value", "pmdt:gradeValue", "integer")],
            ),
            "grade_id,value\ng1,1\ng2,2\n".into(),
        ),
        (
            genomics,
            "data_id,patient_id,marker\nbrca,aisha,BRCA1\nmk-tmb,markus,TMB-high\n".into(),
        ),
        (
            table(
                "patient_data",
                "pmdt:Patient",
                "ex:patient/{patient_id}",
                vec![link("data_id", "pmdt:hasPatientData", "ex:data/{data_id}")],
            ),
            "patient_id,data_id\naisha,brca\nmarkus,mk-tmb\n".into(),
        ),
    ]
}

pub fn all_consents() -> Vec<ConsentRecord> {
    ["elena", "markus", "aisha"]
        .iter()
        .map(|p| ConsentRecord {
            patient_iri: format!("ex:patient/{p}"),
            data_category: "pmdt:PatientData".into(),
            granted: true,
        })
        .collect()
}

/// Federation with table `i` placed at site `assignment[i]`. When `split`
/// is set, the patients table is divided row-wise between sites 0 and 1.
pub fn federation(
    assignment: &[usize],
    split: bool,
    policies: Vec<AccessPolicyRule>,
    consents: Vec<ConsentRecord>,
) -> Federation {
    let tables = hospital();
    let nsites = assignment
        .iter()
        .max()
        .map_or(1, |m| m + 1)
        .max(if split { 2 } else { 1 });
    let mut descs: Vec<(SiteDescriptor, BTreeMap<String, String>)> = (0..nsites)
        .map(|i| {
            (
                SiteDescriptor {
                    site_id: format!("site{i}"),
                    tables: Vec::new(),
                    policies: policies.clone(),
                    consents: consents.clone(),
                },
                BTreeMap::new(),
            )
        })
        .collect();
    for ((mapping, csv), &site) in tables.into_iter().zip(assignment) {
        if split && mapping.table_name == "patients" {
            let mut lines = csv.lines();
            let header = lines.next().unwrap();
            let rows: Vec<&str> = lines.collect();
            for (half, s) in [(0, 0usize), (1, 1usize)] {
                let mut m = mapping.clone();
                m.table_name = format!("patients_{half}");
                let body: Vec<&str> = rows
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % 2 == half)
                    .map(|(_, r)| *r)
                    .collect();
                descs[s].1.insert(
                    m.table_name.clone(),
                    format!("{header}\n{}\n", body.join("\n")),
                );
                descs[s].0.tables.push(m);
            }
            continue;
        }
        descs[site].1.insert(mapping.table_name.clone(), csv);
        descs[site].0.tables.push(mapping);
    }
    let mut fed = Federation::new(bootstrap_pmdt_schema());
    for (d, data) in descs {
        fed.register_site_with_data(&d, &data).unwrap();
    }
    fed
}

pub const QUERIES: &[&str] = &[
    "SELECT ?p ?a WHERE { ?p pmdt:ageYears ?a }",
    "SELECT ?p ?n ?a WHERE { ?p a pmdt:Patient ; pmdt:personName ?n ; pmdt:ageYears ?a FILTER(?a > 55) }",
    "SELECT ?ae ?v WHERE { ?ae pmdt:causedBy ?t . ?t a pmdt:Immunotherapy . ?ae pmdt:hasSeverityGrade ?g . ?g pmdt:gradeValue ?v }",
    "SELECT ?p ?t WHERE { ?p pmdt:treatedWith ?t . ?t a pmdt:Treatment } ORDER BY ?t",
    "SELECT ?n ?m WHERE { ?p pmdt:personName ?n ; pmdt:hasPatientData ?d . ?d pmdt:description ?m }",
    "SELECT ?ae WHERE { ?ae a pmdt:AdverseEvent ; pmdt:hasSeverityGrade ?g . ?g pmdt:gradeValue ?v FILTER(?v >= 2) }",
    "SELECT ?p WHERE { ?p pmdt:treatedWith ex:treatment/io1 }",
    "SELECT ?a WHERE { ex:patient/markus pmdt:ageYears ?a }",
    "SELECT ?p ?n WHERE { ?p pmdt:personName ?n } ORDER BY ?n LIMIT 2",
];
