//! Distributing fixture tables over simulated hospital sites.

use std::collections::BTreeMap;

use pmdt_core::reasoner::SubsumptionClosure;
use pmdt_core::vocab::pmdt;
use pmdt_core::{Dataset, SchemaGraph};
use pmdt_federation::{
    AccessPolicyRule, ConsentRecord, Effect, Federation, FederationError, SiteDescriptor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tables::TableData;

/// A site descriptor with the CSV text of each of its tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteData {
    pub descriptor: SiteDescriptor,
    pub csv: BTreeMap<String, String>,
}

pub const SITE_IDS: [&str; 3] = ["site-a", "site-b", "site-c"];

/// Site of the three-way split that owns tables of `class`: clinical
/// records and pathways at `site-a`, treatments, trajectories and adverse
/// events at `site-b`, patient data and governance at `site-c`.
pub fn home_site(class: &pmdt_core::Iri, closure: &SubsumptionClosure) -> usize {
    let under = |root: &str| closure.is_subclass(class, &pmdt(root));
    let b = [
        "Treatment",
        "TreatmentFollowup",
        "TreatmentPerformance",
        "Metric",
        "Trajectory",
        "State",
        "TimeInstant",
        "TimeInterval",
        "AdverseEvent",
        "AdverseEventCategory",
        "SeverityGrade",
        "Test",
        "SafetyEvent",
    ];
    let c = [
        "PatientData",
        "DataSource",
        "ConsentStatement",
        "PrivacyRegulation",
        "DataSecurityPolicy",
        "AccessPolicy",
    ];
    if c.iter().any(|r| under(r)) {
        2
    } else if b.iter().any(|r| under(r)) {
        1
    } else {
        0
    }
}

/// A granted consent on all patient data for every patient in `ds`.
pub fn full_consents(ds: &Dataset) -> Vec<ConsentRecord> {
    let patient = pmdt("Patient");
    let mut out: Vec<ConsentRecord> = ds
        .subjects(&pmdt_core::vocab::rdf_type(), &patient.into())
        .map(|p| ConsentRecord {
            patient_iri: match p.as_str().strip_prefix(pmdt_core::vocab::EX) {
                Some(local) => format!("ex:{local}"),
                None => p.as_str().to_string(),
            },
            data_category: "pmdt:PatientData".into(),
            granted: true,
        })
        .collect();
    out.sort_by(|a, b| a.patient_iri.cmp(&b.patient_iri));
    out
}

/// Places table `i` at site `assignment[i]`.
pub fn split(
    tables: &[TableData],
    assignment: &[usize],
    ids: &[String],
    policies: &[Vec<AccessPolicyRule>],
    consents: &[ConsentRecord],
) -> Vec<SiteData> {
    let mut sites: Vec<SiteData> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| SiteData {
            descriptor: SiteDescriptor {
                site_id: id.clone(),
                tables: Vec::new(),
                policies: policies.get(i).cloned().unwrap_or_default(),
                consents: consents.to_vec(),
            },
            csv: BTreeMap::new(),
        })
        .collect();
    for (t, &s) in tables.iter().zip(assignment) {
        let site = &mut sites[s];
        let mut mapping = t.mapping.clone();
        mapping.csv_path = format!("{}/{}.csv", site.descriptor.site_id, mapping.table_name).into();
        site.csv.insert(mapping.table_name.clone(), t.csv.clone());
        site.descriptor.tables.push(mapping);
    }
    sites
}

/// The fixed three-site federation. `site-c` denies researchers access to
/// medical histories.
pub fn three_site_split(
    tables: &[TableData],
    closure: &SubsumptionClosure,
    consents: &[ConsentRecord],
) -> Vec<SiteData> {
    let assignment: Vec<usize> = tables
        .iter()
        .map(|t| {
            let local = t.mapping.row_class.trim_start_matches("pmdt:");
            home_site(&pmdt(local), closure)
        })
        .collect();
    let ids: Vec<String> = SITE_IDS.iter().map(|s| s.to_string()).collect();
    let deny_history = vec![AccessPolicyRule {
        role: "researcher".into(),
        effect: Effect::Deny,
        scope: vec!["pmdt:MedicalHistory".into()],
    }];
    split(
        tables,
        &assignment,
        &ids,
        &[vec![], vec![], deny_history],
        consents,
    )
}

/// Tables scattered uniformly over `nsites` sites (2 to 4 when `nsites` is
/// `None`) with full consent and no policies.
pub fn random_partition(
    tables: &[TableData],
    consents: &[ConsentRecord],
    nsites: Option<usize>,
    seed: u64,
) -> Vec<SiteData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = nsites.unwrap_or_else(|| rng.gen_range(2..=4));
    let assignment: Vec<usize> = tables.iter().map(|_| rng.gen_range(0..n)).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("site-{i}")).collect();
    split(tables, &assignment, &ids, &[], consents)
}

/// Registers every site with a fresh federation over `schema`.
pub fn federation(schema: SchemaGraph, sites: &[SiteData]) -> Result<Federation, FederationError> {
    let mut fed = Federation::new(schema);
    for s in sites {
        fed.register_site_with_data(&s.descriptor, &s.csv)?;
    }
    Ok(fed)
}
