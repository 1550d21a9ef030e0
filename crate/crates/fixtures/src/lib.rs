//! Reproducible test corpus: the Elena, Markus and Aisha personas, a
//! three-site split of their records, seeded-violation variants, and the
//! competency query suite with expected results.

mod personas;
mod scaled;
mod sites;
mod suite;
mod tables;
mod variants;

use std::path::{Path, PathBuf};

use pmdt_core::reasoner::{classify, ReasonerError};
use pmdt_core::{bootstrap_pmdt_schema, serialize_dataset, Dataset, SchemaGraph};
use pmdt_federation::FederationError;
use thiserror::Error;

pub use personas::{generate_personas, PERSONAS};
pub use scaled::generate_scaled;
pub use sites::{
    federation, full_consents, home_site, random_partition, split, three_site_split, SiteData,
    SITE_IDS,
};
pub use suite::{generate_query_suite, SuiteQuery, QUERIES};
pub use tables::{tabulate, TableData};
pub use variants::{
    grade_three_variant, missing_surgery_followup_variant, violation_variants, Variant,
};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot tabulate dataset: {0}")]
    Untabulable(String),
    #[error("suite query {0}: {1}")]
    Query(&'static str, String),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Federation(#[from] FederationError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Everything the test corpus consists of.
#[derive(Clone, Debug)]
pub struct FixtureBundle {
    pub schema: SchemaGraph,
    pub personas: Dataset,
    pub tables: Vec<TableData>,
    pub sites: Vec<SiteData>,
    pub violations: Vec<Variant>,
    pub variants: Vec<Variant>,
    pub suite: Vec<SuiteQuery>,
}

/// Builds the complete corpus from scratch.
pub fn generate_bundle() -> Result<FixtureBundle, FixtureError> {
    let schema = bootstrap_pmdt_schema();
    let closure = classify(&schema);
    let personas = generate_personas();
    let tables = tabulate(&personas, &closure)?;
    let sites = three_site_split(&tables, &closure, &full_consents(&personas));
    let suite = generate_query_suite(&schema, &closure, &personas)?;
    Ok(FixtureBundle {
        violations: violation_variants(&personas),
        variants: vec![
            grade_three_variant(&personas),
            missing_surgery_followup_variant(&personas),
        ],
        schema,
        personas,
        tables,
        sites,
        suite,
    })
}

fn write(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<(), FixtureError> {
    let io = |source| FixtureError::Io {
        path: path.clone(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(&path, text).map_err(io)?;
    written.push(path);
    Ok(())
}

impl FixtureBundle {
    /// Writes `personas.ttl`, `federation/site-*.json` with their CSVs,
    /// `violations/*.ttl`, `variants/*.ttl` and `suite/*.rq` with
    /// `suite/*.expected.csv` below `dir`. Returns the written paths.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, FixtureError> {
        let dir = dir.as_ref();
        let prefixes = self.schema.prefixes();
        let mut written = Vec::new();
        write(
            dir.join("personas.ttl"),
            &serialize_dataset(&self.personas, prefixes),
            &mut written,
        )?;
        for site in &self.sites {
            let fed = dir.join("federation");
            let id = &site.descriptor.site_id;
            write(
                fed.join(format!("{id}.json")),
                &site.descriptor.to_json(),
                &mut written,
            )?;
            for (table, csv) in &site.csv {
                write(fed.join(id).join(format!("{table}.csv")), csv, &mut written)?;
            }
        }
        for (sub, list) in [
            ("violations", &self.violations),
            ("variants", &self.variants),
        ] {
            for v in list {
                write(
                    dir.join(sub).join(format!("{}.ttl", v.name)),
                    &serialize_dataset(&v.dataset, prefixes),
                    &mut written,
                )?;
            }
        }
        for q in &self.suite {
            let suite = dir.join("suite");
            write(
                suite.join(format!("{}.rq", q.name)),
                &format!("# {}\n{}\n", q.question, q.text),
                &mut written,
            )?;
            write(
                suite.join(format!("{}.expected.csv", q.name)),
                &q.expected.to_csv(prefixes),
                &mut written,
            )?;
        }
        Ok(written)
    }
}
