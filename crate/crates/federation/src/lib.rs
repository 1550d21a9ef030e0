//! Federated query processing across simulated hospital sites.
//!
//! Each site keeps its records in CSV tables mapped onto the ontology. The
//! coordinator sees only the resulting capability metadata: it decomposes a
//! query into per-site sub-queries, sends them as encoded messages, and joins
//! the variable bindings that come back. Sites enforce their own access
//! policies and patient consents and keep an audit log.

mod audit;
mod descriptor;
mod exec;
mod local;
mod plan;
mod relation;
mod site;
mod template;
mod wire;

use std::path::PathBuf;

use pmdt_core::Iri;
use thiserror::Error;

pub use audit::{default_origin, AuditAction, AuditEntry, AuditLog};
pub use descriptor::{
    AccessPolicyRule, ColumnMapping, ColumnTarget, ConsentRecord, Effect, SiteDescriptor,
    TableMapping,
};
pub use exec::{
    execute_federated, lift_site, ExecOptions, FederatedOutcome, Federation, DEFAULT_ROLES,
};
pub use local::{
    translate_to_local_plan, ColumnRef, LocalPlan, Scan, Selection, SqlParseError, Unit,
};
pub use plan::{decompose, CapabilityIndex, FederatedPlan, PlanGroup};
pub use site::{Column, Consent, Policy, Site, Table, Target};
pub use template::{IriTemplate, TemplateError};
pub use wire::{Direction, Payload, WireError, WireMessage};

#[derive(Debug, Error)]
pub enum FederationError {
    #[error("site {0} is already registered")]
    DuplicateSite(String),
    #[error("site {site}: table {table} is declared twice")]
    DuplicateTable { site: String, table: String },
    #[error("site {site}, table {table}: {detail}")]
    MappingSchemaMismatch {
        site: String,
        table: String,
        detail: String,
    },
    #[error("site {site}, table {table}, row {row}, column {column}: {detail}")]
    CsvType {
        site: String,
        table: String,
        row: usize,
        column: String,
        detail: String,
    },
    #[error("table {table}: template placeholder {{{placeholder}}} names no column")]
    TemplatePlaceholderMissing { table: String, placeholder: String },
    #[error("site {site}: invalid consent record: {detail}")]
    InvalidConsent { site: String, detail: String },
    #[error("site {site}: invalid access policy: {detail}")]
    InvalidPolicy { site: String, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error("site descriptor: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown class {0}")]
    UnknownClass(Iri),
    #[error("no site can answer `{pattern}` ({term} is not mapped anywhere)")]
    UnanswerablePattern { pattern: String, term: String },
    #[error("pattern `{0}` cannot be federated: predicates and classes must be concrete")]
    UnsupportedPattern(String),
    #[error("unknown requester role {0:?}")]
    UnknownRole(String),
    #[error("access policy denies role {role:?} every site able to answer `{patterns}`")]
    PolicyDenied { role: String, patterns: String },
    #[error("site {0} is unavailable")]
    SiteUnavailable(String),
    #[error("site {site} failed: {message}")]
    SiteFailure { site: String, message: String },
    #[error("filter #{index} `{filter}` compares incomparable terms")]
    Filter { index: usize, filter: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("wire: {0}")]
    Wire(#[from] WireError),
}

impl FederationError {
    /// Short stable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            FederationError::DuplicateSite(_) => "duplicate-site",
            FederationError::DuplicateTable { .. } => "duplicate-table",
            FederationError::MappingSchemaMismatch { .. } => "mapping-schema-mismatch",
            FederationError::CsvType { .. } => "csv-type-error",
            FederationError::TemplatePlaceholderMissing { .. } => "template-placeholder-missing",
            FederationError::InvalidConsent { .. } => "invalid-consent",
            FederationError::InvalidPolicy { .. } => "invalid-policy",
            FederationError::Io { .. } => "io",
            FederationError::Csv { .. } => "csv",
            FederationError::Json(_) => "json",
            FederationError::UnknownClass(_) => "unknown-class",
            FederationError::UnanswerablePattern { .. } => "unanswerable-pattern",
            FederationError::UnsupportedPattern(_) => "unsupported-pattern",
            FederationError::UnknownRole(_) => "unknown-role",
            FederationError::PolicyDenied { .. } => "policy-denied",
            FederationError::SiteUnavailable(_) => "site-unavailable",
            FederationError::SiteFailure { .. } => "site-failure",
            FederationError::Filter { .. } => "evaluation-error",
            FederationError::Protocol(_) => "protocol",
            FederationError::Wire(_) => "wire",
        }
    }

    /// True for errors raised while registering sites rather than while
    /// answering a query.
    pub fn is_registration(&self) -> bool {
        matches!(
            self,
            FederationError::DuplicateSite(_)
                | FederationError::DuplicateTable { .. }
                | FederationError::MappingSchemaMismatch { .. }
                | FederationError::CsvType { .. }
                | FederationError::TemplatePlaceholderMissing { .. }
                | FederationError::InvalidConsent { .. }
                | FederationError::InvalidPolicy { .. }
                | FederationError::Io { .. }
                | FederationError::Csv { .. }
                | FederationError::Json(_)
        )
    }
}
