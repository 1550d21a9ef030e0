use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use pmdt_core::reasoner::SubsumptionClosure;
use pmdt_core::vocab::pmdt;
use pmdt_core::{
    Assertion, Dataset, Datatype, Iri, Literal, PrefixTable, PropertyKind, SchemaGraph, Term,
};

use crate::audit::{AuditAction, AuditEntry, AuditLog};
use crate::descriptor::{ColumnTarget, Effect, SiteDescriptor};
use crate::template::IriTemplate;
use crate::FederationError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Literal(Datatype),
    Iri(IriTemplate),
}

#[derive(Clone, Debug)]
pub struct Column {
    pub name: String,
    pub index: usize,
    pub property: Iri,
    pub target: Target,
}

/// A validated, loaded table.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub row_class: Iri,
    pub template: IriTemplate,
    pub patient: Option<IriTemplate>,
    pub columns: Vec<Column>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Every row instantiates a distinct subject.
    pub keyed: bool,
}

impl Table {
    pub fn cell<'a>(&self, row: &'a [String], column: &str) -> Option<&'a str> {
        let i = self.header.iter().position(|h| h == column)?;
        Some(row[i].as_str())
    }

    pub fn subject(&self, row: &[String]) -> Option<Iri> {
        self.template.instantiate(|c| self.cell(row, c))
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Lifted value of a mapped column; `None` for empty cells.
    pub fn value(&self, row: &[String], column: &Column) -> Option<Term> {
        match &column.target {
            Target::Literal(dt) => {
                let cell = &row[column.index];
                if cell.is_empty() {
                    return None;
                }
                Literal::new(cell, *dt).ok().map(Term::Literal)
            }
            Target::Iri(t) => {
                if row[column.index].is_empty() {
                    return None;
                }
                t.instantiate(|c| self.cell(row, c)).map(Term::Iri)
            }
        }
    }

    pub fn lift_row(&self, row: &[String]) -> Vec<Assertion> {
        let Some(s) = self.subject(row) else {
            return Vec::new();
        };
        let mut out = vec![Assertion::typed(s.clone(), self.row_class.clone())];
        for c in &self.columns {
            if let Some(v) = self.value(row, c) {
                out.push(Assertion::new(s.clone(), c.property.clone(), v));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    pub role: String,
    pub effect: Effect,
    pub scope: BTreeSet<Iri>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Consent {
    pub patient: Iri,
    pub category: Iri,
    pub granted: bool,
}

/// A registered hospital site: its tables, policies, consents and audit log.
#[derive(Debug)]
pub struct Site {
    pub id: String,
    pub tables: Vec<Table>,
    pub policies: Vec<Policy>,
    pub consents: Vec<Consent>,
    /// Individuals withheld for lack of consent, with the data category
    /// (row class) that produced them.
    pub(crate) excluded: BTreeMap<Iri, Iri>,
    pub(crate) closure: Arc<SubsumptionClosure>,
    log: Mutex<AuditLog>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Site {
    /// Validates `desc` against the schema and loads its tables from
    /// `csv_text` (table name → CSV content).
    pub(crate) fn load(
        desc: &SiteDescriptor,
        csv_text: &BTreeMap<String, String>,
        schema: Arc<SchemaGraph>,
        closure: Arc<SubsumptionClosure>,
        clock_origin: DateTime<Utc>,
    ) -> Result<Site, FederationError> {
        let prefixes = PrefixTable::default();
        let site = desc.site_id.clone();
        let mismatch = |table: &str, detail: String| FederationError::MappingSchemaMismatch {
            site: site.clone(),
            table: table.to_string(),
            detail,
        };
        let expand = |table: &str, text: &str| {
            prefixes
                .expand(text)
                .map_err(|e| mismatch(table, format!("{text}: {e}")))
        };
        let patient_data = pmdt("PatientData");
        let mut tables: Vec<Table> = Vec::new();
        for m in &desc.tables {
            let name = m.table_name.as_str();
            if !is_identifier(name) {
                return Err(mismatch(name, "table names must be identifiers".into()));
            }
            if tables.iter().any(|t| t.name == name) {
                return Err(FederationError::DuplicateTable {
                    site: site.clone(),
                    table: name.to_string(),
                });
            }
            let row_class = expand(name, &m.row_class)?;
            if !schema.has_class(&row_class) {
                return Err(mismatch(
                    name,
                    format!("unknown class {}", prefixes.render(&row_class)),
                ));
            }
            let parse_tpl = |text: &str| {
                IriTemplate::parse(text, &prefixes).map_err(|e| mismatch(name, e.to_string()))
            };
            let template = parse_tpl(&m.iri_template)?;
            let patient = m.patient_template.as_deref().map(parse_tpl).transpose()?;
            if patient.is_none() && closure.is_subclass(&row_class, &patient_data) {
                return Err(mismatch(
                    name,
                    "patient-data tables need a patientTemplate".into(),
                ));
            }
            let text = csv_text.get(name).ok_or_else(|| FederationError::Io {
                path: m.csv_path.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no data for table"),
            })?;
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(text.as_bytes());
            let header: Vec<String> = reader
                .headers()
                .map_err(|e| FederationError::Csv {
                    path: m.csv_path.clone(),
                    message: e.to_string(),
                })?
                .iter()
                .map(str::to_string)
                .collect();
            for h in &header {
                if !is_identifier(h) {
                    return Err(mismatch(
                        name,
                        format!("column name {h:?} is not an identifier"),
                    ));
                }
            }
            let has = |c: &str| header.iter().any(|h| h == c);
            let templates = std::iter::once(&template).chain(patient.iter());
            for t in templates {
                if let Some(c) = t.columns().find(|c| !has(c)) {
                    return Err(FederationError::TemplatePlaceholderMissing {
                        table: name.to_string(),
                        placeholder: c.to_string(),
                    });
                }
            }
            let mut columns = Vec::new();
            for cm in &m.columns {
                let index = header.iter().position(|h| h == &cm.column).ok_or_else(|| {
                    mismatch(
                        name,
                        format!("column {:?} is not in the CSV header", cm.column),
                    )
                })?;
                let property = expand(name, &cm.property)?;
                let def = schema.property(&property).ok_or_else(|| {
                    mismatch(
                        name,
                        format!("unknown property {}", prefixes.render(&property)),
                    )
                })?;
                let target = match &cm.target {
                    ColumnTarget::Datatype(dt) => {
                        let dt = Datatype::from_name(dt)
                            .ok_or_else(|| mismatch(name, format!("unknown datatype {dt:?}")))?;
                        if def.kind != PropertyKind::Data || !def.datatypes().contains(&dt) {
                            return Err(mismatch(
                                name,
                                format!(
                                    "{} does not take xsd:{} values",
                                    prefixes.render(&property),
                                    dt.name()
                                ),
                            ));
                        }
                        Target::Literal(dt)
                    }
                    ColumnTarget::IriTemplate(t) => {
                        if def.kind != PropertyKind::Object {
                            return Err(mismatch(
                                name,
                                format!("{} is not an object property", prefixes.render(&property)),
                            ));
                        }
                        let t = parse_tpl(t)?;
                        if let Some(c) = t.columns().find(|c| !has(c)) {
                            return Err(FederationError::TemplatePlaceholderMissing {
                                table: name.to_string(),
                                placeholder: c.to_string(),
                            });
                        }
                        Target::Iri(t)
                    }
                };
                columns.push(Column {
                    name: cm.column.clone(),
                    index,
                    property,
                    target,
                });
            }
            let mut rows = Vec::new();
            for (i, rec) in reader.records().enumerate() {
                let rec = rec.map_err(|e| FederationError::Csv {
                    path: m.csv_path.clone(),
                    message: e.to_string(),
                })?;
                let row: Vec<String> = rec.iter().map(str::to_string).collect();
                for c in &columns {
                    if let Target::Literal(dt) = c.target {
                        let cell = &row[c.index];
                        if !cell.is_empty() {
                            Literal::new(cell, dt).map_err(|e| FederationError::CsvType {
                                site: site.clone(),
                                table: name.to_string(),
                                row: i + 1,
                                column: c.name.clone(),
                                detail: e.to_string(),
                            })?;
                        }
                    }
                }
                rows.push(row);
            }
            let mut table = Table {
                name: name.to_string(),
                row_class,
                template,
                patient,
                columns,
                header,
                rows,
                keyed: false,
            };
            let mut subjects = BTreeSet::new();
            for (i, row) in table.rows.iter().enumerate() {
                let s = table.subject(row).ok_or_else(|| FederationError::CsvType {
                    site: site.clone(),
                    table: name.to_string(),
                    row: i + 1,
                    column: table
                        .template
                        .columns()
                        .next()
                        .unwrap_or_default()
                        .to_string(),
                    detail: "empty value in IRI template column".into(),
                })?;
                subjects.insert(s);
            }
            table.keyed = subjects.len() == table.rows.len();
            tables.push(table);
        }
        let mut policies = Vec::new();
        for p in &desc.policies {
            let mut scope = BTreeSet::new();
            for s in &p.scope {
                let iri = expand("", s)?;
                if !schema.has_class(&iri) && schema.property(&iri).is_none() {
                    return Err(FederationError::InvalidPolicy {
                        site: site.clone(),
                        detail: format!("scope term {s} is not declared in the schema"),
                    });
                }
                scope.insert(iri);
            }
            policies.push(Policy {
                role: p.role.clone(),
                effect: p.effect,
                scope,
            });
        }
        let mut consents = Vec::new();
        for c in &desc.consents {
            let category = expand("", &c.data_category)?;
            if !closure.is_subclass(&category, &patient_data) {
                return Err(FederationError::InvalidConsent {
                    site: site.clone(),
                    detail: format!("{} is not a kind of pmdt:PatientData", c.data_category),
                });
            }
            consents.push(Consent {
                patient: expand("", &c.patient_iri)?,
                category,
                granted: c.granted,
            });
        }
        let mut s = Site {
            id: site,
            tables,
            policies,
            consents,
            excluded: BTreeMap::new(),
            closure,
            log: Mutex::new(AuditLog::new(clock_origin)),
        };
        s.excluded = s.compute_exclusions();
        Ok(s)
    }

    /// Whether `patient` has granted access to data of `category`: some
    /// applicable record grants it and none refuses it.
    pub fn consent_allows(&self, patient: &Iri, category: &Iri) -> bool {
        let ancestors = self.closure.ancestors(category);
        let mut granted = false;
        for c in self
            .consents
            .iter()
            .filter(|c| &c.patient == patient && ancestors.contains(&c.category))
        {
            if !c.granted {
                return false;
            }
            granted = true;
        }
        granted
    }

    fn compute_exclusions(&self) -> BTreeMap<Iri, Iri> {
        let patient_data = pmdt("PatientData");
        let mut out = BTreeMap::new();
        for t in &self.tables {
            if !self.closure.is_subclass(&t.row_class, &patient_data) {
                continue;
            }
            let owner_tpl = t.patient.as_ref().expect("checked at load");
            for row in &t.rows {
                let Some(s) = t.subject(row) else { continue };
                let allowed = owner_tpl
                    .instantiate(|c| t.cell(row, c))
                    .is_some_and(|owner| self.consent_allows(&owner, &t.row_class));
                if !allowed {
                    out.entry(s).or_insert_with(|| t.row_class.clone());
                }
            }
        }
        out
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Every assertion the site's tables yield, ignoring consent.
    pub fn lift(&self) -> Dataset {
        let mut ds = Dataset::new();
        for t in &self.tables {
            for row in &t.rows {
                for a in t.lift_row(row) {
                    ds.insert(a);
                }
            }
        }
        ds
    }

    /// The deny rule scope terms hit by `touched` for `role`, if any.
    pub fn policy_denial(&self, role: &str, touched: &BTreeSet<Iri>) -> Option<Vec<Iri>> {
        let mut hits = BTreeSet::new();
        for p in self
            .policies
            .iter()
            .filter(|p| p.role == role && p.effect == Effect::Deny)
        {
            for s in &p.scope {
                if touched
                    .iter()
                    .any(|t| t == s || self.closure.is_subclass(t, s))
                {
                    hits.insert(s.clone());
                }
            }
        }
        (!hits.is_empty()).then(|| hits.into_iter().collect())
    }

    pub(crate) fn audit(
        &self,
        role: &str,
        action: AuditAction,
        detail: impl Into<String>,
    ) -> AuditEntry {
        self.log
            .lock()
            .expect("audit log lock")
            .append(&self.id, role, action, detail)
            .clone()
    }

    /// Snapshot of the site's audit log.
    pub fn audit_log(&self) -> Vec<AuditEntry> {
        self.log.lock().expect("audit log lock").entries().to_vec()
    }
}
