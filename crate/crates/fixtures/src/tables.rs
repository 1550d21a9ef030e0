//! Turns an instance dataset into CSV tables plus mappings whose lifting
//! reproduces it exactly.

use std::collections::{BTreeMap, BTreeSet};

use pmdt_core::reasoner::SubsumptionClosure;
use pmdt_core::vocab::{pmdt, EX};
use pmdt_core::{Dataset, Datatype, Iri, Pattern, Term};
use pmdt_federation::{ColumnMapping, ColumnTarget, TableMapping};

use crate::FixtureError;

/// One mapped table and its CSV text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableData {
    pub mapping: TableMapping,
    pub csv: String,
}

fn subject(x: &Iri) -> Pattern {
    Pattern::new(Some(x.clone()), None, None)
}

fn snake(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn local(iri: &Iri) -> Result<&str, FixtureError> {
    iri.as_str()
        .strip_prefix(EX)
        .filter(|l| {
            !l.is_empty()
                && l.chars()
                    .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
        })
        .ok_or_else(|| FixtureError::Untabulable(format!("{iri} is not a plain ex: name")))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Link,
    Value(Datatype),
}

fn kind_of(t: &Term) -> Kind {
    match t {
        Term::Iri(_) => Kind::Link,
        Term::Literal(l) => Kind::Value(l.datatype()),
    }
}

fn cell(t: &Term) -> Result<String, FixtureError> {
    match t {
        Term::Iri(i) => local(i).map(str::to_string),
        Term::Literal(l) => Ok(l.lexical().to_string()),
    }
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn mapping(table: &str, class: &Iri, patient: bool, columns: Vec<ColumnMapping>) -> TableMapping {
    TableMapping {
        table_name: table.to_string(),
        csv_path: format!("{table}.csv").into(),
        row_class: format!("pmdt:{}", class.local_name()),
        iri_template: "ex:{id}".into(),
        patient_template: patient.then(|| "ex:{patient}".to_string()),
        columns,
    }
}

fn column(name: &str, property: &Iri, kind: Kind) -> ColumnMapping {
    ColumnMapping {
        column: name.to_string(),
        property: format!("pmdt:{}", property.local_name()),
        target: match kind {
            Kind::Link => ColumnTarget::IriTemplate(format!("ex:{{{name}}}")),
            Kind::Value(dt) => ColumnTarget::Datatype(dt.name().to_string()),
        },
    }
}

/// One table per asserted class holding its single-valued properties, and
/// one link table per multi-valued property. Every individual must carry
/// exactly one asserted type, and patient data must have exactly one owning
/// patient.
pub fn tabulate(
    ds: &Dataset,
    closure: &SubsumptionClosure,
) -> Result<Vec<TableData>, FixtureError> {
    let mut classes: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for x in ds.individuals() {
        let types: Vec<&Iri> = ds.types_of(&x).collect();
        match types.as_slice() {
            [] if ds.find(&subject(&x)).is_empty() => continue,
            [t] => classes.entry((*t).clone()).or_default().push(x.clone()),
            _ => {
                return Err(FixtureError::Untabulable(format!(
                    "{x} needs exactly one asserted type"
                )))
            }
        }
    }
    let mut owners: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for a in ds.with_predicate(&pmdt("hasPatientData")) {
        if let Term::Iri(d) = &a.object {
            owners.entry(d.clone()).or_default().push(a.subject.clone());
        }
    }
    let patient_data = pmdt("PatientData");

    let mut out = Vec::new();
    for (class, members) in &classes {
        let base = snake(class.local_name());
        let is_data = closure.is_subclass(class, &patient_data);
        let owner = |x: &Iri| -> Result<String, FixtureError> {
            match owners.get(x).map(Vec::as_slice) {
                Some([p]) => local(p).map(str::to_string),
                _ => Err(FixtureError::Untabulable(format!(
                    "{x} needs exactly one owning patient"
                ))),
            }
        };

        let mut by_prop: BTreeMap<Iri, BTreeMap<Iri, Vec<Term>>> = BTreeMap::new();
        for x in members {
            for a in ds.find(&subject(x)) {
                if !a.is_type() {
                    by_prop
                        .entry(a.predicate)
                        .or_default()
                        .entry(x.clone())
                        .or_default()
                        .push(a.object);
                }
            }
        }
        let mut singles = Vec::new();
        let mut multis = Vec::new();
        for (p, objects) in &by_prop {
            let kinds: BTreeSet<_> = objects
                .values()
                .flatten()
                .map(|t| match kind_of(t) {
                    Kind::Link => None,
                    Kind::Value(dt) => Some(dt),
                })
                .collect();
            if kinds.len() != 1 {
                return Err(FixtureError::Untabulable(format!(
                    "{p} mixes object kinds on {class}"
                )));
            }
            let kind = kind_of(
                objects
                    .values()
                    .next()
                    .and_then(|v| v.first())
                    .expect("non-empty"),
            );
            if objects.values().all(|v| v.len() == 1) {
                singles.push((p, kind));
            } else {
                multis.push((p, kind));
            }
        }

        let mut header = vec!["id".to_string()];
        if is_data {
            header.push("patient".into());
        }
        let mut columns = Vec::new();
        for (p, kind) in &singles {
            let name = snake(p.local_name());
            header.push(name.clone());
            columns.push(column(&name, p, *kind));
        }
        let mut rows = Vec::new();
        for x in members {
            let mut row = vec![local(x)?.to_string()];
            if is_data {
                row.push(owner(x)?);
            }
            for (p, _) in &singles {
                row.push(match by_prop[*p].get(x) {
                    Some(v) => cell(&v[0])?,
                    None => String::new(),
                });
            }
            rows.push(row);
        }
        out.push(TableData {
            mapping: mapping(&base, class, is_data, columns),
            csv: csv_text(&header, &rows),
        });

        for (p, kind) in &multis {
            let name = snake(p.local_name());
            let table = format!("{base}_{name}");
            let mut header = vec!["id".to_string()];
            if is_data {
                header.push("patient".into());
            }
            header.push(name.clone());
            let mut rows = Vec::new();
            for (x, objects) in &by_prop[*p] {
                let mut cells: Vec<String> = objects.iter().map(cell).collect::<Result<_, _>>()?;
                cells.sort();
                for c in cells {
                    let mut row = vec![local(x)?.to_string()];
                    if is_data {
                        row.push(owner(x)?);
                    }
                    row.push(c);
                    rows.push(row);
                }
            }
            out.push(TableData {
                mapping: mapping(&table, class, is_data, vec![column(&name, p, *kind)]),
                csv: csv_text(&header, &rows),
            });
        }
    }
    Ok(out)
}
