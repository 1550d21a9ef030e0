use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::SubsumptionClosure;
use crate::schema::SchemaGraph;
use crate::store::{Assertion, Dataset};
use crate::term::{Iri, Term};
use crate::vocab::{self, pmdt};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReasonerError {
    #[error("temporal cycle: {state} precedes itself")]
    TemporalCycle { state: Iri },
}

/// Which derivation rules run during materialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaterializeConfig {
    pub type_propagation: bool,
    pub inverse_completion: bool,
    pub temporal_closure: bool,
    pub severity_classification: bool,
}

impl Default for MaterializeConfig {
    fn default() -> Self {
        MaterializeConfig {
            type_propagation: true,
            inverse_completion: true,
            temporal_closure: true,
            severity_classification: true,
        }
    }
}

impl MaterializeConfig {
    pub fn types_only() -> Self {
        MaterializeConfig {
            type_propagation: true,
            inverse_completion: false,
            temporal_closure: false,
            severity_classification: false,
        }
    }
}

/// Grade threshold at and above which an adverse event counts as high grade.
pub const HIGH_GRADE_THRESHOLD: i64 = 3;

/// Returns `ds` plus every assertion derivable under `config`, computed to a
/// fixpoint.
pub fn materialize(
    schema: &SchemaGraph,
    closure: &SubsumptionClosure,
    ds: &Dataset,
    config: &MaterializeConfig,
) -> Result<Dataset, ReasonerError> {
    let mut out = ds.clone();
    let inverses: Vec<(Iri, Iri)> = schema
        .properties()
        .filter_map(|p| p.inverse.clone().map(|q| (p.iri.clone(), q)))
        .collect();
    loop {
        let mut derived: BTreeSet<Assertion> = BTreeSet::new();
        if config.type_propagation {
            propagate_types(closure, &out, &mut derived);
        }
        if config.inverse_completion {
            for (p, q) in &inverses {
                for a in out.with_predicate(p) {
                    if let Term::Iri(o) = &a.object {
                        derived.insert(Assertion::new(o.clone(), q.clone(), a.subject.clone()));
                    }
                }
            }
        }
        if config.temporal_closure {
            temporal_closure(closure, &out, &mut derived)?;
        }
        if config.severity_classification {
            classify_severity(closure, &out, &mut derived);
        }
        let before = out.len();
        for a in derived {
            out.insert(a);
        }
        if out.len() == before {
            return Ok(out);
        }
    }
}

fn propagate_types(closure: &SubsumptionClosure, ds: &Dataset, derived: &mut BTreeSet<Assertion>) {
    for a in ds.with_predicate(&vocab::rdf_type()) {
        if let Term::Iri(c) = &a.object {
            for up in closure.ancestors(c) {
                if up != c {
                    derived.insert(Assertion::typed(a.subject.clone(), up.clone()));
                }
            }
        }
    }
}

/// Individuals typed with `class` or any of its subclasses.
pub(crate) fn instances_of(
    closure: &SubsumptionClosure,
    ds: &Dataset,
    class: &Iri,
) -> BTreeSet<Iri> {
    let ty = vocab::rdf_type();
    let mut out = BTreeSet::new();
    for c in closure
        .descendants(class)
        .iter()
        .chain(std::iter::once(class))
    {
        out.extend(ds.subjects(&ty, &Term::Iri(c.clone())).cloned());
    }
    out
}

/// Transitive closure of `precedes` over State individuals.
fn temporal_closure(
    closure: &SubsumptionClosure,
    ds: &Dataset,
    derived: &mut BTreeSet<Assertion>,
) -> Result<(), ReasonerError> {
    let states = instances_of(closure, ds, &pmdt("State"));
    let precedes = pmdt("precedes");
    let mut edges: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for a in ds.with_predicate(&precedes) {
        if let Term::Iri(o) = &a.object {
            if states.contains(&a.subject) && states.contains(o) {
                edges
                    .entry(a.subject.clone())
                    .or_default()
                    .insert(o.clone());
            }
        }
    }
    for start in edges.keys() {
        let mut seen: BTreeSet<&Iri> = BTreeSet::new();
        let mut stack: Vec<&Iri> = edges[start].iter().collect();
        while let Some(x) = stack.pop() {
            if !seen.insert(x) {
                continue;
            }
            if let Some(next) = edges.get(x) {
                stack.extend(next.iter());
            }
        }
        if seen.contains(start) {
            return Err(ReasonerError::TemporalCycle {
                state: start.clone(),
            });
        }
        for x in seen {
            derived.insert(Assertion::new(start.clone(), precedes.clone(), x.clone()));
        }
    }
    Ok(())
}

fn classify_severity(
    closure: &SubsumptionClosure,
    ds: &Dataset,
    derived: &mut BTreeSet<Assertion>,
) {
    let has_grade = pmdt("hasSeverityGrade");
    let grade_value = pmdt("gradeValue");
    for ae in instances_of(closure, ds, &pmdt("AdverseEvent")) {
        for g in ds.objects(&ae, &has_grade).filter_map(Term::as_iri) {
            for v in ds.objects(g, &grade_value).filter_map(Term::as_literal) {
                let Some(n) = v.as_f64() else { continue };
                let class = if n >= HIGH_GRADE_THRESHOLD as f64 {
                    "HighGradeAdverseEvent"
                } else {
                    "LowGradeAdverseEvent"
                };
                derived.insert(Assertion::typed(ae.clone(), pmdt(class)));
            }
        }
    }
}
