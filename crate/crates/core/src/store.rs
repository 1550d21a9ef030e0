//! Indexed instance storage (the ABox).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::schema::{PropertyKind, SchemaGraph};
use crate::term::{Iri, PrefixTable, Term};
use crate::turtle::{self, TurtleError};
use crate::vocab;

/// A subject–predicate–object fact. Ordering is the canonical
/// (subject, predicate, object) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assertion {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Assertion {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Assertion {
            subject,
            predicate,
            object: object.into(),
        }
    }

    pub fn typed(subject: Iri, class: Iri) -> Self {
        Assertion::new(subject, vocab::rdf_type(), class)
    }

    pub fn is_type(&self) -> bool {
        self.predicate.as_str() == vocab::RDF_TYPE
    }

    pub fn render(&self, prefixes: &PrefixTable) -> String {
        let predicate = if self.is_type() {
            "a".to_string()
        } else {
            prefixes.render(&self.predicate)
        };
        format!(
            "{} {} {}",
            prefixes.render(&self.subject),
            predicate,
            self.object.to_turtle(prefixes)
        )
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.subject,
            self.predicate,
            self.object.to_ntriples()
        )
    }
}

/// A triple pattern over concrete terms; `None` is a wildcard.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pattern {
    pub subject: Option<Iri>,
    pub predicate: Option<Iri>,
    pub object: Option<Term>,
}

impl Pattern {
    pub fn any() -> Self {
        Pattern::default()
    }

    pub fn new(subject: Option<Iri>, predicate: Option<Iri>, object: Option<Term>) -> Self {
        Pattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn matches(&self, a: &Assertion) -> bool {
        self.subject.as_ref().is_none_or(|s| s == &a.subject)
            && self.predicate.as_ref().is_none_or(|p| p == &a.predicate)
            && self.object.as_ref().is_none_or(|o| o == &a.object)
    }

    /// Name of the index `Dataset::find` uses for this pattern.
    pub fn index_name(&self) -> &'static str {
        match (&self.subject, &self.predicate, &self.object) {
            (Some(_), _, _) => "subject",
            (None, Some(_), Some(_)) => "predicate-object",
            (None, Some(_), None) => "predicate",
            (None, None, _) => "scan",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("kind mismatch for {assertion}: {detail}")]
    KindMismatch { assertion: String, detail: String },
    #[error("unknown predicate {0}")]
    UnknownPredicate(Iri),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: TurtleError,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: StoreError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Whether assertions with undeclared predicates are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strictness {
    Strict,
    #[default]
    Lenient,
}

/// A set of assertions with subject, predicate and predicate–object indexes.
#[derive(Clone, Default)]
pub struct Dataset {
    assertions: BTreeSet<Assertion>,
    by_subject: BTreeMap<Iri, BTreeSet<Assertion>>,
    by_predicate: BTreeMap<Iri, BTreeSet<Assertion>>,
    by_predicate_object: BTreeMap<(Iri, Term), BTreeSet<Assertion>>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.assertions == other.assertions
    }
}

impl Eq for Dataset {}

impl fmt::Debug for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.assertions.iter()).finish()
    }
}

impl FromIterator<Assertion> for Dataset {
    fn from_iter<T: IntoIterator<Item = Assertion>>(iter: T) -> Self {
        let mut ds = Dataset::new();
        for a in iter {
            ds.insert(a);
        }
        ds
    }
}

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter()
    }

    pub fn contains(&self, a: &Assertion) -> bool {
        self.assertions.contains(a)
    }

    /// Unchecked insertion. Returns false when the assertion was already present.
    pub fn insert(&mut self, a: Assertion) -> bool {
        if !self.assertions.insert(a.clone()) {
            return false;
        }
        self.by_subject
            .entry(a.subject.clone())
            .or_default()
            .insert(a.clone());
        self.by_predicate
            .entry(a.predicate.clone())
            .or_default()
            .insert(a.clone());
        self.by_predicate_object
            .entry((a.predicate.clone(), a.object.clone()))
            .or_default()
            .insert(a);
        true
    }

    /// Inserts after checking the assertion against `schema`.
    pub fn assert(
        &mut self,
        schema: &SchemaGraph,
        a: Assertion,
        strictness: Strictness,
    ) -> Result<bool, StoreError> {
        check_assertion(schema, &a, strictness)?;
        Ok(self.insert(a))
    }

    pub fn retract(&mut self, a: &Assertion) -> bool {
        if !self.assertions.remove(a) {
            return false;
        }
        fn drop_from<K: Ord>(map: &mut BTreeMap<K, BTreeSet<Assertion>>, key: K, a: &Assertion) {
            if let Some(set) = map.get_mut(&key) {
                set.remove(a);
                if set.is_empty() {
                    map.remove(&key);
                }
            }
        }
        drop_from(&mut self.by_subject, a.subject.clone(), a);
        drop_from(&mut self.by_predicate, a.predicate.clone(), a);
        drop_from(
            &mut self.by_predicate_object,
            (a.predicate.clone(), a.object.clone()),
            a,
        );
        true
    }

    pub fn extend(&mut self, other: &Dataset) {
        for a in other.iter() {
            self.insert(a.clone());
        }
    }

    /// Candidate set chosen by index, before residual filtering.
    fn candidates(&self, p: &Pattern) -> Box<dyn Iterator<Item = &Assertion> + '_> {
        match (&p.subject, &p.predicate, &p.object) {
            (Some(s), _, _) => Box::new(self.by_subject.get(s).into_iter().flatten()),
            (None, Some(pr), Some(o)) => Box::new(
                self.by_predicate_object
                    .get(&(pr.clone(), o.clone()))
                    .into_iter()
                    .flatten(),
            ),
            (None, Some(pr), None) => Box::new(self.by_predicate.get(pr).into_iter().flatten()),
            (None, None, _) => Box::new(self.assertions.iter()),
        }
    }

    /// Assertions unifying with `p`, in canonical order.
    pub fn find(&self, p: &Pattern) -> Vec<Assertion> {
        self.candidates(p)
            .filter(|a| p.matches(a))
            .cloned()
            .collect()
    }

    /// Visits matches without cloning.
    pub fn for_each_match(&self, p: &Pattern, mut f: impl FnMut(&Assertion)) {
        for a in self.candidates(p).filter(|a| p.matches(a)) {
            f(a);
        }
    }

    pub fn count(&self, p: &Pattern) -> usize {
        match (&p.subject, &p.predicate, &p.object) {
            (None, Some(pr), Some(o)) => self
                .by_predicate_object
                .get(&(pr.clone(), o.clone()))
                .map_or(0, BTreeSet::len),
            (None, Some(pr), None) => self.by_predicate.get(pr).map_or(0, BTreeSet::len),
            (None, None, None) => self.len(),
            _ => self.candidates(p).filter(|a| p.matches(a)).count(),
        }
    }

    /// Objects of `(subject, predicate, *)`.
    pub fn objects<'a>(
        &'a self,
        subject: &Iri,
        predicate: &'a Iri,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .filter(move |a| &a.predicate == predicate)
            .map(|a| &a.object)
    }

    /// Subjects of `(*, predicate, object)`.
    pub fn subjects<'a>(
        &'a self,
        predicate: &Iri,
        object: &Term,
    ) -> impl Iterator<Item = &'a Iri> + 'a {
        self.by_predicate_object
            .get(&(predicate.clone(), object.clone()))
            .into_iter()
            .flatten()
            .map(|a| &a.subject)
    }

    pub fn with_predicate<'a>(
        &'a self,
        predicate: &Iri,
    ) -> impl Iterator<Item = &'a Assertion> + 'a {
        self.by_predicate.get(predicate).into_iter().flatten()
    }

    /// Asserted types of `subject`.
    pub fn types_of<'a>(&'a self, subject: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .filter(|a| a.is_type())
            .filter_map(|a| a.object.as_iri())
    }

    /// Every subject and IRI object, sorted.
    pub fn individuals(&self) -> BTreeSet<Iri> {
        let mut out: BTreeSet<Iri> = self.by_subject.keys().cloned().collect();
        for a in &self.assertions {
            if a.is_type() {
                continue;
            }
            if let Term::Iri(o) = &a.object {
                out.insert(o.clone());
            }
        }
        out
    }

    /// Drops every assertion that mentions `individual` as subject or object.
    pub fn remove_individual(&mut self, individual: &Iri) -> usize {
        let doomed: Vec<Assertion> = self
            .assertions
            .iter()
            .filter(|a| &a.subject == individual || a.object.as_iri() == Some(individual))
            .cloned()
            .collect();
        for a in &doomed {
            self.retract(a);
        }
        doomed.len()
    }

    /// Loads a Turtle-subset file, checking every assertion against `schema`.
    pub fn load(
        path: impl AsRef<Path>,
        schema: &SchemaGraph,
        strictness: Strictness,
    ) -> Result<Dataset, LoadError> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: name.clone(),
            source,
        })?;
        let doc = turtle::parse_turtle_with(&text, schema.prefixes()).map_err(|source| {
            LoadError::Parse {
                path: name.clone(),
                source,
            }
        })?;
        let mut ds = Dataset::new();
        for a in doc.data.iter() {
            ds.assert(schema, a.clone(), strictness)
                .map_err(|source| LoadError::Invalid {
                    path: name.clone(),
                    source,
                })?;
        }
        Ok(ds)
    }

    /// Writes the canonical Turtle-subset form.
    pub fn export(&self, path: impl AsRef<Path>, prefixes: &PrefixTable) -> Result<(), LoadError> {
        let path = path.as_ref();
        std::fs::write(path, turtle::serialize_dataset(self, prefixes)).map_err(|source| {
            LoadError::Io {
                path: path.display().to_string(),
                source,
            }
        })
    }
}

/// Checks predicate/object kinds against the schema.
pub fn check_assertion(
    schema: &SchemaGraph,
    a: &Assertion,
    strictness: Strictness,
) -> Result<(), StoreError> {
    let mismatch = |detail: String| StoreError::KindMismatch {
        assertion: a.render(schema.prefixes()),
        detail,
    };
    if a.is_type() {
        return match a.object {
            Term::Iri(_) => Ok(()),
            Term::Literal(_) => Err(mismatch("type assertions need a class IRI".into())),
        };
    }
    match schema.property(&a.predicate) {
        Some(p) => match (p.kind, &a.object) {
            (PropertyKind::Object, Term::Iri(_)) => Ok(()),
            (PropertyKind::Object, Term::Literal(_)) => {
                Err(mismatch("object property needs an IRI".into()))
            }
            (PropertyKind::Data, Term::Iri(_)) => {
                Err(mismatch("data property needs a literal".into()))
            }
            (PropertyKind::Data, Term::Literal(l)) => {
                let allowed = p.datatypes();
                if allowed.is_empty() || allowed.contains(&l.datatype()) {
                    Ok(())
                } else {
                    let names: Vec<_> = allowed.iter().map(|d| d.name()).collect();
                    Err(mismatch(format!(
                        "{} literal {:?} where {} is required",
                        l.datatype().name(),
                        l.lexical(),
                        names.join("|")
                    )))
                }
            }
        },
        None if vocab::SCHEMA_PREDICATES.contains(&a.predicate.as_str()) => Ok(()),
        None if strictness == Strictness::Strict => {
            Err(StoreError::UnknownPredicate(a.predicate.clone()))
        }
        None => Ok(()),
    }
}

/// A dataset shared between many readers and at most one writer.
#[derive(Clone, Default)]
pub struct SharedDataset(Arc<RwLock<Dataset>>);

impl SharedDataset {
    pub fn new(ds: Dataset) -> Self {
        SharedDataset(Arc::new(RwLock::new(ds)))
    }

    pub fn read<R>(&self, f: impl FnOnce(&Dataset) -> R) -> R {
        f(&self.0.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn write<R>(&self, f: impl FnOnce(&mut Dataset) -> R) -> R {
        f(&mut self.0.write().unwrap_or_else(|e| e.into_inner()))
    }

    /// A consistent copy taken under the read lock.
    pub fn snapshot(&self) -> Dataset {
        self.read(Dataset::clone)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::bootstrap_pmdt_schema;
    use crate::term::{Datatype, Literal};
    use crate::vocab::{ex, pmdt};

    #[test]
    fn set_semantics() {
        let schema = bootstrap_pmdt_schema();
        let mut ds = Dataset::new();
        let a = Assertion::typed(ex("markus"), pmdt("Patient"));
        assert!(ds.assert(&schema, a.clone(), Strictness::Strict).unwrap());
        assert_eq!(ds.len(), 1);
        assert!(!ds.assert(&schema, a, Strictness::Strict).unwrap());
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn kind_checks() {
        let schema = bootstrap_pmdt_schema();
        let mut ds = Dataset::new();
        let bad = Assertion::new(ex("markus"), pmdt("ageYears"), Literal::string("sixty-two"));
        assert!(matches!(
            ds.assert(&schema, bad, Strictness::Strict),
            Err(StoreError::KindMismatch { .. })
        ));
        let good = Assertion::new(
            ex("markus"),
            pmdt("ageYears"),
            Literal::new("62", Datatype::Integer).unwrap(),
        );
        assert!(ds.assert(&schema, good, Strictness::Strict).is_ok());
        let iri_for_data = Assertion::new(ex("markus"), pmdt("ageYears"), ex("x"));
        assert!(ds
            .assert(&schema, iri_for_data, Strictness::Lenient)
            .is_err());
    }

    #[test]
    fn strictness_controls_unknown_predicates() {
        let schema = bootstrap_pmdt_schema();
        let mut ds = Dataset::new();
        let a = Assertion::new(ex("x"), ex("likes"), ex("y"));
        assert_eq!(
            ds.assert(&schema, a.clone(), Strictness::Strict),
            Err(StoreError::UnknownPredicate(ex("likes")))
        );
        assert!(ds.assert(&schema, a, Strictness::Lenient).is_ok());
    }

    #[test]
    fn find_on_empty_dataset() {
        assert!(Dataset::new().find(&Pattern::any()).is_empty());
    }

    #[test]
    fn retract_restores_indexes() {
        let mut ds = Dataset::new();
        let a = Assertion::typed(ex("a"), pmdt("Patient"));
        let before = ds.clone();
        ds.insert(a.clone());
        ds.retract(&a);
        assert_eq!(ds, before);
        assert!(ds
            .find(&Pattern::new(None, Some(vocab::rdf_type()), None))
            .is_empty());
    }

    #[test]
    fn shared_snapshot() {
        let shared = SharedDataset::new(Dataset::new());
        shared.write(|ds| ds.insert(Assertion::typed(ex("a"), pmdt("Patient"))));
        let snap = shared.snapshot();
        shared.write(|ds| ds.insert(Assertion::typed(ex("b"), pmdt("Patient"))));
        assert_eq!(snap.len(), 1);
        assert_eq!(shared.read(Dataset::len), 2);
    }
}
