//! The ontology meta-model: classes, properties, cardinality restrictions and
//! disjointness, plus conversion to and from schema statements.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::store::Assertion;
use crate::term::{Datatype, Iri, Literal, PrefixTable, Term};
use crate::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("class {0} is already declared")]
    DuplicateClass(Iri),
    #[error("class {class} names undeclared parent {parent}")]
    UnknownParent { class: Iri, parent: Iri },
    #[error("adding {child} ⊑ {parent} would introduce a subclass cycle")]
    CycleIntroduced { child: Iri, parent: Iri },
    #[error("unknown class {0}")]
    UnknownClass(Iri),
    #[error("property {0} is already declared")]
    DuplicateProperty(Iri),
    #[error("property {property}: unknown domain or range entry {entry}")]
    UnknownDomainOrRange { property: Iri, entry: Iri },
    #[error("property {property}: inverse mismatch ({detail})")]
    InverseMismatch { property: Iri, detail: String },
    #[error("unknown property {0}")]
    UnknownProperty(Iri),
    #[error("restriction on {class} / {property}: {detail}")]
    InvalidRestriction {
        class: Iri,
        property: Iri,
        detail: String,
    },
    #[error("malformed schema statement for {subject}: {detail}")]
    Malformed { subject: Iri, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyKind {
    Object,
    Data,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDef {
    pub iri: Iri,
    pub parents: BTreeSet<Iri>,
    /// Annotation property (rdfs:label, rdfs:comment, pmdt:alignedWith) → value.
    pub annotations: BTreeMap<Iri, String>,
}

impl ClassDef {
    pub fn new(iri: Iri) -> Self {
        ClassDef {
            iri,
            parents: BTreeSet::new(),
            annotations: BTreeMap::new(),
        }
    }

    pub fn with_parent(mut self, parent: Iri) -> Self {
        self.parents.insert(parent);
        self
    }

    pub fn with_annotation(mut self, key: Iri, value: impl Into<String>) -> Self {
        self.annotations.insert(key, value.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyDef {
    pub iri: Iri,
    pub kind: PropertyKind,
    /// Union of classes; empty means any subject.
    pub domain: BTreeSet<Iri>,
    /// Union of classes (object kind) or datatype IRIs (data kind); empty means unconstrained.
    pub range: BTreeSet<Iri>,
    pub inverse: Option<Iri>,
    pub min_inclusive: Option<Literal>,
    pub max_inclusive: Option<Literal>,
    pub annotations: BTreeMap<Iri, String>,
}

impl PropertyDef {
    pub fn object(iri: Iri) -> Self {
        PropertyDef {
            iri,
            kind: PropertyKind::Object,
            domain: BTreeSet::new(),
            range: BTreeSet::new(),
            inverse: None,
            min_inclusive: None,
            max_inclusive: None,
            annotations: BTreeMap::new(),
        }
    }

    pub fn data(iri: Iri, datatype: Datatype) -> Self {
        let mut p = PropertyDef::object(iri);
        p.kind = PropertyKind::Data;
        p.range.insert(datatype.iri());
        p
    }

    pub fn domain(mut self, classes: impl IntoIterator<Item = Iri>) -> Self {
        self.domain.extend(classes);
        self
    }

    pub fn range(mut self, entries: impl IntoIterator<Item = Iri>) -> Self {
        self.range.extend(entries);
        self
    }

    pub fn inverse_of(mut self, other: Iri) -> Self {
        self.inverse = Some(other);
        self
    }

    pub fn bounds(mut self, min: Option<Literal>, max: Option<Literal>) -> Self {
        self.min_inclusive = min;
        self.max_inclusive = max;
        self
    }

    /// Datatypes accepted by a data property; empty when unconstrained.
    pub fn datatypes(&self) -> Vec<Datatype> {
        self.range.iter().filter_map(Datatype::from_iri).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CardinalityRestriction {
    pub on_class: Iri,
    pub on_property: Iri,
    pub min: u32,
    /// `None` is unbounded.
    pub max: Option<u32>,
}

impl CardinalityRestriction {
    pub fn new(on_class: Iri, on_property: Iri, min: u32, max: Option<u32>) -> Self {
        CardinalityRestriction {
            on_class,
            on_property,
            min,
            max,
        }
    }

    pub fn describe(&self, prefixes: &PrefixTable) -> String {
        let max = self.max.map_or_else(|| "*".to_string(), |m| m.to_string());
        format!(
            "{} {} [{}..{}]",
            prefixes.render(&self.on_class),
            prefixes.render(&self.on_property),
            self.min,
            max
        )
    }
}

/// The global schema (TBox).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaGraph {
    classes: BTreeMap<Iri, ClassDef>,
    properties: BTreeMap<Iri, PropertyDef>,
    restrictions: Vec<CardinalityRestriction>,
    prefixes: PrefixTable,
    disjoint: BTreeSet<(Iri, Iri)>,
}

impl Default for SchemaGraph {
    fn default() -> Self {
        SchemaGraph::new(PrefixTable::default())
    }
}

impl SchemaGraph {
    pub fn new(prefixes: PrefixTable) -> Self {
        SchemaGraph {
            classes: BTreeMap::new(),
            properties: BTreeMap::new(),
            restrictions: Vec::new(),
            prefixes,
            disjoint: BTreeSet::new(),
        }
    }

    pub fn prefixes(&self) -> &PrefixTable {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixTable {
        &mut self.prefixes
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.classes.values()
    }

    pub fn class(&self, iri: &Iri) -> Option<&ClassDef> {
        self.classes.get(iri)
    }

    pub fn has_class(&self, iri: &Iri) -> bool {
        self.classes.contains_key(iri)
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyDef> {
        self.properties.values()
    }

    pub fn property(&self, iri: &Iri) -> Option<&PropertyDef> {
        self.properties.get(iri)
    }

    pub fn restrictions(&self) -> &[CardinalityRestriction] {
        &self.restrictions
    }

    pub fn disjoint_pairs(&self) -> impl Iterator<Item = &(Iri, Iri)> {
        self.disjoint.iter()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn object_property_count(&self) -> usize {
        self.properties
            .values()
            .filter(|p| p.kind == PropertyKind::Object)
            .count()
    }

    pub fn define_class(&mut self, def: ClassDef) -> Result<(), SchemaError> {
        if self.classes.contains_key(&def.iri) {
            return Err(SchemaError::DuplicateClass(def.iri));
        }
        if def.parents.contains(&def.iri) {
            return Err(SchemaError::CycleIntroduced {
                child: def.iri.clone(),
                parent: def.iri,
            });
        }
        if let Some(parent) = def.parents.iter().find(|p| !self.classes.contains_key(*p)) {
            return Err(SchemaError::UnknownParent {
                class: def.iri.clone(),
                parent: parent.clone(),
            });
        }
        // A fresh class has no descendants, so its parents cannot close a cycle.
        self.classes.insert(def.iri.clone(), def);
        Ok(())
    }

    /// Adds a direct subclass edge between declared classes.
    pub fn add_subclass(&mut self, child: &Iri, parent: &Iri) -> Result<(), SchemaError> {
        for c in [child, parent] {
            if !self.classes.contains_key(c) {
                return Err(SchemaError::UnknownClass(c.clone()));
            }
        }
        if child == parent || self.is_ancestor_or_self(child, parent) {
            return Err(SchemaError::CycleIntroduced {
                child: child.clone(),
                parent: parent.clone(),
            });
        }
        self.classes
            .get_mut(child)
            .expect("checked above")
            .parents
            .insert(parent.clone());
        Ok(())
    }

    /// True when `ancestor` is reachable from `class` through parent edges.
    fn is_ancestor_or_self(&self, ancestor: &Iri, class: &Iri) -> bool {
        let mut stack = vec![class];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if c == ancestor {
                return true;
            }
            if !seen.insert(c) {
                continue;
            }
            if let Some(def) = self.classes.get(c) {
                stack.extend(def.parents.iter());
            }
        }
        false
    }

    pub fn define_property(&mut self, def: PropertyDef) -> Result<(), SchemaError> {
        if self.properties.contains_key(&def.iri) {
            return Err(SchemaError::DuplicateProperty(def.iri));
        }
        for d in &def.domain {
            if !self.classes.contains_key(d) {
                return Err(SchemaError::UnknownDomainOrRange {
                    property: def.iri.clone(),
                    entry: d.clone(),
                });
            }
        }
        for r in &def.range {
            let ok = match def.kind {
                PropertyKind::Object => self.classes.contains_key(r),
                PropertyKind::Data => Datatype::from_iri(r).is_some(),
            };
            if !ok {
                return Err(SchemaError::UnknownDomainOrRange {
                    property: def.iri.clone(),
                    entry: r.clone(),
                });
            }
        }
        if let Some(inv) = &def.inverse {
            if def.kind != PropertyKind::Object {
                return Err(SchemaError::InverseMismatch {
                    property: def.iri.clone(),
                    detail: "data properties cannot have inverses".into(),
                });
            }
            if inv != &def.iri {
                match self.properties.get(inv) {
                    None => {
                        return Err(SchemaError::InverseMismatch {
                            property: def.iri.clone(),
                            detail: format!("inverse {inv} is not declared"),
                        })
                    }
                    Some(other) if other.kind != PropertyKind::Object => {
                        return Err(SchemaError::InverseMismatch {
                            property: def.iri.clone(),
                            detail: format!("inverse {inv} is a data property"),
                        })
                    }
                    Some(other) => match &other.inverse {
                        Some(r) if r != &def.iri => {
                            return Err(SchemaError::InverseMismatch {
                                property: def.iri.clone(),
                                detail: format!("{inv} already names {r} as its inverse"),
                            })
                        }
                        _ => {}
                    },
                }
            }
        }
        if let Some(inv) = def.inverse.clone() {
            if inv != def.iri {
                self.properties
                    .get_mut(&inv)
                    .expect("checked above")
                    .inverse = Some(def.iri.clone());
            }
        }
        self.properties.insert(def.iri.clone(), def);
        Ok(())
    }

    pub fn add_restriction(&mut self, r: CardinalityRestriction) -> Result<(), SchemaError> {
        let bad = |detail: &str| SchemaError::InvalidRestriction {
            class: r.on_class.clone(),
            property: r.on_property.clone(),
            detail: detail.to_string(),
        };
        if !self.classes.contains_key(&r.on_class) {
            return Err(bad("class not declared"));
        }
        if !self.properties.contains_key(&r.on_property) {
            return Err(bad("property not declared"));
        }
        if r.max.is_some_and(|m| m < r.min) {
            return Err(bad("min exceeds max"));
        }
        let key = |x: &CardinalityRestriction| (x.on_class.clone(), x.on_property.clone());
        match self.restrictions.binary_search_by_key(&key(&r), key) {
            Ok(_) => Err(bad("duplicate restriction")),
            Err(pos) => {
                self.restrictions.insert(pos, r);
                Ok(())
            }
        }
    }

    pub fn add_disjoint(&mut self, a: &Iri, b: &Iri) -> Result<(), SchemaError> {
        for c in [a, b] {
            if !self.classes.contains_key(c) {
                return Err(SchemaError::UnknownClass(c.clone()));
            }
        }
        let pair = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.disjoint.insert(pair);
        Ok(())
    }

    /// True when the direct-subclass relation has no cycle (Kahn's algorithm).
    pub fn is_acyclic(&self) -> bool {
        let mut indegree: BTreeMap<&Iri, usize> = self.classes.keys().map(|k| (k, 0)).collect();
        for c in self.classes.values() {
            *indegree.get_mut(&c.iri).expect("own key") = c.parents.len();
        }
        let mut children: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
        for c in self.classes.values() {
            for p in &c.parents {
                children.entry(p).or_default().push(&c.iri);
            }
        }
        let mut ready: Vec<&Iri> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(k, _)| *k)
            .collect();
        let mut visited = 0;
        while let Some(c) = ready.pop() {
            visited += 1;
            for ch in children.get(c).into_iter().flatten() {
                let d = indegree.get_mut(ch).expect("declared");
                *d -= 1;
                if *d == 0 {
                    ready.push(ch);
                }
            }
        }
        visited == self.classes.len()
    }

    /// Node IRI used when a restriction is written as statements.
    fn restriction_node(&self, r: &CardinalityRestriction) -> Iri {
        Iri::new(format!(
            "{}R_{}_{}",
            vocab::PMDT,
            r.on_class.local_name(),
            r.on_property.local_name()
        ))
    }

    /// The schema as statements, in no particular order.
    pub fn to_statements(&self) -> Vec<Assertion> {
        let ty = vocab::rdf_type();
        let iri = |s: &str| Term::Iri(Iri::new(s));
        let mut out = Vec::new();
        for c in self.classes.values() {
            out.push(Assertion::new(
                c.iri.clone(),
                ty.clone(),
                iri(vocab::OWL_CLASS),
            ));
            for p in &c.parents {
                out.push(Assertion::new(
                    c.iri.clone(),
                    Iri::new(vocab::RDFS_SUBCLASS_OF),
                    p.clone(),
                ));
            }
            for (k, v) in &c.annotations {
                out.push(Assertion::new(c.iri.clone(), k.clone(), Literal::string(v)));
            }
        }
        for p in self.properties.values() {
            let kind = match p.kind {
                PropertyKind::Object => vocab::OWL_OBJECT_PROPERTY,
                PropertyKind::Data => vocab::OWL_DATATYPE_PROPERTY,
            };
            out.push(Assertion::new(p.iri.clone(), ty.clone(), iri(kind)));
            for d in &p.domain {
                out.push(Assertion::new(
                    p.iri.clone(),
                    Iri::new(vocab::RDFS_DOMAIN),
                    d.clone(),
                ));
            }
            for r in &p.range {
                out.push(Assertion::new(
                    p.iri.clone(),
                    Iri::new(vocab::RDFS_RANGE),
                    r.clone(),
                ));
            }
            if let Some(inv) = &p.inverse {
                out.push(Assertion::new(
                    p.iri.clone(),
                    Iri::new(vocab::OWL_INVERSE_OF),
                    inv.clone(),
                ));
            }
            if let Some(min) = &p.min_inclusive {
                out.push(Assertion::new(
                    p.iri.clone(),
                    Iri::new(vocab::XSD_MIN_INCLUSIVE),
                    min.clone(),
                ));
            }
            if let Some(max) = &p.max_inclusive {
                out.push(Assertion::new(
                    p.iri.clone(),
                    Iri::new(vocab::XSD_MAX_INCLUSIVE),
                    max.clone(),
                ));
            }
            for (k, v) in &p.annotations {
                out.push(Assertion::new(p.iri.clone(), k.clone(), Literal::string(v)));
            }
        }
        for r in &self.restrictions {
            let node = self.restriction_node(r);
            out.push(Assertion::new(
                r.on_class.clone(),
                Iri::new(vocab::RDFS_SUBCLASS_OF),
                node.clone(),
            ));
            out.push(Assertion::new(
                node.clone(),
                ty.clone(),
                iri(vocab::OWL_RESTRICTION),
            ));
            out.push(Assertion::new(
                node.clone(),
                Iri::new(vocab::OWL_ON_PROPERTY),
                r.on_property.clone(),
            ));
            out.push(Assertion::new(
                node.clone(),
                Iri::new(vocab::OWL_MIN_CARDINALITY),
                Literal::integer(i64::from(r.min)),
            ));
            if let Some(max) = r.max {
                out.push(Assertion::new(
                    node,
                    Iri::new(vocab::OWL_MAX_CARDINALITY),
                    Literal::integer(i64::from(max)),
                ));
            }
        }
        for (a, b) in &self.disjoint {
            out.push(Assertion::new(
                a.clone(),
                Iri::new(vocab::OWL_DISJOINT_WITH),
                b.clone(),
            ));
        }
        out
    }

    /// Rebuilds a schema from statements produced by [`SchemaGraph::to_statements`]
    /// (or hand-written in the same shape).
    pub fn from_statements(
        prefixes: PrefixTable,
        statements: &[Assertion],
    ) -> Result<SchemaGraph, SchemaError> {
        let mut by_subject: BTreeMap<&Iri, Vec<&Assertion>> = BTreeMap::new();
        for a in statements {
            by_subject.entry(&a.subject).or_default().push(a);
        }
        let has_type = |s: &Iri, t: &str| {
            by_subject.get(s).is_some_and(|v| {
                v.iter().any(|a| {
                    a.predicate.as_str() == vocab::RDF_TYPE
                        && a.object.as_iri().is_some_and(|o| o.as_str() == t)
                })
            })
        };
        let object_iri = |a: &Assertion| -> Result<Iri, SchemaError> {
            a.object
                .as_iri()
                .cloned()
                .ok_or_else(|| SchemaError::Malformed {
                    subject: a.subject.clone(),
                    detail: format!("{} expects an IRI object", a.predicate),
                })
        };
        let restriction_nodes: BTreeSet<&Iri> = by_subject
            .keys()
            .copied()
            .filter(|s| has_type(s, vocab::OWL_RESTRICTION))
            .collect();

        // Classes and their parent edges.
        let mut class_parents: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        let mut class_annotations: BTreeMap<Iri, BTreeMap<Iri, String>> = BTreeMap::new();
        let mut class_restrictions: Vec<(Iri, Iri)> = Vec::new();
        let mut property_subjects: Vec<&Iri> = Vec::new();
        for (&subject, stmts) in &by_subject {
            if restriction_nodes.contains(subject) {
                continue;
            }
            let is_object_prop = has_type(subject, vocab::OWL_OBJECT_PROPERTY);
            let is_data_prop = has_type(subject, vocab::OWL_DATATYPE_PROPERTY);
            if is_object_prop || is_data_prop {
                property_subjects.push(subject);
                continue;
            }
            let is_class = has_type(subject, vocab::OWL_CLASS)
                || stmts
                    .iter()
                    .any(|a| a.predicate.as_str() == vocab::RDFS_SUBCLASS_OF);
            if !is_class {
                if stmts
                    .iter()
                    .all(|a| a.predicate.as_str() == vocab::OWL_DISJOINT_WITH)
                {
                    continue;
                }
                return Err(SchemaError::Malformed {
                    subject: subject.clone(),
                    detail: "subject is neither a class, property nor restriction".into(),
                });
            }
            let parents = class_parents.entry(subject.clone()).or_default();
            let annotations = class_annotations.entry(subject.clone()).or_default();
            for a in stmts {
                match a.predicate.as_str() {
                    vocab::RDF_TYPE | vocab::OWL_DISJOINT_WITH => {}
                    vocab::RDFS_SUBCLASS_OF => {
                        let o = object_iri(a)?;
                        if restriction_nodes.contains(&o) {
                            class_restrictions.push((subject.clone(), o));
                        } else {
                            parents.insert(o);
                        }
                    }
                    _ => match &a.object {
                        Term::Literal(l) => {
                            annotations.insert(a.predicate.clone(), l.lexical().to_string());
                        }
                        Term::Iri(_) => {
                            return Err(SchemaError::Malformed {
                                subject: subject.clone(),
                                detail: format!("unsupported class statement {}", a.predicate),
                            })
                        }
                    },
                }
            }
        }

        let mut schema = SchemaGraph::new(prefixes);
        // Parents first; anything left over is either a cycle or dangling.
        let mut pending = class_parents.clone();
        while !pending.is_empty() {
            let ready: Vec<Iri> = pending
                .iter()
                .filter(|(_, ps)| ps.iter().all(|p| schema.has_class(p)))
                .map(|(c, _)| c.clone())
                .collect();
            if ready.is_empty() {
                let (class, parents) = pending.iter().next().expect("non-empty");
                let missing = parents
                    .iter()
                    .find(|p| !schema.has_class(p))
                    .expect("blocked");
                return Err(if pending.contains_key(missing) {
                    SchemaError::CycleIntroduced {
                        child: class.clone(),
                        parent: missing.clone(),
                    }
                } else {
                    SchemaError::UnknownParent {
                        class: class.clone(),
                        parent: missing.clone(),
                    }
                });
            }
            for c in ready {
                let parents = pending.remove(&c).expect("ready class pending");
                schema.define_class(ClassDef {
                    iri: c.clone(),
                    parents,
                    annotations: class_annotations.remove(&c).unwrap_or_default(),
                })?;
            }
        }

        // Properties, then inverse links once every property exists.
        let mut inverses: Vec<(Iri, Iri)> = Vec::new();
        for subject in property_subjects {
            let kind = if has_type(subject, vocab::OWL_OBJECT_PROPERTY) {
                PropertyKind::Object
            } else {
                PropertyKind::Data
            };
            let mut def = PropertyDef::object(subject.clone());
            def.kind = kind;
            for a in &by_subject[subject] {
                match a.predicate.as_str() {
                    vocab::RDF_TYPE => {}
                    vocab::RDFS_DOMAIN => {
                        def.domain.insert(object_iri(a)?);
                    }
                    vocab::RDFS_RANGE => {
                        def.range.insert(object_iri(a)?);
                    }
                    vocab::OWL_INVERSE_OF => inverses.push((subject.clone(), object_iri(a)?)),
                    vocab::XSD_MIN_INCLUSIVE | vocab::XSD_MAX_INCLUSIVE => {
                        let lit = a.object.as_literal().cloned().ok_or_else(|| {
                            SchemaError::Malformed {
                                subject: subject.clone(),
                                detail: "bound must be a literal".into(),
                            }
                        })?;
                        if a.predicate.as_str() == vocab::XSD_MIN_INCLUSIVE {
                            def.min_inclusive = Some(lit);
                        } else {
                            def.max_inclusive = Some(lit);
                        }
                    }
                    _ => match &a.object {
                        Term::Literal(l) => {
                            def.annotations
                                .insert(a.predicate.clone(), l.lexical().to_string());
                        }
                        Term::Iri(_) => {
                            return Err(SchemaError::Malformed {
                                subject: subject.clone(),
                                detail: format!("unsupported property statement {}", a.predicate),
                            })
                        }
                    },
                }
            }
            schema.define_property(def)?;
        }
        for (p, q) in inverses {
            if !schema.properties.contains_key(&q) {
                return Err(SchemaError::InverseMismatch {
                    property: p,
                    detail: format!("inverse {q} is not declared"),
                });
            }
            match &schema.properties[&q].inverse {
                Some(r) if r != &p => {
                    return Err(SchemaError::InverseMismatch {
                        property: p.clone(),
                        detail: format!("{q} already names {r} as its inverse"),
                    })
                }
                _ => {}
            }
            if let Some(existing) = &schema.properties[&p].inverse {
                if existing != &q {
                    return Err(SchemaError::InverseMismatch {
                        property: p.clone(),
                        detail: format!("declares both {existing} and {q}"),
                    });
                }
            }
            schema.properties.get_mut(&p).expect("declared").inverse = Some(q.clone());
            schema.properties.get_mut(&q).expect("declared").inverse = Some(p);
        }

        for (class, node) in class_restrictions {
            let stmts = &by_subject[&node];
            let mut on_property = None;
            let mut min = 0u32;
            let mut max = None;
            for a in stmts {
                let count = || {
                    a.object
                        .as_literal()
                        .and_then(Literal::as_i64)
                        .and_then(|n| u32::try_from(n).ok())
                        .ok_or_else(|| SchemaError::Malformed {
                            subject: node.clone(),
                            detail: "cardinality must be a non-negative integer".into(),
                        })
                };
                match a.predicate.as_str() {
                    vocab::OWL_ON_PROPERTY => on_property = Some(object_iri(a)?),
                    vocab::OWL_MIN_CARDINALITY => min = count()?,
                    vocab::OWL_MAX_CARDINALITY => max = Some(count()?),
                    _ => {}
                }
            }
            let on_property = on_property.ok_or_else(|| SchemaError::Malformed {
                subject: node.clone(),
                detail: "restriction without owl:onProperty".into(),
            })?;
            schema.add_restriction(CardinalityRestriction::new(class, on_property, min, max))?;
        }

        for a in statements
            .iter()
            .filter(|a| a.predicate.as_str() == vocab::OWL_DISJOINT_WITH)
        {
            schema.add_disjoint(&a.subject, &object_iri(a)?)?;
        }
        Ok(schema)
    }

    /// Adds every class, property, restriction and disjointness axiom of `other`
    /// that is not already present.
    pub fn merge(&mut self, other: &SchemaGraph) -> Result<(), SchemaError> {
        let mut statements = self.to_statements();
        statements.extend(other.to_statements());
        statements.sort();
        statements.dedup();
        let mut prefixes = self.prefixes.clone();
        prefixes.merge(&other.prefixes);
        *self = SchemaGraph::from_statements(prefixes, &statements)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::pmdt;

    fn base() -> SchemaGraph {
        let mut s = SchemaGraph::default();
        s.define_class(ClassDef::new(pmdt("Treatment"))).unwrap();
        s.define_class(ClassDef::new(pmdt("CancerTherapy")).with_parent(pmdt("Treatment")))
            .unwrap();
        s.define_class(ClassDef::new(pmdt("Patient"))).unwrap();
        s
    }

    #[test]
    fn define_class_adds_leaf() {
        let mut s = base();
        s.define_class(ClassDef::new(pmdt("CellTherapy")).with_parent(pmdt("CancerTherapy")))
            .unwrap();
        assert!(s
            .class(&pmdt("CellTherapy"))
            .unwrap()
            .parents
            .contains(&pmdt("CancerTherapy")));
        assert!(s.is_acyclic());
    }

    #[test]
    fn define_class_errors() {
        let mut s = base();
        assert_eq!(
            s.define_class(ClassDef::new(pmdt("X")).with_parent(pmdt("Nonexistent"))),
            Err(SchemaError::UnknownParent {
                class: pmdt("X"),
                parent: pmdt("Nonexistent")
            })
        );
        assert_eq!(
            s.define_class(ClassDef::new(pmdt("Patient"))),
            Err(SchemaError::DuplicateClass(pmdt("Patient")))
        );
        s.define_class(ClassDef::new(pmdt("Y"))).unwrap();
        s.define_class(ClassDef::new(pmdt("X")).with_parent(pmdt("Y")))
            .unwrap();
        assert!(matches!(
            s.add_subclass(&pmdt("Y"), &pmdt("X")),
            Err(SchemaError::CycleIntroduced { .. })
        ));
        assert!(s.is_acyclic());
    }

    #[test]
    fn define_property_checks() {
        let mut s = base();
        s.define_property(
            PropertyDef::object(pmdt("treatedWith"))
                .domain([pmdt("Patient")])
                .range([pmdt("Treatment")]),
        )
        .unwrap();
        let err = s.define_property(PropertyDef::object(pmdt("hue")).range([Iri::new("color")]));
        let mut data = PropertyDef::data(pmdt("hue"), Datatype::String);
        data.range = [Iri::new("color")].into();
        assert!(matches!(err, Err(SchemaError::UnknownDomainOrRange { .. })));
        assert!(matches!(
            s.define_property(data),
            Err(SchemaError::UnknownDomainOrRange { .. })
        ));
    }

    #[test]
    fn inverse_declarations_are_symmetric() {
        let mut s = base();
        s.define_property(PropertyDef::object(pmdt("q"))).unwrap();
        s.define_property(PropertyDef::object(pmdt("p")).inverse_of(pmdt("q")))
            .unwrap();
        assert_eq!(s.property(&pmdt("q")).unwrap().inverse, Some(pmdt("p")));

        s.define_property(PropertyDef::object(pmdt("r"))).unwrap();
        s.define_property(PropertyDef::object(pmdt("q2")).inverse_of(pmdt("r")))
            .unwrap();
        // q2 already names r; declaring p2 inverse q2 must fail.
        assert!(matches!(
            s.define_property(PropertyDef::object(pmdt("p2")).inverse_of(pmdt("q2"))),
            Err(SchemaError::InverseMismatch { .. })
        ));
    }

    #[test]
    fn restriction_bounds() {
        let mut s = base();
        s.define_property(PropertyDef::object(pmdt("treatedWith")))
            .unwrap();
        assert!(s
            .add_restriction(CardinalityRestriction::new(
                pmdt("Patient"),
                pmdt("treatedWith"),
                2,
                Some(1)
            ))
            .is_err());
        assert!(s
            .add_restriction(CardinalityRestriction::new(
                pmdt("Patient"),
                pmdt("nope"),
                0,
                None
            ))
            .is_err());
    }

    #[test]
    fn statements_round_trip() {
        let mut s = base();
        s.define_property(PropertyDef::object(pmdt("treatedWith")).domain([pmdt("Patient")]))
            .unwrap();
        s.add_restriction(CardinalityRestriction::new(
            pmdt("Patient"),
            pmdt("treatedWith"),
            1,
            None,
        ))
        .unwrap();
        s.add_disjoint(&pmdt("Treatment"), &pmdt("Patient"))
            .unwrap();
        let back =
            SchemaGraph::from_statements(PrefixTable::default(), &s.to_statements()).unwrap();
        assert_eq!(back, s);
    }
}
