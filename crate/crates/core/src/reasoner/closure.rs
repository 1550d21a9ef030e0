use std::collections::{BTreeMap, BTreeSet};

use crate::schema::SchemaGraph;
use crate::term::Iri;

/// Reflexive-transitive superclass relation, with the inverse (descendant)
/// view precomputed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubsumptionClosure {
    ancestors: BTreeMap<Iri, BTreeSet<Iri>>,
    descendants: BTreeMap<Iri, BTreeSet<Iri>>,
}

impl SubsumptionClosure {
    /// Builds the closure from direct parent edges. Every key and every parent
    /// becomes a class of the closure.
    pub fn from_parents(parents: &BTreeMap<Iri, BTreeSet<Iri>>) -> Self {
        let mut classes: BTreeSet<&Iri> = parents.keys().collect();
        classes.extend(parents.values().flatten());
        let mut ancestors: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        for &c in &classes {
            let mut seen = BTreeSet::new();
            let mut stack = vec![c];
            while let Some(x) = stack.pop() {
                if seen.insert(x.clone()) {
                    stack.extend(parents.get(x).into_iter().flatten());
                }
            }
            ancestors.insert(c.clone(), seen);
        }
        let mut descendants: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        for (c, ups) in &ancestors {
            for a in ups {
                descendants.entry(a.clone()).or_default().insert(c.clone());
            }
        }
        SubsumptionClosure {
            ancestors,
            descendants,
        }
    }

    pub fn classes(&self) -> impl Iterator<Item = &Iri> {
        self.ancestors.keys()
    }

    pub fn contains(&self, class: &Iri) -> bool {
        self.ancestors.contains_key(class)
    }

    /// Ancestors of `class`, including itself. Empty for unknown classes.
    pub fn ancestors(&self, class: &Iri) -> &BTreeSet<Iri> {
        static EMPTY: BTreeSet<Iri> = BTreeSet::new();
        self.ancestors.get(class).unwrap_or(&EMPTY)
    }

    /// Descendants of `class`, including itself. Empty for unknown classes.
    pub fn descendants(&self, class: &Iri) -> &BTreeSet<Iri> {
        static EMPTY: BTreeSet<Iri> = BTreeSet::new();
        self.descendants.get(class).unwrap_or(&EMPTY)
    }

    /// `sub ⊑ sup`; an unknown class is only subsumed by itself.
    pub fn is_subclass(&self, sub: &Iri, sup: &Iri) -> bool {
        sub == sup || self.ancestors(sub).contains(sup)
    }

    pub fn as_map(&self) -> &BTreeMap<Iri, BTreeSet<Iri>> {
        &self.ancestors
    }
}

/// Computes the subsumption closure of `schema`.
pub fn classify(schema: &SchemaGraph) -> SubsumptionClosure {
    let parents: BTreeMap<Iri, BTreeSet<Iri>> = schema
        .classes()
        .map(|c| (c.iri.clone(), c.parents.clone()))
        .collect();
    SubsumptionClosure::from_parents(&parents)
}
