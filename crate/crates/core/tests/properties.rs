mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use pmdt_core::oracle::brute_force_closure;
use pmdt_core::reasoner::{classify, materialize, MaterializeConfig, SubsumptionClosure};
use pmdt_core::vocab::{ex, pmdt};
use pmdt_core::{
    bootstrap_pmdt_schema, parse_turtle, serialize_turtle, Assertion, Dataset, Iri, Pattern, Term,
};
use proptest::prelude::*;

fn dag() -> impl Strategy<Value = BTreeMap<Iri, BTreeSet<Iri>>> {
    (1..25usize).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(any::<prop::sample::Index>(), 0..3), n)
            .prop_map(move |edges| {
                edges
                    .into_iter()
                    .enumerate()
                    .map(|(i, ps)| {
                        let parents = if i == 0 {
                            BTreeSet::new()
                        } else {
                            ps.iter()
                                .map(|ix| ex(&format!("C{}", ix.index(i))))
                                .collect()
                        };
                        (ex(&format!("C{i}")), parents)
                    })
                    .collect()
            })
    })
}

fn pattern_strategy() -> impl Strategy<Value = Pattern> {
    (
        prop::option::of(individual()),
        prop::option::of(prop::sample::select(PREDICATES).prop_map(pmdt)),
        prop::option::of(prop_oneof![
            individual().prop_map(Term::Iri),
            literal().prop_map(Term::Literal)
        ]),
    )
        .prop_map(|(s, p, o)| Pattern::new(s, p, o))
}

proptest! {
    #[test]
    fn closure_matches_brute_force(parents in dag()) {
        let closure = SubsumptionClosure::from_parents(&parents);
        let mut pairs = BTreeSet::new();
        for c in closure.classes() {
            for a in closure.ancestors(c) {
                pairs.insert((c.clone(), a.clone()));
            }
        }
        prop_assert_eq!(pairs, brute_force_closure(&parents));
    }

    #[test]
    fn index_lookup_matches_scan(data in dataset(300), p in pattern_strategy()) {
        let ds = to_dataset(&data);
        let scanned: Vec<Assertion> = ds.iter().filter(|a| p.matches(a)).cloned().collect();
        prop_assert_eq!(ds.find(&p), scanned.clone());
        prop_assert_eq!(ds.count(&p), scanned.len());
    }

    #[test]
    fn retract_undoes_insert(data in dataset(100), a in assertion()) {
        let mut ds = to_dataset(&data);
        prop_assume!(!ds.contains(&a));
        let before = ds.clone();
        prop_assert!(ds.insert(a.clone()));
        prop_assert!(ds.retract(&a));
        prop_assert_eq!(&ds, &before);
        prop_assert_eq!(ds.find(&Pattern::any()), before.find(&Pattern::any()));
    }

    #[test]
    fn serialization_round_trips_and_ignores_order(data in dataset(200)) {
        let schema = bootstrap_pmdt_schema();
        let ds = to_dataset(&data);
        let mut rev = data.clone();
        rev.reverse();
        let text = serialize_turtle(&schema, Some(&ds));
        prop_assert_eq!(&text, &serialize_turtle(&schema, Some(&to_dataset(&rev))));
        let doc = parse_turtle(&text).unwrap();
        prop_assert_eq!(doc.data, ds);
        let expected: BTreeSet<Assertion> = schema.to_statements().into_iter().collect();
        prop_assert_eq!(doc.schema.into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn materialization_is_monotone_and_idempotent(data in type_dataset(200), links in prop::collection::vec((0..6u8, 0..6u8), 0..8)) {
        let schema = bootstrap_pmdt_schema();
        let closure = classify(&schema);
        let mut ds = to_dataset(&data);
        for i in 0..6u8 {
            ds.insert(Assertion::typed(ex(&format!("s{i}")), pmdt("TreatmentState")));
        }
        for (a, b) in links {
            ds.insert(Assertion::new(ex(&format!("s{a}")), pmdt("precedes"), ex(&format!("s{b}"))));
        }
        let config = MaterializeConfig::default();
        let Ok(out) = materialize(&schema, &closure, &ds, &config) else {
            return Ok(());
        };
        prop_assert!(ds.iter().all(|a| out.contains(a)));
        prop_assert_eq!(&materialize(&schema, &closure, &out, &config).unwrap(), &out);
        for a in out.with_predicate(&pmdt("precedes")) {
            prop_assert!(a.subject != *a.object.as_iri().unwrap());
            prop_assert!(out.contains(&Assertion::new(a.object.as_iri().unwrap().clone(), pmdt("follows"), a.subject.clone())));
        }
        for a in out.with_predicate(&pmdt("follows")) {
            prop_assert!(out.contains(&Assertion::new(a.object.as_iri().unwrap().clone(), pmdt("precedes"), a.subject.clone())));
        }
    }
}

#[test]
fn bootstrap_closure_matches_brute_force() {
    let schema = bootstrap_pmdt_schema();
    let parents: BTreeMap<Iri, BTreeSet<Iri>> = schema
        .classes()
        .map(|c| (c.iri.clone(), c.parents.clone()))
        .collect();
    let closure = classify(&schema);
    let oracle = brute_force_closure(&parents);
    for c in closure.classes() {
        for a in closure.ancestors(c) {
            assert!(oracle.contains(&(c.clone(), a.clone())));
        }
    }
    let total: usize = closure.classes().map(|c| closure.ancestors(c).len()).sum();
    assert_eq!(total, oracle.len());
    assert!(Dataset::new().is_empty());
}
