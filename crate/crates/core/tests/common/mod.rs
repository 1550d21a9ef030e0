#![allow(dead_code)]

use pmdt_core::query::{CmpOp, FilterExpr, FilterOperand, PatternTerm, QueryAst, TriplePattern};
use pmdt_core::vocab::{ex, pmdt, rdf_type};
use pmdt_core::{Assertion, Dataset, Iri, Literal, PrefixTable, Term};
use proptest::prelude::*;

pub const CLASSES: &[&str] = &[
    "Patient",
    "Treatment",
    "Immunotherapy",
    "Surgery",
    "CancerTherapy",
    "AdverseEvent",
    "PatientData",
    "GenomicData",
    "State",
    "TreatmentState",
];

pub const PREDICATES: &[&str] = &[
    "treatedWith",
    "causedBy",
    "hasDiagnosis",
    "gradeValue",
    "description",
];

pub fn individual() -> impl Strategy<Value = Iri> {
    (0..8u8).prop_map(|i| ex(&format!("i{i}")))
}

pub fn class() -> impl Strategy<Value = Iri> {
    prop::sample::select(CLASSES).prop_map(pmdt)
}

pub fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        (0..5i64).prop_map(Literal::integer),
        prop::sample::select(&["a", "b"][..]).prop_map(Literal::string),
    ]
}

pub fn assertion() -> impl Strategy<Value = Assertion> {
    prop_oneof![
        (individual(), class()).prop_map(|(s, c)| Assertion::typed(s, c)),
        (
            individual(),
            prop::sample::select(&PREDICATES[..3]),
            individual()
        )
            .prop_map(|(s, p, o)| Assertion::new(s, pmdt(p), o)),
        (
            individual(),
            prop::sample::select(&PREDICATES[3..]),
            literal()
        )
            .prop_map(|(s, p, o)| Assertion::new(s, pmdt(p), o)),
    ]
}

pub fn dataset(max: usize) -> impl Strategy<Value = Vec<Assertion>> {
    prop::collection::vec(assertion(), 0..max)
}

pub fn type_dataset(max: usize) -> impl Strategy<Value = Vec<Assertion>> {
    prop::collection::vec(
        prop_oneof![
            3 => (individual(), class()).prop_map(|(s, c)| Assertion::typed(s, c)),
            1 => (individual(), individual()).prop_map(|(s, o)| Assertion::new(s, pmdt("treatedWith"), o)),
        ],
        0..max,
    )
}

fn var() -> impl Strategy<Value = PatternTerm> {
    prop::sample::select(&["a", "b", "c"][..]).prop_map(PatternTerm::var)
}

fn pattern() -> impl Strategy<Value = TriplePattern> {
    prop_oneof![
        (var(), class()).prop_map(|(s, c)| TriplePattern::new(
            s,
            PatternTerm::iri(rdf_type()),
            PatternTerm::iri(c)
        )),
        (var(), prop::sample::select(PREDICATES), var()).prop_map(|(s, p, o)| TriplePattern::new(
            s,
            PatternTerm::iri(pmdt(p)),
            o
        )),
        (var(), prop::sample::select(PREDICATES), individual()).prop_map(|(s, p, o)| {
            TriplePattern::new(s, PatternTerm::iri(pmdt(p)), PatternTerm::iri(o))
        }),
        (var(), var(), var()).prop_map(|(s, p, o)| TriplePattern::new(s, p, o)),
    ]
}

fn filter_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(
        &[
            CmpOp::Eq,
            CmpOp::Ne,
            CmpOp::Lt,
            CmpOp::Le,
            CmpOp::Gt,
            CmpOp::Ge,
        ][..],
    )
}

/// Random conjunctive queries with up to three patterns and two filters.
pub fn query() -> impl Strategy<Value = QueryAst> {
    (
        prop::collection::vec(pattern(), 1..=3),
        prop::collection::vec(
            (
                filter_op(),
                prop_oneof![
                    literal().prop_map(Term::Literal),
                    individual().prop_map(Term::Iri)
                ],
            ),
            0..=2,
        ),
        any::<bool>(),
        prop::option::of(1..4usize),
    )
        .prop_map(|(patterns, filters, order, limit)| {
            let mut ast = QueryAst {
                select: Vec::new(),
                patterns,
                filters: Vec::new(),
                distinct: true,
                order_by: Vec::new(),
                limit,
                prefixes: PrefixTable::default(),
            };
            ast.select = ast
                .pattern_variables()
                .iter()
                .map(|v| v.to_string())
                .collect();
            let first = ast.select[0].clone();
            ast.filters = filters
                .into_iter()
                .map(|(op, t)| FilterExpr {
                    left: first.clone(),
                    op,
                    right: FilterOperand::Term(t),
                })
                .collect();
            if order {
                ast.order_by = vec![ast.select.last().unwrap().clone()];
            }
            ast
        })
}

pub fn to_dataset(assertions: &[Assertion]) -> Dataset {
    assertions.iter().cloned().collect()
}
