//! Ontology kernel for the Patient Medical Digital Twin: the meta-model and
//! bootstrap vocabulary, a Turtle-subset reader/writer, an indexed instance
//! store, a subsumption reasoner with closed-world validation, and a
//! conjunctive query engine.

pub mod bootstrap;
pub mod lexer;
pub mod oracle;
pub mod query;
pub mod reasoner;
pub mod schema;
pub mod store;
pub mod term;
pub mod turtle;
pub mod vocab;

pub use bootstrap::bootstrap_pmdt_schema;
pub use query::{evaluate_local, parse_query, rewrite_with_subsumption, BindingSet, QueryAst};
pub use schema::{
    CardinalityRestriction, ClassDef, PropertyDef, PropertyKind, SchemaError, SchemaGraph,
};
pub use store::{Assertion, Dataset, LoadError, Pattern, SharedDataset, StoreError, Strictness};
pub use term::{Datatype, Iri, Literal, LiteralError, PrefixTable, Term};
pub use turtle::{
    parse_term, parse_turtle, parse_turtle_with, serialize_dataset, serialize_turtle,
    TurtleDocument, TurtleError,
};
