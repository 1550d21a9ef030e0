//! Conjunctive SELECT queries: parsing, subsumption rewriting, planning and
//! evaluation over a local dataset.

mod ast;
mod bindings;
mod eval;
mod parser;

pub use ast::{CmpOp, FilterExpr, FilterOperand, PatternTerm, QueryAst, TriplePattern};
pub use bindings::{BindingSet, BindingsError};
pub use eval::{
    compare_terms, estimate, evaluate_local, evaluate_with_order, explain_plan, finalize,
    join_order, plan, rewrite_with_subsumption, EvalError, PlanStep, RewriteError,
};
pub use parser::{parse_query, parse_query_with, QueryParseError};
