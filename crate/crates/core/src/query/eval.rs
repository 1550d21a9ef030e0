use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::{CmpOp, FilterExpr, FilterOperand, PatternTerm, QueryAst, TriplePattern};
use super::bindings::BindingSet;
use crate::reasoner::SubsumptionClosure;
use crate::store::{Dataset, Pattern};
use crate::term::{Iri, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("filter #{index} `{filter}` compares incomparable terms {left} and {right}")]
    IncomparableFilter {
        index: usize,
        filter: String,
        left: String,
        right: String,
    },
    #[error("forced join order must be a permutation of the pattern indexes")]
    BadOrder,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("unknown class {0}")]
    UnknownClass(Iri),
}

/// Replaces each `?x a C` with a match over every subclass of `C`.
pub fn rewrite_with_subsumption(
    ast: &QueryAst,
    closure: &SubsumptionClosure,
) -> Result<QueryAst, RewriteError> {
    let mut out = ast.clone();
    for p in &mut out.patterns {
        let Some(c) = p.type_class().cloned() else {
            continue;
        };
        if !closure.contains(&c) {
            return Err(RewriteError::UnknownClass(c));
        }
        let desc = closure.descendants(&c);
        if desc.len() > 1 {
            p.object = PatternTerm::OneOf(desc.clone());
        }
    }
    Ok(out)
}

/// Compares two bound terms. `None` when they are not comparable.
pub fn compare_terms(op: CmpOp, left: &Term, right: &Term) -> Option<bool> {
    let ord = match (left, right) {
        (Term::Iri(a), Term::Iri(b)) => match op {
            CmpOp::Eq | CmpOp::Ne => a.cmp(b),
            _ => return None,
        },
        (Term::Literal(a), Term::Literal(b)) => a.compare_value(b)?,
        _ => return None,
    };
    Some(match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    })
}

/// One step of a join plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanStep {
    pub pattern: usize,
    pub index: &'static str,
    pub estimate: usize,
    /// Filters that become evaluable after this step.
    pub filters: Vec<usize>,
}

fn concrete(t: &PatternTerm) -> Option<&Term> {
    match t {
        PatternTerm::Term(t) => Some(t),
        _ => None,
    }
}

fn store_pattern(p: &TriplePattern) -> Pattern {
    Pattern::new(
        concrete(&p.subject).and_then(Term::as_iri).cloned(),
        concrete(&p.predicate).and_then(Term::as_iri).cloned(),
        concrete(&p.object).cloned(),
    )
}

/// Candidate count of `p` with variables treated as wildcards.
pub fn estimate(p: &TriplePattern, ds: &Dataset) -> usize {
    let base = store_pattern(p);
    match &p.object {
        PatternTerm::OneOf(classes) => classes
            .iter()
            .map(|c| {
                let mut q = base.clone();
                q.object = Some(Term::Iri(c.clone()));
                ds.count(&q)
            })
            .sum(),
        _ => ds.count(&base),
    }
}

fn index_name(p: &TriplePattern) -> &'static str {
    let mut q = store_pattern(p);
    if let PatternTerm::OneOf(classes) = &p.object {
        q.object = classes.iter().next().cloned().map(Term::Iri);
    }
    q.index_name()
}

/// Greedy connected order: repeatedly take the cheapest pattern sharing a
/// variable with those already chosen (any pattern when none does), ties
/// broken by textual position.
pub fn join_order(ast: &QueryAst, ds: &Dataset) -> Vec<usize> {
    let estimates: Vec<usize> = ast.patterns.iter().map(|p| estimate(p, ds)).collect();
    greedy_order(&ast.patterns, &estimates)
}

pub(crate) fn greedy_order(patterns: &[TriplePattern], estimates: &[usize]) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let connected: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| patterns[i].variables().iter().any(|v| bound.contains(v)))
            .collect();
        let pool = if connected.is_empty() {
            &remaining
        } else {
            &connected
        };
        let best = *pool
            .iter()
            .min_by_key(|&&i| (estimates[i], i))
            .expect("pool is non-empty");
        remaining.retain(|&i| i != best);
        bound.extend(patterns[best].variables());
        order.push(best);
    }
    order
}

/// The plan chosen for `ast` over `ds`.
pub fn plan(ast: &QueryAst, ds: &Dataset) -> Vec<PlanStep> {
    plan_with_order(ast, ds, &join_order(ast, ds))
}

fn plan_with_order(ast: &QueryAst, ds: &Dataset, order: &[usize]) -> Vec<PlanStep> {
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    let mut placed: BTreeSet<usize> = BTreeSet::new();
    order
        .iter()
        .map(|&i| {
            let p = &ast.patterns[i];
            bound.extend(p.variables());
            let filters: Vec<usize> = ast
                .filters
                .iter()
                .enumerate()
                .filter(|(fi, f)| {
                    !placed.contains(fi) && f.variables().iter().all(|v| bound.contains(v))
                })
                .map(|(fi, _)| fi)
                .collect();
            placed.extend(filters.iter().copied());
            PlanStep {
                pattern: i,
                index: index_name(p),
                estimate: estimate(p, ds),
                filters,
            }
        })
        .collect()
}

/// Human-readable plan, one line per pattern in join order.
pub fn explain_plan(ast: &QueryAst, ds: &Dataset) -> String {
    let mut out = String::new();
    for (n, step) in plan(ast, ds).iter().enumerate() {
        out.push_str(&format!(
            "{}. {}  index={} estimate={}",
            n + 1,
            ast.patterns[step.pattern].render(&ast.prefixes),
            step.index,
            step.estimate
        ));
        if !step.filters.is_empty() {
            let fs: Vec<_> = step.filters.iter().map(|f| format!("#{f}")).collect();
            out.push_str(&format!(" filters={}", fs.join(",")));
        }
        out.push('\n');
    }
    out
}

struct Row {
    values: Vec<Option<Term>>,
    /// Lowest-numbered filter that could not be evaluated for this row.
    error: Option<usize>,
}

/// Evaluates `ast` over `ds` with the greedy join order.
pub fn evaluate_local(ast: &QueryAst, ds: &Dataset) -> Result<BindingSet, EvalError> {
    evaluate_with_order(ast, ds, &join_order(ast, ds))
}

/// Evaluates with a caller-chosen join order (a permutation of pattern indexes).
pub fn evaluate_with_order(
    ast: &QueryAst,
    ds: &Dataset,
    order: &[usize],
) -> Result<BindingSet, EvalError> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..ast.patterns.len()).collect::<Vec<_>>() {
        return Err(EvalError::BadOrder);
    }
    let vars: Vec<&str> = ast.pattern_variables();
    let slot: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut rows = vec![Row {
        values: vec![None; vars.len()],
        error: None,
    }];
    for step in plan_with_order(ast, ds, order) {
        let p = &ast.patterns[step.pattern];
        let mut next = Vec::new();
        for row in &rows {
            extend_row(p, row, &slot, ds, &mut next);
        }
        for fi in &step.filters {
            next.retain_mut(
                |row| match apply_filter(&ast.filters[*fi], &row.values, &slot) {
                    Some(keep) => keep,
                    None => {
                        row.error = Some(row.error.map_or(*fi, |e| e.min(*fi)));
                        true
                    }
                },
            );
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }
    if let Some(index) = rows.iter().filter_map(|r| r.error).min() {
        let f = &ast.filters[index];
        let row = rows
            .iter()
            .find(|r| r.error == Some(index))
            .expect("row with error");
        let value = |v: &str| {
            row.values[slot[v]]
                .as_ref()
                .map_or_else(|| "?".to_string(), |t| t.to_turtle(&ast.prefixes))
        };
        let right = match &f.right {
            FilterOperand::Var(v) => value(v),
            FilterOperand::Term(t) => t.to_turtle(&ast.prefixes),
        };
        return Err(EvalError::IncomparableFilter {
            index,
            filter: f.render(&ast.prefixes),
            left: value(&f.left),
            right,
        });
    }
    let projected = rows.into_iter().map(|r| {
        ast.select
            .iter()
            .map(|v| {
                r.values[slot[v.as_str()]]
                    .clone()
                    .expect("select variables are bound")
            })
            .collect::<Vec<Term>>()
    });
    Ok(finalize(&ast.select, projected, &ast.order_by, ast.limit))
}

fn extend_row(
    p: &TriplePattern,
    row: &Row,
    slot: &BTreeMap<&str, usize>,
    ds: &Dataset,
    out: &mut Vec<Row>,
) {
    let resolve = |t: &PatternTerm| -> Option<Term> {
        match t {
            PatternTerm::Var(v) => row.values[slot[v.as_str()]].clone(),
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::OneOf(_) => None,
        }
    };
    let s = resolve(&p.subject);
    let pr = resolve(&p.predicate);
    let o = resolve(&p.object);
    // A literal bound where an IRI is required cannot match.
    if matches!(s, Some(Term::Literal(_))) || matches!(pr, Some(Term::Literal(_))) {
        return;
    }
    let objects: Vec<Option<Term>> = match (&o, &p.object) {
        (None, PatternTerm::OneOf(classes)) => classes
            .iter()
            .cloned()
            .map(|c| Some(Term::Iri(c)))
            .collect(),
        _ => vec![o.clone()],
    };
    for object in objects {
        let q = Pattern::new(
            s.as_ref().and_then(Term::as_iri).cloned(),
            pr.as_ref().and_then(Term::as_iri).cloned(),
            object,
        );
        ds.for_each_match(&q, |a| {
            let mut values = row.values.clone();
            let found = [
                Term::Iri(a.subject.clone()),
                Term::Iri(a.predicate.clone()),
                a.object.clone(),
            ];
            for (pos, value) in p.positions().into_iter().zip(found) {
                if let PatternTerm::Var(v) = pos {
                    let cell = &mut values[slot[v.as_str()]];
                    match cell {
                        Some(existing) if existing != &value => return,
                        Some(_) => {}
                        None => *cell = Some(value),
                    }
                }
            }
            out.push(Row {
                values,
                error: row.error,
            });
        });
    }
}

fn apply_filter(
    f: &FilterExpr,
    values: &[Option<Term>],
    slot: &BTreeMap<&str, usize>,
) -> Option<bool> {
    let left = values[slot[f.left.as_str()]]
        .as_ref()
        .expect("filter placed after binding");
    let right = match &f.right {
        FilterOperand::Var(v) => values[slot[v.as_str()]]
            .as_ref()
            .expect("filter placed after binding"),
        FilterOperand::Term(t) => t,
    };
    compare_terms(f.op, left, right)
}

/// De-duplicates, sorts (ORDER BY keys first, then every column) and applies
/// LIMIT. Shared by local and federated evaluation so both produce identical
/// output for identical row sets.
pub fn finalize(
    columns: &[String],
    rows: impl IntoIterator<Item = Vec<Term>>,
    order_by: &[String],
    limit: Option<usize>,
) -> BindingSet {
    let set: BTreeSet<Vec<Term>> = rows.into_iter().collect();
    let mut rows: Vec<Vec<Term>> = set.into_iter().collect();
    let keys: Vec<usize> = order_by
        .iter()
        .filter_map(|v| columns.iter().position(|c| c == v))
        .collect();
    rows.sort_by(|a, b| {
        keys.iter()
            .map(|&k| a[k].cmp(&b[k]))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| a.cmp(b))
    });
    if let Some(n) = limit {
        rows.truncate(n);
    }
    BindingSet {
        columns: columns.to_vec(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::bootstrap_pmdt_schema;
    use crate::query::parse_query;
    use crate::reasoner::classify;
    use crate::store::Assertion;
    use crate::term::Literal;
    use crate::vocab::{ex, pmdt};

    fn data() -> Dataset {
        [
            Assertion::typed(ex("ae"), pmdt("AdverseEvent")),
            Assertion::typed(ex("io"), pmdt("Immunotherapy")),
            Assertion::typed(ex("sx"), pmdt("Surgery")),
            Assertion::new(ex("ae"), pmdt("causedBy"), ex("io")),
            Assertion::new(ex("ae"), pmdt("hasSeverityGrade"), ex("g")),
            Assertion::new(ex("g"), pmdt("gradeValue"), Literal::integer(2)),
            Assertion::new(ex("g"), pmdt("description"), Literal::string("two")),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn rewrite_expands_types() {
        let c = classify(&bootstrap_pmdt_schema());
        let q = parse_query("SELECT ?t WHERE { ?t a pmdt:Treatment }").unwrap();
        let r = rewrite_with_subsumption(&q, &c).unwrap();
        let rows = evaluate_local(&r, &data()).unwrap();
        assert_eq!(rows.rows.len(), 2);
        let leaf = parse_query("SELECT ?t WHERE { ?t a pmdt:Immunotherapy }").unwrap();
        assert_eq!(rewrite_with_subsumption(&leaf, &c).unwrap(), leaf);
        let bad = parse_query("SELECT ?t WHERE { ?t a pmdt:Nope }").unwrap();
        assert_eq!(
            rewrite_with_subsumption(&bad, &c),
            Err(RewriteError::UnknownClass(pmdt("Nope")))
        );
    }

    #[test]
    fn join_and_filter() {
        let q = parse_query(
            "SELECT ?ae ?v WHERE { ?ae pmdt:causedBy ?t . ?t a pmdt:Immunotherapy . ?ae pmdt:hasSeverityGrade ?g . ?g pmdt:gradeValue ?v FILTER(?v <= 2) }",
        )
        .unwrap();
        let rows = evaluate_local(&q, &data()).unwrap();
        assert_eq!(
            rows.rows,
            vec![vec![
                Term::Iri(ex("ae")),
                Term::Literal(Literal::integer(2))
            ]]
        );
    }

    #[test]
    fn incomparable_filter_is_an_error_unless_another_filter_fails() {
        let q = parse_query("SELECT ?x WHERE { ?g pmdt:description ?x FILTER(?x > 3) }").unwrap();
        assert!(matches!(
            evaluate_local(&q, &data()),
            Err(EvalError::IncomparableFilter { index: 0, .. })
        ));
        let q = parse_query(
            "SELECT ?x WHERE { ?g pmdt:description ?x FILTER(?x > 3) FILTER(?x = \"one\") }",
        )
        .unwrap();
        assert!(evaluate_local(&q, &data()).unwrap().rows.is_empty());
    }

    #[test]
    fn empty_dataset() {
        let q = parse_query("SELECT ?p WHERE { ?p a pmdt:Patient }").unwrap();
        assert!(evaluate_local(&q, &Dataset::new()).unwrap().rows.is_empty());
    }

    #[test]
    fn explain_single_pattern() {
        let q = parse_query("SELECT ?p WHERE { ?p a pmdt:Patient }").unwrap();
        let text = explain_plan(&q, &data());
        assert_eq!(text.lines().count(), 1);
        assert_eq!(
            text,
            "1. ?p a pmdt:Patient  index=predicate-object estimate=0\n"
        );
    }

    #[test]
    fn order_by_and_limit() {
        let rows = finalize(
            &["a".to_string(), "b".to_string()],
            vec![
                vec![
                    Term::Literal(Literal::integer(2)),
                    Term::Literal(Literal::integer(1)),
                ],
                vec![
                    Term::Literal(Literal::integer(1)),
                    Term::Literal(Literal::integer(9)),
                ],
                vec![
                    Term::Literal(Literal::integer(1)),
                    Term::Literal(Literal::integer(9)),
                ],
            ],
            &["b".to_string()],
            Some(1),
        );
        assert_eq!(rows.rows.len(), 1);
        assert_eq!(rows.rows[0][1], Term::Literal(Literal::integer(1)));
    }
}
