//! Deliberately simple reference implementations used to cross-check the
//! optimised code paths and to generate expected query results.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::query::{compare_terms, BindingSet, FilterOperand, PatternTerm, QueryAst};
use crate::store::Dataset;
use crate::term::{Iri, Term};

/// Subclass pairs `(sub, sup)` of the reflexive-transitive closure, computed
/// by repeated relaxation until nothing changes.
pub fn brute_force_closure(parents: &BTreeMap<Iri, BTreeSet<Iri>>) -> BTreeSet<(Iri, Iri)> {
    let mut pairs: BTreeSet<(Iri, Iri)> = BTreeSet::new();
    for (c, ps) in parents {
        pairs.insert((c.clone(), c.clone()));
        for p in ps {
            pairs.insert((p.clone(), p.clone()));
            pairs.insert((c.clone(), p.clone()));
        }
    }
    loop {
        let mut added = Vec::new();
        for (a, b) in &pairs {
            for (c, d) in &pairs {
                if b == c && !pairs.contains(&(a.clone(), d.clone())) {
                    added.push((a.clone(), d.clone()));
                }
            }
        }
        if added.is_empty() {
            return pairs;
        }
        pairs.extend(added);
    }
}

/// Nested-loop evaluation: every pattern scans every assertion in textual
/// order and filters run only on complete rows. `Err` carries the index of
/// the lowest filter that failed to evaluate on a surviving row.
pub fn naive_evaluate(ast: &QueryAst, ds: &Dataset) -> Result<BindingSet, usize> {
    let all: Vec<[Term; 3]> = ds
        .iter()
        .map(|a| {
            [
                Term::Iri(a.subject.clone()),
                Term::Iri(a.predicate.clone()),
                a.object.clone(),
            ]
        })
        .collect();
    let mut rows: Vec<BTreeMap<String, Term>> = vec![BTreeMap::new()];
    for p in &ast.patterns {
        let mut next = Vec::new();
        for row in &rows {
            'triples: for triple in &all {
                let mut row = row.clone();
                for (pos, value) in p.positions().into_iter().zip(triple) {
                    match pos {
                        PatternTerm::Term(t) if t != value => continue 'triples,
                        PatternTerm::Term(_) => {}
                        PatternTerm::OneOf(set) => match value {
                            Term::Iri(i) if set.contains(i) => {}
                            _ => continue 'triples,
                        },
                        PatternTerm::Var(v) => match row.get(v) {
                            Some(bound) if bound != value => continue 'triples,
                            Some(_) => {}
                            None => {
                                row.insert(v.clone(), value.clone());
                            }
                        },
                    }
                }
                next.push(row);
            }
        }
        rows = next;
    }
    let mut kept = Vec::new();
    let mut error: Option<usize> = None;
    'rows: for row in rows {
        let mut row_error = None;
        for (i, f) in ast.filters.iter().enumerate() {
            let right = match &f.right {
                FilterOperand::Var(v) => &row[v],
                FilterOperand::Term(t) => t,
            };
            match compare_terms(f.op, &row[&f.left], right) {
                Some(true) => {}
                Some(false) => continue 'rows,
                None => {
                    row_error.get_or_insert(i);
                }
            }
        }
        if let Some(i) = row_error {
            error = Some(error.map_or(i, |e| e.min(i)));
        }
        kept.push(
            ast.select
                .iter()
                .map(|v| row[v].clone())
                .collect::<Vec<Term>>(),
        );
    }
    if let Some(i) = error {
        return Err(i);
    }
    let mut unique: Vec<Vec<Term>> = Vec::new();
    for r in kept {
        if !unique.contains(&r) {
            unique.push(r);
        }
    }
    let key_cols: Vec<usize> = ast
        .order_by
        .iter()
        .map(|v| {
            ast.select
                .iter()
                .position(|s| s == v)
                .expect("order-by column is selected")
        })
        .collect();
    unique.sort_by(|a, b| {
        for &k in &key_cols {
            let o = a[k].cmp(&b[k]);
            if o != Ordering::Equal {
                return o;
            }
        }
        a.cmp(b)
    });
    if let Some(n) = ast.limit {
        unique.truncate(n);
    }
    Ok(BindingSet {
        columns: ast.select.clone(),
        rows: unique,
    })
}
