use std::collections::{BTreeSet, HashMap};

use pmdt_core::query::{compare_terms, FilterExpr, FilterOperand};
use pmdt_core::Term;

/// A set of rows over named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Relation {
    pub vars: Vec<String>,
    pub rows: BTreeSet<Vec<Term>>,
}

/// Index of the lowest filter that could not be evaluated on a surviving row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct FilterFailure(pub usize);

impl Relation {
    pub fn new(vars: Vec<String>) -> Self {
        Relation {
            vars,
            rows: BTreeSet::new(),
        }
    }

    /// The join identity: no variables, one empty row.
    pub fn unit() -> Self {
        Relation {
            vars: Vec::new(),
            rows: [Vec::new()].into(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    fn position(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    /// Natural join on shared variables (cross product when none).
    pub fn join(&self, other: &Relation) -> Relation {
        let shared: Vec<(usize, usize)> = self
            .vars
            .iter()
            .enumerate()
            .filter_map(|(i, v)| other.position(v).map(|j| (i, j)))
            .collect();
        let extra: Vec<usize> = (0..other.vars.len())
            .filter(|j| !shared.iter().any(|(_, s)| s == j))
            .collect();
        let mut vars = self.vars.clone();
        vars.extend(extra.iter().map(|&j| other.vars[j].clone()));
        let mut index: HashMap<Vec<&Term>, Vec<&Vec<Term>>> = HashMap::new();
        for r in &other.rows {
            index
                .entry(shared.iter().map(|&(_, j)| &r[j]).collect())
                .or_default()
                .push(r);
        }
        let mut rows = BTreeSet::new();
        for l in &self.rows {
            let key: Vec<&Term> = shared.iter().map(|&(i, _)| &l[i]).collect();
            if let Some(matches) = index.get(&key) {
                for r in matches {
                    let mut row = l.clone();
                    row.extend(extra.iter().map(|&j| r[j].clone()));
                    rows.insert(row);
                }
            }
        }
        Relation { vars, rows }
    }

    /// Drops rows with a false filter. Fails when a remaining row has a
    /// filter that could not be evaluated.
    pub fn filter(&mut self, filters: &[FilterExpr]) -> Result<(), FilterFailure> {
        if filters.is_empty() {
            return Ok(());
        }
        let mut failure: Option<usize> = None;
        let resolved: Vec<(usize, Option<usize>)> = filters
            .iter()
            .map(|f| {
                let right = match &f.right {
                    FilterOperand::Var(v) => self.position(v),
                    FilterOperand::Term(_) => None,
                };
                (
                    self.position(&f.left).expect("filter variable bound"),
                    right,
                )
            })
            .collect();
        self.rows.retain(|row| {
            let mut row_failure = None;
            for (i, (f, (l, r))) in filters.iter().zip(&resolved).enumerate() {
                let right = match (&f.right, r) {
                    (FilterOperand::Term(t), _) => t,
                    (FilterOperand::Var(_), Some(j)) => &row[*j],
                    (FilterOperand::Var(v), None) => panic!("filter variable ?{v} unbound"),
                };
                match compare_terms(f.op, &row[*l], right) {
                    Some(true) => {}
                    Some(false) => return false,
                    None => {
                        row_failure.get_or_insert(i);
                    }
                }
            }
            if let Some(i) = row_failure {
                failure = Some(failure.map_or(i, |f| f.min(i)));
            }
            true
        });
        match failure {
            Some(i) => Err(FilterFailure(i)),
            None => Ok(()),
        }
    }

    /// Rows restricted to `vars` (each must be present).
    pub fn project(&self, vars: &[String]) -> Vec<Vec<Term>> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.position(v).expect("projected variable bound"))
            .collect();
        self.rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pmdt_core::query::CmpOp;
    use pmdt_core::Literal;

    fn int(n: i64) -> Term {
        Term::Literal(Literal::integer(n))
    }

    fn rel(vars: &[&str], rows: &[&[i64]]) -> Relation {
        Relation {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&n| int(n)).collect())
                .collect(),
        }
    }

    #[test]
    fn join_shared_and_cross() {
        let a = rel(&["x", "y"], &[&[1, 2], &[3, 4]]);
        let b = rel(&["y", "z"], &[&[2, 5], &[2, 6], &[9, 9]]);
        let j = a.join(&b);
        assert_eq!(j.vars, vec!["x", "y", "z"]);
        assert_eq!(j, rel(&["x", "y", "z"], &[&[1, 2, 5], &[1, 2, 6]]));
        assert_eq!(a.join(&rel(&["w"], &[&[0], &[1]])).len(), 4);
        assert_eq!(Relation::unit().join(&a), a);
    }

    #[test]
    fn filters_defer_errors() {
        let mut r = Relation {
            vars: vec!["x".into()],
            rows: [vec![int(1)], vec![Term::Literal(Literal::string("s"))]].into(),
        };
        let cmp = |op, t: Term| FilterExpr {
            left: "x".into(),
            op,
            right: FilterOperand::Term(t),
        };
        let mut dropped = r.clone();
        let both = [
            cmp(CmpOp::Lt, int(1)),
            cmp(CmpOp::Gt, Term::Literal(Literal::string("z"))),
        ];
        assert_eq!(dropped.filter(&both), Ok(()));
        assert!(dropped.rows.is_empty());
        assert_eq!(r.filter(&[cmp(CmpOp::Gt, int(0))]), Err(FilterFailure(0)));
    }
}
