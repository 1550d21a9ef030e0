use std::collections::BTreeSet;
use std::fmt;

use crate::term::{Iri, PrefixTable, Term};
use crate::vocab;

/// A position in a triple pattern.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
    /// Any of a set of classes; produced by subsumption rewriting in the
    /// object position of a type pattern.
    OneOf(BTreeSet<Iri>),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(name.to_string())
    }

    pub fn iri(iri: Iri) -> Self {
        PatternTerm::Term(Term::Iri(iri))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn render(&self, prefixes: &PrefixTable) -> String {
        match self {
            PatternTerm::Var(v) => format!("?{v}"),
            PatternTerm::Term(t) => t.to_turtle(prefixes),
            PatternTerm::OneOf(set) => {
                let names: Vec<_> = set.iter().map(|c| prefixes.render(c)).collect();
                format!("[{}]", names.join("|"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Variables in subject, predicate, object order, without duplicates.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for v in self.positions().into_iter().filter_map(PatternTerm::as_var) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn is_type_pattern(&self) -> bool {
        matches!(&self.predicate, PatternTerm::Term(Term::Iri(p)) if p.as_str() == vocab::RDF_TYPE)
    }

    /// Concrete class of a `?x a C` pattern.
    pub fn type_class(&self) -> Option<&Iri> {
        if !self.is_type_pattern() {
            return None;
        }
        match &self.object {
            PatternTerm::Term(Term::Iri(c)) => Some(c),
            _ => None,
        }
    }

    /// Classes a type pattern may match, whether concrete or rewritten.
    pub fn type_classes(&self) -> Option<BTreeSet<Iri>> {
        if !self.is_type_pattern() {
            return None;
        }
        match &self.object {
            PatternTerm::Term(Term::Iri(c)) => Some([c.clone()].into()),
            PatternTerm::OneOf(set) => Some(set.clone()),
            _ => None,
        }
    }

    /// Concrete predicate IRI, if any.
    pub fn predicate_iri(&self) -> Option<&Iri> {
        match &self.predicate {
            PatternTerm::Term(Term::Iri(p)) => Some(p),
            _ => None,
        }
    }

    pub fn render(&self, prefixes: &PrefixTable) -> String {
        let p = if self.is_type_pattern() {
            "a".to_string()
        } else {
            self.predicate.render(prefixes)
        };
        format!(
            "{} {} {}",
            self.subject.render(prefixes),
            p,
            self.object.render(prefixes)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "=" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FilterOperand {
    Var(String),
    Term(Term),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FilterExpr {
    pub left: String,
    pub op: CmpOp,
    pub right: FilterOperand,
}

impl FilterExpr {
    pub fn variables(&self) -> Vec<&str> {
        let mut out = vec![self.left.as_str()];
        if let FilterOperand::Var(v) = &self.right {
            if v != &self.left {
                out.push(v);
            }
        }
        out
    }

    pub fn render(&self, prefixes: &PrefixTable) -> String {
        let right = match &self.right {
            FilterOperand::Var(v) => format!("?{v}"),
            FilterOperand::Term(t) => t.to_turtle(prefixes),
        };
        format!("FILTER(?{} {} {})", self.left, self.op, right)
    }
}

/// A parsed SELECT query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryAst {
    pub select: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub distinct: bool,
    pub order_by: Vec<String>,
    pub limit: Option<usize>,
    /// Prefixes in scope when the query was parsed; used for rendering.
    pub prefixes: PrefixTable,
}

impl QueryAst {
    /// Variables bound by the patterns, in first-appearance order.
    pub fn pattern_variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.patterns {
            for v in p.variables() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Query text that parses back to an equal AST (modulo rewritten patterns,
    /// which render as class sets and are not re-parseable).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (p, ns) in self.prefixes.iter() {
            out.push_str(&format!("PREFIX {p}: <{ns}>\n"));
        }
        let vars: Vec<_> = self.select.iter().map(|v| format!("?{v}")).collect();
        out.push_str(&format!(
            "SELECT {}{} WHERE {{\n",
            if self.distinct { "DISTINCT " } else { "" },
            vars.join(" ")
        ));
        for p in &self.patterns {
            out.push_str(&format!("  {} .\n", p.render(&self.prefixes)));
        }
        for f in &self.filters {
            out.push_str(&format!("  {}\n", f.render(&self.prefixes)));
        }
        out.push('}');
        if !self.order_by.is_empty() {
            let vars: Vec<_> = self.order_by.iter().map(|v| format!("?{v}")).collect();
            out.push_str(&format!(" ORDER BY {}", vars.join(" ")));
        }
        if let Some(n) = self.limit {
            out.push_str(&format!(" LIMIT {n}"));
        }
        out.push('\n');
        out
    }
}
