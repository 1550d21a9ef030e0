//! Relational plans executed by a site over its own tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use pmdt_core::lexer::{Lexer, Token};
use pmdt_core::query::{
    finalize, BindingSet, CmpOp, FilterExpr, FilterOperand, PatternTerm, QueryAst, TriplePattern,
};
use pmdt_core::{Datatype, Iri, Literal, PrefixTable, Term};
use thiserror::Error;

use crate::relation::{FilterFailure, Relation};
use crate::site::{Site, Table};
use crate::FederationError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ColumnRef {
    /// The row's subject IRI, built from the table's IRI template.
    Subject,
    Column(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Selection {
    /// Raw cell equality (from inverting an IRI template).
    Cell { column: String, value: String },
    /// Equality on the lifted term.
    Term { column: ColumnRef, term: Term },
}

/// One table scan: selections, then projection of columns onto variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scan {
    pub table: String,
    pub outputs: Vec<(ColumnRef, String)>,
    pub selections: Vec<Selection>,
}

/// Union of scans binding the same variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unit {
    pub vars: Vec<String>,
    pub scans: Vec<Scan>,
}

/// Units natural-joined on shared variables, then filtered and projected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalPlan {
    pub site: String,
    pub projection: Vec<String>,
    pub units: Vec<Unit>,
    pub filters: Vec<FilterExpr>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SqlParseError {
    #[error("lexical error at {0}")]
    Lex(String),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("invalid literal: {0}")]
    Literal(String),
}

/// Result of running a plan: bindings plus the data categories from which
/// consent withheld at least one otherwise matching row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalResult {
    pub bindings: BindingSet,
    pub consent_exclusions: BTreeMap<Iri, usize>,
}

fn sources<'a>(
    site: &'a Site,
    p: &TriplePattern,
) -> Result<Vec<(&'a Table, Option<usize>)>, FederationError> {
    let unsupported = || FederationError::UnsupportedPattern(p.render(&PrefixTable::default()));
    if p.is_type_pattern() {
        let classes = p.type_classes().ok_or_else(unsupported)?;
        return Ok(site
            .tables
            .iter()
            .filter(|t| classes.contains(&t.row_class))
            .map(|t| (t, None))
            .collect());
    }
    let pred = p.predicate_iri().ok_or_else(unsupported)?;
    Ok(site
        .tables
        .iter()
        .flat_map(|t| {
            t.columns
                .iter()
                .enumerate()
                .filter(|(_, c)| &c.property == pred)
                .map(move |(i, _)| (t, Some(i)))
        })
        .collect())
}

type ScanParts = (Vec<(ColumnRef, String)>, Vec<Selection>);

/// Outputs and selections answering `p` from `table` (and `column`), or
/// `None` when the pattern's constants cannot match this table.
fn scan_parts(table: &Table, column: Option<usize>, p: &TriplePattern) -> Option<ScanParts> {
    let mut outputs = Vec::new();
    let mut selections = Vec::new();
    match &p.subject {
        PatternTerm::Var(v) => outputs.push((ColumnRef::Subject, v.clone())),
        PatternTerm::Term(Term::Iri(i)) => {
            for (column, value) in table.template.invert(i)? {
                selections.push(Selection::Cell { column, value });
            }
        }
        _ => return None,
    }
    if let Some(ci) = column {
        let col = ColumnRef::Column(table.columns[ci].name.clone());
        match &p.object {
            PatternTerm::Var(w) => outputs.push((col, w.clone())),
            PatternTerm::Term(t) => selections.push(Selection::Term {
                column: col,
                term: t.clone(),
            }),
            PatternTerm::OneOf(_) => return None,
        }
    }
    Some((outputs, selections))
}

fn pattern_vars<'a>(ps: impl IntoIterator<Item = &'a TriplePattern>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for p in ps {
        for v in p.variables() {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
    }
    out
}

/// Builds the relational plan for a sub-query whose class patterns have
/// already been expanded. Patterns about the same subject that can only be
/// answered from one keyed table share a single scan of it.
pub fn translate_to_local_plan(site: &Site, ast: &QueryAst) -> Result<LocalPlan, FederationError> {
    let srcs: Vec<Vec<(&Table, Option<usize>)>> = ast
        .patterns
        .iter()
        .map(|p| sources(site, p))
        .collect::<Result<_, _>>()?;
    // (first pattern index, member pattern indexes, merged table)
    let mut groups: Vec<(Vec<usize>, Option<&Table>)> = Vec::new();
    let mut merged: BTreeMap<(&PatternTerm, &str), usize> = BTreeMap::new();
    for (i, p) in ast.patterns.iter().enumerate() {
        match srcs[i].as_slice() {
            [(t, _)] if t.keyed => match merged.get(&(&p.subject, t.name.as_str())) {
                Some(&g) => groups[g].0.push(i),
                None => {
                    merged.insert((&p.subject, t.name.as_str()), groups.len());
                    groups.push((vec![i], Some(t)));
                }
            },
            _ => groups.push((vec![i], None)),
        }
    }
    let mut units = Vec::new();
    for (members, table) in groups {
        let vars = pattern_vars(members.iter().map(|&i| &ast.patterns[i]));
        let scans = match table {
            Some(t) => {
                let mut outputs = Vec::new();
                let mut selections = Vec::new();
                let mut possible = true;
                for &i in &members {
                    match scan_parts(t, srcs[i][0].1, &ast.patterns[i]) {
                        Some((o, s)) => {
                            outputs.extend(o);
                            selections.extend(s);
                        }
                        None => possible = false,
                    }
                }
                dedup(&mut outputs);
                dedup(&mut selections);
                if possible {
                    vec![Scan {
                        table: t.name.clone(),
                        outputs,
                        selections,
                    }]
                } else {
                    Vec::new()
                }
            }
            None => {
                let i = members[0];
                srcs[i]
                    .iter()
                    .filter_map(|(t, c)| {
                        scan_parts(t, *c, &ast.patterns[i]).map(|(outputs, selections)| Scan {
                            table: t.name.clone(),
                            outputs,
                            selections,
                        })
                    })
                    .collect()
            }
        };
        units.push(Unit { vars, scans });
    }
    Ok(LocalPlan {
        site: site.id.clone(),
        projection: ast.select.clone(),
        units,
        filters: ast.filters.clone(),
    })
}

fn dedup<T: PartialEq>(v: &mut Vec<T>) {
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for x in v.drain(..) {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    *v = out;
}

fn lookup(table: &Table, row: &[String], r: &ColumnRef) -> Option<Term> {
    match r {
        ColumnRef::Subject => table.subject(row).map(Term::Iri),
        ColumnRef::Column(c) => table.value(row, table.column(c)?),
    }
}

/// Runs `plan` over the site's tables with consent filtering applied.
/// `Err` carries the lowest failing filter index.
pub(crate) fn execute_local_plan(
    site: &Site,
    plan: &LocalPlan,
) -> Result<LocalResult, FilterFailure> {
    let mut exclusions: BTreeMap<Iri, usize> = BTreeMap::new();
    let mut acc = Relation::unit();
    for unit in &plan.units {
        let mut rel = Relation::new(unit.vars.clone());
        for scan in &unit.scans {
            let Some(table) = site.table(&scan.table) else {
                continue;
            };
            'rows: for row in &table.rows {
                for s in &scan.selections {
                    let ok = match s {
                        Selection::Cell { column, value } => {
                            table.cell(row, column) == Some(value.as_str())
                        }
                        Selection::Term { column, term } => {
                            lookup(table, row, column).as_ref() == Some(term)
                        }
                    };
                    if !ok {
                        continue 'rows;
                    }
                }
                let mut values: Vec<Option<Term>> = vec![None; unit.vars.len()];
                for (r, var) in &scan.outputs {
                    let Some(v) = lookup(table, row, r) else {
                        continue 'rows;
                    };
                    let slot = &mut values[unit
                        .vars
                        .iter()
                        .position(|u| u == var)
                        .expect("unit variable")];
                    match slot {
                        Some(existing) if *existing != v => continue 'rows,
                        _ => *slot = Some(v),
                    }
                }
                let subject = table.subject(row);
                let withheld = subject
                    .iter()
                    .chain(values.iter().flatten().filter_map(Term::as_iri))
                    .find_map(|i| site.excluded.get(i));
                if let Some(class) = withheld {
                    *exclusions.entry(class.clone()).or_default() += 1;
                    continue;
                }
                rel.rows.insert(
                    values
                        .into_iter()
                        .map(|v| v.expect("all unit variables bound"))
                        .collect(),
                );
            }
        }
        acc = acc.join(&rel);
    }
    acc.filter(&plan.filters)?;
    let bindings = finalize(&plan.projection, acc.project(&plan.projection), &[], None);
    Ok(LocalResult {
        bindings,
        consent_exclusions: exclusions,
    })
}

fn render_term(t: &Term) -> String {
    t.to_ntriples()
}

fn render_ref(table: &str, r: &ColumnRef) -> String {
    match r {
        ColumnRef::Subject => format!("TEMPLATE({table})"),
        ColumnRef::Column(c) => c.clone(),
    }
}

fn render_vars(vars: &[String]) -> String {
    vars.iter()
        .map(|v| format!("?{v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl LocalPlan {
    /// SQL-style rendering for display; [`LocalPlan::parse_sql`] reads it back.
    pub fn to_sql(&self) -> String {
        let mut out = format!(
            "SITE {:?}\nSELECT DISTINCT {}\n",
            self.site,
            render_vars(&self.projection)
        );
        for (i, unit) in self.units.iter().enumerate() {
            out.push_str(if i == 0 { "FROM " } else { "  NATURAL JOIN " });
            if unit.scans.is_empty() {
                let _ = writeln!(out, "(NOTHING {}) AS u{i}", render_vars(&unit.vars));
                continue;
            }
            let scans: Vec<String> = unit
                .scans
                .iter()
                .map(|s| {
                    let outputs = if s.outputs.is_empty() {
                        "1".to_string()
                    } else {
                        s.outputs
                            .iter()
                            .map(|(r, v)| format!("{} AS ?{v}", render_ref(&s.table, r)))
                            .collect::<Vec<_>>()
                            .join(", ")
                    };
                    let mut text = format!("SELECT {outputs} FROM {}", s.table);
                    if !s.selections.is_empty() {
                        let conds: Vec<String> = s
                            .selections
                            .iter()
                            .map(|sel| match sel {
                                Selection::Cell { column, value } => {
                                    format!(
                                        "{column} = \"{}\"",
                                        value.replace('\\', "\\\\").replace('"', "\\\"")
                                    )
                                }
                                Selection::Term { column, term } => {
                                    format!(
                                        "{} IS {}",
                                        render_ref(&s.table, column),
                                        render_term(term)
                                    )
                                }
                            })
                            .collect();
                        text.push_str(&format!(" WHERE {}", conds.join(" AND ")));
                    }
                    text
                })
                .collect();
            let _ = writeln!(out, "({}) AS u{i}", scans.join(" UNION "));
        }
        if !self.filters.is_empty() {
            let conds: Vec<String> = self
                .filters
                .iter()
                .map(|f| {
                    let right = match &f.right {
                        FilterOperand::Var(v) => format!("?{v}"),
                        FilterOperand::Term(t) => render_term(t),
                    };
                    format!("?{} {} {right}", f.left, f.op)
                })
                .collect();
            let _ = writeln!(out, "WHERE {}", conds.join(" AND "));
        }
        out
    }

    pub fn parse_sql(text: &str) -> Result<LocalPlan, SqlParseError> {
        let toks = Lexer::new(text)
            .tokenize()
            .map_err(|e| SqlParseError::Lex(format!("{}: {}", e.position, e.message)))?;
        let mut p = SqlParser {
            toks: toks.into_iter().map(|(t, _)| t).collect(),
            idx: 0,
        };
        p.plan()
    }
}

struct SqlParser {
    toks: Vec<Token>,
    idx: usize,
}

impl SqlParser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.idx)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, SqlParseError> {
        Err(SqlParseError::Unexpected {
            expected: expected.to_string(),
            found: self
                .peek()
                .map_or("end of input".to_string(), |t| t.to_string()),
        })
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Token::Word(x)) if x == w)
    }

    fn word(&mut self, w: &str) -> Result<(), SqlParseError> {
        if self.is_word(w) {
            self.idx += 1;
            Ok(())
        } else {
            self.unexpected(w)
        }
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Token) -> Result<(), SqlParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.to_string())
        }
    }

    fn ident(&mut self) -> Result<String, SqlParseError> {
        match self.peek() {
            Some(Token::Word(w)) => {
                let w = w.clone();
                self.idx += 1;
                Ok(w)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn var(&mut self) -> Result<String, SqlParseError> {
        match self.peek() {
            Some(Token::Variable(v)) => {
                let v = v.clone();
                self.idx += 1;
                Ok(v)
            }
            _ => self.unexpected("variable"),
        }
    }

    fn var_list(&mut self) -> Result<Vec<String>, SqlParseError> {
        let mut out = Vec::new();
        if !matches!(self.peek(), Some(Token::Variable(_))) {
            return Ok(out);
        }
        out.push(self.var()?);
        while self.eat(&Token::Comma) {
            out.push(self.var()?);
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<Term, SqlParseError> {
        match self.next() {
            Some(Token::IriRef(i)) => Ok(Term::Iri(Iri::new(i))),
            Some(Token::String(s)) => {
                let dt = if self.eat(&Token::DoubleCaret) {
                    match self.next() {
                        Some(Token::IriRef(d)) => {
                            Datatype::from_iri(&Iri::new(&d)).ok_or_else(|| {
                                SqlParseError::Literal(format!("unknown datatype <{d}>"))
                            })?
                        }
                        _ => {
                            self.idx -= 1;
                            return self.unexpected("datatype IRI");
                        }
                    }
                } else {
                    Datatype::String
                };
                Literal::new(&s, dt)
                    .map(Term::Literal)
                    .map_err(|e| SqlParseError::Literal(e.to_string()))
            }
            _ => {
                self.idx -= 1;
                self.unexpected("term")
            }
        }
    }

    fn column_ref(&mut self, table_hint: &mut Option<String>) -> Result<ColumnRef, SqlParseError> {
        if self.is_word("TEMPLATE") && self.toks.get(self.idx + 1) == Some(&Token::LParen) {
            self.idx += 2;
            let t = self.ident()?;
            self.expect(Token::RParen)?;
            table_hint.get_or_insert(t);
            return Ok(ColumnRef::Subject);
        }
        Ok(ColumnRef::Column(self.ident()?))
    }

    fn scan(&mut self) -> Result<Scan, SqlParseError> {
        self.word("SELECT")?;
        let mut hint = None;
        let mut outputs = Vec::new();
        if !self.eat(&Token::Integer("1".into())) {
            loop {
                let r = self.column_ref(&mut hint)?;
                self.word("AS")?;
                outputs.push((r, self.var()?));
                if !self.eat(&Token::Comma) {
                    break;
                }
            }
        }
        self.word("FROM")?;
        let table = self.ident()?;
        let mut selections = Vec::new();
        if self.is_word("WHERE") {
            self.idx += 1;
            loop {
                let r = self.column_ref(&mut hint)?;
                if self.eat(&Token::Op("=")) {
                    let ColumnRef::Column(column) = r else {
                        return self.unexpected("IS");
                    };
                    match self.next() {
                        Some(Token::String(value)) => {
                            selections.push(Selection::Cell { column, value })
                        }
                        _ => {
                            self.idx -= 1;
                            return self.unexpected("string");
                        }
                    }
                } else {
                    self.word("IS")?;
                    selections.push(Selection::Term {
                        column: r,
                        term: self.term()?,
                    });
                }
                if !self.is_word("AND") {
                    break;
                }
                self.idx += 1;
            }
        }
        Ok(Scan {
            table,
            outputs,
            selections,
        })
    }

    fn unit(&mut self) -> Result<Unit, SqlParseError> {
        self.expect(Token::LParen)?;
        let unit = if self.is_word("NOTHING") {
            self.idx += 1;
            Unit {
                vars: self.var_list()?,
                scans: Vec::new(),
            }
        } else {
            let mut scans = vec![self.scan()?];
            while self.is_word("UNION") {
                self.idx += 1;
                scans.push(self.scan()?);
            }
            let mut vars: Vec<String> = Vec::new();
            for (_, v) in scans.iter().flat_map(|s| &s.outputs) {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            }
            Unit { vars, scans }
        };
        self.expect(Token::RParen)?;
        self.word("AS")?;
        self.ident()?;
        Ok(unit)
    }

    fn plan(&mut self) -> Result<LocalPlan, SqlParseError> {
        self.word("SITE")?;
        let site = match self.next() {
            Some(Token::String(s)) => s,
            _ => {
                self.idx -= 1;
                return self.unexpected("site name");
            }
        };
        self.word("SELECT")?;
        self.word("DISTINCT")?;
        let projection = self.var_list()?;
        self.word("FROM")?;
        let mut units = vec![self.unit()?];
        while self.is_word("NATURAL") {
            self.idx += 1;
            self.word("JOIN")?;
            units.push(self.unit()?);
        }
        let mut filters = Vec::new();
        if self.is_word("WHERE") {
            self.idx += 1;
            loop {
                let left = self.var()?;
                let op = match self.next() {
                    Some(Token::Op(o)) => {
                        CmpOp::from_symbol(o).expect("lexer operators are comparison symbols")
                    }
                    _ => {
                        self.idx -= 1;
                        return self.unexpected("comparison operator");
                    }
                };
                let right = if matches!(self.peek(), Some(Token::Variable(_))) {
                    FilterOperand::Var(self.var()?)
                } else {
                    FilterOperand::Term(self.term()?)
                };
                filters.push(FilterExpr { left, op, right });
                if !self.is_word("AND") {
                    break;
                }
                self.idx += 1;
            }
        }
        if self.peek().is_some() {
            return self.unexpected("end of input");
        }
        Ok(LocalPlan {
            site,
            projection,
            units,
            filters,
        })
    }
}

/// The schema terms a plan reads: row classes of scanned tables, mapped
/// properties of used columns, and the classes named in type patterns.
pub(crate) fn touched_terms(site: &Site, plan: &LocalPlan, ast: &QueryAst) -> BTreeSet<Iri> {
    let mut out = BTreeSet::new();
    for scan in plan.units.iter().flat_map(|u| &u.scans) {
        let Some(t) = site.table(&scan.table) else {
            continue;
        };
        out.insert(t.row_class.clone());
        let columns = scan
            .outputs
            .iter()
            .map(|(r, _)| r)
            .chain(scan.selections.iter().filter_map(|s| match s {
                Selection::Term { column, .. } => Some(column),
                Selection::Cell { .. } => None,
            }));
        for r in columns {
            if let ColumnRef::Column(c) = r {
                if let Some(col) = t.column(c) {
                    out.insert(col.property.clone());
                }
            }
        }
    }
    for p in &ast.patterns {
        if let Some(c) = p.type_class() {
            out.insert(c.clone());
        }
        if let Some(pred) = p.predicate_iri().filter(|_| !p.is_type_pattern()) {
            out.insert(pred.clone());
        }
    }
    out
}
