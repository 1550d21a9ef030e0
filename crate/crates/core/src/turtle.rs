//! Reader and canonical writer for the Turtle subset.
//!
//! Supported: `@prefix` (and `PREFIX`) directives, the `a` keyword, absolute
//! and prefixed IRIs, quoted literals with an optional `^^` datatype, bare
//! integers, decimals and booleans, and `;` / `,` continuations.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lexer::{LexError, Position, Token, Tokens};
use crate::schema::{SchemaError, SchemaGraph};
use crate::store::{Assertion, Dataset};
use crate::term::{Datatype, Iri, Literal, PrefixTable, Term};
use crate::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TurtleError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("unknown prefix `{prefix}:` at {position}")]
    UnknownPrefix { position: Position, prefix: String },
    #[error("invalid literal at {position}: {message}")]
    InvalidLiteral { position: Position, message: String },
}

impl TurtleError {
    pub fn position(&self) -> Position {
        match self {
            TurtleError::Syntax { position, .. }
            | TurtleError::UnknownPrefix { position, .. }
            | TurtleError::InvalidLiteral { position, .. } => *position,
        }
    }
}

impl From<LexError> for TurtleError {
    fn from(e: LexError) -> Self {
        TurtleError::Syntax {
            position: e.position,
            message: e.message,
        }
    }
}

/// A parsed document split into schema statements and instance data.
#[derive(Clone, Debug, PartialEq)]
pub struct TurtleDocument {
    pub prefixes: PrefixTable,
    pub schema: Vec<Assertion>,
    pub data: Dataset,
}

impl TurtleDocument {
    /// Builds a schema from the document's schema statements alone.
    pub fn schema_graph(&self) -> Result<SchemaGraph, SchemaError> {
        SchemaGraph::from_statements(self.prefixes.clone(), &self.schema)
    }
}

/// Parses with the default prefix table in scope.
pub fn parse_turtle(text: &str) -> Result<TurtleDocument, TurtleError> {
    parse_turtle_with(text, &PrefixTable::default())
}

/// Parses with `base` in scope; `@prefix` lines extend or override it.
pub fn parse_turtle_with(text: &str, base: &PrefixTable) -> Result<TurtleDocument, TurtleError> {
    let mut parser = Parser {
        toks: Tokens::new(text)?,
        prefixes: base.clone(),
    };
    let all = parser.document()?;
    Ok(split(parser.prefixes, all))
}

fn split(prefixes: PrefixTable, all: Vec<Assertion>) -> TurtleDocument {
    let schema_subjects: BTreeSet<Iri> = all
        .iter()
        .filter(|a| is_schema_statement(a))
        .map(|a| a.subject.clone())
        .collect();
    let (schema, data): (Vec<_>, Vec<_>) = all
        .into_iter()
        .partition(|a| schema_subjects.contains(&a.subject));
    let mut schema = schema;
    schema.sort();
    schema.dedup();
    TurtleDocument {
        prefixes,
        schema,
        data: data.into_iter().collect(),
    }
}

fn is_schema_statement(a: &Assertion) -> bool {
    if vocab::SCHEMA_PREDICATES.contains(&a.predicate.as_str()) {
        return true;
    }
    a.is_type()
        && a.object
            .as_iri()
            .is_some_and(|o| vocab::SCHEMA_TYPES.contains(&o.as_str()))
}

struct Parser {
    toks: Tokens,
    prefixes: PrefixTable,
}

impl Parser {
    fn syntax(&self, position: Position, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax {
            position,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), TurtleError> {
        let pos = self.toks.position();
        match self.toks.next() {
            Some((t, _)) if t == tok => Ok(()),
            Some((t, p)) => Err(self.syntax(p, format!("expected {what}, found `{t}`"))),
            None => Err(self.syntax(pos, format!("expected {what}, found end of input"))),
        }
    }

    fn document(&mut self) -> Result<Vec<Assertion>, TurtleError> {
        let mut out = Vec::new();
        while !self.toks.at_end() {
            if self.toks.eat(&Token::AtPrefix) {
                self.prefix_decl()?;
                self.expect(Token::Dot, "`.` after @prefix")?;
            } else if matches!(self.toks.peek(), Some(Token::Word(w)) if w.eq_ignore_ascii_case("prefix"))
            {
                self.toks.next();
                self.prefix_decl()?;
            } else {
                self.triples(&mut out)?;
            }
        }
        Ok(out)
    }

    fn prefix_decl(&mut self) -> Result<(), TurtleError> {
        let pos = self.toks.position();
        let prefix = match self.toks.next() {
            Some((Token::PrefixedName(p, l), _)) if l.is_empty() => p,
            _ => return Err(self.syntax(pos, "expected `name:` in prefix declaration")),
        };
        let pos = self.toks.position();
        let ns = match self.toks.next() {
            Some((Token::IriRef(i), _)) => i,
            _ => return Err(self.syntax(pos, "expected <namespace> in prefix declaration")),
        };
        self.prefixes.insert(prefix, ns);
        Ok(())
    }

    fn triples(&mut self, out: &mut Vec<Assertion>) -> Result<(), TurtleError> {
        let subject = self.iri("subject")?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.object()?;
                out.push(Assertion::new(subject.clone(), predicate.clone(), object));
                if !self.toks.eat(&Token::Comma) {
                    break;
                }
            }
            if self.toks.eat(&Token::Semicolon) {
                while self.toks.eat(&Token::Semicolon) {}
                if self.toks.peek() == Some(&Token::Dot) {
                    break;
                }
                continue;
            }
            break;
        }
        self.expect(Token::Dot, "`.`")
    }

    fn verb(&mut self) -> Result<Iri, TurtleError> {
        if matches!(self.toks.peek(), Some(Token::Word(w)) if w == "a") {
            self.toks.next();
            return Ok(vocab::rdf_type());
        }
        self.iri("predicate")
    }

    fn iri(&mut self, role: &str) -> Result<Iri, TurtleError> {
        let pos = self.toks.position();
        match self.toks.next() {
            Some((tok, p)) => resolve_iri_token(&tok, &self.prefixes, p)?
                .ok_or_else(|| self.syntax(p, format!("expected {role} IRI, found `{tok}`"))),
            None => Err(self.syntax(pos, format!("expected {role} IRI, found end of input"))),
        }
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let pos = self.toks.position();
        let Some((tok, p)) = self.toks.next() else {
            return Err(self.syntax(pos, "expected object, found end of input"));
        };
        if let Some(iri) = resolve_iri_token(&tok, &self.prefixes, p)? {
            return Ok(Term::Iri(iri));
        }
        if let Token::String(s) = &tok {
            if self.toks.eat(&Token::DoubleCaret) {
                let dt_pos = self.toks.position();
                let dt = self.iri("datatype")?;
                return typed_literal(s, &dt, dt_pos).map(Term::Literal);
            }
            return Ok(Term::Literal(Literal::string(s)));
        }
        bare_literal(&tok, p)?
            .map(Term::Literal)
            .ok_or_else(|| self.syntax(p, format!("expected object, found `{tok}`")))
    }
}

/// IRI for an `<...>` or `prefix:local` token; `None` for any other token.
pub(crate) fn resolve_iri_token(
    tok: &Token,
    prefixes: &PrefixTable,
    position: Position,
) -> Result<Option<Iri>, TurtleError> {
    match tok {
        Token::IriRef(i) => Ok(Some(Iri::new(i))),
        Token::PrefixedName(p, l) => {
            prefixes
                .resolve(p, l)
                .map(Some)
                .map_err(|e| TurtleError::UnknownPrefix {
                    position,
                    prefix: e.0,
                })
        }
        _ => Ok(None),
    }
}

pub(crate) fn typed_literal(
    lexical: &str,
    datatype: &Iri,
    position: Position,
) -> Result<Literal, TurtleError> {
    let dt = Datatype::from_iri(datatype).ok_or_else(|| TurtleError::InvalidLiteral {
        position,
        message: format!("unsupported datatype {datatype}"),
    })?;
    Literal::new(lexical, dt).map_err(|e| TurtleError::InvalidLiteral {
        position,
        message: e.to_string(),
    })
}

/// Literal for a bare number or boolean token; `None` for any other token.
pub(crate) fn bare_literal(
    tok: &Token,
    position: Position,
) -> Result<Option<Literal>, TurtleError> {
    let (lex, dt) = match tok {
        Token::Integer(s) => (s.as_str(), Datatype::Integer),
        Token::Decimal(s) => (s.as_str(), Datatype::Decimal),
        Token::Word(w) if w == "true" || w == "false" => (w.as_str(), Datatype::Boolean),
        _ => return Ok(None),
    };
    Literal::new(lex, dt)
        .map(Some)
        .map_err(|e| TurtleError::InvalidLiteral {
            position,
            message: e.to_string(),
        })
}

/// Parses a single term in Turtle syntax (IRI, prefixed name or literal).
pub fn parse_term(text: &str, prefixes: &PrefixTable) -> Result<Term, TurtleError> {
    let mut parser = Parser {
        toks: Tokens::new(text)?,
        prefixes: prefixes.clone(),
    };
    let term = parser.object()?;
    if !parser.toks.at_end() {
        let pos = parser.toks.position();
        return Err(parser.syntax(pos, "trailing input after term"));
    }
    Ok(term)
}

fn render_prefixes(prefixes: &PrefixTable, out: &mut String) {
    for (p, ns) in prefixes.iter() {
        out.push_str(&format!("@prefix {p}: <{ns}> .\n"));
    }
}

fn render_statements<'a>(
    statements: impl IntoIterator<Item = &'a Assertion>,
    prefixes: &PrefixTable,
    out: &mut String,
) {
    for a in statements {
        out.push_str(&a.render(prefixes));
        out.push_str(" .\n");
    }
}

/// Canonical text: sorted prefixes, then one statement per line in
/// (subject, predicate, object) order.
pub fn serialize_turtle(schema: &SchemaGraph, instances: Option<&Dataset>) -> String {
    let mut statements: BTreeSet<Assertion> = schema.to_statements().into_iter().collect();
    if let Some(ds) = instances {
        statements.extend(ds.iter().cloned());
    }
    let mut out = String::new();
    render_prefixes(schema.prefixes(), &mut out);
    render_statements(&statements, schema.prefixes(), &mut out);
    out
}

/// Canonical text for instance data alone.
pub fn serialize_dataset(ds: &Dataset, prefixes: &PrefixTable) -> String {
    let mut out = String::new();
    render_prefixes(prefixes, &mut out);
    render_statements(ds.iter(), prefixes, &mut out);
    out
}
