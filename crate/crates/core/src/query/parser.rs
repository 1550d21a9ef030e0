use thiserror::Error;

use super::ast::{CmpOp, FilterExpr, FilterOperand, PatternTerm, QueryAst, TriplePattern};
use crate::lexer::{Position, Token, Tokens};
use crate::term::{Literal, PrefixTable, Term};
use crate::turtle::{bare_literal, resolve_iri_token, typed_literal, TurtleError};
use crate::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("unknown prefix `{prefix}:` at {position}")]
    UnknownPrefix { position: Position, prefix: String },
    #[error("invalid literal at {position}: {message}")]
    InvalidLiteral { position: Position, message: String },
    #[error("variable ?{0} is not bound by any pattern")]
    UnboundVariable(String),
    #[error("ORDER BY variable ?{0} is not selected")]
    OrderByNotSelected(String),
    #[error("pattern `{0}` has no concrete term and shares no variable with another pattern")]
    DisconnectedPattern(String),
}

impl From<TurtleError> for QueryParseError {
    fn from(e: TurtleError) -> Self {
        match e {
            TurtleError::Syntax { position, message } => {
                QueryParseError::Syntax { position, message }
            }
            TurtleError::UnknownPrefix { position, prefix } => {
                QueryParseError::UnknownPrefix { position, prefix }
            }
            TurtleError::InvalidLiteral { position, message } => {
                QueryParseError::InvalidLiteral { position, message }
            }
        }
    }
}

/// Parses with the default prefix table in scope.
pub fn parse_query(text: &str) -> Result<QueryAst, QueryParseError> {
    parse_query_with(text, &PrefixTable::default())
}

/// Parses `SELECT [DISTINCT] ?v... WHERE { pattern (. pattern)* FILTER(...)* }
/// [ORDER BY ?v...] [LIMIT n]`, with optional leading `PREFIX` declarations.
pub fn parse_query_with(text: &str, base: &PrefixTable) -> Result<QueryAst, QueryParseError> {
    let toks = Tokens::new(text).map_err(TurtleError::from)?;
    let mut p = Parser {
        toks,
        prefixes: base.clone(),
    };
    let ast = p.query()?;
    check(&ast)?;
    Ok(ast)
}

fn check(ast: &QueryAst) -> Result<(), QueryParseError> {
    let bound = ast.pattern_variables();
    for v in ast
        .select
        .iter()
        .map(String::as_str)
        .chain(ast.filters.iter().flat_map(FilterExpr::variables))
    {
        if !bound.contains(&v) {
            return Err(QueryParseError::UnboundVariable(v.to_string()));
        }
    }
    for v in &ast.order_by {
        if !ast.select.contains(v) {
            return Err(QueryParseError::OrderByNotSelected(v.clone()));
        }
    }
    for (i, p) in ast.patterns.iter().enumerate() {
        let all_vars = p
            .positions()
            .iter()
            .all(|t| matches!(t, PatternTerm::Var(_)));
        if !all_vars {
            continue;
        }
        let shares = ast
            .patterns
            .iter()
            .enumerate()
            .any(|(j, q)| j != i && p.variables().iter().any(|v| q.variables().contains(v)));
        if !shares {
            return Err(QueryParseError::DisconnectedPattern(
                p.render(&ast.prefixes),
            ));
        }
    }
    Ok(())
}

struct Parser {
    toks: Tokens,
    prefixes: PrefixTable,
}

impl Parser {
    fn syntax(&self, position: Position, message: impl Into<String>) -> QueryParseError {
        QueryParseError::Syntax {
            position,
            message: message.into(),
        }
    }

    fn found(&self) -> String {
        self.toks
            .peek()
            .map_or_else(|| "end of input".to_string(), |t| format!("`{t}`"))
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), QueryParseError> {
        if self.toks.eat(&tok) {
            Ok(())
        } else {
            Err(self.syntax(
                self.toks.position(),
                format!("expected {what}, found {}", self.found()),
            ))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), QueryParseError> {
        if self.toks.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.syntax(
                self.toks.position(),
                format!("expected {kw}, found {}", self.found()),
            ))
        }
    }

    fn query(&mut self) -> Result<QueryAst, QueryParseError> {
        while self.toks.eat_keyword("PREFIX") {
            let pos = self.toks.position();
            let prefix = match self.toks.next() {
                Some((Token::PrefixedName(p, l), _)) if l.is_empty() => p,
                _ => return Err(self.syntax(pos, "expected `name:` after PREFIX")),
            };
            let pos = self.toks.position();
            let ns = match self.toks.next() {
                Some((Token::IriRef(i), _)) => i,
                _ => return Err(self.syntax(pos, "expected <namespace> after PREFIX name")),
            };
            self.prefixes.insert(prefix, ns);
        }
        self.keyword("SELECT")?;
        // Results are sets whether or not DISTINCT is written.
        self.toks.eat_keyword("DISTINCT");
        let mut select = Vec::new();
        while let Some(Token::Variable(v)) = self.toks.peek() {
            let v = v.clone();
            self.toks.next();
            if !select.contains(&v) {
                select.push(v);
            }
        }
        if select.is_empty() {
            return Err(self.syntax(
                self.toks.position(),
                format!("expected a variable, found {}", self.found()),
            ));
        }
        self.toks.eat_keyword("WHERE");
        let open = self.toks.position();
        self.expect(Token::LBrace, "`{`")?;
        let (patterns, filters) = self.group()?;
        if patterns.is_empty() {
            return Err(self.syntax(open, "empty graph pattern"));
        }
        let mut order_by = Vec::new();
        if self.toks.eat_keyword("ORDER") {
            self.keyword("BY")?;
            while let Some(Token::Variable(v)) = self.toks.peek() {
                order_by.push(v.clone());
                self.toks.next();
            }
            if order_by.is_empty() {
                return Err(self.syntax(self.toks.position(), "expected a variable after ORDER BY"));
            }
        }
        let mut limit = None;
        if self.toks.eat_keyword("LIMIT") {
            let pos = self.toks.position();
            match self.toks.next() {
                Some((Token::Integer(n), _)) => match n.parse::<usize>() {
                    Ok(n) if n > 0 => limit = Some(n),
                    _ => return Err(self.syntax(pos, "LIMIT must be a positive integer")),
                },
                _ => return Err(self.syntax(pos, "expected an integer after LIMIT")),
            }
        }
        if !self.toks.at_end() {
            return Err(self.syntax(self.toks.position(), format!("unexpected {}", self.found())));
        }
        Ok(QueryAst {
            select,
            patterns,
            filters,
            distinct: true,
            order_by,
            limit,
            prefixes: self.prefixes.clone(),
        })
    }

    fn group(&mut self) -> Result<(Vec<TriplePattern>, Vec<FilterExpr>), QueryParseError> {
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            if self.toks.eat(&Token::RBrace) {
                return Ok((patterns, filters));
            }
            if self.toks.eat_keyword("FILTER") {
                filters.push(self.filter()?);
                self.toks.eat(&Token::Dot);
                continue;
            }
            if self.toks.at_end() {
                return Err(self.syntax(self.toks.position(), "expected `}`, found end of input"));
            }
            self.triples(&mut patterns)?;
            if !self.toks.eat(&Token::Dot)
                && self.toks.peek() != Some(&Token::RBrace)
                && !matches!(self.toks.peek(), Some(Token::Word(w)) if w.eq_ignore_ascii_case("FILTER"))
            {
                return Err(self.syntax(
                    self.toks.position(),
                    format!("expected `.` or `}}`, found {}", self.found()),
                ));
            }
        }
    }

    fn triples(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryParseError> {
        let subject = self.node("subject")?;
        if matches!(subject, PatternTerm::Term(Term::Literal(_))) {
            return Err(self.syntax(self.toks.position(), "a literal cannot be a subject"));
        }
        loop {
            let predicate = if matches!(self.toks.peek(), Some(Token::Word(w)) if w == "a") {
                self.toks.next();
                PatternTerm::iri(vocab::rdf_type())
            } else {
                let pos = self.toks.position();
                let p = self.node("predicate")?;
                if matches!(p, PatternTerm::Term(Term::Literal(_))) {
                    return Err(self.syntax(pos, "a literal cannot be a predicate"));
                }
                p
            };
            loop {
                let object = self.node("object")?;
                out.push(TriplePattern::new(
                    subject.clone(),
                    predicate.clone(),
                    object,
                ));
                if !self.toks.eat(&Token::Comma) {
                    break;
                }
            }
            if !self.toks.eat(&Token::Semicolon) {
                return Ok(());
            }
            if matches!(self.toks.peek(), Some(Token::Dot | Token::RBrace)) {
                return Ok(());
            }
        }
    }

    fn node(&mut self, role: &str) -> Result<PatternTerm, QueryParseError> {
        let pos = self.toks.position();
        let Some((tok, p)) = self.toks.next() else {
            return Err(self.syntax(pos, format!("expected {role}, found end of input")));
        };
        if let Token::Variable(v) = tok {
            return Ok(PatternTerm::Var(v));
        }
        self.term_from(tok, p, role).map(PatternTerm::Term)
    }

    fn term_from(&mut self, tok: Token, p: Position, role: &str) -> Result<Term, QueryParseError> {
        if let Some(iri) = resolve_iri_token(&tok, &self.prefixes, p)? {
            return Ok(Term::Iri(iri));
        }
        if let Token::String(s) = &tok {
            if self.toks.eat(&Token::DoubleCaret) {
                let dt_pos = self.toks.position();
                let dt = match self.toks.next() {
                    Some((t, q)) => resolve_iri_token(&t, &self.prefixes, q)?,
                    None => None,
                }
                .ok_or_else(|| self.syntax(dt_pos, "expected datatype IRI"))?;
                return Ok(Term::Literal(typed_literal(s, &dt, dt_pos)?));
            }
            return Ok(Term::Literal(Literal::string(s)));
        }
        match bare_literal(&tok, p)? {
            Some(l) => Ok(Term::Literal(l)),
            None => Err(self.syntax(p, format!("expected {role}, found `{tok}`"))),
        }
    }

    fn filter(&mut self) -> Result<FilterExpr, QueryParseError> {
        self.expect(Token::LParen, "`(` after FILTER")?;
        let pos = self.toks.position();
        let left = match self.toks.next() {
            Some((Token::Variable(v), _)) => v,
            _ => return Err(self.syntax(pos, "filter must start with a variable")),
        };
        let pos = self.toks.position();
        let op = match self.toks.next() {
            Some((Token::Op(o), _)) => CmpOp::from_symbol(o).expect("lexer emits known operators"),
            _ => return Err(self.syntax(pos, "expected a comparison operator")),
        };
        let pos = self.toks.position();
        let right = match self.toks.next() {
            Some((Token::Variable(v), _)) => FilterOperand::Var(v),
            Some((tok, p)) => FilterOperand::Term(self.term_from(tok, p, "filter operand")?),
            None => return Err(self.syntax(pos, "expected filter operand, found end of input")),
        };
        self.expect(Token::RParen, "`)` closing FILTER")?;
        Ok(FilterExpr { left, op, right })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::pmdt;

    #[test]
    fn single_pattern() {
        let q = parse_query("SELECT ?p WHERE { ?p a pmdt:Patient . }").unwrap();
        assert_eq!(q.select, vec!["p"]);
        assert_eq!(q.patterns.len(), 1);
        assert_eq!(q.patterns[0].type_class(), Some(&pmdt("Patient")));
        assert!(q.distinct);
    }

    #[test]
    fn two_patterns_and_modifiers() {
        let q = parse_query(
            "PREFIX x: <http://x.org/>\nSELECT DISTINCT ?ae ?t WHERE { ?ae pmdt:causedBy ?t . ?t a pmdt:Immunotherapy FILTER(?ae != x:y) } ORDER BY ?t LIMIT 5",
        )
        .unwrap();
        assert_eq!(q.patterns.len(), 2);
        assert_eq!(q.filters.len(), 1);
        assert_eq!(q.order_by, vec!["t"]);
        assert_eq!(q.limit, Some(5));
        assert_eq!(parse_query(&q.render()).unwrap(), q);
    }

    #[test]
    fn empty_group_is_a_syntax_error() {
        assert!(matches!(
            parse_query("SELECT ?x WHERE { }"),
            Err(QueryParseError::Syntax { .. })
        ));
    }

    #[test]
    fn unbound_select_variable() {
        assert_eq!(
            parse_query("SELECT ?x WHERE { ?p a pmdt:Patient }"),
            Err(QueryParseError::UnboundVariable("x".into()))
        );
        assert!(parse_query("SELECT ?p WHERE { ?p a pmdt:Patient FILTER(?q > 1) }").is_err());
    }

    #[test]
    fn disconnected_all_variable_pattern() {
        assert!(matches!(
            parse_query("SELECT ?s WHERE { ?s ?p ?o }"),
            Err(QueryParseError::DisconnectedPattern(_))
        ));
        assert!(parse_query("SELECT ?s WHERE { ?s ?p ?o . ?s a pmdt:Patient }").is_ok());
    }

    #[test]
    fn filter_literals() {
        let q = parse_query("SELECT ?g WHERE { ?x pmdt:gradeValue ?g FILTER(?g >= 3) FILTER(?g < \"5\"^^xsd:integer) }").unwrap();
        assert_eq!(
            q.filters[0].right,
            FilterOperand::Term(Term::Literal(Literal::integer(3)))
        );
        assert_eq!(q.filters[1].op, CmpOp::Lt);
    }

    #[test]
    fn error_positions() {
        match parse_query("SELECT ?x\nWHERE { ?x a }") {
            Err(QueryParseError::Syntax { position, .. }) => assert_eq!(position.line, 2),
            other => panic!("{other:?}"),
        }
    }
}
