//! Tokenizer shared by the Turtle subset and the query language.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Token {
    /// `<...>`
    IriRef(String),
    /// `prefix:local`
    PrefixedName(String, String),
    /// `?name`
    Variable(String),
    /// Quoted string, unescaped.
    String(String),
    Integer(String),
    Decimal(String),
    /// Bare word: `a`, `true`, keywords.
    Word(String),
    /// `@prefix`
    AtPrefix,
    Dot,
    Semicolon,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    DoubleCaret,
    Op(&'static str),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::IriRef(i) => write!(f, "<{i}>"),
            Token::PrefixedName(p, l) => write!(f, "{p}:{l}"),
            Token::Variable(v) => write!(f, "?{v}"),
            Token::String(s) => write!(f, "{s:?}"),
            Token::Integer(s) | Token::Decimal(s) | Token::Word(s) => f.write_str(s),
            Token::AtPrefix => f.write_str("@prefix"),
            Token::Dot => f.write_str("."),
            Token::Semicolon => f.write_str(";"),
            Token::Comma => f.write_str(","),
            Token::LBrace => f.write_str("{"),
            Token::RBrace => f.write_str("}"),
            Token::LParen => f.write_str("("),
            Token::RParen => f.write_str(")"),
            Token::DoubleCaret => f.write_str("^^"),
            Token::Op(o) => f.write_str(o),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub position: Position,
    pub message: String,
}

pub struct Lexer<'a> {
    chars: Vec<char>,
    idx: usize,
    line: usize,
    column: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            idx: 0,
            line: 1,
            column: 1,
            _src: src,
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<(Token, Position)>, LexError> {
        let mut out = Vec::new();
        while let Some(tok) = self.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.idx + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.idx).copied()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn error(&self, position: Position, message: impl Into<String>) -> LexError {
        LexError {
            position,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(Token, Position)>, LexError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '<' => {
                if let Some(len) = self.iri_ref_len() {
                    self.bump();
                    let iri: String = (0..len).filter_map(|_| self.bump()).collect();
                    self.bump();
                    Token::IriRef(iri)
                } else if self.peek_at(1) == Some('=') {
                    self.bump();
                    self.bump();
                    Token::Op("<=")
                } else {
                    self.bump();
                    Token::Op("<")
                }
            }
            '>' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Token::Op(">=")
                } else {
                    Token::Op(">")
                }
            }
            '=' => {
                self.bump();
                Token::Op("=")
            }
            '!' if self.peek_at(1) == Some('=') => {
                self.bump();
                self.bump();
                Token::Op("!=")
            }
            '"' => Token::String(self.string(start)?),
            '?' | '$' => {
                self.bump();
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(self.error(start, "empty variable name"));
                }
                Token::Variable(name)
            }
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphabetic());
                if word == "prefix" {
                    Token::AtPrefix
                } else {
                    return Err(self.error(start, format!("unsupported directive @{word}")));
                }
            }
            '.' if !self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                self.bump();
                Token::Dot
            }
            ';' => {
                self.bump();
                Token::Semicolon
            }
            ',' => {
                self.bump();
                Token::Comma
            }
            '{' => {
                self.bump();
                Token::LBrace
            }
            '}' => {
                self.bump();
                Token::RBrace
            }
            '(' => {
                self.bump();
                Token::LParen
            }
            ')' => {
                self.bump();
                Token::RParen
            }
            '^' if self.peek_at(1) == Some('^') => {
                self.bump();
                self.bump();
                Token::DoubleCaret
            }
            c if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.number(start)?,
            c if c.is_ascii_alphabetic() || c == '_' || c == ':' => self.name(),
            other => return Err(self.error(start, format!("unexpected character {other:?}"))),
        };
        Ok(Some((tok, start)))
    }

    /// Length of an IRI body if the text at the cursor is `<...>` without
    /// whitespace; otherwise the `<` is an operator.
    fn iri_ref_len(&self) -> Option<usize> {
        let mut n = 1;
        loop {
            match self.peek_at(n)? {
                '>' => return if n > 1 { Some(n - 1) } else { None },
                c if c.is_whitespace() || c == '<' || c == '"' || c == '{' || c == '}' => {
                    return None
                }
                _ => n += 1,
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn string(&mut self, start: Position) -> Result<String, LexError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error(start, "unterminated string")),
                Some('"') => return Ok(s),
                Some('\\') => {
                    let esc = self.pos();
                    match self.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('r') => s.push('\r'),
                        Some('t') => s.push('\t'),
                        Some('u') => {
                            let hex: String = (0..4).filter_map(|_| self.bump()).collect();
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.error(esc, "invalid \\u escape"))?;
                            s.push(ch);
                        }
                        _ => return Err(self.error(esc, "invalid escape sequence")),
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self, start: Position) -> Result<Token, LexError> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let is_decimal =
            self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit());
        if is_decimal {
            self.bump();
            s.push('.');
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            return Ok(Token::Decimal(s));
        }
        if s.trim_start_matches(['+', '-']).is_empty() {
            return Err(self.error(start, format!("malformed number {s:?}")));
        }
        Ok(Token::Integer(s))
    }

    fn name(&mut self) -> Token {
        let prefix = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if self.peek() != Some(':') {
            return Token::Word(prefix);
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            let name_char = |c: char| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '/');
            let inner_dot = c == '.' && !local.is_empty() && self.peek_at(1).is_some_and(name_char);
            if name_char(c) || inner_dot {
                local.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Token::PrefixedName(prefix, local)
    }
}

/// Cursor over a token vector with end-of-input tracking.
pub(crate) struct Tokens {
    toks: Vec<(Token, Position)>,
    idx: usize,
    end: Position,
}

impl Tokens {
    pub(crate) fn new(src: &str) -> Result<Self, LexError> {
        let toks = Lexer::new(src).tokenize()?;
        let mut end = Position { line: 1, column: 1 };
        for (i, line) in src.split('\n').enumerate() {
            end = Position {
                line: i + 1,
                column: line.chars().count() + 1,
            };
        }
        Ok(Tokens { toks, idx: 0, end })
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    /// Position of the next token, or end of input.
    pub(crate) fn position(&self) -> Position {
        self.toks.get(self.idx).map_or(self.end, |(_, p)| *p)
    }

    pub(crate) fn next(&mut self) -> Option<(Token, Position)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    /// Consumes a bare word matching `kw` case-insensitively.
    pub(crate) fn eat_keyword(&mut self, kw: &str) -> bool {
        match self.peek() {
            Some(Token::Word(w)) if w.eq_ignore_ascii_case(kw) => {
                self.idx += 1;
                true
            }
            _ => false,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Token> {
        Lexer::new(s)
            .tokenize()
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect()
    }

    #[test]
    fn distinguishes_iri_from_less_than() {
        assert_eq!(
            toks("?a < 3 . <http://x/y>"),
            vec![
                Token::Variable("a".into()),
                Token::Op("<"),
                Token::Integer("3".into()),
                Token::Dot,
                Token::IriRef("http://x/y".into()),
            ]
        );
        assert_eq!(toks("?a<=?b")[1], Token::Op("<="));
    }

    #[test]
    fn trailing_dot_terminates_prefixed_name() {
        assert_eq!(
            toks("ex:patient/markus.")[..],
            [
                Token::PrefixedName("ex".into(), "patient/markus".into()),
                Token::Dot
            ]
        );
        assert_eq!(
            toks("ex:a.b")[0],
            Token::PrefixedName("ex".into(), "a.b".into())
        );
    }

    #[test]
    fn numbers_and_dots() {
        assert_eq!(toks("2 ."), vec![Token::Integer("2".into()), Token::Dot]);
        assert_eq!(toks("2.5"), vec![Token::Decimal("2.5".into())]);
        assert_eq!(toks("-7"), vec![Token::Integer("-7".into())]);
    }

    #[test]
    fn positions_are_one_based() {
        let t = Lexer::new("a\n  ex:b").tokenize().unwrap();
        assert_eq!(t[1].1, Position { line: 2, column: 3 });
    }
}
