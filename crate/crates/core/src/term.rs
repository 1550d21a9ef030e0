//! Identifiers, typed literals and the prefix table.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use thiserror::Error;

use crate::vocab;

/// An absolute identifier. Prefixed names are resolved before an `Iri` is built,
/// so equality is equality of the resolved form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Self {
        Iri(Arc::from(value.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl From<&str> for Iri {
    fn from(s: &str) -> Self {
        Iri::new(s)
    }
}

/// The supported literal datatypes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datatype {
    Boolean,
    Integer,
    Decimal,
    DateTime,
    Date,
    String,
}

impl Datatype {
    pub const ALL: [Datatype; 6] = [
        Datatype::String,
        Datatype::Integer,
        Datatype::Decimal,
        Datatype::Boolean,
        Datatype::DateTime,
        Datatype::Date,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
            Datatype::DateTime => "dateTime",
            Datatype::Date => "date",
        }
    }

    pub fn iri(self) -> Iri {
        Iri::new(format!("{}{}", vocab::XSD, self.name()))
    }

    pub fn from_iri(iri: &Iri) -> Option<Datatype> {
        iri.as_str()
            .strip_prefix(vocab::XSD)
            .and_then(Datatype::from_name)
    }

    /// Accepts `integer`, `xsd:integer` or the absolute XSD IRI.
    pub fn from_name(name: &str) -> Option<Datatype> {
        let name = name
            .strip_prefix(vocab::XSD)
            .or_else(|| name.strip_prefix("xsd:"))
            .unwrap_or(name);
        Datatype::ALL.into_iter().find(|d| d.name() == name)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Datatype::Integer | Datatype::Decimal)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid {datatype} lexical form {lexical:?}")]
pub struct LiteralError {
    pub lexical: String,
    pub datatype: &'static str,
}

/// Parsed value cached alongside the lexical form; drives comparisons.
#[derive(Clone, Debug)]
enum Value {
    Bool(bool),
    Number(f64),
    /// Nanoseconds since the epoch; zone-less values are read as UTC.
    Instant(i64),
    Day(i32),
    Text,
}

/// A typed literal whose lexical form is valid for its datatype.
#[derive(Clone)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Datatype,
    value: Value,
}

impl Literal {
    pub fn new(lexical: impl AsRef<str>, datatype: Datatype) -> Result<Self, LiteralError> {
        let lexical = lexical.as_ref();
        let err = || LiteralError {
            lexical: lexical.to_string(),
            datatype: datatype.name(),
        };
        let value = match datatype {
            Datatype::String => Value::Text,
            Datatype::Boolean => match lexical {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                _ => return Err(err()),
            },
            Datatype::Integer => {
                if !is_integer_lexical(lexical) {
                    return Err(err());
                }
                Value::Number(lexical.parse::<f64>().map_err(|_| err())?)
            }
            Datatype::Decimal => {
                if !is_decimal_lexical(lexical) {
                    return Err(err());
                }
                Value::Number(lexical.parse::<f64>().map_err(|_| err())?)
            }
            Datatype::DateTime => Value::Instant(parse_date_time(lexical).ok_or_else(err)?),
            Datatype::Date => {
                let d = NaiveDate::parse_from_str(lexical, "%Y-%m-%d").map_err(|_| err())?;
                Value::Day(d.signed_duration_since(NaiveDate::default()).num_days() as i32)
            }
        };
        Ok(Literal {
            lexical: Arc::from(lexical),
            datatype,
            value,
        })
    }

    pub fn string(s: impl AsRef<str>) -> Self {
        Literal::new(s, Datatype::String).expect("any string is a valid xsd:string")
    }

    pub fn integer(n: i64) -> Self {
        Literal::new(n.to_string(), Datatype::Integer).expect("formatted integer")
    }

    pub fn decimal(s: &str) -> Result<Self, LiteralError> {
        Literal::new(s, Datatype::Decimal)
    }

    pub fn boolean(b: bool) -> Self {
        Literal::new(if b { "true" } else { "false" }, Datatype::Boolean).expect("boolean")
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.value {
            Value::Number(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self.datatype {
            Datatype::Integer => self.lexical.parse().ok(),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.value {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    fn category(&self) -> u8 {
        match self.datatype {
            Datatype::Boolean => 0,
            Datatype::Integer | Datatype::Decimal => 1,
            Datatype::DateTime => 2,
            Datatype::Date => 3,
            Datatype::String => 4,
        }
    }

    /// Compares typed values. `None` when the two literals are not comparable.
    pub fn compare_value(&self, other: &Literal) -> Option<Ordering> {
        match (&self.value, &other.value) {
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            (Value::Number(a), Value::Number(b)) => a.partial_cmp(b),
            (Value::Instant(a), Value::Instant(b)) => Some(a.cmp(b)),
            (Value::Day(a), Value::Day(b)) => Some(a.cmp(b)),
            (Value::Text, Value::Text) => Some(self.lexical.cmp(&other.lexical)),
            _ => None,
        }
    }
}

fn is_integer_lexical(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_decimal_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let int_ok = int.bytes().all(|b| b.is_ascii_digit());
    match frac {
        None => !int.is_empty() && int_ok,
        Some(f) => {
            int_ok && f.bytes().all(|b| b.is_ascii_digit()) && !(int.is_empty() && f.is_empty())
        }
    }
}

fn parse_date_time(s: &str) -> Option<i64> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return dt.timestamp_nanos_opt();
    }
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
        .ok()
        .and_then(|dt| dt.and_utc().timestamp_nanos_opt())
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.datatype == other.datatype && self.lexical == other.lexical
    }
}

impl Eq for Literal {}

impl Hash for Literal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.datatype.hash(state);
        self.lexical.hash(state);
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.category()
            .cmp(&other.category())
            .then_with(|| match (&self.value, &other.value) {
                (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
                _ => self.compare_value(other).unwrap_or(Ordering::Equal),
            })
            .then_with(|| self.datatype.cmp(&other.datatype))
            .then_with(|| self.lexical.cmp(&other.lexical))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}^^{}", self.lexical(), self.datatype.name())
    }
}

/// Object position of an assertion. IRIs order before literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            Term::Iri(_) => None,
        }
    }

    /// Absolute, prefix-free rendering (`<iri>` or `"lex"^^<datatype>`).
    pub fn to_ntriples(&self) -> String {
        match self {
            Term::Iri(i) => format!("<{}>", i.as_str()),
            Term::Literal(l) => format!(
                "\"{}\"^^<{}>",
                escape_string(l.lexical()),
                l.datatype().iri().as_str()
            ),
        }
    }

    /// Turtle rendering using the prefix table where possible; bare tokens for
    /// integers, decimals and booleans.
    pub fn to_turtle(&self, prefixes: &PrefixTable) -> String {
        match self {
            Term::Iri(i) => prefixes.render(i),
            Term::Literal(l) => match l.datatype() {
                Datatype::String => format!("\"{}\"", escape_string(l.lexical())),
                Datatype::Integer | Datatype::Boolean => l.lexical().to_string(),
                Datatype::Decimal
                    if l.lexical().contains('.')
                        && !l.lexical().ends_with('.')
                        && !l.lexical().starts_with(['.', '+', '-']) =>
                {
                    l.lexical().to_string()
                }
                dt => format!(
                    "\"{}\"^^{}",
                    escape_string(l.lexical()),
                    prefixes.render(&dt.iri())
                ),
            },
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown prefix `{0}:`")]
pub struct UnknownPrefix(pub String);

/// Maps prefix names to namespaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixTable {
    entries: BTreeMap<String, String>,
}

impl Default for PrefixTable {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for (p, ns) in [
            ("pmdt", vocab::PMDT),
            ("ex", vocab::EX),
            ("xsd", vocab::XSD),
            ("rdf", vocab::RDF),
            ("rdfs", vocab::RDFS),
            ("owl", vocab::OWL),
        ] {
            entries.insert(p.to_string(), ns.to_string());
        }
        PrefixTable { entries }
    }
}

impl PrefixTable {
    pub fn empty() -> Self {
        PrefixTable {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.entries.insert(prefix.into(), namespace.into());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.entries.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, n)| (p.as_str(), n.as_str()))
    }

    pub fn merge(&mut self, other: &PrefixTable) {
        for (p, n) in other.iter() {
            self.insert(p, n);
        }
    }

    pub fn resolve(&self, prefix: &str, local: &str) -> Result<Iri, UnknownPrefix> {
        self.get(prefix)
            .map(|ns| Iri::new(format!("{ns}{local}")))
            .ok_or_else(|| UnknownPrefix(prefix.to_string()))
    }

    /// Resolves `prefix:local`, or returns an absolute IRI unchanged when the
    /// text has no known prefix but looks absolute (`scheme:...` with `//` or `urn:`).
    pub fn expand(&self, text: &str) -> Result<Iri, UnknownPrefix> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return Ok(Iri::new(inner));
        }
        match text.split_once(':') {
            Some((p, local)) => match self.get(p) {
                Some(ns) => Ok(Iri::new(format!("{ns}{local}"))),
                None if local.starts_with("//") || p == "urn" => Ok(Iri::new(text)),
                None => Err(UnknownPrefix(p.to_string())),
            },
            None => Err(UnknownPrefix(String::new())),
        }
    }

    /// Shortest prefixed form, if the local part is a valid local name.
    pub fn compact(&self, iri: &Iri) -> Option<String> {
        let s = iri.as_str();
        self.entries
            .iter()
            .filter(|(_, ns)| s.starts_with(ns.as_str()))
            .filter(|(_, ns)| is_local_name(&s[ns.len()..]))
            .max_by(|(pa, na), (pb, nb)| na.len().cmp(&nb.len()).then_with(|| pb.cmp(pa)))
            .map(|(p, ns)| format!("{p}:{}", &s[ns.len()..]))
    }

    pub fn render(&self, iri: &Iri) -> String {
        self.compact(iri)
            .unwrap_or_else(|| format!("<{}>", iri.as_str()))
    }
}

/// Local names: ASCII letters, digits, `_`, `-`, `.` and `/`, not starting with
/// `.`, `-` or `/` and not ending with `.`.
pub fn is_local_name(s: &str) -> bool {
    if s.is_empty() {
        return true;
    }
    let first_ok = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
    first_ok
        && !s.ends_with('.')
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_validation() {
        assert!(Literal::new("62", Datatype::Integer).is_ok());
        assert!(Literal::new("sixty-two", Datatype::Integer).is_err());
        assert!(Literal::new("72.5", Datatype::Decimal).is_ok());
        assert!(Literal::new(".5", Datatype::Decimal).is_ok());
        assert!(Literal::new(".", Datatype::Decimal).is_err());
        assert!(Literal::new("2024-04-15T09:00:00Z", Datatype::DateTime).is_ok());
        assert!(Literal::new("2024-04-15T09:00:00", Datatype::DateTime).is_ok());
        assert!(Literal::new("2024-04-15", Datatype::DateTime).is_err());
        assert!(Literal::new("2024-04-15", Datatype::Date).is_ok());
        assert!(Literal::new("yes", Datatype::Boolean).is_err());
    }

    #[test]
    fn numeric_literals_compare_by_value() {
        let two = Literal::integer(2);
        let ten = Literal::integer(10);
        let two_and_half = Literal::decimal("2.5").unwrap();
        assert!(two < two_and_half && two_and_half < ten);
        assert_eq!(two.compare_value(&Literal::string("2")), None);
    }

    #[test]
    fn iris_sort_before_literals() {
        let i = Term::Iri(Iri::new("http://z"));
        let l = Term::Literal(Literal::boolean(false));
        assert!(i < l);
    }

    #[test]
    fn prefix_compaction() {
        let p = PrefixTable::default();
        assert_eq!(
            p.compact(&vocab::pmdt("Patient")).as_deref(),
            Some("pmdt:Patient")
        );
        assert_eq!(
            p.compact(&vocab::ex("patient/markus")).as_deref(),
            Some("ex:patient/markus")
        );
        assert_eq!(p.compact(&Iri::new("http://other.org/x")), None);
        assert_eq!(p.compact(&vocab::ex("a b")), None);
        assert_eq!(p.expand("pmdt:Patient").unwrap(), vocab::pmdt("Patient"));
        assert!(p.expand("nope:x").is_err());
    }

    #[test]
    fn turtle_rendering_of_decimals_stays_reparseable() {
        let p = PrefixTable::default();
        assert_eq!(
            Term::from(Literal::decimal("72.5").unwrap()).to_turtle(&p),
            "72.5"
        );
        assert_eq!(
            Term::from(Literal::decimal("5").unwrap()).to_turtle(&p),
            "\"5\"^^xsd:decimal"
        );
    }
}
