use std::collections::BTreeMap;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use pmdt_core::{Iri, PrefixTable};
use thiserror::Error;

/// Cell values are percent-encoded so that template separators never occur
/// inside an instantiated value, which keeps inversion unambiguous.
const VALUE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'_')
    .remove(b'.')
    .remove(b'~');

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("unbalanced brace in IRI template `{0}`")]
    Unbalanced(String),
    #[error("empty placeholder in IRI template `{0}`")]
    EmptyPlaceholder(String),
    #[error("unknown prefix in IRI template `{0}`")]
    UnknownPrefix(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Part {
    Text(String),
    Column(String),
}

/// An IRI pattern such as `ex:patient/{patient_id}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IriTemplate {
    source: String,
    parts: Vec<Part>,
}

impl IriTemplate {
    pub fn parse(text: &str, prefixes: &PrefixTable) -> Result<Self, TemplateError> {
        let text = text.trim();
        let expanded = if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>'))
        {
            inner.to_string()
        } else {
            match text.split_once(':') {
                Some((p, rest)) if !rest.starts_with("//") && p != "urn" => match prefixes.get(p) {
                    Some(ns) => format!("{ns}{rest}"),
                    None => return Err(TemplateError::UnknownPrefix(text.to_string())),
                },
                _ => text.to_string(),
            }
        };
        let mut parts = Vec::new();
        let mut rest = expanded.as_str();
        while !rest.is_empty() {
            match rest.find(['{', '}']) {
                None => {
                    parts.push(Part::Text(rest.to_string()));
                    rest = "";
                }
                Some(i) if rest.as_bytes()[i] == b'}' => {
                    return Err(TemplateError::Unbalanced(text.to_string()))
                }
                Some(i) => {
                    if i > 0 {
                        parts.push(Part::Text(rest[..i].to_string()));
                    }
                    let close = rest[i..]
                        .find('}')
                        .ok_or_else(|| TemplateError::Unbalanced(text.to_string()))?;
                    let name = &rest[i + 1..i + close];
                    if name.is_empty() {
                        return Err(TemplateError::EmptyPlaceholder(text.to_string()));
                    }
                    if name.contains('{') {
                        return Err(TemplateError::Unbalanced(text.to_string()));
                    }
                    parts.push(Part::Column(name.to_string()));
                    rest = &rest[i + close + 1..];
                }
            }
        }
        Ok(IriTemplate {
            source: text.to_string(),
            parts,
        })
    }

    /// The template as written.
    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Placeholder names in order of appearance (with repeats).
    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().filter_map(|p| match p {
            Part::Column(c) => Some(c.as_str()),
            Part::Text(_) => None,
        })
    }

    /// `None` when a placeholder has no value or an empty one.
    pub fn instantiate<'a>(&self, lookup: impl Fn(&str) -> Option<&'a str>) -> Option<Iri> {
        let mut out = String::new();
        for p in &self.parts {
            match p {
                Part::Text(t) => out.push_str(t),
                Part::Column(c) => {
                    let v = lookup(c).filter(|v| !v.is_empty())?;
                    out.extend(utf8_percent_encode(v, VALUE));
                }
            }
        }
        Some(Iri::new(out))
    }

    /// Recovers placeholder values from an IRI this template could produce.
    pub fn invert(&self, iri: &Iri) -> Option<BTreeMap<String, String>> {
        let mut rest = iri.as_str();
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        let mut parts = self.parts.iter().peekable();
        while let Some(p) = parts.next() {
            match p {
                Part::Text(t) => rest = rest.strip_prefix(t.as_str())?,
                Part::Column(c) => {
                    let end = match parts.peek() {
                        None => rest.len(),
                        Some(Part::Text(t)) => rest.find(t.as_str())?,
                        Some(Part::Column(_)) => return None,
                    };
                    let value = percent_decode_str(&rest[..end])
                        .decode_utf8()
                        .ok()?
                        .into_owned();
                    if values.get(c).is_some_and(|v| v != &value) {
                        return None;
                    }
                    values.insert(c.clone(), value);
                    rest = &rest[end..];
                }
            }
        }
        if !rest.is_empty() {
            return None;
        }
        let again = self.instantiate(|c| values.get(c).map(String::as_str))?;
        (again == *iri).then_some(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> IriTemplate {
        IriTemplate::parse(s, &PrefixTable::default()).unwrap()
    }

    #[test]
    fn instantiate_and_invert() {
        let tpl = t("ex:patient/{patient_id}");
        let iri = tpl.instantiate(|_| Some("markus")).unwrap();
        assert_eq!(iri.as_str(), "http://example.org/patient/markus");
        assert_eq!(tpl.invert(&iri).unwrap()["patient_id"], "markus");
        assert_eq!(
            tpl.invert(&Iri::new("http://example.org/other/markus")),
            None
        );
    }

    #[test]
    fn values_are_percent_encoded() {
        let tpl = t("ex:e/{a}/{b}");
        let row: BTreeMap<&str, &str> = [("a", "x/y"), ("b", "é z")].into();
        let iri = tpl.instantiate(|c| row.get(c).copied()).unwrap();
        assert_eq!(iri.as_str(), "http://example.org/e/x%2Fy/%C3%A9%20z");
        let back = tpl.invert(&iri).unwrap();
        assert_eq!(back["a"], "x/y");
        assert_eq!(back["b"], "é z");
    }

    #[test]
    fn empty_value_yields_nothing() {
        assert_eq!(t("ex:p/{id}").instantiate(|_| Some("")), None);
    }

    #[test]
    fn malformed() {
        let p = PrefixTable::default();
        assert!(matches!(
            IriTemplate::parse("ex:p/{id", &p),
            Err(TemplateError::Unbalanced(_))
        ));
        assert!(matches!(
            IriTemplate::parse("ex:p/{}", &p),
            Err(TemplateError::EmptyPlaceholder(_))
        ));
        assert!(matches!(
            IriTemplate::parse("zz:p/{id}", &p),
            Err(TemplateError::UnknownPrefix(_))
        ));
        assert_eq!(
            t("<http://h.org/{x}>").columns().collect::<Vec<_>>(),
            vec!["x"]
        );
    }
}
