//! Canonical message encoding between the coordinator and sites.
//!
//! Layout: a 4-byte big-endian length `n` followed by `n` bytes of UTF-8:
//!
//! ```text
//! <request|response>\n<site id>\n<kind>\n<body>
//! ```
//!
//! `kind` is `query` (body: requester role line, then query text),
//! `bindings` (body: CSV, header = variable names, absolute terms),
//! `denied` or `error` (body: a message).

use pmdt_core::query::BindingSet;
use pmdt_core::PrefixTable;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Request,
    Response,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Query { role: String, text: String },
    Bindings(BindingSet),
    Denied(String),
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireMessage {
    pub direction: Direction,
    pub site_id: String,
    pub payload: Payload,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("message shorter than its length prefix")]
    Truncated,
    #[error("message is not UTF-8")]
    Utf8,
    #[error("malformed message header: {0}")]
    Header(String),
    #[error("malformed bindings: {0}")]
    Bindings(#[from] pmdt_core::query::BindingsError),
}

impl WireMessage {
    pub fn request(site_id: &str, role: &str, text: &str) -> Self {
        WireMessage {
            direction: Direction::Request,
            site_id: site_id.to_string(),
            payload: Payload::Query {
                role: role.to_string(),
                text: text.to_string(),
            },
        }
    }

    pub fn response(site_id: &str, payload: Payload) -> Self {
        WireMessage {
            direction: Direction::Response,
            site_id: site_id.to_string(),
            payload,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let direction = match self.direction {
            Direction::Request => "request",
            Direction::Response => "response",
        };
        let (kind, body) = match &self.payload {
            Payload::Query { role, text } => ("query", format!("{role}\n{text}")),
            Payload::Bindings(b) => ("bindings", b.to_csv(&PrefixTable::empty())),
            Payload::Denied(m) => ("denied", m.clone()),
            Payload::Error(m) => ("error", m.clone()),
        };
        let text = format!("{direction}\n{}\n{kind}\n{body}", self.site_id);
        let mut out = Vec::with_capacity(text.len() + 4);
        out.extend_from_slice(&(text.len() as u32).to_be_bytes());
        out.extend_from_slice(text.as_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let (len, rest) = bytes.split_first_chunk::<4>().ok_or(WireError::Truncated)?;
        let len = u32::from_be_bytes(*len) as usize;
        if rest.len() != len {
            return Err(WireError::Truncated);
        }
        let text = std::str::from_utf8(rest).map_err(|_| WireError::Utf8)?;
        let mut it = text.splitn(4, '\n');
        let (Some(direction), Some(site), Some(kind)) = (it.next(), it.next(), it.next()) else {
            return Err(WireError::Header(text.chars().take(40).collect()));
        };
        let body = it.next().unwrap_or("");
        let direction = match direction {
            "request" => Direction::Request,
            "response" => Direction::Response,
            other => return Err(WireError::Header(format!("direction {other:?}"))),
        };
        let payload = match kind {
            "query" => {
                let (role, text) = body.split_once('\n').unwrap_or((body, ""));
                Payload::Query {
                    role: role.to_string(),
                    text: text.to_string(),
                }
            }
            "bindings" => Payload::Bindings(BindingSet::from_csv(body, &PrefixTable::empty())?),
            "denied" => Payload::Denied(body.to_string()),
            "error" => Payload::Error(body.to_string()),
            other => return Err(WireError::Header(format!("kind {other:?}"))),
        };
        Ok(WireMessage {
            direction,
            site_id: site.to_string(),
            payload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pmdt_core::vocab::ex;
    use pmdt_core::{Literal, Term};

    #[test]
    fn round_trip() {
        let msgs = [
            WireMessage::request("a", "clinician", "SELECT ?p WHERE { ?p a pmdt:Patient }"),
            WireMessage::response(
                "a",
                Payload::Bindings(BindingSet {
                    columns: vec!["p".into(), "n".into()],
                    rows: vec![vec![
                        Term::Iri(ex("patient/markus")),
                        Term::Literal(Literal::string("line\nbreak")),
                    ]],
                }),
            ),
            WireMessage::response("b", Payload::Denied("deny pmdt:MedicalHistory".into())),
            WireMessage::response("b", Payload::Error("boom".into())),
        ];
        for m in msgs {
            let bytes = m.encode();
            assert_eq!(
                u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize,
                bytes.len() - 4
            );
            assert_eq!(WireMessage::decode(&bytes).unwrap(), m);
        }
    }

    #[test]
    fn truncated() {
        let mut bytes = WireMessage::request("a", "r", "q").encode();
        bytes.pop();
        assert!(matches!(
            WireMessage::decode(&bytes),
            Err(WireError::Truncated)
        ));
        assert!(matches!(
            WireMessage::decode(&[0, 0]),
            Err(WireError::Truncated)
        ));
    }
}
