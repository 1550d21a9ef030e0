use thiserror::Error;

use crate::term::{PrefixTable, Term};
use crate::turtle::{parse_term, TurtleError};

/// A solution table: ordered columns and rows of bound terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BindingSet {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

#[derive(Debug, Error)]
pub enum BindingsError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: {source}")]
    Term {
        row: usize,
        column: String,
        #[source]
        source: TurtleError,
    },
    #[error("row {row} has {found} cells, expected {expected}")]
    Arity {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("csv input has no header row")]
    MissingHeader,
}

impl BindingSet {
    pub fn new(columns: Vec<String>) -> Self {
        BindingSet {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&Term>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Aligned plain-text table.
    pub fn to_table(&self, prefixes: &PrefixTable) -> String {
        let header: Vec<String> = self.columns.iter().map(|c| format!("?{c}")).collect();
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|t| t.to_turtle(prefixes)).collect())
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: &[String]| {
            let padded: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}", w = *w))
                .collect();
            padded.join(" | ").trim_end().to_string() + "\n"
        };
        let mut out = line(&header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&(rule.join("-+-") + "\n"));
        for row in &cells {
            out.push_str(&line(row));
        }
        out
    }

    /// CSV with a header of variable names; cells in Turtle term syntax.
    pub fn to_csv(&self, prefixes: &PrefixTable) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|t| t.to_turtle(prefixes)))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Inverse of [`BindingSet::to_csv`].
    pub fn from_csv(text: &str, prefixes: &PrefixTable) -> Result<BindingSet, BindingsError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(text.as_bytes());
        let mut records = r.records();
        let header = records.next().ok_or(BindingsError::MissingHeader)??;
        let columns: Vec<String> = header.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(BindingsError::Arity {
                    row: i + 1,
                    found: rec.len(),
                    expected: columns.len(),
                });
            }
            let row = rec
                .iter()
                .zip(&columns)
                .map(|(cell, col)| {
                    parse_term(cell, prefixes).map_err(|source| BindingsError::Term {
                        row: i + 1,
                        column: col.clone(),
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(BindingSet { columns, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Literal;
    use crate::vocab::ex;

    #[test]
    fn csv_round_trip() {
        let b = BindingSet {
            columns: vec!["p".into(), "n".into()],
            rows: vec![
                vec![
                    Term::Iri(ex("patient/markus")),
                    Term::Literal(Literal::string("Markus, \"M\"")),
                ],
                vec![
                    Term::Iri(ex("patient/elena")),
                    Term::Literal(Literal::integer(54)),
                ],
            ],
        };
        let p = PrefixTable::default();
        assert_eq!(BindingSet::from_csv(&b.to_csv(&p), &p).unwrap(), b);
        let header_only = BindingSet::new(vec!["x".into()]);
        assert_eq!(header_only.to_csv(&p), "x\n");
        assert_eq!(BindingSet::from_csv("x\n", &p).unwrap(), header_only);
    }

    #[test]
    fn table_alignment() {
        let b = BindingSet {
            columns: vec!["p".into()],
            rows: vec![vec![Term::Iri(ex("a"))]],
        };
        assert_eq!(b.to_table(&PrefixTable::default()), "?p\n----\nex:a\n");
    }
}
