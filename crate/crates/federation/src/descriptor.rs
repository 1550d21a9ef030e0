use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::FederationError;

/// A hospital site as described in its JSON descriptor file. IRIs may be
/// written as prefixed names or `<absolute>` forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SiteDescriptor {
    pub site_id: String,
    pub tables: Vec<TableMapping>,
    #[serde(default)]
    pub policies: Vec<AccessPolicyRule>,
    #[serde(default)]
    pub consents: Vec<ConsentRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TableMapping {
    pub table_name: String,
    pub csv_path: PathBuf,
    pub row_class: String,
    pub iri_template: String,
    /// Owning patient of each row; required for patient-data tables so that
    /// consent can be checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_template: Option<String>,
    pub columns: Vec<ColumnMapping>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ColumnMapping {
    pub column: String,
    pub property: String,
    #[serde(flatten)]
    pub target: ColumnTarget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ColumnTarget {
    /// XSD datatype name, e.g. `integer`.
    Datatype(String),
    IriTemplate(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConsentRecord {
    pub patient_iri: String,
    pub data_category: String,
    pub granted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    Allow,
    Deny,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AccessPolicyRule {
    pub role: String,
    pub effect: Effect,
    pub scope: Vec<String>,
}

impl SiteDescriptor {
    pub fn from_json(text: &str) -> Result<Self, FederationError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a descriptor; relative CSV paths are resolved against the
    /// descriptor's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, FederationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FederationError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut desc = Self::from_json(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for t in &mut desc.tables {
            if t.csv_path.is_relative() {
                t.csv_path = dir.join(&t.csv_path);
            }
        }
        Ok(desc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }
}
