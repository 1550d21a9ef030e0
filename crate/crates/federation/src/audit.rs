use std::fmt;

use chrono::{DateTime, Duration, TimeZone, Utc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AuditAction {
    Subquery,
    ConsentExclusion,
    PolicyDenial,
}

impl AuditAction {
    pub fn name(self) -> &'static str {
        match self {
            AuditAction::Subquery => "subquery",
            AuditAction::ConsentExclusion => "consent-exclusion",
            AuditAction::PolicyDenial => "policy-denial",
        }
    }
}

impl fmt::Display for AuditAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AuditEntry {
    pub timestamp: DateTime<Utc>,
    pub site_id: String,
    pub requester_role: String,
    pub action: AuditAction,
    pub detail: String,
}

impl AuditEntry {
    /// Tab-separated: timestamp, site, role, action, detail.
    pub fn render(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.timestamp.format("%Y-%m-%dT%H:%M:%SZ"),
            self.site_id,
            self.requester_role,
            self.action,
            self.detail.replace(['\t', '\n'], " ")
        )
    }
}

/// Append-only per-site log stamped by a logical clock: each entry is one
/// second after the previous one, starting at the origin.
#[derive(Clone, Debug)]
pub struct AuditLog {
    origin: DateTime<Utc>,
    ticks: i64,
    entries: Vec<AuditEntry>,
}

impl Default for AuditLog {
    fn default() -> Self {
        AuditLog::new(default_origin())
    }
}

pub fn default_origin() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0)
        .single()
        .expect("valid origin")
}

impl AuditLog {
    pub fn new(origin: DateTime<Utc>) -> Self {
        AuditLog {
            origin,
            ticks: 0,
            entries: Vec::new(),
        }
    }

    pub fn append(
        &mut self,
        site_id: &str,
        role: &str,
        action: AuditAction,
        detail: impl Into<String>,
    ) -> &AuditEntry {
        let timestamp = self.origin + Duration::seconds(self.ticks);
        self.ticks += 1;
        self.entries.push(AuditEntry {
            timestamp,
            site_id: site_id.to_string(),
            requester_role: role.to_string(),
            action,
            detail: detail.into(),
        });
        self.entries.last().expect("just pushed")
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_and_rendered() {
        let mut log = AuditLog::default();
        log.append("a", "researcher", AuditAction::Subquery, "x");
        log.append("a", "researcher", AuditAction::PolicyDenial, "tab\there");
        let e = log.entries();
        assert!(e[0].timestamp < e[1].timestamp);
        assert_eq!(
            e[1].render(),
            "2025-01-01T00:00:01Z\ta\tresearcher\tpolicy-denial\ttab here"
        );
    }
}
