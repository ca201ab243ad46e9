use std::collections::BTreeMap;

use serde::Serialize;

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRecord {
    pub check_name: String,
    pub parameters: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub pass: bool,
    /// Deterministic checks are hard; statistical ones are reported but soft.
    pub hard: bool,
}

impl VerificationRecord {
    pub fn new(
        check_name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        discrepancy: f64,
        pass: bool,
    ) -> Self {
        Self {
            check_name: check_name.into(),
            parameters: BTreeMap::new(),
            lhs,
            rhs,
            discrepancy,
            pass,
            hard: true,
        }
    }

    /// Marks the record as a statistical check that does not decide the exit status.
    pub fn soft(mut self) -> Self {
        self.hard = false;
        self
    }

    /// True unless this is a failed hard check.
    pub fn acceptable(&self) -> bool {
        self.pass || !self.hard
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_owned(), value);
        self
    }
}
