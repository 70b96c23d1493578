//! Inequality checks shared by the estimate campaigns.

use std::fmt;

/// Default relative slack for inequality campaigns.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative means violated before slack.
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `lhs <= rhs + slack * max(|lhs|, |rhs|)`.
    pub fn new(id: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let pass = lhs.is_finite() && rhs.is_finite() && lhs <= rhs + slack * lhs.abs().max(rhs.abs());
        Self { id: id.into(), lhs, rhs, margin: rhs - lhs, pass }
    }

    /// CSV row `id,lhs,rhs,margin,pass`.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.id,
            crate::path::fmt_f64(self.lhs),
            crate::path::fmt_f64(self.rhs),
            crate::path::fmt_f64(self.margin),
            self.pass
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:.6e} <= {:.6e} [{}]",
            self.id,
            self.lhs,
            self.rhs,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

pub const CSV_HEADER: &str = "inequality,lhs,rhs,margin,pass";
