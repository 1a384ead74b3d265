//! Tabular reports with a stable JSON form and a fixed-column text form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::fmt_q;
use crate::quotient::SpectrumReport;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    /// Failure dominates inconclusive, which dominates pass.
    pub fn worst(self, other: Status) -> Status {
        self.max(other)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub status: Status,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Report {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            status: Status::Pass,
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn degrade(&mut self, status: Status) {
        self.status = self.status.worst(status);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Header, rule and rows, each column padded to its widest cell.
    pub fn table_body(&self) -> String {
        let mut width: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> =
                cells.iter().zip(&width).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        out.push_str(&line(&self.columns));
        out.push('\n');
        let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("# {}\n", self.command);
        out.push_str(&self.table_body());
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str(&format!("status: {}\n", self.status.label()));
        out
    }
}

pub fn fmt_set(xs: &[Rational]) -> String {
    let inner: Vec<String> = xs.iter().map(fmt_q).collect();
    format!("{{{}}}", inner.join(", "))
}

pub const SPECTRUM_COLUMNS: [&str; 6] = ["n", "phi_n", "Omega_n", "Gamma_0", "g", "ell"];

pub fn spectrum_row(r: &SpectrumReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.phi_n.render(),
        fmt_set(&r.omega_n),
        fmt_set(&r.gamma0),
        r.gap.to_string(),
        r.ell.to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("quotient-dims", &["n", "d", "dim"]);
        assert_eq!(r.table_body(), "n  d  dim\n-  -  ---\n");
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn columns_are_padded() {
        let mut r = Report::new("x", &["a", "long"]);
        r.push_row(vec!["1/2".into(), "0".into()]);
        assert_eq!(r.table_body(), "a    long\n---  ----\n1/2  0\n");
        r.degrade(Status::Inconclusive);
        r.degrade(Status::Pass);
        assert_eq!(r.status, Status::Inconclusive);
        r.degrade(Status::Fail);
        assert_eq!(r.status.exit_code(), 1);
    }
}
