//! CSV emission with a `#` header block.

use crate::config::RunConfig;

/// One command's output: free-form header notes, column names and rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub notes: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Rows whose computation failed.
    pub failures: usize,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut s = format!("# logkdv {} {}\n", env!("CARGO_PKG_VERSION"), cfg.command);
        s.push_str(&format!("# config_sha256: {}\n", cfg.sha256()));
        for line in cfg.canonical().lines() {
            s.push_str(&format!("# config: {line}\n"));
        }
        if cfg.has("grid") {
            s.push_str(&format!("# grid: {}\n", cfg.int("grid")));
        }
        let tols = cfg.tolerances();
        s.push_str(&format!("# tolerances: {}\n", if tols.is_empty() { "none" } else { &tols }));
        for n in &self.notes {
            s.push_str(&format!("# {n}\n"));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Fixed-width scientific notation, so output is byte-stable.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Echo of an input value in its shortest exact form.
pub fn input(x: f64) -> String {
    format!("{x:?}")
}

/// Error text made safe for a CSV cell.
pub fn cell(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "'"))
}
