//! CSV tables with a commented metadata header.
//!
//! A header looks like
//!
//! ```text
//! # ediqkd 0.1.0
//! # command: secrecy
//! # d_at_0.069: 0.2827
//! # --- config
//! # seed = 1
//! # [secrecy]
//! # ...
//! ```
//!
//! The lines after `--- config` form the resolved configuration; feeding
//! them back through `--config` regenerates the table.

use std::io::Write;

use crate::config::RunConfig;
use crate::error::{AppError, AppResult};

pub const CONFIG_MARKER: &str = "--- config";

/// Column names of every CSV the tool writes.
pub mod schema {
    pub const OMEGA: &[&str] = &["xi", "mu", "omega"];
    pub const RATE: &[&str] = &["Q", "r_ediqkd", "r_diqkd"];
    pub const FINITE: &[&str] = &["Q", "n", "r_ediqkd", "r_diqkd"];
    pub const EFACTOR: &[&str] = &[
        "Q",
        "n_ediqkd",
        "n_diqkd",
        "E_f",
        "log10_n_ediqkd",
        "log10_n_diqkd",
        "log10_E_f",
    ];
    pub const SECRECY: &[&str] = &["Q", "D", "I_AE_numeric", "I_AE_closedform"];
    pub const PHOTONIC: &[&str] = &[
        "f_source",
        "preprocessing",
        "eta",
        "r_opt",
        "alpha_deg",
        "mu",
        "p_post",
        "p_noise",
        "f_expt",
        "qber",
        "certified",
    ];
    pub const EFACTOR_ETA: &[&str] = &[
        "eta",
        "n_ediqkd",
        "n_diqkd",
        "E_f",
        "log10_n_ediqkd",
        "log10_n_diqkd",
        "log10_E_f",
    ];
    pub const SURFACE: &[&str] = &["eta", "n", "r_ediqkd", "r_diqkd", "certified"];
    pub const STATS: &[&str] = &["i", "a", "j", "b", "probability", "count"];
    pub const RECORDS: &[&str] = &["k", "i", "a", "j", "b", "kind"];
}

/// Shortest text that parses back to the same value.
pub fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Parsed numeric column; empty cells are `None`.
    pub fn values(&self, name: &str) -> Vec<Option<f64>> {
        let c = self.column(name).expect("known column");
        self.rows.iter().map(|r| r[c].parse().ok()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub command: String,
    pub notes: Vec<(String, String)>,
    pub config: RunConfig,
}

impl Header {
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("ediqkd {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", self.command),
        ];
        out.extend(self.notes.iter().map(|(k, v)| format!("{k}: {v}")));
        out.push(CONFIG_MARKER.to_string());
        out.extend(self.config.to_toml().lines().map(str::to_string));
        out
    }
}

pub fn write_csv(w: &mut dyn Write, header: &Header, table: &Table) -> AppResult<()> {
    for line in header.lines() {
        if line.is_empty() {
            writeln!(w, "#")?;
        } else {
            writeln!(w, "# {line}")?;
        }
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(table.columns)?;
    for row in &table.rows {
        csv.write_record(row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Header comment lines (without `# `), column names and rows.
pub type CsvParts = (Vec<String>, Vec<String>, Vec<Vec<String>>);

/// Reads back a CSV written by [`write_csv`].
pub fn read_csv(text: &str) -> AppResult<CsvParts> {
    let comments: Vec<String> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').strip_prefix(' ').unwrap_or("").to_string())
        .collect();
    let body: String = text.lines().skip(comments.len()).flat_map(|l| [l, "\n"]).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let columns = rdr.headers()?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((comments, columns, rows))
}

/// The configuration embedded in a header.
pub fn header_config(comments: &[String]) -> AppResult<RunConfig> {
    let start = comments
        .iter()
        .position(|l| l == CONFIG_MARKER)
        .ok_or_else(|| AppError::Config("no configuration in header".into()))?;
    RunConfig::parse(&comments[start + 1..].join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SecrecyConfig;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, 0.1, 1.0 / 3.0, 1e-7, 2.5e20, -3e-9, 0.8535533905932738] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1e-5), "1e-5");
        assert_eq!(num(0.25), "0.25");
    }

    #[test]
    fn header_and_rows_round_trip() {
        let header = Header {
            command: "secrecy".into(),
            notes: vec![("note".into(), "a, b".into())],
            config: RunConfig {
                seed: Some(4),
                secrecy: Some(SecrecyConfig::default()),
                ..RunConfig::default()
            },
        };
        let mut t = Table::new(schema::SECRECY);
        t.push(vec!["0".into(), "0".into(), "0".into(), "x,\"y\"".into()]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &header, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (comments, cols, rows) = read_csv(&text).unwrap();
        assert_eq!(cols, schema::SECRECY);
        assert_eq!(rows, t.rows);
        assert_eq!(header_config(&comments).unwrap(), header.config);
        assert!(comments.contains(&"note: a, b".to_string()));
    }
}
