//! Rendering of rows as JSON, CSV or an aligned text table.

use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// A rectangular result: header plus string cells, with a JSON form alongside.
pub struct Tabular {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Tabular {
    pub fn new(header: Vec<&'static str>) -> Self {
        Tabular { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn table(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(self.header.clone());
        out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect()));
        for row in &self.rows {
            out.push_str(&line(row.iter().map(|s| s.as_str()).collect()));
        }
        out
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output") + "\n"
}

/// Picks the projection of `value` for the requested format.
pub fn render<T: Serialize>(format: Format, value: &T, tab: &Tabular) -> String {
    match format {
        Format::Json => json(value),
        Format::Csv => tab.csv(),
        Format::Table => tab.table(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections() {
        let mut t = Tabular::new(vec!["d", "value"]);
        t.push(vec!["3".into(), "-1/3".into()]);
        t.push(vec!["12".into(), "a,b".into()]);
        assert_eq!(t.csv(), "d,value\n3,-1/3\n12,\"a,b\"\n");
        assert_eq!(t.table(), " d  value\n--  -----\n 3   -1/3\n12    a,b\n");
    }
}
