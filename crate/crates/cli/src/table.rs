//! Column-labelled result tables written as CSV behind a `# key: value`
//! metadata header.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("malformed metadata line `{0}`")]
    Metadata(String),
    #[error("row {row} has {got} cells, expected {expected}")]
    Width { row: usize, got: usize, expected: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Shortest text that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    v.to_string()
}

/// Empty cell for an undefined value.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric value of `name` in row `row`; `None` for empty or non-numeric cells.
    pub fn value(&self, row: usize, name: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column(name)?)?.parse().ok()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells"));
        out
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut metadata = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix('#') else { break };
            let rest = rest.trim_end_matches(['\r', '\n']);
            let rest = rest.strip_prefix(' ').unwrap_or(rest);
            let (k, v) = rest.split_once(": ").ok_or_else(|| TableError::Metadata(line.trim_end().to_owned()))?;
            metadata.push((k.to_owned(), v.to_owned()));
            body_start += line.len();
        }
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text[body_start..].as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(TableError::Width { row: i, got: rec.len(), expected: columns.len() });
            }
            rows.push(rec.iter().map(str::to_owned).collect());
        }
        Ok(Self { metadata, columns, rows })
    }
}
