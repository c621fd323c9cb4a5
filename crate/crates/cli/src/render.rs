use caching_core::rational::{approx, format, Rational};
use serde_json::Value;

/// Rows for the human-readable format.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let cols = self.header.len();
        let mut width = vec![0; cols];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |row: &[String]| {
            row.iter()
                .zip(&width)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        out.push_str(&width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
        for row in &self.rows {
            out.push('\n');
            out.push_str(&line(row));
        }
        out.push('\n');
        out
    }
}

/// A command result in both output formats.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub table: Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Style {
    pub approx: bool,
}

/// Builds a two-column table; rational fields get a decimal column when
/// `approx` is set.
pub struct KeyValue {
    style: Style,
    table: Table,
}

const APPROX_HEADER: &str = "approx (not exact)";

impl KeyValue {
    pub fn new(style: Style) -> Self {
        let table = if style.approx {
            Table::new(&["field", "value", APPROX_HEADER])
        } else {
            Table::new(&["field", "value"])
        };
        KeyValue { style, table }
    }

    pub fn text(&mut self, field: &str, value: impl ToString) -> &mut Self {
        let mut row = vec![field.to_string(), value.to_string()];
        if self.style.approx {
            row.push(String::new());
        }
        self.table.push(row);
        self
    }

    pub fn rational(&mut self, field: &str, value: &Rational) -> &mut Self {
        let mut row = vec![field.to_string(), format(value)];
        if self.style.approx {
            row.push(approx(value, 6));
        }
        self.table.push(row);
        self
    }

    pub fn finish(&mut self) -> Table {
        std::mem::take(&mut self.table)
    }
}

/// Adds `"approx"` next to the exact `"p/q"` fields of a JSON object.
pub fn with_approx(mut json: Value, style: Style, fields: &[(&str, &Rational)]) -> Value {
    if style.approx {
        let approx_map: serde_json::Map<String, Value> = fields
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(approx(v, 6))))
            .collect();
        if let Value::Object(m) = &mut json {
            m.insert("approx_not_exact".into(), Value::Object(approx_map));
        }
    }
    json
}

#[cfg(test)]
mod tests {
    use super::*;
    use caching_core::rational::ratio;

    #[test]
    fn columns_line_up() {
        let mut t = Table::new(&["a", "long header"]);
        t.push(vec!["wide cell".into(), "x".into()]);
        assert_eq!(t.render(), "a          long header\n---------  -----------\nwide cell  x\n");
    }

    #[test]
    fn approx_column_only_on_request() {
        let t = KeyValue::new(Style { approx: true }).rational("value", &ratio(2, 3)).finish();
        assert_eq!(t.rows[0], vec!["value", "2/3", "0.666667"]);
        let t = KeyValue::new(Style::default()).rational("value", &ratio(2, 3)).finish();
        assert_eq!(t.rows[0].len(), 2);
    }
}
