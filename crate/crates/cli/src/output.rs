//! Tables rendered either as CSV (header plus rows, tables separated by a
//! blank line) or as JSON lines with one object per row.

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // Debug formatting is the shortest string that reads back to the same f64
            Cell::Real(v) => format!("{v:?}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Real(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

pub struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

#[derive(Default)]
pub struct Output {
    json: bool,
    text: String,
}

impl Output {
    pub fn new(json: bool) -> Self {
        Self { json, text: String::new() }
    }

    pub fn table(&mut self, table: Table) {
        if self.json {
            for row in &table.rows {
                let mut obj = Map::new();
                obj.insert("table".into(), Value::from(table.name));
                for (h, c) in table.header.iter().zip(row) {
                    obj.insert((*h).into(), c.json());
                }
                self.text.push_str(&Value::Object(obj).to_string());
                self.text.push('\n');
            }
            return;
        }
        if !self.text.is_empty() {
            self.text.push('\n');
        }
        self.text.push_str(&table.header.join(","));
        self.text.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            self.text.push_str(&cells.join(","));
            self.text.push('\n');
        }
    }

    /// Append preformatted text (text mode) or a serialized value (JSON mode).
    pub fn raw(&mut self, text: &str) {
        self.text.push_str(text);
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[macro_export]
macro_rules! cells {
    ($($v:expr),* $(,)?) => { vec![$($crate::output::Cell::from($v)),*] };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json() {
        let mut t = Table::new("pmf", &["n", "p"]);
        t.row(cells![0usize, 1.0]);
        t.row(cells![1usize, 1e-20]);
        let mut csv = Output::new(false);
        csv.table(t);
        assert_eq!(csv.into_string(), "n,p\n0,1.0\n1,1e-20\n");

        let mut t = Table::new("pmf", &["n", "p"]);
        t.row(cells![2usize, 0.5]);
        let mut json = Output::new(true);
        json.table(t);
        assert_eq!(json.into_string(), "{\"n\":2,\"p\":0.5,\"table\":\"pmf\"}\n");
    }

    #[test]
    fn round_trip_precision() {
        let v = 0.1 + 0.2;
        assert_eq!(Cell::Real(v).csv().parse::<f64>().unwrap(), v);
        assert_eq!(Cell::Text("a,b".into()).csv(), "\"a,b\"");
    }
}
