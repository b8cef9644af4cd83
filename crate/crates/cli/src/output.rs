//! Tables, reports and plot data on disk.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{Format, OutputArgs};
use crate::error::CliError;

/// Shortest round-trip text, in scientific notation for very small or large
/// magnitudes.
pub fn number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-3..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Text(String::new()), Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.headers.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
        s.push('\n');
        s
    }
}

/// Output directory and table format of one run.
pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
    pub timing: bool,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(args: &OutputArgs) -> Result<Self, CliError> {
        std::fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Write {
            path: args.out_dir.clone(),
            source,
        })?;
        Ok(Self {
            dir: args.out_dir.clone(),
            format: args.format,
            timing: args.timing,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut f = std::fs::File::create(&path).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        f.write_all(contents.as_bytes()).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }

    pub fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        match self.format {
            Format::Csv => self.write(&format!("{stem}.csv"), &table.to_csv()?),
            Format::Json => self.write(&format!("{stem}.json"), &table.to_json()),
        }
    }

    pub fn report<T: Serialize>(&mut self, stem: &str, report: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(report).expect("serializable");
        s.push('\n');
        self.write(&format!("{stem}.json"), &s)
    }

    /// Whitespace-separated `x y value` lines.
    pub fn plot(&mut self, stem: &str, triples: &[(f64, f64, f64)]) -> Result<(), CliError> {
        let mut s = String::from("# x y value\n");
        for (x, y, v) in triples {
            s.push_str(&format!("{} {} {}\n", number(*x), number(*y), number(*v)));
        }
        self.write(&format!("{stem}.dat"), &s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(["name", "value", "n"]);
        t.push(vec!["a,b".into(), 0.25.into(), 3usize.into()]);
        t.push(vec!["c".into(), None.into(), 4usize.into()]);
        assert_eq!(t.to_csv().unwrap(), "name,value,n\n\"a,b\",0.25,3\nc,,4\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["value"], 0.25);
        assert_eq!(v[1]["value"], "");
        assert_eq!(v[1]["n"], 4);
    }
}
