//! CSV and JSON writers. Floats carry 17 significant digits; non-finite
//! values are written as `NaN`/`inf` in CSV and `null` in JSON.

use crate::error::{CliError, CliResult};
use serde_json::{Map, Number, Value};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("`output.format` must be csv or json, got `{other}`"))),
        }
    }

    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt17(x).parse::<Number>().expect("formatted float parses"))
    } else {
        Value::Null
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table { name, columns: columns.to_vec(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(x) => fmt17(*x),
                    Cell::I(i) => i.to_string(),
                    Cell::S(t) => csv_field(t),
                })
                .collect();
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, subcommand: &str) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (k, c) in self.columns.iter().zip(row) {
                    let v = match c {
                        Cell::F(x) => json_f64(*x),
                        Cell::I(i) => Value::from(*i),
                        Cell::S(t) => Value::from(t.as_str()),
                    };
                    m.insert((*k).to_string(), v);
                }
                Value::Object(m)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("subcommand".into(), subcommand.into());
        doc.insert("table".into(), self.name.into());
        doc.insert("columns".into(), self.columns.iter().map(|c| Value::from(*c)).collect());
        doc.insert("rows".into(), Value::Array(rows));
        Value::Object(doc)
    }
}

/// Output directory that refuses to overwrite existing files unless forced.
pub struct OutputDir {
    root: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn new(root: &Path, force: bool) -> Self {
        OutputDir { root: root.to_path_buf(), force }
    }

    /// Checks every target before anything is written.
    pub fn claim(&self, names: &[String]) -> CliResult<()> {
        if self.force {
            return Ok(());
        }
        for n in names {
            let p = self.root.join(n);
            if p.exists() {
                return Err(CliError::Config(format!("{} exists; pass --force to overwrite", p.display())));
            }
        }
        Ok(())
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let io = |path: &Path, source| CliError::Io { path: path.display().to_string(), source };
        std::fs::create_dir_all(&self.root).map_err(|e| io(&self.root, e))?;
        let p = self.root.join(name);
        if p.exists() && !self.force {
            return Err(CliError::Config(format!("{} exists; pass --force to overwrite", p.display())));
        }
        std::fs::write(&p, contents).map_err(|e| io(&p, e))?;
        Ok(p)
    }

    pub fn write_table(&self, t: &Table, fmt: Format, subcommand: &str) -> CliResult<PathBuf> {
        let name = format!("{}.{}", t.name, fmt.ext());
        match fmt {
            Format::Csv => self.write(&name, &t.to_csv()),
            Format::Json => self.write(&name, &format!("{:#}\n", t.to_json(subcommand))),
        }
    }
}
