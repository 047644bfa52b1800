//! CSV and JSON writers.
//!
//! Every float is written with 17 significant digits in exponent form so that
//! reruns are byte-identical and values round-trip exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::args::Format;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table held as rendered text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    body: String,
    rows: usize,
}

pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            body: String::new(),
            rows: 0,
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        let rendered: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(x) => float(x),
                Cell::Text(s) => s,
            })
            .collect();
        let _ = writeln!(self.body, "{}", rendered.join(","));
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }
}

/// One named piece of a command's result.
pub struct Part {
    pub label: String,
    pub table: Table,
    pub json: Value,
}

/// `foo.csv` + `low` -> `foo.low.csv`.
pub fn labelled_path(base: &Path, label: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let file = format!("{stem}.{label}.{ext}");
    base.with_file_name(file)
}

/// Writes the parts and returns the paths written (empty for stdout).
pub fn emit(parts: &[Part], meta: Value, format: Format, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    match format {
        Format::Json => {
            let data = if parts.len() == 1 {
                parts[0].json.clone()
            } else {
                Value::Object(parts.iter().map(|p| (p.label.clone(), p.json.clone())).collect())
            };
            let mut text = serde_json::to_string_pretty(&json!({ "meta": meta, "data": data }))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            text.push('\n');
            match out {
                Some(path) => {
                    std::fs::write(path, text)?;
                    Ok(vec![path.to_path_buf()])
                }
                None => {
                    print!("{text}");
                    Ok(Vec::new())
                }
            }
        }
        Format::Csv => match (out, parts.len()) {
            (None, 1) => {
                print!("{}", parts[0].table.to_csv());
                Ok(Vec::new())
            }
            (None, _) => Err(CliError::Usage(
                "this command writes several CSV files; pass --out PATH".into(),
            )),
            (Some(path), 1) => {
                std::fs::write(path, parts[0].table.to_csv())?;
                Ok(vec![path.to_path_buf()])
            }
            (Some(path), _) => parts
                .iter()
                .map(|p| {
                    let target = labelled_path(path, &p.label, Format::Csv);
                    std::fs::write(&target, p.table.to_csv())?;
                    Ok(target)
                })
                .collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_mantissa() {
        assert_eq!(float(0.5), "5.0000000000000000e-1");
        assert_eq!(float(1.0), "1.0000000000000000e0");
        let x = 0.1 + 0.2;
        assert_eq!(float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn table_rendering() {
        let mut t = Table::new(&["step", "value"]);
        t.push(vec![1usize.into(), 0.25.into()]);
        assert_eq!(t.to_csv(), "step,value\n1,2.5000000000000000e-1\n");
        assert_eq!(t.rows(), 1);
    }

    #[test]
    fn labels_go_before_extension() {
        let p = labelled_path(Path::new("/tmp/run/map.csv"), "n4", Format::Csv);
        assert_eq!(p, Path::new("/tmp/run/map.n4.csv"));
        let p = labelled_path(Path::new("out"), "low", Format::Csv);
        assert_eq!(p, Path::new("out.low.csv"));
    }
}
