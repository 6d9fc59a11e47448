use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use relaxkin::bloch_redfield::ValidityReport;
use serde::Serialize;

use super::config::{Format, ScenarioConfig};
use super::CliError;

/// Rounds to 12 significant digits so printed outputs are stable.
pub fn sig12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string().to_lowercase()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
}

impl Quantity {
    pub fn new(value: f64, unit: &'static str) -> Self {
        Self { value: sig12(value), unit, error: None }
    }

    pub fn with_error(value: f64, error: f64, unit: &'static str) -> Self {
        Self { value: sig12(value), unit, error: Some(sig12(error)) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Validity {
    pub ratio: Quantity,
    pub tau_c: Quantity,
    pub status: relaxkin::bloch_redfield::ValidityStatus,
}

impl Validity {
    pub fn new(report: ValidityReport, tau_c: f64) -> Self {
        Self { ratio: Quantity::new(report.ratio, "1"), tau_c: Quantity::new(tau_c, "s"), status: report.status }
    }
}

/// Column-oriented numeric table with a fixed column order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Self::Num(x) => fmt12(*x),
            Self::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Cell {
        match self {
            Self::Num(x) => Self::Num(sig12(*x)),
            Self::Text(s) => Self::Text(s.clone()),
        }
    }
}

impl Table {
    /// Keeps the first column plus the requested ones, in request order.
    pub fn select(self, wanted: Option<&[String]>) -> Result<Self, CliError> {
        let Some(wanted) = wanted else { return Ok(self) };
        let mut idx = vec![0];
        for name in wanted {
            match self.columns.iter().position(|c| c == name) {
                Some(0) => {}
                Some(i) => idx.push(i),
                None => {
                    return Err(CliError::validation(format!(
                        "unknown observable {name:?}; available: {}",
                        self.columns[1..].join(", ")
                    )))
                }
            }
        }
        Ok(Self {
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            rows: self.rows.into_iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            columns: &'a [String],
            rows: Vec<Vec<Cell>>,
        }
        let rows = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let mut s = serde_json::to_string_pretty(&Doc { columns: &self.columns, rows }).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// What a scenario hands back before anything touches the disk.
#[derive(Clone, Debug, Default)]
pub struct ScenarioOutput {
    pub outputs: BTreeMap<String, Quantity>,
    pub flags: BTreeMap<String, bool>,
    pub validity: Option<Validity>,
    pub table: Option<Table>,
}

impl ScenarioOutput {
    pub fn put(&mut self, name: &str, q: Quantity) {
        self.outputs.insert(name.to_string(), q);
    }

    pub fn flag(&mut self, name: &str, v: bool) {
        self.flags.insert(name.to_string(), v);
    }
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub inputs: &'a ScenarioConfig,
    pub outputs: &'a BTreeMap<String, Quantity>,
    pub flags: &'a BTreeMap<String, bool>,
    pub validity: &'a Option<Validity>,
    pub wall_time_s: Quantity,
}

/// Writes `summary.json` and, if present, the table as `<stem>.csv|json`.
pub fn write_all(
    dir: &Path,
    summary: &Summary<'_>,
    table: Option<(&str, &Table)>,
    format: Format,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    let io = |e: std::io::Error| CliError::io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut written = Vec::new();
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    let path = dir.join("summary.json");
    std::fs::write(&path, text).map_err(io)?;
    written.push(path);
    if let Some((stem, t)) = table {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let path = dir.join(format!("{stem}.{ext}"));
        std::fs::write(&path, t.render(format)).map_err(io)?;
        written.push(path);
    }
    Ok(written)
}
