use rayon::prelude::*;
use serde_json::Value;

use super::config::{parameters, RadicalPairParams, SweepParams};
use super::report::{Cell, Quantity, ScenarioOutput, Table, Validity};
use super::scenarios::pair_point;
use super::CliError;

pub const MAX_GRID_KEYS: usize = 3;
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Grid points in lexicographic order: keys sorted by name, the last key
/// varying fastest.
fn expand(grid: &SweepParams) -> Result<Vec<Vec<(&str, &Value)>>, CliError> {
    if grid.grid.is_empty() || grid.grid.len() > MAX_GRID_KEYS {
        return Err(CliError::validation(format!(
            "grid needs 1 to {MAX_GRID_KEYS} keys, got {}",
            grid.grid.len()
        )));
    }
    let mut total: usize = 1;
    for (k, vals) in &grid.grid {
        if vals.is_empty() {
            return Err(CliError::validation(format!("grid key {k:?} has no values")));
        }
        total = total.saturating_mul(vals.len());
    }
    if total > MAX_GRID_POINTS {
        return Err(CliError::validation(format!("grid has {total} points, limit is {MAX_GRID_POINTS}")));
    }
    let keys: Vec<(&String, &Vec<Value>)> = grid.grid.iter().collect();
    Ok((0..total)
        .map(|mut idx| {
            let mut point = vec![("", &Value::Null); keys.len()];
            for (slot, (k, vals)) in keys.iter().enumerate().rev() {
                point[slot] = (k.as_str(), &vals[idx % vals.len()]);
                idx /= vals.len();
            }
            point
        })
        .collect())
}

fn cell(v: &Value) -> Cell {
    match v {
        Value::Number(n) => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => Cell::Text(s.clone()),
        other => Cell::Text(other.to_string()),
    }
}

pub fn sweep(params: &SweepParams) -> Result<ScenarioOutput, CliError> {
    let points = expand(params)?;
    let configs: Vec<RadicalPairParams> = points
        .iter()
        .map(|point| {
            let mut merged = params.base.clone();
            for (k, v) in point {
                merged.insert(k.to_string(), (*v).clone());
            }
            parameters(&Value::Object(merged))
        })
        .collect::<Result<_, _>>()?;

    let results: Vec<(Vec<f64>, Validity)> = configs
        .par_iter()
        .map(|p| {
            let r = pair_point(p)?;
            let nan = f64::NAN;
            Ok((
                vec![
                    r.yields.phi_s,
                    r.yields.phi_t,
                    r.coherence.map_or(nan, |c| c.rate),
                    r.xi.map_or(nan, |x| x.xi),
                ],
                r.validity,
            ))
        })
        .collect::<Result<_, CliError>>()?;

    let mut columns: Vec<String> = params.grid.keys().cloned().collect();
    columns.extend(["Phi_S", "Phi_T", "coherence_rate_per_s", "xi"].map(String::from));
    let rows = points
        .iter()
        .zip(&results)
        .map(|(point, (vals, _))| {
            let mut row: Vec<Cell> = point.iter().map(|(_, v)| cell(v)).collect();
            row.extend(vals.iter().map(|&x| Cell::Num(x)));
            row
        })
        .collect();

    let worst = results
        .iter()
        .map(|(_, v)| v)
        .max_by(|a, b| a.ratio.value.total_cmp(&b.ratio.value))
        .cloned();
    let mut out = ScenarioOutput::default();
    out.put("n_points", Quantity::new(points.len() as f64, "count"));
    out.validity = worst;
    out.table = Some(Table { columns, rows });
    Ok(out)
}
