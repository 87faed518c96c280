//! CSV and JSON export of value tables (schema `value-table v1`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use super::{Value, ValueTable};
use crate::adversary::VertexRecord;
use crate::error::{Error, Result};

pub const SCHEMA_LINE: &str = "# minimax-experts value-table v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            _ => Err(Error::InvalidInput(format!("unknown format {s:?} (csv or json)"))),
        }
    }
}

#[derive(Serialize)]
struct Row {
    gaps: Vec<u32>,
    remaining_or_inf: String,
    value_num: String,
    value_den_or_float: String,
    best_action_ids: Vec<usize>,
}

fn rows(table: &ValueTable) -> impl Iterator<Item = Row> + '_ {
    table.entries.iter().map(|e| {
        let (num, den) = match &e.value {
            Value::Exact(r) => (r.numer().to_string(), r.denom().to_string()),
            Value::Float(v) => (String::new(), format!("{v:e}")),
        };
        Row {
            gaps: e.gaps.clone(),
            remaining_or_inf: e.remaining.map_or("inf".into(), |l| l.to_string()),
            value_num: num,
            value_den_or_float: den,
            best_action_ids: e.best_actions.clone(),
        }
    })
}

fn gap_columns(k: usize) -> Vec<String> {
    (2..=k).map(|j| format!("d1{j}")).collect()
}

pub fn write_csv<W: Write>(table: &ValueTable, mut out: W) -> Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = gap_columns(table.k);
    header.extend(
        [
            "remaining_or_inf",
            "value_num",
            "value_den_or_float",
            "best_action_ids",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for row in rows(table) {
        let mut rec: Vec<String> = row.gaps.iter().map(|g| g.to_string()).collect();
        rec.push(row.remaining_or_inf);
        rec.push(row.value_num);
        rec.push(row.value_den_or_float);
        rec.push(
            row.best_action_ids
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn table_csv(table: &ValueTable) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(table, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Export(e.to_string()))
}

pub fn table_json(table: &ValueTable) -> Result<serde_json::Value> {
    let vertices: Vec<VertexRecord> = table.vertices.iter().map(|v| v.to_record()).collect();
    let rows: Vec<Row> = rows(table).collect();
    Ok(json!({
        "schema": "value-table",
        "version": 1,
        "k": table.k,
        "horizon": table.horizon,
        "gap_columns": gap_columns(table.k),
        "gap_cap": table.gap_cap,
        "truncation_bound": table.truncation_bound,
        "vertices": vertices,
        "rows": rows,
    }))
}

pub fn write_table(table: &ValueTable, path: &Path, format: TableFormat) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        TableFormat::Csv => write_csv(table, &mut out)?,
        TableFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &table_json(table)?)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_finite, solve_geometric};

    #[test]
    fn finite_csv_layout() {
        let t = solve_finite(2, 1).unwrap();
        let csv = table_csv(&t).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SCHEMA_LINE));
        assert_eq!(
            lines.next(),
            Some("d12,remaining_or_inf,value_num,value_den_or_float,best_action_ids")
        );
        // layer 0, then gaps 0 and 1 with one round left
        assert_eq!(lines.next(), Some("0,0,0,1,0;1;2"));
        assert_eq!(lines.next(), Some("0,1,1,2,2"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn geometric_json_mirrors_csv() {
        let t = solve_geometric(2, 0.5, 40, 1e-6).unwrap();
        let j = table_json(&t).unwrap();
        assert_eq!(j["rows"].as_array().unwrap().len(), t.entries.len());
        assert_eq!(j["rows"][0]["remaining_or_inf"], "inf");
        assert_eq!(j["rows"][0]["value_num"], "");
        let csv = table_csv(&t).unwrap();
        assert_eq!(csv.lines().count(), t.entries.len() + 2);
        assert_eq!(j["vertices"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("CSV".parse::<TableFormat>().unwrap(), TableFormat::Csv);
        assert!("xml".parse::<TableFormat>().is_err());
    }
}
