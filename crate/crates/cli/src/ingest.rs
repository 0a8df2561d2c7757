//! CSV tables in and out.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use gdpack_core::bitmatrix::{ColumnKind, Precision};
use gdpack_core::{Column, ColumnData, Table};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Int,
    F32,
    F64,
}

impl Kind {
    pub fn parse(s: &str) -> Result<Kind, String> {
        match s {
            "int" | "i64" | "integer" => Ok(Kind::Int),
            "f32" | "float32" => Ok(Kind::F32),
            "f64" | "float" | "float64" => Ok(Kind::F64),
            _ => Err(format!("unknown column kind '{s}' (expected int, f32 or f64)")),
        }
    }

    pub fn of(kind: ColumnKind, precision: Precision) -> Kind {
        match (kind, precision) {
            (ColumnKind::Integer, _) => Kind::Int,
            (ColumnKind::Float, Precision::Bits32) => Kind::F32,
            (ColumnKind::Float, Precision::Bits64) => Kind::F64,
        }
    }
}

/// Parses `name=kind` into an override entry.
pub fn parse_override(s: &str) -> Result<(String, Kind), String> {
    let (name, kind) = s
        .split_once('=')
        .ok_or_else(|| format!("column kind override '{s}' is not NAME=KIND"))?;
    Ok((name.to_string(), Kind::parse(kind)?))
}

#[derive(Debug)]
pub enum IngestError {
    Io(String),
    Write(String),
    Csv(String),
    Cell { row: usize, column: String, value: String, kind: Kind },
    UnknownColumn(String),
    Empty,
    Table(String),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Io(e) => write!(f, "cannot read input: {e}"),
            IngestError::Write(e) => write!(f, "cannot write table: {e}"),
            IngestError::Csv(e) => write!(f, "malformed CSV: {e}"),
            IngestError::Cell { row, column, value, kind } => {
                let what = match kind {
                    Kind::Int => "an integer",
                    _ => "a number",
                };
                write!(f, "row {row}, column '{column}': cannot parse '{value}' as {what}")
            }
            IngestError::UnknownColumn(c) => write!(f, "column '{c}' does not exist in the input"),
            IngestError::Empty => write!(f, "input has no data rows"),
            IngestError::Table(e) => write!(f, "{e}"),
        }
    }
}

/// Reads a headed CSV. A column is integer when every cell parses as i64,
/// otherwise f64, unless `overrides` names it. Rows are numbered from 1,
/// the header excluded.
pub fn read_table(
    reader: impl Read,
    overrides: &BTreeMap<String, Kind>,
) -> Result<Table, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if let Some(missing) = overrides.keys().find(|k| !names.contains(k)) {
        return Err(IngestError::UnknownColumn(missing.clone()));
    }
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        for (c, field) in record.iter().enumerate() {
            cells[c].push(field.to_string());
        }
    }
    if cells.first().is_none_or(Vec::is_empty) {
        return Err(IngestError::Empty);
    }
    let mut columns = Vec::with_capacity(names.len());
    for (name, raw) in names.iter().zip(&cells) {
        let kind = match overrides.get(name) {
            Some(&k) => k,
            None if raw.iter().all(|v| v.parse::<i64>().is_ok()) => Kind::Int,
            None => Kind::F64,
        };
        let bad = |row: usize| IngestError::Cell {
            row: row + 1,
            column: name.clone(),
            value: raw[row].clone(),
            kind,
        };
        let data = match kind {
            Kind::Int => ColumnData::Int(
                raw.iter()
                    .enumerate()
                    .map(|(r, v)| v.parse().map_err(|_| bad(r)))
                    .collect::<Result<_, _>>()?,
            ),
            Kind::F32 => ColumnData::F32(
                raw.iter()
                    .enumerate()
                    .map(|(r, v)| v.parse().map_err(|_| bad(r)))
                    .collect::<Result<_, _>>()?,
            ),
            Kind::F64 => ColumnData::F64(
                raw.iter()
                    .enumerate()
                    .map(|(r, v)| v.parse().map_err(|_| bad(r)))
                    .collect::<Result<_, _>>()?,
            ),
        };
        columns.push(Column::new(name.clone(), data));
    }
    Table::new(columns).map_err(|e| IngestError::Table(e.to_string()))
}

pub fn read_table_file(
    path: &Path,
    overrides: &BTreeMap<String, Kind>,
) -> Result<Table, IngestError> {
    let file = std::fs::File::open(path)
        .map_err(|e| IngestError::Io(format!("{}: {e}", path.display())))?;
    read_table(std::io::BufReader::new(file), overrides)
}

pub fn kinds_of(table: &Table) -> Vec<(String, Kind)> {
    table
        .columns()
        .iter()
        .map(|c| {
            let k = match c.data {
                ColumnData::Int(_) => Kind::Int,
                ColumnData::F32(_) => Kind::F32,
                ColumnData::F64(_) => Kind::F64,
            };
            (c.name.clone(), k)
        })
        .collect()
}

/// Text form of one cell. Floats use the shortest representation that
/// parses back to the same bits and always carry a '.' or exponent, so a
/// re-read keeps them floats.
pub fn format_cell(data: &ColumnData, row: usize) -> String {
    match data {
        ColumnData::Int(v) => v[row].to_string(),
        ColumnData::F32(v) => format!("{:?}", v[row]),
        ColumnData::F64(v) => format!("{:?}", v[row]),
    }
}

pub fn write_table(table: &Table, writer: impl Write) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| IngestError::Write(e.to_string());
    w.write_record(table.columns().iter().map(|c| c.name.as_str())).map_err(io)?;
    let mut record = Vec::with_capacity(table.width());
    for r in 0..table.rows() {
        record.clear();
        record.extend(table.columns().iter().map(|c| format_cell(&c.data, r)));
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| IngestError::Write(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<Table, IngestError> {
        read_table(text.as_bytes(), &BTreeMap::new())
    }

    #[test]
    fn kinds_are_detected() {
        let t = read("a,b\n1,2.5\n-3,4\n").unwrap();
        assert_eq!(kinds_of(&t), vec![("a".into(), Kind::Int), ("b".into(), Kind::F64)]);
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let err = read("a,b\n1,2\n3,x7\n").unwrap_err().to_string();
        assert_eq!(err, "row 2, column 'b': cannot parse 'x7' as a number");
    }

    #[test]
    fn override_must_name_a_column() {
        let o = BTreeMap::from([("zz".to_string(), Kind::F32)]);
        assert!(matches!(read_table("a\n1\n".as_bytes(), &o), Err(IngestError::UnknownColumn(_))));
    }

    #[test]
    fn written_floats_read_back_bit_exact() {
        let t = Table::new(vec![
            Column::new("f", ColumnData::F64(vec![-0.0, 1.0, 1e-300, 0.1 + 0.2, f64::MAX])),
            Column::new("i", ColumnData::Int(vec![i64::MIN, 0, 5, -5, i64::MAX])),
        ])
        .unwrap();
        let mut out = Vec::new();
        write_table(&t, &mut out).unwrap();
        let back = read_table(out.as_slice(), &BTreeMap::new()).unwrap();
        assert_eq!(back, t);
    }
}
