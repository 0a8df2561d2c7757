//! Fixed-width binary chunk view of a numeric table.
//!
//! Every column is mapped to unsigned integers by subtracting its minimum
//! (after decimal scaling for float columns). A row's chunk is the
//! concatenation of its column values in input order, most significant bit
//! first, so bit position `0` is the MSB of the first column.
//!
//! Positions are zero-based throughout the crate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GdError, Result};

/// Largest power-of-ten exponent tried when scaling float columns.
pub const DECIMAL_SCALE_CAP: u8 = 9;

// Integers above this magnitude are not exactly representable as f64.
const F64_EXACT_INT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone)]
pub enum ColumnData {
    Int(Vec<i64>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int(v) => v.len(),
            ColumnData::F32(v) => v.len(),
            ColumnData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Int(_) => ColumnKind::Integer,
            _ => ColumnKind::Float,
        }
    }

    /// Value at `row` widened to f64 (lossy for very large integers).
    pub fn get_f64(&self, row: usize) -> f64 {
        match self {
            ColumnData::Int(v) => v[row] as f64,
            ColumnData::F32(v) => v[row] as f64,
            ColumnData::F64(v) => v[row],
        }
    }

    /// Bit-exact equality of one cell. Kinds must match.
    pub fn cell_eq(&self, other: &ColumnData, row: usize) -> bool {
        match (self, other) {
            (ColumnData::Int(a), ColumnData::Int(b)) => a[row] == b[row],
            (ColumnData::F32(a), ColumnData::F32(b)) => a[row].to_bits() == b[row].to_bits(),
            (ColumnData::F64(a), ColumnData::F64(b)) => a[row].to_bits() == b[row].to_bits(),
            _ => false,
        }
    }

    /// Storage width of one value in bytes.
    pub fn value_bytes(&self) -> usize {
        match self {
            ColumnData::Int(v) => {
                if v.iter().all(|&x| i32::try_from(x).is_ok()) {
                    4
                } else {
                    8
                }
            }
            ColumnData::F32(_) => 4,
            ColumnData::F64(_) => 8,
        }
    }

    /// Little-endian bytes of every value at its native width.
    pub fn write_le(&self, out: &mut Vec<u8>) {
        match self {
            ColumnData::Int(v) => {
                if self.value_bytes() == 4 {
                    v.iter().for_each(|&x| out.extend_from_slice(&(x as i32).to_le_bytes()));
                } else {
                    v.iter().for_each(|&x| out.extend_from_slice(&x.to_le_bytes()));
                }
            }
            ColumnData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            ColumnData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Column {
            name: name.into(),
            data,
        }
    }
}

/// A non-empty rectangular numeric table.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<Column>,
    rows: usize,
}

/// First cell at which two tables differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub row: usize,
    pub column: usize,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let rows = columns.first().map(|c| c.data.len()).unwrap_or(0);
        if columns.is_empty() || rows == 0 {
            return Err(GdError::EmptyTable);
        }
        for (i, c) in columns.iter().enumerate() {
            if c.data.len() != rows {
                return Err(GdError::RaggedTable {
                    column: i,
                    expected: rows,
                    found: c.data.len(),
                });
            }
        }
        Ok(Table { columns, rows })
    }

    /// Float table from row-major data; columns are named `c0`, `c1`, ...
    pub fn from_rows_f64(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut cols = vec![Vec::with_capacity(rows.len()); d];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(GdError::InvalidParameter(format!(
                    "row {r} has {} values, expected {d}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                cols[c].push(v);
            }
        }
        Table::new(
            cols.into_iter()
                .enumerate()
                .map(|(i, v)| Column::new(format!("c{i}"), ColumnData::F64(v)))
                .collect(),
        )
    }

    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut cols = vec![Vec::with_capacity(rows.len()); d];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(GdError::InvalidParameter(format!(
                    "row {r} has {} values, expected {d}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                cols[c].push(v);
            }
        }
        Table::new(
            cols.into_iter()
                .enumerate()
                .map(|(i, v)| Column::new(format!("c{i}"), ColumnData::Int(v)))
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    /// Row-major f64 copy of the whole table, `rows × width`.
    pub fn to_points(&self) -> Vec<f64> {
        let d = self.width();
        let mut out = vec![0.0; self.rows * d];
        for (c, col) in self.columns.iter().enumerate() {
            for r in 0..self.rows {
                out[r * d + c] = col.data.get_f64(r);
            }
        }
        out
    }

    /// Size of the table stored as packed native-width binary values.
    pub fn raw_size_bytes(&self) -> usize {
        self.columns
            .iter()
            .map(|c| c.data.value_bytes() * self.rows)
            .sum()
    }

    /// Row-major little-endian binary rendering used for external compressors.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.raw_size_bytes());
        for c in &self.columns {
            c.data.write_le(&mut out);
        }
        out
    }

    pub fn first_mismatch(&self, other: &Table) -> Option<Mismatch> {
        if self.width() != other.width() || self.rows != other.rows {
            return Some(Mismatch {
                row: self.rows.min(other.rows),
                column: 0,
            });
        }
        for r in 0..self.rows {
            for (c, (a, b)) in self.columns.iter().zip(&other.columns).enumerate() {
                if !a.data.cell_eq(&b.data, r) {
                    return Some(Mismatch { row: r, column: c });
                }
            }
        }
        None
    }
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.first_mismatch(other).is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Integer,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    Bits32,
    Bits64,
}

/// How a column's values were turned into unsigned integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    /// Integer minus column minimum.
    Offset,
    /// `round(v * 10^k)` minus its minimum.
    Decimal,
    /// Order-preserving reinterpretation of the IEEE-754 bits, minus minimum.
    RawBits,
}

/// Float quantization policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FloatMode {
    /// Decimal scaling, falling back to raw bits when no exponent up to the
    /// cap is exact.
    #[default]
    Auto,
    /// Decimal scaling only; columns that need raw bits are rejected.
    Decimal,
    /// Always reinterpret float bits.
    RawBits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnParams {
    pub kind: ColumnKind,
    pub precision: Precision,
    pub encoding: Encoding,
    pub decimal_scale: u8,
    pub offset: i128,
    pub bit_width: u8,
}

impl ColumnParams {
    /// Original-domain value of one least significant unit, if the mapping
    /// is affine.
    pub fn quantum(&self) -> Option<f64> {
        match self.encoding {
            Encoding::Offset => Some(1.0),
            Encoding::Decimal => Some(10f64.powi(-(self.decimal_scale as i32))),
            Encoding::RawBits => None,
        }
    }

    /// Largest value storable in `bit_width` bits.
    pub fn max_value(&self) -> u64 {
        if self.bit_width >= 64 {
            u64::MAX
        } else {
            (1u64 << self.bit_width) - 1
        }
    }

    /// Maps a (possibly fractional) quantized value back to the original
    /// domain. Raw-bits columns round to the nearest key first.
    pub fn to_original(&self, q: f64) -> f64 {
        match self.encoding {
            Encoding::Offset => q + self.offset as f64,
            Encoding::Decimal => (q + self.offset as f64) / 10f64.powi(self.decimal_scale as i32),
            Encoding::RawBits => {
                let key = q.round().clamp(0.0, u64::MAX as f64) as u64;
                self.raw_key_to_f64(key)
            }
        }
    }

    /// Original-domain value of an exact quantized integer.
    pub fn decode_f64(&self, q: u64) -> f64 {
        match self.encoding {
            Encoding::RawBits => self.raw_key_to_f64(q),
            _ => self.to_original(q as f64),
        }
    }

    /// Quantized key for an original-domain float in a raw-bits column,
    /// clamped into the column's representable range.
    pub fn raw_key_of(&self, v: f64) -> u64 {
        let key = match self.precision {
            Precision::Bits32 => f32_key(v as f32) as i128,
            Precision::Bits64 => f64_key(v) as i128,
        };
        (key - self.offset).clamp(0, self.max_value() as i128) as u64
    }

    fn raw_key_to_f64(&self, q: u64) -> f64 {
        let key = (q as i128 + self.offset) as u64;
        match self.precision {
            Precision::Bits32 => f32_from_key(key as u32) as f64,
            Precision::Bits64 => f64_from_key(key),
        }
    }
}

fn f64_key(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn f64_from_key(key: u64) -> f64 {
    if key >> 63 == 1 {
        f64::from_bits(key & !(1 << 63))
    } else {
        f64::from_bits(!key)
    }
}

fn f32_key(v: f32) -> u32 {
    let bits = v.to_bits();
    if bits >> 31 == 1 {
        !bits
    } else {
        bits | (1 << 31)
    }
}

fn f32_from_key(key: u32) -> f32 {
    if key >> 31 == 1 {
        f32::from_bits(key & !(1 << 31))
    } else {
        f32::from_bits(!key)
    }
}

/// Number of bits needed to store `x`, at least one.
pub fn bits_needed(x: u64) -> u8 {
    (64 - x.leading_zeros()).max(1) as u8
}

/// `n` rows rendered as fixed-width chunks, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    rows: usize,
    names: Vec<String>,
    params: Vec<ColumnParams>,
    columns: Vec<Vec<u64>>,
    // (column, shift from LSB) for every chunk position
    owners: Vec<(u32, u8)>,
    column_starts: Vec<usize>,
}

impl QuantizedMatrix {
    pub fn from_parts(
        names: Vec<String>,
        params: Vec<ColumnParams>,
        columns: Vec<Vec<u64>>,
    ) -> Result<Self> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(GdError::EmptyTable);
        }
        if names.len() != columns.len() || params.len() != columns.len() {
            return Err(GdError::InvalidParameter(
                "names, params and columns differ in length".into(),
            ));
        }
        let rows = columns[0].len();
        let mut owners = Vec::new();
        let mut column_starts = Vec::with_capacity(columns.len() + 1);
        for (c, (col, p)) in columns.iter().zip(&params).enumerate() {
            if col.len() != rows {
                return Err(GdError::RaggedTable {
                    column: c,
                    expected: rows,
                    found: col.len(),
                });
            }
            if p.bit_width == 0 || p.bit_width > 64 {
                return Err(GdError::InvalidParameter(format!(
                    "column {c} has bit width {}",
                    p.bit_width
                )));
            }
            let max = p.max_value();
            if let Some(r) = col.iter().position(|&v| v > max) {
                return Err(GdError::integrity(
                    "params",
                    format!("value at row {r}, column {c} exceeds bit width {}", p.bit_width),
                ));
            }
            column_starts.push(owners.len());
            for j in (0..p.bit_width).rev() {
                owners.push((c as u32, j));
            }
        }
        column_starts.push(owners.len());
        Ok(QuantizedMatrix {
            rows,
            names,
            params,
            columns,
            owners,
            column_starts,
        })
    }

    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    /// Bits per chunk.
    pub fn chunk_width(&self) -> usize {
        self.owners.len()
    }

    pub fn params(&self) -> &[ColumnParams] {
        &self.params
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, c: usize) -> &[u64] {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[Vec<u64>] {
        &self.columns
    }

    pub fn value(&self, row: usize, c: usize) -> u64 {
        self.columns[c][row]
    }

    /// Owning column and shift-from-LSB of a chunk position.
    #[inline]
    pub fn locate(&self, position: usize) -> (usize, u32) {
        let (c, s) = self.owners[position];
        (c as usize, s as u32)
    }

    /// Chunk positions `start..end` owned by column `c`, MSB first.
    pub fn column_positions(&self, c: usize) -> std::ops::Range<usize> {
        self.column_starts[c]..self.column_starts[c + 1]
    }

    #[inline]
    pub fn bit(&self, row: usize, position: usize) -> bool {
        let (c, s) = self.locate(position);
        (self.columns[c][row] >> s) & 1 == 1
    }

    /// Per-column masks with a 1 at every listed chunk position.
    pub fn column_masks(&self, positions: impl IntoIterator<Item = usize>) -> Vec<u64> {
        let mut masks = vec![0u64; self.d()];
        for p in positions {
            let (c, s) = self.locate(p);
            masks[c] |= 1 << s;
        }
        masks
    }

    /// The row's chunk packed MSB-first into bytes, zero padded at the end.
    pub fn chunk_bytes(&self, row: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.chunk_width().div_ceil(8)];
        for p in 0..self.chunk_width() {
            if self.bit(row, p) {
                out[p / 8] |= 0x80 >> (p % 8);
            }
        }
        out
    }

    /// Copy of the matrix with extra rows appended. Values must fit the
    /// existing column widths.
    pub fn with_rows_appended(&self, extra: &[Vec<u64>]) -> Result<Self> {
        let mut columns = self.columns.clone();
        for (r, row) in extra.iter().enumerate() {
            if row.len() != self.d() {
                return Err(GdError::InvalidParameter(format!(
                    "appended row {r} has {} values, expected {}",
                    row.len(),
                    self.d()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        QuantizedMatrix::from_parts(self.names.clone(), self.params.clone(), columns)
    }

    /// Leading `rows` rows as a new matrix.
    pub fn head(&self, rows: usize) -> Result<Self> {
        let columns = self.columns.iter().map(|c| c[..rows].to_vec()).collect();
        QuantizedMatrix::from_parts(self.names.clone(), self.params.clone(), columns)
    }
}

/// Quantizes every column of `table`.
pub fn quantize_dataset(table: &Table, mode: FloatMode) -> Result<QuantizedMatrix> {
    let mut params = Vec::with_capacity(table.width());
    let mut columns = Vec::with_capacity(table.width());
    for (c, col) in table.columns().iter().enumerate() {
        let (p, q) = match &col.data {
            ColumnData::Int(v) => quantize_int(v),
            ColumnData::F64(v) => {
                check_finite(v.iter().map(|x| x.is_finite()), c)?;
                quantize_float(v, Precision::Bits64, c, mode, |x| x, |x| x)?
            }
            ColumnData::F32(v) => {
                check_finite(v.iter().map(|x| x.is_finite()), c)?;
                quantize_float(v, Precision::Bits32, c, mode, |x| x as f64, |x| x as f32)?
            }
        };
        params.push(p);
        columns.push(q);
    }
    let names = table.columns().iter().map(|c| c.name.clone()).collect();
    QuantizedMatrix::from_parts(names, params, columns)
}

fn check_finite(finite: impl Iterator<Item = bool>, column: usize) -> Result<()> {
    for (row, ok) in finite.enumerate() {
        if !ok {
            return Err(GdError::NonFinite { row, column });
        }
    }
    Ok(())
}

fn quantize_int(v: &[i64]) -> (ColumnParams, Vec<u64>) {
    let min = *v.iter().min().expect("non-empty column");
    let q: Vec<u64> = v.iter().map(|&x| (x as i128 - min as i128) as u64).collect();
    let max = q.iter().copied().max().unwrap_or(0);
    let precision = if v.iter().all(|&x| i32::try_from(x).is_ok()) {
        Precision::Bits32
    } else {
        Precision::Bits64
    };
    let params = ColumnParams {
        kind: ColumnKind::Integer,
        precision,
        encoding: Encoding::Offset,
        decimal_scale: 0,
        offset: min as i128,
        bit_width: bits_needed(max),
    };
    (params, q)
}

fn quantize_float<T: Copy + PartialEq>(
    v: &[T],
    precision: Precision,
    column: usize,
    mode: FloatMode,
    widen: impl Fn(T) -> f64,
    narrow: impl Fn(f64) -> T,
) -> Result<(ColumnParams, Vec<u64>)> {
    let same_bits = |a: T, b: T| -> bool {
        // compare via f64 bit patterns; both sides come from the same type
        widen(a).to_bits() == widen(b).to_bits()
    };
    if mode != FloatMode::RawBits {
        for k in 0..=DECIMAL_SCALE_CAP {
            if let Some(scaled) = decimal_scaled(v, k, &widen, &narrow, &same_bits) {
                let min = *scaled.iter().min().expect("non-empty column");
                let q: Vec<u64> = scaled.iter().map(|&x| (x - min) as u64).collect();
                let max = q.iter().copied().max().unwrap_or(0);
                let params = ColumnParams {
                    kind: ColumnKind::Float,
                    precision,
                    encoding: Encoding::Decimal,
                    decimal_scale: k,
                    offset: min as i128,
                    bit_width: bits_needed(max),
                };
                return Ok((params, q));
            }
        }
        if mode == FloatMode::Decimal {
            return Err(GdError::DecimalScaleExceeded {
                column,
                cap: DECIMAL_SCALE_CAP,
            });
        }
    }
    let keys: Vec<u64> = match precision {
        Precision::Bits32 => v.iter().map(|&x| f32_key(widen(x) as f32) as u64).collect(),
        Precision::Bits64 => v.iter().map(|&x| f64_key(widen(x))).collect(),
    };
    let min = *keys.iter().min().expect("non-empty column");
    let q: Vec<u64> = keys.iter().map(|&k| k - min).collect();
    let max = q.iter().copied().max().unwrap_or(0);
    let params = ColumnParams {
        kind: ColumnKind::Float,
        precision,
        encoding: Encoding::RawBits,
        decimal_scale: 0,
        offset: min as i128,
        bit_width: bits_needed(max),
    };
    Ok((params, q))
}

/// Scaled integers for exponent `k`, if every value survives the exact
/// dequantization path unchanged.
fn decimal_scaled<T: Copy>(
    v: &[T],
    k: u8,
    widen: &impl Fn(T) -> f64,
    narrow: &impl Fn(f64) -> T,
    same_bits: &impl Fn(T, T) -> bool,
) -> Option<Vec<i64>> {
    let scale = 10f64.powi(k as i32);
    let mut out = Vec::with_capacity(v.len());
    for &x in v {
        let r = (widen(x) * scale).round();
        if r.abs() >= F64_EXACT_INT {
            return None;
        }
        let i = r as i64;
        if !same_bits(narrow(i as f64 / scale), x) {
            return None;
        }
        out.push(i);
    }
    Some(out)
}

/// Inverse of [`quantize_dataset`].
pub fn dequantize(matrix: &QuantizedMatrix) -> Result<Table> {
    let mut columns = Vec::with_capacity(matrix.d());
    for (c, p) in matrix.params().iter().enumerate() {
        let q = matrix.column(c);
        let max = p.max_value();
        if let Some(r) = q.iter().position(|&v| v > max) {
            return Err(GdError::integrity(
                "params",
                format!("value at row {r}, column {c} exceeds bit width {}", p.bit_width),
            ));
        }
        let data = match (p.kind, p.encoding) {
            (ColumnKind::Integer, Encoding::Offset) => {
                let mut out = Vec::with_capacity(q.len());
                for (r, &v) in q.iter().enumerate() {
                    let x = i64::try_from(v as i128 + p.offset).map_err(|_| {
                        GdError::integrity("params", format!("integer overflow at row {r}, column {c}"))
                    })?;
                    out.push(x);
                }
                ColumnData::Int(out)
            }
            (ColumnKind::Float, Encoding::Decimal) => {
                let scale = 10f64.powi(p.decimal_scale as i32);
                let mut ints = Vec::with_capacity(q.len());
                for (r, &v) in q.iter().enumerate() {
                    let x = v as i128 + p.offset;
                    if x.unsigned_abs() as f64 >= F64_EXACT_INT {
                        return Err(GdError::integrity(
                            "params",
                            format!("scaled value out of range at row {r}, column {c}"),
                        ));
                    }
                    ints.push(x as i64);
                }
                match p.precision {
                    Precision::Bits64 => {
                        ColumnData::F64(ints.iter().map(|&i| i as f64 / scale).collect())
                    }
                    Precision::Bits32 => {
                        ColumnData::F32(ints.iter().map(|&i| (i as f64 / scale) as f32).collect())
                    }
                }
            }
            (ColumnKind::Float, Encoding::RawBits) => {
                let bound: i128 = match p.precision {
                    Precision::Bits32 => u32::MAX as i128,
                    Precision::Bits64 => u64::MAX as i128,
                };
                if q.iter().any(|&v| v as i128 + p.offset > bound) || p.offset < 0 {
                    return Err(GdError::integrity("params", format!("raw key out of range in column {c}")));
                }
                match p.precision {
                    Precision::Bits64 => ColumnData::F64(q.iter().map(|&v| p.raw_key_to_f64(v)).collect()),
                    Precision::Bits32 => {
                        ColumnData::F32(q.iter().map(|&v| p.raw_key_to_f64(v) as f32).collect())
                    }
                }
            }
            _ => {
                return Err(GdError::integrity(
                    "params",
                    format!("column {c} has inconsistent kind and encoding"),
                ))
            }
        };
        columns.push(Column::new(matrix.names()[c].clone(), data));
    }
    Table::new(columns)
}

/// Statistics of one chunk bit position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitStat {
    pub ones: u64,
    pub probability: f64,
    pub entropy: f64,
    pub constant: bool,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitStats {
    pub rows: usize,
    pub positions: Vec<BitStat>,
}

impl BitStats {
    pub fn entropy(&self, position: usize) -> f64 {
        self.positions[position].entropy
    }

    pub fn constant_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.positions
            .iter()
            .enumerate()
            .filter(|(_, s)| s.constant)
            .map(|(i, _)| i)
    }
}

/// Binary entropy in bits, zero at `p ∈ {0, 1}`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Per-position one counts and entropies over all rows of `matrix`.
pub fn bit_stats(matrix: &QuantizedMatrix) -> BitStats {
    let n = matrix.n();
    let per_column: Vec<Vec<BitStat>> = (0..matrix.d())
        .into_par_iter()
        .map(|c| {
            let width = matrix.params()[c].bit_width as usize;
            let mut ones = vec![0u64; width];
            for &v in matrix.column(c) {
                let mut x = v;
                let mut s = 0;
                while x != 0 {
                    ones[s] += x & 1;
                    x >>= 1;
                    s += 1;
                }
            }
            // positions are MSB first
            (0..width)
                .rev()
                .map(|s| {
                    let k = ones[s];
                    let p = k as f64 / n as f64;
                    BitStat {
                        ones: k,
                        probability: p,
                        entropy: binary_entropy(p),
                        constant: k == 0 || k == n as u64,
                        column: c,
                    }
                })
                .collect()
        })
        .collect();
    BitStats {
        rows: n,
        positions: per_column.into_iter().flatten().collect(),
    }
}
