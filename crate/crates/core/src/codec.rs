//! Archive encoding and decoding.
//!
//! ```text
//! header      magic "EGD1" | version u16 | flags u16 | params_len u32 | params_crc u32
//! params      counts, column params, importance, base/analytic bitmaps,
//!             section table (byte length + crc32 per section)
//! bases       n_b × l_b bits, bases in lexicographic order
//! ids         (n+m) × l_id bits
//! deviations  (n+m) × l_d bits, row order
//! weights     m × l_w bits, each weight stored minus one
//! condensed   m × d f64, original-domain sample values
//! ```
//!
//! Integers are little-endian. Packed sections are MSB-first bit streams
//! padded to a byte boundary. Base bits and deviation bits are laid out in
//! ascending chunk position order.

use std::io::{Cursor, Read, Seek, SeekFrom};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::basetree::BaseTree;
use crate::bitio::{mask, BitReader, BitWriter};
use crate::bitmatrix::{
    bit_stats, dequantize, quantize_dataset, ColumnKind, ColumnParams, Encoding, FloatMode,
    Precision, QuantizedMatrix, Table,
};
use crate::error::{GdError, Result};
use crate::selection::{
    compressed_size, default_m_max, generate_condensed_samples, id_width,
    select_compression_tree, weight_width, BitSelection, CondensedSampleSet, SelectionStep,
    SizeModel, Truncation, DEFAULT_TAU,
};

pub const MAGIC: [u8; 4] = *b"EGD1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

const FLAG_EXACT_TRUNCATION: u16 = 1;
const FLAG_IMPORTANCE: u16 = 1 << 1;

/// Names of the data sections, in file order.
pub const SECTION_NAMES: [&str; 5] = ["bases", "ids", "deviations", "weights", "condensed"];
const BASES: usize = 0;
const IDS: usize = 1;
const DEVIATIONS: usize = 2;
const WEIGHTS: usize = 3;
const CONDENSED: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressConfig {
    /// Condensed sample budget; `None` picks [`default_m_max`].
    pub m_max: Option<usize>,
    pub tau: usize,
    pub importance: Option<Vec<f64>>,
    pub exact_truncation: bool,
    pub float_mode: FloatMode,
}

impl Default for CompressConfig {
    fn default() -> Self {
        CompressConfig {
            m_max: None,
            tau: DEFAULT_TAU,
            importance: None,
            exact_truncation: false,
            float_mode: FloatMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SectionEntry {
    pub len: u64,
    pub crc: u32,
}

/// Decoded params section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchiveParams {
    pub n: u64,
    pub m: u64,
    pub n_b: u64,
    pub tau: u32,
    pub m_max: u64,
    pub exact_truncation: bool,
    pub names: Vec<String>,
    pub columns: Vec<ColumnParams>,
    pub importance: Option<Vec<f64>>,
    pub base_bits: BitSelection,
    pub analytic_bits: BitSelection,
    pub sections: [SectionEntry; 5],
}

impl ArchiveParams {
    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn chunk_width(&self) -> usize {
        self.base_bits.chunk_width()
    }

    /// Byte offset of every section, relative to the start of the file.
    pub fn section_offsets(&self, params_len: usize) -> [u64; 5] {
        let mut off = (HEADER_LEN + params_len) as u64;
        let mut out = [0; 5];
        for (i, s) in self.sections.iter().enumerate() {
            out[i] = off;
            off += s.len;
        }
        out
    }

    fn expected_lengths(&self) -> [u64; 5] {
        let rows = self.n + self.m;
        let l_b = self.base_bits.base_len() as u64;
        let l_d = self.base_bits.deviation_len() as u64;
        [
            (self.n_b * l_b).div_ceil(8),
            (rows * id_width(self.n_b) as u64).div_ceil(8),
            (rows * l_d).div_ceil(8),
            (self.m * weight_width(self.n) as u64).div_ceil(8),
            8 * self.m * self.d() as u64,
        ]
    }
}

/// An encoded archive held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    bytes: Vec<u8>,
    params: ArchiveParams,
    params_len: usize,
}

/// Byte accounting of an archive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchiveLayout {
    pub header: u64,
    pub params: u64,
    pub bases: u64,
    pub ids: u64,
    pub deviations: u64,
    pub weights: u64,
    pub condensed: u64,
    pub total: u64,
}

impl Archive {
    /// Parses and validates the header and params section.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        let (params, params_len) = read_front(&mut Cursor::new(&bytes[..]))?;
        let expected = HEADER_LEN as u64 + params_len as u64
            + params.sections.iter().map(|s| s.len).sum::<u64>();
        if (bytes.len() as u64) < expected {
            let offsets = params.section_offsets(params_len);
            let short = (0..5)
                .find(|&i| offsets[i] + params.sections[i].len > bytes.len() as u64)
                .unwrap_or(CONDENSED);
            return Err(GdError::integrity(SECTION_NAMES[short], "archive is truncated"));
        }
        if bytes.len() as u64 > expected {
            return Err(GdError::integrity("condensed", "trailing bytes after last section"));
        }
        Ok(Archive {
            bytes,
            params,
            params_len,
        })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn params(&self) -> &ArchiveParams {
        &self.params
    }

    pub fn params_len(&self) -> usize {
        self.params_len
    }

    pub fn layout(&self) -> ArchiveLayout {
        let s = &self.params.sections;
        ArchiveLayout {
            header: HEADER_LEN as u64,
            params: self.params_len as u64,
            bases: s[BASES].len,
            ids: s[IDS].len,
            deviations: s[DEVIATIONS].len,
            weights: s[WEIGHTS].len,
            condensed: s[CONDENSED].len,
            total: self.bytes.len() as u64,
        }
    }

    /// `S_params` in bits: the params and condensed sections.
    pub fn params_bits(&self) -> u64 {
        8 * (self.params_len as u64 + self.params.sections[CONDENSED].len)
    }

    /// Size model rebuilt from the stored fields.
    pub fn size_model(&self) -> SizeModel {
        let p = &self.params;
        SizeModel::new(
            p.n,
            p.m,
            p.n_b,
            p.base_bits.base_len() as u64,
            p.chunk_width() as u64,
            self.params_bits(),
        )
    }

    fn section(&self, i: usize) -> Result<&[u8]> {
        let offsets = self.params.section_offsets(self.params_len);
        let start = offsets[i] as usize;
        let data = &self.bytes[start..start + self.params.sections[i].len as usize];
        check_crc(i, data, self.params.sections[i].crc)?;
        Ok(data)
    }
}

/// Measurements taken while compressing.
#[derive(Debug, Clone, Serialize)]
pub struct CompressReport {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub m_max: usize,
    pub chunk_width: usize,
    pub n_b: usize,
    pub base_bits: Vec<usize>,
    pub analytic_bits: Vec<usize>,
    pub initial_len: usize,
    pub size_model: SizeModel,
    pub size_bits: u64,
    pub steps: Vec<SelectionStep>,
    pub count_trace: Vec<usize>,
    pub layout: ArchiveLayout,
    pub original_bytes: usize,
    /// Bit statistics, condensed sample generation and compression
    /// selection, excluding quantization and serialization.
    #[serde(serialize_with = "secs")]
    pub configuration_time: Duration,
    #[serde(serialize_with = "secs")]
    pub total_time: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Compresses `table` into an archive.
pub fn compress(table: &Table, config: &CompressConfig) -> Result<(Archive, CompressReport)> {
    let started = Instant::now();
    let matrix = quantize_dataset(table, config.float_mode)?;
    let n = matrix.n();
    let d = matrix.d();
    let m_max = config.m_max.unwrap_or_else(|| default_m_max(n));
    let truncation = if config.exact_truncation {
        Truncation::Exact
    } else {
        Truncation::Overshoot
    };

    let config_start = Instant::now();
    let stats = bit_stats(&matrix);
    let generation =
        generate_condensed_samples(&matrix, m_max, config.importance.as_deref(), truncation)?;
    let m = generation.samples.m();
    let extended = matrix.with_rows_appended(&generation.requantized)?;
    let draft = draft_params(&matrix, config, m_max, m, &generation.samples.analytic_bits);
    let params_len = encode_params(&draft).len();
    let s_params = 8 * (params_len as u64 + 8 * (m * d) as u64);
    let (selection, tree) =
        select_compression_tree(&extended, &stats, m, config.tau, s_params)?;
    let configuration_time = config_start.elapsed();

    let (sections, n_b) = encode_sections(&tree, &generation.samples, n)?;
    let mut params = draft;
    params.n_b = n_b as u64;
    params.base_bits = BitSelection::new(selection.selection.sorted(), matrix.chunk_width())?;
    for (entry, data) in params.sections.iter_mut().zip(&sections) {
        *entry = SectionEntry {
            len: data.len() as u64,
            crc: crc32fast::hash(data),
        };
    }
    let params_bytes = encode_params(&params);
    debug_assert_eq!(params_bytes.len(), params_len);

    let mut bytes = Vec::with_capacity(
        HEADER_LEN + params_bytes.len() + sections.iter().map(Vec::len).sum::<usize>(),
    );
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    let mut flags = 0u16;
    if params.exact_truncation {
        flags |= FLAG_EXACT_TRUNCATION;
    }
    if params.importance.is_some() {
        flags |= FLAG_IMPORTANCE;
    }
    bytes.extend_from_slice(&flags.to_le_bytes());
    bytes.extend_from_slice(&(params_bytes.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&crc32fast::hash(&params_bytes).to_le_bytes());
    bytes.extend_from_slice(&params_bytes);
    for s in &sections {
        bytes.extend_from_slice(s);
    }
    let archive = Archive::from_bytes(bytes)?;

    let size_model = archive.size_model();
    debug_assert_eq!(size_model, selection.best_model);
    let report = CompressReport {
        n,
        d,
        m,
        m_max,
        chunk_width: matrix.chunk_width(),
        n_b,
        base_bits: selection.selection.positions().to_vec(),
        analytic_bits: generation.samples.analytic_bits.positions().to_vec(),
        initial_len: selection.initial_len,
        size_model,
        size_bits: compressed_size(&size_model),
        steps: selection.steps,
        count_trace: generation.count_trace,
        layout: archive.layout(),
        original_bytes: table.raw_size_bytes(),
        configuration_time,
        total_time: started.elapsed(),
    };
    Ok((archive, report))
}

fn draft_params(
    matrix: &QuantizedMatrix,
    config: &CompressConfig,
    m_max: usize,
    m: usize,
    analytic_bits: &BitSelection,
) -> ArchiveParams {
    ArchiveParams {
        n: matrix.n() as u64,
        m: m as u64,
        n_b: 0,
        tau: config.tau as u32,
        m_max: m_max as u64,
        exact_truncation: config.exact_truncation,
        names: matrix.names().to_vec(),
        columns: matrix.params().to_vec(),
        importance: config.importance.clone(),
        base_bits: BitSelection::empty(matrix.chunk_width()),
        analytic_bits: BitSelection::new(analytic_bits.sorted(), matrix.chunk_width())
            .expect("analytic bits are valid"),
        sections: [SectionEntry { len: 0, crc: 0 }; 5],
    }
}

/// Contiguous runs of chunk positions inside one column: (column, lowest
/// shift, length), in ascending position order.
fn position_runs(matrix: &QuantizedMatrix, positions: &[usize]) -> Vec<(usize, u32, u32)> {
    let mut runs: Vec<(usize, u32, u32)> = Vec::new();
    for &p in positions {
        let (c, s) = matrix.locate(p);
        match runs.last_mut() {
            Some((rc, lo, len)) if *rc == c && *lo == s + 1 => {
                *lo = s;
                *len += 1;
            }
            _ => runs.push((c, s, 1)),
        }
    }
    runs
}

fn encode_sections(
    tree: &BaseTree<'_>,
    samples: &CondensedSampleSet,
    n: usize,
) -> Result<([Vec<u8>; 5], usize)> {
    let matrix = tree.matrix();
    let width = matrix.chunk_width();
    let base_positions = {
        let mut v = tree.selected_bits().to_vec();
        v.sort_unstable();
        v
    };
    let dev_positions: Vec<usize> = (0..width).filter(|&p| !tree.is_selected(p)).collect();
    let base_runs = position_runs(matrix, &base_positions);
    let dev_runs = position_runs(matrix, &dev_positions);
    let (leaves, ids) = tree.row_assignments();
    let n_b = leaves.len();
    let rows = matrix.n() as u64;

    let mut bases = BitWriter::with_capacity_bits(n_b as u64 * base_positions.len() as u64);
    for leaf in &leaves {
        for &(c, lo, len) in &base_runs {
            bases.write((leaf.base[c] >> lo) & mask(len), len);
        }
    }

    let l_id = id_width(n_b as u64);
    let mut id_stream = BitWriter::with_capacity_bits(rows * l_id as u64);
    for &id in &ids {
        id_stream.write(id as u64, l_id);
    }

    let mut devs = BitWriter::with_capacity_bits(rows * dev_positions.len() as u64);
    let columns = matrix.columns();
    for r in 0..matrix.n() {
        for &(c, lo, len) in &dev_runs {
            devs.write((columns[c][r] >> lo) & mask(len), len);
        }
    }

    let l_w = weight_width(n as u64);
    let mut weights = BitWriter::with_capacity_bits(samples.m() as u64 * l_w as u64);
    for &w in &samples.weights {
        if w == 0 || w > n as u64 {
            return Err(GdError::InvalidParameter(format!("weight {w} outside 1..={n}")));
        }
        weights.write(w - 1, l_w);
    }

    let mut condensed = Vec::with_capacity(8 * samples.values.len());
    for v in &samples.values {
        condensed.extend_from_slice(&v.to_le_bytes());
    }

    Ok((
        [
            bases.finish(),
            id_stream.finish(),
            devs.finish(),
            weights.finish(),
            condensed,
        ],
        n_b,
    ))
}

fn encode_params(p: &ArchiveParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&p.n.to_le_bytes());
    out.extend_from_slice(&p.m.to_le_bytes());
    out.extend_from_slice(&p.n_b.to_le_bytes());
    out.extend_from_slice(&(p.d() as u32).to_le_bytes());
    out.extend_from_slice(&(p.chunk_width() as u32).to_le_bytes());
    out.extend_from_slice(&p.tau.to_le_bytes());
    out.extend_from_slice(&p.m_max.to_le_bytes());
    for (name, c) in p.names.iter().zip(&p.columns) {
        out.push(match c.kind {
            ColumnKind::Integer => 0,
            ColumnKind::Float => 1,
        });
        out.push(match c.precision {
            Precision::Bits32 => 32,
            Precision::Bits64 => 64,
        });
        out.push(match c.encoding {
            Encoding::Offset => 0,
            Encoding::Decimal => 1,
            Encoding::RawBits => 2,
        });
        out.push(c.decimal_scale);
        out.push(c.bit_width);
        out.extend_from_slice(&c.offset.to_le_bytes());
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    if let Some(w) = &p.importance {
        for x in w {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out.extend_from_slice(&p.base_bits.to_bitmap());
    out.extend_from_slice(&p.analytic_bits.to_bitmap());
    for s in &p.sections {
        out.extend_from_slice(&s.len.to_le_bytes());
        out.extend_from_slice(&s.crc.to_le_bytes());
    }
    out
}

struct ParamsCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ParamsCursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(k)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| GdError::integrity("params", "params section is truncated"))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode_params(data: &[u8], flags: u16) -> Result<ArchiveParams> {
    let bad = |detail: &str| GdError::integrity("params", detail);
    let mut cur = ParamsCursor { data, pos: 0 };
    let n = cur.u64()?;
    let m = cur.u64()?;
    let n_b = cur.u64()?;
    let d = cur.u32()? as usize;
    let chunk_width = cur.u32()? as usize;
    let tau = cur.u32()?;
    let m_max = cur.u64()?;
    if n == 0 || d == 0 || m > n || n_b == 0 || n_b > n + m {
        return Err(bad("inconsistent counts"));
    }
    let mut names = Vec::with_capacity(d);
    let mut columns = Vec::with_capacity(d);
    for _ in 0..d {
        let kind = match cur.u8()? {
            0 => ColumnKind::Integer,
            1 => ColumnKind::Float,
            _ => return Err(bad("unknown column kind")),
        };
        let precision = match cur.u8()? {
            32 => Precision::Bits32,
            64 => Precision::Bits64,
            _ => return Err(bad("unknown precision")),
        };
        let encoding = match cur.u8()? {
            0 => Encoding::Offset,
            1 => Encoding::Decimal,
            2 => Encoding::RawBits,
            _ => return Err(bad("unknown encoding")),
        };
        let decimal_scale = cur.u8()?;
        let bit_width = cur.u8()?;
        if bit_width == 0 || bit_width > 64 {
            return Err(bad("bit width out of range"));
        }
        let offset = i128::from_le_bytes(cur.take(16)?.try_into().unwrap());
        let name_len = cur.u16()? as usize;
        let name = String::from_utf8(cur.take(name_len)?.to_vec())
            .map_err(|_| bad("column name is not utf-8"))?;
        names.push(name);
        columns.push(ColumnParams {
            kind,
            precision,
            encoding,
            decimal_scale,
            offset,
            bit_width,
        });
    }
    if columns.iter().map(|c| c.bit_width as usize).sum::<usize>() != chunk_width {
        return Err(bad("column widths do not add up to the chunk width"));
    }
    let importance = if flags & FLAG_IMPORTANCE != 0 {
        let mut w = Vec::with_capacity(d);
        for _ in 0..d {
            w.push(f64::from_bits(cur.u64()?));
        }
        Some(w)
    } else {
        None
    };
    let bitmap_len = chunk_width.div_ceil(8);
    let base_bits = BitSelection::from_bitmap(cur.take(bitmap_len)?, chunk_width)?;
    let analytic_bits = BitSelection::from_bitmap(cur.take(bitmap_len)?, chunk_width)?;
    let mut sections = [SectionEntry { len: 0, crc: 0 }; 5];
    for s in sections.iter_mut() {
        s.len = cur.u64()?;
        s.crc = cur.u32()?;
    }
    if cur.pos != data.len() {
        return Err(bad("unexpected bytes at end of params"));
    }
    let params = ArchiveParams {
        n,
        m,
        n_b,
        tau,
        m_max,
        exact_truncation: flags & FLAG_EXACT_TRUNCATION != 0,
        names,
        columns,
        importance,
        base_bits,
        analytic_bits,
        sections,
    };
    for (i, (want, got)) in params
        .expected_lengths()
        .iter()
        .zip(params.sections.iter())
        .enumerate()
    {
        if *want != got.len {
            return Err(GdError::integrity(
                SECTION_NAMES[i],
                format!("length {} does not match expected {}", got.len, want),
            ));
        }
    }
    Ok(params)
}

fn check_crc(section: usize, data: &[u8], crc: u32) -> Result<()> {
    if crc32fast::hash(data) != crc {
        return Err(GdError::integrity(SECTION_NAMES[section], "checksum mismatch"));
    }
    Ok(())
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], section: &'static str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => GdError::integrity(section, "archive is truncated"),
        _ => GdError::from(e),
    })
}

// Reads and validates the header and params section.
fn read_front<R: Read>(r: &mut R) -> Result<(ArchiveParams, usize)> {
    let mut header = [0u8; HEADER_LEN];
    read_exact_or(r, &mut header, "header")?;
    if header[0..4] != MAGIC {
        return Err(GdError::integrity("header", "bad magic"));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != VERSION {
        return Err(GdError::integrity("header", format!("unsupported version {version}")));
    }
    let flags = u16::from_le_bytes([header[6], header[7]]);
    if flags & !(FLAG_EXACT_TRUNCATION | FLAG_IMPORTANCE) != 0 {
        return Err(GdError::integrity("header", "unknown flags"));
    }
    let params_len = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let params_crc = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let mut params = vec![0u8; params_len];
    read_exact_or(r, &mut params, "params")?;
    if crc32fast::hash(&params) != params_crc {
        return Err(GdError::integrity("params", "checksum mismatch"));
    }
    Ok((decode_params(&params, flags)?, params_len))
}

struct Counting<R> {
    inner: R,
    read: u64,
}

impl<R: Read> Read for Counting<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let k = self.inner.read(buf)?;
        self.read += k as u64;
        Ok(k)
    }
}

impl<R: Seek> Seek for Counting<R> {
    fn seek(&mut self, pos: SeekFrom) -> std::io::Result<u64> {
        self.inner.seek(pos)
    }
}

/// Reads only the header, params, weight and condensed sections. Returns
/// the samples and the number of bytes read.
pub fn extract_condensed<R: Read + Seek>(reader: R) -> Result<(CondensedSampleSet, u64)> {
    let mut r = Counting {
        inner: reader,
        read: 0,
    };
    r.seek(SeekFrom::Start(0))?;
    let (params, params_len) = read_front(&mut r)?;
    let offsets = params.section_offsets(params_len);

    let mut weight_bytes = vec![0u8; params.sections[WEIGHTS].len as usize];
    r.seek(SeekFrom::Start(offsets[WEIGHTS]))?;
    read_exact_or(&mut r, &mut weight_bytes, "weights")?;
    check_crc(WEIGHTS, &weight_bytes, params.sections[WEIGHTS].crc)?;

    let mut condensed = vec![0u8; params.sections[CONDENSED].len as usize];
    r.seek(SeekFrom::Start(offsets[CONDENSED]))?;
    read_exact_or(&mut r, &mut condensed, "condensed")?;
    check_crc(CONDENSED, &condensed, params.sections[CONDENSED].crc)?;

    let samples = condensed_from_parts(&params, &weight_bytes, &condensed)?;
    Ok((samples, r.read))
}

fn condensed_from_parts(
    params: &ArchiveParams,
    weight_bytes: &[u8],
    condensed: &[u8],
) -> Result<CondensedSampleSet> {
    let l_w = weight_width(params.n);
    let mut reader = BitReader::new(weight_bytes);
    let mut weights = Vec::with_capacity(params.m as usize);
    for _ in 0..params.m {
        let w = reader
            .read(l_w)
            .ok_or_else(|| GdError::integrity("weights", "section is truncated"))?
            + 1;
        weights.push(w);
    }
    if weights.iter().sum::<u64>() != params.n {
        return Err(GdError::integrity("weights", "weights do not sum to the row count"));
    }
    let values = condensed
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(CondensedSampleSet {
        d: params.d(),
        values,
        weights,
        analytic_bits: params.analytic_bits.clone(),
    })
}

/// Condensed samples of an in-memory archive.
pub fn archive_condensed(archive: &Archive) -> Result<CondensedSampleSet> {
    extract_condensed(Cursor::new(archive.as_bytes())).map(|(s, _)| s)
}

fn read_ids(archive: &Archive) -> Result<Vec<u32>> {
    let p = archive.params();
    let rows = (p.n + p.m) as usize;
    let l_id = id_width(p.n_b);
    let mut reader = BitReader::new(archive.section(IDS)?);
    let mut ids = Vec::with_capacity(rows);
    for r in 0..rows {
        let id = reader
            .read(l_id)
            .ok_or_else(|| GdError::integrity("ids", "section is truncated"))?;
        if id >= p.n_b {
            return Err(GdError::integrity(
                "ids",
                format!("row {r} references base {id} of {}", p.n_b),
            ));
        }
        ids.push(id as u32);
    }
    Ok(ids)
}

// Base values as masked column values, one row per base.
fn read_bases(archive: &Archive, skeleton: &QuantizedMatrix) -> Result<Vec<Vec<u64>>> {
    let p = archive.params();
    let runs = position_runs(skeleton, &p.base_bits.sorted());
    let mut reader = BitReader::new(archive.section(BASES)?);
    let mut bases = Vec::with_capacity(p.n_b as usize);
    for _ in 0..p.n_b {
        let mut base = vec![0u64; p.d()];
        for &(c, lo, len) in &runs {
            let bits = reader
                .read(len)
                .ok_or_else(|| GdError::integrity("bases", "section is truncated"))?;
            base[c] |= bits << lo;
        }
        bases.push(base);
    }
    Ok(bases)
}

/// Decoded base table: one row of masked column values per base, in
/// stored order.
pub fn base_table(archive: &Archive) -> Result<Vec<Vec<u64>>> {
    read_bases(archive, &skeleton(archive.params())?)
}

// A one-row matrix with the archive's column layout, used for position lookups.
fn skeleton(p: &ArchiveParams) -> Result<QuantizedMatrix> {
    QuantizedMatrix::from_parts(
        p.names.clone(),
        p.columns.clone(),
        vec![vec![0]; p.d()],
    )
}

/// All `n + m` rows of the extended matrix: the original rows followed by
/// the requantized condensed samples.
pub fn decompress_extended(archive: &Archive) -> Result<QuantizedMatrix> {
    let p = archive.params();
    let shape = skeleton(p)?;
    let bases = read_bases(archive, &shape)?;
    let ids = read_ids(archive)?;
    let mut referenced = vec![false; bases.len()];
    for &id in &ids {
        referenced[id as usize] = true;
    }
    if let Some(j) = referenced.iter().position(|&x| !x) {
        return Err(GdError::integrity("bases", format!("base {j} is never referenced")));
    }
    let dev_positions: Vec<usize> = (0..p.chunk_width())
        .filter(|&q| !p.base_bits.contains(q))
        .collect();
    let dev_runs = position_runs(&shape, &dev_positions);
    let mut reader = BitReader::new(archive.section(DEVIATIONS)?);
    let rows = ids.len();
    let mut columns = vec![Vec::with_capacity(rows); p.d()];
    for &id in &ids {
        let base = &bases[id as usize];
        let mut row = base.clone();
        for &(c, lo, len) in &dev_runs {
            let bits = reader
                .read(len)
                .ok_or_else(|| GdError::integrity("deviations", "section is truncated"))?;
            row[c] |= bits << lo;
        }
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    QuantizedMatrix::from_parts(p.names.clone(), p.columns.clone(), columns)
}

/// Reconstructs the original table.
pub fn decompress(archive: &Archive) -> Result<Table> {
    let extended = decompress_extended(archive)?;
    // weights and condensed values are validated too, so corruption anywhere
    // in the archive is reported
    archive.section(WEIGHTS)?;
    archive.section(CONDENSED)?;
    dequantize(&extended.head(archive.params().n as usize)?)
}

/// Midpoint of every base's attainable range with its original-row count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseCentroids {
    pub d: usize,
    /// Row-major `n_b × d`, bases without original rows omitted.
    pub values: Vec<f64>,
    pub counts: Vec<u64>,
}

impl BaseCentroids {
    pub fn weights_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&w| w as f64).collect()
    }
}

/// Base centroids `(b + b_max) / 2`, where `b` fills the deviation bits
/// with zeros and `b_max` with ones.
pub fn base_centroids(archive: &Archive) -> Result<BaseCentroids> {
    let p = archive.params();
    let shape = skeleton(p)?;
    let bases = read_bases(archive, &shape)?;
    let ids = read_ids(archive)?;
    let mut counts = vec![0u64; bases.len()];
    for &id in &ids[..p.n as usize] {
        counts[id as usize] += 1;
    }
    let base_masks = shape.column_masks(p.base_bits.positions().iter().copied());
    let mut values = Vec::new();
    let mut kept = Vec::new();
    for (base, &count) in bases.iter().zip(&counts) {
        if count == 0 {
            continue;
        }
        kept.push(count);
        for (c, cp) in p.columns.iter().enumerate() {
            let low = base[c];
            let high = low | (cp.max_value() & !base_masks[c]);
            let v = match cp.encoding {
                Encoding::RawBits => (cp.decode_f64(low) + cp.decode_f64(high)) / 2.0,
                _ => cp.to_original((low as f64 + high as f64) / 2.0),
            };
            values.push(v);
        }
    }
    Ok(BaseCentroids {
        d: p.d(),
        values,
        counts: kept,
    })
}
