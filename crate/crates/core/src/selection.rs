//! Base bit selection.
//!
//! Two independent selections are made over the same chunk layout:
//!
//! * an *analytic* selection that walks the most significant remaining bit
//!   of every column in turn until the number of bases reaches `m_max`;
//!   each resulting base becomes a weighted condensed sample (base value
//!   plus the mean deviation of its rows);
//! * a *compression* selection over the data with the condensed samples
//!   appended, adding bits in ascending order of their entropy and keeping
//!   the prefix with the smallest modelled archive size.
//!
//! [`greedy_select_bits`] is a size-only greedy baseline that tries the
//! next most significant bit of every column at each step.

use serde::Serialize;

use crate::basetree::BaseTree;
use crate::bitmatrix::{BitStats, Encoding, QuantizedMatrix};
use crate::error::{GdError, Result};

/// Default plateau threshold for the compression selection.
pub const DEFAULT_TAU: usize = 10;

/// Ordered set of base bit positions over a chunk of `chunk_width` bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BitSelection {
    positions: Vec<usize>,
    chunk_width: usize,
}

impl BitSelection {
    pub fn new(positions: Vec<usize>, chunk_width: usize) -> Result<Self> {
        let mut seen = vec![false; chunk_width];
        for &p in &positions {
            if p >= chunk_width {
                return Err(GdError::BitOutOfRange {
                    position: p,
                    width: chunk_width,
                });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(GdError::DuplicateBit(p));
            }
        }
        Ok(BitSelection {
            positions,
            chunk_width,
        })
    }

    pub fn empty(chunk_width: usize) -> Self {
        BitSelection {
            positions: Vec::new(),
            chunk_width,
        }
    }

    /// Positions in selection order.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.positions.clone();
        v.sort_unstable();
        v
    }

    pub fn chunk_width(&self) -> usize {
        self.chunk_width
    }

    pub fn base_len(&self) -> usize {
        self.positions.len()
    }

    pub fn deviation_len(&self) -> usize {
        self.chunk_width - self.positions.len()
    }

    pub fn contains(&self, position: usize) -> bool {
        self.positions.contains(&position)
    }

    /// Membership bitmap, MSB-first, padded to whole bytes.
    pub fn to_bitmap(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.chunk_width.div_ceil(8)];
        for &p in &self.positions {
            out[p / 8] |= 0x80 >> (p % 8);
        }
        out
    }

    /// Selection in ascending position order from a membership bitmap.
    pub fn from_bitmap(bitmap: &[u8], chunk_width: usize) -> Result<Self> {
        if bitmap.len() != chunk_width.div_ceil(8) {
            return Err(GdError::integrity("params", "bitmap length mismatch"));
        }
        let positions = (0..chunk_width)
            .filter(|&p| bitmap[p / 8] & (0x80 >> (p % 8)) != 0)
            .collect();
        if (chunk_width..bitmap.len() * 8).any(|p| bitmap[p / 8] & (0x80 >> (p % 8)) != 0) {
            return Err(GdError::integrity("params", "bitmap padding is not zero"));
        }
        BitSelection::new(positions, chunk_width)
    }
}

/// `⌈log₂ x⌉`, with `ceil_log2(1) == 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Width of a stored weight. Weights are stored minus one, so
/// `⌈log₂ n⌉` bits hold every value in `1..=n`; one row still needs one bit.
pub fn weight_width(n: u64) -> u32 {
    ceil_log2(n).max(1)
}

/// Width of a base id, zero when there is a single base.
pub fn id_width(n_b: u64) -> u32 {
    ceil_log2(n_b)
}

/// Fields of the archive size model, all in bits except the counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeModel {
    pub n: u64,
    pub m: u64,
    pub n_b: u64,
    pub l_b: u64,
    pub l_d: u64,
    pub l_w: u64,
    pub l_id: u64,
    pub s_params: u64,
}

impl SizeModel {
    pub fn new(n: u64, m: u64, n_b: u64, l_b: u64, chunk_width: u64, s_params: u64) -> Self {
        SizeModel {
            n,
            m,
            n_b,
            l_b,
            l_d: chunk_width - l_b,
            l_w: weight_width(n) as u64,
            l_id: id_width(n_b) as u64,
            s_params,
        }
    }
}

/// `S = n_b·l_b + (n+m)·(l_d + l_id) + m·l_w + S_params`, in bits.
pub fn compressed_size(model: &SizeModel) -> u64 {
    model.n_b * model.l_b
        + (model.n + model.m) * (model.l_d + model.l_id)
        + model.m * model.l_w
        + model.s_params
}

/// Fixed inputs of the size model while bits are being chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeContext {
    pub n: u64,
    pub m: u64,
    pub chunk_width: u64,
    pub s_params: u64,
}

impl SizeContext {
    pub fn model(&self, n_b: usize, l_b: usize) -> SizeModel {
        SizeModel::new(
            self.n,
            self.m,
            n_b as u64,
            l_b as u64,
            self.chunk_width,
            self.s_params,
        )
    }

    pub fn size(&self, n_b: usize, l_b: usize) -> u64 {
        compressed_size(&self.model(n_b, l_b))
    }
}

/// Default `m_max`: `min(4096, max(16, n / 100))`.
pub fn default_m_max(n: usize) -> usize {
    (n / 100).clamp(16, 4096)
}

/// Positions whose bit is the same in every row.
pub fn constant_positions(matrix: &QuantizedMatrix) -> Vec<usize> {
    let mut out = Vec::new();
    for c in 0..matrix.d() {
        let col = matrix.column(c);
        let (and, or) = col
            .iter()
            .fold((u64::MAX, 0u64), |(a, o), &v| (a & v, o | v));
        let varying = and ^ or;
        for p in matrix.column_positions(c) {
            let (_, s) = matrix.locate(p);
            if (varying >> s) & 1 == 0 {
                out.push(p);
            }
        }
    }
    out
}

/// What to do when the last analytic bit pushes the base count past `m_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Truncation {
    /// Keep every base produced by the last committed bit.
    #[default]
    Overshoot,
    /// Merge lightest samples into their nearest neighbour until `m == m_max`.
    Exact,
}

/// Weighted samples in the original data domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondensedSampleSet {
    pub d: usize,
    /// Row-major `m × d` values.
    pub values: Vec<f64>,
    pub weights: Vec<u64>,
    pub analytic_bits: BitSelection,
}

impl CondensedSampleSet {
    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn sample(&self, j: usize) -> &[f64] {
        &self.values[j * self.d..(j + 1) * self.d]
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|&w| w as f64).collect()
    }
}

/// Output of [`generate_condensed_samples`].
#[derive(Debug, Clone)]
pub struct CondensedGeneration {
    pub samples: CondensedSampleSet,
    /// Unrounded sample values in the quantized domain, `m × d`. Raw-bits
    /// columns hold the key of the sample value instead.
    pub quantized_means: Vec<f64>,
    /// Samples rounded half-to-even into the column widths, one row each.
    pub requantized: Vec<Vec<u64>>,
    /// The running base count: the initial value, then one entry per
    /// committed bit.
    pub count_trace: Vec<usize>,
}

/// Builds weighted condensed samples from the bases of an MSB-first,
/// column-balanced bit selection.
///
/// `importance`, when given, orders the columns within each round by
/// descending importance (stable for ties).
pub fn generate_condensed_samples(
    matrix: &QuantizedMatrix,
    m_max: usize,
    importance: Option<&[f64]>,
    truncation: Truncation,
) -> Result<CondensedGeneration> {
    if m_max < 1 {
        return Err(GdError::InvalidParameter("m_max must be at least 1".into()));
    }
    let d = matrix.d();
    let column_order = match importance {
        None => (0..d).collect::<Vec<_>>(),
        Some(w) => {
            if w.len() != d || w.iter().any(|x| !x.is_finite()) {
                return Err(GdError::InvalidParameter(format!(
                    "importance must hold {d} finite values"
                )));
            }
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
            order
        }
    };

    let mut tree = BaseTree::new(matrix);
    let constants = constant_positions(matrix);
    for &p in &constants {
        tree.add_bit(p)?;
    }
    let mut m = usize::from(!constants.is_empty());
    let mut trace = vec![m];
    let width = matrix.chunk_width();
    let mut cursor: Vec<usize> = (0..d).map(|c| matrix.column_positions(c).start).collect();

    'rounds: while m < m_max && tree.selected_bits().len() < width {
        let mut round = Vec::with_capacity(d);
        for &c in &column_order {
            let end = matrix.column_positions(c).end;
            while cursor[c] < end && tree.is_selected(cursor[c]) {
                cursor[c] += 1;
            }
            if cursor[c] < end {
                round.push(cursor[c]);
                cursor[c] += 1;
            }
        }
        for p in round {
            tree.add_bit(p)?;
            m = tree.leaf_count();
            trace.push(m);
            if m >= m_max {
                break 'rounds;
            }
        }
    }

    let analytic_bits = BitSelection::new(tree.selected_bits().to_vec(), width)?;
    let masks = tree.base_masks();
    let params = matrix.params();
    let leaves = tree.leaves();
    let mut weights = Vec::with_capacity(leaves.len());
    let mut values = Vec::with_capacity(leaves.len() * d);
    let mut qmeans = Vec::with_capacity(leaves.len() * d);
    for leaf in &leaves {
        let count = leaf.members.len();
        weights.push(count as u64);
        for c in 0..d {
            let col = matrix.column(c);
            let p = &params[c];
            if p.encoding == Encoding::RawBits {
                // key arithmetic is not linear in the value; average the values
                let mean = leaf
                    .members
                    .iter()
                    .map(|&r| p.decode_f64(col[r as usize]))
                    .sum::<f64>()
                    / count as f64;
                values.push(mean);
                qmeans.push(p.raw_key_of(mean) as f64);
            } else {
                let dev_sum: u128 = leaf
                    .members
                    .iter()
                    .map(|&r| (col[r as usize] & !masks[c]) as u128)
                    .sum();
                let q = leaf.base[c] as f64 + dev_sum as f64 / count as f64;
                values.push(p.to_original(q));
                qmeans.push(q);
            }
        }
    }
    let mut samples = CondensedSampleSet {
        d,
        values,
        weights,
        analytic_bits,
    };
    if truncation == Truncation::Exact {
        merge_to(&mut samples, &mut qmeans, m_max, matrix);
    }
    let requantized = requantize(&samples, &qmeans, matrix);
    Ok(CondensedGeneration {
        samples,
        quantized_means: qmeans,
        requantized,
        count_trace: trace,
    })
}

fn merge_to(
    samples: &mut CondensedSampleSet,
    qmeans: &mut Vec<f64>,
    target: usize,
    matrix: &QuantizedMatrix,
) {
    let d = samples.d;
    while samples.m() > target.max(1) {
        let m = samples.m();
        let light = (0..m).min_by_key(|&j| (samples.weights[j], j)).unwrap();
        let a = samples.sample(light);
        let nearest = (0..m)
            .filter(|&j| j != light)
            .map(|j| {
                let dist: f64 = samples
                    .sample(j)
                    .iter()
                    .zip(a)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                (dist, j)
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .unwrap()
            .1;
        let (wl, wn) = (samples.weights[light] as f64, samples.weights[nearest] as f64);
        let total = wl + wn;
        for c in 0..d {
            let (il, inn) = (light * d + c, nearest * d + c);
            samples.values[inn] = (samples.values[il] * wl + samples.values[inn] * wn) / total;
            let p = &matrix.params()[c];
            qmeans[inn] = if p.encoding == Encoding::RawBits {
                p.raw_key_of(samples.values[inn]) as f64
            } else {
                (qmeans[il] * wl + qmeans[inn] * wn) / total
            };
        }
        samples.weights[nearest] += samples.weights[light];
        samples.weights.remove(light);
        samples.values.drain(light * d..(light + 1) * d);
        qmeans.drain(light * d..(light + 1) * d);
    }
}

fn requantize(
    samples: &CondensedSampleSet,
    qmeans: &[f64],
    matrix: &QuantizedMatrix,
) -> Vec<Vec<u64>> {
    let d = samples.d;
    (0..samples.m())
        .map(|j| {
            (0..d)
                .map(|c| {
                    let p = &matrix.params()[c];
                    let q = qmeans[j * d + c].round_ties_even();
                    q.clamp(0.0, p.max_value() as f64) as u64
                })
                .collect()
        })
        .collect()
}

/// One bit addition during a selection run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionStep {
    pub position: usize,
    pub entropy: f64,
    pub base_count: usize,
    pub size: u64,
}

/// Result of a compression bit selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionSelection {
    /// Best selection found, in selection order.
    pub selection: BitSelection,
    /// Number of leading positions that were selected before the search
    /// (constant bits).
    pub initial_len: usize,
    pub initial_size: u64,
    pub best_size: u64,
    pub best_model: SizeModel,
    pub steps: Vec<SelectionStep>,
}

/// Entropy-ordered compression selection over `extended` (the original rows
/// followed by `m` condensed rows). `stats` must come from the original rows.
pub fn select_compression_bits(
    extended: &QuantizedMatrix,
    stats: &BitStats,
    m: usize,
    tau: usize,
    s_params: u64,
) -> Result<CompressionSelection> {
    select_compression_tree(extended, stats, m, tau, s_params).map(|(s, _)| s)
}

/// As [`select_compression_bits`], also returning the base tree positioned
/// at the best selection.
pub fn select_compression_tree<'a>(
    extended: &'a QuantizedMatrix,
    stats: &BitStats,
    m: usize,
    tau: usize,
    s_params: u64,
) -> Result<(CompressionSelection, BaseTree<'a>)> {
    let width = extended.chunk_width();
    if stats.positions.len() != width {
        return Err(GdError::InvalidParameter(
            "bit statistics do not match the chunk width".into(),
        ));
    }
    if m > extended.n() || stats.rows != extended.n() - m {
        return Err(GdError::InvalidParameter(
            "bit statistics must cover exactly the original rows".into(),
        ));
    }
    if tau < 1 {
        return Err(GdError::InvalidParameter("tau must be at least 1".into()));
    }
    let ctx = SizeContext {
        n: stats.rows as u64,
        m: m as u64,
        chunk_width: width as u64,
        s_params,
    };

    let mut tree = BaseTree::new(extended);
    for p in constant_positions(extended) {
        tree.add_bit(p)?;
    }
    let initial_len = tree.selected_bits().len();
    let initial_size = ctx.size(tree.leaf_count(), initial_len);
    let mut best_size = initial_size;
    let mut best_len = initial_len;

    let mut order: Vec<usize> = (0..width).filter(|&p| !tree.is_selected(p)).collect();
    order.sort_by(|&a, &b| stats.entropy(a).total_cmp(&stats.entropy(b)).then(a.cmp(&b)));

    let mut steps = Vec::new();
    let mut stale = 0usize;
    for p in order {
        let n_b = tree.add_bit(p)?;
        let l_b = tree.selected_bits().len();
        let size = ctx.size(n_b, l_b);
        steps.push(SelectionStep {
            position: p,
            entropy: stats.entropy(p),
            base_count: n_b,
            size,
        });
        if size < best_size {
            best_size = size;
            best_len = l_b;
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= tau {
            break;
        }
    }
    while tree.selected_bits().len() > best_len {
        tree.remove_last_bit()?;
    }
    let selection = BitSelection::new(tree.selected_bits().to_vec(), width)?;
    let best_model = ctx.model(tree.leaf_count(), best_len);
    debug_assert_eq!(compressed_size(&best_model), best_size);
    Ok((
        CompressionSelection {
            selection,
            initial_len,
            initial_size,
            best_size,
            best_model,
            steps,
        },
        tree,
    ))
}

/// Size-only greedy baseline. Starting from no base bits, each iteration
/// tries the most significant remaining bit of every column and commits the
/// one with the smallest size; it stops after `tau` consecutive commits that
/// do not improve on the best size (`tau = 1`: as soon as no candidate
/// improves).
pub fn greedy_select_bits(matrix: &QuantizedMatrix, tau: usize) -> Result<CompressionSelection> {
    if tau < 1 {
        return Err(GdError::InvalidParameter("tau must be at least 1".into()));
    }
    let width = matrix.chunk_width();
    let ctx = SizeContext {
        n: matrix.n() as u64,
        m: 0,
        chunk_width: width as u64,
        s_params: 0,
    };
    let mut tree = BaseTree::new(matrix);
    let mut cursor: Vec<usize> = (0..matrix.d())
        .map(|c| matrix.column_positions(c).start)
        .collect();
    let initial_size = ctx.size(1, 0);
    let mut best_size = initial_size;
    let mut best_len = 0;
    let mut steps = Vec::new();
    let mut stale = 0usize;
    loop {
        let mut best: Option<(u64, usize, usize)> = None;
        for c in 0..matrix.d() {
            let p = cursor[c];
            if p >= matrix.column_positions(c).end {
                continue;
            }
            let n_b = tree.add_bit(p)?;
            let size = ctx.size(n_b, tree.selected_bits().len());
            tree.remove_last_bit()?;
            if best.is_none_or(|(s, _, _)| size < s) {
                best = Some((size, c, n_b));
            }
        }
        let Some((size, c, n_b)) = best else { break };
        let p = cursor[c];
        tree.add_bit(p)?;
        cursor[c] += 1;
        steps.push(SelectionStep {
            position: p,
            entropy: f64::NAN,
            base_count: n_b,
            size,
        });
        let l_b = tree.selected_bits().len();
        if size < best_size {
            best_size = size;
            best_len = l_b;
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= tau {
            break;
        }
    }
    while tree.selected_bits().len() > best_len {
        tree.remove_last_bit()?;
    }
    Ok(CompressionSelection {
        selection: BitSelection::new(tree.selected_bits().to_vec(), width)?,
        initial_len: 0,
        initial_size,
        best_size,
        best_model: ctx.model(tree.leaf_count(), best_len),
        steps,
    })
}
