//! Clustering on compressed summaries and the evaluation metrics.

use std::io::Cursor;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitmatrix::Table;
use crate::codec::{base_centroids, extract_condensed, Archive, HEADER_LEN};
use crate::error::{GdError, Result};
use crate::selection::weight_width;

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_SILHOUETTE_SAMPLE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    /// Row-major `k × d`.
    pub centers: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Seeded centers of the winning initialization.
    pub initial_centers: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

// (index, squared distance) of the nearest center; ties go to the lower index.
fn nearest(p: &[f64], centers: &[f64], d: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.chunks_exact(d).enumerate() {
        let dist = sq_dist(p, c);
        if dist < best.1 {
            best = (j, dist);
        }
    }
    best
}

fn check_points(points: &[f64], weights: &[f64], d: usize) -> Result<usize> {
    if d == 0 || points.len() % d != 0 {
        return Err(GdError::InvalidParameter(
            "points must be a non-empty row-major matrix".into(),
        ));
    }
    let m = points.len() / d;
    if weights.len() != m {
        return Err(GdError::InvalidParameter(format!(
            "{} weights for {m} points",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(GdError::InvalidParameter("weights must be positive".into()));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(GdError::InvalidParameter("points must be finite".into()));
    }
    Ok(m)
}

// Index of the point where the running sum of `mass` first exceeds `target`.
fn walk(mass: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    for (i, &x) in mass.iter().enumerate() {
        acc += x;
        if target < acc {
            return i;
        }
    }
    mass.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Weighted k-means++ seeding: each draw picks a point with probability
/// proportional to `w · D²`, the first one proportional to `w`.
pub fn kmeans_pp_seed(
    points: &[f64],
    weights: &[f64],
    d: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let m = weights.len();
    let total: f64 = weights.iter().sum();
    let first = walk(weights, rng.random::<f64>() * total);
    let mut centers = points[first * d..(first + 1) * d].to_vec();
    let mut dist: Vec<f64> = (0..m)
        .map(|i| sq_dist(&points[i * d..(i + 1) * d], &centers))
        .collect();
    while centers.len() < k * d {
        let mass: Vec<f64> = dist.iter().zip(weights).map(|(x, w)| x * w).collect();
        let sum: f64 = mass.iter().sum();
        let pick = if sum > 0.0 {
            walk(&mass, rng.random::<f64>() * sum)
        } else {
            walk(weights, rng.random::<f64>() * total)
        };
        let c = points[pick * d..(pick + 1) * d].to_vec();
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(&points[i * d..(i + 1) * d], &c));
        }
        centers.extend(c);
    }
    centers
}

/// Lloyd iterations from `initial` until the assignment stops changing or
/// `max_iter` is reached. Returns (labels, centers, weighted SSE,
/// iterations). A cluster left empty is moved onto the point farthest from
/// its current center.
pub fn lloyd(
    points: &[f64],
    weights: &[f64],
    d: usize,
    initial: &[f64],
    max_iter: usize,
) -> Result<(Vec<usize>, Vec<f64>, f64, usize)> {
    let m = check_points(points, weights, d)?;
    if initial.is_empty() || initial.len() % d != 0 {
        return Err(GdError::InvalidParameter("initial centers do not match d".into()));
    }
    let k = initial.len() / d;
    let mut centers = initial.to_vec();
    let mut labels: Vec<usize> = vec![usize::MAX; m];
    let mut dists = vec![0.0; m];
    let mut iterations = 0;
    loop {
        let mut changed = false;
        for i in 0..m {
            let (j, dist) = nearest(&points[i * d..(i + 1) * d], &centers, d);
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
            dists[i] = dist;
        }
        if !changed || iterations >= max_iter {
            break;
        }
        iterations += 1;
        let mut sums = vec![0.0; k * d];
        let mut mass = vec![0.0; k];
        for i in 0..m {
            let j = labels[i];
            mass[j] += weights[i];
            for t in 0..d {
                sums[j * d + t] += weights[i] * points[i * d + t];
            }
        }
        for j in 0..k {
            if mass[j] > 0.0 {
                for t in 0..d {
                    centers[j * d + t] = sums[j * d + t] / mass[j];
                }
            } else {
                let far = (0..m)
                    .fold((0, f64::NEG_INFINITY), |acc, i| {
                        if dists[i] > acc.1 {
                            (i, dists[i])
                        } else {
                            acc
                        }
                    })
                    .0;
                centers[j * d..(j + 1) * d].copy_from_slice(&points[far * d..(far + 1) * d]);
                dists[far] = 0.0;
            }
        }
    }
    let sse = (0..m).map(|i| weights[i] * dists[i]).sum();
    Ok((labels, centers, sse, iterations))
}

/// Best of `inits` seeded Lloyd runs by weighted SSE; ties keep the earliest.
/// Initialization `i` draws from a ChaCha8 stream `i` of `seed`.
pub fn weighted_kmeans(
    points: &[f64],
    weights: &[f64],
    d: usize,
    k: usize,
    inits: usize,
    seed: u64,
) -> Result<ClusteringResult> {
    let m = check_points(points, weights, d)?;
    if k == 0 || k > m {
        return Err(GdError::InvalidParameter(format!("k = {k} must be in 1..={m}")));
    }
    if inits == 0 {
        return Err(GdError::InvalidParameter("inits must be at least 1".into()));
    }
    let runs: Vec<Result<ClusteringResult>> = (0..inits)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let initial = kmeans_pp_seed(points, weights, d, k, &mut rng);
            let (labels, centers, sse, iterations) =
                lloyd(points, weights, d, &initial, DEFAULT_MAX_ITER)?;
            Ok(ClusteringResult {
                labels,
                centers,
                sse,
                iterations,
                seed,
                initial_centers: initial,
            })
        })
        .collect();
    let mut best: Option<ClusteringResult> = None;
    for r in runs {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.sse < b.sse) {
            best = Some(r);
        }
    }
    Ok(best.expect("inits >= 1"))
}

/// Nearest-center label of every point.
pub fn assign_labels(points: &[f64], d: usize, centers: &[f64]) -> Vec<usize> {
    points
        .par_chunks_exact(d)
        .map(|p| nearest(p, centers, d).0)
        .collect()
}

/// Unweighted SSE of `points` against their nearest centers.
pub fn sse_against(points: &[f64], d: usize, centers: &[f64]) -> f64 {
    points
        .par_chunks_exact(d)
        .map(|p| nearest(p, centers, d).1)
        .sum()
}

pub fn approximation_ratio(sse_compressed: f64, sse_original: f64) -> Result<f64> {
    if !(sse_original > 0.0) {
        return Err(GdError::Undefined("approximation ratio with zero reference SSE"));
    }
    Ok(sse_compressed / sse_original)
}

fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

fn entropy_of(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Adjusted mutual information with arithmetic-mean normalization.
///
/// A labeling with a single cluster yields 0. When the normalizer equals the
/// expected mutual information, identical partitions yield 1 and others 0.
pub fn adjusted_mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(GdError::InvalidParameter("label vectors differ in length".into()));
    }
    if a.is_empty() {
        return Err(GdError::InvalidParameter("label vectors are empty".into()));
    }
    let (a, r) = relabel(a);
    let (b, c) = relabel(b);
    if r == 1 || c == 1 {
        return Ok(0.0);
    }
    let n = a.len();
    let nf = n as f64;
    let mut table = vec![0u64; r * c];
    for (&x, &y) in a.iter().zip(&b) {
        table[x * c + y] += 1;
    }
    let mut rows = vec![0u64; r];
    let mut cols = vec![0u64; c];
    for i in 0..r {
        for j in 0..c {
            rows[i] += table[i * c + j];
            cols[j] += table[i * c + j];
        }
    }
    let mut mi = 0.0;
    for i in 0..r {
        for j in 0..c {
            let nij = table[i * c + j];
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / nf * (nf * nij / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }

    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut emi = 0.0;
    for &ai in &rows {
        for &bj in &cols {
            let (ai, bj) = (ai as usize, bj as usize);
            let lo = (ai + bj).saturating_sub(n).max(1);
            let hi = ai.min(bj);
            let fixed = ln_fact[ai] + ln_fact[bj] + ln_fact[n - ai] + ln_fact[n - bj] - ln_fact[n];
            for nij in lo..=hi {
                let v = nij as f64;
                let term = v / nf * (nf * v / (ai as f64 * bj as f64)).ln();
                let ln_p = fixed
                    - ln_fact[nij]
                    - ln_fact[ai - nij]
                    - ln_fact[bj - nij]
                    - ln_fact[n + nij - ai - bj];
                emi += term * ln_p.exp();
            }
        }
    }
    let normalizer = 0.5 * (entropy_of(&rows, nf) + entropy_of(&cols, nf));
    let denom = normalizer - emi;
    if denom.abs() < 1e-15 {
        let same = table.iter().filter(|&&x| x > 0).count() == r && r == c;
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok((mi - emi) / denom)
}

/// Mean silhouette over a seeded sample of at most `sample_size` points
/// (all points, in order, when there are no more than that). Distances are
/// computed within the sample.
pub fn silhouette(
    points: &[f64],
    d: usize,
    labels: &[usize],
    sample_size: usize,
    seed: u64,
) -> Result<f64> {
    if d == 0 || points.len() != labels.len() * d {
        return Err(GdError::InvalidParameter("labels do not match points".into()));
    }
    let n = labels.len();
    let idx: Vec<usize> = if n <= sample_size {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = rand::seq::index::sample(&mut rng, n, sample_size).into_vec();
        v.sort_unstable();
        v
    };
    let (lab, k) = relabel(&idx.iter().map(|&i| labels[i]).collect::<Vec<_>>());
    if k < 2 {
        return Err(GdError::Undefined("silhouette needs at least two clusters"));
    }
    let mut sizes = vec![0usize; k];
    for &l in &lab {
        sizes[l] += 1;
    }
    let scores: Vec<f64> = (0..idx.len())
        .into_par_iter()
        .map(|s| {
            let own = lab[s];
            if sizes[own] == 1 {
                return 0.0;
            }
            let p = &points[idx[s] * d..(idx[s] + 1) * d];
            let mut sums = vec![0.0; k];
            for (t, &i) in idx.iter().enumerate() {
                sums[lab[t]] += sq_dist(p, &points[i * d..(i + 1) * d]).sqrt();
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&j| j != own)
                .map(|j| sums[j] / sizes[j] as f64)
                .fold(f64::INFINITY, f64::min);
            let top = a.max(b);
            if top > 0.0 {
                (b - a) / top
            } else {
                0.0
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Which compressed summary analytics runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticsMode {
    /// Weighted condensed samples (base plus mean deviation).
    #[default]
    Condensed,
    /// Base centroids weighted by base counts.
    Centroid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratios {
    pub cr: f64,
    pub adr: f64,
    pub archive_bytes: u64,
    pub accessed_bytes: u64,
}

/// Bytes an analytics run in `mode` has to read from `archive`.
pub fn accessed_bytes(archive: &Archive, mode: AnalyticsMode) -> Result<u64> {
    match mode {
        AnalyticsMode::Condensed => {
            extract_condensed(Cursor::new(archive.as_bytes())).map(|(_, read)| read)
        }
        AnalyticsMode::Centroid => {
            let p = archive.params();
            let counts = (p.n_b * weight_width(p.n) as u64).div_ceil(8);
            Ok(HEADER_LEN as u64 + archive.params_len() as u64 + archive.layout().bases + counts)
        }
    }
}

pub fn compute_ratios(
    archive: &Archive,
    original_size_bytes: usize,
    mode: AnalyticsMode,
) -> Result<Ratios> {
    if original_size_bytes == 0 {
        return Err(GdError::InvalidParameter("original size is zero".into()));
    }
    let accessed = accessed_bytes(archive, mode)?;
    let total = archive.len() as u64;
    Ok(Ratios {
        cr: total as f64 / original_size_bytes as f64,
        adr: accessed as f64 / original_size_bytes as f64,
        archive_bytes: total,
        accessed_bytes: accessed,
    })
}

/// Weighted points analytics runs on: (row-major values, weights).
pub fn summary_points(archive: &Archive, mode: AnalyticsMode) -> Result<(Vec<f64>, Vec<f64>)> {
    match mode {
        AnalyticsMode::Condensed => {
            let (s, _) = extract_condensed(Cursor::new(archive.as_bytes()))?;
            let w = s.weights_f64();
            Ok((s.values, w))
        }
        AnalyticsMode::Centroid => {
            let c = base_centroids(archive)?;
            let w = c.weights_f64();
            Ok((c.values, w))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeConfig {
    pub k: usize,
    pub repeats: usize,
    pub inits: usize,
    pub seed: u64,
    pub mode: AnalyticsMode,
    pub silhouette_sample: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            k: 5,
            repeats: 3,
            inits: 10,
            seed: 0,
            mode: AnalyticsMode::Condensed,
            silhouette_sample: DEFAULT_SILHOUETTE_SAMPLE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatMetrics {
    pub seed: u64,
    pub ar: Option<f64>,
    pub ami: f64,
    pub silhouette: Option<f64>,
    pub sse_compressed: f64,
    pub sse_original: f64,
    #[serde(serialize_with = "secs")]
    pub clustering_time: Duration,
    #[serde(serialize_with = "secs")]
    pub full_clustering_time: Duration,
}

/// Metrics of one analytics evaluation; scalar fields are medians over
/// repeats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mode: AnalyticsMode,
    pub cr: f64,
    pub adr: f64,
    pub ar: Option<f64>,
    pub ami: f64,
    pub silhouette: Option<f64>,
    /// Summary size analytics ran on.
    pub points: usize,
    #[serde(serialize_with = "opt_secs")]
    pub configuration_time: Option<Duration>,
    #[serde(serialize_with = "secs")]
    pub clustering_time: Duration,
    #[serde(serialize_with = "secs")]
    pub full_clustering_time: Duration,
    pub repeats: Vec<RepeatMetrics>,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

fn opt_secs<S: serde::Serializer>(
    d: &Option<Duration>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_some(&d.as_secs_f64()),
        None => s.serialize_none(),
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn median_duration(values: &[Duration]) -> Duration {
    let mut v = values.to_vec();
    v.sort();
    v[v.len() / 2]
}

/// Seed of repeat `r`: the first output of ChaCha8 stream `r` of `seed`.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng.random()
}

/// Clusters the compressed summary and the full original data with the same
/// seeds, then compares both clusterings on the full data: AR from the SSE
/// of each center set, AMI between full-data labels and labels transferred
/// from the compressed-side centers, silhouette of the transferred labels.
pub fn analyze(
    archive: &Archive,
    original: &Table,
    config: &AnalyzeConfig,
    configuration_time: Option<Duration>,
) -> Result<MetricsReport> {
    if config.repeats == 0 {
        return Err(GdError::InvalidParameter("repeats must be at least 1".into()));
    }
    let d = original.width();
    if archive.params().d() != d || archive.params().n as usize != original.rows() {
        return Err(GdError::InvalidParameter(
            "archive does not match the original table".into(),
        ));
    }
    let ratios = compute_ratios(archive, original.raw_size_bytes(), config.mode)?;
    let (summary, weights) = summary_points(archive, config.mode)?;
    let full = original.to_points();
    let ones = vec![1.0; original.rows()];
    let points = weights.len();
    let k = config.k.min(points);

    let mut repeats = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let seed = repeat_seed(config.seed, r);
        let t = Instant::now();
        let compressed = weighted_kmeans(&summary, &weights, d, k, config.inits, seed)?;
        let clustering_time = t.elapsed();
        let t = Instant::now();
        let reference = weighted_kmeans(&full, &ones, d, config.k, config.inits, seed)?;
        let full_clustering_time = t.elapsed();

        let sse_compressed = sse_against(&full, d, &compressed.centers);
        let sse_original = sse_against(&full, d, &reference.centers);
        let transferred = assign_labels(&full, d, &compressed.centers);
        repeats.push(RepeatMetrics {
            seed,
            ar: approximation_ratio(sse_compressed, sse_original).ok(),
            ami: adjusted_mutual_information(&reference.labels, &transferred)?,
            silhouette: silhouette(&full, d, &transferred, config.silhouette_sample, seed).ok(),
            sse_compressed,
            sse_original,
            clustering_time,
            full_clustering_time,
        });
    }
    let collect = |f: &dyn Fn(&RepeatMetrics) -> Option<f64>| {
        let mut v: Vec<f64> = repeats.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| median(&mut v))
    };
    Ok(MetricsReport {
        mode: config.mode,
        cr: ratios.cr,
        adr: ratios.adr,
        ar: collect(&|r| r.ar),
        ami: collect(&|r| Some(r.ami)).unwrap_or(f64::NAN),
        silhouette: collect(&|r| r.silhouette),
        points,
        configuration_time,
        clustering_time: median_duration(
            &repeats.iter().map(|r| r.clustering_time).collect::<Vec<_>>(),
        ),
        full_clustering_time: median_duration(
            &repeats.iter().map(|r| r.full_clustering_time).collect::<Vec<_>>(),
        ),
        repeats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_mean_example() {
        let r = weighted_kmeans(&[0.0, 10.0], &[1.0, 3.0], 1, 1, 3, 7).unwrap();
        assert_eq!(r.centers, vec![7.5]);
        assert_eq!(r.sse, 75.0);
    }

    #[test]
    fn k_equals_m_gives_zero_sse() {
        let pts = [0.0, 0.0, 5.0, 5.0, -3.0, 1.0];
        let r = weighted_kmeans(&pts, &[1.0, 2.0, 3.0], 2, 3, 5, 1).unwrap();
        assert_eq!(r.sse, 0.0);
        let mut centers: Vec<Vec<f64>> = r.centers.chunks(2).map(|c| c.to_vec()).collect();
        centers.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(centers, vec![vec![-3.0, 1.0], vec![0.0, 0.0], vec![5.0, 5.0]]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(weighted_kmeans(&[1.0], &[1.0], 1, 2, 1, 0).is_err());
        assert!(weighted_kmeans(&[1.0], &[0.0], 1, 1, 1, 0).is_err());
        assert!(weighted_kmeans(&[1.0, 2.0], &[1.0], 1, 1, 1, 0).is_err());
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // second center starts far from everything and captures nothing
        let pts = [0.0, 1.0, 10.0, 11.0];
        let (labels, centers, sse, _) = lloyd(&pts, &[1.0; 4], 1, &[5.0, 100.0], 50).unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[2], labels[3]);
        assert_ne!(labels[0], labels[2]);
        assert_eq!(sse, 1.0);
        assert_eq!(centers.len(), 2);
    }

    #[test]
    fn ratio_cases() {
        assert_eq!(approximation_ratio(4.0, 4.0).unwrap(), 1.0);
        assert_eq!(approximation_ratio(8.0, 4.0).unwrap(), 2.0);
        assert!(matches!(approximation_ratio(1.0, 0.0), Err(GdError::Undefined(_))));
    }

    #[test]
    fn ami_basics() {
        let a = [0, 0, 1, 1, 2, 2];
        assert!((adjusted_mutual_information(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let p = [5, 5, 3, 3, 9, 9];
        assert!((adjusted_mutual_information(&a, &p).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(adjusted_mutual_information(&a, &[0; 6]).unwrap(), 0.0);
        assert!(adjusted_mutual_information(&a, &[0; 5]).is_err());
    }

    #[test]
    fn silhouette_limits() {
        let pts = [0.0, 0.1, 100.0, 100.1];
        let s = silhouette(&pts, 1, &[0, 0, 1, 1], 10, 0).unwrap();
        assert!(s > 0.99);
        let same = [2.0; 4];
        assert_eq!(silhouette(&same, 1, &[0, 0, 1, 1], 10, 0).unwrap(), 0.0);
        assert!(matches!(
            silhouette(&pts, 1, &[0; 4], 10, 0),
            Err(GdError::Undefined(_))
        ));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
