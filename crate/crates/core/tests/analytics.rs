mod common;

use gdpack_core::analytics::{
    adjusted_mutual_information, analyze, approximation_ratio, assign_labels, compute_ratios,
    lloyd, silhouette, sse_against, weighted_kmeans, AnalyticsMode, AnalyzeConfig,
};
use gdpack_core::codec::{compress, CompressConfig};
use gdpack_core::synthetic::gaussian_mixture;
use gdpack_core::{Column, ColumnData, Table};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimal SSE over every split of 1-D points into two non-empty groups.
fn best_two_partition(points: &[f64]) -> f64 {
    let m = points.len();
    let sse = |group: &[f64]| {
        let mean = group.iter().sum::<f64>() / group.len() as f64;
        group.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
    };
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << m) - 1 {
        let side = |bit: u32| -> Vec<f64> { (0..m).filter(|&i| mask >> i & 1 == bit).map(|i| points[i]).collect() };
        best = best.min(sse(&side(1)) + sse(&side(0)));
    }
    best
}

/// Expected mutual information from hypergeometric probabilities built by
/// products of ratios, no factorial tables.
fn ami_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let r = a.iter().max().unwrap() + 1;
    let c = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0usize; c]; r];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let rows: Vec<usize> = table.iter().map(|t| t.iter().sum()).collect();
    let cols: Vec<usize> = (0..c).map(|j| table.iter().map(|t| t[j]).sum()).collect();
    let nf = n as f64;
    let h = |v: &[usize]| -> f64 {
        v.iter()
            .filter(|&&x| x > 0)
            .map(|&x| {
                let p = x as f64 / nf;
                -p * p.ln()
            })
            .sum()
    };
    let mut mi = 0.0;
    for i in 0..r {
        for j in 0..c {
            let v = table[i][j] as f64;
            if v > 0.0 {
                mi += v / nf * (nf * v / (rows[i] * cols[j]) as f64).ln();
            }
        }
    }
    // C(n_k, k) as a float
    let choose = |n: usize, k: usize| -> f64 { (0..k).map(|t| (n - t) as f64 / (k - t) as f64).product() };
    let mut emi = 0.0;
    for &ai in &rows {
        for &bj in &cols {
            for nij in (ai + bj).saturating_sub(n).max(1)..=ai.min(bj) {
                let p = choose(ai, nij) * choose(n - ai, bj - nij) / choose(n, bj);
                let v = nij as f64;
                emi += p * v / nf * (nf * v / (ai * bj) as f64).ln();
            }
        }
    }
    (mi - emi) / (0.5 * (h(&rows) + h(&cols)) - emi)
}

fn silhouette_oracle(points: &[f64], labels: &[usize]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let mean_to = |l: usize| {
            let others: Vec<f64> = (0..n)
                .filter(|&j| j != i && labels[j] == l)
                .map(|j| (points[i] - points[j]).abs())
                .collect();
            others.iter().sum::<f64>() / others.len() as f64
        };
        let a = mean_to(labels[i]);
        let b = (0..=*labels.iter().max().unwrap())
            .filter(|&l| l != labels[i])
            .map(mean_to)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

#[test]
fn six_points_match_exhaustive_two_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let pts: Vec<f64> = (0..6).map(|_| rng.random_range(-10.0..10.0)).collect();
        let r = weighted_kmeans(&pts, &[1.0; 6], 1, 2, 20, 5).unwrap();
        let best = best_two_partition(&pts);
        assert!((r.sse - best).abs() < 1e-9, "{} vs {best} for {pts:?}", r.sse);
    }
}

#[test]
fn unit_weights_match_plain_lloyd_label_for_label() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<f64> = (0..400).map(|_| rng.random_range(0.0..100.0)).collect();
    let r = weighted_kmeans(&pts, &[1.0; 200], 2, 4, 3, 11).unwrap();
    let (labels, centers, sse, _) = lloyd(&pts, &[1.0; 200], 2, &r.initial_centers, 300).unwrap();
    assert_eq!(labels, r.labels);
    assert_eq!(centers, r.centers);
    assert_eq!(sse, r.sse);
    // each center is the mean of its members
    for j in 0..4 {
        let members: Vec<usize> = (0..200).filter(|&i| r.labels[i] == j).collect();
        for t in 0..2 {
            let mean = members.iter().map(|&i| pts[i * 2 + t]).sum::<f64>() / members.len() as f64;
            assert!((mean - r.centers[j * 2 + t]).abs() < 1e-9);
        }
    }
}

#[test]
fn clustering_is_deterministic_for_a_seed() {
    let (t, _) = gaussian_mixture(2_000, 3, 4, 8.0, 1).unwrap();
    let pts = t.to_points();
    let w = vec![1.0; 2_000];
    let a = weighted_kmeans(&pts, &w, 3, 4, 5, 99).unwrap();
    let b = weighted_kmeans(&pts, &w, 3, 4, 5, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ar_of_reference_against_itself_is_one() {
    let (t, _) = gaussian_mixture(3_000, 2, 3, 6.0, 2).unwrap();
    let pts = t.to_points();
    let r = weighted_kmeans(&pts, &vec![1.0; 3_000], 2, 3, 4, 0).unwrap();
    let sse = sse_against(&pts, 2, &r.centers);
    assert_eq!(approximation_ratio(sse, sse).unwrap(), 1.0);
    assert_eq!(assign_labels(&pts, 2, &r.centers), r.labels);
    assert!((sse - r.sse).abs() <= 1e-6 * sse);
}

#[test]
fn ami_matches_direct_formula_and_reference_value() {
    let a = [0, 0, 0, 1, 1, 1, 2, 2, 2, 2];
    let b = [0, 0, 1, 1, 1, 2, 2, 2, 0, 0];
    let got = adjusted_mutual_information(&a, &b).unwrap();
    assert!((got - ami_oracle(&a, &b)).abs() < 1e-12);
    // scikit-learn 1.x adjusted_mutual_info_score on the same labels
    assert!((got - 0.171_524_235_400_728_5).abs() < 1e-12);
    let a2 = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
    let b2 = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
    let got2 = adjusted_mutual_information(&a2, &b2).unwrap();
    assert!((got2 - ami_oracle(&a2, &b2)).abs() < 1e-12);
    assert!((got2 - -0.062_500_514_316_106_54).abs() < 1e-12);
}

#[test]
fn silhouette_matches_definition() {
    let pts = [0.0, 1.0, 3.0, 10.0, 11.0, 15.0];
    let labels = [0, 0, 0, 1, 1, 1];
    let got = silhouette(&pts, 1, &labels, 100, 0).unwrap();
    assert!((got - silhouette_oracle(&pts, &labels)).abs() < 1e-12);
    // point 0: a = (1 + 3) / 2, b = (10 + 11 + 15) / 3
    let s0 = (12.0 - 2.0) / 12.0;
    assert!((s0 - 0.833_333_333_333_333_4f64).abs() < 1e-15);
    assert!((got - 0.747_524_848_449_995_6).abs() < 1e-12);
}

#[test]
fn silhouette_sampling_is_seeded() {
    let (t, _) = gaussian_mixture(3_000, 2, 3, 6.0, 8).unwrap();
    let pts = t.to_points();
    let labels = assign_labels(&pts, 2, &[0.0, 0.0, 5.0, 5.0, -5.0, 5.0]);
    let a = silhouette(&pts, 2, &labels, 500, 1).unwrap();
    let b = silhouette(&pts, 2, &labels, 500, 1).unwrap();
    assert_eq!(a, b);
    assert!((-1.0..=1.0).contains(&a));
}

#[test]
fn ratios_on_incompressible_and_compressible_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // uniformly random bit patterns leave nothing to deduplicate
    let noise: Vec<f64> = std::iter::repeat_with(|| f64::from_bits(rng.random()))
        .filter(|v| v.is_finite())
        .take(500)
        .collect();
    let t = Table::new(vec![Column::new("u", ColumnData::F64(noise))]).unwrap();
    let (archive, _) = compress(&t, &CompressConfig::default()).unwrap();
    let r = compute_ratios(&archive, t.raw_size_bytes(), AnalyticsMode::Condensed).unwrap();
    assert!(r.cr > 1.0, "random bit patterns should not shrink: {}", r.cr);
    assert!(r.adr <= r.cr);

    let (t, _) = gaussian_mixture(20_000, 4, 5, 10.0, 3).unwrap();
    let (archive, _) = compress(&t, &CompressConfig::default()).unwrap();
    for mode in [AnalyticsMode::Condensed, AnalyticsMode::Centroid] {
        let r = compute_ratios(&archive, t.raw_size_bytes(), mode).unwrap();
        assert!(r.cr > 0.0 && r.adr > 0.0 && r.adr <= 1.0);
        assert!(r.adr <= r.cr, "{mode:?}: {r:?}");
    }
}

#[test]
fn analyze_reports_bounded_metrics() {
    let (t, _) = gaussian_mixture(10_000, 3, 4, 10.0, 12).unwrap();
    let (archive, _) = compress(&t, &CompressConfig { m_max: Some(256), ..Default::default() }).unwrap();
    let config = AnalyzeConfig { k: 4, repeats: 2, inits: 4, seed: 3, silhouette_sample: 1_000, ..Default::default() };
    let report = analyze(&archive, &t, &config, None).unwrap();
    assert_eq!(report.repeats.len(), 2);
    assert!(report.ami <= 1.0 + 1e-12);
    let s = report.silhouette.unwrap();
    assert!((-1.0..=1.0).contains(&s));
    assert!(report.ar.unwrap() >= 1.0 - 1e-9);
    assert!(report.points <= 10_000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ami_is_symmetric_and_permutation_invariant(
        pairs in proptest::collection::vec((0usize..4, 0usize..3), 2..60),
        perm in Just([2usize, 0, 3, 1])
    ) {
        let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let ab = adjusted_mutual_information(&a, &b).unwrap();
        let ba = adjusted_mutual_information(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        let renamed: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
        let rb = adjusted_mutual_information(&renamed, &b).unwrap();
        prop_assert!((ab - rb).abs() < 1e-9);
        prop_assert!(ab <= 1.0 + 1e-9);
    }
}
