//! Seeded synthetic datasets for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bitmatrix::{Column, ColumnData, Table};
use crate::error::{GdError, Result};

/// Gaussian mixture with `components` isotropic clusters. Centers are drawn
/// uniformly from `[-spread, spread]^d`, points have unit standard
/// deviation, and values are rounded to two decimals.
pub fn gaussian_mixture(
    n: usize,
    d: usize,
    components: usize,
    spread: f64,
    seed: u64,
) -> Result<(Table, Vec<usize>)> {
    if n == 0 || d == 0 || components == 0 {
        return Err(GdError::InvalidParameter(
            "n, d and components must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<f64> = (0..components * d)
        .map(|_| rng.random_range(-spread..=spread))
        .collect();
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut columns = vec![Vec::with_capacity(n); d];
    let mut truth = Vec::with_capacity(n);
    for _ in 0..n {
        let z = rng.random_range(0..components);
        truth.push(z);
        for (c, col) in columns.iter_mut().enumerate() {
            let v = centers[z * d + c] + noise.sample(&mut rng);
            col.push((v * 100.0).round() / 100.0);
        }
    }
    let table = Table::new(
        columns
            .into_iter()
            .enumerate()
            .map(|(c, v)| Column::new(format!("x{c}"), ColumnData::F64(v)))
            .collect(),
    )?;
    Ok((table, truth))
}

/// Integer table whose rows share a skewed latent cluster. Each value is
/// `center · 2^noise_bits + noise` with a `center_bits`-wide center per
/// (cluster, column) and uniform noise, so high bits are low-entropy and
/// low bits near-uniform.
pub fn clustered_integers(
    n: usize,
    d: usize,
    center_bits: u32,
    noise_bits: u32,
    seed: u64,
) -> Result<Table> {
    if n == 0 || d == 0 {
        return Err(GdError::InvalidParameter("n and d must be positive".into()));
    }
    if center_bits + noise_bits > 62 {
        return Err(GdError::InvalidParameter("values must fit in 62 bits".into()));
    }
    const CLUSTERS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<i64> = (0..CLUSTERS * d)
        .map(|_| rng.random_range(0..1i64 << center_bits))
        .collect();
    // cluster z has probability proportional to 2^-z
    let total: f64 = (0..CLUSTERS).map(|z| 0.5f64.powi(z as i32)).sum();
    let mut columns = vec![Vec::with_capacity(n); d];
    for _ in 0..n {
        let mut u = rng.random::<f64>() * total;
        let mut z = 0;
        while z + 1 < CLUSTERS && u >= 0.5f64.powi(z as i32) {
            u -= 0.5f64.powi(z as i32);
            z += 1;
        }
        for (c, col) in columns.iter_mut().enumerate() {
            col.push((centers[z * d + c] << noise_bits) + rng.random_range(0..1i64 << noise_bits));
        }
    }
    Table::new(
        columns
            .into_iter()
            .enumerate()
            .map(|(c, v)| Column::new(format!("c{c}"), ColumnData::Int(v)))
            .collect(),
    )
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(GdError::InvalidParameter(
            "slope needs at least two paired points".into(),
        ));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(GdError::InvalidParameter("slope needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(GdError::InvalidParameter("x values are all equal".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_is_deterministic() {
        let (a, ta) = gaussian_mixture(100, 3, 4, 10.0, 9).unwrap();
        let (b, tb) = gaussian_mixture(100, 3, 4, 10.0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        assert_eq!(a.rows(), 100);
        assert_eq!(a.width(), 3);
    }

    #[test]
    fn clustered_values_fit_twelve_bits() {
        let t = clustered_integers(500, 4, 6, 6, 1).unwrap();
        for c in t.columns() {
            for r in 0..t.rows() {
                let v = c.data.get_f64(r);
                assert!((0.0..4096.0).contains(&v));
            }
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 1.5).abs() < 1e-12);
    }
}
