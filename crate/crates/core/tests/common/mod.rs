#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gdpack_core::{Column, ColumnData, Table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// Every corpus CSV, sorted by file name.
pub fn corpus() -> Vec<(String, Table)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(data_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, load_csv(&p))
        })
        .collect()
}

/// Columns whose cells all parse as i64 become integers, the rest f64.
pub fn load_csv(path: &Path) -> Table {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let names: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        for (c, v) in record.unwrap().iter().enumerate() {
            cells[c].push(v.trim().to_string());
        }
    }
    let columns = names
        .into_iter()
        .zip(cells)
        .map(|(name, col)| {
            let ints: Option<Vec<i64>> = col.iter().map(|s| s.parse().ok()).collect();
            let data = match ints {
                Some(v) => ColumnData::Int(v),
                None => ColumnData::F64(col.iter().map(|s| s.parse().unwrap()).collect()),
            };
            Column::new(name, data)
        })
        .collect();
    Table::new(columns).unwrap()
}

/// A random column of one of several shapes: narrow or wide integers,
/// decimal floats, single-precision floats, full-precision doubles.
pub fn random_column(rng: &mut ChaCha8Rng, n: usize, name: String) -> Column {
    let data = match rng.random_range(0..6) {
        0 => {
            let lo = rng.random_range(-1000i64..1000);
            let span = rng.random_range(0i64..64);
            ColumnData::Int((0..n).map(|_| lo + rng.random_range(0..=span)).collect())
        }
        1 => ColumnData::Int((0..n).map(|_| rng.random::<i64>() >> rng.random_range(0..63)).collect()),
        2 => {
            let scale = 10f64.powi(rng.random_range(0..5));
            let centre = rng.random_range(-500.0..500.0);
            ColumnData::F64(
                (0..n)
                    .map(|_| ((centre + rng.random_range(-50.0..50.0)) * scale).round() / scale)
                    .collect(),
            )
        }
        3 => ColumnData::F32((0..n).map(|_| rng.random_range(-1e3f32..1e3)).collect()),
        4 => ColumnData::F64(
            (0..n)
                .map(|_| rng.random::<f64>() * 10f64.powi(rng.random_range(-8..8)))
                .collect(),
        ),
        _ => {
            let levels: Vec<f64> = (0..4).map(|_| rng.random_range(-9..9) as f64 * 0.25).collect();
            ColumnData::F64((0..n).map(|_| levels[rng.random_range(0..4)]).collect())
        }
    };
    Column::new(name, data)
}

pub fn random_table(seed: u64, n: usize, d: usize) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns = (0..d)
        .map(|c| random_column(&mut rng, n, format!("c{c}")))
        .collect();
    Table::new(columns).unwrap()
}
