mod common;

use std::collections::BTreeMap;
use std::io::Cursor;

use gdpack_core::bitmatrix::{quantize_dataset, FloatMode};
use gdpack_core::codec::{
    base_centroids, base_table, compress, decompress, decompress_extended, extract_condensed,
    Archive, CompressConfig, HEADER_LEN, SECTION_NAMES,
};
use gdpack_core::selection::{generate_condensed_samples, Truncation};
use gdpack_core::{Column, ColumnData, GdError, Table};
use proptest::prelude::*;

fn int_table(values: &[i64]) -> Table {
    Table::new(vec![Column::new("x", ColumnData::Int(values.to_vec()))]).unwrap()
}

fn section_index(name: &str) -> usize {
    SECTION_NAMES.iter().position(|s| *s == name).unwrap()
}

/// Replaces section `name` and patches its checksum and the params checksum
/// so that only structural validation can reject the result.
fn patch_section(archive: &Archive, name: &str, edit: impl FnOnce(&mut [u8])) -> Vec<u8> {
    let i = section_index(name);
    let params_len = archive.params_len();
    let offsets = archive.params().section_offsets(params_len);
    let mut bytes = archive.as_bytes().to_vec();
    let start = offsets[i] as usize;
    let end = start + archive.params().sections[i].len as usize;
    edit(&mut bytes[start..end]);
    let crc = crc32(&bytes[start..end]);
    // the section table closes the params section: 5 × (u64 len, u32 crc)
    let entry = HEADER_LEN + params_len - 12 * (5 - i) + 8;
    bytes[entry..entry + 4].copy_from_slice(&crc.to_le_bytes());
    let params_crc = crc32(&bytes[HEADER_LEN..HEADER_LEN + params_len]);
    bytes[12..16].copy_from_slice(&params_crc.to_le_bytes());
    bytes
}

// bitwise CRC-32 (IEEE, reflected)
fn crc32(data: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in data {
        crc ^= b as u32;
        for _ in 0..8 {
            crc = if crc & 1 == 1 { (crc >> 1) ^ 0xEDB8_8320 } else { crc >> 1 };
        }
    }
    !crc
}

#[test]
fn corpus_round_trips() {
    for (name, t) in common::corpus() {
        let (archive, _) = compress(&t, &CompressConfig::default()).unwrap();
        let reopened = Archive::from_bytes(archive.as_bytes().to_vec()).unwrap();
        let back = decompress(&reopened).unwrap();
        assert_eq!(t.first_mismatch(&back), None, "{name}");
    }
}

#[test]
fn compression_is_deterministic() {
    let t = common::random_table(5, 2_000, 4);
    let config = CompressConfig { m_max: Some(40), ..Default::default() };
    let (a, _) = compress(&t, &config).unwrap();
    let (b, _) = compress(&t, &config).unwrap();
    assert_eq!(a.as_bytes(), b.as_bytes());
}

#[test]
fn identical_rows_choose_empty_deviation() {
    let t = Table::from_rows_f64(&vec![vec![3.25, -1.0, 7.5]; 400]).unwrap();
    let (archive, report) = compress(&t, &CompressConfig::default()).unwrap();
    assert_eq!(archive.params().n_b, 1);
    assert_eq!(report.size_model.l_d, 0);
    assert_eq!(decompress(&archive).unwrap(), t);
    let c = base_centroids(&archive).unwrap();
    assert_eq!(c.values, vec![3.25, -1.0, 7.5]);
    assert_eq!(c.counts, vec![400]);
}

#[test]
fn four_bit_example_base_table_matches_grouping() {
    // 0 and 15 pin the column to offset 0 and width 4
    let values = [8, 9, 10, 2, 3, 0, 15];
    let t = int_table(&values);
    let config = CompressConfig { m_max: Some(2), ..Default::default() };
    let (archive, _) = compress(&t, &config).unwrap();
    let extended = decompress_extended(&archive).unwrap();
    let bits = archive.params().base_bits.sorted();
    let mask: u64 = bits.iter().map(|&p| 1u64 << (3 - p)).sum();
    let mut groups: BTreeMap<u64, usize> = BTreeMap::new();
    for r in 0..extended.n() {
        *groups.entry(extended.value(r, 0) & mask).or_default() += 1;
    }
    let bases: Vec<Vec<u64>> = groups.keys().map(|&b| vec![b]).collect();
    assert_eq!(base_table(&archive).unwrap(), bases);
    assert_eq!(archive.params().n_b as usize, groups.len());
}

#[test]
fn condensed_section_matches_generation() {
    let t = common::random_table(17, 3_000, 3);
    let config = CompressConfig { m_max: Some(50), ..Default::default() };
    let (archive, _) = compress(&t, &config).unwrap();
    let matrix = quantize_dataset(&t, FloatMode::Auto).unwrap();
    let g = generate_condensed_samples(&matrix, 50, None, Truncation::Overshoot).unwrap();
    let (samples, read) = extract_condensed(Cursor::new(archive.as_bytes())).unwrap();
    assert_eq!(samples.values, g.samples.values);
    assert_eq!(samples.weights, g.samples.weights);
    // the archive stores the analytic bits as a set
    assert_eq!(samples.analytic_bits.sorted(), g.samples.analytic_bits.sorted());
    assert_eq!(samples.total_weight(), 3_000);
    assert!(read < archive.len() as u64);
    let layout = archive.layout();
    assert_eq!(read, layout.header + layout.params + layout.weights + layout.condensed);
    // rows n.. of the extended matrix are the requantized samples
    let extended = decompress_extended(&archive).unwrap();
    for (j, row) in g.requantized.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            assert_eq!(extended.value(3_000 + j, c), v);
        }
    }
}

#[test]
fn base_id_out_of_range_is_rejected() {
    let values: Vec<i64> = (0..300).map(|i| (i * 7919) % 4096).collect();
    let (archive, _) = compress(&int_table(&values), &CompressConfig::default()).unwrap();
    let n_b = archive.params().n_b;
    assert!(n_b >= 2 && !n_b.is_power_of_two(), "needs spare id codes, n_b = {n_b}");
    let bytes = patch_section(&archive, "ids", |ids| ids.iter_mut().for_each(|b| *b = 0xFF));
    let err = decompress(&Archive::from_bytes(bytes).unwrap()).unwrap_err();
    assert!(matches!(err, GdError::Integrity { section: "ids", .. }), "{err:?}");
}

#[test]
fn truncated_deviations_are_reported() {
    let values: Vec<i64> = (0..500).map(|i| (i * 131) % 1000).collect();
    let (archive, _) = compress(&int_table(&values), &CompressConfig::default()).unwrap();
    let offsets = archive.params().section_offsets(archive.params_len());
    let mut bytes = archive.into_bytes();
    bytes.truncate(offsets[section_index("deviations")] as usize + 3);
    let err = Archive::from_bytes(bytes).unwrap_err();
    assert!(matches!(err, GdError::Integrity { section: "deviations", .. }), "{err:?}");
}

#[test]
fn every_single_byte_corruption_is_detected() {
    let t = common::random_table(23, 60, 2);
    let (archive, _) = compress(&t, &CompressConfig::default()).unwrap();
    for i in 0..archive.len() {
        let mut bytes = archive.as_bytes().to_vec();
        bytes[i] ^= 0x5A;
        let outcome = Archive::from_bytes(bytes).and_then(|a| decompress(&a));
        assert!(outcome.is_err(), "corruption at byte {i} went unnoticed");
    }
}

#[test]
fn section_lengths_are_checked_against_counts() {
    let (archive, _) = compress(&int_table(&[1, 5, 9, 13, 2]), &CompressConfig::default()).unwrap();
    let params_len = archive.params_len();
    let mut bytes = archive.as_bytes().to_vec();
    // grow the declared weight section by one byte
    let entry = HEADER_LEN + params_len - 12 * (5 - section_index("weights"));
    let len = u64::from_le_bytes(bytes[entry..entry + 8].try_into().unwrap()) + 1;
    bytes[entry..entry + 8].copy_from_slice(&len.to_le_bytes());
    let params_crc = crc32(&bytes[HEADER_LEN..HEADER_LEN + params_len]);
    bytes[12..16].copy_from_slice(&params_crc.to_le_bytes());
    let err = Archive::from_bytes(bytes).unwrap_err();
    assert!(matches!(err, GdError::Integrity { section: "weights", .. }), "{err:?}");
}

#[test]
fn centroid_counts_cover_original_rows() {
    let t = common::random_table(31, 900, 2);
    let config = CompressConfig { m_max: Some(20), ..Default::default() };
    let (archive, _) = compress(&t, &config).unwrap();
    let c = base_centroids(&archive).unwrap();
    assert_eq!(c.counts.iter().sum::<u64>(), 900);
    assert!(c.counts.iter().all(|&w| w > 0));
    assert_eq!(c.values.len(), c.counts.len() * 2);
}

#[test]
fn importance_and_exact_truncation_are_recorded() {
    let t = common::random_table(29, 800, 3);
    let config = CompressConfig {
        m_max: Some(7),
        importance: Some(vec![0.1, 0.7, 0.2]),
        exact_truncation: true,
        ..Default::default()
    };
    let (archive, report) = compress(&t, &config).unwrap();
    assert_eq!(archive.params().importance, config.importance);
    assert!(archive.params().exact_truncation);
    assert!(report.m <= 7);
    assert_eq!(decompress(&archive).unwrap(), t);
}

#[test]
fn raw_bits_mode_round_trips_special_values() {
    let t = Table::new(vec![Column::new(
        "v",
        ColumnData::F64(vec![0.0, -0.0, f64::MIN_POSITIVE, f64::MAX, -f64::MAX, 1e-300, 5e-324]),
    )])
    .unwrap();
    for mode in [FloatMode::Auto, FloatMode::RawBits] {
        let config = CompressConfig { float_mode: mode, ..Default::default() };
        let (archive, _) = compress(&t, &config).unwrap();
        assert_eq!(decompress(&archive).unwrap(), t);
    }
    let strict = CompressConfig { float_mode: FloatMode::Decimal, ..Default::default() };
    assert!(matches!(compress(&t, &strict), Err(GdError::DecimalScaleExceeded { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_int_tables_round_trip(rows in proptest::collection::vec(proptest::collection::vec(-5_000i64..5_000, 3), 1..1_000)) {
        let t = Table::from_rows_i64(&rows).unwrap();
        let (archive, _) = compress(&t, &CompressConfig::default()).unwrap();
        prop_assert_eq!(decompress(&archive).unwrap(), t);
    }

    #[test]
    fn random_decimal_tables_round_trip(rows in proptest::collection::vec(proptest::collection::vec(-100_000i64..100_000, 2), 1..500), scale in 0u32..5) {
        let div = 10f64.powi(scale as i32);
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64 / div).collect()).collect();
        let t = Table::from_rows_f64(&rows).unwrap();
        let (archive, _) = compress(&t, &CompressConfig { m_max: Some(8), ..Default::default() }).unwrap();
        prop_assert_eq!(decompress(&archive).unwrap(), t);
    }
}
