//! Lossless columnar compression by generalized deduplication.
//!
//! Rows are quantized into fixed-width bit chunks ([`bitmatrix`]). A subset
//! of chunk bits forms the *base*, which is stored once per distinct value;
//! the remaining *deviation* bits are stored verbatim next to a base id
//! ([`codec`]). Base bits are chosen in ascending order of bit entropy
//! ([`selection`]), and a small set of weighted condensed samples is kept in
//! the archive so clustering can run without decompressing ([`analytics`]).

pub mod analytics;
pub mod basetree;
mod bitio;
pub mod bitmatrix;
pub mod codec;
pub mod error;
pub mod selection;
pub mod synthetic;

pub use analytics::{
    adjusted_mutual_information, analyze, approximation_ratio, compute_ratios, silhouette,
    weighted_kmeans, AnalyticsMode, AnalyzeConfig, ClusteringResult, MetricsReport,
};
pub use basetree::BaseTree;
pub use bitmatrix::{
    binary_entropy, bit_stats, dequantize, quantize_dataset, Column, ColumnData, FloatMode,
    QuantizedMatrix, Table,
};
pub use codec::{
    base_centroids, compress, decompress, extract_condensed, Archive, CompressConfig,
    CompressReport,
};
pub use error::{GdError, Result};
pub use selection::{
    compressed_size, generate_condensed_samples, greedy_select_bits, select_compression_bits,
    BitSelection, CondensedSampleSet, SizeModel, Truncation,
};
