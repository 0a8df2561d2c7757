//! Python module `gdpack`: compression, decompression and analytics on
//! archives from Python.
//!
//! Tables cross the boundary as dicts mapping column names to lists. A list
//! of Python ints becomes an integer column, anything else a float64
//! column unless `kinds` says otherwise.

use std::io::Cursor;

use gdpack_core::analytics::{self, AnalyticsMode, AnalyzeConfig};
use gdpack_core::bitmatrix::FloatMode;
use gdpack_core::codec::{self, CompressConfig};
use gdpack_core::{Column, ColumnData, GdError, Table};
use pyo3::create_exception;
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict, PyList};

create_exception!(gdpack, IntegrityError, PyValueError, "Archive failed an integrity check.");

fn to_py(e: GdError) -> PyErr {
    match e {
        GdError::Integrity { .. } => IntegrityError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// An encoded archive.
#[pyclass(name = "Archive", module = "gdpack", frozen)]
struct PyArchive {
    inner: codec::Archive,
}

#[pymethods]
impl PyArchive {
    /// Parses and validates archive bytes.
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        codec::Archive::from_bytes(data.to_vec()).map(|inner| PyArchive { inner }).map_err(to_py)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.as_bytes())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.params().n
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.params().d()
    }

    #[getter]
    fn m(&self) -> u64 {
        self.inner.params().m
    }

    #[getter]
    fn n_b(&self) -> u64 {
        self.inner.params().n_b
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.params().names.clone()
    }

    #[getter]
    fn base_bits(&self) -> Vec<usize> {
        self.inner.params().base_bits.sorted()
    }

    #[getter]
    fn analytic_bits(&self) -> Vec<usize> {
        self.inner.params().analytic_bits.sorted()
    }

    /// Size model total in bits.
    #[getter]
    fn size_bits(&self) -> u64 {
        gdpack_core::compressed_size(&self.inner.size_model())
    }

    /// Byte length of each archive region.
    fn layout<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let l = self.inner.layout();
        let d = PyDict::new(py);
        for (k, v) in [
            ("header", l.header),
            ("params", l.params),
            ("bases", l.bases),
            ("ids", l.ids),
            ("deviations", l.deviations),
            ("weights", l.weights),
            ("condensed", l.condensed),
            ("total", l.total),
        ] {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let p = self.inner.params();
        format!("Archive(n={}, d={}, n_b={}, m={}, bytes={})", p.n, p.d(), p.n_b, p.m, self.inner.len())
    }
}

fn table_from_dict(columns: &Bound<'_, PyDict>, kinds: Option<&Bound<'_, PyDict>>) -> PyResult<Table> {
    let mut out = Vec::with_capacity(columns.len());
    for (key, values) in columns.iter() {
        let name: String = key.extract()?;
        let kind: Option<String> = match kinds {
            Some(k) => k.get_item(&name)?.map(|v| v.extract()).transpose()?,
            None => None,
        };
        let data = match kind.as_deref() {
            Some("int") => ColumnData::Int(values.extract()?),
            Some("f32") => ColumnData::F32(values.extract()?),
            Some("f64") => ColumnData::F64(values.extract()?),
            Some(other) => {
                return Err(PyValueError::new_err(format!("unknown kind '{other}' for column '{name}'")))
            }
            None => match values.extract::<Vec<i64>>() {
                Ok(v) => ColumnData::Int(v),
                Err(_) => ColumnData::F64(values.extract().map_err(|_| {
                    PyTypeError::new_err(format!("column '{name}' must be a list of numbers"))
                })?),
            },
        };
        out.push(Column::new(name, data));
    }
    Table::new(out).map_err(to_py)
}

fn table_to_dict<'py>(py: Python<'py>, table: &Table) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for c in table.columns() {
        match &c.data {
            ColumnData::Int(v) => d.set_item(&c.name, v)?,
            ColumnData::F32(v) => d.set_item(&c.name, v)?,
            ColumnData::F64(v) => d.set_item(&c.name, v)?,
        }
    }
    Ok(d)
}

fn float_mode(s: &str) -> PyResult<FloatMode> {
    match s {
        "auto" => Ok(FloatMode::Auto),
        "decimal" => Ok(FloatMode::Decimal),
        "raw-bits" | "raw_bits" => Ok(FloatMode::RawBits),
        _ => Err(PyValueError::new_err(format!("unknown float mode '{s}'"))),
    }
}

fn analytics_mode(s: &str) -> PyResult<AnalyticsMode> {
    match s {
        "condensed" => Ok(AnalyticsMode::Condensed),
        "centroid" => Ok(AnalyticsMode::Centroid),
        _ => Err(PyValueError::new_err(format!("unknown analytics mode '{s}'"))),
    }
}

fn rows(values: &[f64], d: usize) -> Vec<Vec<f64>> {
    values.chunks(d.max(1)).map(<[f64]>::to_vec).collect()
}

fn flatten(points: &[Vec<f64>]) -> PyResult<(Vec<f64>, usize)> {
    let d = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != d) {
        return Err(PyValueError::new_err("points must all have the same length"));
    }
    Ok((points.concat(), d))
}

/// Compresses a table and returns `(archive, report)`.
#[pyfunction]
#[pyo3(signature = (columns, *, m_max=None, tau=gdpack_core::selection::DEFAULT_TAU, importance=None, exact_truncation=false, float_mode="auto", kinds=None))]
#[allow(clippy::too_many_arguments)]
fn compress<'py>(
    py: Python<'py>,
    columns: &Bound<'py, PyDict>,
    m_max: Option<usize>,
    tau: usize,
    importance: Option<Vec<f64>>,
    exact_truncation: bool,
    float_mode: &str,
    kinds: Option<&Bound<'py, PyDict>>,
) -> PyResult<(PyArchive, Bound<'py, PyDict>)> {
    let table = table_from_dict(columns, kinds)?;
    let config = CompressConfig {
        m_max,
        tau,
        importance,
        exact_truncation,
        float_mode: self::float_mode(float_mode)?,
    };
    let (archive, r) = py.detach(|| codec::compress(&table, &config)).map_err(to_py)?;
    let report = PyDict::new(py);
    report.set_item("n", r.n)?;
    report.set_item("d", r.d)?;
    report.set_item("m", r.m)?;
    report.set_item("m_max", r.m_max)?;
    report.set_item("n_b", r.n_b)?;
    report.set_item("chunk_width", r.chunk_width)?;
    report.set_item("base_bits", &r.base_bits)?;
    report.set_item("analytic_bits", &r.analytic_bits)?;
    report.set_item("size_bits", r.size_bits)?;
    report.set_item("original_bytes", r.original_bytes)?;
    report.set_item("archive_bytes", archive.len())?;
    report.set_item("cr", archive.len() as f64 / r.original_bytes as f64)?;
    report.set_item("configuration_time", r.configuration_time.as_secs_f64())?;
    report.set_item("total_time", r.total_time.as_secs_f64())?;
    Ok((PyArchive { inner: archive }, report))
}

/// Restores the original table as a dict of column lists.
#[pyfunction]
fn decompress<'py>(py: Python<'py>, archive: &PyArchive) -> PyResult<Bound<'py, PyDict>> {
    let table = py.detach(|| codec::decompress(&archive.inner)).map_err(to_py)?;
    table_to_dict(py, &table)
}

/// Reads only the condensed samples from archive bytes. Returns
/// `(samples, weights, bytes_read)`.
#[pyfunction]
fn extract_condensed(data: &[u8]) -> PyResult<(Vec<Vec<f64>>, Vec<u64>, u64)> {
    let (s, read) = codec::extract_condensed(Cursor::new(data)).map_err(to_py)?;
    Ok((rows(&s.values, s.d), s.weights, read))
}

/// Midpoint centroid of every used base with its row count.
#[pyfunction]
fn base_centroids(archive: &PyArchive) -> PyResult<(Vec<Vec<f64>>, Vec<u64>)> {
    let c = codec::base_centroids(&archive.inner).map_err(to_py)?;
    Ok((rows(&c.values, c.d), c.counts))
}

/// Weighted k-means with k-means++ seeding; the best of `inits` runs.
#[pyfunction]
#[pyo3(signature = (points, weights, k, *, inits=10, seed=0))]
fn weighted_kmeans<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    k: usize,
    inits: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (flat, d) = flatten(&points)?;
    let r = py
        .detach(|| analytics::weighted_kmeans(&flat, &weights, d, k, inits, seed))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("labels", &r.labels)?;
    out.set_item("centers", rows(&r.centers, d))?;
    out.set_item("sse", r.sse)?;
    out.set_item("iterations", r.iterations)?;
    Ok(out)
}

#[pyfunction]
fn adjusted_mutual_information(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    analytics::adjusted_mutual_information(&a, &b).map_err(to_py)
}

/// Mean silhouette over a seeded sample of at most `sample_size` points.
#[pyfunction]
#[pyo3(signature = (points, labels, *, sample_size=analytics::DEFAULT_SILHOUETTE_SAMPLE, seed=0))]
fn silhouette(points: Vec<Vec<f64>>, labels: Vec<usize>, sample_size: usize, seed: u64) -> PyResult<f64> {
    let (flat, d) = flatten(&points)?;
    analytics::silhouette(&flat, d, &labels, sample_size, seed).map_err(to_py)
}

#[pyfunction]
fn binary_entropy(p: f64) -> f64 {
    gdpack_core::binary_entropy(p)
}

/// Clusters the compressed summary and the original table with the same
/// seeds and returns the median metrics.
#[pyfunction]
#[pyo3(signature = (archive, original, *, k=5, repeats=3, inits=10, seed=0, mode="condensed", silhouette_sample=analytics::DEFAULT_SILHOUETTE_SAMPLE, kinds=None))]
#[allow(clippy::too_many_arguments)]
fn analyze<'py>(
    py: Python<'py>,
    archive: &PyArchive,
    original: &Bound<'py, PyDict>,
    k: usize,
    repeats: usize,
    inits: usize,
    seed: u64,
    mode: &str,
    silhouette_sample: usize,
    kinds: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let table = table_from_dict(original, kinds)?;
    let config = AnalyzeConfig { k, repeats, inits, seed, mode: analytics_mode(mode)?, silhouette_sample };
    let r = py.detach(|| analytics::analyze(&archive.inner, &table, &config, None)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("mode", mode)?;
    out.set_item("cr", r.cr)?;
    out.set_item("adr", r.adr)?;
    out.set_item("ar", r.ar)?;
    out.set_item("ami", r.ami)?;
    out.set_item("silhouette", r.silhouette)?;
    out.set_item("points", r.points)?;
    out.set_item("clustering_time", r.clustering_time.as_secs_f64())?;
    out.set_item("full_clustering_time", r.full_clustering_time.as_secs_f64())?;
    let per = PyList::empty(py);
    for rep in &r.repeats {
        let d = PyDict::new(py);
        d.set_item("seed", rep.seed)?;
        d.set_item("ar", rep.ar)?;
        d.set_item("ami", rep.ami)?;
        d.set_item("silhouette", rep.silhouette)?;
        per.append(d)?;
    }
    out.set_item("repeats", per)?;
    Ok(out)
}

#[pymodule]
fn gdpack(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyArchive>()?;
    m.add("IntegrityError", m.py().get_type::<IntegrityError>())?;
    m.add_function(wrap_pyfunction!(compress, m)?)?;
    m.add_function(wrap_pyfunction!(decompress, m)?)?;
    m.add_function(wrap_pyfunction!(extract_condensed, m)?)?;
    m.add_function(wrap_pyfunction!(base_centroids, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(silhouette, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    Ok(())
}
