//! `gdpack`: command-line front end for entropy-guided generalized
//! deduplication archives.

mod bench;
mod ingest;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gdpack_core::analytics::{
    analyze, repeat_seed, summary_points, weighted_kmeans, AnalyticsMode, AnalyzeConfig,
    DEFAULT_SILHOUETTE_SAMPLE,
};
use gdpack_core::bitmatrix::FloatMode;
use gdpack_core::codec::{compress, decompress, Archive, CompressConfig, CompressReport, SECTION_NAMES};
use gdpack_core::selection::{compressed_size, default_m_max, DEFAULT_TAU};
use gdpack_core::{GdError, Table};
use serde::Serialize;
use serde_json::json;

use crate::bench::{ScalingConfig, DEFAULT_TOOLS};
use crate::ingest::{IngestError, Kind};

#[derive(Parser, Debug)]
#[command(name = "gdpack", version, about = "Entropy-guided generalized deduplication for numeric tables")]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compress a CSV table into an archive.
    Compress(CompressArgs),
    /// Restore the CSV table stored in an archive.
    Decompress(DecompressArgs),
    /// Check that an archive reproduces a CSV table bit for bit.
    Verify(VerifyArgs),
    /// Cluster the compressed summary and compare against the full data.
    Analyze(AnalyzeArgs),
    /// Compare against external compressors, or time bit selection scaling.
    Bench(BenchArgs),
    /// Describe an archive: parameters, section sizes and size model.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FloatModeArg {
    Auto,
    Decimal,
    RawBits,
}

impl From<FloatModeArg> for FloatMode {
    fn from(m: FloatModeArg) -> Self {
        match m {
            FloatModeArg::Auto => FloatMode::Auto,
            FloatModeArg::Decimal => FloatMode::Decimal,
            FloatModeArg::RawBits => FloatMode::RawBits,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Condensed,
    Centroid,
}

impl From<ModeArg> for AnalyticsMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Condensed => AnalyticsMode::Condensed,
            ModeArg::Centroid => AnalyticsMode::Centroid,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SelectionArgs {
    /// Condensed sample budget [default: n/100 clamped to 16..=4096].
    #[arg(long)]
    m_max: Option<usize>,
    /// Plateau length: bits added without improvement before stopping.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: usize,
    /// Per-column importance weights that order condensed-sample bits.
    #[arg(long, value_delimiter = ',')]
    importance: Option<Vec<f64>>,
    /// Stop condensed sample generation at exactly m_max samples.
    #[arg(long)]
    exact_truncation: bool,
    #[arg(long, value_enum, default_value = "auto")]
    float_mode: FloatModeArg,
}

impl SelectionArgs {
    fn config(&self) -> CompressConfig {
        CompressConfig {
            m_max: self.m_max,
            tau: self.tau,
            importance: self.importance.clone(),
            exact_truncation: self.exact_truncation,
            float_mode: self.float_mode.into(),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct IngestArgs {
    /// Column kind override NAME=KIND with KIND one of int, f32, f64.
    #[arg(long = "kind", value_name = "NAME=KIND", value_parser = ingest::parse_override)]
    kinds: Vec<(String, Kind)>,
}

impl IngestArgs {
    fn overrides(&self) -> BTreeMap<String, Kind> {
        self.kinds.iter().cloned().collect()
    }
}

#[derive(Args, Debug, Serialize)]
struct CompressArgs {
    /// Input CSV with a header row.
    input: PathBuf,
    /// Archive to write.
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    ingest: IngestArgs,
    #[command(flatten)]
    selection: SelectionArgs,
}

#[derive(Args, Debug, Serialize)]
struct DecompressArgs {
    archive: PathBuf,
    /// CSV to write; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    archive: PathBuf,
    /// Original CSV. Column kinds are taken from the archive.
    original: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct AnalyzeArgs {
    archive: PathBuf,
    /// Original CSV the archive was built from.
    #[arg(long)]
    original: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// k-means++ initializations per clustering.
    #[arg(long, default_value_t = 10)]
    inits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "condensed")]
    mode: ModeArg,
    /// Points sampled for the silhouette score.
    #[arg(long, default_value_t = DEFAULT_SILHOUETTE_SAMPLE)]
    silhouette_sample: usize,
    /// Write summary points, weights and cluster labels of the first repeat
    /// as CSV for plotting.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    /// Dataset CSVs to compress.
    inputs: Vec<PathBuf>,
    /// External compressors to compare against.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TOOLS.map(String::from))]
    tools: Vec<String>,
    /// Program to run for a compressor, NAME=PATH.
    #[arg(long = "tool-path", value_name = "NAME=PATH", value_parser = parse_pair)]
    tool_paths: Vec<(String, String)>,
    #[command(flatten)]
    ingest: IngestArgs,
    #[command(flatten)]
    selection: SelectionArgs,
    /// Also time entropy-guided against greedy selection on synthetic data.
    #[arg(long)]
    scaling: bool,
    #[arg(long, default_value_t = 20_000)]
    scaling_n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32])]
    scaling_dims: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    scaling_repeats: usize,
    #[arg(long, default_value_t = 6)]
    scaling_seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    archive: PathBuf,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| format!("'{s}' is not NAME=VALUE"))
}

enum CliError {
    Usage(String),
    Ingest(IngestError),
    Core(GdError),
    Io(String),
    /// Verification ran and found a difference; the report is already out.
    Mismatch,
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Ingest(_) => "ingest",
            CliError::Core(GdError::Integrity { .. }) => "integrity",
            CliError::Core(_) => "core",
            CliError::Io(_) => "io",
            CliError::Mismatch => "mismatch",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Mismatch => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Io(e) => write!(f, "{e}"),
            CliError::Ingest(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Mismatch => write!(f, "archive does not match the original"),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Ingest(e)
    }
}

impl From<GdError> for CliError {
    fn from(e: GdError) -> Self {
        CliError::Core(e)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

type CmdResult = Result<(), CliError>;

/// Prints `value` as JSON, or `text` otherwise.
fn emit(json: bool, value: &impl Serialize, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
    } else {
        print!("{}", text());
    }
}

fn read_archive(path: &Path) -> Result<Archive, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(Archive::from_bytes(bytes)?)
}

/// Reads a CSV with the column kinds recorded in `archive`.
fn read_original(archive: &Archive, path: &Path) -> Result<Table, CliError> {
    let p = archive.params();
    let header = csv::Reader::from_path(path)
        .and_then(|mut r| r.headers().cloned())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    // kinds apply to the archive's names when both headers agree
    let overrides = if header.iter().eq(p.names.iter().map(String::as_str)) {
        p.names
            .iter()
            .zip(&p.columns)
            .map(|(name, c)| (name.clone(), Kind::of(c.kind, c.precision)))
            .collect()
    } else {
        BTreeMap::new()
    };
    Ok(ingest::read_table_file(path, &overrides)?)
}

#[derive(Serialize)]
struct CompressOut<'a> {
    command: &'static str,
    config: &'a CompressArgs,
    m_max_resolved: usize,
    column_kinds: Vec<(String, Kind)>,
    archive_bytes: usize,
    cr: f64,
    #[serde(flatten)]
    report: &'a CompressReport,
}

fn cmd_compress(args: &CompressArgs, json: bool) -> CmdResult {
    let table = ingest::read_table_file(&args.input, &args.ingest.overrides())?;
    let (archive, report) = compress(&table, &args.selection.config())?;
    std::fs::write(&args.output, archive.as_bytes()).map_err(|e| io_err(&args.output, e))?;
    let out = CompressOut {
        command: "compress",
        config: args,
        m_max_resolved: args.selection.m_max.unwrap_or_else(|| default_m_max(table.rows())),
        column_kinds: ingest::kinds_of(&table),
        archive_bytes: archive.len(),
        cr: archive.len() as f64 / report.original_bytes as f64,
        report: &report,
    };
    emit(json, &out, || {
        format!(
            "{} -> {}\n  rows {}  columns {}  chunk width {} bits\n  original {} B  archive {} B  CR {:.4}\n  \
             bases {}  base bits {}  condensed samples {} (m_max {})\n  size model {} bits\n  \
             configuration time {:.6} s  total {:.6} s\n",
            args.input.display(),
            args.output.display(),
            report.n,
            report.d,
            report.chunk_width,
            report.original_bytes,
            archive.len(),
            out.cr,
            report.n_b,
            report.base_bits.len(),
            report.m,
            report.m_max,
            report.size_bits,
            report.configuration_time.as_secs_f64(),
            report.total_time.as_secs_f64(),
        )
    });
    Ok(())
}

fn cmd_decompress(args: &DecompressArgs, json: bool) -> CmdResult {
    let archive = read_archive(&args.archive)?;
    let table = decompress(&archive)?;
    match &args.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
            ingest::write_table(&table, BufWriter::new(file))?;
        }
        None if json => {
            return Err(CliError::Usage("--json needs --output so the table does not mix with the report".into()))
        }
        None => ingest::write_table(&table, std::io::stdout().lock())?,
    }
    if args.output.is_some() {
        let out = json!({
            "command": "decompress",
            "config": args,
            "rows": table.rows(),
            "columns": table.width(),
        });
        emit(json, &out, || {
            format!("{} rows x {} columns written\n", table.rows(), table.width())
        });
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, json: bool) -> CmdResult {
    let archive = read_archive(&args.archive)?;
    let restored = decompress(&archive)?;
    let original = read_original(&archive, &args.original)?;
    let mismatch = restored.first_mismatch(&original).map(|m| {
        let shape = restored.rows() != original.rows() || restored.width() != original.width();
        let cell = |t: &Table| {
            (m.column < t.width() && m.row < t.rows())
                .then(|| ingest::format_cell(&t.column(m.column).data, m.row))
        };
        json!({
            "row": m.row + 1,
            "column": m.column,
            "column_name": restored.columns().get(m.column).map(|c| c.name.clone()),
            "shape": shape.then(|| json!({
                "archive": [restored.rows(), restored.width()],
                "original": [original.rows(), original.width()],
            })),
            "archive_value": if shape { None } else { cell(&restored) },
            "original_value": if shape { None } else { cell(&original) },
        })
    });
    let out = json!({
        "command": "verify",
        "config": args,
        "ok": mismatch.is_none(),
        "rows": restored.rows(),
        "columns": restored.width(),
        "mismatch": mismatch,
    });
    emit(json, &out, || match &mismatch {
        None => format!("OK: {} rows x {} columns match\n", restored.rows(), restored.width()),
        Some(m) if !m["shape"].is_null() => format!(
            "MISMATCH: archive is {} while the original is {}\n",
            m["shape"]["archive"], m["shape"]["original"]
        ),
        Some(m) => format!(
            "MISMATCH at row {}, column {} ({}): archive {}, original {}\n",
            m["row"], m["column"], m["column_name"], m["archive_value"], m["original_value"]
        ),
    });
    match mismatch {
        None => Ok(()),
        Some(_) => Err(CliError::Mismatch),
    }
}

fn write_plot_data(path: &Path, archive: &Archive, config: &AnalyzeConfig) -> CmdResult {
    let (points, weights) = summary_points(archive, config.mode)?;
    let d = archive.params().d();
    let k = config.k.min(weights.len());
    let clusters = weighted_kmeans(&points, &weights, d, k, config.inits, repeat_seed(config.seed, 0))?;
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let write_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut header: Vec<String> = archive.params().names.clone();
    header.extend(["weight".to_string(), "label".to_string()]);
    w.write_record(&header).map_err(write_err)?;
    for (j, weight) in weights.iter().enumerate() {
        let mut row: Vec<String> = points[j * d..(j + 1) * d].iter().map(|v| format!("{v:?}")).collect();
        row.push(weight.to_string());
        row.push(clusters.labels[j].to_string());
        w.write_record(&row).map_err(write_err)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn cmd_analyze(args: &AnalyzeArgs, json: bool) -> CmdResult {
    let archive = read_archive(&args.archive)?;
    let original = read_original(&archive, &args.original)?;
    let config = AnalyzeConfig {
        k: args.k,
        repeats: args.repeats,
        inits: args.inits,
        seed: args.seed,
        mode: args.mode.into(),
        silhouette_sample: args.silhouette_sample,
    };
    let report = analyze(&archive, &original, &config, None)?;
    if let Some(path) = &args.plot_data {
        write_plot_data(path, &archive, &config)?;
    }
    let out = json!({ "command": "analyze", "config": args, "metrics": &report });
    emit(json, &out, || {
        let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.6}"));
        format!(
            "mode {:?}  summary points {}\n  CR {:.4}  ADR {:.4}\n  AR {}  AMI {:.6}  silhouette {}\n  \
             clustering {:.6} s  full-data clustering {:.6} s\n",
            config.mode,
            report.points,
            report.cr,
            report.adr,
            opt(report.ar),
            report.ami,
            opt(report.silhouette),
            report.clustering_time.as_secs_f64(),
            report.full_clustering_time.as_secs_f64(),
        )
    });
    Ok(())
}

fn cmd_bench(args: &BenchArgs, json: bool) -> CmdResult {
    if args.inputs.is_empty() && !args.scaling {
        return Err(CliError::Usage("bench needs dataset CSVs, --scaling, or both".into()));
    }
    let paths: BTreeMap<String, String> = args.tool_paths.iter().cloned().collect();
    let tools = bench::tools(&args.tools, &paths).map_err(CliError::Usage)?;
    let config = args.selection.config();
    let mut rows = Vec::new();
    for path in &args.inputs {
        let table = ingest::read_table_file(path, &args.ingest.overrides())?;
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        rows.push(bench::bench_dataset(&name, &table, &config, &tools).map_err(CliError::Usage)?);
    }
    let summary = bench::cr_summary(&rows, &tools);
    let scaling = if args.scaling {
        let sc = ScalingConfig {
            n: args.scaling_n,
            dims: args.scaling_dims.clone(),
            repeats: args.scaling_repeats,
            seed: args.scaling_seed,
            tau: args.selection.tau,
            ..Default::default()
        };
        Some(bench::scaling(&sc).map_err(CliError::Usage)?)
    } else {
        None
    };
    let out = json!({
        "command": "bench",
        "config": args,
        "tools": &tools,
        "datasets": &rows,
        "cr_summary": &summary,
        "scaling": &scaling,
    });
    emit(json, &out, || {
        let mut s = String::new();
        if !rows.is_empty() {
            s.push_str(&format!("{:<20} {:>10}", "dataset", "gdpack"));
            for t in &tools {
                s.push_str(&format!(" {:>12}", t.name));
            }
            s.push('\n');
            for r in &rows {
                let cell = |o: &bench::ToolOutcome| match o {
                    bench::ToolOutcome::Ok { cr, .. } => format!("{cr:.4}"),
                    bench::ToolOutcome::Unavailable { .. } => "unavailable".to_string(),
                    bench::ToolOutcome::Failed { .. } => "failed".to_string(),
                };
                s.push_str(&format!("{:<20} {:>10}", r.dataset, cell(&r.gdpack)));
                for t in &tools {
                    s.push_str(&format!(" {:>12}", r.tools.get(&t.name).map_or(String::new(), cell)));
                }
                s.push('\n');
            }
        }
        if let Some(sc) = &scaling {
            s.push_str(&format!(
                "scaling n={} dims {:?}\n  entropy-guided {:?} s  slope {:.3}\n  greedy {:?} s  slope {:.3}\n  \
                 speedup at largest d {:.1}x\n",
                sc.config.n,
                sc.config.dims,
                sc.entropy_seconds,
                sc.entropy_slope,
                sc.greedy_seconds,
                sc.greedy_slope,
                sc.speedup_at_max_d,
            ));
        }
        s
    });
    Ok(())
}

fn cmd_stats(args: &StatsArgs, json: bool) -> CmdResult {
    let archive = read_archive(&args.archive)?;
    let p = archive.params();
    let model = archive.size_model();
    let layout = archive.layout();
    let sections: Vec<_> = SECTION_NAMES
        .iter()
        .zip(&p.sections)
        .map(|(name, s)| json!({ "name": name, "bytes": s.len, "crc32": s.crc }))
        .collect();
    let out = json!({
        "command": "stats",
        "config": args,
        "n": p.n,
        "d": p.d(),
        "m": p.m,
        "m_max": p.m_max,
        "n_b": p.n_b,
        "tau": p.tau,
        "chunk_width": p.chunk_width(),
        "exact_truncation": p.exact_truncation,
        "names": &p.names,
        "columns": &p.columns,
        "importance": &p.importance,
        "base_bits": p.base_bits.sorted(),
        "analytic_bits": p.analytic_bits.sorted(),
        "size_model": &model,
        "size_bits": compressed_size(&model),
        "params_bits": archive.params_bits(),
        "layout": &layout,
        "sections": sections,
    });
    emit(json, &out, || {
        let mut s = format!(
            "rows {}  columns {}  chunk width {} bits\nbases {}  base bits {}  condensed samples {} (m_max {})\n\
             size model {} bits = {}·{} + ({}+{})·({}+{}) + {}·{} + {}\n",
            p.n,
            p.d(),
            p.chunk_width(),
            p.n_b,
            model.l_b,
            p.m,
            p.m_max,
            compressed_size(&model),
            model.n_b,
            model.l_b,
            model.n,
            model.m,
            model.l_d,
            model.l_id,
            model.m,
            model.l_w,
            model.s_params,
        );
        s.push_str(&format!("header {} B  params {} B\n", layout.header, layout.params));
        for (name, e) in SECTION_NAMES.iter().zip(&p.sections) {
            s.push_str(&format!("  {name:<11} {:>10} B  crc32 {:08x}\n", e.len, e.crc));
        }
        s.push_str(&format!("total {} B\n", layout.total));
        s
    });
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Compress(a) => cmd_compress(a, cli.json),
        Cmd::Decompress(a) => cmd_decompress(a, cli.json),
        Cmd::Verify(a) => cmd_verify(a, cli.json),
        Cmd::Analyze(a) => cmd_analyze(a, cli.json),
        Cmd::Bench(a) => cmd_bench(a, cli.json),
        Cmd::Stats(a) => cmd_stats(a, cli.json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Mismatch) => ExitCode::from(1),
        Err(e) => {
            if cli.json {
                let out = json!({ "error": e.kind(), "message": e.to_string() });
                println!("{}", serde_json::to_string_pretty(&out).expect("error serializes"));
            }
            eprintln!("gdpack: {e}");
            let _ = std::io::stderr().flush();
            ExitCode::from(e.exit_code())
        }
    }
}
