//! Comparison against general-purpose compressors and the selection
//! scaling benchmark.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use gdpack_core::bitmatrix::{quantize_dataset, FloatMode};
use gdpack_core::codec::{compress, CompressConfig};
use gdpack_core::selection::{greedy_select_bits, DEFAULT_TAU};
use gdpack_core::synthetic::{clustered_integers, loglog_slope};
use gdpack_core::Table;
use serde::Serialize;

/// An external compressor invoked at its strongest level, reading stdin and
/// writing stdout.
#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: String,
    pub program: String,
    pub args: Vec<String>,
}

pub const DEFAULT_TOOLS: [&str; 6] = ["gzip", "bzip2", "xz", "zstd", "lz4", "snappy"];

fn max_level_args(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "gzip" => &["-9", "-c"],
        "bzip2" => &["-9", "-c"],
        "xz" => &["-9", "-e", "-c"],
        "zstd" => &["--ultra", "-22", "-c", "-q"],
        "lz4" => &["-12", "-c", "-q"],
        // snzip framing is the common snappy command-line front end
        "snappy" => &["-c"],
        _ => return None,
    })
}

fn default_program(name: &str) -> &str {
    match name {
        "snappy" => "snzip",
        other => other,
    }
}

/// Resolves tool names, with `paths` overriding the program to run.
pub fn tools(names: &[String], paths: &BTreeMap<String, String>) -> Result<Vec<Tool>, String> {
    names
        .iter()
        .map(|name| {
            let args = max_level_args(name).ok_or_else(|| {
                format!("unknown compressor '{name}' (known: {})", DEFAULT_TOOLS.join(", "))
            })?;
            Ok(Tool {
                name: name.clone(),
                program: paths.get(name).cloned().unwrap_or_else(|| default_program(name).to_string()),
                args: args.iter().map(|s| s.to_string()).collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ToolOutcome {
    Ok {
        compressed_bytes: u64,
        cr: f64,
        seconds: f64,
    },
    Unavailable {
        reason: String,
    },
    Failed {
        reason: String,
    },
}

impl ToolOutcome {
    pub fn cr(&self) -> Option<f64> {
        match self {
            ToolOutcome::Ok { cr, .. } => Some(*cr),
            _ => None,
        }
    }
}

/// Pipes `input` through `tool`. A program that cannot be spawned is
/// unavailable; one that exits non-zero has failed.
pub fn run_tool(tool: &Tool, input: &[u8]) -> ToolOutcome {
    let started = Instant::now();
    let child = Command::new(&tool.program)
        .args(&tool.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => {
            return ToolOutcome::Unavailable {
                reason: format!("{}: {e}", tool.program),
            }
        }
    };
    let mut stdin = child.stdin.take().expect("piped stdin");
    let output = std::thread::scope(|s| {
        // feed stdin concurrently so a full stdout pipe cannot deadlock
        s.spawn(move || {
            let _ = stdin.write_all(input);
        });
        child.wait_with_output()
    });
    match output {
        Ok(out) if out.status.success() => {
            let n = out.stdout.len() as u64;
            ToolOutcome::Ok {
                compressed_bytes: n,
                cr: n as f64 / input.len().max(1) as f64,
                seconds: started.elapsed().as_secs_f64(),
            }
        }
        Ok(out) => ToolOutcome::Failed {
            reason: format!(
                "{} exited with {}: {}",
                tool.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            ),
        },
        Err(e) => ToolOutcome::Failed {
            reason: e.to_string(),
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetRow {
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub original_bytes: usize,
    pub gdpack: ToolOutcome,
    pub configuration_seconds: f64,
    pub tools: BTreeMap<String, ToolOutcome>,
}

pub fn bench_dataset(name: &str, table: &Table, config: &CompressConfig, tools: &[Tool]) -> Result<DatasetRow, String> {
    let raw = table.to_le_bytes();
    let started = Instant::now();
    let (archive, report) = compress(table, config).map_err(|e| format!("{name}: {e}"))?;
    let elapsed = started.elapsed();
    let results: Vec<(String, ToolOutcome)> = std::thread::scope(|s| {
        let handles: Vec<_> = tools
            .iter()
            .map(|t| s.spawn(|| (t.name.clone(), run_tool(t, &raw))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("tool thread")).collect()
    });
    Ok(DatasetRow {
        dataset: name.to_string(),
        n: table.rows(),
        d: table.width(),
        original_bytes: raw.len(),
        gdpack: ToolOutcome::Ok {
            compressed_bytes: archive.len() as u64,
            cr: archive.len() as f64 / raw.len() as f64,
            seconds: elapsed.as_secs_f64(),
        },
        configuration_seconds: report.configuration_time.as_secs_f64(),
        tools: results.into_iter().collect(),
    })
}

/// Five-number summary of one method's compression ratios.
#[derive(Debug, Clone, Serialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub values: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // linear interpolation between closest ranks
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(BoxStats {
        count: v.len(),
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v[v.len() - 1],
        values: values.to_vec(),
    })
}

/// Box-plot data per method over every dataset it succeeded on.
pub fn cr_summary(rows: &[DatasetRow], tools: &[Tool]) -> BTreeMap<String, Option<BoxStats>> {
    let mut out = BTreeMap::new();
    let own: Vec<f64> = rows.iter().filter_map(|r| r.gdpack.cr()).collect();
    out.insert("gdpack".to_string(), box_stats(&own));
    for t in tools {
        let v: Vec<f64> = rows.iter().filter_map(|r| r.tools.get(&t.name).and_then(ToolOutcome::cr)).collect();
        out.insert(t.name.clone(), box_stats(&v));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingConfig {
    pub n: usize,
    pub dims: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub center_bits: u32,
    pub noise_bits: u32,
    pub tau: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub config: ScalingConfig,
    pub entropy_seconds: Vec<f64>,
    pub greedy_seconds: Vec<f64>,
    pub entropy_slope: f64,
    pub greedy_slope: f64,
    pub speedup_at_max_d: f64,
}

fn median_secs(mut v: Vec<Duration>) -> f64 {
    v.sort();
    v[v.len() / 2].as_secs_f64()
}

/// Median configuration time of entropy-guided and greedy selection per
/// dimension, with log-log slopes against `d`.
pub fn scaling(config: &ScalingConfig) -> Result<ScalingReport, String> {
    if config.dims.len() < 2 || config.repeats == 0 {
        return Err("scaling needs at least two dimensions and one repeat".into());
    }
    let mut entropy = Vec::new();
    let mut greedy = Vec::new();
    let compress_config = CompressConfig { tau: config.tau, ..Default::default() };
    for &d in &config.dims {
        let t = clustered_integers(config.n, d, config.center_bits, config.noise_bits, config.seed)
            .map_err(|e| e.to_string())?;
        let matrix = quantize_dataset(&t, FloatMode::Auto).map_err(|e| e.to_string())?;
        let mut e = Vec::new();
        let mut g = Vec::new();
        for _ in 0..config.repeats {
            let (_, report) = compress(&t, &compress_config).map_err(|e| e.to_string())?;
            e.push(report.configuration_time);
            let started = Instant::now();
            greedy_select_bits(&matrix, config.tau).map_err(|e| e.to_string())?;
            g.push(started.elapsed());
        }
        entropy.push(median_secs(e));
        greedy.push(median_secs(g));
    }
    let xs: Vec<f64> = config.dims.iter().map(|&d| d as f64).collect();
    let entropy_slope = loglog_slope(&xs, &entropy).map_err(|e| e.to_string())?;
    let greedy_slope = loglog_slope(&xs, &greedy).map_err(|e| e.to_string())?;
    let last = entropy.len() - 1;
    Ok(ScalingReport {
        config: config.clone(),
        speedup_at_max_d: greedy[last] / entropy[last],
        entropy_seconds: entropy,
        greedy_seconds: greedy,
        entropy_slope,
        greedy_slope,
    })
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            n: 20_000,
            dims: vec![4, 8, 16, 32],
            repeats: 3,
            seed: 6,
            center_bits: 10,
            noise_bits: 6,
            tau: DEFAULT_TAU,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_interpolate() {
        let b = box_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((b.min, b.q1, b.median, b.q3, b.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        assert!(box_stats(&[]).is_none());
    }

    #[test]
    fn missing_program_is_unavailable() {
        let t = Tool { name: "gzip".into(), program: "/nonexistent/gzip-xyz".into(), args: vec![] };
        assert!(matches!(run_tool(&t, b"abc"), ToolOutcome::Unavailable { .. }));
    }

    #[test]
    fn unknown_tool_is_rejected() {
        assert!(tools(&["rar".to_string()], &BTreeMap::new()).is_err());
    }
}
