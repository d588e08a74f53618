//! CSV and manifest writers.
//!
//! Numbers are printed with 9 significant digits in the style of C's `%.9g`
//! so files are stable across platforms and compact to diff.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::config::describe;
use crate::engine::{ExperimentResult, SimulationConfig};
use crate::metrics::utility_homogeneity_slope;
use crate::recommenders::Algorithm;
use crate::{Error, Result, Scalar};

pub const METRICS_HEADER: &str =
    "seed,algorithm,iteration,delta_jaccard_neighbor,delta_jaccard_global,mean_cumulative_utility,gini";
pub const PER_USER_HEADER: &str = "seed,algorithm,user,utility_delta,neighbor_delta_jaccard";

pub const METRICS_FILE: &str = "metrics.csv";
pub const PER_USER_FILE: &str = "per_user.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// `x` with at most `digits` significant digits, trailing zeros removed;
/// scientific notation for exponents below −4 or at least `digits`.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn num<T: Scalar>(x: T) -> String {
    format_sig(x.as_f64(), 9)
}

pub fn write_metrics_csv<T: Scalar, W: Write>(
    result: &ExperimentResult<T>,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for run in &result.runs {
        for r in &run.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                run.seed,
                run.algorithm,
                r.iteration,
                num(r.delta_jaccard_neighbor),
                num(r.delta_jaccard_global),
                num(r.mean_cumulative_utility),
                num(r.gini)
            )?;
        }
    }
    out.flush()
}

/// Final-iteration per-user utility delta and neighbor homogenization.
pub fn write_per_user_csv<T: Scalar, W: Write>(
    result: &ExperimentResult<T>,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{PER_USER_HEADER}")?;
    for run in &result.runs {
        if let Some(last) = run.final_record() {
            for u in &last.per_user {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    run.seed,
                    run.algorithm,
                    u.user,
                    num(u.utility_delta),
                    num(u.neighbor_delta_jaccard)
                )?;
            }
        }
    }
    out.flush()
}

/// A parsed `metrics.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub iteration: usize,
    pub delta_jaccard_neighbor: f64,
    pub delta_jaccard_global: f64,
    pub mean_cumulative_utility: f64,
    pub gini: f64,
}

pub fn read_metrics_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => {
            return Err(Error::param(
                "metrics",
                format!("unexpected header {other:?}"),
            ));
        }
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::param("metrics", format!("malformed row `{line}`")));
            }
            let float = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::param("metrics", format!("bad number `{s}`")))
            };
            Ok(MetricsRow {
                seed: f[0]
                    .parse()
                    .map_err(|_| Error::param("metrics", "bad seed"))?,
                algorithm: f[1].parse()?,
                iteration: f[2]
                    .parse()
                    .map_err(|_| Error::param("metrics", "bad iteration"))?,
                delta_jaccard_neighbor: float(f[3])?,
                delta_jaccard_global: float(f[4])?,
                mean_cumulative_utility: float(f[5])?,
                gini: float(f[6])?,
            })
        })
        .collect()
}

/// Slope pooled over every seed's users, then one per seed.
pub type SlopeSummary = (Algorithm, Option<f64>, Vec<(u64, Option<f64>)>);

/// Record of one `simulate` invocation.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: SimulationConfig,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub duration: Duration,
    pub threads: usize,
    pub slopes: Vec<SlopeSummary>,
}

impl RunManifest {
    /// A `[config]` section readable by the config loader, then `[run]`.
    pub fn render(&self) -> String {
        let mut s = String::from("[config]\n");
        s.push_str(&describe(&self.config));
        s.push_str("\n[run]\n");
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "duration_seconds = {:.3}", self.duration.as_secs_f64());
        for p in &self.outputs {
            let _ = writeln!(s, "output = {}", p.display());
        }
        let fmt = |v: &Option<f64>| v.map_or("undefined".to_string(), |x| format_sig(x, 9));
        for (alg, pooled, per_seed) in &self.slopes {
            let _ = writeln!(s, "slope.{alg} = {}", fmt(pooled));
            for (seed, v) in per_seed {
                let _ = writeln!(s, "slope.{alg}.seed{seed} = {}", fmt(v));
            }
        }
        s
    }
}

/// OLS slopes of per-user homogenization on utility delta, pooled per
/// algorithm and per seed.
pub fn slopes<T: Scalar>(result: &ExperimentResult<T>) -> Vec<SlopeSummary> {
    result
        .algorithms()
        .into_iter()
        .map(|alg| {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut per_seed = Vec::new();
            for run in result.runs_of(alg) {
                if let Some(last) = run.final_record() {
                    xs.extend(last.per_user.iter().map(|u| u.utility_delta.as_f64()));
                    ys.extend(
                        last.per_user
                            .iter()
                            .map(|u| u.neighbor_delta_jaccard.as_f64()),
                    );
                }
                per_seed.push((run.seed, run.slope.map(|s| s.as_f64())));
            }
            (alg, utility_homogeneity_slope(&xs, &ys).ok(), per_seed)
        })
        .collect()
}

/// Writes `metrics.csv`, `per_user.csv` and `manifest.txt` into `dir`.
pub fn write_outputs<T: Scalar>(
    result: &ExperimentResult<T>,
    dir: &Path,
    extra_outputs: Vec<PathBuf>,
    duration: Duration,
    threads: usize,
) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let metrics = dir.join(METRICS_FILE);
    let per_user = dir.join(PER_USER_FILE);
    write_metrics_csv(result, io::BufWriter::new(fs::File::create(&metrics)?))?;
    write_per_user_csv(result, io::BufWriter::new(fs::File::create(&per_user)?))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut outputs = vec![metrics, per_user, manifest_path.clone()];
    outputs.extend(extra_outputs);
    let manifest = RunManifest {
        config: result.config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs,
        duration,
        threads,
        slopes: slopes(result),
    };
    fs::write(&manifest_path, manifest.render())?;
    Ok(manifest)
}
