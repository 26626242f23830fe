//! Result files.
//!
//! ```text
//! <out>/config.toml                 resolved configuration
//! <out>/summary.json
//! <out>/curves/<arm>.csv            k,mean,std,se,n,config_hash
//! <out>/traces/<arm>_runNNNN.csv    one row per iteration
//! ```
//!
//! Sweeps write `<out>/sweep.csv` and `<out>/sweep.json` instead. Floats use
//! shortest round-trip formatting, so files are byte-identical across reruns.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::measurement::NoiseModel;
use crate::metrics::RunTrace;

use super::{CheckOutcome, ExperimentConfig, ExperimentResult, SweepCell, SweepResult};

pub const CSV_HEADER: &str = "run_id,seed,variant,k,metric,f_plus,f_minus,g_k,alpha_k,beta_k,n_plus,n_minus";

#[derive(Serialize)]
struct TraceRecord<'a> {
    run_id: &'a str,
    seed: u64,
    variant: &'a str,
    k: usize,
    metric: f64,
    f_plus: Option<f64>,
    f_minus: Option<f64>,
    g_k: Option<f64>,
    alpha_k: Option<f64>,
    beta_k: Option<f64>,
    n_plus: Option<u64>,
    n_minus: Option<u64>,
}

#[derive(Serialize)]
struct CurveRecord<'a> {
    k: usize,
    mean: f64,
    std: f64,
    se: f64,
    n: usize,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct SweepRecord<'a> {
    alpha: f64,
    beta: f64,
    arm: &'a str,
    final_mean: f64,
    final_std: f64,
    final_se: f64,
    n: usize,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct Crossing {
    threshold: f64,
    k: Option<usize>,
}

#[derive(Serialize)]
struct ArmSummary<'a> {
    label: &'a str,
    variant: &'a str,
    noise: NoiseModel,
    final_mean: f64,
    final_std: f64,
    final_se: f64,
    runs: usize,
    skipped_iterations: usize,
    crossings: Vec<Crossing>,
    curve_file: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    tool: &'static str,
    version: &'static str,
    preset: &'a str,
    config_hash: &'a str,
    seeds: &'a [u64],
    arms: Vec<ArmSummary<'a>>,
    checks: &'a [CheckOutcome],
    passed: bool,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    tool: &'static str,
    version: &'static str,
    preset: &'a str,
    config_hash: &'a str,
    best: &'a [SweepCell],
    checks: &'a [CheckOutcome],
    passed: bool,
    config: &'a ExperimentConfig,
}

/// File-name form of an arm label: `sgqt@I=0.1` becomes `sgqt_I-0.1`.
pub(crate) fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            '@' => '_',
            c if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' => c,
            _ => '-',
        })
        .collect()
}

fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in trace.rows() {
        w.serialize(TraceRecord {
            run_id: &trace.run_id,
            seed: trace.seed,
            variant: &trace.variant,
            k: row.k,
            metric: row.metric,
            f_plus: row.f_plus,
            f_minus: row.f_minus,
            g_k: row.g_k,
            alpha_k: row.alpha_k,
            beta_k: row.beta_k,
            n_plus: row.n_plus,
            n_minus: row.n_minus,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Write all result files under `dir` and return their paths.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let traces_dir = dir.join("traces");
    let curves_dir = dir.join("curves");
    fs::create_dir_all(&traces_dir)?;
    fs::create_dir_all(&curves_dir)?;
    let mut written = Vec::new();

    let config_path = dir.join("config.toml");
    fs::write(&config_path, result.config.to_toml_string()?)?;
    written.push(config_path);

    let mut arms = Vec::new();
    for arm in &result.arms {
        let stem = file_stem(&arm.label);
        for (r, trace) in arm.traces.iter().enumerate() {
            let path = traces_dir.join(format!("{stem}_run{r:04}.csv"));
            write_trace(&path, trace)?;
            written.push(path);
        }

        let curve_path = curves_dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&curve_path)?;
        for p in &arm.curve.points {
            w.serialize(CurveRecord { k: p.k, mean: p.mean, std: p.std, se: p.se, n: p.n, config_hash: &result.config_hash })?;
        }
        w.flush()?;
        written.push(curve_path);

        let last = arm.curve.final_point().expect("curves have at least one point");
        arms.push(ArmSummary {
            label: &arm.label,
            variant: arm.variant.name(),
            noise: arm.noise,
            final_mean: last.mean,
            final_std: last.std,
            final_se: last.se,
            runs: last.n,
            skipped_iterations: arm.skipped_iterations(),
            crossings: result
                .config
                .thresholds
                .iter()
                .map(|&threshold| Crossing { threshold, k: crate::metrics::threshold_crossing(&arm.curve, threshold) })
                .collect(),
            curve_file: format!("curves/{stem}.csv"),
        });
    }

    let summary_path = dir.join("summary.json");
    write_json(
        &summary_path,
        &Summary {
            tool: "selfguided",
            version: env!("CARGO_PKG_VERSION"),
            preset: &result.config.preset,
            config_hash: &result.config_hash,
            seeds: &result.seeds,
            arms,
            checks: &result.checks,
            passed: result.passed(),
            config: &result.config,
        },
    )?;
    written.push(summary_path);
    Ok(written)
}

/// Write `sweep.csv` (one row per cell and arm) and `sweep.json` under `dir`.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let table = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&table)?;
    for c in &result.cells {
        w.serialize(SweepRecord {
            alpha: c.alpha,
            beta: c.beta,
            arm: &c.arm,
            final_mean: c.final_mean,
            final_std: c.final_std,
            final_se: c.final_se,
            n: c.n,
            config_hash: &result.config_hash,
        })?;
    }
    w.flush()?;

    let summary = dir.join("sweep.json");
    write_json(
        &summary,
        &SweepSummary {
            tool: "selfguided",
            version: env!("CARGO_PKG_VERSION"),
            preset: &result.config.preset,
            config_hash: &result.config_hash,
            best: &result.best,
            checks: &result.checks,
            passed: result.passed(),
            config: &result.config,
        },
    )?;
    Ok(vec![table, summary])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_experiment;

    fn tempdir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("selfguided-output-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn file_stems() {
        assert_eq!(file_stem("sgqt@I=0.1"), "sgqt_I-0.1");
        assert_eq!(file_stem("spi"), "spi");
    }

    #[test]
    fn trace_csv_layout() {
        let config = ExperimentConfig::from_toml_str(
            "preset = \"t\"\nvariants = [\"sgqt\"]\nruns = 1\niterations = 2\n\
             [[noise]]\nkind = \"poisson\"\nrate = 5000.0\nintegration_time = 1.0",
        )
        .unwrap();
        let result = run_experiment(&config, 1).unwrap();
        let dir = tempdir("layout");
        write_experiment(&result, &dir).unwrap();
        let text = fs::read_to_string(dir.join("traces/sgqt_run0000.csv")).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5, "header, 3 rows, trailing newline");
        assert!(!text.contains('\r'));
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first.len(), 12);
        assert_eq!(&first[5..], ["", "", "", "", "", "", ""]);
        let second: Vec<&str> = lines[2].split(',').collect();
        assert!(second.iter().skip(5).all(|c| !c.is_empty()));

        // metrics round-trip exactly
        let metric: f64 = second[4].parse().unwrap();
        assert_eq!(metric, result.arms[0].traces[0].rows()[1].metric);

        let curve = fs::read_to_string(dir.join("curves/sgqt.csv")).unwrap();
        assert!(curve.starts_with("k,mean,std,se,n,config_hash\n"));
        assert!(curve.lines().nth(1).unwrap().ends_with(&result.config_hash));

        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["config_hash"], result.config_hash.as_str());
        assert_eq!(summary["arms"][0]["label"], "sgqt");
        fs::remove_dir_all(&dir).unwrap();
    }
}
