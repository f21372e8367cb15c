use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::Method;
use crate::error::{Error, Result};
use crate::gp_lse::KernelKind;

use super::config::{SimConfig, SweepAxis};
use super::metrics::mean_stderr;
use super::trial::{method_label, run_trial, TrialDetail, TrialResult};
use crate::gp_lse::write_stage1_trace;
use crate::phase_retrieval::write_stage2_trace;

/// One `report.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub axis: f64,
    pub method: String,
    pub mean_rho: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub seed: u64,
    pub trials: usize,
    pub points: Vec<PointSummary>,
    pub results: Vec<TrialResult>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.results.is_empty() {
            0.0
        } else {
            self.failures() as f64 / self.results.len() as f64
        }
    }

    pub fn point(&self, axis: f64, method: &str) -> Option<&PointSummary> {
        self.points
            .iter()
            .find(|p| p.axis == axis && p.method == method)
    }

    /// Mean ρ per axis value for one method, in axis order.
    pub fn series(&self, method: &str) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.method == method)
            .map(|p| (p.axis, p.mean_rho))
            .collect()
    }
}

fn summarize(axis: f64, method: String, results: &[TrialResult]) -> PointSummary {
    let rho: Vec<f64> = results.iter().map(|r| r.rho).collect();
    let (mean_rho, stderr) = mean_stderr(&rho);
    PointSummary {
        axis,
        method,
        mean_rho,
        stderr,
        n: rho.len(),
    }
}

/// Runs every axis value × method × trial. Trials run on the current rayon
/// pool; results are collected in a fixed order so the report does not
/// depend on scheduling.
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let mut points = Vec::new();
    let mut results = Vec::new();
    for x in cfg.sweep.values() {
        for &m in &cfg.methods {
            let rs: Vec<TrialResult> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, m, x, t))
                .collect();
            points.push(summarize(x, method_label(cfg, m), &rs));
            results.extend(rs);
        }
    }
    Ok(SweepReport {
        axis: cfg.sweep.axis,
        seed: cfg.global_seed,
        trials: cfg.trials,
        points,
        results,
    })
}

/// The proposed method under each combination of the Rician and kernel
/// switches, on the configured sweep axis.
pub fn run_ablation(cfg: &SimConfig) -> Result<SweepReport> {
    let mut merged: Option<SweepReport> = None;
    for (disable_rician, kernel) in [
        (false, KernelKind::Cross),
        (true, KernelKind::Cross),
        (false, KernelKind::LaplaceProduct),
    ] {
        let mut c = cfg.clone();
        c.methods = vec![Method::LseRSparta];
        c.ablation.disable_rician = disable_rician;
        c.ablation.kernel = Some(kernel);
        let r = run_sweep(&c)?;
        match merged.as_mut() {
            None => merged = Some(r),
            Some(m) => {
                m.points.extend(r.points);
                m.results.extend(r.results);
            }
        }
    }
    let mut report = merged.expect("three variants");
    let order = |p: &PointSummary| report_order(&cfg.sweep.values(), p.axis);
    report.points.sort_by_key(order);
    Ok(report)
}

fn report_order(values: &[f64], x: f64) -> usize {
    values.iter().position(|v| *v == x).unwrap_or(usize::MAX)
}

pub fn write_report_csv<W: Write>(points: &[PointSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(input: R) -> Result<Vec<PointSummary>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_trials_csv<W: Write>(results: &[TrialResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated `x mean stderr` lines, one block per method.
pub fn write_plot_data<W: Write>(points: &[PointSummary], mut out: W) -> Result<()> {
    let mut methods: Vec<&str> = Vec::new();
    for p in points {
        if !methods.contains(&p.method.as_str()) {
            methods.push(&p.method);
        }
    }
    for (b, m) in methods.iter().enumerate() {
        if b > 0 {
            writeln!(out)?;
            writeln!(out)?;
        }
        writeln!(out, "# {m}")?;
        for p in points.iter().filter(|p| p.method == *m) {
            writeln!(out, "{} {} {}", p.axis, p.mean_rho, p.stderr)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PersistOptions {
    pub trials_csv: bool,
    pub plot_data: bool,
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    seed: u64,
    axis: SweepAxis,
    trials: usize,
    config: &'a SimConfig,
}

/// Writes `report.csv`, `config_echo.json` and the optional files into `dir`.
pub fn persist(
    report: &SweepReport,
    cfg: &SimConfig,
    dir: &Path,
    opts: PersistOptions,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_report_csv(
        &report.points,
        BufWriter::new(File::create(dir.join("report.csv"))?),
    )?;
    let echo = ConfigEcho {
        seed: report.seed,
        axis: report.axis,
        trials: report.trials,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&echo).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("config_echo.json"), json + "\n")?;
    if opts.trials_csv {
        write_trials_csv(
            &report.results,
            BufWriter::new(File::create(dir.join("trials.csv"))?),
        )?;
    }
    if opts.plot_data {
        write_plot_data(
            &report.points,
            BufWriter::new(File::create(dir.join("plot_data.dat"))?),
        )?;
    }
    Ok(())
}

/// Writes `stage1_trace.csv` and `stage2_trace.csv` for one trial into `dir`.
pub fn persist_traces(detail: &TrialDetail, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_stage1_trace(
        &detail.traces.stage1,
        BufWriter::new(File::create(dir.join("stage1_trace.csv"))?),
    )?;
    write_stage2_trace(
        &detail.traces.stage2,
        BufWriter::new(File::create(dir.join("stage2_trace.csv"))?),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SimConfig {
        let mut c = SimConfig::desk();
        c.array.n_y = 8;
        c.array.n_z = 4;
        c.trials = 3;
        c.prior.num_paths = 2;
        c.sweep.snr_grid_db = vec![0.0, 10.0];
        c
    }

    #[test]
    fn single_trial_report_holds_that_rho() {
        let mut c = tiny();
        c.trials = 1;
        c.methods = vec![Method::ExhaustiveDft];
        c.sweep.snr_grid_db = vec![5.0];
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.points.len(), 1);
        let direct = run_trial(&c, Method::ExhaustiveDft, 5.0, 0);
        assert_eq!(r.points[0].mean_rho, direct.rho);
        assert_eq!(r.points[0].n, 1);
    }

    #[test]
    fn aggregates_match_independent_pass() {
        let c = tiny();
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.points.len(), 2 * 4);
        for p in &r.points {
            let rho: Vec<f64> = r
                .results
                .iter()
                .filter(|t| t.axis_value == p.axis && t.method == p.method)
                .map(|t| t.rho)
                .collect();
            assert_eq!(rho.len(), c.trials);
            let mean = rho.iter().sum::<f64>() / rho.len() as f64;
            let var = rho.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rho.len() - 1) as f64;
            assert!((p.mean_rho - mean).abs() < 1e-12);
            assert!((p.stderr - (var / rho.len() as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let r = run_sweep(&tiny()).unwrap();
        let mut buf = Vec::new();
        write_report_csv(&r.points, &mut buf).unwrap();
        let back = read_report_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), r.points.len());
        for (a, b) in back.iter().zip(&r.points) {
            assert_eq!(a.mean_rho.to_bits(), b.mean_rho.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
            assert_eq!(a, b);
        }
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("axis,method,mean_rho,stderr,n\n"));
    }

    #[test]
    fn plot_data_blocks() {
        let pts = vec![
            PointSummary {
                axis: 0.0,
                method: "a".into(),
                mean_rho: 0.5,
                stderr: 0.1,
                n: 2,
            },
            PointSummary {
                axis: 1.0,
                method: "a".into(),
                mean_rho: 0.6,
                stderr: 0.1,
                n: 2,
            },
            PointSummary {
                axis: 0.0,
                method: "b".into(),
                mean_rho: 0.7,
                stderr: 0.0,
                n: 2,
            },
        ];
        let mut buf = Vec::new();
        write_plot_data(&pts, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# a\n0 0.5 0.1\n1 0.6 0.1\n\n\n# b\n0 0.7 0\n"
        );
    }

    #[test]
    fn ablation_labels() {
        let mut c = tiny();
        c.trials = 1;
        c.sweep.snr_grid_db = vec![0.0];
        let r = run_ablation(&c).unwrap();
        let names: Vec<&str> = r.points.iter().map(|p| p.method.as_str()).collect();
        assert_eq!(
            names,
            ["lse_r_sparta", "lse_sparta", "lse_r_sparta_laplace"]
        );
    }
}
