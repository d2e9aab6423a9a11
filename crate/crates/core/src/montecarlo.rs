//! Monte Carlo bias study of the three estimators over a grid of ρ values.
//!
//! For every grid point and replicate `r` an AR(1) path is generated with seed
//! `base_seed + r`. The same seed is used at every grid point, so all estimators
//! see identical paths. Replicates run in parallel; their errors are collected in
//! replicate order and summed sequentially, so the report does not depend on the
//! thread count.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ar1::{generate_ar1_with, noise_sigma_for_coverage, sign_process, Ar1Params, Init};
use crate::complexity::EstimatorKind;
use crate::error::{Error, Result};
use crate::estimators::{
    acf_estimate, clamp_unit, kedem_rho, lambda_hat, PiecewiseLinearModel, APPROX_ERROR_BOUND,
};
use crate::fixed::QFormat;
use crate::streaming::{quantize_samples, CorrelatorState, RhoBackend, RhoPipeline, WindowConfig};

/// 1.96, the two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// How far closed-grid mode pulls the ±1 grid endpoints inside the unit interval.
pub const STRICT_ENDPOINT_OFFSET: f64 = 1e-6;

/// −0.96, −0.92, …, 0.96 (49 points).
pub fn standard_grid() -> Vec<f64> {
    (0..49).map(|k| (k as f64 - 24.0) * 4.0 / 100.0).collect()
}

/// −1, −0.96, …, 1 (51 points) with the endpoints moved to ±(1 − 10⁻⁶).
pub fn closed_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..51).map(|k| (k as f64 - 25.0) * 4.0 / 100.0).collect();
    g[0] = -1.0 + STRICT_ENDPOINT_OFFSET;
    g[50] = 1.0 - STRICT_ENDPOINT_OFFSET;
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EstimatorPath {
    /// Double-precision batch estimators, the piecewise one with the reference model.
    #[default]
    Float,
    /// 10-bit input words through the streaming correlator and ρ pipelines.
    Hardware,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub replicates: usize,
    pub series_length: usize,
    pub rho_grid: Vec<f64>,
    pub noise_sigma: f64,
    pub base_seed: u64,
    pub clamp_outputs: bool,
    pub path: EstimatorPath,
    pub init: Init,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            series_length: 512,
            rho_grid: standard_grid(),
            noise_sigma: noise_sigma_for_coverage(0.9, 1.0).expect("valid coverage"),
            base_seed: 0,
            clamp_outputs: false,
            path: EstimatorPath::Float,
            init: Init::Stationary,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::invalid(format!(
                "replicates must be >= 2 for a standard error, got {}",
                self.replicates
            )));
        }
        if self.series_length < 2 {
            return Err(Error::invalid(format!(
                "series_length must be >= 2, got {}",
                self.series_length
            )));
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Domain {
                what: "noise_sigma",
                value: self.noise_sigma,
                domain: "noise_sigma > 0",
            });
        }
        if let Some(&bad) = self.rho_grid.iter().find(|r| !(r.abs() < 1.0)) {
            return Err(Error::Domain {
                what: "grid rho",
                value: bad,
                domain: "|rho| < 1 (use the closed grid for the endpoints)",
            });
        }
        Ok(())
    }

    /// Applies one `key=value` setting.
    ///
    /// Keys: `replicates`, `series_length` (alias `n`), `rho_grid` (`standard`,
    /// `closed` or a comma list), `noise_sigma`, `noise_variance`, `coverage`,
    /// `base_seed` (alias `seed`), `clamp_outputs` (alias `clamp`), `hardware`,
    /// `burn_in`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |message: String| Error::Parse {
            context: format!("experiment setting {key:?}"),
            message,
        };
        let num =
            |v: &str| -> Result<f64> { v.parse().map_err(|_| bad(format!("not a number: {v:?}"))) };
        let int = |v: &str| -> Result<u64> {
            v.parse().map_err(|_| bad(format!("not an integer: {v:?}")))
        };
        let flag = |v: &str| -> Result<bool> {
            match v {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(bad(format!("not a boolean: {v:?}"))),
            }
        };
        match key.trim() {
            "replicates" => self.replicates = int(value)? as usize,
            "series_length" | "n" => self.series_length = int(value)? as usize,
            "rho_grid" => {
                self.rho_grid = match value {
                    "standard" => standard_grid(),
                    "closed" => closed_grid(),
                    "" => Vec::new(),
                    list => list
                        .split(',')
                        .map(|v| num(v.trim()))
                        .collect::<Result<_>>()?,
                }
            }
            "noise_sigma" => self.noise_sigma = num(value)?,
            "noise_variance" => self.noise_sigma = num(value)?.sqrt(),
            "coverage" => self.noise_sigma = noise_sigma_for_coverage(num(value)?, 1.0)?,
            "base_seed" | "seed" => self.base_seed = int(value)?,
            "clamp_outputs" | "clamp" => self.clamp_outputs = flag(value)?,
            "hardware" => {
                self.path = if flag(value)? {
                    EstimatorPath::Hardware
                } else {
                    EstimatorPath::Float
                }
            }
            "burn_in" => {
                self.init = match int(value)? {
                    0 => Init::Stationary,
                    steps => Init::BurnIn(steps as usize),
                }
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a flat `key=value` file. Blank lines and `#` comments are skipped.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                context: format!("config line {}", i + 1),
                message: format!("expected key=value, got {line:?}"),
            })?;
            self.apply(k, v)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub rho: f64,
    pub estimator: EstimatorKind,
    pub mean_error: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl BiasRow {
    pub fn half_width(&self) -> f64 {
        Z_95 * self.stderr
    }

    fn from_errors(rho: f64, estimator: EstimatorKind, errors: &[f64]) -> Self {
        let r = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / r;
        let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (r - 1.0);
        let stderr = (var / r).sqrt();
        Self {
            rho,
            estimator,
            mean_error: mean,
            stderr,
            ci_lo: mean - Z_95 * stderr,
            ci_hi: mean + Z_95 * stderr,
        }
    }
}

/// Per grid point, the largest per-replicate |proposed − kedem| and how many
/// replicates exceeded the approximation bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGap {
    pub rho: f64,
    pub max_gap: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasReport {
    pub replicates: usize,
    /// Three rows per grid point, in grid order, estimators in acf, kedem, proposed order.
    pub rows: Vec<BiasRow>,
    pub pair_gaps: Vec<PairGap>,
}

impl BiasReport {
    pub fn row(&self, rho: f64, estimator: EstimatorKind) -> Option<&BiasRow> {
        self.rows
            .iter()
            .find(|r| r.rho == rho && r.estimator == estimator)
    }

    pub fn total_violations(&self) -> usize {
        self.pair_gaps.iter().map(|g| g.violations).sum()
    }

    pub fn max_pair_gap(&self) -> f64 {
        self.pair_gaps.iter().map(|g| g.max_gap).fold(0.0, f64::max)
    }
}

struct Replicate {
    acf: f64,
    kedem: f64,
    proposed: f64,
}

fn estimate_float(series: &[f64], model: &PiecewiseLinearModel) -> Result<Replicate> {
    let lambda = lambda_hat(&sign_process(series))?.value();
    Ok(Replicate {
        acf: acf_estimate(series)?,
        kedem: kedem_rho(lambda)?,
        proposed: model.eval(lambda)?,
    })
}

fn estimate_hardware(series: &[f64]) -> Result<Replicate> {
    let window = WindowConfig::new(series.len(), QFormat::Q1_8)?;
    let mut acf = CorrelatorState::new(window)?;
    let mut kedem = RhoPipeline::new(window, RhoBackend::Cordic)?;
    let mut proposed = RhoPipeline::new(window, RhoBackend::DyadicPwl)?;
    let (mut a, mut k, mut p) = (None, None, None);
    for x in quantize_samples(series, QFormat::Q1_8) {
        a = acf.push(x)?;
        k = kedem.push(x)?;
        p = proposed.push(x)?;
    }
    let missing = || Error::Degenerate("window never filled");
    Ok(Replicate {
        acf: a.ok_or_else(missing)?.to_word(QFormat::Q1_8)?.to_f64(),
        kedem: k.ok_or_else(missing)?.to_f64(),
        proposed: p.ok_or_else(missing)?.to_f64(),
    })
}

pub fn run_bias_experiment(cfg: &ExperimentConfig) -> Result<BiasReport> {
    cfg.validate()?;
    let model = PiecewiseLinearModel::reference();
    let mut rows = Vec::with_capacity(3 * cfg.rho_grid.len());
    let mut pair_gaps = Vec::with_capacity(cfg.rho_grid.len());

    for &rho in &cfg.rho_grid {
        let params = Ar1Params::new(rho, cfg.noise_sigma)?;
        let reps: Vec<Replicate> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let seed = cfg.base_seed.wrapping_add(r as u64);
                let series = generate_ar1_with(params, cfg.series_length, seed, cfg.init)?;
                let mut est = match cfg.path {
                    EstimatorPath::Float => estimate_float(&series, &model)?,
                    EstimatorPath::Hardware => estimate_hardware(&series)?,
                };
                if cfg.clamp_outputs {
                    est.acf = clamp_unit(est.acf);
                    est.kedem = clamp_unit(est.kedem);
                    est.proposed = clamp_unit(est.proposed);
                }
                Ok(est)
            })
            .collect::<Result<_>>()?;

        let mut gap = PairGap {
            rho,
            max_gap: 0.0,
            violations: 0,
        };
        for e in &reps {
            let g = (e.proposed - e.kedem).abs();
            gap.max_gap = gap.max_gap.max(g);
            if g >= APPROX_ERROR_BOUND {
                gap.violations += 1;
            }
        }
        pair_gaps.push(gap);

        let errors = |f: fn(&Replicate) -> f64| reps.iter().map(|e| f(e) - rho).collect::<Vec<_>>();
        rows.push(BiasRow::from_errors(
            rho,
            EstimatorKind::Acf,
            &errors(|e| e.acf),
        ));
        rows.push(BiasRow::from_errors(
            rho,
            EstimatorKind::Kedem,
            &errors(|e| e.kedem),
        ));
        rows.push(BiasRow::from_errors(
            rho,
            EstimatorKind::Proposed,
            &errors(|e| e.proposed),
        ));
    }

    Ok(BiasReport {
        replicates: cfg.replicates,
        rows,
        pair_gaps,
    })
}

/// CSV with header `rho,estimator,mean_error,stderr,ci_lo,ci_hi`; floats use the
/// shortest representation that parses back to the same value.
pub fn write_csv(rows: &[BiasRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["rho", "estimator", "mean_error", "stderr", "ci_lo", "ci_hi"])
            .map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn to_csv_string(rows: &[BiasRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn parse_csv(input: impl Read) -> Result<Vec<BiasRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        context: "bias csv".into(),
        message: e.to_string(),
    }
}

pub fn export_report(report: &BiasReport, path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(&report.rows)?).map_err(|e| Error::io(path, e))
}

/// Gnuplot script drawing one panel per estimator: mean error against ρ with 95%
/// error bars, reading `data_file`.
pub fn plot_script(data_file: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,1200\n");
    s.push_str("set output 'bias.png'\n");
    s.push_str("set multiplot layout 3,1\n");
    s.push_str("set xrange [-1:1]\nset xlabel 'rho'\nset ylabel 'mean error'\nset grid\n");
    for (kind, title) in [
        (EstimatorKind::Acf, "ACF"),
        (EstimatorKind::Kedem, "cos(pi(1 - lambda))"),
        (EstimatorKind::Proposed, "piecewise linear"),
    ] {
        s.push_str(&format!("set title '{title}'\n"));
        s.push_str(&format!(
            "plot '{data_file}' every ::1 using 1:(strcol(2) eq '{kind}' ? $3 : NaN):($4 * {Z_95}) \
             with yerrorbars notitle\n"
        ));
    }
    s.push_str("unset multiplot\n");
    s
}

/// Writes `bias.csv` and `bias.gp` into `dir` and returns their paths.
pub fn export_plot(report: &BiasReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data = dir.join("bias.csv");
    let script = dir.join("bias.gp");
    export_report(report, &data)?;
    fs::write(&script, plot_script("bias.csv")).map_err(|e| Error::io(&script, e))?;
    Ok((data, script))
}
