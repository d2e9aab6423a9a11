//! Arithmetic cost of the three estimators: closed-form counts per window and
//! counts measured by running the instrumented implementations.
//!
//! Additions and comparisons are separate columns. Comparisons are never folded
//! into the addition total.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ar1::{generate_ar1, noise_sigma_for_coverage, sign_process, Ar1Params};
use crate::error::{Error, Result};
use crate::estimators::{acf_estimate_with, lambda_hat_with};
use crate::fixed::{FixedWord, NoCount, OpCounter, OpSink, OpTally, QFormat};
use crate::streaming::{RhoBackend, RhoBlock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Acf,
    Kedem,
    Proposed,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [Self::Acf, Self::Kedem, Self::Proposed];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Acf => "acf",
            Self::Kedem => "kedem",
            Self::Proposed => "proposed",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "acf" => Ok(Self::Acf),
            "kedem" => Ok(Self::Kedem),
            "proposed" => Ok(Self::Proposed),
            other => Err(Error::invalid(format!(
                "unknown estimator {other:?} (expected acf, kedem or proposed)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpCountReport {
    pub estimator: EstimatorKind,
    pub n: usize,
    pub multiplications: u64,
    pub divisions: u64,
    pub additions: u64,
    /// Upper bound in formula reports; data-dependent in measured ones.
    pub shifts: u64,
    /// Upper bound in the proposed formula (interval selection stops early).
    pub comparisons: u64,
}

impl OpCountReport {
    fn from_tally(estimator: EstimatorKind, n: usize, t: OpTally) -> Self {
        Self {
            estimator,
            n,
            multiplications: t.multiplications,
            divisions: t.divisions,
            additions: t.additions,
            shifts: t.shifts,
            comparisons: t.comparisons,
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "window length must be >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Closed-form counts for one window of `n` samples.
///
/// | estimator | mult | div | add    | shift | compare |
/// |-----------|------|-----|--------|-------|---------|
/// | acf       | 2N   | 1   | 2(N−1) | 0     | 0       |
/// | kedem     | 1    | 1   | N+28   | 28    | N−1     |
/// | proposed  | 0    | 0   | N+1    | 2     | N+3     |
pub fn formula_op_count(kind: EstimatorKind, n: usize) -> Result<OpCountReport> {
    check_n(n)?;
    let n64 = n as u64;
    let (multiplications, divisions, additions, shifts, comparisons) = match kind {
        EstimatorKind::Acf => (2 * n64, 1, 2 * (n64 - 1), 0, 0),
        EstimatorKind::Kedem => (1, 1, n64 + 28, 28, n64 - 1),
        EstimatorKind::Proposed => (0, 0, n64 + 1, 2, n64 + 3),
    };
    Ok(OpCountReport {
        estimator: kind,
        n,
        multiplications,
        divisions,
        additions,
        shifts,
        comparisons,
    })
}

/// Runs estimator `kind` over `series` with arithmetic routed to `ops`.
///
/// The ACF path is the batch `f64` estimator. Kedem and proposed share the sign
/// counter and the λ divider, then evaluate the ρ stage on the fixed-point datapath
/// (CORDIC or dyadic piecewise-linear, 16-bit internal words).
pub fn run_counted<S: OpSink>(kind: EstimatorKind, series: &[f64], ops: &mut S) -> Result<f64> {
    match kind {
        EstimatorKind::Acf => acf_estimate_with(series, ops),
        EstimatorKind::Kedem | EstimatorKind::Proposed => {
            let backend = if kind == EstimatorKind::Kedem {
                RhoBackend::Cordic
            } else {
                RhoBackend::DyadicPwl
            };
            let block = RhoBlock::new(backend, QFormat::Q2_13, QFormat::Q2_13)?;
            let lambda = lambda_hat_with(&sign_process(series), ops)?;
            let word: FixedWord = block.lambda_word(lambda, ops);
            Ok(block.evaluate(word, ops).to_f64())
        }
    }
}

/// Instrumented counts over a given series.
pub fn measured_op_count_on(kind: EstimatorKind, series: &[f64]) -> Result<OpCountReport> {
    let mut ops = OpCounter::new();
    run_counted(kind, series, &mut ops)?;
    Ok(OpCountReport::from_tally(kind, series.len(), ops.report()))
}

/// Instrumented counts over a generated AR(1) series of length `n` (ρ = 0.5, noise
/// σ giving 90% of innovations inside ±1).
pub fn measured_op_count(kind: EstimatorKind, n: usize, seed: u64) -> Result<OpCountReport> {
    check_n(n)?;
    let params = Ar1Params::new(0.5, noise_sigma_for_coverage(0.9, 1.0)?)?;
    let series = generate_ar1(params, n, seed)?;
    measured_op_count_on(kind, &series)
}

/// True when the counted and uncounted runs return bit-identical results.
pub fn counting_is_transparent(kind: EstimatorKind, series: &[f64]) -> Result<bool> {
    let counted = run_counted(kind, series, &mut OpCounter::new())?;
    let plain = run_counted(kind, series, &mut NoCount)?;
    Ok(counted.to_bits() == plain.to_bits())
}
