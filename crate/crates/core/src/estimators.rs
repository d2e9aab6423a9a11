//! Batch (whole-series, `f64`) estimators of ρ.

use std::f64::consts::PI;

use crate::ar1::sign_process;
use crate::error::{Error, Result};
use crate::fixed::{NoCount, OpSink};

/// Fraction of agreeing consecutive signs, kept as the exact count pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LambdaEstimate {
    agreements: usize,
    comparisons: usize,
}

impl LambdaEstimate {
    pub fn new(agreements: usize, comparisons: usize) -> Result<Self> {
        if comparisons == 0 || agreements > comparisons {
            return Err(Error::invalid(format!(
                "lambda needs 0 <= agreements <= comparisons, comparisons > 0 (got {agreements}/{comparisons})"
            )));
        }
        Ok(Self {
            agreements,
            comparisons,
        })
    }

    pub fn agreements(&self) -> usize {
        self.agreements
    }

    pub fn comparisons(&self) -> usize {
        self.comparisons
    }

    pub fn value(&self) -> f64 {
        self.agreements as f64 / self.comparisons as f64
    }
}

/// `Σ_{n=2}^N X_n X_{n−1} / Σ_{n=1}^N X_n²`.
pub fn acf_estimate(series: &[f64]) -> Result<f64> {
    acf_estimate_with(series, &mut NoCount)
}

/// [`acf_estimate`] with its arithmetic reported to `ops`.
///
/// Every sample is multiplied against a previous-sample register that starts at
/// zero, so a length-N series costs 2N multiplications, two (N−1)-addition
/// accumulations and one division. The extra product is `X_1 · 0` and leaves the
/// ratio unchanged.
pub fn acf_estimate_with<S: OpSink>(series: &[f64], ops: &mut S) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: series.len(),
        });
    }
    let mut prev = 0.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &x) in series.iter().enumerate() {
        let lagged = x * prev;
        let square = x * x;
        ops.mul(2);
        if i == 0 {
            num = lagged;
            den = square;
        } else {
            num += lagged;
            den += square;
            ops.add(2);
        }
        prev = x;
    }
    if den == 0.0 {
        return Err(Error::Degenerate("all samples are zero"));
    }
    ops.div(1);
    Ok(num / den)
}

pub fn lambda_hat(bits: &[bool]) -> Result<LambdaEstimate> {
    lambda_hat_with(bits, &mut NoCount)
}

/// Counts agreements with one comparison and one accumulator addition per
/// consecutive pair. The normalising division is left to the caller.
pub fn lambda_hat_with<S: OpSink>(bits: &[bool], ops: &mut S) -> Result<LambdaEstimate> {
    if bits.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: bits.len(),
        });
    }
    let mut agreements = 0usize;
    for w in bits.windows(2) {
        ops.compare(1);
        agreements += usize::from(w[0] == w[1]);
        ops.add(1);
    }
    LambdaEstimate::new(agreements, bits.len() - 1)
}

fn check_unit(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "[0, 1]",
        })
    }
}

/// `cos(π(1 − λ))`.
pub fn kedem_rho(lambda: f64) -> Result<f64> {
    check_unit(lambda)?;
    Ok((PI * (1.0 - lambda)).cos())
}

/// Affine segments on `[b_k, b_{k+1})`; the last segment is closed at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearModel {
    breakpoints: Vec<f64>,
    intercepts: Vec<f64>,
    slopes: Vec<f64>,
}

/// Breakpoints of the reference five-segment model.
pub const REFERENCE_BREAKPOINTS: [f64; 6] = [0.0, 0.14, 0.30, 0.70, 0.86, 1.0];
pub const REFERENCE_INTERCEPTS: [f64; 5] = [-1.01, -1.20, -1.51, -0.77, 0.37];
pub const REFERENCE_SLOPES: [f64; 5] = [0.64, 1.97, 3.02, 1.97, 0.64];

/// Claimed bound on |piecewise model − cos(π(1 − λ))| over [0, 1].
pub const APPROX_ERROR_BOUND: f64 = 1.4e-2;

/// The reference constants replaced by 1, 5/4, 3/2, 3/4, 3/8 and 5/8, 63/32, 3.
pub const DYADIC_INTERCEPTS: [f64; 5] = [-1.0, -1.25, -1.5, -0.75, 0.375];
pub const DYADIC_SLOPES: [f64; 5] = [0.625, 1.96875, 3.0, 1.96875, 0.625];

/// Max |dyadic model − cos(π(1 − λ))| over a 10⁶-interval grid on [0, 1], reached as
/// λ → 0.3 from below. Measured 7.15892e-2.
pub const TAU_DYADIC: f64 = 7.159e-2;

impl PiecewiseLinearModel {
    pub fn new(breakpoints: Vec<f64>, intercepts: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let k = intercepts.len();
        if k == 0 || slopes.len() != k || breakpoints.len() != k + 1 {
            return Err(Error::invalid(format!(
                "piecewise model needs K >= 1 segments with K+1 breakpoints (got {} breakpoints, {} intercepts, {} slopes)",
                breakpoints.len(),
                intercepts.len(),
                slopes.len()
            )));
        }
        if breakpoints[0] != 0.0 || breakpoints[k] != 1.0 {
            return Err(Error::invalid("breakpoints must start at 0 and end at 1"));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("breakpoints must be strictly ascending"));
        }
        if !intercepts.iter().chain(&slopes).all(|v| v.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(Self {
            breakpoints,
            intercepts,
            slopes,
        })
    }

    /// The five-segment approximation of `cos(π(1 − λ))` with its printed coefficients.
    pub fn reference() -> Self {
        Self {
            breakpoints: REFERENCE_BREAKPOINTS.to_vec(),
            intercepts: REFERENCE_INTERCEPTS.to_vec(),
            slopes: REFERENCE_SLOPES.to_vec(),
        }
    }

    /// Same segments with dyadic constants, as built in hardware.
    pub fn reference_dyadic() -> Self {
        Self {
            breakpoints: REFERENCE_BREAKPOINTS.to_vec(),
            intercepts: DYADIC_INTERCEPTS.to_vec(),
            slopes: DYADIC_SLOPES.to_vec(),
        }
    }

    pub fn segments(&self) -> usize {
        self.intercepts.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Index of the segment whose half-open interval holds `lambda`.
    pub fn segment_of(&self, lambda: f64) -> usize {
        let k = self.segments();
        // first breakpoint strictly greater than lambda, minus one
        let idx = self.breakpoints[1..k].partition_point(|&b| b <= lambda);
        idx.min(k - 1)
    }

    pub fn eval(&self, lambda: f64) -> Result<f64> {
        check_unit(lambda)?;
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_unchecked(&self, lambda: f64) -> f64 {
        let s = self.segment_of(lambda);
        self.intercepts[s] + self.slopes[s] * lambda
    }
}

pub fn piecewise_rho(lambda: f64, model: &PiecewiseLinearModel) -> Result<f64> {
    model.eval(lambda)
}

pub fn piecewise_rho_dyadic(lambda: f64) -> Result<f64> {
    PiecewiseLinearModel::reference_dyadic().eval(lambda)
}

/// Clamp to [−1, 1]. Opt-in: the raw piecewise values reach ±1.01.
pub fn clamp_unit(rho: f64) -> f64 {
    rho.clamp(-1.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimates {
    pub acf: f64,
    pub kedem: f64,
    pub proposed: f64,
}

/// All three estimators on one series, the piecewise one with the reference model.
pub fn estimate_all(series: &[f64]) -> Result<Estimates> {
    let acf = acf_estimate(series)?;
    let lambda = lambda_hat(&sign_process(series))?.value();
    Ok(Estimates {
        acf,
        kedem: kedem_rho(lambda)?,
        proposed: PiecewiseLinearModel::reference().eval(lambda)?,
    })
}
