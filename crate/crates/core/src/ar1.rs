//! Gaussian AR(1) sample paths and their sign processes.
//!
//! The process is `X_n = ρ X_{n−1} + W_n` with `W_n ~ N(0, σ²)` i.i.d. By default
//! the first sample is drawn from the stationary marginal `N(0, σ²/(1 − ρ²))`, so
//! `cor(X_n, X_m) = ρ^|n−m|` holds from the first sample on.

use std::ops::Deref;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Parameters of `X_n = ρ X_{n−1} + W_n`.
///
/// `noise_sigma` is the standard deviation of `W_n`, not its variance. The
/// experiment's noise level "N(0, 0.61)" is read as σ = 0.61, which is what a 90 %
/// coverage of [−1, 1] gives (see [`noise_sigma_for_coverage`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ar1Params {
    rho: f64,
    noise_sigma: f64,
}

impl Ar1Params {
    pub fn new(rho: f64, noise_sigma: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::Domain {
                what: "rho",
                value: rho,
                domain: "|rho| < 1",
            });
        }
        if !(noise_sigma > 0.0 && noise_sigma.is_finite()) {
            return Err(Error::Domain {
                what: "noise_sigma",
                value: noise_sigma,
                domain: "noise_sigma > 0",
            });
        }
        Ok(Self { rho, noise_sigma })
    }

    pub fn from_noise_variance(rho: f64, noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0) {
            return Err(Error::Domain {
                what: "noise_variance",
                value: noise_variance,
                domain: "noise_variance > 0",
            });
        }
        Self::new(rho, noise_variance.sqrt())
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_sigma * self.noise_sigma
    }

    /// Variance of the stationary marginal, `σ²/(1 − ρ²)`.
    pub fn stationary_variance(&self) -> f64 {
        self.noise_variance() / (1.0 - self.rho * self.rho)
    }
}

/// How the first sample of a path is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Init {
    /// `X_1 ~ N(0, σ²/(1 − ρ²))`.
    #[default]
    Stationary,
    /// Start from `X_0 = 0` and discard this many steps before recording.
    BurnIn(usize),
}

/// Real-valued samples `X_1 .. X_N`. Never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSeries(Vec<f64>);

impl SampleSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooShort {
                required: 1,
                got: 0,
            });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for SampleSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// The sign process `S_n = I(X_n > 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinarySeries(Vec<bool>);

impl BinarySeries {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }
}

impl Deref for BinarySeries {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

/// Standard deviation σ such that `P(|W| ≤ bound) = coverage` for `W ~ N(0, σ²)`.
pub fn noise_sigma_for_coverage(coverage: f64, bound: f64) -> Result<f64> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::Domain {
            what: "coverage",
            value: coverage,
            domain: "0 < coverage < 1",
        });
    }
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::Domain {
            what: "bound",
            value: bound,
            domain: "bound > 0",
        });
    }
    let z = Normal::standard().inverse_cdf(0.5 * (1.0 + coverage));
    Ok(bound / z)
}

pub fn generate_ar1(params: Ar1Params, n: usize, seed: u64) -> Result<SampleSeries> {
    generate_ar1_with(params, n, seed, Init::Stationary)
}

pub fn generate_ar1_with(
    params: Ar1Params,
    n: usize,
    seed: u64,
    init: Init,
) -> Result<SampleSeries> {
    if n < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let rho = params.rho;
    let sigma = params.noise_sigma;

    let mut values = Vec::with_capacity(n);
    let mut x = match init {
        Init::Stationary => draw() * params.stationary_variance().sqrt(),
        Init::BurnIn(steps) => {
            let mut x = 0.0;
            for _ in 0..=steps {
                x = rho * x + sigma * draw();
            }
            x
        }
    };
    values.push(x);
    for _ in 1..n {
        x = rho * x + sigma * draw();
        values.push(x);
    }
    Ok(SampleSeries(values))
}

/// Zero maps to 0: the indicator is strict.
pub fn sign_process(series: &[f64]) -> BinarySeries {
    BinarySeries(series.iter().map(|&x| x > 0.0).collect())
}

/// `ρ^lag`. Negative lags are not representable.
pub fn theoretical_acf(params: &Ar1Params, lag: u32) -> f64 {
    match i32::try_from(lag) {
        Ok(k) => params.rho.powi(k),
        Err(_) => params.rho.powf(lag as f64),
    }
}
