//! Sample-at-a-time models of the three hardware datapaths.
//!
//! - [`CorrelatorState`]: sliding-window ACF. Lag products and squares go into
//!   delay lines; the term leaving the window is subtracted as the new one is
//!   added, so the accumulators only ever hold the last window.
//! - [`LambdaCounterState`]: sign-agreement counter. The input word is reduced to
//!   its sign, compared with the previous sign, and the comparison result enters a
//!   shift register; the count adds the new result and subtracts the one leaving.
//! - [`RhoPipeline`]: the λ counter followed by a [`RhoBlock`], either a CORDIC
//!   cosine or the multiplier-free dyadic piecewise-linear evaluator.
//!
//! Output is suppressed until the window is full unless
//! [`WindowConfig::emit_during_warmup`] is set, in which case the zero-initialised
//! delay lines are exposed exactly as hardware would.

use std::f64::consts::PI;
use std::io::{BufRead, Read};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::estimators::{LambdaEstimate, REFERENCE_BREAKPOINTS};
use crate::fixed::{
    dyadic_mul, Cordic, FixedWord, OpCounter, OpSink, OpTally, QFormat, Rounding,
    DEFAULT_CORDIC_ITERATIONS,
};

/// Window length used by the reference hardware.
pub const DEFAULT_WINDOW: usize = 512;

/// Reported pipeline latency of the reference designs, in clock cycles. Metadata
/// only: this model is transaction level, one push gives one result.
pub const LATENCY_CYCLES_ACF: u32 = 35;
pub const LATENCY_CYCLES_KEDEM: u32 = 22;
pub const LATENCY_CYCLES_PROPOSED: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowConfig {
    pub window_n: usize,
    pub input_format: QFormat,
    pub emit_during_warmup: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window_n: DEFAULT_WINDOW,
            input_format: QFormat::Q1_8,
            emit_during_warmup: false,
        }
    }
}

impl WindowConfig {
    pub fn new(window_n: usize, input_format: QFormat) -> Result<Self> {
        let cfg = Self {
            window_n,
            input_format,
            emit_during_warmup: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.window_n < 2 {
            return Err(Error::invalid(format!(
                "window must be >= 2, got {}",
                self.window_n
            )));
        }
        Ok(())
    }

    fn check_sample(&self, sample: &FixedWord) -> Result<()> {
        if sample.format() != self.input_format {
            return Err(Error::invalid(format!(
                "sample format {} does not match the window input format {}",
                sample.format(),
                self.input_format
            )));
        }
        Ok(())
    }
}

/// Accumulator width that provably holds the window sums: the largest square is
/// `2^(2(B−1))` and the denominator adds `N` of them, plus a sign bit.
pub fn required_accumulator_bits(window_n: usize, input_format: QFormat) -> u32 {
    let b = input_format.total_bits();
    let log2n = usize::BITS - (window_n - 1).leading_zeros();
    2 * (b - 1) + log2n + 2
}

/// Exact window sums of the ACF estimator, in raw-integer units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AcfWindow {
    pub numerator: i64,
    pub denominator: i64,
}

impl AcfWindow {
    pub fn ratio(&self) -> Result<f64> {
        if self.denominator == 0 {
            return Err(Error::Degenerate("window holds only zero samples"));
        }
        Ok(self.numerator as f64 / self.denominator as f64)
    }

    /// Ratio rounded to an output word.
    pub fn to_word(&self, format: QFormat) -> Result<FixedWord> {
        Ok(FixedWord::quantize(
            self.ratio()?,
            format,
            Rounding::NearestEven,
        ))
    }
}

/// Sliding-window ACF correlator.
#[derive(Clone, Debug)]
pub struct CorrelatorState {
    cfg: WindowConfig,
    /// Last N−1 lag products.
    products: Vec<i64>,
    /// Last N squares.
    squares: Vec<i64>,
    head_p: usize,
    head_s: usize,
    numerator: i64,
    denominator: i64,
    previous: i64,
    samples_seen: u64,
    accumulator_bits: u32,
    peak: u64,
}

impl CorrelatorState {
    pub fn new(cfg: WindowConfig) -> Result<Self> {
        cfg.validate()?;
        let required = required_accumulator_bits(cfg.window_n, cfg.input_format);
        let accumulator_bits = match required {
            0..=32 => 32,
            33..=64 => 64,
            _ => {
                return Err(Error::invalid(format!(
                    "window {} with {}-bit input needs {required}-bit accumulators",
                    cfg.window_n,
                    cfg.input_format.total_bits()
                )))
            }
        };
        Ok(Self {
            cfg,
            products: vec![0; cfg.window_n - 1],
            squares: vec![0; cfg.window_n],
            head_p: 0,
            head_s: 0,
            numerator: 0,
            denominator: 0,
            previous: 0,
            samples_seen: 0,
            accumulator_bits,
            peak: 0,
        })
    }

    pub fn accumulator_bits(&self) -> u32 {
        self.accumulator_bits
    }

    /// Bits needed (with sign) by the largest accumulator magnitude seen so far.
    pub fn peak_accumulator_bits(&self) -> u32 {
        u64::BITS - self.peak.leading_zeros() + 1
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    pub fn push(&mut self, sample: FixedWord) -> Result<Option<AcfWindow>> {
        self.cfg.check_sample(&sample)?;
        let x = sample.raw();
        let product = x * self.previous;
        let square = x * x;
        self.numerator += product - self.products[self.head_p];
        self.denominator += square - self.squares[self.head_s];
        self.products[self.head_p] = product;
        self.squares[self.head_s] = square;
        self.head_p = (self.head_p + 1) % self.products.len();
        self.head_s = (self.head_s + 1) % self.squares.len();
        self.previous = x;
        self.samples_seen += 1;
        self.peak = self
            .peak
            .max(self.numerator.unsigned_abs())
            .max(self.denominator.unsigned_abs());
        debug_assert!(self.peak_accumulator_bits() <= self.accumulator_bits);

        if self.samples_seen >= self.cfg.window_n as u64 || self.cfg.emit_during_warmup {
            Ok(Some(AcfWindow {
                numerator: self.numerator,
                denominator: self.denominator,
            }))
        } else {
            Ok(None)
        }
    }
}

/// Sign-agreement counter over the last N−1 consecutive pairs.
#[derive(Clone, Debug)]
pub struct LambdaCounterState {
    cfg: WindowConfig,
    previous_sign: bool,
    agreements: Vec<bool>,
    head: usize,
    agreement_count: usize,
    samples_seen: u64,
}

impl LambdaCounterState {
    pub fn new(cfg: WindowConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            previous_sign: false,
            agreements: vec![false; cfg.window_n - 1],
            head: 0,
            agreement_count: 0,
            samples_seen: 0,
        })
    }

    pub fn agreement_count(&self) -> usize {
        self.agreement_count
    }

    pub fn window(&self) -> usize {
        self.cfg.window_n
    }

    pub fn push(&mut self, sample: FixedWord) -> Result<Option<LambdaEstimate>> {
        self.push_counted(sample, &mut crate::fixed::NoCount)
    }

    /// One comparison per sample; the count update adds the entering result and
    /// subtracts the leaving one.
    pub fn push_counted<S: OpSink>(
        &mut self,
        sample: FixedWord,
        ops: &mut S,
    ) -> Result<Option<LambdaEstimate>> {
        self.cfg.check_sample(&sample)?;
        let sign = sample.is_positive();
        ops.compare(1);
        let agree = sign == self.previous_sign;
        let leaving = self.agreements[self.head];
        ops.add(2);
        self.agreement_count = self.agreement_count + usize::from(agree) - usize::from(leaving);
        self.agreements[self.head] = agree;
        self.head = (self.head + 1) % self.agreements.len();
        self.previous_sign = sign;
        self.samples_seen += 1;

        if self.samples_seen >= self.cfg.window_n as u64 || self.cfg.emit_during_warmup {
            Ok(Some(LambdaEstimate::new(
                self.agreement_count,
                self.cfg.window_n - 1,
            )?))
        } else {
            Ok(None)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoBackend {
    /// `cos(π(1 − λ̂))` through the CORDIC core.
    Cordic,
    /// Five-segment piecewise-linear model with dyadic constants, shift-add only.
    DyadicPwl,
}

/// Dyadic slopes of the five segments. Segments 4 and 5 reuse the shift-add units
/// of segments 2 and 1, so only three distinct multipliers exist.
pub const DYADIC_SLOPES: [DyadicRational; 5] = [
    DyadicRational::new(5, 3),
    DyadicRational::new(63, 5),
    DyadicRational::new(3, 0),
    DyadicRational::new(63, 5),
    DyadicRational::new(5, 3),
];

pub const DYADIC_INTERCEPTS: [DyadicRational; 5] = [
    DyadicRational::new(-1, 0),
    DyadicRational::new(-5, 2),
    DyadicRational::new(-3, 1),
    DyadicRational::new(-3, 2),
    DyadicRational::new(3, 3),
];

/// The ρ stage that follows the λ counter.
#[derive(Clone, Debug)]
pub struct RhoBlock {
    backend: RhoBackend,
    internal: QFormat,
    output: QFormat,
    cordic: Cordic,
    one: FixedWord,
    pi: FixedWord,
    breakpoints: [FixedWord; 4],
    intercepts: [FixedWord; 5],
}

impl RhoBlock {
    pub fn new(backend: RhoBackend, internal: QFormat, output: QFormat) -> Result<Self> {
        let q = |v: f64| FixedWord::quantize(v, internal, Rounding::NearestEven);
        if internal.integer_bits() < 2 {
            return Err(Error::invalid(format!(
                "internal format {internal} must hold values up to pi"
            )));
        }
        Ok(Self {
            backend,
            internal,
            output,
            cordic: Cordic::new(DEFAULT_CORDIC_ITERATIONS, internal)?,
            one: q(1.0),
            pi: q(PI),
            breakpoints: std::array::from_fn(|k| q(REFERENCE_BREAKPOINTS[k + 1])),
            intercepts: DYADIC_INTERCEPTS.map(|c| q(c.value())),
        })
    }

    pub fn backend(&self) -> RhoBackend {
        self.backend
    }

    pub fn output_format(&self) -> QFormat {
        self.output
    }

    /// `agreements / comparisons` rounded to the internal word: the divider.
    pub fn lambda_word<S: OpSink>(&self, lambda: LambdaEstimate, ops: &mut S) -> FixedWord {
        ops.div(1);
        FixedWord::quantize(lambda.value(), self.internal, Rounding::NearestEven)
    }

    /// ρ estimate for a λ word in the internal format, rounded to the output word.
    pub fn evaluate<S: OpSink>(&self, lambda: FixedWord, ops: &mut S) -> FixedWord {
        let lambda = lambda.requantize(self.internal, Rounding::NearestEven);
        let rho = match self.backend {
            RhoBackend::Cordic => {
                let angle = self.one.sub(lambda, ops).mul(self.pi, ops);
                self.cordic.cos(angle, ops)
            }
            RhoBackend::DyadicPwl => {
                let mut segment = 0;
                for b in &self.breakpoints {
                    ops.compare(1);
                    if lambda.raw() < b.raw() {
                        break;
                    }
                    segment += 1;
                }
                dyadic_mul(lambda, DYADIC_SLOPES[segment], ops).add(self.intercepts[segment], ops)
            }
        };
        rho.requantize(self.output, Rounding::NearestEven)
    }
}

/// λ counter feeding a ρ block, with its own operation counter.
#[derive(Clone, Debug)]
pub struct RhoPipeline {
    lambda: LambdaCounterState,
    block: RhoBlock,
    ops: OpCounter,
}

impl RhoPipeline {
    pub fn new(window: WindowConfig, backend: RhoBackend) -> Result<Self> {
        Self::with_formats(window, backend, QFormat::Q2_13, QFormat::Q1_8)
    }

    pub fn with_formats(
        window: WindowConfig,
        backend: RhoBackend,
        internal: QFormat,
        output: QFormat,
    ) -> Result<Self> {
        Ok(Self {
            lambda: LambdaCounterState::new(window)?,
            block: RhoBlock::new(backend, internal, output)?,
            ops: OpCounter::new(),
        })
    }

    pub fn block(&self) -> &RhoBlock {
        &self.block
    }

    /// Operations spent in the ρ block (divider included), λ counter excluded.
    pub fn op_report(&self) -> OpTally {
        self.ops.report()
    }

    pub fn push(&mut self, sample: FixedWord) -> Result<Option<FixedWord>> {
        Ok(self.lambda.push(sample)?.map(|est| {
            let word = self.block.lambda_word(est, &mut self.ops);
            self.block.evaluate(word, &mut self.ops)
        }))
    }
}

/// Quantize decimal samples into the stream's input format (round to nearest,
/// saturating).
pub fn quantize_samples(values: &[f64], format: QFormat) -> Vec<FixedWord> {
    values
        .iter()
        .map(|&v| FixedWord::quantize(v, format, Rounding::NearestEven))
        .collect()
}

/// Whitespace- or newline-separated decimal samples.
pub fn read_text_samples(reader: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                context: format!("line {}", line_no + 1),
                message: format!("not a number: {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    context: format!("line {}", line_no + 1),
                    message: format!("non-finite sample {tok:?}"),
                });
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Raw little-endian 16-bit two's-complement words, taken as raw values of `format`.
pub fn read_le16_samples(mut reader: impl Read, format: QFormat) -> Result<Vec<FixedWord>> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io("<input>", e))?;
    if bytes.len() % 2 != 0 {
        return Err(Error::Parse {
            context: "raw 16-bit input".into(),
            message: format!("odd byte count {}", bytes.len()),
        });
    }
    bytes
        .chunks_exact(2)
        .map(|c| FixedWord::from_raw(i16::from_le_bytes([c[0], c[1]]) as i64, format))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::sign_process;
    use crate::estimators::{acf_estimate, lambda_hat, piecewise_rho_dyadic};
    use crate::fixed::{NoCount, TAU_CORDIC};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn words(values: &[f64]) -> Vec<FixedWord> {
        quantize_samples(values, QFormat::Q1_8)
    }

    fn cfg(n: usize) -> WindowConfig {
        WindowConfig::new(n, QFormat::Q1_8).unwrap()
    }

    fn correlate(n: usize, xs: &[FixedWord]) -> Vec<Option<AcfWindow>> {
        let mut c = CorrelatorState::new(cfg(n)).unwrap();
        xs.iter().map(|&x| c.push(x).unwrap()).collect()
    }

    /// Window sums recomputed from scratch on raw integers.
    fn brute_window(raw: &[i64]) -> (i64, i64) {
        let num = raw.windows(2).map(|w| w[0] * w[1]).sum();
        let den = raw.iter().map(|v| v * v).sum();
        (num, den)
    }

    #[test]
    fn correlator_constant_and_alternating_streams() {
        let out = correlate(4, &words(&[1.0; 10]));
        assert!(out[..3].iter().all(Option::is_none));
        for w in out[3..].iter().flatten() {
            assert_eq!(w.ratio().unwrap(), 0.75);
        }
        let alt: Vec<f64> = (0..10)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        for w in correlate(4, &words(&alt))[3..].iter().flatten() {
            assert_eq!(w.ratio().unwrap(), -0.75);
        }
    }

    #[test]
    fn correlator_degenerate_window() {
        let out = correlate(3, &words(&[0.0; 5]));
        assert!(matches!(out[4].unwrap().ratio(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn correlator_matches_brute_force_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2, 3, 5, 17, 64] {
            let raw: Vec<i64> = (0..3 * n).map(|_| rng.random_range(-512..=511)).collect();
            let xs: Vec<FixedWord> = raw
                .iter()
                .map(|&r| FixedWord::from_raw(r, QFormat::Q1_8).unwrap())
                .collect();
            for (t, out) in correlate(n, &xs).into_iter().enumerate() {
                if t + 1 < n {
                    assert!(out.is_none());
                    continue;
                }
                let (num, den) = brute_window(&raw[t + 1 - n..=t]);
                assert_eq!(
                    out.unwrap(),
                    AcfWindow {
                        numerator: num,
                        denominator: den
                    }
                );
                let batch = acf_estimate(
                    &xs[t + 1 - n..=t]
                        .iter()
                        .map(|w| w.to_f64())
                        .collect::<Vec<_>>(),
                );
                if let (Ok(b), Ok(w)) = (batch, out.unwrap().to_word(QFormat::Q1_8)) {
                    assert!((w.to_f64() - b).abs() <= 2.0 * QFormat::Q1_8.lsb());
                }
            }
        }
    }

    #[test]
    fn warmup_outputs_when_hardware_faithful() {
        let mut c = CorrelatorState::new(WindowConfig {
            emit_during_warmup: true,
            ..cfg(4)
        })
        .unwrap();
        let first = c.push(words(&[1.0])[0]).unwrap().unwrap();
        assert_eq!(
            first,
            AcfWindow {
                numerator: 0,
                denominator: 65536
            }
        );
        let mut l = LambdaCounterState::new(WindowConfig {
            emit_during_warmup: true,
            ..cfg(4)
        })
        .unwrap();
        assert!(l.push(words(&[1.0])[0]).unwrap().is_some());
    }

    #[test]
    fn accumulators_hold_adversarial_streams() {
        let n = 512;
        let min = FixedWord::from_raw(-512, QFormat::Q1_8).unwrap();
        let max = FixedWord::from_raw(511, QFormat::Q1_8).unwrap();
        for pattern in 0..3 {
            let mut c = CorrelatorState::new(cfg(n)).unwrap();
            for t in 0..3 * n {
                let x = match pattern {
                    0 => min,
                    1 => {
                        if t % 2 == 0 {
                            min
                        } else {
                            max
                        }
                    }
                    _ => {
                        if t % 3 == 0 {
                            max
                        } else {
                            min
                        }
                    }
                };
                c.push(x).unwrap();
            }
            assert_eq!(c.accumulator_bits(), 32);
            assert!(c.peak_accumulator_bits() <= required_accumulator_bits(n, QFormat::Q1_8));
            assert!(required_accumulator_bits(n, QFormat::Q1_8) <= 32);
        }
    }

    #[test]
    fn lambda_counter_examples() {
        let mut l = LambdaCounterState::new(cfg(8)).unwrap();
        let outs: Vec<_> = words(&[0.5; 20])
            .into_iter()
            .map(|x| l.push(x).unwrap())
            .collect();
        assert!(outs[..7].iter().all(Option::is_none));
        assert!(outs[7..].iter().all(|o| o.unwrap().value() == 1.0));

        let mut l = LambdaCounterState::new(cfg(8)).unwrap();
        let alt: Vec<f64> = (0..20)
            .map(|i| if i % 2 == 0 { 0.3 } else { -0.3 })
            .collect();
        for x in words(&alt) {
            if let Some(e) = l.push(x).unwrap() {
                assert_eq!(e.value(), 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn lambda_counter_equals_batch(raw in prop::collection::vec(-512i64..=511, 6..120), n in 2usize..40) {
            let xs: Vec<FixedWord> = raw.iter().map(|&r| FixedWord::from_raw(r, QFormat::Q1_8).unwrap()).collect();
            let mut l = LambdaCounterState::new(cfg(n)).unwrap();
            let mut prev = None::<usize>;
            for (t, &x) in xs.iter().enumerate() {
                let out = l.push(x).unwrap();
                if t + 1 >= n {
                    let window: Vec<f64> = xs[t + 1 - n..=t].iter().map(|w| w.to_f64()).collect();
                    prop_assert_eq!(out.unwrap(), lambda_hat(&sign_process(&window)).unwrap());
                } else {
                    prop_assert!(out.is_none());
                }
                let count = l.agreement_count();
                if let Some(p) = prev {
                    prop_assert!((count as i64 - p as i64).abs() <= 1);
                }
                prev = Some(count);
            }
        }
    }

    fn block(backend: RhoBackend) -> RhoBlock {
        RhoBlock::new(backend, QFormat::Q2_13, QFormat::Q1_8).unwrap()
    }

    fn eval(b: &RhoBlock, lambda: f64) -> f64 {
        let w = FixedWord::quantize(lambda, QFormat::Q2_13, Rounding::NearestEven);
        b.evaluate(w, &mut NoCount).to_f64()
    }

    #[test]
    fn rho_block_examples() {
        let lsb = QFormat::Q1_8.lsb();
        let (c, d) = (block(RhoBackend::Cordic), block(RhoBackend::DyadicPwl));
        assert!(eval(&c, 0.5).abs() <= lsb);
        assert!(eval(&d, 0.5).abs() <= lsb);
        assert_eq!(eval(&d, 1.0), 1.0);
        assert!((eval(&c, 1.0) - 1.0).abs() <= TAU_CORDIC + lsb / 2.0);
        assert!((eval(&d, 0.9) - piecewise_rho_dyadic(0.9).unwrap()).abs() <= lsb);
        assert!((eval(&d, 0.9) - 0.9375).abs() <= lsb);
    }

    #[test]
    fn dyadic_constants_match_float_table() {
        for k in 0..5 {
            assert_eq!(
                DYADIC_SLOPES[k].value(),
                crate::estimators::DYADIC_SLOPES[k]
            );
            assert_eq!(
                DYADIC_INTERCEPTS[k].value(),
                crate::estimators::DYADIC_INTERCEPTS[k]
            );
        }
    }

    #[test]
    fn dyadic_block_tracks_float_dyadic_model() {
        let d = block(RhoBackend::DyadicPwl);
        for k in 0..=511 {
            let l = k as f64 / 511.0;
            let hw = eval(&d, l);
            let float = piecewise_rho_dyadic(l).unwrap();
            assert!(
                (hw - float).abs() <= 2.0 * QFormat::Q1_8.lsb(),
                "lambda {l}: {hw} vs {float}"
            );
        }
    }

    #[test]
    fn dyadic_block_stays_inside_the_proposed_budget() {
        let d = block(RhoBackend::DyadicPwl);
        for k in 0..=511 {
            let w = FixedWord::quantize(k as f64 / 511.0, QFormat::Q2_13, Rounding::NearestEven);
            let mut ops = OpCounter::new();
            d.evaluate(w, &mut ops);
            let t = ops.report();
            assert_eq!((t.multiplications, t.divisions), (0, 0));
            assert!(
                t.additions <= 2 && t.shifts <= 2 && t.comparisons <= 4,
                "{t:?}"
            );
        }
    }

    #[test]
    fn pipeline_constant_sign_stream() {
        for backend in [RhoBackend::Cordic, RhoBackend::DyadicPwl] {
            let mut p = RhoPipeline::new(cfg(16), backend).unwrap();
            let outs: Vec<_> = words(&[0.7; 40])
                .into_iter()
                .map(|x| p.push(x).unwrap())
                .collect();
            assert!(outs[..15].iter().all(Option::is_none));
            for o in outs[15..].iter().flatten() {
                assert!((o.to_f64() - 1.0).abs() <= TAU_CORDIC + QFormat::Q1_8.lsb());
            }
            let t = p.op_report();
            assert_eq!(t.divisions, 25);
        }
    }

    #[test]
    fn sample_format_mismatch_is_rejected() {
        let mut c = CorrelatorState::new(cfg(4)).unwrap();
        let w = FixedWord::quantize(0.1, QFormat::Q2_13, Rounding::NearestEven);
        assert!(c.push(w).is_err());
        assert!(WindowConfig::new(1, QFormat::Q1_8).is_err());
    }

    #[test]
    fn stream_readers() {
        let text = "0.5 -0.25\n  1e-1\n\n-2\n";
        assert_eq!(
            read_text_samples(text.as_bytes()).unwrap(),
            vec![0.5, -0.25, 0.1, -2.0]
        );
        assert!(read_text_samples("0.5 abc".as_bytes()).is_err());
        let bytes = [0x00u8, 0x01, 0xff, 0xff, 0x00, 0xfe];
        let w = read_le16_samples(&bytes[..], QFormat::Q1_8).unwrap();
        assert_eq!(
            w.iter().map(|w| w.raw()).collect::<Vec<_>>(),
            vec![256, -1, -512]
        );
        assert!(read_le16_samples(&bytes[..3], QFormat::Q1_8).is_err());
        // out-of-range raw word for a 10-bit format
        assert!(read_le16_samples(&[0x00u8, 0x7f][..], QFormat::Q1_8).is_err());
    }
}
