//! Two's-complement fixed-point words, operation counting, a circular-rotation
//! CORDIC cosine and shift-add multiplication by dyadic constants.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::dyadic::{csd_digits, DyadicRational};
use crate::error::{Error, Result};

/// Signed fixed-point format: `total_bits` including the sign bit, of which
/// `fraction_bits` sit right of the binary point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QFormat {
    total_bits: u32,
    fraction_bits: u32,
}

impl QFormat {
    /// 10-bit word, range [−2, 2), LSB 2⁻⁸.
    pub const Q1_8: QFormat = QFormat {
        total_bits: 10,
        fraction_bits: 8,
    };

    /// Default wide internal word: 16 bits, range [−4, 4), LSB 2⁻¹³.
    pub const Q2_13: QFormat = QFormat {
        total_bits: 16,
        fraction_bits: 13,
    };

    pub fn new(total_bits: u32, fraction_bits: u32) -> Result<Self> {
        if !(2..=64).contains(&total_bits) || fraction_bits >= total_bits {
            return Err(Error::invalid(format!(
                "Q format needs 2 <= total_bits <= 64 and fraction_bits < total_bits, got {total_bits}/{fraction_bits}"
            )));
        }
        Ok(Self {
            total_bits,
            fraction_bits,
        })
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn fraction_bits(&self) -> u32 {
        self.fraction_bits
    }

    pub fn integer_bits(&self) -> u32 {
        self.total_bits - 1 - self.fraction_bits
    }

    pub fn min_raw(&self) -> i64 {
        if self.total_bits == 64 {
            i64::MIN
        } else {
            -(1i64 << (self.total_bits - 1))
        }
    }

    pub fn max_raw(&self) -> i64 {
        if self.total_bits == 64 {
            i64::MAX
        } else {
            (1i64 << (self.total_bits - 1)) - 1
        }
    }

    pub fn lsb(&self) -> f64 {
        (-(self.fraction_bits as f64)).exp2()
    }

    pub fn min_value(&self) -> f64 {
        self.min_raw() as f64 * self.lsb()
    }

    pub fn max_value(&self) -> f64 {
        self.max_raw() as f64 * self.lsb()
    }

    pub fn contains_raw(&self, raw: i64) -> bool {
        (self.min_raw()..=self.max_raw()).contains(&raw)
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}.{}", self.integer_bits(), self.fraction_bits)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Rounding {
    #[default]
    NearestEven,
    /// Toward −∞, what an arithmetic right shift does.
    Truncate,
}

/// A raw two's-complement integer together with its format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FixedWord {
    raw: i64,
    format: QFormat,
}

impl FixedWord {
    pub fn from_raw(raw: i64, format: QFormat) -> Result<Self> {
        if !format.contains_raw(raw) {
            return Err(Error::invalid(format!(
                "raw value {raw} does not fit {format}"
            )));
        }
        Ok(Self { raw, format })
    }

    /// Nearest representable value; saturates at the format range.
    pub fn quantize(value: f64, format: QFormat, rounding: Rounding) -> Self {
        Self::quantize_flagged(value, format, rounding).0
    }

    /// As [`FixedWord::quantize`], also reporting whether the value saturated.
    pub fn quantize_flagged(value: f64, format: QFormat, rounding: Rounding) -> (Self, bool) {
        if value.is_nan() {
            return (Self { raw: 0, format }, true);
        }
        let scaled = value * (format.fraction_bits as f64).exp2();
        let r = match rounding {
            Rounding::NearestEven => scaled.round_ties_even(),
            Rounding::Truncate => scaled.floor(),
        };
        let (lo, hi) = (format.min_raw(), format.max_raw());
        if r < lo as f64 {
            (Self { raw: lo, format }, true)
        } else if r > hi as f64 {
            (Self { raw: hi, format }, true)
        } else {
            (
                Self {
                    raw: r as i64,
                    format,
                },
                false,
            )
        }
    }

    pub fn zero(format: QFormat) -> Self {
        Self { raw: 0, format }
    }

    pub fn raw(&self) -> i64 {
        self.raw
    }

    pub fn format(&self) -> QFormat {
        self.format
    }

    pub fn to_f64(&self) -> f64 {
        self.raw as f64 * self.format.lsb()
    }

    pub fn is_positive(&self) -> bool {
        self.raw > 0
    }

    /// Re-express in another format. Narrowing fraction bits rounds; the result saturates.
    pub fn requantize(&self, format: QFormat, rounding: Rounding) -> Self {
        let shift = format.fraction_bits as i64 - self.format.fraction_bits as i64;
        let raw = if shift >= 0 {
            (self.raw as i128) << shift
        } else {
            shift_right_rounded(self.raw as i128, (-shift) as u32, rounding)
        };
        Self {
            raw: saturate(raw, format),
            format,
        }
    }

    /// Saturating sum; both words must share a format.
    pub fn add<S: OpSink>(self, other: Self, ops: &mut S) -> Self {
        assert_eq!(self.format, other.format, "format mismatch in add");
        ops.add(1);
        let raw = self.raw as i128 + other.raw as i128;
        Self {
            raw: saturate_counted(raw, self.format, ops),
            format: self.format,
        }
    }

    pub fn sub<S: OpSink>(self, other: Self, ops: &mut S) -> Self {
        assert_eq!(self.format, other.format, "format mismatch in sub");
        ops.add(1);
        let raw = self.raw as i128 - other.raw as i128;
        Self {
            raw: saturate_counted(raw, self.format, ops),
            format: self.format,
        }
    }

    /// Product by a constant word, rounded back to this word's format.
    pub fn mul<S: OpSink>(self, constant: Self, ops: &mut S) -> Self {
        ops.mul(1);
        let wide = self.raw as i128 * constant.raw as i128;
        let raw = shift_right_rounded(wide, constant.format.fraction_bits, Rounding::NearestEven);
        Self {
            raw: saturate_counted(raw, self.format, ops),
            format: self.format,
        }
    }

    pub fn neg(self) -> Self {
        Self {
            raw: saturate(-(self.raw as i128), self.format),
            format: self.format,
        }
    }
}

impl fmt::Display for FixedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

fn shift_right_rounded(v: i128, shift: u32, rounding: Rounding) -> i128 {
    if shift == 0 {
        return v;
    }
    let floor = v >> shift;
    match rounding {
        Rounding::Truncate => floor,
        Rounding::NearestEven => {
            let rem = v - (floor << shift);
            let half = 1i128 << (shift - 1);
            if rem > half || (rem == half && floor & 1 == 1) {
                floor + 1
            } else {
                floor
            }
        }
    }
}

fn saturate(raw: i128, format: QFormat) -> i64 {
    raw.clamp(format.min_raw() as i128, format.max_raw() as i128) as i64
}

fn saturate_counted<S: OpSink>(raw: i128, format: QFormat, ops: &mut S) -> i64 {
    let s = saturate(raw, format);
    if s as i128 != raw {
        ops.saturation();
    }
    s
}

/// Receiver for arithmetic-operation events. Datapath code is written once against
/// this trait; [`NoCount`] makes it free, [`OpCounter`] tallies.
pub trait OpSink {
    fn mul(&mut self, n: u64);
    fn div(&mut self, n: u64);
    fn add(&mut self, n: u64);
    fn shift(&mut self, n: u64);
    fn compare(&mut self, n: u64);
    fn saturation(&mut self) {}
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoCount;

impl OpSink for NoCount {
    #[inline]
    fn mul(&mut self, _: u64) {}
    #[inline]
    fn div(&mut self, _: u64) {}
    #[inline]
    fn add(&mut self, _: u64) {}
    #[inline]
    fn shift(&mut self, _: u64) {}
    #[inline]
    fn compare(&mut self, _: u64) {}
}

/// Snapshot of an [`OpCounter`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpTally {
    pub multiplications: u64,
    pub divisions: u64,
    pub additions: u64,
    pub shifts: u64,
    pub comparisons: u64,
    pub saturations: u64,
}

/// Mutable counting session. Tallies only grow until [`OpCounter::reset`].
#[derive(Clone, Debug, Default)]
pub struct OpCounter {
    tally: OpTally,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn report(&self) -> OpTally {
        self.tally
    }

    pub fn reset(&mut self) {
        self.tally = OpTally::default();
    }
}

impl OpSink for OpCounter {
    fn mul(&mut self, n: u64) {
        self.tally.multiplications += n;
    }
    fn div(&mut self, n: u64) {
        self.tally.divisions += n;
    }
    fn add(&mut self, n: u64) {
        self.tally.additions += n;
    }
    fn shift(&mut self, n: u64) {
        self.tally.shifts += n;
    }
    fn compare(&mut self, n: u64) {
        self.tally.comparisons += n;
    }
    fn saturation(&mut self) {
        self.tally.saturations += 1;
    }
}

pub const DEFAULT_CORDIC_ITERATIONS: u32 = 14;

/// Max |CORDIC − cos| of the default core (14 iterations, Q2.13) over every
/// representable angle in [−π, π]. Measured 1.10364e-3.
pub const TAU_CORDIC: f64 = 1.104e-3;

/// Circular-rotation CORDIC evaluating cosine in a fixed internal format.
///
/// The angle is folded into [0, π/2] (cosine is even; `cos θ = −cos(π − θ)`), the
/// start vector is pre-scaled by the gain `K = Π 1/√(1 + 2^−2i)`, and every iteration
/// updates `x`/`y` with one addition each and an arithmetic right shift by `i`
/// (truncating). The shift is free for `i = 0`, which is why the shift count is an
/// upper bound. The `z` path and the quadrant fold are angle bookkeeping and are
/// not charged.
#[derive(Clone, Debug)]
pub struct Cordic {
    iterations: u32,
    format: QFormat,
    gain: i64,
    atan: Vec<i64>,
    pi: i64,
    half_pi: i64,
}

impl Cordic {
    pub fn new(iterations: u32, format: QFormat) -> Result<Self> {
        if iterations == 0 || iterations > 62 {
            return Err(Error::invalid("CORDIC needs 1..=62 iterations"));
        }
        if format.integer_bits() < 2 {
            return Err(Error::invalid(format!(
                "CORDIC internal format {format} cannot hold angles up to pi"
            )));
        }
        let q = |v: f64| FixedWord::quantize(v, format, Rounding::NearestEven).raw;
        let gain = (0..iterations)
            .map(|i| 1.0 / (1.0 + (-2.0 * i as f64).exp2()).sqrt())
            .product::<f64>();
        Ok(Self {
            iterations,
            format,
            gain: q(gain),
            atan: (0..iterations)
                .map(|i| q((-(i as f64)).exp2().atan()))
                .collect(),
            pi: q(PI),
            half_pi: q(FRAC_PI_2),
        })
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn format(&self) -> QFormat {
        self.format
    }

    pub fn gain(&self) -> f64 {
        FixedWord {
            raw: self.gain,
            format: self.format,
        }
        .to_f64()
    }

    /// Cosine of `angle` (radians), returned in the internal format.
    pub fn cos<S: OpSink>(&self, angle: FixedWord, ops: &mut S) -> FixedWord {
        let mut a = angle.requantize(self.format, Rounding::NearestEven).raw;
        // wrap into [−π, π]; cheap for the intended domain
        let two_pi = 2 * self.pi;
        while a > self.pi {
            a -= two_pi;
        }
        while a < -self.pi {
            a += two_pi;
        }
        let mut z = a.abs();
        let negate = z > self.half_pi;
        if negate {
            z = self.pi - z;
        }

        let mut x = self.gain;
        let mut y = 0i64;
        for (i, &step) in self.atan.iter().enumerate() {
            let dx = y >> i;
            let dy = x >> i;
            if z >= 0 {
                x -= dx;
                y += dy;
                z -= step;
            } else {
                x += dx;
                y -= dy;
                z += step;
            }
            ops.add(2);
            if i > 0 {
                ops.shift(2);
            }
        }
        let raw = if negate { -x } else { x };
        FixedWord {
            raw: saturate_counted(raw as i128, self.format, ops),
            format: self.format,
        }
    }
}

/// Cosine with the default 14-iteration core in the 16-bit internal format.
pub fn cordic_cos(angle: FixedWord, iterations: u32) -> Result<FixedWord> {
    Ok(Cordic::new(iterations, QFormat::Q2_13)?.cos(angle, &mut NoCount))
}

/// `x · c` by shift-add over the canonical signed digits of the numerator, then an
/// arithmetic right shift by the denominator exponent. The result equals the exact
/// product truncated toward −∞ in `x`'s format, saturated.
///
/// Costs: one addition per digit beyond the first, one shift per digit with nonzero
/// position, one shift for the final scaling when the denominator exceeds 1.
pub fn dyadic_mul<S: OpSink>(x: FixedWord, c: DyadicRational, ops: &mut S) -> FixedWord {
    let digits = csd_digits(c.numerator());
    let mut acc: i128 = 0;
    for (k, d) in digits.iter().enumerate() {
        let term = (x.raw as i128) << d.shift;
        if d.shift > 0 {
            ops.shift(1);
        }
        if k == 0 {
            acc = if d.negative { -term } else { term };
        } else {
            ops.add(1);
            if d.negative {
                acc -= term;
            } else {
                acc += term;
            }
        }
    }
    if c.log2_denominator() > 0 && !digits.is_empty() {
        ops.shift(1);
        acc >>= c.log2_denominator();
    }
    FixedWord {
        raw: saturate_counted(acc, x.format, ops),
        format: x.format,
    }
}
