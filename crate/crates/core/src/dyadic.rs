//! Dyadic rationals `k / 2^m` and their quantization under numerator and
//! denominator caps.
//!
//! Two quantizers are offered. [`quantize_dyadic`] returns the closest value within
//! the caps. [`quantize_dyadic_cost_aware`] trades accuracy for hardware cost, where
//! the cost depends on how the constant is used: a slope is realised as a shift-add
//! multiplier and pays per nonzero canonical-signed-digit of its numerator, while an
//! intercept is a constant word added once and pays per fraction bit it needs.

use std::fmt;

/// Caps used by the reference constant table: denominators up to 2^5, numerators up to 63.
pub const REFERENCE_CAPS: DyadicCaps = DyadicCaps {
    max_log2_denominator: 5,
    max_numerator: 63,
};

/// Cost weight for [`quantize_dyadic_cost_aware`] that reproduces the reference
/// table. Any weight in [0.019, 0.0285] does; this is the dyadic value nearest the
/// middle of that window.
pub const REFERENCE_COST_WEIGHT: f64 = 3.0 / 128.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: i64,
    log2_denominator: u32,
}

impl DyadicRational {
    pub const ONE: Self = Self::new(1, 0);

    pub const fn new(numerator: i64, log2_denominator: u32) -> Self {
        Self {
            numerator,
            log2_denominator,
        }
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    pub fn denominator(&self) -> i64 {
        1i64 << self.log2_denominator
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator() as f64
    }

    /// Lowest terms: odd numerator unless the denominator is 1.
    pub fn reduced(&self) -> Self {
        let mut r = *self;
        if r.numerator == 0 {
            return Self::new(0, 0);
        }
        while r.log2_denominator > 0 && r.numerator % 2 == 0 {
            r.numerator /= 2;
            r.log2_denominator -= 1;
        }
        r
    }

    pub fn within(&self, caps: &DyadicCaps) -> bool {
        self.log2_denominator <= caps.max_log2_denominator
            && self.numerator.unsigned_abs() <= caps.max_numerator
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log2_denominator == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicCaps {
    pub max_log2_denominator: u32,
    pub max_numerator: u64,
}

/// How a constant enters the datapath, which decides what it costs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantRole {
    Slope,
    Intercept,
}

/// One nonzero digit of a canonical signed-digit (non-adjacent form) expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedDigit {
    pub negative: bool,
    pub shift: u32,
}

/// Non-adjacent form of `n`: `n = Σ ±2^shift`, no two adjacent nonzero digits, the
/// minimum possible number of nonzero digits. Ordered from least significant.
pub fn csd_digits(n: i64) -> Vec<SignedDigit> {
    let negate = n < 0;
    let mut v = n.unsigned_abs() as u128;
    let mut digits = Vec::new();
    let mut shift = 0;
    while v != 0 {
        if v & 1 == 1 {
            // digit is +1 when v ≡ 1 (mod 4), −1 when v ≡ 3 (mod 4)
            let neg = v & 3 == 3;
            digits.push(SignedDigit {
                negative: neg != negate,
                shift,
            });
            if neg {
                v += 1;
            } else {
                v -= 1;
            }
        }
        v >>= 1;
        shift += 1;
    }
    digits
}

pub fn nonzero_digits(n: i64) -> u32 {
    csd_digits(n).len() as u32
}

/// Every value within the caps, once, in lowest terms, ordered by denominator then
/// by numerator magnitude.
fn candidates(caps: &DyadicCaps) -> impl Iterator<Item = DyadicRational> + '_ {
    let max = caps.max_numerator as i64;
    (0..=caps.max_log2_denominator).flat_map(move |d| {
        (0..=max).flat_map(move |k| {
            let keep = d == 0 || k % 2 == 1;
            let pos = DyadicRational::new(k, d);
            let neg = DyadicRational::new(-k, d);
            let items = if !keep {
                Vec::new()
            } else if k == 0 {
                vec![pos]
            } else {
                vec![pos, neg]
            };
            items.into_iter()
        })
    })
}

/// Closest dyadic rational within the caps. Ties go to the smaller denominator,
/// then the smaller numerator magnitude.
pub fn quantize_dyadic(
    value: f64,
    max_log2_denominator: u32,
    max_numerator: u64,
) -> DyadicRational {
    let caps = DyadicCaps {
        max_log2_denominator,
        max_numerator,
    };
    best_by(&caps, |c| (value - c.value()).abs())
}

/// Minimises `|value − q| + weight · cost(q, role)`. See the module docs for the
/// cost of each role.
pub fn quantize_dyadic_cost_aware(
    value: f64,
    caps: &DyadicCaps,
    role: ConstantRole,
    weight: f64,
) -> DyadicRational {
    best_by(caps, |c| {
        (value - c.value()).abs() + weight * role_cost(c, role) as f64
    })
}

pub fn role_cost(c: &DyadicRational, role: ConstantRole) -> u32 {
    let r = c.reduced();
    match role {
        ConstantRole::Slope => nonzero_digits(r.numerator),
        ConstantRole::Intercept => r.log2_denominator,
    }
}

fn best_by(caps: &DyadicCaps, score: impl Fn(&DyadicRational) -> f64) -> DyadicRational {
    let mut best: Option<(f64, DyadicRational)> = None;
    for c in candidates(caps) {
        let s = score(&c);
        // strict comparison keeps the earlier (smaller denominator / magnitude) candidate on ties
        match best {
            Some((bs, _)) if s >= bs => {}
            _ => best = Some((s, c)),
        }
    }
    best.map(|(_, c)| c).unwrap_or(DyadicRational::new(0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive search over every (numerator, exponent) pair, without reduction.
    fn brute_closest(value: f64, d_max: u32, n_max: i64) -> f64 {
        let mut best = f64::INFINITY;
        let mut best_v = 0.0;
        for d in 0..=d_max {
            for n in -n_max..=n_max {
                let v = n as f64 / (1u64 << d) as f64;
                if (value - v).abs() < best {
                    best = (value - v).abs();
                    best_v = v;
                }
            }
        }
        best_v
    }

    #[test]
    fn csd_examples() {
        let expand = |n: i64| -> i64 {
            csd_digits(n)
                .iter()
                .map(|d| {
                    if d.negative {
                        -(1i64 << d.shift)
                    } else {
                        1i64 << d.shift
                    }
                })
                .sum()
        };
        assert_eq!(nonzero_digits(5), 2);
        assert_eq!(nonzero_digits(63), 2);
        assert_eq!(nonzero_digits(3), 2);
        assert_eq!(nonzero_digits(1), 1);
        assert_eq!(nonzero_digits(0), 0);
        assert_eq!(nonzero_digits(97), 3);
        for n in -300..300 {
            assert_eq!(expand(n), n);
            let d = csd_digits(n);
            assert!(
                d.windows(2).all(|w| w[1].shift > w[0].shift + 1),
                "{n} not NAF"
            );
        }
    }

    #[test]
    fn closest_mode_agrees_with_exhaustive_search() {
        for v in [
            0.64, 1.97, 3.02, 1.01, 1.20, 1.51, 0.77, 0.37, -0.3, 0.01, 2.5, 5.0,
        ] {
            let q = quantize_dyadic(v, 5, 63);
            assert_eq!(q.value(), brute_closest(v, 5, 63), "{v}");
        }
        // 0.64·32 = 20.48, so the closest candidate is 20/32 = 5/8, not 21/32
        assert_eq!(quantize_dyadic(0.64, 5, 63), DyadicRational::new(5, 3));
        assert_eq!(quantize_dyadic(0.5, 5, 63), DyadicRational::new(1, 1));
        // beyond the numerator cap it saturates at the largest representable value
        assert_eq!(quantize_dyadic(100.0, 5, 63), DyadicRational::new(63, 0));
    }

    #[test]
    fn cost_aware_reproduces_reference_table() {
        let slope = |v| {
            quantize_dyadic_cost_aware(
                v,
                &REFERENCE_CAPS,
                ConstantRole::Slope,
                REFERENCE_COST_WEIGHT,
            )
        };
        let icpt = |v| {
            quantize_dyadic_cost_aware(
                v,
                &REFERENCE_CAPS,
                ConstantRole::Intercept,
                REFERENCE_COST_WEIGHT,
            )
        };
        assert_eq!(slope(0.64), DyadicRational::new(5, 3));
        assert_eq!(slope(1.97), DyadicRational::new(63, 5));
        assert_eq!(slope(3.02), DyadicRational::new(3, 0));
        assert_eq!(icpt(1.01), DyadicRational::new(1, 0));
        assert_eq!(icpt(1.20), DyadicRational::new(5, 2));
        assert_eq!(icpt(1.51), DyadicRational::new(3, 1));
        assert_eq!(icpt(0.77), DyadicRational::new(3, 2));
        assert_eq!(icpt(0.37), DyadicRational::new(3, 3));
        assert_eq!(slope(0.5), DyadicRational::new(1, 1));
        assert_eq!(icpt(0.5), DyadicRational::new(1, 1));
    }

    #[test]
    fn single_digit_weight_cannot_reproduce_table() {
        // documents why the cost is role-aware: charging intercepts by digit count
        // sends 1.20 to 19/16 for every weight that keeps 1.97 at 63/32
        for w in [0.01, 0.02, 0.028] {
            let q = quantize_dyadic_cost_aware(1.20, &REFERENCE_CAPS, ConstantRole::Slope, w);
            assert_ne!(q, DyadicRational::new(5, 2), "w = {w}");
        }
    }

    proptest! {
        #[test]
        fn quantization_is_idempotent(n in -63i64..=63, d in 0u32..=5) {
            let v = DyadicRational::new(n, d).value();
            let q = quantize_dyadic(v, 5, 63);
            prop_assert_eq!(q.value(), v);
            prop_assert_eq!(q, DyadicRational::new(n, d).reduced());
            prop_assert_eq!(quantize_dyadic(q.value(), 5, 63), q);
        }

        #[test]
        fn closest_is_never_beaten(v in -70.0f64..70.0) {
            let q = quantize_dyadic(v, 5, 63);
            prop_assert!(q.within(&REFERENCE_CAPS));
            prop_assert_eq!((v - q.value()).abs(), (v - brute_closest(v, 5, 63)).abs());
        }
    }
}
