//! Correctly rounded mean of nonnegative doubles.
//!
//! Values are accumulated exactly as integers in units of 2^-1074 (the
//! smallest subnormal), and the mean is the exact quotient rounded once to
//! nearest-even. The result depends only on the multiset of inputs: it is
//! order-independent, returns `x` bitwise for a run of identical `x`, and is
//! unchanged when every value is repeated the same number of times.

use num_bigint::BigUint;

// 36 * 64 bits covers any finite double shifted to 2^-1074 units plus 64
// bits of carry headroom for the count.
const LIMBS: usize = 36;
const SUBNORMAL_EXP: i64 = 1074;

#[derive(Debug, Clone)]
pub struct ExactSum {
    limbs: [u64; LIMBS],
    count: u64,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self {
            limbs: [0; LIMBS],
            count: 0,
        }
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Adds a finite value `>= 0`; anything else panics.
    pub fn add(&mut self, x: f64) {
        assert!(
            x.is_finite() && x >= 0.0,
            "ExactSum accepts finite nonnegative values, got {x}"
        );
        self.count += 1;
        let bits = x.to_bits();
        let exp = (bits >> 52) & 0x7ff;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, shift) = if exp == 0 {
            (frac, 0)
        } else {
            (frac | (1u64 << 52), exp - 1)
        };
        if mant == 0 {
            return;
        }
        let limb = (shift / 64) as usize;
        let off = shift % 64;
        let lo = mant << off;
        let hi = if off == 0 { 0 } else { mant >> (64 - off) };
        self.add_at(limb, lo);
        if hi != 0 {
            self.add_at(limb + 1, hi);
        }
    }

    fn add_at(&mut self, mut i: usize, v: u64) {
        let (s, mut carry) = self.limbs[i].overflowing_add(v);
        self.limbs[i] = s;
        while carry {
            i += 1;
            let (s, c) = self.limbs[i].overflowing_add(1);
            self.limbs[i] = s;
            carry = c;
        }
    }

    /// Correctly rounded mean, `None` when nothing was added.
    pub fn mean(&self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        let digits: Vec<u32> = self
            .limbs
            .iter()
            .flat_map(|&l| [l as u32, (l >> 32) as u32])
            .collect();
        let num = BigUint::new(digits);
        Some(round_quotient(
            &num,
            &BigUint::from(self.count),
            -SUBNORMAL_EXP,
        ))
    }
}

/// Nearest-even double to `num / den * 2^scale`.
fn round_quotient(num: &BigUint, den: &BigUint, scale: i64) -> f64 {
    if num.bits() == 0 {
        return 0.0;
    }
    let quotient = |k: i64| -> (BigUint, BigUint, BigUint) {
        // floor(num / (den * 2^k)) with its remainder and divisor
        let (n, d) = if k >= 0 {
            (num.clone(), den << (k as u64))
        } else {
            (num << ((-k) as u64), den.clone())
        };
        let q = &n / &d;
        let r = &n - &q * &d;
        (q, r, d)
    };
    let mut k = num.bits() as i64 - den.bits() as i64 - 53;
    let (mut q, mut r, mut d) = quotient(k);
    if q.bits() > 53 {
        k += 1;
        (q, r, d) = quotient(k);
    }
    // exponent of one unit of q in the final value
    if k + scale < -SUBNORMAL_EXP {
        k = -SUBNORMAL_EXP - scale;
        (q, r, d) = quotient(k);
    }
    let twice: BigUint = &r << 1u32;
    let odd = q.bit(0);
    if twice > d || (twice == d && odd) {
        q += 1u32;
    }
    let q = u64::try_from(&q).expect("quotient fits in 54 bits") as f64;
    q * pow2(k + scale)
}

fn pow2(e: i64) -> f64 {
    if e >= -1022 {
        assert!(e <= 1023, "exponent {e} out of range");
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (e + SUBNORMAL_EXP))
    }
}

/// Convenience wrapper over [`ExactSum`].
pub fn exact_mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut s = ExactSum::new();
    values.into_iter().for_each(|v| s.add(v));
    s.mean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_rational_oracle() {
        // expected values: Python float(sum(Fraction(x)) / n), which rounds once
        assert_eq!(exact_mean([0.1, 0.2, 0.3]), Some(0.2));
        assert_eq!(exact_mean([0.7, 0.1, 0.1, 0.1]), Some(0.25));
        assert_eq!(
            exact_mean([1e-300, 0.5, 0.25, 1.0 / 3.0]),
            Some(0.2708333333333333)
        );
        assert_eq!(
            exact_mean([
                2.0 / 3.0,
                1.0 / 7.0,
                5e-324,
                0.9999999999999999,
                0.123456789
            ]),
            Some(0.3865961197047619)
        );
    }

    #[test]
    fn edge_values() {
        assert_eq!(exact_mean([]), None);
        assert_eq!(exact_mean([0.0, 0.0]), Some(0.0));
        assert_eq!(exact_mean([5e-324]), Some(5e-324));
        assert_eq!(exact_mean([5e-324, 0.0]), Some(0.0)); // half of min subnormal ties to even
        assert_eq!(exact_mean([f64::MAX, f64::MAX]), Some(f64::MAX));
        assert_eq!(exact_mean([1.0, 2.0]), Some(1.5));
    }

    proptest! {
        #[test]
        fn constant_run_is_exact(x in 0.0f64..1.0, n in 1usize..500) {
            prop_assert_eq!(exact_mean(std::iter::repeat_n(x, n)).unwrap().to_bits(), x.to_bits());
        }

        #[test]
        fn repetition_and_order_invariant(v in prop::collection::vec(0.0f64..1.0, 1..40), reps in 1usize..20) {
            let base = exact_mean(v.iter().copied()).unwrap();
            let repeated = exact_mean(v.iter().flat_map(|&x| std::iter::repeat_n(x, reps))).unwrap();
            let mut rev = v.clone();
            rev.reverse();
            prop_assert_eq!(base.to_bits(), repeated.to_bits());
            prop_assert_eq!(base.to_bits(), exact_mean(rev).unwrap().to_bits());
            let naive = v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!((base - naive).abs() <= 1e-15 * naive.max(1e-300) + 1e-300);
        }
    }
}
