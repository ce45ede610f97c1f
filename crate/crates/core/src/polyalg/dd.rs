//! Minimal double-double arithmetic (pairs of f64 with |lo| <= ulp(hi)/2)
//! used to polish roots and evaluate residuals at extended precision.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact two-part split of a big integer (error-free for |b| < 2^104).
    pub fn from_bigint(b: &BigInt) -> Dd {
        let hi = b.to_f64().unwrap_or(if b.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        if !hi.is_finite() {
            return Dd { hi, lo: 0.0 };
        }
        // b - hi is exactly representable as BigInt when hi is finite
        let hi_big = BigInt::from(hi as i128);
        let lo = if hi.fract() == 0.0 && hi.abs() < 2f64.powi(100) {
            (b - hi_big).to_f64().unwrap_or(0.0)
        } else {
            0.0
        };
        Dd { hi, lo }
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    pub fn from_f64(re: f64, im: f64) -> DdComplex {
        DdComplex {
            re: Dd::from_f64(re),
            im: Dd::from_f64(im),
        }
    }

    pub fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    pub fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn norm(self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
}

/// Evaluates p and p' at z with double-double Horner.
pub fn horner_with_derivative(coeffs: &[Dd], z: DdComplex) -> (DdComplex, DdComplex) {
    let mut p = DdComplex::ZERO;
    let mut dp = DdComplex::ZERO;
    for c in coeffs.iter().rev() {
        dp = dp.mul(z).add(p);
        p = p.mul(z).add(DdComplex {
            re: *c,
            im: Dd::ZERO,
        });
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_arithmetic_keeps_extra_bits() {
        let a = Dd::from_f64(1.0);
        let tiny = Dd::from_f64(1e-25);
        let s = a.add(tiny).sub(a);
        assert!((s.to_f64() - 1e-25).abs() < 1e-40);
    }

    #[test]
    fn bigint_split_is_exact() {
        let b = BigInt::from(3u64) * BigInt::from(1u64 << 60) + BigInt::from(7u64);
        let d = Dd::from_bigint(&b);
        let back = d.hi as i128 + d.lo as i128;
        assert_eq!(BigInt::from(back), b);
    }
}
