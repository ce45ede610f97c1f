//! Exact integer-polynomial arithmetic, certified complex root finding,
//! Mahler measure, and generators of point sequences.

mod cyclotomic;
mod dd;
mod roots;
mod sequence;

pub use cyclotomic::{cyclotomic, totient};
pub use roots::{find_roots, RootSet};
pub use sequence::{sequence_generator, ConductorFilter, RationalValue, SequenceSpec};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Cheap irreducibility classification recorded on construction.
///
/// Full factorization over Q is out of scope; heights are well defined
/// per-root either way, so polynomials that pass only the cheap screens are
/// tagged `Assumed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Irreducibility {
    /// Irreducible for a verified reason (degree one, quadratic/cubic with no
    /// rational root, known cyclotomic).
    Verified,
    /// No cheap certificate; treated as irreducible.
    Assumed,
    /// A cheap screen exhibited a factor (a rational root on a polynomial of
    /// degree at least two).
    Reducible,
}

/// A polynomial with arbitrary-precision integer coefficients, constant term
/// first. The zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntegerPolynomial {
    /// Builds a polynomial from coefficients (index = degree), trimming
    /// leading zeros.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntegerPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntegerPolynomial { coeffs: Vec::new() }
    }

    /// `c * x^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        IntegerPolynomial { coeffs }
    }

    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[n] = BigInt::from(1);
        IntegerPolynomial { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has no degree.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeffs.first().cloned().unwrap_or_else(BigInt::zero)
    }

    /// Gcd of the coefficients' absolute values (zero for the zero
    /// polynomial).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Divides by the content and normalizes the leading coefficient to be
    /// positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.leading().unwrap().is_negative() {
            g = -g;
        }
        IntegerPolynomial {
            coeffs: self.coeffs.iter().map(|c| c / &g).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        IntegerPolynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Exact division; errors if the divisor does not divide exactly over Z.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        if divisor.is_zero() {
            return Err(Error::InvalidInput("division by zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let dn = self.degree().unwrap();
        let dd = divisor.degree().unwrap();
        if dn < dd {
            return Err(Error::InvalidInput(
                "inexact polynomial division (degree too small)".into(),
            ));
        }
        let lead = divisor.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); dn - dd + 1];
        for k in (0..=dn - dd).rev() {
            let top = rem[k + dd].clone();
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(lead);
            if !r.is_zero() {
                return Err(Error::InvalidInput(
                    "inexact polynomial division (leading coefficient)".into(),
                ));
            }
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                let delta = &q * dc;
                rem[k + i] -= delta;
            }
            quot[k] = q;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidInput(
                "inexact polynomial division (nonzero remainder)".into(),
            ));
        }
        Ok(Self::new(quot))
    }

    /// Coefficient-list reversal, `x^d p(1/x)`.
    pub fn reversal(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self::new(coeffs)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Coefficients converted to f64, erroring when a coefficient does not
    /// fit.
    pub fn coeffs_f64(&self) -> Result<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|c| {
                let v = c.to_f64().unwrap_or(f64::INFINITY);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::InvalidInput(
                        "coefficient too large for the floating root finder".into(),
                    ))
                }
            })
            .collect()
    }

    /// log |leading coefficient|; works beyond f64 range via bit length.
    pub fn log_abs_leading(&self) -> f64 {
        log_abs_bigint(self.leading().expect("nonzero polynomial"))
    }

    /// Cheap irreducibility screens: degree one, rational root test (a
    /// witness makes degree >= 2 polynomials reducible; absence proves
    /// irreducibility only for degrees 2 and 3).
    pub fn irreducibility(&self) -> Irreducibility {
        let Some(d) = self.degree() else {
            return Irreducibility::Reducible;
        };
        if d == 0 {
            return Irreducibility::Reducible;
        }
        if d == 1 {
            return Irreducibility::Verified;
        }
        if self.constant_term().is_zero() {
            // x divides
            return Irreducibility::Reducible;
        }
        if self.has_small_rational_root() {
            return Irreducibility::Reducible;
        }
        if d <= 3 {
            // quadratics/cubics factor only through a rational root, and the
            // rational root test is exhaustive for them
            return Irreducibility::Verified;
        }
        Irreducibility::Assumed
    }

    /// Rational root test over divisor pairs (p | a_0, q | a_d), exhaustive
    /// while the divisor lists stay small, sampled otherwise.
    fn has_small_rational_root(&self) -> bool {
        const DIVISOR_CAP: usize = 64;
        let a0 = self.constant_term();
        let ad = self.leading().unwrap().clone();
        let ps = small_divisors(&a0, DIVISOR_CAP);
        let qs = small_divisors(&ad, DIVISOR_CAP);
        for p in &ps {
            for q in &qs {
                if !p.gcd(q).is_one_abs() {
                    continue;
                }
                for sign in [1i64, -1] {
                    let num = p * BigInt::from(sign);
                    if self.eval_rational_is_zero(&num, q) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn eval_rational_is_zero(&self, num: &BigInt, den: &BigInt) -> bool {
        // q^d f(p/q) = sum a_i p^i q^(d-i)
        let d = self.coeffs.len() - 1;
        let mut acc = BigInt::zero();
        let mut pow_p = BigInt::from(1);
        let mut pows_q = Vec::with_capacity(d + 1);
        let mut pq = BigInt::from(1);
        for _ in 0..=d {
            pows_q.push(pq.clone());
            pq *= den;
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c * &pow_p * &pows_q[d - i];
            pow_p *= num;
        }
        acc.is_zero()
    }

    /// Pretty form used in reports, e.g. `x^2 - x - 1`.
    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let term = match (i, mag.to_string().as_str()) {
                (0, m) => m.to_string(),
                (1, "1") => "x".to_string(),
                (1, m) => format!("{m}x"),
                (_, "1") => format!("x^{i}"),
                (_, m) => format!("{m}x^{i}"),
            };
            if parts.is_empty() {
                if c.is_negative() {
                    parts.push(format!("-{term}"));
                } else {
                    parts.push(term);
                }
            } else if c.is_negative() {
                parts.push(format!("- {term}"));
            } else {
                parts.push(format!("+ {term}"));
            }
        }
        parts.join(" ")
    }
}

trait BigIntExt {
    fn is_one_abs(&self) -> bool;
}

impl BigIntExt for BigInt {
    fn is_one_abs(&self) -> bool {
        self.abs() == BigInt::from(1)
    }
}

/// Positive divisors of |b|, or just {1, |b|} when |b| is large; capped.
fn small_divisors(b: &BigInt, cap: usize) -> Vec<BigInt> {
    let a = b.abs();
    if a.is_zero() {
        return vec![BigInt::from(1)];
    }
    if let Some(n) = a.to_u64() {
        let mut divs = Vec::new();
        let mut i = 1u64;
        while i.saturating_mul(i) <= n && divs.len() < cap {
            if n % i == 0 {
                divs.push(BigInt::from(i));
                if i != n / i {
                    divs.push(BigInt::from(n / i));
                }
            }
            i += 1;
        }
        divs.sort();
        divs
    } else {
        vec![BigInt::from(1), a]
    }
}

/// log |b| for a nonzero big integer, stable for values beyond f64 range.
pub fn log_abs_bigint(b: &BigInt) -> f64 {
    if b.is_zero() {
        return f64::NEG_INFINITY;
    }
    if let Some(v) = b.abs().to_f64() {
        if v.is_finite() {
            return v.ln();
        }
    }
    // top 64 bits carry the mantissa, the rest contributes through the shift
    let bits = b.bits();
    let shift = bits.saturating_sub(64);
    let top = (b.abs() >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// log M(p) = log|a_d| + sum over roots of max(0, log|alpha|).
///
/// The roots come from the certified finder, so the absolute error is at
/// most a small multiple of the requested root tolerance times the degree.
pub fn mahler_measure(p: &IntegerPolynomial, tol: f64) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::InvalidInput(
            "mahler measure of the zero polynomial".into(),
        ));
    }
    if p.degree() == Some(0) {
        return Ok(p.log_abs_leading());
    }
    let roots = find_roots(p, tol)?;
    let mut acc = p.log_abs_leading();
    for z in &roots.roots {
        let r = z.norm();
        if r > 1.0 {
            acc += r.ln();
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn poly(cs: &[i64]) -> IntegerPolynomial {
        IntegerPolynomial::from_i64(cs)
    }

    #[test]
    fn trims_and_degrees() {
        let p = poly(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(IntegerPolynomial::from_i64(&[0, 0]).is_zero());
        assert_eq!(IntegerPolynomial::zero().degree(), None);
    }

    #[test]
    fn content_and_primitive() {
        let p = poly(&[6, -4, 10]);
        assert_eq!(p.content(), BigInt::from(2));
        let q = poly(&[-6, -4, -10]).primitive();
        assert_eq!(q.coeffs(), poly(&[3, 2, 5]).coeffs());
        assert!(q.leading().unwrap() > &BigInt::zero());
    }

    #[test]
    fn exact_division_roundtrip() {
        let a = poly(&[-1, 1]);
        let b = poly(&[1, 1, 1]);
        let prod = a.mul(&b);
        assert_eq!(prod.coeffs(), poly(&[-1, 0, 0, 1]).coeffs());
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert!(poly(&[1, 1]).div_exact(&poly(&[1, 1, 1])).is_err());
        assert!(poly(&[1, 0, 1]).div_exact(&poly(&[1, 1])).is_err());
    }

    #[test]
    fn irreducibility_screens() {
        assert_eq!(poly(&[-2, 1]).irreducibility(), Irreducibility::Verified);
        assert_eq!(
            poly(&[-1, -1, 1]).irreducibility(),
            Irreducibility::Verified
        );
        // (x-1)(x-2)
        assert_eq!(
            poly(&[2, -3, 1]).irreducibility(),
            Irreducibility::Reducible
        );
        // 2x - 1 has the rational root 1/2; degree 1 is still irreducible
        assert_eq!(poly(&[-1, 2]).irreducibility(), Irreducibility::Verified);
        // x^4 + x^3 + x^2 + x + 1 passes only the cheap screens
        assert_eq!(
            poly(&[1, 1, 1, 1, 1]).irreducibility(),
            Irreducibility::Assumed
        );
        // (x^2+1)(x^2+2) is reducible but has no rational root: stays Assumed
        assert_eq!(
            poly(&[2, 0, 3, 0, 1]).irreducibility(),
            Irreducibility::Assumed
        );
    }

    #[test]
    fn mahler_trivial_values() {
        // 2x - 1: root 1/2 inside the disc, leading coefficient 2
        let m = mahler_measure(&poly(&[-1, 2]), 1e-12).unwrap();
        assert!((m - 2f64.ln()).abs() < 1e-12);
        // cyclotomic of conductor 12: all roots on the circle
        let m = mahler_measure(&cyclotomic(12), 1e-12).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn mahler_golden_ratio() {
        // independent oracle: the quadratic formula gives (1+sqrt(5))/2
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let expected = golden.ln(); // 0.4812118250596035
        assert!((expected - 0.4812118250596035).abs() < 1e-15);
        let m = mahler_measure(&poly(&[-1, -1, 1]), 1e-12).unwrap();
        assert!((m - expected).abs() < 1e-12);
    }

    #[test]
    fn mahler_cyclotomic_vanishes_up_to_50() {
        for n in 1..=50u32 {
            let m = mahler_measure(&cyclotomic(n), 1e-12).unwrap();
            assert!(m.abs() < 1e-10, "conductor {n}: mahler {m:e}");
        }
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(poly(&[-1, -1, 1]).display(), "x^2 - x - 1");
        assert_eq!(poly(&[-1, 2]).display(), "2x - 1");
        assert_eq!(poly(&[0, 0, 1]).display(), "x^2");
    }

    proptest! {
        // Vieta: sum of roots = -a_{d-1}/a_d, product = +-a_0/a_d
        #[test]
        fn vieta_checks(cs in proptest::collection::vec(-20i64..=20, 2..=7)) {
            let mut cs = cs;
            if cs.last() == Some(&0) { *cs.last_mut().unwrap() = 1; }
            if cs[0] == 0 { cs[0] = 1; }
            let p = poly(&cs);
            let d = p.degree().unwrap();
            prop_assume!(d >= 1);
            let tol = 1e-12;
            if let Ok(rs) = find_roots(&p, tol) {
                let sum: Complex64 = rs.roots.iter().sum();
                let prod: Complex64 = rs.roots.iter().product();
                let ad = cs[d] as f64;
                let want_sum = -cs[d-1] as f64 / ad;
                let want_prod = (if d % 2 == 0 { 1.0 } else { -1.0 }) * cs[0] as f64 / ad;
                let scale = 1.0 + cs.iter().map(|c| c.abs()).max().unwrap() as f64;
                prop_assert!((sum.re - want_sum).abs() < 10.0 * tol * scale * d as f64);
                prop_assert!(sum.im.abs() < 10.0 * tol * scale * d as f64);
                prop_assert!((prod.re - want_prod).abs() < 10.0 * tol * scale * d as f64);
            }
        }

        // log M(pq) = log M(p) + log M(q)
        #[test]
        fn mahler_multiplicative(
            a in proptest::collection::vec(-9i64..=9, 2..=5),
            b in proptest::collection::vec(-9i64..=9, 2..=5),
        ) {
            let mut a = a; let mut b = b;
            if a.last() == Some(&0) { *a.last_mut().unwrap() = 2; }
            if b.last() == Some(&0) { *b.last_mut().unwrap() = 3; }
            let p = poly(&a).primitive();
            let q = poly(&b).primitive();
            prop_assume!(!p.is_zero() && !q.is_zero());
            prop_assume!(p.degree().unwrap() >= 1 && q.degree().unwrap() >= 1);
            let tol = 1e-12;
            let (mp, mq) = (mahler_measure(&p, tol), mahler_measure(&q, tol));
            let mpq = mahler_measure(&p.mul(&q), tol);
            if let (Ok(mp), Ok(mq), Ok(mpq)) = (mp, mq, mpq) {
                prop_assert!((mpq - mp - mq).abs() < 10.0 * 1e-9,
                    "p={} q={} gap={:e}", p.display(), q.display(), (mpq - mp - mq).abs());
            }
        }
    }
}
