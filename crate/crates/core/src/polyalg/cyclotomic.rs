//! Cyclotomic polynomials by recursive exact division:
//! Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d.

use std::collections::HashMap;

use super::IntegerPolynomial;

fn divisors(n: u32) -> Vec<u32> {
    let mut divs = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            divs.push(i);
            if i != n / i {
                divs.push(n / i);
            }
        }
        i += 1;
    }
    divs.sort_unstable();
    divs
}

/// The n-th cyclotomic polynomial with exact integer coefficients.
///
/// # Panics
/// Panics if `n == 0`.
pub fn cyclotomic(n: u32) -> IntegerPolynomial {
    assert!(n >= 1, "cyclotomic conductor must be positive");
    let mut memo: HashMap<u32, IntegerPolynomial> = HashMap::new();
    cyclotomic_memo(n, &mut memo)
}

fn cyclotomic_memo(n: u32, memo: &mut HashMap<u32, IntegerPolynomial>) -> IntegerPolynomial {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    let result = if n == 1 {
        IntegerPolynomial::from_i64(&[-1, 1])
    } else {
        let mut acc = IntegerPolynomial::x_pow_minus_one(n as usize);
        for d in divisors(n) {
            if d == n {
                continue;
            }
            let phi_d = cyclotomic_memo(d, memo);
            acc = acc.div_exact(&phi_d).expect("cyclotomic division is exact");
        }
        acc
    };
    memo.insert(n, result.clone());
    result
}

/// Euler totient, the degree of the n-th cyclotomic polynomial.
pub fn totient(n: u32) -> u32 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_conductors() {
        assert_eq!(cyclotomic(1), IntegerPolynomial::from_i64(&[-1, 1]));
        assert_eq!(cyclotomic(2), IntegerPolynomial::from_i64(&[1, 1]));
        assert_eq!(cyclotomic(4), IntegerPolynomial::from_i64(&[1, 0, 1]));
        assert_eq!(
            cyclotomic(12),
            IntegerPolynomial::from_i64(&[1, 0, -1, 0, 1])
        );
    }

    #[test]
    fn conductor_15_by_division() {
        // x^8 - x^7 + x^5 - x^4 + x^3 - x + 1
        let expected = IntegerPolynomial::from_i64(&[1, -1, 0, 1, -1, 1, 0, -1, 1]);
        assert_eq!(cyclotomic(15), expected);
    }

    #[test]
    fn degrees_match_totient() {
        for n in 1..=120 {
            assert_eq!(
                cyclotomic(n).degree().unwrap() as u32,
                totient(n),
                "conductor {n}"
            );
        }
    }

    #[test]
    fn primitive_with_unit_leading() {
        for n in [3u32, 8, 30, 105] {
            let p = cyclotomic(n);
            assert_eq!(p.content(), num_bigint::BigInt::from(1));
            assert_eq!(p.leading().unwrap(), &num_bigint::BigInt::from(1));
        }
    }
}
