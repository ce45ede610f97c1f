//! Deterministic generators of point sequences: cyclotomic conductors,
//! rational points, reproducible perturbed-torsion families, and explicit
//! lists.

use num_bigint::BigInt;
use num_integer::Integer;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cyclotomic, IntegerPolynomial};
use crate::error::{Error, Result};

/// A rational number in a sequence spec, either an integer or `{num, den}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum RationalValue {
    Int(i64),
    Frac { num: i64, den: i64 },
}

impl RationalValue {
    /// Minimal polynomial `q x - p` of the reduced fraction p/q.
    pub fn minimal_polynomial(&self) -> Result<IntegerPolynomial> {
        let (num, den) = match *self {
            RationalValue::Int(n) => (n, 1),
            RationalValue::Frac { num, den } => (num, den),
        };
        if den == 0 {
            return Err(Error::InvalidInput(
                "rational value with zero denominator".into(),
            ));
        }
        let g = num.gcd(&den).max(1);
        let (mut p, mut q) = (num / g, den / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Ok(IntegerPolynomial::new(vec![
            BigInt::from(-p),
            BigInt::from(q),
        ]))
    }
}

/// Filter on the conductors of the cyclotomic generator.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ConductorFilter {
    #[default]
    All,
    Prime,
}

/// JSON-serializable description of a point sequence.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// Torsion orbits by strictly increasing conductor starting at `start`
    /// (default 2), so any finite point set is eventually avoided.
    Cyclotomic {
        count: usize,
        #[serde(default = "default_start")]
        start: u32,
        #[serde(default)]
        conductors: ConductorFilter,
    },
    /// Rational points given as a list.
    Rational { values: Vec<RationalValue> },
    /// Roots of q x^n - p with small random p/q, reproducible from the seed;
    /// heights decay like log(max(p,q))/n.
    PerturbedTorsion { seed: u64, count: usize },
    /// Explicit coefficient lists, constant term first.
    Explicit { polynomials: Vec<Vec<i64>> },
}

fn default_start() -> u32 {
    2
}

impl SequenceSpec {
    pub fn len(&self) -> usize {
        match self {
            SequenceSpec::Cyclotomic { count, .. } => *count,
            SequenceSpec::Rational { values } => values.len(),
            SequenceSpec::PerturbedTorsion { count, .. } => *count,
            SequenceSpec::Explicit { polynomials } => polynomials.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Materializes the deterministic sequence of minimal polynomials.
pub fn sequence_generator(spec: &SequenceSpec) -> Result<Vec<IntegerPolynomial>> {
    match spec {
        SequenceSpec::Cyclotomic {
            count,
            start,
            conductors,
        } => {
            let mut out = Vec::with_capacity(*count);
            let mut n = (*start).max(1);
            while out.len() < *count {
                let take = match conductors {
                    ConductorFilter::All => true,
                    ConductorFilter::Prime => is_prime(n),
                };
                if take {
                    out.push(cyclotomic(n));
                }
                n = n
                    .checked_add(1)
                    .ok_or_else(|| Error::InvalidInput("conductor overflow".into()))?;
            }
            Ok(out)
        }
        SequenceSpec::Rational { values } => {
            values.iter().map(|v| v.minimal_polynomial()).collect()
        }
        SequenceSpec::PerturbedTorsion { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(*count);
            for k in 0..*count {
                let n = k + 2;
                let (p, q) = loop {
                    let p: i64 = rng.gen_range(1..=9);
                    let q: i64 = rng.gen_range(1..=9);
                    if p != q && p.gcd(&q) == 1 {
                        break (p, q);
                    }
                };
                let mut coeffs = vec![BigInt::from(0); n + 1];
                coeffs[0] = BigInt::from(-p);
                coeffs[n] = BigInt::from(q);
                out.push(IntegerPolynomial::new(coeffs));
            }
            Ok(out)
        }
        SequenceSpec::Explicit { polynomials } => polynomials
            .iter()
            .map(|cs| {
                let p = IntegerPolynomial::from_i64(cs);
                if p.degree().is_none() {
                    Err(Error::InvalidInput(
                        "explicit zero polynomial in sequence".into(),
                    ))
                } else {
                    Ok(p)
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_smallest_conductors() {
        let spec = SequenceSpec::Cyclotomic {
            count: 3,
            start: 2,
            conductors: ConductorFilter::All,
        };
        let seq = sequence_generator(&spec).unwrap();
        assert_eq!(seq, vec![cyclotomic(2), cyclotomic(3), cyclotomic(4)]);
    }

    #[test]
    fn prime_conductors_skip_composites() {
        let spec = SequenceSpec::Cyclotomic {
            count: 4,
            start: 2,
            conductors: ConductorFilter::Prime,
        };
        let seq = sequence_generator(&spec).unwrap();
        assert_eq!(
            seq,
            vec![cyclotomic(2), cyclotomic(3), cyclotomic(5), cyclotomic(7)]
        );
    }

    #[test]
    fn rational_points() {
        let spec = SequenceSpec::Rational {
            values: vec![RationalValue::Int(2), RationalValue::Int(3)],
        };
        let seq = sequence_generator(&spec).unwrap();
        assert_eq!(seq[0], IntegerPolynomial::from_i64(&[-2, 1]));
        assert_eq!(seq[1], IntegerPolynomial::from_i64(&[-3, 1]));
        let half = RationalValue::Frac { num: 1, den: 2 };
        assert_eq!(
            half.minimal_polynomial().unwrap(),
            IntegerPolynomial::from_i64(&[-1, 2])
        );
        let neg = RationalValue::Frac { num: 3, den: -6 };
        assert_eq!(
            neg.minimal_polynomial().unwrap(),
            IntegerPolynomial::from_i64(&[1, 2])
        );
    }

    #[test]
    fn perturbed_torsion_reproducible() {
        let spec = SequenceSpec::PerturbedTorsion { seed: 11, count: 6 };
        let a = sequence_generator(&spec).unwrap();
        let b = sequence_generator(&spec).unwrap();
        assert_eq!(a, b);
        let other =
            sequence_generator(&SequenceSpec::PerturbedTorsion { seed: 12, count: 6 }).unwrap();
        assert_ne!(a, other);
        for (k, p) in a.iter().enumerate() {
            assert_eq!(p.degree(), Some(k + 2));
        }
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = SequenceSpec::Cyclotomic {
            count: 5,
            start: 2,
            conductors: ConductorFilter::Prime,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"cyclotomic\""));
        let back: SequenceSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        let err: std::result::Result<SequenceSpec, _> =
            serde_json::from_str(r#"{"kind":"granola","count":3}"#);
        assert!(err.is_err());
    }
}
