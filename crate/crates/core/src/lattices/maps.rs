//! Heights of linear maps between adelic lattices and the slope inequality
//! mu_max(E) <= mu_max(F) + h(f) for injective maps.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::log_abs_bigint;

use super::{mu_max, AdelicLattice, Estimate, McParams, MuMax, NormOracle};

/// A linear map between adelic lattices with rational matrix entries
/// (rows index the target, columns the source).
#[derive(Debug, Clone)]
pub struct LinearMapWithHeight {
    pub matrix: Vec<Vec<BigRational>>,
    pub source: AdelicLattice,
    pub target: AdelicLattice,
}

impl LinearMapWithHeight {
    pub fn new(
        matrix: Vec<Vec<BigRational>>,
        source: AdelicLattice,
        target: AdelicLattice,
    ) -> Result<Self> {
        if matrix.len() != target.rank || matrix.iter().any(|r| r.len() != source.rank) {
            return Err(Error::InvalidInput(format!(
                "matrix shape {}x{} does not map rank {} into rank {}",
                matrix.len(),
                matrix.first().map_or(0, |r| r.len()),
                source.rank,
                target.rank
            )));
        }
        Ok(LinearMapWithHeight {
            matrix,
            source,
            target,
        })
    }

    pub fn from_i64(
        matrix: &[Vec<i64>],
        source: AdelicLattice,
        target: AdelicLattice,
    ) -> Result<Self> {
        Self::new(
            matrix
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&x| BigRational::from_integer(BigInt::from(x)))
                        .collect()
                })
                .collect(),
            source,
            target,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|r| r.iter().all(Zero::is_zero))
    }

    /// Exact rank over Q equals the source rank.
    pub fn is_injective(&self) -> bool {
        rational_rank(&self.matrix) == self.source.rank
    }

    pub fn matrix_f64(&self) -> Vec<Vec<f64>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix_f64()
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn rational_rank(matrix: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = matrix.to_vec();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let pivot = (row..rows).find(|&r| !m[r][col].is_zero());
        let Some(p) = pivot else { continue };
        m.swap(row, p);
        let inv = m[row][col].clone();
        for r in (row + 1)..rows {
            if !m[r][col].is_zero() {
                let factor = &m[r][col] / &inv;
                for c in col..cols {
                    let sub = &factor * &m[row][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Local heights of a linear map: the archimedean operator log-norm plus the
/// exact finite-place total read off the matrix's rational content.
#[derive(Debug, Clone, Serialize)]
pub struct HomHeight {
    pub archimedean: Estimate,
    /// Sum over primes of the local operator log-norms; equals -log(content)
    /// for the standard lattice structures, 0 for content-1 integer matrices.
    pub finite: f64,
    pub total: f64,
}

/// Height h(f) = h_inf(f) + sum_p h_p(f) of a nonzero map.
pub fn hom_height(f: &LinearMapWithHeight) -> Result<HomHeight> {
    if f.is_zero() {
        return Err(Error::InvalidInput("height of the zero map".into()));
    }
    let finite = finite_height(&f.matrix);
    let archimedean = archimedean_operator_log_norm(f)?;
    Ok(HomHeight {
        archimedean,
        finite,
        total: archimedean.value + finite,
    })
}

/// -log(content): for each prime, the p-adic operator norm of the standard
/// lattice pairing is max_ij |A_ij|_p, and the product over primes is the
/// inverse of the rational content of the matrix.
fn finite_height(matrix: &[Vec<BigRational>]) -> f64 {
    let mut den_lcm = BigInt::from(1);
    for row in matrix {
        for x in row {
            den_lcm = den_lcm.lcm(x.denom());
        }
    }
    let mut num_gcd = BigInt::zero();
    for row in matrix {
        for x in row {
            let scaled = x.numer() * (&den_lcm / x.denom());
            num_gcd = num_gcd.gcd(&scaled);
        }
    }
    if num_gcd.is_zero() {
        return 0.0;
    }
    // content = num_gcd / den_lcm
    log_abs_bigint(&den_lcm) - log_abs_bigint(&num_gcd)
}

fn diag_log_scales(norm: &NormOracle, rank: usize) -> Option<Vec<f64>> {
    match norm {
        NormOracle::Max => Some(vec![0.0; rank]),
        NormOracle::ScaledDiagonal { log_scales } => Some(log_scales.clone()),
        NormOracle::General { .. } => None,
    }
}

fn archimedean_operator_log_norm(f: &LinearMapWithHeight) -> Result<Estimate> {
    let src = diag_log_scales(&f.source.norm, f.source.rank);
    let tgt = diag_log_scales(&f.target.norm, f.target.rank);
    let a = f.matrix_f64();
    if let (Some(src), Some(tgt)) = (src, tgt) {
        // unit ball of the source allows |x_j| <= e^{a_j}; rows maximize
        // independently under the weighted max norm
        let mut op: f64 = 0.0;
        for (i, row) in a.iter().enumerate() {
            let mut s = 0.0;
            for (j, v) in row.iter().enumerate() {
                s += v.abs() * src[j].exp();
            }
            op = op.max((-tgt[i]).exp() * s);
        }
        if op == 0.0 {
            return Err(Error::InvalidInput("height of the zero map".into()));
        }
        return Ok(Estimate::exact(op.ln()));
    }
    // general oracles: projected ascent from many starts (estimate only)
    let n = f.source.rank;
    let evaluate = |x: &[f64]| -> f64 {
        let nx = f.source.norm(x);
        if nx <= 0.0 {
            return 0.0;
        }
        let scaled: Vec<f64> = x.iter().map(|v| v / nx).collect();
        f.target.norm(&f.apply(&scaled))
    };
    let mut best: f64 = 0.0;
    if n == 1 {
        best = evaluate(&[1.0]);
    } else if n == 2 {
        const SWEEP: usize = 8192;
        for k in 0..SWEEP {
            let t = std::f64::consts::PI * k as f64 / SWEEP as f64;
            best = best.max(evaluate(&[t.cos(), t.sin()]));
        }
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut x: Vec<f64> = vec![0.0; n];
        for _ in 0..64 {
            for xi in x.iter_mut() {
                *xi = rng.gen_range(-1.0..1.0);
            }
            let mut current = evaluate(&x);
            let mut step = 0.5;
            while step > 1e-4 {
                let mut improved = false;
                for i in 0..n {
                    for dir in [-1.0, 1.0] {
                        let mut y = x.clone();
                        y[i] += dir * step;
                        let v = evaluate(&y);
                        if v > current {
                            current = v;
                            x = y;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            best = best.max(current);
        }
    }
    if best <= 0.0 {
        return Err(Error::Numeric(
            "operator norm estimate collapsed to zero".into(),
        ));
    }
    Ok(Estimate {
        value: best.ln(),
        std_error: 0.0,
        samples: 0,
        seed: 0,
        exact: false,
    })
}

/// Report of the slope inequality check on an injective map.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeInequalityReport {
    pub mu_max_source: MuMax,
    pub mu_max_target: MuMax,
    pub hom: HomHeight,
    /// mu_max(F) + h(f) - mu_max(E), nonnegative when the inequality holds.
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Asserts mu_max(E) <= mu_max(F) + h(f) within Monte Carlo error bars.
pub fn slope_inequality_check(
    f: &LinearMapWithHeight,
    mc: &McParams,
) -> Result<SlopeInequalityReport> {
    if f.is_zero() {
        return Err(Error::InvalidInput(
            "slope inequality needs a nonzero map".into(),
        ));
    }
    if !f.is_injective() {
        return Err(Error::InvalidInput(
            "slope inequality needs an injective map".into(),
        ));
    }
    let mu_src = mu_max(&f.source, mc)?;
    let mu_tgt = mu_max(&f.target, mc)?;
    let hom = hom_height(f)?;
    let slack = mu_tgt.value + hom.total - mu_src.value;
    let tolerance = 3.0 * (mu_src.std_error + mu_tgt.std_error + hom.archimedean.std_error) + 1e-9;
    Ok(SlopeInequalityReport {
        pass: slack >= -tolerance,
        mu_max_source: mu_src,
        mu_max_target: mu_tgt,
        hom,
        slack,
        tolerance,
    })
}
