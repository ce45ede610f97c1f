//! Adelic vector bundles over Q: Euler-Poincare characteristic, Arakelov
//! degree, slopes, maximal slope, heights of linear maps, and the slope
//! inequality.
//!
//! Normalization: the trivial bundle carries the max norm on coordinates and
//! has degree 0; degrees are computed as log vol{norm <= 1} - N log 2. This
//! calibration makes the rank-1 formula deg = -log||basis vector|| and the
//! ball-volume characteristic agree exactly, and it gives Minkowski's second
//! theorem the clean form deg in [-sum log lambda_i - log N!, -sum log
//! lambda_i].

mod lll;
mod maps;

pub use lll::{lll_reduce, LllResult};
pub use maps::{
    hom_height, slope_inequality_check, HomHeight, LinearMapWithHeight, SlopeInequalityReport,
};

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Knobs for Monte Carlo volume estimation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McParams {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            samples: 40_000,
            seed: 1,
        }
    }
}

/// A numeric result carrying either "exact" or an error bar, never a bare
/// approximation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub exact: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_error: 0.0,
            samples: 0,
            seed: 0,
            exact: true,
        }
    }

    fn monte_carlo(value: f64, std_error: f64, mc: &McParams) -> Self {
        Estimate {
            value,
            std_error,
            samples: mc.samples,
            seed: mc.seed,
            exact: false,
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        Estimate {
            value: self.value * s,
            std_error: self.std_error * s.abs(),
            ..self
        }
    }
}

/// Archimedean norm data of an adelic lattice; finite places are always the
/// standard integral structure on Z^N.
#[derive(Clone)]
pub enum NormOracle {
    /// max_i |x_i| (the trivial bundle's norm).
    Max,
    /// max_i e^{-a_i} |x_i| with the log scales a_i.
    ScaledDiagonal { log_scales: Vec<f64> },
    /// An arbitrary norm callable (e.g. a section sup-norm).
    General {
        eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        label: String,
    },
}

impl fmt::Debug for NormOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormOracle::Max => write!(f, "Max"),
            NormOracle::ScaledDiagonal { log_scales } => {
                write!(f, "ScaledDiagonal({log_scales:?})")
            }
            NormOracle::General { label, .. } => write!(f, "General({label})"),
        }
    }
}

/// Full-rank integer lattice with an archimedean norm oracle.
#[derive(Debug, Clone)]
pub struct AdelicLattice {
    pub rank: usize,
    pub norm: NormOracle,
}

impl AdelicLattice {
    pub fn trivial(rank: usize) -> Self {
        AdelicLattice {
            rank,
            norm: NormOracle::Max,
        }
    }

    pub fn scaled_diagonal(log_scales: Vec<f64>) -> Self {
        AdelicLattice {
            rank: log_scales.len(),
            norm: NormOracle::ScaledDiagonal { log_scales },
        }
    }

    pub fn general<F>(rank: usize, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        AdelicLattice {
            rank,
            norm: NormOracle::General {
                eval: Arc::new(eval),
                label: label.into(),
            },
        }
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.rank);
        match &self.norm {
            NormOracle::Max => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            NormOracle::ScaledDiagonal { log_scales } => v
                .iter()
                .zip(log_scales)
                .fold(0.0, |m, (x, a)| m.max(x.abs() * (-a).exp())),
            NormOracle::General { eval, .. } => eval(v),
        }
    }

    pub fn norm_i64(&self, v: &[i64]) -> f64 {
        let vf: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        self.norm(&vf)
    }

    /// Arakelov degree log vol{norm <= 1} - N log 2: exact closed form for
    /// max and scaled-diagonal norms, Monte Carlo polar sampling otherwise.
    ///
    /// The Monte Carlo path requires rank <= 10 (volume estimation degrades
    /// in high dimension).
    pub fn degree(&self, mc: &McParams) -> Result<Estimate> {
        match &self.norm {
            NormOracle::Max => Ok(Estimate::exact(0.0)),
            NormOracle::ScaledDiagonal { log_scales } => {
                Ok(Estimate::exact(log_scales.iter().sum()))
            }
            NormOracle::General { .. } => {
                const MC_RANK_CAP: usize = 10;
                if self.rank > MC_RANK_CAP {
                    return Err(Error::CapExceeded {
                        what: "Monte Carlo volume rank",
                        value: self.rank,
                        cap: MC_RANK_CAP,
                    });
                }
                if mc.samples == 0 {
                    return Err(Error::InvalidInput("Monte Carlo needs samples > 0".into()));
                }
                let n = self.rank;
                let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
                // vol(B) = V_n * E[r(theta)^n], r the gauge radius along a
                // uniform direction
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                let mut dir = vec![0.0f64; n];
                for _ in 0..mc.samples {
                    sample_unit_direction(&mut rng, &mut dir);
                    let nrm = self.norm(&dir);
                    if nrm <= 0.0 || !nrm.is_finite() {
                        return Err(Error::Numeric(
                            "norm oracle returned a nonpositive value on a unit direction".into(),
                        ));
                    }
                    let y = nrm.powi(-(n as i32));
                    sum += y;
                    sum_sq += y * y;
                }
                let m = sum / mc.samples as f64;
                let var = (sum_sq / mc.samples as f64 - m * m).max(0.0);
                let std_err_mean = (var / mc.samples as f64).sqrt();
                let value = ln_unit_ball_volume(n) + m.ln() - n as f64 * std::f64::consts::LN_2;
                // delta method for the log
                let std_error = std_err_mean / m;
                Ok(Estimate::monte_carlo(value, std_error, mc))
            }
        }
    }

    /// Slope: degree per rank.
    pub fn slope(&self, mc: &McParams) -> Result<Estimate> {
        if self.rank == 0 {
            return Err(Error::InvalidInput("slope of the zero bundle".into()));
        }
        Ok(self.degree(mc)?.scaled(1.0 / self.rank as f64))
    }

    /// Spot-checks positive homogeneity and the triangle inequality on
    /// random vectors; errors when the oracle is not a norm.
    pub fn spot_check_norm(&self, seed: u64, trials: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let v: Vec<f64> = (0..self.rank).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let w: Vec<f64> = (0..self.rank).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let lambda: f64 = rng.gen_range(0.1..4.0);
            let nv = self.norm(&v);
            let nw = self.norm(&w);
            let scaled: Vec<f64> = v.iter().map(|x| lambda * x).collect();
            if (self.norm(&scaled) - lambda * nv).abs() > 1e-6 * (1.0 + lambda * nv) {
                return Err(Error::InvalidInput(
                    "norm oracle violates positive homogeneity".into(),
                ));
            }
            let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            if self.norm(&sum) > nv + nw + 1e-6 * (1.0 + nv + nw) {
                return Err(Error::InvalidInput(
                    "norm oracle violates the triangle inequality".into(),
                ));
            }
        }
        Ok(())
    }
}

fn sample_unit_direction(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    loop {
        // Box-Muller pairs
        let mut i = 0;
        while i < out.len() {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            out[i] = r * (2.0 * std::f64::consts::PI * u2).cos();
            if i + 1 < out.len() {
                out[i + 1] = r * (2.0 * std::f64::consts::PI * u2).sin();
            }
            i += 2;
        }
        let len: f64 = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 {
            for x in out.iter_mut() {
                *x /= len;
            }
            return;
        }
    }
}

/// log of the volume of the Euclidean unit ball in dimension n.
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    // V_{2m} = pi^m / m!, V_{2m+1} = 2 m! (4 pi)^m / (2m+1)!
    let m = n / 2;
    if n % 2 == 0 {
        m as f64 * std::f64::consts::PI.ln() - ln_factorial(m)
    } else {
        (2.0f64).ln() + ln_factorial(m) + m as f64 * (4.0 * std::f64::consts::PI).ln()
            - ln_factorial(2 * m + 1)
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Certainty flag of a maximal-slope computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuMaxCertainty {
    /// Full enumeration covered every candidate line (rank <= 2).
    Exact,
    /// Best slope witnessed by vectors found through reduction; the true
    /// maximal slope can only be larger.
    LowerBound,
}

/// Maximal slope max(slope(E), -log lambda_1) with its witness vector.
#[derive(Debug, Clone, Serialize)]
pub struct MuMax {
    pub value: f64,
    pub std_error: f64,
    pub certainty: MuMaxCertainty,
    /// Norm of the best (shortest) lattice vector found.
    pub shortest_norm: f64,
    pub witness: Vec<i64>,
}

const ENUMERATION_BUDGET: usize = 4_000_000;

/// Maximal slope of the sub-bundles of E.
///
/// Rank 1 is the slope. Rank 2 enumerates every primitive vector inside a
/// certified radius, so the best line is provably captured. Higher ranks
/// return a certified lower bound only (reduction-found vectors witness it).
pub fn mu_max(e: &AdelicLattice, mc: &McParams) -> Result<MuMax> {
    if e.rank == 0 {
        return Err(Error::InvalidInput("mu_max of the zero bundle".into()));
    }
    let slope = e.slope(mc)?;
    if e.rank == 1 {
        let nrm = e.norm(&[1.0]);
        return Ok(MuMax {
            value: -nrm.ln(),
            std_error: 0.0,
            certainty: MuMaxCertainty::Exact,
            shortest_norm: nrm,
            witness: vec![1],
        });
    }
    if e.rank == 2 {
        let (lambda1, witness) = shortest_vector_rank2(e)?;
        let value = slope.value.max(-lambda1.ln());
        return Ok(MuMax {
            value,
            // the line term is enumeration-exact; only a Monte Carlo slope
            // larger than it would contribute noise
            std_error: if slope.value > -lambda1.ln() {
                slope.std_error
            } else {
                0.0
            },
            certainty: MuMaxCertainty::Exact,
            shortest_norm: lambda1,
            witness,
        });
    }
    let (best_norm, witness) = short_vector_candidates(e);
    let value = slope.value.max(-best_norm.ln());
    Ok(MuMax {
        value,
        std_error: slope.std_error,
        certainty: MuMaxCertainty::LowerBound,
        shortest_norm: best_norm,
        witness,
    })
}

/// Exact shortest nonzero vector of a rank-2 lattice under an arbitrary norm
/// oracle: a certified lower bound of the norm on the Euclidean circle turns
/// the search into a finite box enumeration.
fn shortest_vector_rank2(e: &AdelicLattice) -> Result<(f64, Vec<i64>)> {
    const SAMPLES: usize = 4096;
    let mut min_on_circle = f64::INFINITY;
    let mut max_on_circle: f64 = 0.0;
    for k in 0..SAMPLES {
        let t = 2.0 * std::f64::consts::PI * k as f64 / SAMPLES as f64;
        let v = [t.cos(), t.sin()];
        let n = e.norm(&v);
        min_on_circle = min_on_circle.min(n);
        max_on_circle = max_on_circle.max(n);
    }
    // |n(u) - n(u_j)| <= L |u - u_j|, L = max on the circle
    let slack = max_on_circle * std::f64::consts::PI / SAMPLES as f64;
    let certified_min = min_on_circle - slack;
    if certified_min <= 0.0 {
        return Err(Error::Numeric(
            "norm oracle too degenerate to certify a rank-2 enumeration radius".into(),
        ));
    }
    let mut best = f64::INFINITY;
    let mut witness = vec![0i64, 0];
    for candidate in [[1i64, 0], [0, 1], [1, 1], [1, -1]] {
        let n = e.norm_i64(&candidate);
        if n < best {
            best = n;
            witness = candidate.to_vec();
        }
    }
    let radius = best / certified_min;
    let bound = radius.floor() as i64;
    let count = ((2 * bound + 1) * (2 * bound + 1)) as usize;
    if count > ENUMERATION_BUDGET {
        return Err(Error::CapExceeded {
            what: "rank-2 enumeration box",
            value: count,
            cap: ENUMERATION_BUDGET,
        });
    }
    for x in -bound..=bound {
        for y in -bound..=bound {
            if x == 0 && y == 0 {
                continue;
            }
            if ((x * x + y * y) as f64) > radius * radius {
                continue;
            }
            let n = e.norm(&[x as f64, y as f64]);
            if n < best {
                best = n;
                witness = vec![x, y];
            }
        }
    }
    Ok((best, witness))
}

/// Reduction-based short vector search for rank >= 3: LLL against the
/// polarization surrogate of the norm, then the true norm on the reduced
/// vectors and small combinations.
fn short_vector_candidates(e: &AdelicLattice) -> (f64, Vec<i64>) {
    let n = e.rank;
    // polarization Gram of q(v) = norm(v)^2 (exact for inner-product norms,
    // a surrogate otherwise)
    let mut gram = vec![vec![0.0; n]; n];
    let mut basis_vec = vec![0.0; n];
    let q = |e: &AdelicLattice, v: &[f64]| {
        let x = e.norm(v);
        x * x
    };
    for i in 0..n {
        basis_vec.iter_mut().for_each(|x| *x = 0.0);
        basis_vec[i] = 1.0;
        gram[i][i] = q(e, &basis_vec);
        for j in 0..i {
            basis_vec.iter_mut().for_each(|x| *x = 0.0);
            basis_vec[i] = 1.0;
            basis_vec[j] = 1.0;
            let plus = q(e, &basis_vec);
            basis_vec[j] = -1.0;
            let minus = q(e, &basis_vec);
            let g = (plus - minus) / 4.0;
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let rows = cholesky_rows(&gram);
    let reduced = lll_reduce(rows, 0.99);

    let mut best = f64::INFINITY;
    let mut witness = vec![0i64; n];
    let consider = |v: &[i64], best: &mut f64, witness: &mut Vec<i64>, e: &AdelicLattice| {
        if v.iter().all(|&x| x == 0) {
            return;
        }
        let nrm = e.norm_i64(v);
        if nrm < *best {
            *best = nrm;
            *witness = v.to_vec();
        }
    };
    for i in 0..n {
        let mut unit = vec![0i64; n];
        unit[i] = 1;
        consider(&unit, &mut best, &mut witness, e);
    }
    let ints: Vec<Vec<i64>> = reduced
        .coords
        .iter()
        .map(|c| {
            c.iter()
                .map(|&x| x.clamp(i64::MIN as i128, i64::MAX as i128) as i64)
                .collect()
        })
        .collect();
    for v in &ints {
        consider(v, &mut best, &mut witness, e);
    }
    for i in 0..ints.len() {
        for j in (i + 1)..ints.len() {
            let sum: Vec<i64> = ints[i].iter().zip(&ints[j]).map(|(a, b)| a + b).collect();
            let diff: Vec<i64> = ints[i].iter().zip(&ints[j]).map(|(a, b)| a - b).collect();
            consider(&sum, &mut best, &mut witness, e);
            consider(&diff, &mut best, &mut witness, e);
        }
    }
    (best, witness)
}

/// Cholesky factor rows of a symmetric matrix, adding a growing ridge when a
/// minor fails (the polarization surrogate of a non-quadratic norm need not
/// be positive definite).
fn cholesky_rows(gram: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = gram.len();
    let trace: f64 = (0..n).map(|i| gram[i][i]).sum();
    let mut ridge = 0.0;
    'outer: loop {
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = gram[i][j] + if i == j { ridge } else { 0.0 };
                for k in 0..j {
                    sum -= l[i][k] * l[j][k];
                }
                if i == j {
                    if sum <= 0.0 {
                        ridge = if ridge == 0.0 {
                            1e-12 * trace.max(1.0)
                        } else {
                            ridge * 10.0
                        };
                        if ridge > trace.max(1.0) {
                            // give up: return scaled identity so LLL is a no-op
                            let mut id = vec![vec![0.0; n]; n];
                            for (k, row) in id.iter_mut().enumerate() {
                                row[k] = 1.0;
                            }
                            return id;
                        }
                        continue 'outer;
                    }
                    l[i][j] = sum.sqrt();
                } else {
                    l[i][j] = sum / l[j][j];
                }
            }
        }
        // rows of the basis are e_i mapped through L^T (so |row_i|^2 = gram_ii)
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                rows[i][j] = l[i][j];
            }
        }
        return rows;
    }
}
