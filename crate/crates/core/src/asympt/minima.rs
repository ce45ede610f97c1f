//! Successive minima of section lattices: exact enumeration inside certified
//! Cauchy boxes for small n, basis reduction against a quadratic-form
//! surrogate with two-sided bounds beyond that.
//!
//! The surrogate is the average of |s w|^2 against the metric's natural
//! circle/sphere measure; monomials are orthogonal for both base metrics, so
//! the form is diagonal with d_k = 1 (canonical, circle Parseval) or
//! d_k = 1/((n+1) binom(n,k)) (Fubini-Study). Since an average of squares
//! never exceeds the sup, sqrt(Q) lower-bounds the true norm, and for a
//! diagonal integer form the i-th minimum is exactly the i-th smallest
//! sqrt(d_k); both facts give certified lower bounds on every lambda_i.
//! Upper bounds come from explicit families (monomials, reduction-found
//! vectors) evaluated through the certified sup-norm bracket.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heights::MetricBase;
use crate::lattices::lll_reduce;

use super::supnorm::{binomial, SupNorm};
use super::SectionSpace;

pub const EXACT_ENUMERATION_CAP: u32 = 6;
pub const REDUCTION_CAP: u32 = 24;
const ENUMERATION_BUDGET: usize = 60_000_000;

/// Which minima estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinimaPath {
    /// Exact enumeration up to the exact cap, reduction beyond it.
    #[default]
    Auto,
    /// Reduction bounds for every n (a uniform estimator across an n-list).
    ForceReduction,
    /// Exact enumeration regardless of the cap (still budget-guarded).
    ForceExact,
}

/// One successive minimum with certified bounds.
#[derive(Debug, Clone, Serialize)]
pub struct MinimumValue {
    pub lower: f64,
    pub upper: f64,
    /// Bracket width below certification noise.
    pub exact: bool,
    /// Integer section witnessing the upper bound.
    pub witness: Vec<i64>,
}

/// The full non-decreasing sequence lambda_1 <= ... <= lambda_{n+1} with
/// per-value certificates.
#[derive(Debug, Clone, Serialize)]
pub struct MinimaFiltration {
    pub n: u32,
    pub values: Vec<MinimumValue>,
    pub path: MinimaPath,
}

impl MinimaFiltration {
    /// Log-scale jump locations t_i = -(1/n) log lambda_i, bracketed; the
    /// first component comes from the achieved (upper) lambda and is the
    /// reachable side, the second from the certified lower bound.
    pub fn t_brackets(&self) -> Result<Vec<(f64, f64)>> {
        if self.n == 0 {
            return Err(Error::InvalidInput(
                "t-values need n >= 1 (log scale divides by n)".into(),
            ));
        }
        let nf = self.n as f64;
        Ok(self
            .values
            .iter()
            .map(|v| (-(v.upper.ln()) / nf, -(v.lower.ln()) / nf))
            .collect())
    }

    pub fn max_bracket_width(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.upper - v.lower)
            .fold(0.0, f64::max)
    }
}

/// Diagonal coefficients of the quadratic surrogate for the base metric
/// (twists are folded into sandwich factors, constants exactly).
fn surrogate_diagonal(space: &SectionSpace) -> Vec<f64> {
    let n = space.n;
    match space.metric.base {
        MetricBase::Canonical => vec![1.0; n as usize + 1],
        MetricBase::FubiniStudy => (0..=n)
            .map(|k| 1.0 / ((n as f64 + 1.0) * binomial(n, k)))
            .collect(),
    }
}

/// Multiplicative sandwich on the twist factor: for every section,
/// lo * T_base <= T <= hi * T_base.
fn twist_factors(space: &SectionSpace) -> (f64, f64) {
    let n = space.n as f64;
    match space.metric.twist.as_constant() {
        Some(c) => ((-n * c).exp(), (-n * c).exp()),
        None => {
            let b = space.metric.twist.sup_bound();
            ((-n * b).exp(), (n * b).exp())
        }
    }
}

/// Successive minima of the section lattice.
pub fn successive_minima(space: &SectionSpace, path: MinimaPath) -> Result<MinimaFiltration> {
    let n = space.n;
    let run_exact = match path {
        MinimaPath::ForceExact => true,
        MinimaPath::ForceReduction => false,
        MinimaPath::Auto => n <= EXACT_ENUMERATION_CAP,
    };
    if !run_exact && n > REDUCTION_CAP {
        return Err(Error::CapExceeded {
            what: "minima tensor power (reduction path)",
            value: n as usize,
            cap: REDUCTION_CAP as usize,
        });
    }
    if run_exact {
        exact_minima(space)
    } else {
        reduction_minima(space)
    }
}

/// Greedy family state: vectors join when they increase the rank, tracked
/// with exact integer Gaussian elimination.
struct RankTracker {
    rows: Vec<Vec<i128>>,
    dim: usize,
}

impl RankTracker {
    fn new(dim: usize) -> Self {
        RankTracker {
            rows: Vec::new(),
            dim,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds v if it is independent from the current rows; returns whether
    /// the rank grew.
    fn try_add(&mut self, v: &[i64]) -> bool {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for row in &self.rows {
            let pivot_col = row.iter().position(|&x| x != 0).unwrap();
            if w[pivot_col] != 0 {
                // eliminate over Q without division: w <- row[p] * w - w[p] * row
                let a = row[pivot_col];
                let b = w[pivot_col];
                for i in 0..self.dim {
                    w[i] = w[i] * a - row[i] * b;
                }
                reduce_row(&mut w);
            }
        }
        if w.iter().all(|&x| x == 0) {
            false
        } else {
            reduce_row(&mut w);
            self.rows.push(w);
            self.rows.sort_by_key(|r| r.iter().position(|&x| x != 0));
            true
        }
    }
}

fn reduce_row(w: &mut [i128]) {
    let mut g: i128 = 0;
    for &x in w.iter() {
        g = gcd_i128(g, x.abs());
    }
    if g > 1 {
        for x in w.iter_mut() {
            *x /= g;
        }
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd_i128(b, a % b)
    }
}

/// Exact path: enumerate every integer section inside the certified Cauchy
/// box for the bound B = max monomial norm, evaluate certified brackets,
/// sweep greedily by upper and by lower.
fn exact_minima(space: &SectionSpace) -> Result<MinimaFiltration> {
    let n = space.n;
    let dim = n as usize + 1;
    let (twist_lo, _twist_hi) = twist_factors(space);
    let diag = surrogate_diagonal(space);

    // monomial family: independent, certified (often exact) norms
    let monomials: Vec<(Vec<i64>, SupNorm)> = (0..dim)
        .map(|k| {
            let mut v = vec![0i64; dim];
            v[k] = 1;
            let s = space.sup_norm_i64(&v)?;
            Ok((v, s))
        })
        .collect::<Result<_>>()?;
    let bound = monomials
        .iter()
        .map(|(_, s)| s.upper)
        .fold(0.0f64, f64::max);

    // Cauchy coefficient bounds: |c_k| <= B * min_r max(1,r)^n r^{-k} / w-ish
    // (canonical: e^{n fmax}; FS: closed form at r^2 = k/(n-k))
    let coeff_caps: Vec<i64> = (0..dim)
        .map(|k| {
            let base = match space.metric.base {
                MetricBase::Canonical => 1.0,
                MetricBase::FubiniStudy => 1.0 / super::supnorm::fs_monomial_norm(n, k as u32),
            };
            ((bound * base / twist_lo) + 1e-9).floor() as i64
        })
        .collect();

    // surrogate ball radius: sqrt(Q(c)) * twist_lo <= T <= B
    let q_radius_sq = (bound / twist_lo).powi(2);

    let screen = super::supnorm::CoarseScreen::new(n, &space.metric);
    let mut candidates: Vec<(Vec<i64>, SupNorm)> = monomials.clone();
    let mut visits = 0usize;
    let mut current = vec![0i64; dim];
    enumerate_ball(
        &diag,
        &coeff_caps,
        q_radius_sq,
        0,
        0.0,
        &mut current,
        &mut visits,
        &mut |v| {
            if v.iter().filter(|&&x| x != 0).count() <= 1 {
                return Ok(()); // monomials and zero handled separately
            }
            // attained values above the bound discard the candidate before
            // the expensive certified evaluation
            if screen.lower_bound_i64(v) > bound * (1.0 + 1e-9) {
                return Ok(());
            }
            let s = space.sup_norm_i64(v)?;
            if s.value <= bound * (1.0 + 1e-9) {
                candidates.push((v.to_vec(), s));
            }
            Ok(())
        },
    )?;

    // sweep by certified upper bounds for the upper side of each minimum
    let mut by_upper: Vec<usize> = (0..candidates.len()).collect();
    by_upper.sort_by(|&a, &b| {
        candidates[a]
            .1
            .upper
            .partial_cmp(&candidates[b].1.upper)
            .unwrap()
    });
    let mut tracker = RankTracker::new(dim);
    let mut uppers: Vec<(f64, Vec<i64>, bool)> = Vec::with_capacity(dim);
    for idx in by_upper {
        let (v, s) = &candidates[idx];
        if tracker.try_add(v) {
            uppers.push((s.upper, v.clone(), s.exact));
            if tracker.rank() == dim {
                break;
            }
        }
    }
    if uppers.len() < dim {
        return Err(Error::Numeric(
            "exact minima enumeration failed to reach full rank".into(),
        ));
    }

    // lower side: every vector of an optimal family lies in the candidate
    // set (the box contains all sections of norm <= B), so a sweep by the
    // certified lower values bounds each lambda_i from below; the diagonal
    // surrogate gives a second, closed-form lower bound
    let mut by_lower: Vec<usize> = (0..candidates.len()).collect();
    by_lower.sort_by(|&a, &b| {
        candidates[a]
            .1
            .value
            .partial_cmp(&candidates[b].1.value)
            .unwrap()
    });
    let mut tracker = RankTracker::new(dim);
    let mut lowers: Vec<f64> = Vec::with_capacity(dim);
    for idx in by_lower {
        let (v, s) = &candidates[idx];
        if tracker.try_add(v) {
            lowers.push(s.value);
            if tracker.rank() == dim {
                break;
            }
        }
    }
    let mut diag_sorted: Vec<f64> = diag.iter().map(|d| d.sqrt() * twist_lo).collect();
    diag_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let values = (0..dim)
        .map(|i| {
            let upper = uppers[i].0;
            let lower = lowers
                .get(i)
                .copied()
                .unwrap_or(0.0)
                .max(diag_sorted[i])
                .min(upper);
            MinimumValue {
                lower,
                upper,
                exact: uppers[i].2 && (upper - lower) <= 1e-9 * upper.max(1.0),
                witness: uppers[i].1.clone(),
            }
        })
        .collect();
    Ok(MinimaFiltration {
        n,
        values,
        path: MinimaPath::ForceExact,
    })
}

/// Recursive enumeration of integer points with sum d_k c_k^2 <= radius_sq
/// and per-coordinate caps; visits each sign class once (last nonzero
/// coordinate positive).
#[allow(clippy::too_many_arguments)]
fn enumerate_ball(
    diag: &[f64],
    caps: &[i64],
    radius_sq: f64,
    index: usize,
    used: f64,
    current: &mut Vec<i64>,
    visits: &mut usize,
    visit: &mut dyn FnMut(&[i64]) -> Result<()>,
) -> Result<()> {
    if index == diag.len() {
        *visits += 1;
        if *visits > ENUMERATION_BUDGET {
            return Err(Error::CapExceeded {
                what: "minima enumeration visits",
                value: *visits,
                cap: ENUMERATION_BUDGET,
            });
        }
        // canonical sign: highest-index nonzero coordinate positive
        if let Some(last) = current.iter().rposition(|&x| x != 0) {
            if current[last] > 0 {
                visit(current)?;
            }
        }
        return Ok(());
    }
    let room = ((radius_sq - used) / diag[index]).max(0.0).sqrt();
    let cap = caps[index].min(room.floor() as i64 + 1);
    for c in -cap..=cap {
        let add = diag[index] * (c as f64) * (c as f64);
        if used + add > radius_sq * (1.0 + 1e-12) {
            continue;
        }
        current[index] = c;
        enumerate_ball(
            diag,
            caps,
            radius_sq,
            index + 1,
            used + add,
            current,
            visits,
            visit,
        )?;
    }
    current[index] = 0;
    Ok(())
}

/// Reduction path: closed-form lower bounds from the diagonal surrogate,
/// upper bounds from the monomial family plus LLL-found vectors when the
/// twist makes the surrogate non-diagonal.
fn reduction_minima(space: &SectionSpace) -> Result<MinimaFiltration> {
    let n = space.n;
    let dim = n as usize + 1;
    let (twist_lo, _twist_hi) = twist_factors(space);
    let diag = surrogate_diagonal(space);

    let mut family: Vec<(Vec<i64>, SupNorm)> = (0..dim)
        .map(|k| {
            let mut v = vec![0i64; dim];
            v[k] = 1;
            let s = space.sup_norm_i64(&v)?;
            Ok((v, s))
        })
        .collect::<Result<_>>()?;

    // non-diagonal twists: reduce the sampled circle Gram and offer the
    // resulting short vectors as extra family candidates
    if space.metric.twist.as_constant().is_none() {
        let gram = sampled_circle_gram(space);
        if let Some(rows) = cholesky_rows(&gram) {
            let reduced = lll_reduce(rows, 0.99);
            for coords in reduced.coords {
                let v: Vec<i64> = coords.iter().map(|&x| x as i64).collect();
                if v.iter().any(|&x| x != 0) {
                    let s = space.sup_norm_i64(&v)?;
                    family.push((v, s));
                }
            }
        }
    }

    // greedy sweep by upper bounds
    family.sort_by(|a, b| a.1.upper.partial_cmp(&b.1.upper).unwrap());
    let mut tracker = RankTracker::new(dim);
    let mut uppers: Vec<(f64, Vec<i64>, bool)> = Vec::with_capacity(dim);
    for (v, s) in &family {
        if tracker.try_add(v) {
            uppers.push((s.upper, v.clone(), s.exact));
            if tracker.rank() == dim {
                break;
            }
        }
    }
    if uppers.len() < dim {
        return Err(Error::Numeric(
            "reduction family failed to reach full rank".into(),
        ));
    }

    let mut diag_sorted: Vec<f64> = diag.iter().map(|d| d.sqrt() * twist_lo).collect();
    diag_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let values = (0..dim)
        .map(|i| {
            let upper = uppers[i].0;
            let lower = diag_sorted[i].min(upper);
            MinimumValue {
                lower,
                upper,
                exact: uppers[i].2 && (upper - lower) <= 1e-9 * upper.max(1.0),
                witness: uppers[i].1.clone(),
            }
        })
        .collect();
    Ok(MinimaFiltration {
        n,
        values,
        path: MinimaPath::ForceReduction,
    })
}

/// Averaged circle Gram of the weighted monomials (a certified lower-bound
/// quadratic form for any sample count).
fn sampled_circle_gram(space: &SectionSpace) -> Vec<Vec<f64>> {
    let n = space.n;
    let dim = n as usize + 1;
    let samples = (4 * dim).max(64);
    let mut gram = vec![vec![0.0; dim]; dim];
    for m in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / samples as f64;
        let z = num_complex::Complex64::from_polar(1.0, theta);
        let w = space.weight_at(z);
        let w2 = w * w;
        for j in 0..dim {
            for k in 0..=j {
                gram[j][k] += w2 * ((j as f64 - k as f64) * theta).cos();
            }
        }
    }
    for j in 0..dim {
        for k in 0..=j {
            gram[j][k] /= samples as f64;
            gram[k][j] = gram[j][k];
        }
    }
    gram
}

fn cholesky_rows(gram: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = gram.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = gram[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::{AdelicMetric, MetricTwist};

    fn space(metric: AdelicMetric, n: u32) -> SectionSpace {
        SectionSpace { n, metric }
    }

    #[test]
    fn canonical_minima_all_one_exact() {
        for n in 1..=5u32 {
            let f =
                successive_minima(&space(AdelicMetric::canonical(), n), MinimaPath::Auto).unwrap();
            assert_eq!(f.values.len(), n as usize + 1);
            for v in &f.values {
                assert!(v.exact, "n={n}: bracket [{}, {}]", v.lower, v.upper);
                assert!((v.lower - 1.0).abs() < 1e-12 && (v.upper - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn canonical_reduction_brackets_one() {
        for n in [8u32, 16, 24] {
            let f =
                successive_minima(&space(AdelicMetric::canonical(), n), MinimaPath::Auto).unwrap();
            for v in &f.values {
                assert!(v.lower <= 1.0 + 1e-12 && v.upper >= 1.0 - 1e-12);
                assert!(v.exact, "canonical reduction should pin 1 exactly");
            }
        }
    }

    #[test]
    fn constant_twist_scales_minima() {
        let c = 0.5;
        let n = 4;
        let plain =
            successive_minima(&space(AdelicMetric::canonical(), n), MinimaPath::Auto).unwrap();
        let twisted = successive_minima(
            &space(
                AdelicMetric::canonical().with_twist(MetricTwist::constant(c)),
                n,
            ),
            MinimaPath::Auto,
        )
        .unwrap();
        let factor = (-(n as f64) * c).exp();
        for (p, t) in plain.values.iter().zip(&twisted.values) {
            assert!((t.upper - p.upper * factor).abs() < 1e-12);
            assert!((t.lower - p.lower * factor).abs() < 1e-12);
        }
    }

    #[test]
    fn fs_rank_two_exact() {
        // sections {1, z} of O(1) have FS norm sqrt(a^2+b^2): minima 1, 1
        let f =
            successive_minima(&space(AdelicMetric::fubini_study(), 1), MinimaPath::Auto).unwrap();
        assert_eq!(f.values.len(), 2);
        for v in &f.values {
            assert!((v.upper - 1.0).abs() < 1e-12, "upper {}", v.upper);
        }
    }

    #[test]
    fn fs_small_power_brackets() {
        let f =
            successive_minima(&space(AdelicMetric::fubini_study(), 4), MinimaPath::Auto).unwrap();
        // lambda_1 is at most the middle monomial norm and at least the
        // surrogate diagonal floor
        let mid = super::super::supnorm::fs_monomial_norm(4, 2);
        assert!(f.values[0].upper <= mid + 1e-12);
        assert!(f.values[0].lower >= 1.0 / (5.0f64 * 6.0).sqrt() - 1e-12);
        // non-decreasing
        for w in f.values.windows(2) {
            assert!(w[0].upper <= w[1].upper + 1e-12);
        }
    }

    #[test]
    fn ts_are_sorted_nonincreasing() {
        let f =
            successive_minima(&space(AdelicMetric::fubini_study(), 8), MinimaPath::Auto).unwrap();
        let ts = f.t_brackets().unwrap();
        for w in ts.windows(2) {
            assert!(w[0].0 >= w[1].0 - 1e-12);
        }
    }

    #[test]
    fn cap_errors() {
        let err = successive_minima(&space(AdelicMetric::canonical(), 25), MinimaPath::Auto);
        assert!(matches!(err, Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn rank_tracker_counts_independence() {
        let mut t = RankTracker::new(3);
        assert!(t.try_add(&[1, 0, 0]));
        assert!(t.try_add(&[1, 1, 0]));
        assert!(!t.try_add(&[2, 1, 0]));
        assert!(t.try_add(&[0, 0, 5]));
        assert_eq!(t.rank(), 3);
    }
}
