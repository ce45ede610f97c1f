//! Section lattices E_n of tensor powers of a metrized O(1) on P1:
//! sup-norm oracles, successive-minima filtrations, the asymptotic measure
//! with its slope invariants, effective-section counting, sectional
//! capacity, and the evaluation-map bound.
//!
//! Degrees use the ball-volume normalization of the `lattices` module. In
//! that normalization Minkowski's second theorem pins the maximal slope of
//! a section lattice to -log lambda_1 exactly (every sub-bundle F satisfies
//! deg F <= -rank(F) log lambda_1 and the shortest line attains it), so the
//! bracket on lambda_1 is a bracket on mu_max(E_n).

mod minima;
mod supnorm;

pub use minima::{
    successive_minima, MinimaFiltration, MinimaPath, MinimumValue, EXACT_ENUMERATION_CAP,
    REDUCTION_CAP,
};
pub use supnorm::{fs_monomial_norm, section_sup_norm, SupNorm};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heights::{AdelicMetric, AlgebraicPoint, MetricBase};
use crate::lattices::{AdelicLattice, Estimate, McParams};
use crate::measures::{wasserstein_line, SpherePoint, StepMeasure, StepMomentKind};

/// Global sections of O(n) with the metric's sup norms: the monomial basis
/// 1, z, ..., z^n identified with integer coordinate vectors. Integer
/// vectors are exactly the sections with all finite-place sup norms at most
/// one (standard model).
#[derive(Debug, Clone)]
pub struct SectionSpace {
    pub n: u32,
    pub metric: AdelicMetric,
}

impl SectionSpace {
    pub fn new(n: u32, metric: AdelicMetric) -> Self {
        SectionSpace { n, metric }
    }

    pub fn rank(&self) -> usize {
        self.n as usize + 1
    }

    /// Certified sup-norm bracket of a real coefficient vector.
    pub fn sup_norm(&self, coeffs: &[f64]) -> Result<SupNorm> {
        section_sup_norm(coeffs, self.n, &self.metric)
    }

    pub fn sup_norm_i64(&self, v: &[i64]) -> Result<SupNorm> {
        let coeffs: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        self.sup_norm(&coeffs)
    }

    /// Full archimedean weight (base to the n-th power times the twist
    /// factor) at a point of the affine chart.
    pub(crate) fn weight_at(&self, z: Complex64) -> f64 {
        let nf = self.n as f64;
        let base = match self.metric.base {
            MetricBase::Canonical => z.norm().max(1.0).powf(-nf),
            MetricBase::FubiniStudy => (1.0 + z.norm_sqr()).powf(-nf / 2.0),
        };
        let f = self
            .metric
            .twist
            .eval(SpherePoint::Finite(z).sphere_coords());
        base * (-nf * f).exp()
    }

    /// View as an adelic lattice with a (fast, attained-value) norm oracle,
    /// for Monte Carlo volume work.
    pub fn as_lattice(&self) -> AdelicLattice {
        let metric = self.metric.clone();
        let n = self.n;
        AdelicLattice::general(
            self.rank(),
            format!("E_{n} sup-norm"),
            move |v: &[f64]| supnorm::quick_sup_value(v, n, &metric),
        )
    }
}

/// Mass 1/(n+1) at each jump location t_i = -(1/n) log lambda_i, ties
/// merged. Built from the achieved (upper) side of the lambda brackets, so
/// every jump location is witnessed by an actual section.
pub fn filtration_measure(f: &MinimaFiltration) -> Result<StepMeasure> {
    let ts = f.t_brackets()?;
    let mass = 1.0 / (f.n as f64 + 1.0);
    StepMeasure::new(
        ts.iter()
            .map(|&(t_achieved, _)| (t_achieved, mass))
            .collect(),
    )
}

/// The same measure built from the certified lower bounds on the minima
/// (hence an upper envelope in the t variable).
pub fn filtration_measure_upper(f: &MinimaFiltration) -> Result<StepMeasure> {
    let ts = f.t_brackets()?;
    let mass = 1.0 / (f.n as f64 + 1.0);
    StepMeasure::new(ts.iter().map(|&(_, t_upper)| (t_upper, mass)).collect())
}

/// Certified bracket on mu_max(E_n) = -log lambda_1 (ball-volume
/// normalization; see the module docs).
pub fn mu_max_bracket(f: &MinimaFiltration) -> (f64, f64) {
    let lambda1 = &f.values[0];
    (-(lambda1.upper.ln()), -(lambda1.lower.ln()))
}

/// Per-level data of an asymptotic-measure run.
#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub n: u32,
    pub mean: f64,
    pub positive_part_mean: f64,
    pub sup_support: f64,
    /// Mean computed from the certified lower bounds on the minima (upper
    /// envelope in t).
    pub mean_upper: f64,
    pub sup_support_upper: f64,
    pub max_bracket_width: f64,
    #[serde(skip)]
    pub measure: StepMeasure,
    #[serde(skip)]
    pub minima: MinimaFiltration,
}

/// Estimate of the asymptotic measure: the stabilizing filtration measures
/// along an increasing n-list with their pairwise transport distances.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticMeasureReport {
    pub metric: String,
    pub per_n: Vec<LevelReport>,
    /// W1 distances between consecutive filtration measures.
    pub transport_gaps: Vec<f64>,
    /// Whether the gap sequence behaves like a Cauchy sequence (reported,
    /// never silently assumed).
    pub converged: bool,
    pub sup_support: f64,
    pub positive_part_mean: f64,
    pub mean: f64,
    /// Achieved-side and certified-envelope mean of the last level.
    pub mean_bounds: (f64, f64),
    #[serde(skip)]
    pub estimate: StepMeasure,
}

/// Runs the filtration measures along `n_list` (reduction path by default,
/// so one estimator is used across the whole list).
pub fn asymptotic_measure(
    metric: &AdelicMetric,
    n_list: &[u32],
    path: MinimaPath,
) -> Result<AsymptoticMeasureReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("empty n list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "n list must be strictly increasing".into(),
        ));
    }
    if n_list[0] == 0 {
        return Err(Error::InvalidInput("n = 0 has no filtration scale".into()));
    }
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let space = SectionSpace::new(n, metric.clone());
        let minima = successive_minima(&space, path)?;
        let measure = filtration_measure(&minima)?;
        let upper = filtration_measure_upper(&minima)?;
        per_n.push(LevelReport {
            n,
            mean: measure.moment(StepMomentKind::Mean),
            positive_part_mean: measure.moment(StepMomentKind::PositivePartMean),
            sup_support: measure.moment(StepMomentKind::SupSupport),
            mean_upper: upper.moment(StepMomentKind::Mean),
            sup_support_upper: upper.moment(StepMomentKind::SupSupport),
            max_bracket_width: minima.max_bracket_width(),
            measure,
            minima,
        });
    }
    let transport_gaps: Vec<f64> = per_n
        .windows(2)
        .map(|w| wasserstein_line(&w[0].measure, &w[1].measure))
        .collect();
    // Cauchy heuristic: gaps never grow by more than 25%
    let converged = transport_gaps
        .windows(2)
        .all(|w| w[1] <= w[0] * 1.25 + 1e-9);
    let last = per_n.last().unwrap();
    Ok(AsymptoticMeasureReport {
        metric: metric.label(),
        sup_support: last.sup_support,
        positive_part_mean: last.positive_part_mean,
        mean: last.mean,
        mean_bounds: (last.mean, last.mean_upper),
        estimate: last.measure.clone(),
        converged,
        transport_gaps,
        per_n,
    })
}

/// Count of effective integer sections (all sup norms <= 1).
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveSectionCount {
    pub count: u64,
    pub log_count: f64,
    pub exact: bool,
}

const EFFECTIVE_SECTIONS_CAP: u32 = 8;
const EFFECTIVE_ENUMERATION_BUDGET: usize = 60_000_000;

/// log #{s in H^0 : ||s||_sup <= 1 at every place} by certified enumeration.
pub fn count_effective_sections(space: &SectionSpace) -> Result<EffectiveSectionCount> {
    let n = space.n;
    if n > EFFECTIVE_SECTIONS_CAP {
        return Err(Error::CapExceeded {
            what: "effective-section tensor power",
            value: n as usize,
            cap: EFFECTIVE_SECTIONS_CAP as usize,
        });
    }
    let dim = n as usize + 1;
    let nf = n as f64;
    let (twist_lo, _) = match space.metric.twist.as_constant() {
        Some(c) => ((-nf * c).exp(), (-nf * c).exp()),
        None => {
            let b = space.metric.twist.sup_bound();
            ((-nf * b).exp(), (nf * b).exp())
        }
    };
    // Parseval/FS surrogate: sections with true norm <= 1 satisfy
    // sqrt(Q(c)) <= 1/twist_lo
    let diag: Vec<f64> = match space.metric.base {
        MetricBase::Canonical => vec![1.0; dim],
        MetricBase::FubiniStudy => (0..dim)
            .map(|k| 1.0 / ((nf + 1.0) * supnorm::binomial(n, k as u32)))
            .collect(),
    };
    let caps: Vec<i64> = (0..dim)
        .map(|k| {
            let base = match space.metric.base {
                MetricBase::Canonical => 1.0,
                MetricBase::FubiniStudy => 1.0 / fs_monomial_norm(n, k as u32),
            };
            (base / twist_lo + 1e-9).floor() as i64
        })
        .collect();
    let radius_sq = (1.0 / twist_lo).powi(2);

    let screen = supnorm::CoarseScreen::new(n, &space.metric);
    let mut count: u64 = 1; // the zero section
    let mut ambiguous: Option<Vec<i64>> = None;
    let mut current = vec![0i64; dim];
    let mut visits = 0usize;
    enumerate_for_counting(
        &diag,
        &caps,
        radius_sq,
        0,
        0.0,
        &mut current,
        &mut visits,
        &mut |v| {
            if screen.lower_bound_i64(v) > 1.0 + 1e-9 {
                return Ok(());
            }
            let s = space.sup_norm_i64(v)?;
            if s.upper <= 1.0 + 1e-12 {
                count += 2; // v and -v
            } else if s.value <= 1.0 + 1e-12 {
                if s.exact {
                    count += 2;
                } else {
                    ambiguous = Some(v.to_vec());
                }
            }
            Ok(())
        },
    )?;
    if let Some(v) = ambiguous {
        return Err(Error::SupNormCertification(format!(
            "section {v:?} sits on the unit boundary within certification width"
        )));
    }
    Ok(EffectiveSectionCount {
        count,
        log_count: (count as f64).ln(),
        exact: true,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_for_counting(
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
        if *visits > EFFECTIVE_ENUMERATION_BUDGET {
            return Err(Error::CapExceeded {
                what: "effective-section enumeration visits",
                value: *visits,
                cap: EFFECTIVE_ENUMERATION_BUDGET,
            });
        }
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
        enumerate_for_counting(
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

/// One level of the sectional-capacity extrapolation.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityLevel {
    pub n: u32,
    pub chi: Estimate,
    pub two_chi_over_n_sq: f64,
    pub std_error: f64,
    pub filtration_mean: f64,
    /// Width of the mean bracket produced by the minima bounds.
    pub mean_bracket: f64,
    /// Minkowski band check: deg lies between n(n+1) mean - log (n+1)! and
    /// n(n+1) mean (bracket sides used accordingly, MC slack added).
    pub minkowski_ok: bool,
}

/// Sectional capacity S = lim chi(E_n)/(n^2/2) with the consistency check
/// mu_pi = S / ((d+1) vol) = S/2 against the filtration mean.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityReport {
    pub per_n: Vec<CapacityLevel>,
    pub extrapolated: f64,
    pub uncertainty: f64,
    pub mu_pi_from_capacity: f64,
    pub mu_pi_from_mean: f64,
    pub consistent: bool,
}

const CAPACITY_RANK_CAP: u32 = 9;

pub fn sectional_capacity_estimate(
    metric: &AdelicMetric,
    n_list: &[u32],
    mc: &McParams,
    path: MinimaPath,
) -> Result<CapacityReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("empty n list".into()));
    }
    if n_list.iter().any(|&n| n == 0 || n > CAPACITY_RANK_CAP) {
        return Err(Error::CapExceeded {
            what: "capacity tensor power (Monte Carlo ball volumes)",
            value: *n_list.iter().max().unwrap() as usize,
            cap: CAPACITY_RANK_CAP as usize,
        });
    }
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let space = SectionSpace::new(n, metric.clone());
        let chi = space.as_lattice().degree(&McParams {
            samples: mc.samples,
            seed: mc.seed.wrapping_add(n as u64),
        })?;
        let minima = successive_minima(&space, path)?;
        let lower_env = filtration_measure(&minima)?; // achieved side
        let upper_env = filtration_measure_upper(&minima)?;
        let mean_achieved = lower_env.moment(StepMomentKind::Mean);
        let mean_upper = upper_env.moment(StepMomentKind::Mean);
        let nf = n as f64;
        let scale = nf * (nf + 1.0);
        let slack = 3.0 * chi.std_error + 1e-9;
        // -sum log lambda_i in [deg, deg + log (n+1)!]
        let minkowski_ok = chi.value <= scale * mean_upper + slack
            && chi.value >= scale * mean_achieved - ln_factorial(n as usize + 1) - slack;
        per_n.push(CapacityLevel {
            n,
            two_chi_over_n_sq: 2.0 * chi.value / (nf * nf),
            std_error: 2.0 * chi.std_error / (nf * nf),
            filtration_mean: mean_achieved,
            mean_bracket: (mean_upper - mean_achieved).abs(),
            minkowski_ok,
            chi,
        });
    }
    let (extrapolated, rms) = extrapolate_capacity(&per_n);
    let mc_err = per_n.iter().map(|l| l.std_error).fold(0.0, f64::max);
    let uncertainty = (2.0 * rms).max(2.0 * mc_err);
    let mu_pi_from_capacity = extrapolated / 2.0;
    let last = per_n.last().unwrap();
    let mu_pi_from_mean = last.filtration_mean;
    let consistent =
        (mu_pi_from_capacity - mu_pi_from_mean).abs() <= uncertainty + last.mean_bracket + 0.05;
    Ok(CapacityReport {
        per_n,
        extrapolated,
        uncertainty,
        mu_pi_from_capacity,
        mu_pi_from_mean,
        consistent,
    })
}

/// Least squares fit of y = a + b ln(n)/n + c/n; returns (a, rms residual).
fn extrapolate_capacity(levels: &[CapacityLevel]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| (l.n as f64, l.two_chi_over_n_sq))
        .collect();
    if pts.len() < 3 {
        let last = pts.last().unwrap().1;
        let spread = if pts.len() == 2 {
            (pts[1].1 - pts[0].1).abs()
        } else {
            last.abs() * 0.5 + 0.1
        };
        return (last, spread);
    }
    // normal equations for the 3-parameter model
    let basis = |n: f64| [1.0, n.ln() / n, 1.0 / n];
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(n, y) in &pts {
        let b = basis(n);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
            atb[i] += b[i] * y;
        }
    }
    let sol = solve3(ata, atb);
    let mut ss = 0.0;
    for &(n, y) in &pts {
        let b = basis(n);
        let fit: f64 = (0..3).map(|i| sol[i] * b[i]).sum();
        ss += (y - fit) * (y - fit);
    }
    (sol[0], (ss / pts.len() as f64).sqrt())
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        if p.abs() < 1e-14 {
            continue;
        }
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / p;
                for k in 0..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in 0..3 {
        x[i] = if a[i][i].abs() < 1e-14 {
            0.0
        } else {
            b[i] / a[i][i]
        };
    }
    x
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Report of the inequality chain mu_ess >= mu_max_pi >= mu_pi (and, when
/// arithmetically big, mu_max_pi >= mu_plus_pi >= mu_pi) evaluated on the
/// estimated asymptotic measure.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub metric: String,
    pub sup_support: f64,
    pub positive_part_mean: f64,
    pub mean: f64,
    /// sup_support > 0 within noise (the bigness hypothesis gating the
    /// positive-part chain).
    pub arithmetically_big: bool,
    /// sup >= mean always; sup >= pos-mean >= mean checked when big.
    pub chain_ok: bool,
    pub mu_ess_closed_form: Option<f64>,
    /// closed form >= sup-support estimate (when a closed form exists).
    pub mu_ess_ok: Option<bool>,
    #[serde(skip)]
    pub measure_report: AsymptoticMeasureReport,
}

/// Closed-form essential minimum where known: canonical metrics have
/// mu_ess = c (torsion points twisted by the constant), Fubini-Study has
/// (1/2) log 2.
pub fn mu_ess_closed_form(metric: &AdelicMetric) -> Option<f64> {
    let c = metric.twist.as_constant()?;
    match metric.base {
        MetricBase::Canonical => Some(c),
        MetricBase::FubiniStudy => Some(0.5 * 2f64.ln() + c),
    }
}

pub fn inequality_chain_check(
    metric: &AdelicMetric,
    n_list: &[u32],
    path: MinimaPath,
) -> Result<ChainReport> {
    let report = asymptotic_measure(metric, n_list, path)?;
    let sup = report.sup_support;
    let pos = report.positive_part_mean;
    let mean = report.mean;
    let big = sup > 1e-9;
    let eps = 1e-12;
    let mut chain_ok = sup + eps >= mean;
    if big {
        chain_ok = chain_ok && sup + eps >= pos && pos + eps >= mean;
    } else {
        // not big: only pos-mean >= mean is unconditional
        chain_ok = chain_ok && pos + eps >= mean;
    }
    let mu_ess = mu_ess_closed_form(metric);
    let mu_ess_ok = mu_ess.map(|m| m + 1e-9 >= sup);
    Ok(ChainReport {
        metric: metric.label(),
        sup_support: sup,
        positive_part_mean: pos,
        mean,
        arithmetically_big: big,
        chain_ok,
        mu_ess_closed_form: mu_ess,
        mu_ess_ok,
        measure_report: report,
    })
}

/// Outcome of the evaluation-map bound check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalBoundOutcome {
    /// The certified upper bound on mu_max(E_n) already sits below the
    /// right-hand side.
    CertifiedPass,
    /// Only the lower bound is below the right-hand side; the bracket does
    /// not decide the comparison.
    InconclusiveWithBounds,
    /// Even the certified lower bound exceeds the right-hand side.
    Violation,
}

/// Report of mu_max(E_n) <= max_P n h(P) + log rank(E_n) on a point family.
#[derive(Debug, Clone, Serialize)]
pub struct EvalBoundReport {
    pub n: u32,
    pub mu_max_lower: f64,
    pub mu_max_upper: f64,
    pub max_height: f64,
    pub rhs: f64,
    pub outcome: EvalBoundOutcome,
    pub distinct_points: usize,
}

/// Checks the slope-method bound for the evaluation map on at least n+1
/// distinct points (so the map from degree-n sections is injective).
pub fn evaluation_bound_check(
    points: &[AlgebraicPoint],
    metric: &AdelicMetric,
    n: u32,
    path: MinimaPath,
) -> Result<EvalBoundReport> {
    // distinct algebraic points contribute disjoint Galois orbits
    let mut seen: Vec<String> = Vec::new();
    let mut geometric = 0usize;
    for p in points {
        let label = p.label();
        if !seen.contains(&label) {
            seen.push(label);
            geometric += p.degree();
        }
    }
    if geometric < n as usize + 1 {
        return Err(Error::InvalidInput(format!(
            "evaluation bound needs at least n+1 = {} distinct points, got {geometric}",
            n + 1
        )));
    }
    let mut max_height = f64::NEG_INFINITY;
    for p in points {
        max_height = max_height.max(p.height(metric)?);
    }
    let rhs = n as f64 * max_height + ((n as f64) + 1.0).ln();
    let space = SectionSpace::new(n, metric.clone());
    let minima = successive_minima(&space, path)?;
    let (mu_lower, mu_upper) = mu_max_bracket(&minima);
    let outcome = if mu_upper <= rhs + 1e-9 {
        EvalBoundOutcome::CertifiedPass
    } else if mu_lower > rhs + 1e-9 {
        EvalBoundOutcome::Violation
    } else {
        EvalBoundOutcome::InconclusiveWithBounds
    };
    Ok(EvalBoundReport {
        n,
        mu_max_lower: mu_lower,
        mu_max_upper: mu_upper,
        max_height,
        rhs,
        outcome,
        distinct_points: seen.len(),
    })
}
