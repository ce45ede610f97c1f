//! The equidistribution-by-differentiability test: tail-liminf height
//! functionals, directional derivatives along metric twists, the additivity
//! verdict, and limit-measure extraction.
//!
//! All liminf-type quantities are finite-horizon tail-window minima with
//! explicit stabilization flags; INCONCLUSIVE is a first-class verdict, and
//! nothing here claims a true limit.

mod semigroup;

pub use semigroup::{
    differential_additivity_probe, sandwich_differential, superadditive_coincidence_check,
    AdditivityProbe, CoincidenceReport, SandwichReport, SemigroupFunction, SemigroupPredicate,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heights::{AdelicMetric, AlgebraicPoint, MetricTwist};
use crate::measures::{
    moments_to_circle_density, wasserstein_circle, DensityReport, EmpiricalMeasure,
};

/// Sphere-coordinate monomials u1^i u2^j u3^k with 1 <= i+j+k <= max_degree,
/// the default dictionary of twist directions (their pairwise sums are taken
/// inside the additivity check).
pub fn sphere_monomial_dictionary(max_degree: u32) -> Vec<MetricTwist> {
    let mut out = Vec::new();
    for total in 1..=max_degree {
        for i in (0..=total).rev() {
            for j in (0..=total - i).rev() {
                let k = total - i - j;
                out.push(MetricTwist::monomial(i, j, k, 1.0));
            }
        }
    }
    out
}

/// Estimator of the liminf height functional along a point sequence:
/// cached heights, a tail window, and a monotone-refinement contract
/// (extending the horizon never alters earlier cached values).
#[derive(Debug, Clone)]
pub struct PhiEstimator {
    points: Vec<AlgebraicPoint>,
    metric: AdelicMetric,
    window: usize,
    tol: f64,
    heights: Vec<f64>,
}

/// Finite-horizon liminf estimate with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct PhiResult {
    pub value: f64,
    /// Minima over the last two disjoint windows agree within tol.
    pub stabilized: bool,
    pub horizon: usize,
    pub window: usize,
    pub head: Vec<f64>,
}

impl PhiEstimator {
    pub fn new(
        points: Vec<AlgebraicPoint>,
        metric: AdelicMetric,
        window: usize,
        tol: f64,
    ) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidInput("window must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point sequence".into()));
        }
        Ok(PhiEstimator {
            points,
            metric,
            window,
            tol,
            heights: Vec::new(),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Computes heights up to the horizon (indices already cached are never
    /// recomputed).
    pub fn extend_to(&mut self, horizon: usize) -> Result<()> {
        if horizon > self.points.len() {
            return Err(Error::InvalidInput(format!(
                "horizon {horizon} exceeds the sequence length {}",
                self.points.len()
            )));
        }
        for i in self.heights.len()..horizon {
            let h = self.points[i]
                .height(&self.metric)
                .map_err(|e| Error::Numeric(format!("height of sequence index {i} failed: {e}")))?;
            self.heights.push(h);
        }
        Ok(())
    }

    /// Tail-window minimum of the heights at the given horizon.
    pub fn phi(&mut self, horizon: usize) -> Result<PhiResult> {
        if horizon < self.window {
            return Err(Error::InvalidInput(
                "horizon must be at least the window length".into(),
            ));
        }
        self.extend_to(horizon)?;
        let value = window_min(&self.heights[..horizon], self.window);
        let stabilized = if horizon >= 2 * self.window {
            let prev = window_min(&self.heights[..horizon - self.window], self.window);
            (value - prev).abs() <= self.tol
        } else {
            false
        };
        Ok(PhiResult {
            value,
            stabilized,
            horizon,
            window: self.window,
            head: self.heights[..horizon].to_vec(),
        })
    }
}

fn window_min(values: &[f64], window: usize) -> f64 {
    values[values.len() - window.min(values.len())..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Cached per-point data for derivative work along one sequence: base
/// heights under L and orbit averages of each requested twist.
struct SequenceTable {
    base_heights: Vec<f64>,
    twist_averages: Vec<Vec<f64>>,
}

fn build_table(
    points: &[AlgebraicPoint],
    metric: &AdelicMetric,
    twists: &[&MetricTwist],
    horizon: usize,
) -> Result<SequenceTable> {
    if horizon > points.len() {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} exceeds the sequence length {}",
            points.len()
        )));
    }
    let mut base_heights = Vec::with_capacity(horizon);
    for p in &points[..horizon] {
        base_heights.push(p.height(metric)?);
    }
    let mut twist_averages = Vec::with_capacity(twists.len());
    for t in twists {
        let mut col = Vec::with_capacity(horizon);
        for p in &points[..horizon] {
            col.push(p.twist_integral(t)?);
        }
        twist_averages.push(col);
    }
    Ok(SequenceTable {
        base_heights,
        twist_averages,
    })
}

/// Derivative data for one twist direction across tensor powers m.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeReport {
    pub twist: String,
    /// (m, phi(L^m tensor O(f)) - m phi(L)) pairs.
    pub per_m: Vec<(u32, f64)>,
    pub value: f64,
    pub stabilized: bool,
    pub horizon: usize,
    pub window: usize,
}

/// Checks the convergence hypothesis on the base heights and returns the
/// per-m twisted-minus-scaled values; their stabilization across m and
/// across windows is the derivative estimate D_L phi(O(f)).
pub fn directional_derivative(
    points: &[AlgebraicPoint],
    metric: &AdelicMetric,
    twist: &MetricTwist,
    m_list: &[u32],
    horizon: usize,
    window: usize,
    tol: f64,
) -> Result<DerivativeReport> {
    if m_list.is_empty() || m_list.contains(&0) {
        return Err(Error::InvalidInput("m list must be positive".into()));
    }
    let table = build_table(points, metric, &[twist], horizon)?;
    check_base_convergence(&table.base_heights, window, tol)?;
    Ok(derivative_from_table(
        &table.base_heights,
        &table.twist_averages[0],
        twist.label(),
        m_list,
        window,
        tol,
        horizon,
    ))
}

fn check_base_convergence(heights: &[f64], window: usize, tol: f64) -> Result<()> {
    let tail = &heights[heights.len().saturating_sub(window)..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let oscillation = hi - lo;
    if oscillation > tol {
        return Err(Error::NonConvergentBase { oscillation, tol });
    }
    Ok(())
}

fn derivative_from_table(
    base: &[f64],
    averages: &[f64],
    label: String,
    m_list: &[u32],
    window: usize,
    tol: f64,
    horizon: usize,
) -> DerivativeReport {
    let phi_base = window_min(base, window);
    let per_m: Vec<(u32, f64)> = m_list
        .iter()
        .map(|&m| {
            let combined: Vec<f64> = base
                .iter()
                .zip(averages)
                .map(|(h, a)| m as f64 * h + a)
                .collect();
            (m, window_min(&combined, window) - m as f64 * phi_base)
        })
        .collect();
    let value = per_m.last().unwrap().1;
    let m_spread = per_m
        .iter()
        .map(|&(_, v)| v)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
    let window_stable = if base.len() >= 2 * window {
        let prev: Vec<f64> = base
            .iter()
            .zip(averages)
            .map(|(h, a)| h + a)
            .take(base.len() - window)
            .collect();
        let cur: Vec<f64> = base.iter().zip(averages).map(|(h, a)| h + a).collect();
        (window_min(&prev, window) - window_min(&cur, window)).abs() <= tol
    } else {
        false
    };
    DerivativeReport {
        twist: label,
        per_m,
        value,
        stabilized: (m_spread.1 - m_spread.0) <= tol && window_stable,
        horizon,
        window,
    }
}

/// Verdict of the additivity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Equidistributes,
    Fails,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Equidistributes => write!(f, "EQUIDISTRIBUTES"),
            Verdict::Fails => write!(f, "FAILS"),
            Verdict::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

/// One pair's additivity gap |D(f+g) - D(f) - D(g)|.
#[derive(Debug, Clone, Serialize)]
pub struct PairGap {
    pub f: String,
    pub g: String,
    #[serde(rename = "D_f")]
    pub d_f: f64,
    #[serde(rename = "D_g")]
    pub d_g: f64,
    #[serde(rename = "D_fg")]
    pub d_fg: f64,
    pub gap: f64,
    pub stabilized: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub per_pair: Vec<PairGap>,
    pub horizon: usize,
    pub window: usize,
    pub tol: f64,
    /// Largest additivity gap over stabilized pairs.
    pub max_gap: f64,
}

/// Tests additivity of the derivative over all pairs from the dictionary:
/// EQUIDISTRIBUTES when every pair is stabilized with gap <= tol, FAILS when
/// a stabilized pair violates by a certified margin, INCONCLUSIVE otherwise.
pub fn additivity_verdict(
    points: &[AlgebraicPoint],
    metric: &AdelicMetric,
    dictionary: &[MetricTwist],
    horizon: usize,
    window: usize,
    tol: f64,
) -> Result<VerdictReport> {
    if dictionary.is_empty() {
        return Err(Error::InvalidInput("empty twist dictionary".into()));
    }
    let refs: Vec<&MetricTwist> = dictionary.iter().collect();
    let table = build_table(points, metric, &refs, horizon)?;
    check_base_convergence(&table.base_heights, window, tol)?;
    let m_list = [1u32, 2];

    let derive = |averages: &[f64], label: String| {
        derivative_from_table(
            &table.base_heights,
            averages,
            label,
            &m_list,
            window,
            tol,
            horizon,
        )
    };
    let singles: Vec<DerivativeReport> = dictionary
        .iter()
        .enumerate()
        .map(|(i, t)| derive(&table.twist_averages[i], t.label()))
        .collect();

    let mut per_pair = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut any_unstable = false;
    let mut any_violation = false;
    for i in 0..dictionary.len() {
        for j in i..dictionary.len() {
            // orbit averages are linear in the twist, so the sum's average
            // column is the pointwise sum of the cached columns
            let sums: Vec<f64> = table.twist_averages[i]
                .iter()
                .zip(&table.twist_averages[j])
                .map(|(a, b)| a + b)
                .collect();
            let label = format!("{} + {}", dictionary[i].label(), dictionary[j].label());
            let pair = derive(&sums, label);
            let gap = (pair.value - singles[i].value - singles[j].value).abs();
            let stabilized = pair.stabilized && singles[i].stabilized && singles[j].stabilized;
            if stabilized {
                max_gap = max_gap.max(gap);
                if gap > tol {
                    any_violation = true;
                }
            } else {
                any_unstable = true;
            }
            per_pair.push(PairGap {
                f: dictionary[i].label(),
                g: dictionary[j].label(),
                d_f: singles[i].value,
                d_g: singles[j].value,
                d_fg: pair.value,
                gap,
                stabilized,
            });
        }
    }
    let verdict = if any_violation {
        Verdict::Fails
    } else if any_unstable {
        Verdict::Inconclusive
    } else {
        Verdict::Equidistributes
    };
    Ok(VerdictReport {
        verdict,
        per_pair,
        horizon,
        window,
        tol,
        max_gap,
    })
}

/// Fourier-side data of a reconstructed limit measure on the unit circle.
#[derive(Debug, Clone, Serialize)]
pub struct CircleLimitData {
    pub moments: Vec<(f64, f64)>,
    #[serde(skip)]
    pub density: DensityReport,
    /// W1 distance between the reconstructed measure and the uniform
    /// discretization of Haar on the density grid.
    pub distance_to_uniform: f64,
    /// W1 distance between the last orbit measure and the reconstruction.
    pub distance_to_last_orbit: f64,
}

/// The limit measure read off the derivative functional f -> D_L phi(O(f)).
#[derive(Debug, Clone, Serialize)]
pub struct LimitMeasureReport {
    pub verdict: Verdict,
    /// Derivative values over the dictionary (the limit functional).
    pub functional: Vec<(String, f64)>,
    /// Fourier reconstruction, present when the sequence is supported on
    /// the unit circle.
    pub circle: Option<CircleLimitData>,
}

/// Extracts the limit measure after an EQUIDISTRIBUTES verdict (refuses
/// otherwise). Fourier moments are computed through derivative estimates of
/// Chebyshev twists cos k theta, sin k theta.
pub fn limit_measure(
    points: &[AlgebraicPoint],
    metric: &AdelicMetric,
    dictionary: &[MetricTwist],
    horizon: usize,
    window: usize,
    tol: f64,
    moment_degree: u32,
) -> Result<LimitMeasureReport> {
    let verdict = additivity_verdict(points, metric, dictionary, horizon, window, tol)?;
    if verdict.verdict != Verdict::Equidistributes {
        return Err(Error::NoLimitMeasure {
            verdict: verdict.verdict.to_string(),
        });
    }
    let refs: Vec<&MetricTwist> = dictionary.iter().collect();
    let table = build_table(points, metric, &refs, horizon)?;
    let functional: Vec<(String, f64)> = dictionary
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let r = derivative_from_table(
                &table.base_heights,
                &table.twist_averages[i],
                t.label(),
                &[1],
                window,
                tol,
                horizon,
            );
            (t.label(), r.value)
        })
        .collect();

    // circle support check on the tail window
    let tail = &points[horizon - window.min(horizon)..horizon];
    let on_circle = tail.iter().all(|p| {
        p.orbit_measure().is_ok_and(|m| {
            m.atoms().iter().all(|a| match a.point {
                crate::measures::SpherePoint::Finite(z) => (z.norm() - 1.0).abs() <= 1e-9,
                crate::measures::SpherePoint::Infinity => false,
            })
        })
    });
    let circle = if on_circle {
        let mut moments = vec![Complex64::new(1.0, 0.0)];
        for k in 1..=moment_degree {
            let (cos_t, sin_t) = chebyshev_twists(k);
            let d_cos =
                derivative_value(&table.base_heights, points, &cos_t, horizon, window, tol)?;
            let d_sin =
                derivative_value(&table.base_heights, points, &sin_t, horizon, window, tol)?;
            moments.push(Complex64::new(d_cos, d_sin));
        }
        let density = moments_to_circle_density(&moments)?;
        let reconstructed = density.to_empirical()?;
        let uniform = EmpiricalMeasure::haar_discretization(density.grid.len());
        let distance_to_uniform = wasserstein_circle(&reconstructed, &uniform)?;
        let last_orbit = points[horizon - 1].orbit_measure()?;
        let distance_to_last_orbit = wasserstein_circle(&last_orbit, &reconstructed)?;
        Some(CircleLimitData {
            moments: moments.iter().map(|c| (c.re, c.im)).collect(),
            density,
            distance_to_uniform,
            distance_to_last_orbit,
        })
    } else {
        None
    };
    Ok(LimitMeasureReport {
        verdict: verdict.verdict,
        functional,
        circle,
    })
}

fn derivative_value(
    base: &[f64],
    points: &[AlgebraicPoint],
    twist: &MetricTwist,
    horizon: usize,
    window: usize,
    tol: f64,
) -> Result<f64> {
    let mut averages = Vec::with_capacity(horizon);
    for p in &points[..horizon] {
        averages.push(p.twist_integral(twist)?);
    }
    Ok(derivative_from_table(base, &averages, twist.label(), &[1], window, tol, horizon).value)
}

/// Twists restricting to cos(k theta) and sin(k theta) on the equator:
/// Chebyshev polynomials T_k(u1) and u2 U_{k-1}(u1).
pub fn chebyshev_twists(k: u32) -> (MetricTwist, MetricTwist) {
    assert!(k >= 1);
    let u1 = MetricTwist::monomial(1, 0, 0, 1.0);
    let mut t_prev = MetricTwist::constant(1.0); // T_0
    let mut t_cur = u1.clone(); // T_1
    let mut u_prev = MetricTwist::constant(1.0); // U_0
    let mut u_cur = u1.scale(2.0); // U_1
    for _ in 1..k {
        let t_next = u1.mul(&t_cur).scale(2.0).add(&t_prev.neg());
        t_prev = t_cur;
        t_cur = t_next;
        let u_next = u1.mul(&u_cur).scale(2.0).add(&u_prev.neg());
        u_prev = u_cur;
        u_cur = u_next;
    }
    let sin = MetricTwist::monomial(0, 1, 0, 1.0).mul(&u_prev);
    (t_cur, sin)
}
