//! Certified sup norms of global sections of O(n) on P1.
//!
//! A section is an integer (or real) coefficient vector c identified with
//! s(z) = sum c_k z^k; its norm under the metric of L^{tensor n} is
//! sup over the sphere of |s(z)| w(z)^n e^{-n f(u(z))}, with w the base
//! weight. Every returned value is a bracket: `value` is attained (grid plus
//! local refinement, hence a certified lower bound) and `upper` is a
//! certified upper bound (Bernstein sampling bound on the circle for the
//! canonical weight, reproducing-kernel and circle-domination bounds for
//! Fubini-Study, coefficient-sum sandwich for non-constant twists).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::heights::{AdelicMetric, MetricBase};
use crate::measures::SpherePoint;

/// Two-sided certified bracket of a section sup norm.
#[derive(Debug, Clone, Copy)]
pub struct SupNorm {
    /// Best attained value (certified lower bound).
    pub value: f64,
    /// Certified upper bound.
    pub upper: f64,
    /// True when value and upper coincide by a closed form.
    pub exact: bool,
}

impl SupNorm {
    fn exact(v: f64) -> Self {
        SupNorm {
            value: v,
            upper: v,
            exact: true,
        }
    }

    fn scaled(self, s: f64) -> Self {
        SupNorm {
            value: self.value * s,
            upper: self.upper * s,
            exact: self.exact,
        }
    }
}

/// Certified sup norm of a real coefficient vector under the metric's n-th
/// tensor power.
pub fn section_sup_norm(coeffs: &[f64], n: u32, metric: &AdelicMetric) -> Result<SupNorm> {
    if coeffs.is_empty() || coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidInput("sup norm of the zero section".into()));
    }
    if coeffs.len() > n as usize + 1 {
        return Err(Error::InvalidInput(format!(
            "degree {} section does not live in H^0(O({n}))",
            coeffs.len() - 1
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite section coefficients".into(),
        ));
    }

    if let Some(c) = metric.twist.as_constant() {
        let base = base_sup_norm(coeffs, n, metric.base)?;
        return Ok(base.scaled((-(n as f64) * c).exp()));
    }

    // non-constant twist: attained value from a direct grid over the sphere,
    // upper bound from the base bracket times the certified twist range
    let base = base_sup_norm(coeffs, n, metric.base)?;
    let bound = metric.twist.sup_bound();
    let upper = base.upper * ((n as f64) * bound).exp();
    let value = twisted_grid_max(coeffs, n, metric);
    Ok(SupNorm {
        value,
        upper: upper.max(value),
        exact: false,
    })
}

fn base_sup_norm(coeffs: &[f64], n: u32, base: MetricBase) -> Result<SupNorm> {
    let nonzero: Vec<usize> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(k, _)| k)
        .collect();
    match base {
        MetricBase::Canonical => {
            // sup over the sphere of |s|/max(1,|z|)^n equals the circle sup
            // (maximum modulus on both charts)
            if let [k] = nonzero.as_slice() {
                let _ = k;
                return Ok(SupNorm::exact(coeffs[*k].abs()));
            }
            Ok(circle_sup(coeffs))
        }
        MetricBase::FubiniStudy => {
            if let [k] = nonzero.as_slice() {
                return Ok(SupNorm::exact(
                    coeffs[*k].abs() * fs_monomial_norm(n, *k as u32),
                ));
            }
            if n == 1 {
                // |a + bz|/(1+|z|^2)^(1/2) peaks at sqrt(a^2+b^2)
                let v = coeffs[0].hypot(*coeffs.get(1).unwrap_or(&0.0));
                return Ok(SupNorm::exact(v));
            }
            let achieved = fs_grid_max(coeffs, n);
            // reproducing kernel of the FS-orthonormal monomials has
            // constant diagonal n+1, so sup <= sqrt(n+1) sqrt(Q)
            let q: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * c / ((n as f64 + 1.0) * binomial(n, k as u32)))
                .sum();
            let kernel = ((n as f64 + 1.0) * q).sqrt();
            // FS norm is dominated by the circle sup of |s|
            let circle = circle_sup(coeffs);
            Ok(SupNorm {
                value: achieved,
                upper: kernel.min(circle.upper).max(achieved),
                exact: false,
            })
        }
    }
}

/// Norm of z^k as a section of O(n) under Fubini-Study:
/// sqrt(k^k (n-k)^{n-k} / n^n), with the convention 0^0 = 1.
pub fn fs_monomial_norm(n: u32, k: u32) -> f64 {
    assert!(k <= n);
    if n == 0 {
        return 1.0;
    }
    let (n, k) = (n as f64, k as f64);
    let log = |x: f64, e: f64| if e == 0.0 { 0.0 } else { e * x.ln() };
    (0.5 * (log(k, k) + log(n - k, n - k) - log(n, n))).exp()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Certified maximum of |s| on the unit circle: dense equispaced samples of
/// the degree-d trigonometric polynomial |s|^2, a second-order Bernstein
/// bound on the sampling gap, and parabolic refinement of the best sample.
fn circle_sup(coeffs: &[f64]) -> SupNorm {
    let d = coeffs.len() - 1;
    // delta = (d h)^2 / 8 <= 1e-6 certifies a ~5e-7 relative norm slack
    let samples = ((d as f64) * 2221.0).ceil() as usize;
    let samples = samples.clamp(512, 400_000);
    let h = 2.0 * std::f64::consts::PI / samples as f64;
    let mut best = 0.0f64;
    let mut best_j = 0;
    for j in 0..samples {
        let v = abs2_on_circle(coeffs, j as f64 * h);
        if v > best {
            best = v;
            best_j = j;
        }
    }
    let sample_max = best;
    // golden-section refinement of |s|^2 around the best sample
    let refine = |a: f64, b: f64| -> f64 {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (a, b);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = abs2_on_circle(coeffs, x1);
        let mut f2 = abs2_on_circle(coeffs, x2);
        for _ in 0..80 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = abs2_on_circle(coeffs, x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = abs2_on_circle(coeffs, x1);
            }
        }
        f1.max(f2)
    };
    let theta = best_j as f64 * h;
    let refined = refine(theta - h, theta + h).max(sample_max);
    let delta = (d as f64 * h).powi(2) / 8.0;
    let upper_sq = sample_max / (1.0 - delta);
    let l1: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let upper = upper_sq.sqrt().min(l1).max(refined.sqrt());
    SupNorm {
        value: refined.sqrt(),
        upper,
        exact: false,
    }
}

fn abs2_on_circle(coeffs: &[f64], theta: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let z = Complex64::new(cos, sin);
    let mut p = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        p = p * z + c;
    }
    p.norm_sqr()
}

/// Attained maximum of the Fubini-Study-weighted modulus over both charts:
/// polar grid plus alternating 1-D refinements.
fn fs_grid_max(coeffs: &[f64], n: u32) -> f64 {
    let reversed: Vec<f64> = {
        let mut r = vec![0.0; n as usize + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            r[n as usize - k] = c;
        }
        r
    };
    let eval_chart = |cs: &[f64], r: f64, theta: f64| -> f64 {
        let (sin, cos) = theta.sin_cos();
        let z = Complex64::new(r * cos, r * sin);
        let mut p = Complex64::new(0.0, 0.0);
        for &c in cs.iter().rev() {
            p = p * z + c;
        }
        p.norm() / (1.0 + r * r).powf(n as f64 / 2.0)
    };
    let mut best = 0.0f64;
    for chart in [&coeffs.to_vec(), &reversed] {
        let radial = 48;
        let angular = (16 * (n as usize + 1)).max(64);
        let mut local_best = 0.0;
        let mut at = (0.0, 0.0);
        for ir in 0..=radial {
            let r = ir as f64 / radial as f64;
            // hoist the radial weight out of the angle sweep
            let w = (1.0 + r * r).powf(-(n as f64) / 2.0);
            for ia in 0..angular {
                let theta = 2.0 * std::f64::consts::PI * ia as f64 / angular as f64;
                let (sin, cos) = theta.sin_cos();
                let z = Complex64::new(r * cos, r * sin);
                let mut p = Complex64::new(0.0, 0.0);
                for &c in chart.iter().rev() {
                    p = p * z + c;
                }
                let v = p.norm() * w;
                if v > local_best {
                    local_best = v;
                    at = (r, theta);
                }
            }
        }
        // coordinate refinement
        let (mut r, mut theta) = at;
        let mut step_r = 1.0 / radial as f64;
        let mut step_t = 2.0 * std::f64::consts::PI / angular as f64;
        for _ in 0..60 {
            let mut improved = false;
            for (dr, dt) in [(step_r, 0.0), (-step_r, 0.0), (0.0, step_t), (0.0, -step_t)] {
                let rr = (r + dr).clamp(0.0, 1.0);
                let tt = theta + dt;
                let v = eval_chart(chart, rr, tt);
                if v > local_best {
                    local_best = v;
                    r = rr;
                    theta = tt;
                    improved = true;
                }
            }
            if !improved {
                step_r *= 0.5;
                step_t *= 0.5;
            }
        }
        best = best.max(local_best);
    }
    best
}

/// Precomputed sphere grid with weights, giving a cheap attained lower
/// bound on the sup norm. Enumeration uses it to discard candidates whose
/// norm already exceeds the bound before paying for full certification.
pub(crate) struct CoarseScreen {
    points: Vec<(Complex64, f64)>,
}

impl CoarseScreen {
    pub(crate) fn new(n: u32, metric: &AdelicMetric) -> Self {
        let nf = n as f64;
        let mut points = Vec::new();
        let radii = [
            0.0,
            0.2,
            0.45,
            0.7,
            0.85,
            1.0,
            1.0 / 0.85,
            1.0 / 0.7,
            1.0 / 0.45,
            5.0,
        ];
        for &r in &radii {
            let angular = if r == 0.0 { 1 } else { 16 };
            for ia in 0..angular {
                let theta = 2.0 * std::f64::consts::PI * ia as f64 / angular as f64 + 0.05;
                let z = Complex64::from_polar(r, theta);
                let base = match metric.base {
                    MetricBase::Canonical => z.norm().max(1.0).powf(-nf),
                    MetricBase::FubiniStudy => (1.0 + z.norm_sqr()).powf(-nf / 2.0),
                };
                let f = metric.twist.eval(SpherePoint::Finite(z).sphere_coords());
                points.push((z, base * (-nf * f).exp()));
            }
        }
        CoarseScreen { points }
    }

    /// Max of |s(z)| w(z) over the stored grid: a certified lower bound on
    /// the true sup norm.
    pub(crate) fn lower_bound(&self, coeffs: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for &(z, w) in &self.points {
            let mut p = Complex64::new(0.0, 0.0);
            for &c in coeffs.iter().rev() {
                p = p * z + c;
            }
            best = best.max(p.norm() * w);
        }
        best
    }

    pub(crate) fn lower_bound_i64(&self, v: &[i64]) -> f64 {
        let coeffs: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        self.lower_bound(&coeffs)
    }
}

/// Fast attained-value-only sup norm (no certification), for Monte Carlo
/// volume sampling where the oracle is called tens of thousands of times.
pub(crate) fn quick_sup_value(coeffs: &[f64], n: u32, metric: &AdelicMetric) -> f64 {
    if coeffs.iter().all(|&c| c == 0.0) {
        return 0.0;
    }
    twisted_grid_max(coeffs, n, metric)
}

/// Attained maximum including a non-constant twist: both charts, full weight.
fn twisted_grid_max(coeffs: &[f64], n: u32, metric: &AdelicMetric) -> f64 {
    let nf = n as f64;
    let weight = |z: Complex64| -> f64 {
        let base = match metric.base {
            MetricBase::Canonical => z.norm().max(1.0).powf(-nf),
            MetricBase::FubiniStudy => (1.0 + z.norm_sqr()).powf(-nf / 2.0),
        };
        let f = metric.twist.eval(SpherePoint::Finite(z).sphere_coords());
        base * (-nf * f).exp()
    };
    let eval = |z: Complex64| -> f64 {
        let mut p = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            p = p * z + c;
        }
        p.norm() * weight(z)
    };
    let twist_free = metric.twist.is_zero();
    // cover both charts through radii on a log-ish scale
    let mut best: f64 = 0.0;
    let mut at = Complex64::new(0.0, 0.0);
    let angular = (16 * (n as usize + 1)).max(64);
    for ir in 0..=48 {
        let t = ir as f64 / 48.0;
        let r = (if t < 1.0 { t / (1.0 - t + 1e-9) } else { 1e9 }).min(1e6);
        let base_w = match metric.base {
            MetricBase::Canonical => r.max(1.0).powf(-nf),
            MetricBase::FubiniStudy => (1.0 + r * r).powf(-nf / 2.0),
        };
        for ia in 0..angular {
            let theta = 2.0 * std::f64::consts::PI * ia as f64 / angular as f64;
            let z = Complex64::from_polar(r, theta);
            let mut p = Complex64::new(0.0, 0.0);
            for &c in coeffs.iter().rev() {
                p = p * z + c;
            }
            let v = if twist_free {
                p.norm() * base_w
            } else {
                let f = metric.twist.eval(SpherePoint::Finite(z).sphere_coords());
                p.norm() * base_w * (-nf * f).exp()
            };
            if v > best {
                best = v;
                at = z;
            }
        }
    }
    // local refinement in the plane
    let mut step = 0.1 * (1.0 + at.norm());
    for _ in 0..80 {
        let mut improved = false;
        for dz in [
            Complex64::new(step, 0.0),
            Complex64::new(-step, 0.0),
            Complex64::new(0.0, step),
            Complex64::new(0.0, -step),
        ] {
            let v = eval(at + dz);
            if v > best {
                best = v;
                at += dz;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    // the point at infinity: both base weights tend to |c_n| there
    let top = coeffs.last().copied().unwrap_or(0.0).abs();
    if top > 0.0 && coeffs.len() == n as usize + 1 {
        let f = metric.twist.eval([0.0, 0.0, 1.0]);
        best = best.max(top * (-nf * f).exp());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::MetricTwist;

    #[test]
    fn monomials_on_the_circle() {
        // z^k has canonical sup norm 1 for every n >= k
        for (n, k) in [(1u32, 0usize), (3, 2), (8, 8)] {
            let mut c = vec![0.0; k + 1];
            c[k] = 1.0;
            let s = section_sup_norm(&c, n, &AdelicMetric::canonical()).unwrap();
            assert!(s.exact && s.value == 1.0);
        }
    }

    #[test]
    fn one_plus_z_attains_two() {
        let s = section_sup_norm(&[1.0, 1.0], 1, &AdelicMetric::canonical()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
        assert!(s.upper >= 2.0 && s.upper < 2.0 + 1e-4);
    }

    #[test]
    fn fs_monomial_values() {
        // z as a section of O(2): max r/(1+r^2) = 1/2
        let s = section_sup_norm(&[0.0, 1.0], 2, &AdelicMetric::fubini_study()).unwrap();
        assert!(s.exact && (s.value - 0.5).abs() < 1e-15);
        // middle monomial of an even power: 2^{-n/2}
        assert!((fs_monomial_norm(24, 12) - 2f64.powi(-12)).abs() < 1e-18);
        assert_eq!(fs_monomial_norm(5, 0), 1.0);
    }

    #[test]
    fn fs_bracket_contains_truth() {
        // |1 + z^2|/(1+r^2) equals 1 along the real axis, and that is the sup
        let s = section_sup_norm(&[1.0, 0.0, 1.0], 2, &AdelicMetric::fubini_study()).unwrap();
        assert!(s.value <= 1.0 + 1e-12 && s.upper >= 1.0 - 1e-12);
        assert!((s.value - 1.0).abs() < 1e-6, "achieved {}", s.value);
    }

    #[test]
    fn constant_twist_scales_exactly() {
        let c = 0.4;
        let metric = AdelicMetric::canonical().with_twist(MetricTwist::constant(c));
        let n = 3;
        let plain =
            section_sup_norm(&[1.0, 2.0, 0.0, -1.0], n, &AdelicMetric::canonical()).unwrap();
        let twisted = section_sup_norm(&[1.0, 2.0, 0.0, -1.0], n, &metric).unwrap();
        let factor = (-(n as f64) * c).exp();
        assert!((twisted.value - plain.value * factor).abs() < 1e-12);
        assert!((twisted.upper - plain.upper * factor).abs() < 1e-12);
    }

    #[test]
    fn nonconstant_twist_brackets() {
        let metric = AdelicMetric::canonical().with_twist(MetricTwist::monomial(1, 0, 0, 0.2));
        let s = section_sup_norm(&[1.0, 1.0], 1, &metric).unwrap();
        // weight e^{-0.2 u1} on the circle: max of |1+z| e^{-0.2 cos t}
        assert!(s.value > 1.5 && s.value <= s.upper);
        assert!(!s.exact);
        // sandwich bound honors |f| <= 0.2
        assert!(s.upper <= 2.0 * (0.2f64).exp() + 1e-9);
    }

    #[test]
    fn rejects_zero_and_overlong() {
        assert!(section_sup_norm(&[0.0, 0.0], 2, &AdelicMetric::canonical()).is_err());
        assert!(section_sup_norm(&[1.0, 1.0, 1.0], 1, &AdelicMetric::canonical()).is_err());
    }

    #[test]
    fn circle_l2_lower_bound_holds() {
        // sup >= l2 on the circle (Parseval)
        for coeffs in [vec![1.0, -1.0, 1.0], vec![2.0, 0.0, 0.0, 1.0]] {
            let l2: f64 = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            let s = section_sup_norm(&coeffs, coeffs.len() as u32 - 1, &AdelicMetric::canonical())
                .unwrap();
            assert!(s.value >= l2 - 1e-9, "sup {} < l2 {}", s.value, l2);
        }
    }
}
