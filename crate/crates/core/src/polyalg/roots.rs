//! Aberth–Ehrlich root finding with double-double Newton polishing and
//! a-posteriori certified error radii.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dd::{horner_with_derivative, Dd, DdComplex};
use super::IntegerPolynomial;
use crate::error::{Error, Result};

const MAX_ABERTH_ITERATIONS: usize = 600;
const ABERTH_STOP: f64 = 1e-15;

/// All complex roots of a polynomial at working precision, with certified
/// per-root error radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub radius_bounds: Vec<f64>,
    pub degree: usize,
}

impl RootSet {
    /// Largest certified radius; non-finite entries poison the result so a
    /// failed certificate can never hide behind NaN-dropping max.
    pub fn max_radius(&self) -> f64 {
        self.radius_bounds.iter().fold(0.0f64, |acc, &r| {
            if r.is_finite() {
                acc.max(r)
            } else {
                f64::INFINITY
            }
        })
    }
}

/// Finds all complex roots with certified radii below `tol`.
///
/// Companion-free path: Aberth–Ehrlich simultaneous iteration seeded on a
/// circle of radius |a_0/a_d|^(1/d), then Newton polishing in double-double
/// arithmetic. The radius bound is the standard a-posteriori estimate
/// d |p(z)/p'(z)| evaluated at extended precision. On certification failure
/// the iteration budget is doubled once before giving up.
pub fn find_roots(p: &IntegerPolynomial, tol: f64) -> Result<RootSet> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput(
            "root tolerance must be positive".into(),
        ));
    }
    let Some(degree) = p.degree() else {
        return Err(Error::InvalidInput(
            "cannot find roots of the zero polynomial".into(),
        ));
    };
    if degree == 0 {
        return Err(Error::InvalidInput(
            "constant polynomial has no roots".into(),
        ));
    }
    if let Some(cached) = cache_lookup(p, tol) {
        return Ok(cached);
    }

    let out = match degree {
        1 => {
            let coeffs = p.coeffs_f64()?;
            let root = Complex64::new(-coeffs[0] / coeffs[1], 0.0);
            let dd = [
                Dd::from_bigint(&p.coeffs()[0]),
                Dd::from_bigint(&p.coeffs()[1]),
            ];
            let (val, dval) = horner_with_derivative(&dd, DdComplex::from_f64(root.re, root.im));
            let radius =
                (val.norm() / dval.norm().max(f64::MIN_POSITIVE)).max(f64::EPSILON * root.norm());
            RootSet {
                roots: vec![root],
                radius_bounds: vec![radius],
                degree: 1,
            }
        }
        _ => aberth_certified(p, tol)?,
    };
    cache_store(p, tol, &out);
    Ok(out)
}

fn aberth_certified(p: &IntegerPolynomial, tol: f64) -> Result<RootSet> {
    let coeffs = p.coeffs_f64()?;
    let degree = coeffs.len() - 1;
    let dd_coeffs: Vec<Dd> = p.coeffs().iter().map(Dd::from_bigint).collect();

    let mut z = initial_guesses(&coeffs);
    let mut budget = MAX_ABERTH_ITERATIONS;
    let mut iterations = 0;
    for attempt in 0..2 {
        iterations += aberth_iterate(&coeffs, &mut z, budget);
        polish(&dd_coeffs, &mut z);
        symmetrize_conjugates(&mut z, &dd_coeffs);
        let radii = certified_radii(&dd_coeffs, &z, degree);
        let max_radius = radii.iter().fold(0.0f64, |acc, &r| {
            if r.is_finite() {
                acc.max(r)
            } else {
                f64::INFINITY
            }
        });
        if max_radius <= tol {
            return Ok(RootSet {
                roots: z,
                radius_bounds: radii,
                degree,
            });
        }
        if attempt == 0 {
            budget *= 2;
        } else {
            let residual = max_residual(&dd_coeffs, &z);
            return Err(Error::RootCertification {
                max_radius,
                tol,
                iterations,
                residual,
            });
        }
    }
    unreachable!()
}

fn initial_guesses(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    let ad = coeffs[degree];
    let a0 = coeffs[0];
    // geometric mean of root moduli; 0 constant term handled with a floor
    let r = if a0 == 0.0 {
        0.5
    } else {
        (a0 / ad).abs().powf(1.0 / degree as f64).clamp(1e-3, 1e3)
    };
    (0..degree)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.45;
            Complex64::from_polar(r, theta)
        })
        .collect()
}

#[inline]
fn horner_f64(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Gauss–Seidel style Aberth sweep; returns the number of iterations used.
///
/// Steps are trust-region capped and divergent iterates are reseeded, so an
/// overflowing evaluation can never park a NaN in the root list.
fn aberth_iterate(coeffs: &[f64], z: &mut [Complex64], budget: usize) -> usize {
    let n = z.len();
    let mut reseeds = 0usize;
    // |z|^degree must stay inside f64 range during Horner
    let blowup = (f64::MAX.ln() / (n.max(2) as f64)).exp() * 0.25;
    for iter in 0..budget {
        let mut worst = 0.0f64;
        for i in 0..n {
            if !z[i].is_finite() || z[i].norm() > blowup {
                reseeds += 1;
                let angle = 2.61803398875 * reseeds as f64;
                z[i] = Complex64::from_polar(1.0 + 0.1 * (reseeds % 7) as f64, angle);
            }
            let (pv, dpv) = horner_f64(coeffs, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let newton = if dpv.norm() == 0.0 {
                // flat derivative: nudge off the stationary point
                Complex64::new(1e-8, 1e-8)
            } else {
                pv / dpv
            };
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let d = z[i] - zj;
                    if d.norm() > 1e-300 {
                        s += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * s;
            let mut w = if denom.norm() < 1e-12 {
                newton
            } else {
                newton / denom
            };
            if !w.is_finite() {
                w = Complex64::new(0.25, 0.25);
            }
            let cap = 0.5 * (1.0 + z[i].norm());
            let wn = w.norm();
            if wn > cap {
                w *= cap / wn;
            }
            z[i] -= w;
            let rel = w.norm() / (1.0 + z[i].norm());
            worst = worst.max(rel);
        }
        if worst < ABERTH_STOP {
            return iter + 1;
        }
    }
    budget
}

/// Newton steps evaluated in double-double, keeping z in f64.
fn polish(dd_coeffs: &[Dd], z: &mut [Complex64]) {
    for zi in z.iter_mut() {
        if !zi.is_finite() {
            continue;
        }
        for _ in 0..4 {
            let (pv, dpv) = horner_with_derivative(dd_coeffs, DdComplex::from_f64(zi.re, zi.im));
            let dn = dpv.norm();
            if dn == 0.0 {
                break;
            }
            let num = Complex64::new(pv.re.to_f64(), pv.im.to_f64());
            let den = Complex64::new(dpv.re.to_f64(), dpv.im.to_f64());
            let step = num / den;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *zi -= step;
            if step.norm() < 1e-17 * (1.0 + zi.norm()) {
                break;
            }
        }
    }
}

/// Pairs roots with their conjugates and snaps near-real roots, so the list
/// is closed under conjugation exactly (real input coefficients).
fn symmetrize_conjugates(z: &mut [Complex64], dd_coeffs: &[Dd]) {
    let n = z.len();
    let mut used = vec![false; n];
    // residual-scale threshold for calling a root real
    for i in 0..n {
        if used[i] {
            continue;
        }
        let (pv, dpv) = horner_with_derivative(dd_coeffs, DdComplex::from_f64(z[i].re, z[i].im));
        let local = if dpv.norm() > 0.0 {
            (n as f64) * pv.norm() / dpv.norm()
        } else {
            f64::INFINITY
        };
        if z[i].im.abs() <= local.max(1e-14 * (1.0 + z[i].norm())) {
            z[i].im = 0.0;
            used[i] = true;
            continue;
        }
        // find the best conjugate partner
        let target = z[i].conj();
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (j, zj) in z.iter().enumerate() {
            if j != i && !used[j] {
                let d = (zj - target).norm();
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        if best != usize::MAX && best_d <= 1e-6 * (1.0 + z[i].norm()) {
            let mean = (z[i] + z[best].conj()) * 0.5;
            z[i] = mean;
            z[best] = mean.conj();
            used[i] = true;
            used[best] = true;
        } else {
            used[i] = true;
        }
    }
}

fn certified_radii(dd_coeffs: &[Dd], z: &[Complex64], degree: usize) -> Vec<f64> {
    z.iter()
        .map(|zi| {
            let (pv, dpv) = horner_with_derivative(dd_coeffs, DdComplex::from_f64(zi.re, zi.im));
            let dn = dpv.norm();
            if dn == 0.0 {
                f64::INFINITY
            } else {
                degree as f64 * pv.norm() / dn
            }
        })
        .collect()
}

fn max_residual(dd_coeffs: &[Dd], z: &[Complex64]) -> f64 {
    z.iter()
        .map(|zi| {
            horner_with_derivative(dd_coeffs, DdComplex::from_f64(zi.re, zi.im))
                .0
                .norm()
        })
        .fold(0.0, f64::max)
}

// --- optional on-disk cache for computed root sets ---

pub const ROOT_CACHE_ENV: &str = "ARAKELOV_ROOT_CACHE";

fn cache_path(p: &IntegerPolynomial, tol: f64) -> Option<PathBuf> {
    let dir = std::env::var_os(ROOT_CACHE_ENV)?;
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut h = DefaultHasher::new();
    p.coeffs().hash(&mut h);
    tol.to_bits().hash(&mut h);
    Some(PathBuf::from(dir).join(format!("roots-{:016x}.json", h.finish())))
}

fn cache_lookup(p: &IntegerPolynomial, tol: f64) -> Option<RootSet> {
    let path = cache_path(p, tol)?;
    let data = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&data).ok()
}

fn cache_store(p: &IntegerPolynomial, tol: f64, roots: &RootSet) {
    let Some(path) = cache_path(p, tol) else {
        return;
    };
    if let Some(parent) = path.parent() {
        let _ = std::fs::create_dir_all(parent);
    }
    if let Ok(json) = serde_json::to_string(roots) {
        let _ = std::fs::write(path, json);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::cyclotomic;

    fn poly(cs: &[i64]) -> IntegerPolynomial {
        IntegerPolynomial::from_i64(cs)
    }

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn sqrt_two() {
        let rs = find_roots(&poly(&[-2, 0, 1]), 1e-12).unwrap();
        let r = sorted_by_re(rs.roots.clone());
        assert!((r[0].re + 2f64.sqrt()).abs() < 1e-12 && r[0].im == 0.0);
        assert!((r[1].re - 2f64.sqrt()).abs() < 1e-12 && r[1].im == 0.0);
        assert!(rs.max_radius() <= 1e-12);
    }

    #[test]
    fn plus_minus_i() {
        let rs = find_roots(&poly(&[1, 0, 1]), 1e-12).unwrap();
        let mut ims: Vec<f64> = rs.roots.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        assert!(rs.roots.iter().all(|z| z.re.abs() < 1e-12));
    }

    #[test]
    fn golden_ratio_roots() {
        let rs = find_roots(&poly(&[-1, -1, 1]), 1e-12).unwrap();
        let r = sorted_by_re(rs.roots.clone());
        assert!((r[0].re - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-13);
        assert!((r[1].re - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn conjugate_closure_and_circle() {
        let p = cyclotomic(101);
        let rs = find_roots(&p, 1e-12).unwrap();
        assert_eq!(rs.roots.len(), 100);
        for z in &rs.roots {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            // exact conjugate present
            assert!(rs.roots.iter().any(|w| *w == z.conj()));
        }
    }

    #[test]
    fn wilkinson_small() {
        // product of (x - k), k = 1..8, built exactly
        let mut p = poly(&[1]);
        for k in 1..=8i64 {
            p = p.mul(&poly(&[-k, 1]));
        }
        let rs = find_roots(&p, 1e-9).unwrap();
        let mut re: Vec<f64> = rs.roots.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, r) in re.iter().enumerate() {
            assert!((r - (i as f64 + 1.0)).abs() < 1e-9, "root {i}: {r}");
        }
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(find_roots(&IntegerPolynomial::zero(), 1e-12).is_err());
        assert!(find_roots(&poly(&[3]), 1e-12).is_err());
    }

    #[test]
    fn large_cyclotomics_stay_finite() {
        // regression: an overflowing Aberth step used to park a NaN root
        // that NaN-dropping max() hid from certification
        for n in [139u32, 157, 173] {
            let rs = find_roots(&cyclotomic(n), 1e-12).unwrap();
            assert!(rs.roots.iter().all(|z| z.is_finite()), "conductor {n}");
            assert!(rs.radius_bounds.iter().all(|r| r.is_finite()));
            assert!(rs.max_radius() <= 1e-12);
        }
    }

    #[test]
    fn reversal_inverts_roots() {
        // roots of the reversal are the inverses of the roots
        let p = poly(&[3, -2, 0, 5]);
        let rs = find_roots(&p, 1e-11).unwrap();
        let rrs = find_roots(&p.reversal(), 1e-11).unwrap();
        for z in &rs.roots {
            let inv = z.inv();
            let hit = rrs
                .roots
                .iter()
                .any(|w| (w - inv).norm() < 1e-8 * (1.0 + inv.norm()));
            assert!(hit, "missing inverse of {z}");
        }
    }
}
