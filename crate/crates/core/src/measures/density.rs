//! Fejér-kernel reconstruction of a circle measure from its Fourier moments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Atom, EmpiricalMeasure, SpherePoint};

const GRID: usize = 512;

/// Nonnegative density approximation (relative to normalized Haar measure
/// d\theta / 2\pi) plus the raw moments it was built from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    /// Grid angles in [0, 2\pi).
    pub grid: Vec<f64>,
    /// Fejér density values relative to uniform (uniform measure is 1).
    pub density: Vec<f64>,
    /// Input moments c_0..c_D, where c_k integrates e^{ik\theta}.
    pub moments: Vec<Complex64>,
}

impl DensityReport {
    /// Largest deviation from the uniform density.
    pub fn sup_deviation_from_uniform(&self) -> f64 {
        self.density
            .iter()
            .map(|d| (d - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Discretizes the density into an atomic measure on the grid (clamping
    /// the tiny negative values a truncated kernel can produce).
    pub fn to_empirical(&self) -> Result<EmpiricalMeasure> {
        let clipped: Vec<f64> = self.density.iter().map(|&d| d.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::Numeric("density vanished after clipping".into()));
        }
        EmpiricalMeasure::new(
            self.grid
                .iter()
                .zip(&clipped)
                .filter(|&(_, &w)| w > 0.0)
                .map(|(&theta, &w)| Atom {
                    point: SpherePoint::Finite(Complex64::from_polar(1.0, theta)),
                    weight: w / total,
                })
                .collect(),
        )
    }
}

/// Builds the degree-D Fejér approximation from moments c_0..c_D (negative
/// moments are implied by Hermitian symmetry c_{-k} = conj(c_k)).
///
/// Requires c_0 = 1 with vanishing imaginary part and |c_k| <= 1.
pub fn moments_to_circle_density(moments: &[Complex64]) -> Result<DensityReport> {
    if moments.is_empty() {
        return Err(Error::NonHermitianMoments("no moments given".into()));
    }
    let c0 = moments[0];
    if (c0.re - 1.0).abs() > 1e-9 || c0.im.abs() > 1e-9 {
        return Err(Error::NonHermitianMoments(format!(
            "c_0 = {c0} must equal 1"
        )));
    }
    if let Some(bad) = moments.iter().find(|c| c.norm() > 1.0 + 1e-9) {
        return Err(Error::NonHermitianMoments(format!(
            "moment {bad} exceeds modulus 1"
        )));
    }
    let cap = moments.len() - 1;
    let mut grid = Vec::with_capacity(GRID);
    let mut density = Vec::with_capacity(GRID);
    for j in 0..GRID {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / GRID as f64;
        let mut rho = 1.0;
        for (k, c) in moments.iter().enumerate().skip(1) {
            let weight = 1.0 - k as f64 / (cap as f64 + 1.0);
            rho += 2.0 * weight * (c * Complex64::from_polar(1.0, -(k as f64) * theta)).re;
        }
        grid.push(theta);
        density.push(rho);
    }
    Ok(DensityReport {
        grid,
        density,
        moments: moments.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{cyclotomic, find_roots};

    #[test]
    fn haar_moments_give_uniform_density() {
        let moments = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let report = moments_to_circle_density(&moments).unwrap();
        assert!(report.sup_deviation_from_uniform() < 1e-12);
    }

    #[test]
    fn dirac_moments_concentrate() {
        let theta0 = 1.1;
        for cap in [4usize, 8, 16] {
            let moments: Vec<Complex64> = (0..=cap)
                .map(|k| Complex64::from_polar(1.0, k as f64 * theta0))
                .collect();
            let report = moments_to_circle_density(&moments).unwrap();
            let (best, _) = report
                .grid
                .iter()
                .zip(&report.density)
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            assert!((best - theta0).abs() < 0.1, "cap {cap}: peak at {best}");
        }
        // peak grows with the truncation degree
        let peak = |cap: usize| {
            let moments: Vec<Complex64> = (0..=cap)
                .map(|k| Complex64::from_polar(1.0, k as f64 * theta0))
                .collect();
            moments_to_circle_density(&moments)
                .unwrap()
                .density
                .into_iter()
                .fold(0.0, f64::max)
        };
        assert!(peak(16) > peak(4));
    }

    #[test]
    fn conductor_101_orbit_is_nearly_uniform_at_degree_8() {
        let roots = find_roots(&cyclotomic(101), 1e-12).unwrap();
        let orbit = EmpiricalMeasure::uniform_on(
            roots.roots.into_iter().map(SpherePoint::Finite).collect(),
        )
        .unwrap();
        let moments: Vec<Complex64> = (0..=8).map(|k| orbit.circle_moment(k).unwrap()).collect();
        let report = moments_to_circle_density(&moments).unwrap();
        // Ramanujan sums put every moment at -1/100, so the deviation stays
        // well under 0.1
        assert!(report.sup_deviation_from_uniform() <= 0.1);
    }

    #[test]
    fn rejects_bad_moment_data() {
        assert!(moments_to_circle_density(&[Complex64::new(0.5, 0.0)]).is_err());
        assert!(moments_to_circle_density(&[Complex64::new(1.0, 0.2)]).is_err());
        assert!(
            moments_to_circle_density(&[Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0)])
                .is_err()
        );
    }

    #[test]
    fn discretization_is_a_probability_measure() {
        let moments = vec![Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.1)];
        let m = moments_to_circle_density(&moments)
            .unwrap()
            .to_empirical()
            .unwrap();
        let total: f64 = m.atoms().iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
