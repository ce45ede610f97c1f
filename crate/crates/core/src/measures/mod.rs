//! Finite atomic measures on the Riemann sphere and step measures on the
//! real line, with distances, moments, and weak-convergence diagnostics.

mod density;
mod step;
mod wasserstein;

pub use density::{moments_to_circle_density, DensityReport};
pub use step::{wasserstein_line, StepMeasure, StepMomentKind};
pub use wasserstein::{wasserstein_circle, wasserstein_circle_rotation};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// A point of P1(C): a value in the affine chart or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    /// Coordinates on the unit sphere:
    /// u = (2 Re z, 2 Im z, |z|^2 - 1) / (1 + |z|^2), infinity -> (0, 0, 1).
    ///
    /// On the equator |z| = 1 this gives u = (Re z, Im z, 0), so equator
    /// test functions in u restrict to trigonometric polynomials.
    pub fn sphere_coords(&self) -> [f64; 3] {
        match self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let n2 = z.norm_sqr();
                let d = 1.0 + n2;
                [2.0 * z.re / d, 2.0 * z.im / d, (n2 - 1.0) / d]
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpherePoint::Infinity => "inf".to_string(),
            SpherePoint::Finite(z) => format!("{}+{}i", z.re, z.im),
        }
    }
}

/// One weighted atom of an empirical measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub point: SpherePoint,
    pub weight: f64,
}

/// A finite atomic probability measure on the Riemann sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    atoms: Vec<Atom>,
}

impl EmpiricalMeasure {
    /// Validates positivity and total mass 1 (within 1e-12).
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("measure with no atoms".into()));
        }
        if atoms
            .iter()
            .any(|a| a.weight <= 0.0 || !a.weight.is_finite())
        {
            return Err(Error::InvalidInput("atom weights must be positive".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "atom weights sum to {total}, not 1"
            )));
        }
        Ok(EmpiricalMeasure { atoms })
    }

    /// Equal weights 1/d on the given points (a Galois orbit).
    pub fn uniform_on(points: Vec<SpherePoint>) -> Result<Self> {
        let d = points.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty orbit".into()));
        }
        let w = 1.0 / d as f64;
        Self::new(
            points
                .into_iter()
                .map(|point| Atom { point, weight: w })
                .collect(),
        )
    }

    /// Uniform discretization of Haar measure on the unit circle with m
    /// equally spaced atoms.
    pub fn haar_discretization(m: usize) -> Self {
        let w = 1.0 / m as f64;
        let atoms = (0..m)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                Atom {
                    point: SpherePoint::Finite(Complex64::from_polar(1.0, theta)),
                    weight: w,
                }
            })
            .collect();
        EmpiricalMeasure { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// k-th Fourier moment for measures supported on the unit circle:
    /// integral of e^{ik theta}.
    pub fn circle_moment(&self, k: i32) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            let theta = circle_angle(&a.point)?;
            acc += Complex64::from_polar(1.0, k as f64 * theta) * a.weight;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            atoms: self
                .atoms
                .iter()
                .map(|a| match a.point {
                    SpherePoint::Finite(z) => AtomJson {
                        re: Some(z.re),
                        im: Some(z.im),
                        infinity: None,
                        w: a.weight,
                    },
                    SpherePoint::Infinity => AtomJson {
                        re: None,
                        im: None,
                        infinity: Some(true),
                        w: a.weight,
                    },
                })
                .collect(),
        }
    }

    pub fn from_json(json: &MeasureJson) -> Result<Self> {
        let atoms = json
            .atoms
            .iter()
            .map(|a| {
                let point = if a.infinity == Some(true) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(Complex64::new(a.re.unwrap_or(0.0), a.im.unwrap_or(0.0)))
                };
                Atom { point, weight: a.w }
            })
            .collect();
        Self::new(atoms)
    }

    /// CSV rows `re,im,w` (the point at infinity renders as `inf,inf,w`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,w\n");
        for a in &self.atoms {
            match a.point {
                SpherePoint::Finite(z) => {
                    out.push_str(&format!("{:?},{:?},{:?}\n", z.re, z.im, a.weight))
                }
                SpherePoint::Infinity => out.push_str(&format!("inf,inf,{:?}\n", a.weight)),
            }
        }
        out
    }
}

/// Serialized form `{"atoms":[{"re":...,"im":...,"w":...}]}`; the point at
/// infinity uses `{"infinity":true,"w":...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infinity: Option<bool>,
    pub w: f64,
}

/// Integral of a test function against an atomic measure. The function may
/// decline a point (chart singularities), which surfaces as an error.
pub fn integrate<F>(f: F, m: &EmpiricalMeasure) -> Result<f64>
where
    F: Fn(&SpherePoint) -> Option<f64>,
{
    let mut acc = 0.0;
    for a in m.atoms() {
        match f(&a.point) {
            Some(v) if v.is_finite() => acc += a.weight * v,
            _ => return Err(Error::UndefinedAtAtom(a.point.label())),
        }
    }
    Ok(acc)
}

pub(crate) fn circle_angle(p: &SpherePoint) -> Result<f64> {
    const CIRCLE_TOLERANCE: f64 = 1e-9;
    match p {
        SpherePoint::Infinity => Err(Error::OffCircle {
            atom: "inf".to_string(),
            deviation: f64::INFINITY,
        }),
        SpherePoint::Finite(z) => {
            let dev = (z.norm() - 1.0).abs();
            if dev > CIRCLE_TOLERANCE {
                Err(Error::OffCircle {
                    atom: p.label(),
                    deviation: dev,
                })
            } else {
                let mut t = z.im.atan2(z.re);
                if t < 0.0 {
                    t += 2.0 * std::f64::consts::PI;
                }
                Ok(t)
            }
        }
    }
}
