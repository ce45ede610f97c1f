//! Adelic metrics on O(1) over P1, archimedean metric twists, normalized
//! heights of algebraic points, and Galois-orbit measures.
//!
//! Heights are computed from global formulas (Mahler measure and root data)
//! rather than place-by-place sums; finite-place content enters through the
//! leading coefficient of the minimal polynomial. The place carrying twists
//! is the standard archimedean embedding of Q.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{integrate, EmpiricalMeasure, SpherePoint};
use crate::polyalg::{find_roots, IntegerPolynomial, Irreducibility, RootSet};

/// Default root tolerance used when none is configured.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// A continuous function on the Riemann sphere, written as a polynomial in
/// the sphere coordinates u = (u1, u2, u3); f(u) = sum a_ijk u1^i u2^j u3^k.
///
/// The zero twist is the trivial metric. Twists form an additive group, and
/// products stay in the family, which makes the dictionary closed under the
/// operations the additivity test needs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTwist {
    coeffs: BTreeMap<(u32, u32, u32), f64>,
}

impl MetricTwist {
    pub fn zero() -> Self {
        MetricTwist::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut t = MetricTwist::default();
        if c != 0.0 {
            t.coeffs.insert((0, 0, 0), c);
        }
        t
    }

    /// `a * u1^i u2^j u3^k`.
    pub fn monomial(i: u32, j: u32, k: u32, a: f64) -> Self {
        let mut t = MetricTwist::default();
        if a != 0.0 {
            t.coeffs.insert((i, j, k), a);
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Some(c) when the twist is the constant c (including zero).
    pub fn as_constant(&self) -> Option<f64> {
        match self.coeffs.len() {
            0 => Some(0.0),
            1 => self.coeffs.get(&(0, 0, 0)).copied(),
            _ => None,
        }
    }

    pub fn degree_bound(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|&(i, j, k)| i + j + k)
            .max()
            .unwrap_or(0)
    }

    /// Certified bound on |f| over the sphere: sum of |a_ijk| (each |u_i| <= 1).
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.values().map(|a| a.abs()).sum()
    }

    pub fn eval(&self, u: [f64; 3]) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(i, j, k), &a)| {
                a * u[0].powi(i as i32) * u[1].powi(j as i32) * u[2].powi(k as i32)
            })
            .sum()
    }

    pub fn eval_point(&self, p: &SpherePoint) -> f64 {
        self.eval(p.sphere_coords())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&key, &a) in &other.coeffs {
            let entry = out.coeffs.entry(key).or_insert(0.0);
            *entry += a;
            if *entry == 0.0 {
                out.coeffs.remove(&key);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        MetricTwist {
            coeffs: self.coeffs.iter().map(|(&k, &a)| (k, -a)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return MetricTwist::zero();
        }
        MetricTwist {
            coeffs: self.coeffs.iter().map(|(&k, &a)| (k, s * a)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MetricTwist::default();
        for (&(i1, j1, k1), &a) in &self.coeffs {
            for (&(i2, j2, k2), &b) in &other.coeffs {
                let key = (i1 + i2, j1 + j2, k1 + k2);
                let entry = out.coeffs.entry(key).or_insert(0.0);
                *entry += a * b;
                if *entry == 0.0 {
                    out.coeffs.remove(&key);
                }
            }
        }
        out
    }

    /// Compact label like `u1^2*u3` used in verdict reports.
    pub fn label(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (&(i, j, k), &a) in &self.coeffs {
            let mut term = String::new();
            if (a - 1.0).abs() > 1e-12 || (i, j, k) == (0, 0, 0) {
                term.push_str(&format!("{a}"));
            }
            for (e, name) in [(i, "u1"), (j, "u2"), (k, "u3")] {
                if e == 1 {
                    if !term.is_empty() {
                        term.push('*');
                    }
                    term.push_str(name);
                } else if e > 1 {
                    if !term.is_empty() {
                        term.push('*');
                    }
                    term.push_str(&format!("{name}^{e}"));
                }
            }
            parts.push(term);
        }
        parts.join(" + ")
    }

    pub fn to_json(&self) -> TwistJson {
        TwistJson {
            degree_bound: self.degree_bound(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j, k), &a)| TwistCoeffJson { i, j, k, a })
                .collect(),
        }
    }

    pub fn from_json(json: &TwistJson) -> Result<Self> {
        let mut t = MetricTwist::default();
        for c in &json.coeffs {
            if c.i + c.j + c.k > json.degree_bound {
                return Err(Error::Schema(format!(
                    "twist coefficient ({},{},{}) exceeds the declared degree bound {}",
                    c.i, c.j, c.k, json.degree_bound
                )));
            }
            if c.a != 0.0 {
                *t.coeffs.entry((c.i, c.j, c.k)).or_insert(0.0) += c.a;
            }
        }
        Ok(t)
    }
}

/// Serialized twist `{"D":…,"coeffs":[{"i":…,"j":…,"k":…,"a":…}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistJson {
    #[serde(rename = "D")]
    pub degree_bound: u32,
    #[serde(default)]
    pub coeffs: Vec<TwistCoeffJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistCoeffJson {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub a: f64,
}

/// Choice of archimedean base metric on O(1); finite places always carry the
/// standard integral model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricBase {
    /// Weil/model metric |s(z)| / max(1, |z|).
    Canonical,
    /// Fubini-Study metric |s(z)| / (1 + |z|^2)^(1/2).
    FubiniStudy,
}

/// Metric data on O(1): a base metric plus an archimedean polynomial twist
/// scaling the norm of the unit section by e^{-f}.
#[derive(Debug, Clone, PartialEq)]
pub struct AdelicMetric {
    pub base: MetricBase,
    pub twist: MetricTwist,
}

impl AdelicMetric {
    pub fn canonical() -> Self {
        AdelicMetric {
            base: MetricBase::Canonical,
            twist: MetricTwist::zero(),
        }
    }

    pub fn fubini_study() -> Self {
        AdelicMetric {
            base: MetricBase::FubiniStudy,
            twist: MetricTwist::zero(),
        }
    }

    pub fn with_twist(&self, twist: MetricTwist) -> Self {
        AdelicMetric {
            base: self.base,
            twist,
        }
    }

    /// Adds a further twist (tensor with O_sigma(f)).
    pub fn twisted_by(&self, f: &MetricTwist) -> Self {
        AdelicMetric {
            base: self.base,
            twist: self.twist.add(f),
        }
    }

    pub fn to_json(&self) -> MetricJson {
        MetricJson {
            base: self.base,
            twist: Some(self.twist.to_json()),
        }
    }

    pub fn from_json(json: &MetricJson) -> Result<Self> {
        Ok(AdelicMetric {
            base: json.base,
            twist: match &json.twist {
                Some(t) => MetricTwist::from_json(t)?,
                None => MetricTwist::zero(),
            },
        })
    }

    pub fn label(&self) -> String {
        let base = match self.base {
            MetricBase::Canonical => "canonical",
            MetricBase::FubiniStudy => "fubini-study",
        };
        if self.twist.is_zero() {
            base.to_string()
        } else {
            format!("{base} + twist({})", self.twist.label())
        }
    }
}

/// Serialized metric `{"base":"canonical"|"fubini-study","twist":{…}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricJson {
    pub base: MetricBase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist: Option<TwistJson>,
}

/// An algebraic point of P1 over Q-bar, defined by its primitive minimal
/// polynomial, or the point at infinity.
#[derive(Debug)]
pub struct AlgebraicPoint {
    repr: PointRepr,
    tol: f64,
}

#[derive(Debug)]
enum PointRepr {
    Infinity,
    Finite {
        poly: IntegerPolynomial,
        irreducibility: Irreducibility,
        roots: OnceLock<RootSet>,
    },
}

impl Clone for AlgebraicPoint {
    fn clone(&self) -> Self {
        AlgebraicPoint {
            tol: self.tol,
            repr: match &self.repr {
                PointRepr::Infinity => PointRepr::Infinity,
                PointRepr::Finite {
                    poly,
                    irreducibility,
                    roots,
                } => PointRepr::Finite {
                    poly: poly.clone(),
                    irreducibility: *irreducibility,
                    roots: match roots.get() {
                        Some(r) => OnceLock::from(r.clone()),
                        None => OnceLock::new(),
                    },
                },
            },
        }
    }
}

impl AlgebraicPoint {
    /// Builds a point from a defining polynomial, normalizing to the
    /// primitive form and rejecting polynomials a cheap screen proves
    /// reducible. Screens that stay silent leave the point tagged
    /// `Irreducibility::Assumed` (heights remain well defined per-root).
    pub fn from_polynomial(poly: IntegerPolynomial, tol: f64) -> Result<Self> {
        let Some(d) = poly.degree() else {
            return Err(Error::InvalidInput(
                "zero polynomial defines no point".into(),
            ));
        };
        if d == 0 {
            return Err(Error::InvalidInput(
                "constant polynomial defines no point".into(),
            ));
        }
        let poly = poly.primitive();
        let irreducibility = poly.irreducibility();
        if irreducibility == Irreducibility::Reducible {
            return Err(Error::InvalidInput(format!(
                "{} is reducible; points need irreducible minimal polynomials",
                poly.display()
            )));
        }
        Ok(AlgebraicPoint {
            repr: PointRepr::Finite {
                poly,
                irreducibility,
                roots: OnceLock::new(),
            },
            tol,
        })
    }

    pub fn infinity() -> Self {
        AlgebraicPoint {
            repr: PointRepr::Infinity,
            tol: DEFAULT_ROOT_TOL,
        }
    }

    pub fn rational(value: i64) -> Self {
        AlgebraicPoint::from_polynomial(IntegerPolynomial::from_i64(&[-value, 1]), DEFAULT_ROOT_TOL)
            .expect("linear polynomials are irreducible")
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self.repr, PointRepr::Infinity)
    }

    /// Degree of the defining field (1 for rational points and infinity).
    pub fn degree(&self) -> usize {
        match &self.repr {
            PointRepr::Infinity => 1,
            PointRepr::Finite { poly, .. } => poly.degree().unwrap(),
        }
    }

    pub fn minimal_polynomial(&self) -> Option<&IntegerPolynomial> {
        match &self.repr {
            PointRepr::Infinity => None,
            PointRepr::Finite { poly, .. } => Some(poly),
        }
    }

    pub fn irreducibility(&self) -> Irreducibility {
        match &self.repr {
            PointRepr::Infinity => Irreducibility::Verified,
            PointRepr::Finite { irreducibility, .. } => *irreducibility,
        }
    }

    pub fn label(&self) -> String {
        match &self.repr {
            PointRepr::Infinity => "infinity".to_string(),
            PointRepr::Finite { poly, .. } => poly.display(),
        }
    }

    fn root_set(&self) -> Result<&RootSet> {
        match &self.repr {
            PointRepr::Infinity => Err(Error::InvalidInput(
                "the point at infinity has no root data".into(),
            )),
            PointRepr::Finite { poly, roots, .. } => {
                if let Some(r) = roots.get() {
                    return Ok(r);
                }
                let computed = find_roots(poly, self.tol)?;
                let _ = roots.set(computed);
                Ok(roots.get().expect("just set"))
            }
        }
    }

    /// The Galois-orbit measure: equal weights 1/d on the conjugates under
    /// the standard embedding.
    pub fn orbit_measure(&self) -> Result<EmpiricalMeasure> {
        match &self.repr {
            PointRepr::Infinity => EmpiricalMeasure::uniform_on(vec![SpherePoint::Infinity]),
            PointRepr::Finite { .. } => {
                let roots = self.root_set()?;
                EmpiricalMeasure::uniform_on(
                    roots
                        .roots
                        .iter()
                        .map(|&z| SpherePoint::Finite(z))
                        .collect(),
                )
            }
        }
    }

    /// Orbit average of a twist function (the height shift it induces).
    pub fn twist_integral(&self, twist: &MetricTwist) -> Result<f64> {
        if twist.is_zero() {
            return Ok(0.0);
        }
        match &self.repr {
            PointRepr::Infinity => Ok(twist.eval([0.0, 0.0, 1.0])),
            PointRepr::Finite { .. } => {
                let roots = self.root_set()?;
                let d = roots.roots.len() as f64;
                Ok(roots
                    .roots
                    .iter()
                    .map(|&z| twist.eval(SpherePoint::Finite(z).sphere_coords()))
                    .sum::<f64>()
                    / d)
            }
        }
    }

    /// Normalized height with respect to the metric (the normalized Arakelov
    /// degree of the pullback).
    pub fn height(&self, metric: &AdelicMetric) -> Result<f64> {
        let base = match &self.repr {
            PointRepr::Infinity => 0.0,
            PointRepr::Finite { poly, .. } => {
                let d = poly.degree().unwrap() as f64;
                let roots = self.root_set()?;
                match metric.base {
                    MetricBase::Canonical => {
                        let mut acc = poly.log_abs_leading();
                        for z in &roots.roots {
                            let r = z.norm();
                            if r > 1.0 {
                                acc += r.ln();
                            }
                        }
                        acc / d
                    }
                    MetricBase::FubiniStudy => {
                        let sum: f64 = roots
                            .roots
                            .iter()
                            .map(|z| 0.5 * (1.0 + z.norm_sqr()).ln())
                            .sum();
                        (poly.log_abs_leading() + sum) / d
                    }
                }
            }
        };
        Ok(base + self.twist_integral(&metric.twist)?)
    }
}

/// Report of the additivity check h_{L tensor O(g)}(x) = h_L(x) + int g d eta_x.
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub twisted_height: f64,
    pub base_height: f64,
    pub twist_integral: f64,
    pub gap: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Verifies additivity of heights under tensoring with a metric twist, the
/// two sides computed through independent code paths (height formula vs
/// measure integration).
pub fn height_additivity_check(
    x: &AlgebraicPoint,
    metric: &AdelicMetric,
    g: &MetricTwist,
) -> Result<AdditivityReport> {
    const TOL: f64 = 1e-10;
    let twisted = x.height(&metric.twisted_by(g))?;
    let base = x.height(metric)?;
    let orbit = x.orbit_measure()?;
    let integral = integrate(|p| Some(g.eval_point(p)), &orbit)?;
    let gap = (twisted - base - integral).abs();
    Ok(AdditivityReport {
        twisted_height: twisted,
        base_height: base,
        twist_integral: integral,
        gap,
        tol: TOL,
        pass: gap <= TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::cyclotomic;

    fn point(cs: &[i64]) -> AlgebraicPoint {
        AlgebraicPoint::from_polynomial(IntegerPolynomial::from_i64(cs), 1e-12).unwrap()
    }

    fn cyclotomic_point(n: u32) -> AlgebraicPoint {
        AlgebraicPoint::from_polynomial(cyclotomic(n), 1e-12).unwrap()
    }

    #[test]
    fn orbit_measures_match_roots() {
        let m = point(&[-2, 1]).orbit_measure().unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.atoms()[0].weight, 1.0);

        let m4 = cyclotomic_point(4).orbit_measure().unwrap();
        assert_eq!(m4.len(), 2);
        assert!(m4.atoms().iter().all(|a| (a.weight - 0.5).abs() < 1e-15));
        assert!(m4
            .atoms()
            .iter()
            .any(|a| matches!(a.point, SpherePoint::Finite(z) if (z.im - 1.0).abs() < 1e-12)));

        let m5 = cyclotomic_point(5).orbit_measure().unwrap();
        assert_eq!(m5.len(), 4);
        assert!(m5.atoms().iter().all(|a| (a.weight - 0.25).abs() < 1e-15));
    }

    #[test]
    fn canonical_height_of_two_is_log_two() {
        let h = point(&[-2, 1]).height(&AdelicMetric::canonical()).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn torsion_points_have_height_zero() {
        for n in [1u32, 2, 3, 12, 30, 101] {
            let h = cyclotomic_point(n)
                .height(&AdelicMetric::canonical())
                .unwrap();
            assert!(h.abs() < 1e-10, "conductor {n}: {h:e}");
        }
    }

    #[test]
    fn fubini_study_height_of_one() {
        let h = point(&[-1, 1])
            .height(&AdelicMetric::fubini_study())
            .unwrap();
        assert!((h - 0.5 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn golden_ratio_height() {
        // half the Mahler measure of x^2 - x - 1
        let h = point(&[-1, -1, 1])
            .height(&AdelicMetric::canonical())
            .unwrap();
        assert!((h - 0.24060591252980174).abs() < 1e-12);
    }

    #[test]
    fn equator_twist_shifts_by_real_part_average() {
        let metric = AdelicMetric::canonical().with_twist(MetricTwist::monomial(1, 0, 0, 1.0));
        let h = cyclotomic_point(3).height(&metric).unwrap();
        assert!((h + 0.5).abs() < 1e-12);
    }

    #[test]
    fn infinity_heights() {
        let inf = AlgebraicPoint::infinity();
        assert_eq!(inf.height(&AdelicMetric::canonical()).unwrap(), 0.0);
        assert_eq!(inf.height(&AdelicMetric::fubini_study()).unwrap(), 0.0);
        let twisted = AdelicMetric::canonical().with_twist(MetricTwist::monomial(0, 0, 1, 2.0));
        assert!((inf.height(&twisted).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unit_inversion_invariance() {
        // constant term +-1: the reversal defines 1/alpha, canonical heights
        // agree
        let p = IntegerPolynomial::from_i64(&[1, 1, -4, 1]);
        let q = p.reversal();
        let hp = AlgebraicPoint::from_polynomial(p, 1e-12)
            .unwrap()
            .height(&AdelicMetric::canonical())
            .unwrap();
        let hq = AlgebraicPoint::from_polynomial(q, 1e-12)
            .unwrap()
            .height(&AdelicMetric::canonical())
            .unwrap();
        assert!((hp - hq).abs() < 1e-11);
        // 2 and 1/2 both have canonical height log 2
        let h_half = point(&[-1, 2]).height(&AdelicMetric::canonical()).unwrap();
        assert!((h_half - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn negation_invariance() {
        let p = IntegerPolynomial::from_i64(&[3, -1, 2]);
        let h1 = AlgebraicPoint::from_polynomial(p.clone(), 1e-12)
            .unwrap()
            .height(&AdelicMetric::canonical())
            .unwrap();
        let h2 = AlgebraicPoint::from_polynomial(p.neg(), 1e-12)
            .unwrap()
            .height(&AdelicMetric::canonical())
            .unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn fubini_study_dominates_canonical() {
        // max(1,|z|)^2 <= 1 + |z|^2 pointwise
        for cs in [
            vec![-2i64, 1],
            vec![-1, -1, 1],
            vec![5, 0, -3, 1],
            vec![1, 1, 1, 1, 1],
            vec![7, -2, 9],
        ] {
            let x = point(&cs);
            let hc = x.height(&AdelicMetric::canonical()).unwrap();
            let hf = x.height(&AdelicMetric::fubini_study()).unwrap();
            assert!(hf >= hc - 1e-12, "{cs:?}: fs={hf} can={hc}");
        }
    }

    #[test]
    fn additivity_of_twisted_heights() {
        let x = cyclotomic_point(7);
        // constant twist shifts by exactly c
        let report =
            height_additivity_check(&x, &AdelicMetric::canonical(), &MetricTwist::constant(0.35))
                .unwrap();
        assert!(report.pass && (report.twist_integral - 0.35).abs() < 1e-12);

        // u3 vanishes on unit-circle orbits
        let report = height_additivity_check(
            &x,
            &AdelicMetric::canonical(),
            &MetricTwist::monomial(0, 0, 1, 1.0),
        )
        .unwrap();
        assert!(report.pass && report.twist_integral.abs() < 1e-12);

        // degree-2 twist against a twisted base metric
        let base = AdelicMetric::fubini_study().with_twist(MetricTwist::monomial(1, 1, 0, 0.25));
        let g = MetricTwist::monomial(2, 0, 0, -0.7)
            .add(&MetricTwist::monomial(0, 1, 1, 0.4))
            .add(&MetricTwist::constant(0.1));
        let report = height_additivity_check(&point(&[-1, -1, 1]), &base, &g).unwrap();
        assert!(report.pass, "gap {:e}", report.gap);
    }

    #[test]
    fn metric_json_schema() {
        let m = AdelicMetric::canonical().with_twist(
            MetricTwist::monomial(1, 0, 0, 1.0).add(&MetricTwist::monomial(0, 0, 2, -0.5)),
        );
        let json = serde_json::to_string(&m.to_json()).unwrap();
        assert!(json.contains("\"base\":\"canonical\""));
        assert!(json.contains("\"D\":2"));
        let back = AdelicMetric::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(m, back);
        // missing twist means the trivial one
        let bare: MetricJson = serde_json::from_str(r#"{"base":"fubini-study"}"#).unwrap();
        assert!(AdelicMetric::from_json(&bare).unwrap().twist.is_zero());
    }

    #[test]
    fn reducible_polynomials_rejected() {
        let err = AlgebraicPoint::from_polynomial(IntegerPolynomial::from_i64(&[2, -3, 1]), 1e-12);
        assert!(err.is_err());
    }

    #[test]
    fn twist_algebra() {
        let f = MetricTwist::monomial(1, 0, 0, 2.0);
        let g = MetricTwist::monomial(0, 1, 0, 3.0);
        let fg = f.mul(&g);
        assert_eq!(fg.eval([0.5, 0.25, 0.0]), 2.0 * 0.5 * 3.0 * 0.25);
        assert!(f.add(&f.neg()).is_zero());
        assert_eq!(MetricTwist::constant(1.5).as_constant(), Some(1.5));
        assert_eq!(f.as_constant(), None);
        assert_eq!(f.label(), "2*u1");
    }
}
