//! Exact integer harness for differentiability of positively homogeneous
//! functions on semigroups: super-additive functions sandwiched above an
//! additive one are differentiable where they touch, and the difference
//! sequences f(nx+w) - f(nx) increase monotonically. Everything here is
//! integer arithmetic, so the monotonicity and limit assertions are exact.

use serde::Serialize;

use crate::error::{Error, Result};

/// Positively homogeneous integer functions on Z^k. Min-of-linear-forms is
/// the super-additive workhorse; sums keep the family closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemigroupFunction {
    LinearForm { coeffs: Vec<i64> },
    MinOfLinearForms { forms: Vec<Vec<i64>> },
    Sum(Box<SemigroupFunction>, Box<SemigroupFunction>),
}

impl SemigroupFunction {
    pub fn dimension(&self) -> usize {
        match self {
            SemigroupFunction::LinearForm { coeffs } => coeffs.len(),
            SemigroupFunction::MinOfLinearForms { forms } => forms.first().map_or(0, |f| f.len()),
            SemigroupFunction::Sum(a, _) => a.dimension(),
        }
    }

    pub fn eval(&self, x: &[i64]) -> i128 {
        match self {
            SemigroupFunction::LinearForm { coeffs } => dot(coeffs, x),
            SemigroupFunction::MinOfLinearForms { forms } => forms
                .iter()
                .map(|f| dot(f, x))
                .min()
                .expect("at least one form"),
            SemigroupFunction::Sum(a, b) => a.eval(x) + b.eval(x),
        }
    }

    /// Whether f(a+b) >= f(a)+f(b) holds structurally (true for linear
    /// forms, minima of linear forms, and sums of such).
    pub fn is_superadditive(&self) -> bool {
        match self {
            SemigroupFunction::LinearForm { .. } => true,
            SemigroupFunction::MinOfLinearForms { .. } => true,
            SemigroupFunction::Sum(a, b) => a.is_superadditive() && b.is_superadditive(),
        }
    }

    pub fn is_additive(&self) -> bool {
        match self {
            SemigroupFunction::LinearForm { .. } => true,
            SemigroupFunction::MinOfLinearForms { forms } => forms.len() <= 1,
            SemigroupFunction::Sum(a, b) => a.is_additive() && b.is_additive(),
        }
    }
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Membership predicate of a sub-semigroup of Z^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemigroupPredicate {
    All,
    /// { x : x_index >= bound } (bound >= 1 keeps it a semigroup away from 0).
    CoordinateAtLeast {
        index: usize,
        bound: i64,
    },
    /// { x : <form, x> >= bound }.
    HalfSpace {
        form: Vec<i64>,
        bound: i64,
    },
    And(Vec<SemigroupPredicate>),
}

impl SemigroupPredicate {
    pub fn contains(&self, x: &[i64]) -> bool {
        match self {
            SemigroupPredicate::All => true,
            SemigroupPredicate::CoordinateAtLeast { index, bound } => x[*index] >= *bound,
            SemigroupPredicate::HalfSpace { form, bound } => dot(form, x) >= *bound as i128,
            SemigroupPredicate::And(ps) => ps.iter().all(|p| p.contains(x)),
        }
    }
}

/// Exact difference-sequence report of the sandwich criterion.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// First n with nx + w inside the semigroup from there on.
    pub n0: usize,
    /// f(nx + w) - f(nx) for n in [n0, n_max].
    pub differences: Vec<i64>,
    /// Exact monotone non-decrease (the super-additivity consequence).
    pub monotone: bool,
    /// The tail of the difference sequence is constant.
    pub stabilized: bool,
    pub limit: Option<i64>,
    /// D_x g(w) = g(w) of the dominating additive function, when given.
    pub dominating_value: Option<i64>,
    /// limit == dominating value (the sandwich conclusion D_x f = D_x g).
    pub matches_dominating: Option<bool>,
}

/// Runs the difference sequence f(nx+w) - f(nx) for n0 <= n <= n_max,
/// asserting exact monotonicity; when a dominating additive g touching f at
/// x is supplied, reports whether the stabilized limit equals g(w).
pub fn sandwich_differential(
    f: &SemigroupFunction,
    g: Option<&SemigroupFunction>,
    domain: &SemigroupPredicate,
    x: &[i64],
    w: &[i64],
    n_max: usize,
) -> Result<SandwichReport> {
    if !f.is_superadditive() {
        return Err(Error::Semigroup(
            "sandwich criterion needs a super-additive function".into(),
        ));
    }
    if !domain.contains(x) {
        return Err(Error::Semigroup(
            "base point is not in the semigroup".into(),
        ));
    }
    if let Some(g) = g {
        if !g.is_additive() {
            return Err(Error::Semigroup(
                "dominating function must be additive".into(),
            ));
        }
        // domination and touching are exact integer checks at the base point
        if g.eval(x) != f.eval(x) {
            return Err(Error::Semigroup(
                "dominating function must touch f at the base point".into(),
            ));
        }
    }
    if n_max == 0 {
        return Err(Error::Semigroup("n_max must be positive".into()));
    }
    // membership scan: the semigroup is open w.r.t. the ambient group, so
    // nx + w stays inside from some n0 on; find the last failure
    let mut member = Vec::with_capacity(n_max);
    let mut shifted = vec![0i64; x.len()];
    for n in 1..=n_max {
        for (i, s) in shifted.iter_mut().enumerate() {
            *s = (n as i64) * x[i] + w[i];
        }
        member.push(domain.contains(&shifted));
    }
    let n0 = match member.iter().rposition(|&m| !m) {
        None => 1,
        Some(last_false) if last_false + 2 <= n_max => last_false + 2,
        Some(_) => {
            return Err(Error::Semigroup(format!(
                "no n <= {n_max} with nx + w in the semigroup from there on"
            )))
        }
    };
    let mut differences = Vec::with_capacity(n_max - n0 + 1);
    for n in n0..=n_max {
        let shifted: Vec<i64> = x
            .iter()
            .zip(w)
            .map(|(&xi, &wi)| (n as i64) * xi + wi)
            .collect();
        let scaled: Vec<i64> = x.iter().map(|&xi| (n as i64) * xi).collect();
        let d = f.eval(&shifted) - f.eval(&scaled);
        differences.push(i64::try_from(d).map_err(|_| {
            Error::Semigroup("difference overflowed i64; shrink the inputs".into())
        })?);
    }
    let monotone = differences.windows(2).all(|p| p[1] >= p[0]);
    let stabilized = differences.len() >= 2
        && differences[differences.len() - 1] == differences[differences.len() - 2];
    let limit = if stabilized {
        Some(differences[differences.len() - 1])
    } else {
        None
    };
    let dominating_value =
        g.map(|g| i64::try_from(g.eval(w)).expect("dominating value fits i64 for i64 inputs"));
    let matches_dominating = match (limit, dominating_value) {
        (Some(l), Some(d)) => Some(l == d),
        _ => None,
    };
    Ok(SandwichReport {
        n0,
        differences,
        monotone,
        stabilized,
        limit,
        dominating_value,
        matches_dominating,
    })
}

/// One additivity probe of the differential w -> lim f(nx+w) - f(nx).
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityProbe {
    pub w1: Vec<i64>,
    pub w2: Vec<i64>,
    pub limit_w1: i64,
    pub limit_w2: i64,
    pub limit_sum: i64,
    /// limit(w1 + w2) == limit(w1) + limit(w2).
    pub additive: bool,
}

/// Probes additivity of the differential at x on the given direction pairs;
/// a strict super-additivity gap (limit_sum > limit_w1 + limit_w2) is the
/// exact signature of non-differentiability at a tie point.
pub fn differential_additivity_probe(
    f: &SemigroupFunction,
    domain: &SemigroupPredicate,
    x: &[i64],
    pairs: &[(Vec<i64>, Vec<i64>)],
    n_max: usize,
) -> Result<Vec<AdditivityProbe>> {
    let mut out = Vec::with_capacity(pairs.len());
    for (w1, w2) in pairs {
        let sum: Vec<i64> = w1.iter().zip(w2).map(|(a, b)| a + b).collect();
        let r1 = sandwich_differential(f, None, domain, x, w1, n_max)?;
        let r2 = sandwich_differential(f, None, domain, x, w2, n_max)?;
        let rs = sandwich_differential(f, None, domain, x, &sum, n_max)?;
        let (Some(l1), Some(l2), Some(ls)) = (r1.limit, r2.limit, rs.limit) else {
            return Err(Error::Semigroup(
                "difference sequences did not stabilize within the horizon".into(),
            ));
        };
        out.push(AdditivityProbe {
            w1: w1.clone(),
            w2: w2.clone(),
            limit_w1: l1,
            limit_w2: l2,
            limit_sum: ls,
            additive: ls == l1 + l2,
        });
    }
    Ok(out)
}

/// Samples of the coincidence forced by the sandwich lemma: a super-additive
/// phi dominating an additive psi on a subgroup, finite somewhere, must
/// coincide with it.
#[derive(Debug, Clone, Serialize)]
pub struct CoincidenceReport {
    /// (element, phi value, psi value) triples.
    pub samples: Vec<(Vec<i64>, i64, i64)>,
    pub dominated: bool,
    pub coincides: bool,
}

/// Checks phi >= psi and phi == psi on the sampled subgroup elements (the
/// lemma says domination plus additivity forces equality; a strict
/// domination sample would witness a violation).
pub fn superadditive_coincidence_check(
    phi: &SemigroupFunction,
    psi: &SemigroupFunction,
    subgroup_samples: &[Vec<i64>],
) -> Result<CoincidenceReport> {
    if !phi.is_superadditive() || !psi.is_additive() {
        return Err(Error::Semigroup(
            "coincidence check needs super-additive phi and additive psi".into(),
        ));
    }
    let mut samples = Vec::with_capacity(subgroup_samples.len());
    let mut dominated = true;
    let mut coincides = true;
    for h in subgroup_samples {
        let p = phi.eval(h);
        let q = psi.eval(h);
        dominated &= p >= q;
        coincides &= p == q;
        samples.push((
            h.clone(),
            i64::try_from(p).map_err(|_| Error::Semigroup("phi overflow".into()))?,
            i64::try_from(q).map_err(|_| Error::Semigroup("psi overflow".into()))?,
        ));
        // the subgroup is closed under negation; sample both signs
        let neg: Vec<i64> = h.iter().map(|&v| -v).collect();
        let pn = phi.eval(&neg);
        let qn = psi.eval(&neg);
        dominated &= pn >= qn;
        coincides &= pn == qn;
    }
    Ok(CoincidenceReport {
        samples,
        dominated,
        coincides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_forms(forms: &[&[i64]]) -> SemigroupFunction {
        SemigroupFunction::MinOfLinearForms {
            forms: forms.iter().map(|f| f.to_vec()).collect(),
        }
    }

    fn first_coordinate_positive() -> SemigroupPredicate {
        SemigroupPredicate::CoordinateAtLeast { index: 0, bound: 1 }
    }

    #[test]
    fn unique_minimizer_stabilizes_at_its_form() {
        // f(a,b) = min(a, b) on {a >= 1}, x = (2,1): the second form is the
        // unique minimizer, so differences stabilize at w_2
        let f = min_forms(&[&[1, 0], &[0, 1]]);
        let g = SemigroupFunction::LinearForm { coeffs: vec![0, 1] };
        for w in [[5i64, -3], [0, 7], [-2, -2], [11, 4]] {
            let r =
                sandwich_differential(&f, Some(&g), &first_coordinate_positive(), &[2, 1], &w, 60)
                    .unwrap();
            assert!(r.monotone);
            assert_eq!(r.limit, Some(w[1]));
            assert_eq!(r.matches_dominating, Some(true));
        }
    }

    #[test]
    fn tie_point_gives_min_of_directions() {
        // x = (1,1) ties both forms; differences stabilize at min(w1, w2)
        let f = min_forms(&[&[1, 0], &[0, 1]]);
        for w in [[3i64, -1], [-4, 2], [5, 5]] {
            let r = sandwich_differential(&f, None, &first_coordinate_positive(), &[1, 1], &w, 60)
                .unwrap();
            assert!(r.monotone);
            assert_eq!(r.limit, Some(w[0].min(w[1])));
        }
        // and the differential is not additive: w1 = (1,0), w2 = (0,1)
        let probes = differential_additivity_probe(
            &f,
            &first_coordinate_positive(),
            &[1, 1],
            &[(vec![1, 0], vec![0, 1])],
            60,
        )
        .unwrap();
        assert!(!probes[0].additive);
        assert!(probes[0].limit_sum > probes[0].limit_w1 + probes[0].limit_w2);
    }

    #[test]
    fn linear_functions_have_constant_differences() {
        let f = SemigroupFunction::LinearForm {
            coeffs: vec![3, -2],
        };
        let r = sandwich_differential(&f, Some(&f), &SemigroupPredicate::All, &[4, 1], &[1, 1], 20)
            .unwrap();
        assert!(r.differences.iter().all(|&d| d == 1));
        assert_eq!(r.matches_dominating, Some(true));
    }

    #[test]
    fn membership_scan_finds_entry_point() {
        // x = (1, 0), w = (-5, 0): nx + w enters {a >= 1} at n = 6
        let f = min_forms(&[&[1, 0], &[0, 1]]);
        let r = sandwich_differential(
            &f,
            None,
            &first_coordinate_positive(),
            &[1, 0],
            &[-5, 0],
            30,
        )
        .unwrap();
        assert_eq!(r.n0, 6);
        let err = sandwich_differential(
            &f,
            None,
            &first_coordinate_positive(),
            &[1, 0],
            &[-100, 0],
            30,
        );
        assert!(err.is_err());
    }

    #[test]
    fn base_point_outside_semigroup_rejected() {
        let f = min_forms(&[&[1, 0], &[0, 1]]);
        let err =
            sandwich_differential(&f, None, &first_coordinate_positive(), &[0, 5], &[1, 1], 10);
        assert!(err.is_err());
    }

    #[test]
    fn dominating_function_must_touch() {
        let f = min_forms(&[&[1, 0], &[0, 1]]);
        let wrong = SemigroupFunction::LinearForm { coeffs: vec![1, 0] };
        // at x = (2,1), f(x) = 1 but the first form gives 2
        let err = sandwich_differential(
            &f,
            Some(&wrong),
            &first_coordinate_positive(),
            &[2, 1],
            &[1, 1],
            10,
        );
        assert!(err.is_err());
    }

    #[test]
    fn coincidence_of_dominated_additive() {
        // phi = min(L1, L2) restricted to the subgroup where L1 = L2
        // dominates (equals) psi = L1; the lemma forces coincidence
        let phi = min_forms(&[&[2, 1], &[1, 2]]);
        let psi = SemigroupFunction::LinearForm { coeffs: vec![2, 1] };
        // L1 = L2 on multiples of (1, 1)
        let samples: Vec<Vec<i64>> = (1..=10).map(|k| vec![k, k]).collect();
        let report = superadditive_coincidence_check(&phi, &psi, &samples).unwrap();
        assert!(report.dominated && report.coincides);
        // off the subgroup the domination may fail for a min of forms
        let off = superadditive_coincidence_check(&phi, &psi, &[vec![1, 0]]).unwrap();
        assert!(!off.coincides);
    }

    #[test]
    fn monotonicity_is_superadditivity_in_action() {
        // randomized-ish sweep with fixed data: many forms, many directions
        let f = min_forms(&[&[3, 1], &[1, 2], &[2, 2]]);
        let x = [2i64, 1];
        for w in [[1i64, 0], [0, 1], [-1, 3], [4, -2], [-3, -3]] {
            let r =
                sandwich_differential(&f, None, &first_coordinate_positive(), &x, &w, 80).unwrap();
            assert!(r.monotone, "w = {w:?}");
            assert!(r.stabilized);
        }
    }
}
