//! Order-1 transport distance on the unit circle between atomic measures.
//!
//! Two routes are provided: the cut-and-median formula (exact for arbitrary
//! rational weights) and the sorted-angle/optimal-rotation matching (equal
//! weights, used as the independent cross-check).

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{circle_angle, EmpiricalMeasure};

const TAU: f64 = 2.0 * PI;

fn angles_and_weights(m: &EmpiricalMeasure) -> Result<Vec<(f64, f64)>> {
    m.atoms()
        .iter()
        .map(|a| circle_angle(&a.point).map(|t| (t, a.weight)))
        .collect()
}

/// W1 on the circle (arc-length metric) between measures supported on the
/// unit circle within 1e-9.
///
/// Cuts the circle at angle 0 and minimizes the L1 distance of the cumulative
/// functions over the free additive constant, which is attained at a weighted
/// median. This computes exactly the optimal-rotation transport cost without
/// materializing a common refinement grid.
pub fn wasserstein_circle(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    let wa = angles_and_weights(a)?;
    let wb = angles_and_weights(b)?;

    // event sweep for G = F_a - F_b on [0, tau)
    let mut events: Vec<(f64, f64)> = wa
        .iter()
        .map(|&(t, w)| (t, w))
        .chain(wb.iter().map(|&(t, w)| (t, -w)))
        .collect();
    events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    // piecewise-constant G with interval lengths as weights; the final
    // segment wraps around to the first event, where G returns to 0
    let mut segments: Vec<(f64, f64)> = Vec::with_capacity(events.len());
    let mut g = 0.0;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        while i < events.len() && events[i].0 == t {
            g += events[i].1;
            i += 1;
        }
        let next = if i < events.len() {
            events[i].0
        } else {
            events[0].0 + TAU
        };
        let len = next - t;
        if len > 0.0 {
            segments.push((g, len));
        }
    }

    // weighted median of G minimizes sum len * |G - alpha|
    segments.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let total: f64 = segments.iter().map(|&(_, l)| l).sum();
    let mut acc = 0.0;
    let mut alpha = segments.last().map(|&(g, _)| g).unwrap_or(0.0);
    for &(g, l) in &segments {
        acc += l;
        if acc >= total / 2.0 {
            alpha = g;
            break;
        }
    }
    Ok(segments.iter().map(|&(g, l)| l * (g - alpha).abs()).sum())
}

/// Optimal-rotation matching for two lists of equally weighted atoms.
///
/// Splits both measures onto a common equal-weight grid (so the atom counts
/// match), sorts angles, and minimizes the average arc distance over cyclic
/// shifts. Errors when the common grid would be unreasonably large.
pub fn wasserstein_circle_rotation(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    grid_cap: usize,
) -> Result<f64> {
    let wa = angles_and_weights(a)?;
    let wb = angles_and_weights(b)?;
    let na = wa.len();
    let nb = wb.len();
    let uniform = |w: &[(f64, f64)]| {
        let expect = 1.0 / w.len() as f64;
        w.iter().all(|&(_, wt)| (wt - expect).abs() < 1e-9)
    };
    if !uniform(&wa) || !uniform(&wb) {
        return Err(Error::InvalidInput(
            "rotation method needs equal atom weights".into(),
        ));
    }
    let m = lcm(na, nb);
    if m > grid_cap {
        return Err(Error::CapExceeded {
            what: "common weight-splitting grid",
            value: m,
            cap: grid_cap,
        });
    }
    let split = |w: &[(f64, f64)], copies: usize| {
        let mut angles: Vec<f64> = w
            .iter()
            .flat_map(|&(t, _)| std::iter::repeat(t).take(copies))
            .collect();
        angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
        angles
    };
    let aa = split(&wa, m / na);
    let bb = split(&wb, m / nb);
    let mut best = f64::INFINITY;
    for k in 0..m {
        let mut cost = 0.0;
        for i in 0..m {
            cost += arc_distance(aa[i], bb[(i + k) % m]);
            if cost >= best * m as f64 {
                break;
            }
        }
        best = best.min(cost / m as f64);
    }
    Ok(best)
}

fn arc_distance(x: f64, y: f64) -> f64 {
    let mut d = (x - y).abs() % TAU;
    if d > PI {
        d = TAU - d;
    }
    d
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Atom, SpherePoint};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn dirac(theta: f64) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform_on(vec![SpherePoint::Finite(Complex64::from_polar(1.0, theta))])
            .unwrap()
    }

    fn uniform(angles: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform_on(
            angles
                .iter()
                .map(|&t| SpherePoint::Finite(Complex64::from_polar(1.0, t)))
                .collect(),
        )
        .unwrap()
    }

    /// Exhaustive min-cost perfect matching, the independent oracle for
    /// small equal-weight instances.
    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for i in 0..n {
                    let mut q: Vec<usize> =
                        p.iter().map(|&x| if x >= i { x + 1 } else { x }).collect();
                    q.insert(0, i);
                    out.push(q);
                }
            }
            out
        }
        let n = a.len();
        permutations(n)
            .into_iter()
            .map(|perm| {
                perm.iter()
                    .enumerate()
                    .map(|(i, &j)| arc_distance(a[i], b[j]))
                    .sum::<f64>()
                    / n as f64
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn identical_measures_are_at_distance_zero() {
        let m = uniform(&[0.1, 1.3, 4.0]);
        assert!(wasserstein_circle(&m, &m).unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_atom_transport() {
        let d = wasserstein_circle(&dirac(0.0), &dirac(PI / 2.0)).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
        let r = wasserstein_circle_rotation(&dirac(0.0), &dirac(PI / 2.0), 1 << 16).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_grids_cost_at_most_rotation() {
        for m in [3usize, 5, 8] {
            let a: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
            let shift = PI / m as f64;
            let b: Vec<f64> = a.iter().map(|t| (t + shift) % TAU).collect();
            let d = wasserstein_circle(&uniform(&a), &uniform(&b)).unwrap();
            assert!(d <= shift + 1e-12, "m={m}: {d} vs {shift}");
            let d2 = wasserstein_circle_rotation(&uniform(&a), &uniform(&b), 1 << 16).unwrap();
            assert!((d - d2).abs() < 1e-12);
        }
    }

    #[test]
    fn off_circle_support_rejected() {
        let m = EmpiricalMeasure::uniform_on(vec![SpherePoint::Finite(Complex64::new(2.0, 0.0))])
            .unwrap();
        assert!(matches!(
            wasserstein_circle(&m, &dirac(0.0)),
            Err(Error::OffCircle { .. })
        ));
    }

    #[test]
    fn matches_brute_force_matching() {
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 2..=5usize {
            for _ in 0..5 {
                let a: Vec<f64> = (0..n).map(|_| next() * TAU).collect();
                let b: Vec<f64> = (0..n).map(|_| next() * TAU).collect();
                let exact = brute_force(&a, &b);
                let med = wasserstein_circle(&uniform(&a), &uniform(&b)).unwrap();
                let rot = wasserstein_circle_rotation(&uniform(&a), &uniform(&b), 1 << 16).unwrap();
                assert!((exact - med).abs() < 1e-10, "n={n} exact={exact} med={med}");
                assert!((exact - rot).abs() < 1e-10, "n={n} exact={exact} rot={rot}");
            }
        }
    }

    #[test]
    fn distinct_measures_have_positive_distance() {
        let a = uniform(&[0.0, 2.0]);
        let b = uniform(&[0.0, 2.5]);
        assert!(wasserstein_circle(&a, &b).unwrap() > 0.1);
        // merging split atoms keeps distance zero
        let c = EmpiricalMeasure::new(vec![
            Atom {
                point: SpherePoint::Finite(Complex64::from_polar(1.0, 0.0)),
                weight: 0.5,
            },
            Atom {
                point: SpherePoint::Finite(Complex64::from_polar(1.0, 0.0)),
                weight: 0.25,
            },
            Atom {
                point: SpherePoint::Finite(Complex64::from_polar(1.0, 2.0)),
                weight: 0.25,
            },
        ])
        .unwrap();
        let d = EmpiricalMeasure::new(vec![
            Atom {
                point: SpherePoint::Finite(Complex64::from_polar(1.0, 0.0)),
                weight: 0.75,
            },
            Atom {
                point: SpherePoint::Finite(Complex64::from_polar(1.0, 2.0)),
                weight: 0.25,
            },
        ])
        .unwrap();
        assert!(wasserstein_circle(&c, &d).unwrap() < 1e-15);
    }

    #[test]
    fn prime_orbits_approach_haar() {
        // Bilu trend: distances of torsion orbits to the uniform
        // discretization of Haar decrease along increasing primes
        use crate::polyalg::{cyclotomic, find_roots};
        let distance = |p: u32| {
            let roots = find_roots(&cyclotomic(p), 1e-12).unwrap();
            let d = roots.roots.len();
            let orbit = EmpiricalMeasure::uniform_on(
                roots.roots.into_iter().map(SpherePoint::Finite).collect(),
            )
            .unwrap();
            wasserstein_circle(&orbit, &EmpiricalMeasure::haar_discretization(d)).unwrap()
        };
        let (d11, d101, d499) = (distance(11), distance(101), distance(499));
        assert!(d11 > d101 && d101 > d499, "{d11} {d101} {d499}");
        assert!(d499 < 0.02, "largest prime still far from Haar: {d499}");
    }

    proptest! {
        #[test]
        fn symmetric_and_triangle(
            a in proptest::collection::vec(0.0..TAU, 1..6),
            b in proptest::collection::vec(0.0..TAU, 1..6),
            c in proptest::collection::vec(0.0..TAU, 1..6),
        ) {
            let (ma, mb, mc) = (uniform(&a), uniform(&b), uniform(&c));
            let dab = wasserstein_circle(&ma, &mb).unwrap();
            let dba = wasserstein_circle(&mb, &ma).unwrap();
            prop_assert!((dab - dba).abs() < 1e-10);
            let dac = wasserstein_circle(&ma, &mc).unwrap();
            let dcb = wasserstein_circle(&mc, &mb).unwrap();
            prop_assert!(dab <= dac + dcb + 1e-10);
        }
    }
}
