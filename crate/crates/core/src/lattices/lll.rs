//! Floating-point LLL reduction (delta in (0.5, 1)) with integer transform
//! tracking, plus the Gram-Schmidt data used for minima bounds.

/// Result of reducing a basis given by rows.
#[derive(Debug, Clone)]
pub struct LllResult {
    /// Reduced basis rows in ambient coordinates.
    pub basis: Vec<Vec<f64>>,
    /// Integer coordinates of each reduced vector in the input basis.
    pub coords: Vec<Vec<i128>>,
    /// Euclidean norms of the Gram-Schmidt orthogonalization of the reduced
    /// basis (in basis order).
    pub gs_norms: Vec<f64>,
}

fn gram_schmidt(b: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let m = b[0].len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut b_star = vec![vec![0.0; m]; n];
    let mut norms2 = vec![0.0; n];
    for i in 0..n {
        b_star[i].copy_from_slice(&b[i]);
        for j in 0..i {
            let num: f64 = (0..m).map(|t| b[i][t] * b_star[j][t]).sum();
            mu[i][j] = if norms2[j] == 0.0 {
                0.0
            } else {
                num / norms2[j]
            };
            for t in 0..m {
                b_star[i][t] -= mu[i][j] * b_star[j][t];
            }
        }
        norms2[i] = b_star[i].iter().map(|x| x * x).sum();
    }
    (mu, b_star, norms2)
}

/// Reduces the row basis in place and returns the reduced data.
///
/// # Panics
/// Panics if `delta` is outside (0.5, 1) or the basis is empty/ragged.
pub fn lll_reduce(mut basis: Vec<Vec<f64>>, delta: f64) -> LllResult {
    assert!(delta > 0.5 && delta < 1.0, "delta must be in (0.5, 1)");
    let n = basis.len();
    assert!(n > 0);
    let m = basis[0].len();
    assert!(basis.iter().all(|r| r.len() == m));

    let mut coords: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();

    let (mut mu, mut b_star, mut norms2) = gram_schmidt(&basis);
    let mut k = 1usize;
    let mut steps = 0usize;
    let step_cap = 10_000 * n * n;
    while k < n && steps < step_cap {
        steps += 1;
        for j in (0..k).rev() {
            let r = mu[k][j].round();
            if r != 0.0 && r.is_finite() {
                for t in 0..m {
                    basis[k][t] -= r * basis[j][t];
                }
                let ri = r as i128;
                for t in 0..n {
                    coords[k][t] -= ri * coords[j][t];
                }
            }
        }
        let gs = gram_schmidt(&basis);
        mu = gs.0;
        b_star = gs.1;
        norms2 = gs.2;

        if norms2[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms2[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            coords.swap(k, k - 1);
            let gs = gram_schmidt(&basis);
            mu = gs.0;
            b_star = gs.1;
            norms2 = gs.2;
            k = k.max(2) - 1;
        }
    }
    let _ = b_star;
    LllResult {
        gs_norms: norms2.iter().map(|x| x.sqrt()).collect(),
        basis,
        coords,
    }
}
