//! Shared oracles for the acceptance suite: independent implementations
//! that the production kernels are checked against.
//!
//! Nothing here may call into the code paths under test. The eigensolver is
//! a textbook cyclic Jacobi diagonalization, deliberately naive: exactness
//! over speed.

#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView2};

// ------------------------------------------------------------------
// Jacobi eigendecomposition
// ------------------------------------------------------------------

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi
/// rotations. Returns `(eigenvalues, eigenvectors)` with eigenvectors as
/// columns, paired by index and in no particular order.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[(i, i)]).collect();
    (vals, v)
}

/// The exact dominant eigenvector of `XᵀX`, computed by fully
/// diagonalizing whichever Gram matrix is smaller. When rows ≤ cols the
/// eigenvector of `XXᵀ` is mapped into column space through `Xᵀu` — the
/// standard singular-vector identity — so the cost stays cubic in the
/// short side.
pub fn exact_gram_principal(x: ArrayView2<'_, f64>) -> Array1<f64> {
    let (r, c) = x.dim();
    assert!(r > 0 && c > 0, "oracle needs a nonempty matrix");
    let col_space = if r <= c {
        let gram = x.dot(&x.t());
        let (vals, vecs) = jacobi_eigen(&gram);
        let top = argmax(&vals);
        x.t().dot(&vecs.column(top))
    } else {
        let gram = x.t().dot(&x);
        let (vals, vecs) = jacobi_eigen(&gram);
        let top = argmax(&vals);
        vecs.column(top).to_owned()
    };
    let norm = col_space.dot(&col_space).sqrt();
    assert!(norm > 0.0, "oracle hit a rank-zero matrix");
    col_space / norm
}

fn argmax(vals: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v > vals[best] {
            best = i;
        }
    }
    best
}

/// |cos| between two unit-scale vectors, in `f64`.
pub fn abs_cosine(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let na = a.dot(a).sqrt();
    let nb = b.dot(b).sqrt();
    (a.dot(b) / (na * nb)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_a_known_spectrum() {
        // diag(5, 2, 1) conjugated by a rotation has eigenvalues {5, 2, 1}.
        let a = ndarray::arr2(&[[3.5, 1.5, 0.0], [1.5, 3.5, 0.0], [0.0, 0.0, 1.0]]);
        let (mut vals, _) = jacobi_eigen(&a);
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 5.0).abs() < 1e-12);
    }
}
