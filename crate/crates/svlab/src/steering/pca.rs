//! First principal direction by power iteration.
//!
//! The direction of maximum (uncentered by default) variance of a row matrix
//! is the top eigenvector of `XᵀX`. Power iteration applies `v ← XᵀXv`
//! without materializing the Gram matrix, so the cost per step is two
//! matrix-vector products. All arithmetic runs in `f64` internally: the
//! convergence tolerance sits below `f32` resolution.

use ndarray::{Array1, ArrayView2};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SvError};
use crate::rng::{derive_rng, name_tag};

/// Knobs for [`principal_direction`]; the defaults are the extraction
/// defaults and are recorded in vector metadata.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PcaOptions {
    /// Subtract column means before the iteration. Off by default: the raw
    /// difference matrix's dominant direction is what injection wants.
    pub center: bool,
    /// Seeds the random start vector.
    pub seed: u64,
    /// Convergence threshold on the iterate delta.
    pub tol: f64,
    /// Iteration cap; the last iterate is returned if it is hit.
    pub max_iters: usize,
}

impl Default for PcaOptions {
    fn default() -> Self {
        PcaOptions {
            center: false,
            seed: 0,
            tol: 1e-8,
            max_iters: 10_000,
        }
    }
}

/// The unit-norm first principal direction of `matrix` rows, sign-aligned so
/// its dot product with the mean row is nonnegative.
///
/// # Errors
/// Input error for an empty matrix; degenerate error when the matrix is
/// identically zero (no direction exists).
pub fn principal_direction(matrix: ArrayView2<'_, f32>, options: &PcaOptions) -> Result<Array1<f32>> {
    let (n, d) = matrix.dim();
    if n == 0 || d == 0 {
        return Err(SvError::input(format!(
            "principal direction needs a nonempty matrix, got {n}x{d}"
        )));
    }
    let mut x = matrix.mapv(f64::from);
    let mean_row: Array1<f64> = x.mean_axis(ndarray::Axis(0)).expect("n > 0");
    if options.center {
        x -= &mean_row.view().insert_axis(ndarray::Axis(0));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(SvError::Degenerate(
            "difference matrix is identically zero".to_string(),
        ));
    }

    let mut rng = derive_rng(options.seed, &[name_tag("pca")]);
    let draw_unit = |rng: &mut rand_chacha::ChaCha8Rng| -> Array1<f64> {
        loop {
            let v: Array1<f64> =
                Array1::from_iter((0..d).map(|_| -> f64 { StandardNormal.sample(rng) }));
            let norm = v.dot(&v).sqrt();
            if norm > 0.0 {
                return v / norm;
            }
        }
    };
    let mut v = draw_unit(&mut rng);
    for _ in 0..options.max_iters {
        let xv = x.dot(&v);
        let mut w = x.t().dot(&xv);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            // The start vector fell in the null space; try another.
            v = draw_unit(&mut rng);
            continue;
        }
        w /= norm;
        let delta = (&w - &v).mapv(f64::abs).sum();
        v = w;
        if delta <= options.tol {
            break;
        }
    }

    // Align so the direction points with the mean difference, not against it.
    if v.dot(&mean_row) < 0.0 {
        v.mapv_inplace(|c| -c);
    }
    Ok(v.mapv(|c| c as f32))
}
