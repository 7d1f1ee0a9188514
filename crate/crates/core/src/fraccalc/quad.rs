//! Product-integration quadrature for weakly singular convolution kernels.
//!
//! Every operator in the crate integrates a piecewise-linear interpolant
//! exactly against the kernel `(x - t)^(sigma - 1)`. The per-cell kernel
//! moments have closed forms, so the weak endpoint singularity never meets a
//! sampled quadrature point. Quadrature weights depend only on the grid and
//! the exponent, never on the integrand; [`WeightTable`] materialises them
//! once for repeated application.

use crate::parallel::map_indexed;
use crate::Complex64;

/// What the folded row weights compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowKind {
    /// `int_0^{x_i} (x_i - t)^(sigma-1) fhat(t) dt` with `fhat` the linear
    /// interpolant of the samples.
    Integral,
    /// `int_0^{x_i} (x_i - t)^(sigma-1) fhat'(t) dt`, the interpolant slopes
    /// integrated against the kernel (the integral part of the derivative in
    /// its absolutely-continuous form; there `sigma = 1 - alpha`).
    SlopeIntegral,
}

/// Emits the additive node-weight contributions of row `i`.
///
/// For each quadrature cell `[t_j, t_{j+1}]` with `j < i` the closed-form
/// moments are
///   m0 = (u_j^sigma - u_{j+1}^sigma) / sigma,
///   m1 = u_j * m0 - (u_j^(sigma+1) - u_{j+1}^(sigma+1)) / (sigma + 1),
/// where `u_k = x_i - t_k`. The interpolant folds these into weights on the
/// two cell endpoints.
#[inline]
fn fold_row<F: FnMut(usize, f64)>(nodes: &[f64], i: usize, sigma: f64, kind: RowKind, mut emit: F) {
    let x = nodes[i];
    let mut u_prev = x - nodes[0];
    let mut p_prev = u_prev.powf(sigma);
    let mut q_prev = p_prev * u_prev;
    for j in 0..i {
        let (u, p, q) = if j + 1 == i {
            (0.0, 0.0, 0.0)
        } else {
            let u = x - nodes[j + 1];
            let p = u.powf(sigma);
            (u, p, p * u)
        };
        let h = nodes[j + 1] - nodes[j];
        let m0 = (p_prev - p) / sigma;
        match kind {
            RowKind::Integral => {
                let m1 = u_prev * m0 - (q_prev - q) / (sigma + 1.0);
                emit(j, m0 - m1 / h);
                emit(j + 1, m1 / h);
            }
            RowKind::SlopeIntegral => {
                emit(j, -m0 / h);
                emit(j + 1, m0 / h);
            }
        }
        u_prev = u;
        p_prev = p;
        q_prev = q;
    }
}

/// Row `i` applied to complex samples, without materialising weights.
pub(crate) fn row_apply(
    nodes: &[f64],
    values: &[Complex64],
    i: usize,
    sigma: f64,
    kind: RowKind,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    fold_row(nodes, i, sigma, kind, |k, w| acc += values[k] * w);
    acc
}

/// All rows, parallel over output nodes.
pub(crate) fn convolve(
    nodes: &[f64],
    values: &[Complex64],
    sigma: f64,
    kind: RowKind,
) -> Vec<Complex64> {
    map_indexed(nodes.len(), |i| row_apply(nodes, values, i, sigma, kind))
}

/// Lower-triangular quadrature weights for one grid and exponent.
///
/// Row `i` holds weights on samples `0..=i`. Building costs one `powf` per
/// entry; applying is a dense triangular mat-vec, which is what makes
/// many-trial verification runs cheap.
#[derive(Debug, Clone)]
pub(crate) struct WeightTable {
    n_nodes: usize,
    rows: Vec<f64>,
}

impl WeightTable {
    pub(crate) fn build(nodes: &[f64], sigma: f64, kind: RowKind) -> Self {
        let n_nodes = nodes.len();
        let rows: Vec<Vec<f64>> = map_indexed(n_nodes, |i| {
            let mut row = vec![0.0; i + 1];
            fold_row(nodes, i, sigma, kind, |k, w| row[k] += w);
            row
        });
        Self {
            n_nodes,
            rows: rows.concat(),
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        let offset = i * (i + 1) / 2;
        &self.rows[offset..offset + i + 1]
    }

    pub(crate) fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n_nodes);
        map_indexed(self.n_nodes, |i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &w) in self.row(i).iter().enumerate() {
                acc += values[k] * w;
            }
            acc
        })
    }
}
