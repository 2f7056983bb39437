//! Product-integration weights for one-sided convolutions with weakly
//! singular kernels.

use crate::error::{validation, Result};
use crate::kernels::SonineKernel;
use crate::quadrature::{gauss10, left_singular};

const CELL0_TOL: f64 = 1e-14;

/// Weights for `(k * v)(x_i) = int_0^{x_i - x_0} k(s) v(x_i - s) ds` with `v`
/// piecewise linear between nodes.
///
/// On cell `[jh, (j+1)h]` the hat moments are `A_j = int k (1 - tau)` and
/// `B_j = int k tau`, `tau = s/h - j`. The full weights are `w_0 = A_0`,
/// `w_j = A_j + B_{j-1}`; the history is cut at the window edge, where node 0
/// receives only the half hat `B_{i-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionQuadrature {
    kernel: SonineKernel,
    h: f64,
    weights: Vec<f64>,
    edge: Vec<f64>,
}

fn power_moments(c: f64, q: f64, a: f64, b: f64) -> (f64, f64) {
    let m0 = c * (b.powf(q + 1.0) - a.powf(q + 1.0)) / (q + 1.0);
    let m1 = c * (b.powf(q + 2.0) - a.powf(q + 2.0)) / (q + 2.0);
    (m0, m1)
}

/// `(A, B)` for the cell `[jh, (j+1)h]`.
fn cell_moments(kernel: &SonineKernel, h: f64, j: usize) -> (f64, f64) {
    let a = j as f64 * h;
    let b = a + h;
    if j == 0 {
        if let Some((c, q)) = kernel.power_form() {
            let (m0, m1) = power_moments(c, q, 0.0, h);
            return (m0 - m1 / h, m1 / h);
        }
        let rho = kernel.singularity_exponent();
        let lo = left_singular(|d| kernel.eval(d) * (1.0 - d / h), h, rho, CELL0_TOL, CELL0_TOL).value;
        let hi = left_singular(|d| kernel.eval(d) * (d / h), h, rho, CELL0_TOL, CELL0_TOL).value;
        return (lo, hi);
    }
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (s, w) in gauss10().mapped(a, b) {
        let k = w * kernel.eval(s);
        let tau = (s - a) / h;
        lo += k * (1.0 - tau);
        hi += k * tau;
    }
    (lo, hi)
}

impl ConvolutionQuadrature {
    /// Builds weights for `n` nodes at spacing `h`. Kernels must be locally
    /// integrable (`rho < 1`); derivative-side kernels with `1 <= rho < 2`
    /// only enter through the difference form.
    pub fn build(kernel: &SonineKernel, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(validation(format!("quadrature spacing must be > 0, got {h}")));
        }
        if n < 2 {
            return Err(validation("quadrature needs at least two nodes"));
        }
        let rho = kernel.singularity_exponent();
        if rho >= 1.0 {
            return Err(validation(format!(
                "kernel singularity exponent {rho} >= 1 is not integrable; use the difference form"
            )));
        }
        let moments: Vec<(f64, f64)> = (0..n - 1).map(|j| cell_moments(kernel, h, j)).collect();
        let mut weights = vec![0.0; n];
        let mut edge = vec![0.0; n];
        for j in 0..n {
            let a = moments.get(j).map_or(0.0, |m| m.0);
            let b_prev = if j > 0 { moments[j - 1].1 } else { 0.0 };
            weights[j] = a + b_prev;
            edge[j] = b_prev;
        }
        Ok(Self { kernel: kernel.clone(), h, weights, edge })
    }

    pub fn kernel(&self) -> &SonineKernel {
        &self.kernel
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Full hat weights `w_j`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Half-hat weight `B_{i-1}` given to node 0 when evaluating at node `i`.
    pub fn edge_weight(&self, i: usize) -> f64 {
        self.edge[i]
    }

    /// Discrete `int_0^{x_m} k`: the action on `v = 1` at node `m`.
    pub fn moment(&self, m: usize) -> f64 {
        self.weights[..m].iter().sum::<f64>() + self.edge[m]
    }

    /// Truncated convolution on the window; `values.len()` must not exceed `len()`.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        debug_assert!(n <= self.weights.len());
        let w = &self.weights;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return 0.0;
                }
                let mut acc = self.edge[i] * values[0];
                for j in 0..i {
                    acc += w[j] * values[i - j];
                }
                acc
            })
            .collect()
    }
}
