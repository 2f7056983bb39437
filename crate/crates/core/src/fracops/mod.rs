//! Fractional operators in the transmuted frame: the Sonine integral, the
//! Weyl-differential derivative, the Marchaud difference form, and the
//! diagnostics built on them.

mod diagnostics;
mod marchaud;
mod quadrature;

pub use diagnostics::{
    equivalence_discrepancy, estimate_symbol, symbol_gap, tail_profile, DiscrepancyReport, SymbolEstimate, TailProfile,
};
pub use marchaud::{MarchaudQuadrature, SQuad, Stencil, TailPolicy};
pub use quadrature::ConvolutionQuadrature;

use crate::error::{validation, Result};
use crate::grid::GridFunction;
use crate::kernels::{SonineKernel, SoninePair};
use crate::spectral::{differentiate, DiffMethod};

fn check_grid(v: &GridFunction, h: f64, len: usize) -> Result<()> {
    let g = v.grid();
    if (g.h() - h).abs() > 1e-12 * h || len < g.len() {
        return Err(validation(format!(
            "quadrature built for h = {h}, n = {len} does not match grid h = {}, n = {}",
            g.h(),
            g.len()
        )));
    }
    Ok(())
}

/// Sonine integral: `(kappa * v)(x)` truncated at the window edge.
pub fn fractional_integral(v: &GridFunction, quad: &ConvolutionQuadrature) -> Result<GridFunction> {
    check_grid(v, quad.h(), quad.len())?;
    Ok(v.with_values(quad.apply(v.values())))
}

/// Weyl-differential form `d/dx (kernel * v)`.
pub fn weyl_derivative(v: &GridFunction, quad: &ConvolutionQuadrature) -> Result<GridFunction> {
    weyl_derivative_with(v, quad, DiffMethod::Auto)
}

pub fn weyl_derivative_with(
    v: &GridFunction,
    quad: &ConvolutionQuadrature,
    method: DiffMethod,
) -> Result<GridFunction> {
    check_grid(v, quad.h(), quad.len())?;
    let conv = quad.apply(v.values());
    Ok(v.with_values(differentiate(&conv, quad.h(), method)))
}

/// Marchaud form `int_0^S [v(x) - v(x - s)] k(s) ds`.
pub fn marchaud_derivative(v: &GridFunction, quad: &MarchaudQuadrature) -> Result<GridFunction> {
    check_grid(v, quad.h(), quad.len())?;
    Ok(v.with_values(quad.apply(v.values())))
}

/// Convenience: builds the Marchaud weights for `v`'s grid and applies them.
pub fn marchaud_derivative_for(
    v: &GridFunction,
    kernel: &SonineKernel,
    tail: TailPolicy,
    s_quad: SQuad,
) -> Result<GridFunction> {
    let g = v.grid();
    let quad = MarchaudQuadrature::build(kernel, g.h(), g.len(), tail, s_quad)?;
    marchaud_derivative(v, &quad)
}

/// Convolution weights for both kernels of a pair on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairQuadratures {
    pub k: ConvolutionQuadrature,
    pub kappa: ConvolutionQuadrature,
}

impl PairQuadratures {
    pub fn build(pair: &SoninePair, h: f64, n: usize) -> Result<Self> {
        Ok(Self {
            k: ConvolutionQuadrature::build(&pair.k, h, n)?,
            kappa: ConvolutionQuadrature::build(&pair.kappa, h, n)?,
        })
    }
}

/// `||D^k I^kappa v - v||_2 / ||v||_2`, or the absolute residual when `v = 0`.
pub fn inversion_residual(v: &GridFunction, quads: &PairQuadratures) -> Result<f64> {
    let integral = fractional_integral(v, &quads.kappa)?;
    let back = weyl_derivative(&integral, &quads.k)?;
    let err = back.axpby(1.0, v, -1.0)?.l2();
    let norm = v.l2();
    Ok(if norm == 0.0 { err } else { err / norm })
}
