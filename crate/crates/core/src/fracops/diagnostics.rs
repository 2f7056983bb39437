//! Measurements that compare discrete operators against closed-form symbols
//! and quantify how fast shifted histories are damped by the weight.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{validation, Result};
use crate::fit::linear_fit;
use crate::grid::GridFunction;
use crate::kernels::{SonineKernel, SoninePair};
use crate::semigroup::apply_shift;
use crate::spectral::Fourier;
use crate::timescales::AmnesiaWeight;

use super::{marchaud_derivative, weyl_derivative, ConvolutionQuadrature, MarchaudQuadrature};

/// One Fourier mode of `out_hat / in_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolEstimate {
    pub xi: f64,
    pub input_magnitude: f64,
    pub symbol: Complex64,
}

/// Ratio of transforms on every non-Nyquist mode where the continuous-scaled
/// input transform `h * |FFT(v)|` exceeds `threshold`.
pub fn estimate_symbol(input: &GridFunction, output: &GridFunction, threshold: f64) -> Vec<SymbolEstimate> {
    let g = input.grid();
    let f = Fourier::new(g.len(), g.h());
    let a = f.transform(input.values());
    let b = f.transform(output.values());
    a.iter()
        .zip(&b)
        .enumerate()
        .filter(|(k, (ai, _))| !f.is_nyquist(*k) && ai.norm() * g.h() > threshold)
        .map(|(k, (ai, bi))| SymbolEstimate {
            xi: f.frequencies()[k],
            input_magnitude: ai.norm() * g.h(),
            symbol: bi / ai,
        })
        .collect()
}

/// `|(khat(0) - khat(i xi)) - i xi kappahat(i xi)|`: the gap between the
/// Marchaud symbol of `k` and the Weyl symbol of `kappa`. `None` when `k`
/// has no finite total mass.
pub fn symbol_gap(pair: &SoninePair, xi: f64) -> Option<f64> {
    let mass = pair.k.total_mass()?;
    let p = Complex64::new(0.0, xi);
    let marchaud = Complex64::new(mass, 0.0) - pair.k.laplace(p);
    let weyl = pair.kappa.derivative_symbol(p);
    Some((marchaud - weyl).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub l2_rel: f64,
    pub linf_rel: f64,
    /// `(xi, gap)`; gap is NaN when the Marchaud symbol is undefined.
    pub symbol_gap: Vec<(f64, f64)>,
}

/// Compares Marchaud-with-`k` against Weyl-with-`kappa` on `v`. A
/// measurement only: the two generally differ.
pub fn equivalence_discrepancy(
    v: &GridFunction,
    pair: &SoninePair,
    marchaud: &MarchaudQuadrature,
    kappa_quad: &ConvolutionQuadrature,
    xi_samples: &[f64],
) -> Result<DiscrepancyReport> {
    let lhs = marchaud_derivative(v, marchaud)?;
    let rhs = weyl_derivative(v, kappa_quad)?;
    let diff = lhs.axpby(1.0, &rhs, -1.0)?;
    let scale_l2 = lhs.l2().max(rhs.l2());
    let scale_sup = lhs.sup().max(rhs.sup());
    let rel = |a: f64, b: f64| if b == 0.0 { a } else { a / b };
    Ok(DiscrepancyReport {
        l2_rel: rel(diff.l2(), scale_l2),
        linf_rel: rel(diff.sup(), scale_sup),
        symbol_gap: xi_samples.iter().map(|&xi| (xi, symbol_gap(pair, xi).unwrap_or(f64::NAN))).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProfile {
    /// `(s, g(s))`.
    pub samples: Vec<(f64, f64)>,
    /// Negative least-squares slope of `log g` over the largest decade of `s`.
    pub rate: Option<f64>,
}

/// `g(s) = |k(s)| ||T(s)u||` with the norm taken over the physical times
/// whose operational image lies in `band`.
///
/// The band is held fixed while `s` grows, so `g` tracks the size of the
/// translated term of the Marchaud integrand at a given present time. Over
/// the whole window the norm would not move at all: the shift is an isometry.
pub fn tail_profile(
    v: &GridFunction,
    kernel: &SonineKernel,
    weight: &AmnesiaWeight,
    band: (f64, f64),
    s_grid: &[f64],
) -> Result<TailProfile> {
    let g = v.grid();
    if !(band.0 < band.1) || !g.contains(band.0) || !g.contains(band.1) {
        return Err(validation(format!("observation band {band:?} must be a nonempty interval inside the window")));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) || s_grid.iter().any(|&s| s < 0.0) {
        return Err(validation("tail profile shifts must be nonnegative and increasing"));
    }
    let nodes: Vec<(usize, f64)> = g.points().enumerate().filter(|(_, x)| *x >= band.0 && *x <= band.1).collect();
    let mut samples = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let shifted = apply_shift(v, s)?;
        let sq: f64 = nodes
            .iter()
            .map(|&(i, x)| {
                let u = shifted.values()[i] / weight.at_operational(x);
                u * u
            })
            .sum();
        samples.push((s, kernel.eval(s).abs() * (sq * g.h()).sqrt()));
    }
    let rate = decade_rate(&samples);
    Ok(TailProfile { samples, rate })
}

fn decade_rate(samples: &[(f64, f64)]) -> Option<f64> {
    let s_max = samples.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let (s, lg): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|(s, g)| *s >= 0.1 * s_max && *g > 0.0).map(|(s, g)| (*s, g.ln())).unzip();
    linear_fit(&s, &lg).map(|(slope, _)| -slope)
}
