//! The deformed translation semigroup and its generator.
//!
//! In the transmuted frame the deformed shift is the plain right shift
//! `v(x) -> v(x - s)`; the pointwise physical formula is kept separately as an
//! independent oracle.

use log::warn;

use crate::error::{validation, Result};
use crate::grid::{inverse_transmute, lagrange4, transmute, GridFunction, OperationalGrid};
use crate::spectral::DiffMethod;
use crate::timescales::{AgingScale, AmnesiaWeight};

/// Shift amounts within this many cells of a node are treated as grid-aligned.
const ALIGN_TOL: f64 = 1e-9;

/// `T(s)` for a given scale and weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedShift {
    pub scale: AgingScale,
    pub weight: AmnesiaWeight,
    s: f64,
}

impl DeformedShift {
    pub fn new(scale: AgingScale, weight: AmnesiaWeight, s: f64) -> Result<Self> {
        check_shift(s)?;
        Ok(Self { scale, weight, s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Transmuted action.
    pub fn apply(&self, v: &GridFunction) -> Result<GridFunction> {
        apply_shift(v, self.s)
    }

    /// `T(s)u(t) = omega(tau) / omega(t) u(tau)` with `tau = psi^-1(psi(t) - s)`.
    pub fn apply_physical(&self, u: impl Fn(f64) -> f64, t: f64) -> f64 {
        let tau = self.scale.inverse(self.scale.forward(t) - self.s);
        self.weight.value(tau) / self.weight.value(t) * u(tau)
    }
}

fn check_shift(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(validation(format!("shift amount must be finite and >= 0, got {s}")));
    }
    Ok(())
}

/// Splits `s / h` into a whole number of cells and a fraction in `[0, 1)`,
/// snapping near-integers so aligned shifts stay exact.
fn split_shift(s: f64, h: f64) -> (usize, f64) {
    let q = s / h;
    let r = q.round();
    if (q - r).abs() <= ALIGN_TOL * q.max(1.0) {
        (r as usize, 0.0)
    } else {
        let m = q.floor();
        (m as usize, q - m)
    }
}

/// Right shift by `s` in the transmuted frame: `out(x) = v(x - s)`, cubic
/// interpolation between nodes, zero beyond the window.
pub fn apply_shift(v: &GridFunction, s: f64) -> Result<GridFunction> {
    check_shift(s)?;
    if s == 0.0 {
        return Ok(v.clone());
    }
    let grid = v.grid();
    let n = grid.len();
    let (m, frac) = split_shift(s, grid.h());
    if m >= n {
        warn!("shift {s} exceeds the window width; result is the zero function");
        return Ok(GridFunction::zeros(*grid));
    }
    let vals = v.values();
    let at = |j: isize| if j >= 0 && (j as usize) < n { vals[j as usize] } else { 0.0 };
    let out: Vec<f64> = if frac == 0.0 {
        (0..n).map(|i| if i >= m { vals[i - m] } else { 0.0 }).collect()
    } else {
        // x_i - s sits between nodes i-m-1 and i-m; use the centred stencil.
        let w = lagrange4(2.0 - frac);
        (0..n)
            .map(|i| {
                let base = i as isize - m as isize - 2;
                (0..4).map(|r| w[r] * at(base + r as isize)).sum()
            })
            .collect()
    };
    Ok(v.with_values(out))
}

/// Sup-norm gap between the pointwise physical shift and the transmuted
/// route `T^-1 S(s) T`, over nodes whose shifted point stays in the window.
pub fn similarity_residual(
    u: impl Fn(f64) -> f64,
    scale: &AgingScale,
    weight: &AmnesiaWeight,
    s: f64,
    grid: &OperationalGrid,
) -> Result<f64> {
    let direct = DeformedShift::new(*scale, *weight, s)?;
    let v = transmute(&u, scale, weight, grid)?;
    let shifted = apply_shift(&v, s)?;
    let view = inverse_transmute(&shifted, scale, weight);
    let mut worst = 0.0f64;
    for x in grid.points().filter(|x| x - s >= grid.x_min()) {
        let t = scale.inverse(x);
        let gap = (direct.apply_physical(&u, t) - view.eval(t)?).abs();
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Transmuted generator: `-dv/dx`.
pub fn generator_apply(v: &GridFunction) -> GridFunction {
    generator_apply_with(v, DiffMethod::Auto)
}

pub fn generator_apply_with(v: &GridFunction, method: DiffMethod) -> GridFunction {
    v.with_values(v.derivative(method).into_iter().map(|d| -d).collect())
}

/// Physical generator `A u = -(omega u)' / (omega psi')` from `u` and `u'`.
pub fn generator_physical(
    u: impl Fn(f64) -> f64,
    du: impl Fn(f64) -> f64,
    scale: &AgingScale,
    weight: &AmnesiaWeight,
) -> impl Fn(f64) -> f64 {
    let (scale, weight) = (*scale, *weight);
    move |t| {
        let w = weight.value(t);
        -(weight.derivative(t) * u(t) + w * du(t)) / (w * scale.derivative(t))
    }
}

/// `||(S(s)v - v)/s - (-v')||_2` for each `s`.
pub fn generator_fd_residual(v: &GridFunction, s_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let gen = generator_apply(v);
    s_list
        .iter()
        .map(|&s| {
            if !(s > 0.0) {
                return Err(validation(format!("difference steps must be positive, got {s}")));
            }
            let shifted = apply_shift(v, s)?;
            let quotient = shifted.axpby(1.0 / s, v, -1.0 / s)?;
            Ok((s, quotient.axpby(1.0, &gen, -1.0)?.l2()))
        })
        .collect()
}
