//! Difference-form (Marchaud) quadrature `int_0^S [v(x) - v(x - s)] k(s) ds`.

use serde::Serialize;

use crate::error::{validation, Error, Result};
use crate::grid::lagrange4;
use crate::kernels::SonineKernel;
use crate::quadrature::{adaptive, graded_panels, GaussLegendre};

/// Where the `s`-integral is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TailPolicy {
    /// Integrate over `[0, S]`.
    FixedCutoff { cutoff: f64 },
    /// Cutoff chosen so `exp(-(2 beta - alpha_g) S) <= eps`.
    WeightedAuto { eps: f64, cutoff: f64, rate: f64 },
    /// Integrate to infinity; only for tail-integrable kernels.
    Unbounded,
}

impl TailPolicy {
    pub fn fixed(cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::TailPolicy(format!("cutoff must be finite and > 0, got {cutoff}")));
        }
        Ok(Self::FixedCutoff { cutoff })
    }

    /// Needs `2 beta > alpha_g`: the weight must decay into the past faster
    /// than the kernel can grow, squared because both the shifted datum and
    /// the weight ratio contribute a factor.
    pub fn weighted_auto(eps: f64, past_decay_rate: f64, growth_rate: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::TailPolicy(format!("tail tolerance must lie in (0, 1), got {eps}")));
        }
        let rate = 2.0 * past_decay_rate - growth_rate;
        if !(rate > 0.0) {
            return Err(Error::TailPolicy(format!(
                "weighted tail needs 2 beta > alpha_g; got 2 * {past_decay_rate} <= {growth_rate}, \
                 the memory kernel is not neutralised by the weight"
            )));
        }
        Ok(Self::WeightedAuto { eps, cutoff: (1.0 / eps).ln() / rate, rate })
    }

    /// The cutoff `S`, infinite for [`TailPolicy::Unbounded`].
    pub fn cutoff(&self) -> f64 {
        match *self {
            Self::FixedCutoff { cutoff } | Self::WeightedAuto { cutoff, .. } => cutoff,
            Self::Unbounded => f64::INFINITY,
        }
    }
}

/// Which nodes interpolate `v(x_i - s)` on each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// Two nodes on each side of the cell; touches node `i + 1`.
    Centered,
    /// Nodes `i - j - 3 ..= i - j`; never looks ahead, so the discrete
    /// operator is lower triangular.
    Causal,
}

impl Stencil {
    /// Local coordinate of `x_i - jh` inside the four-node stencil.
    fn lead(self) -> usize {
        match self {
            Self::Centered => 2,
            Self::Causal => 3,
        }
    }
}

/// Controls for the near-origin panels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SQuad {
    /// Geometric ratio between consecutive panels toward `s = 0`.
    pub ratio: f64,
    /// Panels stop at this `s`; the neglected piece is `O(s_min^(2 - rho))`.
    pub s_min: f64,
    /// Gauss-Legendre points per panel and per cell.
    pub points: usize,
}

impl Default for SQuad {
    fn default() -> Self {
        Self { ratio: 0.5, s_min: 1e-10, points: 10 }
    }
}

/// Precomputed weights for
/// `out_i = K v_i - sum_m W_m v_{i-m}`, with `v` zero outside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchaudQuadrature {
    h: f64,
    n: usize,
    cutoff: f64,
    stencil: Stencil,
    /// `int_h^S k`.
    diagonal: f64,
    /// `W_m` for `m = -1, 0, 1, ...` (stored shifted by one).
    weights: Vec<f64>,
}

impl MarchaudQuadrature {
    pub fn build(kernel: &SonineKernel, h: f64, n: usize, tail: TailPolicy, s_quad: SQuad) -> Result<Self> {
        Self::build_with(kernel, h, n, tail, s_quad, Stencil::Centered)
    }

    pub fn build_with(
        kernel: &SonineKernel,
        h: f64,
        n: usize,
        tail: TailPolicy,
        s_quad: SQuad,
        stencil: Stencil,
    ) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || n < 4 {
            return Err(validation(format!("Marchaud quadrature needs h > 0 and n >= 4 (h = {h}, n = {n})")));
        }
        if kernel.singularity_exponent() >= 2.0 {
            return Err(validation("difference form needs a kernel singularity exponent below 2"));
        }
        if !(s_quad.ratio > 0.0 && s_quad.ratio < 1.0) || !(s_quad.s_min > 0.0) || s_quad.points == 0 {
            return Err(validation("panel ratio must lie in (0, 1), s_min > 0, points >= 1"));
        }
        let cutoff = tail.cutoff();
        if cutoff.is_infinite() && !kernel.tail_integrable() {
            return Err(Error::Config(
                "unbounded Marchaud tail requires a tail-integrable kernel; choose a finite cutoff".into(),
            ));
        }
        let lead = stencil.lead();
        let rule = GaussLegendre::new(s_quad.points);
        // Offsets m range over -1 ..= last_cell + 3.
        let cells_in_window = n + 4;
        let last_cell =
            if cutoff.is_finite() { ((cutoff / h).ceil() as usize).clamp(1, cells_in_window) } else { cells_in_window };
        let mut weights = vec![0.0; last_cell + 5];
        let mut add = |m: isize, w: f64| weights[(m + 1) as usize] += w;

        // Cell 0 in difference form: v(x_i) - p(x_i - s) vanishes at s = 0.
        for r in 0..4 {
            let d = graded_panels(
                |s| {
                    let l = lagrange4(lead as f64 - s / h);
                    let delta = if r == lead { 1.0 } else { 0.0 };
                    (delta - l[r]) * kernel.eval(s)
                },
                h.min(cutoff),
                s_quad.ratio,
                s_quad.s_min,
            );
            // Contribution +d v_{i - lead + r}, i.e. W_{lead - r} -= d.
            add(lead as isize - r as isize, -d);
        }

        let mut diagonal = 0.0;
        for j in 1..last_cell {
            let a = j as f64 * h;
            if a >= cutoff {
                break;
            }
            let b = (a + h).min(cutoff);
            for (s, w) in rule.mapped(a, b) {
                let kw = w * kernel.eval(s);
                diagonal += kw;
                let l = lagrange4(lead as f64 - (s - a) / h);
                for (r, lr) in l.iter().enumerate() {
                    add((j + lead) as isize - r as isize, kw * lr);
                }
            }
        }
        // Beyond the window only the constant term survives.
        let reach = last_cell as f64 * h;
        if cutoff > reach {
            diagonal += tail_mass(kernel, reach, cutoff);
        }
        Ok(Self { h, n, cutoff, stencil, diagonal, weights })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    /// `int_h^S k`, the weight on `v_i` before the history sum.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// `W_m` for `m >= -1`; zero beyond the stored range.
    pub fn history_weight(&self, m: isize) -> f64 {
        self.weights.get((m + 1) as usize).copied().unwrap_or(0.0)
    }

    /// Largest offset with a stored weight.
    pub fn max_offset(&self) -> usize {
        self.weights.len() - 2
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diagonal * values[i];
                for (k, w) in self.weights.iter().enumerate() {
                    let j = i as isize - (k as isize - 1);
                    if j < 0 {
                        break;
                    }
                    if (j as usize) < n {
                        acc -= w * values[j as usize];
                    }
                }
                acc
            })
            .collect()
    }
}

/// `int_a^b k` for the part of the tail that never meets the window.
fn tail_mass(kernel: &SonineKernel, a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        let total = kernel.total_mass().expect("checked tail integrability");
        return total - kernel.primitive(a).expect("tail-integrable kernels have a primitive");
    }
    if let (Some(pa), Some(pb)) = (kernel.primitive(a), kernel.primitive(b)) {
        return pb - pa;
    }
    let panels = ((b - a) / 1.0).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * width;
            adaptive(|s| kernel.eval(s), lo, lo + width, 1e-14, 1e-12).value
        })
        .sum()
}
