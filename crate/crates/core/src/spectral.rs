//! Differentiation on uniform grids: Fourier (periodic extension) and
//! fourth-order finite differences.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Edge-to-peak ratio below which data counts as decayed at the window edge.
pub const EPS_TRUNC: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffMethod {
    /// Spectral when `n` is a power of two and the data has decayed at both
    /// edges, finite differences otherwise.
    #[default]
    Auto,
    Spectral,
    FiniteDifference,
}

/// `max(|v_0|, |v_{n-1}|) / max |v|`, zero for the zero function.
pub fn edge_ratio(values: &[f64]) -> f64 {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let first = values.first().map_or(0.0, |v| v.abs());
    let last = values.last().map_or(0.0, |v| v.abs());
    first.max(last) / peak
}

/// The method `Auto` resolves to for these samples.
pub fn resolve(method: DiffMethod, values: &[f64]) -> DiffMethod {
    match method {
        DiffMethod::Auto => {
            if values.len().is_power_of_two() && edge_ratio(values) <= EPS_TRUNC {
                DiffMethod::Spectral
            } else {
                DiffMethod::FiniteDifference
            }
        }
        m => m,
    }
}

/// First derivative of uniformly spaced samples.
pub fn differentiate(values: &[f64], h: f64, method: DiffMethod) -> Vec<f64> {
    match resolve(method, values) {
        DiffMethod::Spectral => Fourier::new(values.len(), h).derivative(values),
        _ => fd4(values, h),
    }
}

/// Fourth-order centred differences with fourth-order one-sided closures.
pub fn fd4(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 5, "fourth-order differences need at least five samples");
    let c = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    d[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    d[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for i in 2..n - 2 {
        d[i] = c * (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]);
    }
    let m = n - 1;
    d[m] = -c * (-25.0 * v[m] + 48.0 * v[m - 1] - 36.0 * v[m - 2] + 16.0 * v[m - 3] - 3.0 * v[m - 4]);
    d[m - 1] = -c * (-3.0 * v[m] - 10.0 * v[m - 1] + 18.0 * v[m - 2] - 6.0 * v[m - 3] + v[m - 4]);
    d
}

/// Discrete Fourier machinery for `n` samples at spacing `h`, treating the
/// window as one period of length `n h`.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    freqs: Vec<f64>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scale = 2.0 * PI / (n as f64 * h);
        let freqs = (0..n)
            .map(|k| {
                let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                signed * scale
            })
            .collect();
        Self { n, forward, inverse, freqs }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Angular frequencies `xi_k` in FFT order.
    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    /// Whether mode `k` is the unpaired Nyquist mode.
    pub fn is_nyquist(&self, k: usize) -> bool {
        self.n % 2 == 0 && k == self.n / 2
    }

    pub fn transform(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, normalised, real part only.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut spectrum);
        let norm = 1.0 / self.n as f64;
        spectrum.into_iter().map(|c| c.re * norm).collect()
    }

    /// Applies the Fourier multiplier `m(xi)` (Nyquist mode dropped).
    pub fn apply_multiplier(&self, values: &[f64], m: impl Fn(f64) -> Complex64) -> Vec<f64> {
        let mut spec = self.transform(values);
        for (k, c) in spec.iter_mut().enumerate() {
            *c = if self.is_nyquist(k) { Complex64::new(0.0, 0.0) } else { *c * m(self.freqs[k]) };
        }
        self.inverse_real(spec)
    }

    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        self.apply_multiplier(values, |xi| Complex64::new(0.0, xi))
    }
}
