//! Scalar quadrature used throughout the crate.
//!
//! Three engines are provided:
//!
//! * fixed Gauss-Legendre rules (nodes by Newton iteration on the Legendre
//!   recurrence),
//! * globally adaptive Gauss-Kronrod (7/15 point) integration,
//! * endpoint-singular integration, which stretches the variable near an
//!   algebraic singularity `|f(s)| ~ (s - a)^(-gamma)` with
//!   `s = a + L w^(1 / (1 - gamma))` so the transformed integrand is bounded,
//!   then hands the result to the adaptive rule.
//!
//! A geometric panel rule for kernels integrated against a factor that
//! vanishes at the origin lives here too.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// The 10-point rule used for per-cell and per-panel kernel moments.
pub fn gauss10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

// Kronrod 15 / Gauss 7 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn kronrod15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_SEGMENTS: usize = 4000;

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol * |I|)`
/// or the segment budget is exhausted; the returned estimate carries the
/// error either way.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0 };
    }
    let f = &f as &dyn Fn(f64) -> f64;
    let (value, error) = kronrod15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    while heap.len() < MAX_SEGMENTS {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(f, worst.a, mid);
        let (v2, e2) = kronrod15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Estimate { value, error }
}

/// Stretching exponent that removes an `s^(-gamma)` endpoint singularity.
fn stretch_exponent(gamma: f64) -> f64 {
    if gamma <= 0.0 {
        1.0
    } else {
        1.0 / (1.0 - gamma)
    }
}

/// Integrates `f(a + d)` for `d` in `[0, len]`, where `f` may behave like
/// `d^(-gamma)` (`gamma < 1`) as `d -> 0`.
///
/// `f` receives the distance `d` from the singular endpoint, not the absolute
/// abscissa, so callers can evaluate kernels at `d` without cancellation.
pub fn left_singular(f: impl Fn(f64) -> f64, len: f64, gamma: f64, abs_tol: f64, rel_tol: f64) -> Estimate {
    debug_assert!(gamma < 1.0);
    let m = stretch_exponent(gamma);
    if m == 1.0 {
        return adaptive(f, 0.0, len, abs_tol, rel_tol);
    }
    adaptive(
        |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let d = len * w.powf(m);
            if d == 0.0 {
                return 0.0;
            }
            // Jacobian len m w^(m-1) written as m d / w so f(d) d stays finite
            // when gamma is close to 1.
            let fd = f(d);
            if fd.is_finite() {
                fd * d * (m / w)
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Integrates over `[0, t]` an integrand with algebraic singularities of
/// exponent `gamma_left` at 0 and `gamma_right` at `t`.
///
/// The interval is split at `t / 2`; `f(s, t - s)` is handed both distances so
/// neither end suffers cancellation.
pub fn two_sided_singular(
    f: impl Fn(f64, f64) -> f64,
    t: f64,
    gamma_left: f64,
    gamma_right: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Estimate {
    let half = 0.5 * t;
    let left = left_singular(|d| f(d, t - d), half, gamma_left, 0.5 * abs_tol, rel_tol);
    let right = left_singular(|d| f(t - d, d), half, gamma_right, 0.5 * abs_tol, rel_tol);
    Estimate { value: left.value + right.value, error: left.error + right.error }
}

/// Integrates a decaying integrand over `[a, inf)`.
///
/// Panels of growing width are added until the integrand magnitude at the
/// panel end falls below `cut` and the panel's contribution is negligible.
pub fn semi_infinite(f: impl Fn(f64) -> f64, a: f64, cut: f64, abs_tol: f64, rel_tol: f64) -> Estimate {
    let mut total = Estimate { value: 0.0, error: 0.0 };
    let mut lo = a;
    let mut width = 1.0;
    for _ in 0..200 {
        let hi = lo + width;
        let piece = adaptive(&f, lo, hi, abs_tol, rel_tol);
        total.value += piece.value;
        total.error += piece.error;
        let tail_small = f(hi).abs() < cut && f(0.5 * (lo + hi)).abs() < cut.sqrt();
        if tail_small && piece.value.abs() <= abs_tol.max(rel_tol * total.value.abs()) {
            break;
        }
        lo = hi;
        width *= 1.5;
    }
    total
}

/// Geometric panels `[h 2^-(k+1), h 2^-k]` covering `(s_min, h]`, each
/// integrated with the 10-point Gauss-Legendre rule.
///
/// Intended for integrands `g(s) k(s)` with `g(0) = 0` and a kernel
/// singularity `s^-rho`, `rho < 2`; the neglected piece `(0, s_min]` is
/// `O(s_min^(2 - rho))`.
pub fn graded_panels(f: impl Fn(f64) -> f64, h: f64, ratio: f64, s_min: f64) -> f64 {
    debug_assert!(ratio > 0.0 && ratio < 1.0);
    let rule = gauss10();
    let mut hi = h;
    let mut total = 0.0;
    while hi > s_min {
        let lo = (hi * ratio).max(s_min);
        total += rule.integrate(lo, hi, &f);
        hi = lo;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_high_degree_polynomials() {
        let rule = GaussLegendre::new(10);
        // degree 19 is the highest exact degree for ten nodes
        let approx = rule.integrate(0.0, 1.0, |x| x.powi(19));
        assert!((approx - 0.05).abs() < 1e-15);
        let total: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let est = adaptive(|x| (10.0 * x).sin(), 0.0, PI, 1e-13, 1e-13);
        let exact = (1.0 - (10.0 * PI).cos()) / 10.0;
        assert!((est.value - exact).abs() < 1e-12, "{est:?}");
    }

    #[test]
    fn left_singular_integrates_inverse_square_root() {
        // int_0^1 d^-0.75 = 4
        let est = left_singular(|d| d.powf(-0.75), 1.0, 0.75, 1e-14, 1e-14);
        assert!((est.value - 4.0).abs() < 1e-12, "{est:?}");
    }

    #[test]
    fn two_sided_beta_integral() {
        // int_0^1 s^-0.5 (1-s)^-0.5 ds = pi
        let est = two_sided_singular(|s, r| s.powf(-0.5) * r.powf(-0.5), 1.0, 0.5, 0.5, 1e-14, 1e-14);
        assert!((est.value - PI).abs() < 1e-12, "{est:?}");
    }

    #[test]
    fn semi_infinite_exponential() {
        let est = semi_infinite(|s| (-2.0 * s).exp(), 0.0, 1e-14, 1e-14, 1e-13);
        assert!((est.value - 0.5).abs() < 1e-12, "{est:?}");
    }

    #[test]
    fn graded_panels_neglect_only_a_tiny_piece() {
        // int_0^1 s * s^-1.5 ds = 2
        let value = graded_panels(|s| s.powf(-0.5), 1.0, 0.5, 1e-10);
        assert!((value - 2.0).abs() < 3e-5, "{value}");
    }
}
