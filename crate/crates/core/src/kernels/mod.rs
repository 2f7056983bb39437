//! Sonine kernel pairs `(k, kappa)` with `k * kappa = 1` on `(0, inf)`.
//!
//! Three families are built in: the power law, its exponentially tempered
//! variant and a Bessel pair whose integral kernel oscillates.

mod bessel;

pub use bessel::{bessel_i, bessel_j};

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{validation, Error, Result};
use crate::quadrature::two_sided_singular;

/// Diffusive pairs have nonnegative kernels; oscillatory ones change sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Diffusive,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `s^-alpha / Gamma(1 - alpha)`
    PowerK,
    /// `s^(alpha - 1) / Gamma(alpha)`
    PowerKappa,
    /// `exp(-lambda s) s^-alpha / Gamma(1 - alpha)`
    TemperedK { lambda: f64 },
    /// `g(s) + lambda int_0^s g`, `g = exp(-lambda s) s^(alpha - 1) / Gamma(alpha)`
    TemperedKappa { lambda: f64 },
    /// `s^(-alpha/2) I_{-alpha}(2 sqrt s)`
    BesselK,
    /// `s^((alpha-1)/2) J_{alpha-1}(2 sqrt s)`
    BesselKappa,
}

/// A locally integrable kernel on `(0, inf)` with its Laplace symbol and the
/// exponents that drive quadrature and tail-policy decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct SonineKernel {
    shape: Shape,
    alpha: f64,
    /// `1 / Gamma(alpha)` or `1 / Gamma(1 - alpha)`, whichever the shape uses.
    norm: f64,
    singularity_exponent: f64,
    growth_rate: f64,
    tail_integrable: bool,
}

impl SonineKernel {
    fn new(shape: Shape, alpha: f64, growth_rate: f64) -> Self {
        let (norm, rho, tail) = match shape {
            Shape::PowerK | Shape::TemperedK { .. } | Shape::BesselK => {
                (1.0 / gamma(1.0 - alpha), alpha, matches!(shape, Shape::TemperedK { .. }))
            }
            Shape::PowerKappa | Shape::TemperedKappa { .. } | Shape::BesselKappa => {
                (1.0 / gamma(alpha), 1.0 - alpha, false)
            }
        };
        Self { shape, alpha, norm, singularity_exponent: rho, growth_rate, tail_integrable: tail }
    }

    /// Kernel value at `s > 0`; zero for `s <= 0` (causal extension).
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        match self.shape {
            Shape::PowerK => self.norm * s.powf(-a),
            Shape::PowerKappa => self.norm * s.powf(a - 1.0),
            Shape::TemperedK { lambda } => self.norm * (-lambda * s).exp() * s.powf(-a),
            Shape::TemperedKappa { lambda } => {
                let g = self.norm * (-lambda * s).exp() * s.powf(a - 1.0);
                g + lambda.powf(1.0 - a) * gamma_lr(a, lambda * s)
            }
            Shape::BesselK => {
                let z = 2.0 * s.sqrt();
                if z <= bessel::SERIES_LIMIT {
                    // s^(-a/2) (z/2)^(-a) collapses to s^-a; no cancellation.
                    s.powf(-a) * bessel::reduced_series(-a, s, 1.0)
                } else {
                    s.powf(-0.5 * a) * bessel_i(-a, z)
                }
            }
            Shape::BesselKappa => {
                let z = 2.0 * s.sqrt();
                if z <= bessel::SERIES_LIMIT {
                    s.powf(a - 1.0) * bessel::reduced_series(a - 1.0, s, -1.0)
                } else {
                    s.powf(0.5 * (a - 1.0)) * bessel_j(a - 1.0, z)
                }
            }
        }
    }

    /// Laplace transform `int_0^inf exp(-p s) k(s) ds` (analytic continuation
    /// for the non-integrable kernels), principal branches throughout.
    pub fn laplace(&self, p: Complex64) -> Complex64 {
        let a = self.alpha;
        match self.shape {
            Shape::PowerK => p.powf(a - 1.0),
            Shape::PowerKappa => p.powf(-a),
            Shape::TemperedK { lambda } => (p + lambda).powf(a - 1.0),
            Shape::TemperedKappa { lambda } => (p + lambda).powf(-a) * (1.0 + lambda / p),
            Shape::BesselK => p.powf(a - 1.0) * (1.0 / p).exp(),
            Shape::BesselKappa => p.powf(-a) * (-1.0 / p).exp(),
        }
    }

    /// `p * khat(p)`, the symbol of "differentiate after convolving", taken
    /// at `p = 0` as its limit along the imaginary axis.
    pub fn derivative_symbol(&self, p: Complex64) -> Complex64 {
        let a = self.alpha;
        let zero = Complex64::new(0.0, 0.0);
        match self.shape {
            Shape::PowerK => p.powf(a),
            Shape::PowerKappa => p.powf(1.0 - a),
            Shape::TemperedK { lambda } => p * (p + lambda).powf(a - 1.0),
            Shape::TemperedKappa { lambda } => (p + lambda).powf(1.0 - a),
            // exp(+-1/p) has unit modulus on the imaginary axis, so the power
            // factor drives both limits to zero.
            Shape::BesselK if p == zero => zero,
            Shape::BesselK => p.powf(a) * (1.0 / p).exp(),
            Shape::BesselKappa if p == zero => zero,
            Shape::BesselKappa => p.powf(1.0 - a) * (-1.0 / p).exp(),
        }
    }

    /// `int_0^inf k`, when finite.
    pub fn total_mass(&self) -> Option<f64> {
        match self.shape {
            Shape::TemperedK { lambda } => Some(lambda.powf(self.alpha - 1.0)),
            _ => None,
        }
    }

    /// `int_0^s k` for `s >= 0`, in closed form where one exists.
    pub fn primitive(&self, s: f64) -> Option<f64> {
        if s <= 0.0 {
            return Some(0.0);
        }
        let a = self.alpha;
        match self.shape {
            Shape::PowerK => Some(self.norm * s.powf(1.0 - a) / (1.0 - a)),
            Shape::PowerKappa => Some(self.norm * s.powf(a) / a),
            Shape::TemperedK { lambda } => Some(lambda.powf(a - 1.0) * gamma_lr(1.0 - a, lambda * s)),
            _ => None,
        }
    }

    /// `(c, q)` when the kernel is exactly `c s^q`.
    pub fn power_form(&self) -> Option<(f64, f64)> {
        match self.shape {
            Shape::PowerK => Some((self.norm, -self.alpha)),
            Shape::PowerKappa => Some((self.norm, self.alpha - 1.0)),
            _ => None,
        }
    }

    /// `rho` with `|k(s)| <= C s^-rho` as `s -> 0+`.
    pub fn singularity_exponent(&self) -> f64 {
        self.singularity_exponent
    }

    /// Exponential growth tag: `|k(s)| <= C exp(growth_rate s)` for large `s`.
    pub fn growth_rate(&self) -> f64 {
        self.growth_rate
    }

    pub fn tail_integrable(&self) -> bool {
        self.tail_integrable
    }

    /// Exponential decay rate of the kernel itself at infinity, if any.
    pub fn decay_rate(&self) -> f64 {
        match self.shape {
            Shape::TemperedK { lambda } => lambda,
            _ => 0.0,
        }
    }
}

/// A kernel pair `(k, kappa)` satisfying the Sonine condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SoninePair {
    pub k: SonineKernel,
    pub kappa: SonineKernel,
    pub order: f64,
    pub tempering: f64,
    pub regime: Regime,
}

/// Growth tag recorded for the Bessel `k` unless the caller picks another.
pub const DEFAULT_BESSEL_GROWTH: f64 = 1.0;

const CONSTRUCTION_PROBES: [f64; 3] = [0.1, 1.0, 5.0];
const CONSTRUCTION_TOL: f64 = 1e-6;

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(validation(format!("fractional order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

impl SoninePair {
    fn verified(self) -> Result<Self> {
        for &t in &CONSTRUCTION_PROBES {
            let r = sonine_residual(&self, t, 1e-12)?;
            if !(r <= CONSTRUCTION_TOL) {
                return Err(Error::Numerical(format!("Sonine condition fails at t = {t}: |k * kappa - 1| = {r:.3e}")));
            }
        }
        Ok(self)
    }

    /// `k = s^-alpha / Gamma(1-alpha)`, `kappa = s^(alpha-1) / Gamma(alpha)`.
    pub fn power_law(alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        Self {
            k: SonineKernel::new(Shape::PowerK, alpha, 0.0),
            kappa: SonineKernel::new(Shape::PowerKappa, alpha, 0.0),
            order: alpha,
            tempering: 0.0,
            regime: Regime::Diffusive,
        }
        .verified()
    }

    /// Exponentially tempered power law with `khat(p) = (p + lambda)^(alpha-1)`.
    pub fn tempered_power_law(alpha: f64, lambda: f64) -> Result<Self> {
        check_order(alpha)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(validation(format!(
                "tempering lambda must be > 0 (got {lambda}); use the power-law pair for lambda = 0"
            )));
        }
        Self {
            k: SonineKernel::new(Shape::TemperedK { lambda }, alpha, 0.0),
            kappa: SonineKernel::new(Shape::TemperedKappa { lambda }, alpha, 0.0),
            order: alpha,
            tempering: lambda,
            regime: Regime::Diffusive,
        }
        .verified()
    }

    /// Bessel pair with the default growth tag.
    pub fn bessel(alpha: f64) -> Result<Self> {
        Self::bessel_with_growth(alpha, DEFAULT_BESSEL_GROWTH)
    }

    /// Bessel pair; `k` grows like `exp(2 sqrt s)`, which is below every
    /// exponential, so any positive `growth_rate` is a valid tag.
    pub fn bessel_with_growth(alpha: f64, growth_rate: f64) -> Result<Self> {
        check_order(alpha)?;
        if !(growth_rate > 0.0) || !growth_rate.is_finite() {
            return Err(validation(format!("Bessel growth tag must be > 0, got {growth_rate}")));
        }
        Self {
            k: SonineKernel::new(Shape::BesselK, alpha, growth_rate),
            kappa: SonineKernel::new(Shape::BesselKappa, alpha, 0.0),
            order: alpha,
            tempering: 0.0,
            regime: Regime::Oscillatory,
        }
        .verified()
    }
}

/// `|int_0^t k(t-s) kappa(s) ds - 1|` by endpoint-stretched adaptive quadrature.
pub fn sonine_residual(pair: &SoninePair, t: f64, quad_tol: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("Sonine residual needs t > 0, got {t}")));
    }
    let est = two_sided_singular(
        |s, r| pair.kappa.eval(s) * pair.k.eval(r),
        t,
        pair.kappa.singularity_exponent(),
        pair.k.singularity_exponent(),
        0.1 * quad_tol,
        0.1 * quad_tol,
    );
    Ok((est.value - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{left_singular, semi_infinite};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_law_examples() {
        let pair = SoninePair::power_law(0.5).unwrap();
        assert!((pair.k.eval(4.0) - 0.28209479177387814).abs() < 1e-16);
        assert!((pair.k.eval(4.0) - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-16);
        assert!(sonine_residual(&pair, 1.0, 1e-12).unwrap() < 1e-10);
        assert!(sonine_residual(&pair, 3.0, 1e-12).unwrap() < 1e-10);
        let q = SoninePair::power_law(0.25).unwrap();
        let khat = q.k.laplace(c(2.0, 0.0));
        assert!((khat.re - 0.5946035575013605).abs() < 1e-15 && khat.im.abs() < 1e-15);
        assert!(!q.k.tail_integrable());
        assert_eq!(q.k.growth_rate(), 0.0);
    }

    #[test]
    fn invalid_orders_are_rejected() {
        for a in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(SoninePair::power_law(a), Err(Error::Validation(_))));
            assert!(SoninePair::bessel(a).is_err());
        }
        assert!(matches!(SoninePair::tempered_power_law(0.5, 0.0), Err(Error::Validation(_))));
        assert!(SoninePair::tempered_power_law(0.5, -1.0).is_err());
    }

    #[test]
    fn residual_rejects_nonpositive_time() {
        let pair = SoninePair::power_law(0.5).unwrap();
        assert!(matches!(sonine_residual(&pair, 0.0, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(sonine_residual(&pair, -1.0, 1e-10), Err(Error::Domain(_))));
    }

    #[test]
    fn tempered_and_bessel_residuals() {
        let t = SoninePair::tempered_power_law(0.5, 1.0).unwrap();
        assert!(sonine_residual(&t, 2.0, 1e-12).unwrap() < 1e-8);
        let t = SoninePair::tempered_power_law(0.3, 2.0).unwrap();
        assert!(sonine_residual(&t, 1.0, 1e-12).unwrap() < 1e-8);
        let b = SoninePair::bessel(0.5).unwrap();
        assert!(sonine_residual(&b, 1.0, 1e-12).unwrap() < 1e-6);
        let b = SoninePair::bessel(0.75).unwrap();
        assert!(sonine_residual(&b, 5.0, 1e-12).unwrap() < 1e-6);
    }

    #[test]
    fn symbol_products_are_one_over_p() {
        let pairs = [
            SoninePair::power_law(0.4).unwrap(),
            SoninePair::tempered_power_law(0.5, 1.0).unwrap(),
            SoninePair::bessel(0.6).unwrap(),
        ];
        for pair in &pairs {
            for p in [c(1.0, 0.0), c(2.0, 0.0), c(0.5, 2.0)] {
                let err = (pair.k.laplace(p) * pair.kappa.laplace(p) - 1.0 / p).norm();
                assert!(err < 1e-8, "{pair:?} at {p}");
            }
        }
    }

    #[test]
    fn tempered_laplace_matches_quadrature() {
        let pair = SoninePair::tempered_power_law(0.5, 1.0).unwrap();
        let k = &pair.k;
        for p in [c(1.0, 0.0), c(3.0, 0.0), c(1.0, 2.0)] {
            let part = |f: &dyn Fn(f64) -> f64| {
                let head = left_singular(f, 1.0, k.singularity_exponent(), 1e-14, 1e-13).value;
                head + semi_infinite(f, 1.0, 1e-14, 1e-15, 1e-13).value
            };
            let re = part(&|s: f64| (-p.re * s).exp() * (p.im * s).cos() * k.eval(s));
            let im = part(&|s: f64| -(-p.re * s).exp() * (p.im * s).sin() * k.eval(s));
            let exact = k.laplace(p);
            assert!((c(re, im) - exact).norm() / exact.norm() < 1e-6, "p = {p}: {re} {im} vs {exact}");
        }
    }

    #[test]
    fn tempered_kappa_matches_its_definition() {
        // kappa = g + lambda int_0^s g, integral by quadrature
        let (a, lambda) = (0.5, 1.0);
        let pair = SoninePair::tempered_power_law(a, lambda).unwrap();
        let g = |s: f64| (-lambda * s).exp() * s.powf(a - 1.0) / gamma(a);
        for s in [0.01, 0.7, 3.0, 12.0] {
            let int_g = left_singular(g, s, 1.0 - a, 1e-15, 1e-14).value;
            let direct = g(s) + lambda * int_g;
            assert!((pair.kappa.eval(s) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
        // kappa tends to lambda^(1-alpha)
        assert!((pair.kappa.eval(60.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_regularity_moment() {
        let expected = [(0.25, 0.4663136794847217), (0.5, 0.37612638903183752), (0.75, 0.22065253026416745)];
        for (a, m) in expected {
            let k = SoninePair::power_law(a).unwrap().k;
            let est = left_singular(|s| s * k.eval(s).abs(), 1.0, a - 1.0, 1e-15, 1e-14).value;
            assert!((est - m).abs() < 1e-12, "alpha = {a}: {est}");
            assert!((est - 1.0 / ((2.0 - a) * gamma(1.0 - a))).abs() < 1e-12);
        }
    }

    #[test]
    fn regimes_by_sign() {
        let b = SoninePair::bessel(0.5).unwrap();
        assert_eq!(b.regime, Regime::Oscillatory);
        let samples: Vec<f64> = (1..=5000).map(|i| b.kappa.eval(0.01 * i as f64)).collect();
        assert!(samples.iter().any(|&v| v < 0.0));
        // First zero of cos(2 sqrt s) at s = pi^2 / 16.
        let z = PI * PI / 16.0;
        assert!(b.kappa.eval(z - 1e-3) > 0.0 && b.kappa.eval(z + 1e-3) < 0.0);
        for pair in [SoninePair::power_law(0.5).unwrap(), SoninePair::tempered_power_law(0.5, 1.0).unwrap()] {
            assert_eq!(pair.regime, Regime::Diffusive);
            for i in 1..=5000 {
                let s = 0.01 * i as f64;
                assert!(pair.k.eval(s) >= 0.0 && pair.kappa.eval(s) >= 0.0);
            }
        }
    }

    #[test]
    fn bessel_kappa_leading_behaviour() {
        let a = 0.5;
        let b = SoninePair::bessel(a).unwrap();
        let s: f64 = 1e-8;
        let lead = s.powf(a - 1.0) / gamma(a);
        assert!((b.kappa.eval(s) / lead - 1.0).abs() < 1e-7);
        // Closed form for alpha = 1/2: kappa = cos(2 sqrt s) / sqrt(pi s).
        for s in [0.3, 5.0, 35.0, 40.0, 49.0] {
            let exact = (2.0 * f64::sqrt(s)).cos() / (PI * s).sqrt();
            assert!((b.kappa.eval(s) - exact).abs() < 1e-11, "s = {s}");
        }
    }

    #[test]
    fn tempered_primitive_and_mass() {
        let k = SoninePair::tempered_power_law(0.5, 1.0).unwrap().k;
        assert!((k.total_mass().unwrap() - 1.0).abs() < 1e-15);
        let est = left_singular(|s| k.eval(s), 2.0, 0.5, 1e-15, 1e-14).value;
        assert!((k.primitive(2.0).unwrap() - est).abs() < 1e-12);
    }

    #[test]
    fn large_tempering_suppresses_k() {
        let s = 1.0;
        let small = SoninePair::tempered_power_law(0.5, 1.0).unwrap().k.eval(s);
        let big = SoninePair::tempered_power_law(0.5, 40.0).unwrap().k.eval(s);
        assert!(big < 1e-15 * small);
    }
}
