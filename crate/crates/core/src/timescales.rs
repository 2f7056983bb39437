//! Subjective time scales: the aging diffeomorphism and the amnesia weight.

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};

/// Built-in aging families `x = psi(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScaleFamily {
    Identity,
    /// `psi(t) = a t + b`, `a > 0`.
    Affine {
        a: f64,
        b: f64,
    },
    /// `psi(t) = sinh(t)`.
    Sinh,
    /// `psi(t) = t + eps sin(t)`, `0 <= eps < 1`.
    Wobble {
        eps: f64,
    },
}

/// Strictly increasing C1 diffeomorphism of the real line mapping physical
/// time to operational time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgingScale {
    family: ScaleFamily,
}

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 100;

impl AgingScale {
    pub fn identity() -> Self {
        Self { family: ScaleFamily::Identity }
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(validation(format!(
                "affine scale needs a finite slope a > 0 (got a = {a}, b = {b}); a <= 0 is not increasing"
            )));
        }
        Ok(Self { family: ScaleFamily::Affine { a, b } })
    }

    pub fn sinh() -> Self {
        Self { family: ScaleFamily::Sinh }
    }

    pub fn wobble(eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(validation(format!(
                "wobble scale needs 0 <= eps < 1 (got {eps}); psi'(t) = 1 + eps cos t vanishes when eps >= 1"
            )));
        }
        Ok(Self { family: ScaleFamily::Wobble { eps } })
    }

    pub fn from_family(family: ScaleFamily) -> Result<Self> {
        match family {
            ScaleFamily::Identity => Ok(Self::identity()),
            ScaleFamily::Affine { a, b } => Self::affine(a, b),
            ScaleFamily::Sinh => Ok(Self::sinh()),
            ScaleFamily::Wobble { eps } => Self::wobble(eps),
        }
    }

    pub fn family(&self) -> ScaleFamily {
        self.family
    }

    /// `psi(t)`.
    pub fn forward(&self, t: f64) -> f64 {
        match self.family {
            ScaleFamily::Identity => t,
            ScaleFamily::Affine { a, b } => a * t + b,
            ScaleFamily::Sinh => t.sinh(),
            ScaleFamily::Wobble { eps } => t + eps * t.sin(),
        }
    }

    /// `psi'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        match self.family {
            ScaleFamily::Identity => 1.0,
            ScaleFamily::Affine { a, .. } => a,
            ScaleFamily::Sinh => t.cosh(),
            ScaleFamily::Wobble { eps } => 1.0 + eps * t.cos(),
        }
    }

    /// `psi^-1(x)`.
    pub fn inverse(&self, x: f64) -> f64 {
        match self.family {
            ScaleFamily::Identity => x,
            ScaleFamily::Affine { a, b } => (x - b) / a,
            ScaleFamily::Sinh => x.asinh(),
            ScaleFamily::Wobble { eps } => self.invert_wobble(x, eps),
        }
    }

    // Safeguarded Newton. psi(t) - t is bounded by eps, so the root is
    // bracketed by [x - eps, x + eps].
    fn invert_wobble(&self, x: f64, eps: f64) -> f64 {
        if eps == 0.0 {
            return x;
        }
        let mut lo = x - eps;
        let mut hi = x + eps;
        let mut t = x;
        for _ in 0..NEWTON_MAX_ITER {
            let r = self.forward(t) - x;
            if r == 0.0 {
                return t;
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = r / self.derivative(t);
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= NEWTON_TOL * t.abs().max(1.0) {
                return next;
            }
            t = next;
        }
        t
    }
}

/// Built-in amnesia weight families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFamily {
    /// `omega = 1`.
    Constant,
    /// `omega(t) = exp(beta psi(t))`.
    ExpOperational { beta: f64 },
    /// `omega(t) = exp(-delta psi(t)^2 + beta psi(t))`.
    GaussianOperational { delta: f64, beta: f64 },
}

/// Strictly positive C1 weight on the real line, stored with its analytic
/// derivative and the decay rate it guarantees toward the infinite past.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmnesiaWeight {
    family: WeightFamily,
    scale: AgingScale,
}

impl AmnesiaWeight {
    pub fn constant(scale: AgingScale) -> Self {
        Self { family: WeightFamily::Constant, scale }
    }

    pub fn exp_operational(beta: f64, scale: AgingScale) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(validation(format!(
                "exp_operational weight needs beta > 0 (got {beta}); use the constant weight for beta = 0"
            )));
        }
        Ok(Self { family: WeightFamily::ExpOperational { beta }, scale })
    }

    pub fn gaussian_operational(delta: f64, beta: f64, scale: AgingScale) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(validation(format!("gaussian_operational weight needs delta > 0 (got {delta})")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(validation(format!("gaussian_operational weight needs beta >= 0 (got {beta})")));
        }
        Ok(Self { family: WeightFamily::GaussianOperational { delta, beta }, scale })
    }

    pub fn from_family(family: WeightFamily, scale: AgingScale) -> Result<Self> {
        match family {
            WeightFamily::Constant => Ok(Self::constant(scale)),
            WeightFamily::ExpOperational { beta } => Self::exp_operational(beta, scale),
            WeightFamily::GaussianOperational { delta, beta } => Self::gaussian_operational(delta, beta, scale),
        }
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn scale(&self) -> &AgingScale {
        &self.scale
    }

    /// Log of the weight as a function of operational time `x = psi(t)`.
    pub fn log_at_operational(&self, x: f64) -> f64 {
        match self.family {
            WeightFamily::Constant => 0.0,
            WeightFamily::ExpOperational { beta } => beta * x,
            WeightFamily::GaussianOperational { delta, beta } => -delta * x * x + beta * x,
        }
    }

    /// `omega(psi^-1(x))` evaluated without inverting the scale.
    pub fn at_operational(&self, x: f64) -> f64 {
        self.log_at_operational(x).exp()
    }

    /// `omega(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.at_operational(self.scale.forward(t))
    }

    /// `omega'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        let x = self.scale.forward(t);
        let dlog_dx = match self.family {
            WeightFamily::Constant => return 0.0,
            WeightFamily::ExpOperational { beta } => beta,
            WeightFamily::GaussianOperational { delta, beta } => -2.0 * delta * x + beta,
        };
        dlog_dx * self.scale.derivative(t) * self.at_operational(x)
    }

    /// `beta` such that `omega = O(exp(-beta |psi|))` toward the past; 0 when
    /// no decay is claimed.
    pub fn past_decay_rate(&self) -> f64 {
        match self.family {
            WeightFamily::Constant => 0.0,
            WeightFamily::ExpOperational { beta } => beta,
            WeightFamily::GaussianOperational { beta, .. } => beta,
        }
    }
}

/// Outcome of a single admissibility probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotClaimed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Worst residual observed (meaning depends on the check).
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub checks: Vec<AdmissibilityCheck>,
}

impl AdmissibilityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&AdmissibilityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const ROUND_TRIP_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-6;

fn status(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

fn fd_relative_error(f: impl Fn(f64) -> f64, df: f64, t: f64) -> f64 {
    let fd = (f(t + FD_STEP) - f(t - FD_STEP)) / (2.0 * FD_STEP);
    (fd - df).abs() / df.abs().max(1e-300)
}

/// Probes the scale/weight contract on a sorted grid of physical times.
/// Failures are reported, never raised.
pub fn check_admissibility(scale: &AgingScale, weight: &AmnesiaWeight, probe: &[f64]) -> AdmissibilityReport {
    let mut checks = Vec::new();

    let min_gap = probe
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| scale.forward(w[1]) - scale.forward(w[0]))
        .fold(f64::INFINITY, f64::min);
    checks.push(AdmissibilityCheck { name: "monotonicity", status: status(min_gap > 0.0), worst: min_gap });

    let min_slope = probe.iter().map(|&t| scale.derivative(t)).fold(f64::INFINITY, f64::min);
    checks.push(AdmissibilityCheck {
        name: "scale_derivative_positive",
        status: status(min_slope > 0.0),
        worst: min_slope,
    });

    let round_trip = probe
        .iter()
        .map(|&t| {
            let back = scale.inverse(scale.forward(t));
            let x = scale.forward(t);
            let fwd = scale.forward(scale.inverse(x));
            ((back - t).abs() / t.abs().max(1.0)).max((fwd - x).abs() / x.abs().max(1.0))
        })
        .fold(0.0, f64::max);
    checks.push(AdmissibilityCheck {
        name: "inverse_consistency",
        status: status(round_trip <= ROUND_TRIP_TOL),
        worst: round_trip,
    });

    let scale_fd =
        probe.iter().map(|&t| fd_relative_error(|s| scale.forward(s), scale.derivative(t), t)).fold(0.0, f64::max);
    checks.push(AdmissibilityCheck {
        name: "scale_derivative_fd",
        status: status(scale_fd <= FD_TOL),
        worst: scale_fd,
    });

    let min_weight = probe.iter().map(|&t| weight.value(t)).fold(f64::INFINITY, f64::min);
    checks.push(AdmissibilityCheck { name: "weight_positive", status: status(min_weight > 0.0), worst: min_weight });

    // A zero derivative (constant weight) has no relative error to measure.
    let weight_fd = probe
        .iter()
        .filter(|&&t| weight.derivative(t) != 0.0)
        .map(|&t| fd_relative_error(|s| weight.value(s), weight.derivative(t), t))
        .fold(0.0, f64::max);
    checks.push(AdmissibilityCheck {
        name: "weight_derivative_fd",
        status: status(weight_fd <= FD_TOL),
        worst: weight_fd,
    });

    checks.push(decay_check(scale, weight, probe));
    AdmissibilityReport { checks }
}

// log omega(psi^-1(x)) - beta x must stay below a constant for x <= -1. The
// constant is fitted once on the band x in [-2, -1] (or the probe point
// closest to -1) and then enforced on every remaining point.
fn decay_check(scale: &AgingScale, weight: &AmnesiaWeight, probe: &[f64]) -> AdmissibilityCheck {
    let beta = weight.past_decay_rate();
    if beta == 0.0 {
        return AdmissibilityCheck { name: "past_decay", status: CheckStatus::NotClaimed, worst: 0.0 };
    }
    let excess: Vec<(f64, f64)> = probe
        .iter()
        .map(|&t| {
            let x = scale.forward(t);
            (x, weight.value(t).ln() - beta * x)
        })
        .filter(|(x, _)| *x <= -1.0)
        .collect();
    if excess.is_empty() {
        return AdmissibilityCheck { name: "past_decay", status: CheckStatus::NotClaimed, worst: 0.0 };
    }
    let band: Vec<f64> = excess.iter().filter(|(x, _)| *x >= -2.0).map(|(_, r)| *r).collect();
    let fitted = if band.is_empty() {
        excess.iter().max_by(|a, b| a.0.total_cmp(&b.0)).map(|(_, r)| *r).unwrap_or(0.0)
    } else {
        band.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let worst = excess.iter().map(|(_, r)| r - fitted).fold(f64::NEG_INFINITY, f64::max);
    AdmissibilityCheck { name: "past_decay", status: status(worst <= 1e-9 * fitted.abs().max(1.0)), worst }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe() -> Vec<f64> {
        (0..=200).map(|i| -10.0 + 0.1 * i as f64).collect()
    }

    #[test]
    fn identity_and_affine_examples() {
        let id = AgingScale::identity();
        assert_eq!(id.forward(2.5), 2.5);
        assert_eq!(id.derivative(-7.0), 1.0);
        let aff = AgingScale::affine(2.0, 0.0).unwrap();
        assert_eq!(aff.forward(3.0), 6.0);
        assert_eq!(aff.inverse(6.0), 3.0);
        assert_eq!(aff.derivative(3.0), 2.0);
    }

    #[test]
    fn non_monotone_parameters_are_rejected() {
        assert!(matches!(AgingScale::wobble(1.5), Err(crate::Error::Validation(_))));
        assert!(AgingScale::wobble(1.0).is_err());
        assert!(AgingScale::affine(0.0, 1.0).is_err());
        assert!(AgingScale::affine(-2.0, 1.0).is_err());
        assert!(AmnesiaWeight::exp_operational(0.0, AgingScale::identity()).is_err());
        assert!(AmnesiaWeight::exp_operational(-1.0, AgingScale::identity()).is_err());
    }

    #[test]
    fn exp_operational_weight_values() {
        let w = AmnesiaWeight::exp_operational(1.0, AgingScale::identity()).unwrap();
        assert!((w.value(-3.0) - (-3.0f64).exp()).abs() < 1e-16);
        assert_eq!(w.past_decay_rate(), 1.0);
        let w2 = AmnesiaWeight::exp_operational(1.0, AgingScale::affine(2.0, 0.0).unwrap()).unwrap();
        assert!((w2.value(-3.0) - (-6.0f64).exp()).abs() < 1e-17);
        let c = AmnesiaWeight::constant(AgingScale::sinh());
        assert_eq!(c.value(4.0), 1.0);
        assert_eq!(c.past_decay_rate(), 0.0);
    }

    #[test]
    fn wobble_inverse_round_trip() {
        let s = AgingScale::wobble(0.9).unwrap();
        for &t in &[-40.0, -3.3, 0.0, 1e-8, 2.0, 17.5] {
            let x = s.forward(t);
            assert!((s.inverse(x) - t).abs() <= 1e-12 * t.abs().max(1.0));
        }
    }

    #[test]
    fn admissibility_examples() {
        let id = AgingScale::identity();
        let report = check_admissibility(&id, &AmnesiaWeight::constant(id), &probe());
        assert!(report.all_pass(), "{report:?}");

        let wob = AgingScale::wobble(0.5).unwrap();
        let w = AmnesiaWeight::exp_operational(1.0, wob).unwrap();
        let report = check_admissibility(&wob, &w, &probe());
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.get("past_decay").unwrap().status, CheckStatus::Pass);

        let aff = AgingScale::affine(2.0, 0.0).unwrap();
        let report = check_admissibility(&aff, &AmnesiaWeight::constant(aff), &probe());
        assert!(report.all_pass());
        assert_eq!(report.get("past_decay").unwrap().status, CheckStatus::NotClaimed);
    }

    #[test]
    fn gaussian_weight_passes_decay_check() {
        let s = AgingScale::identity();
        let w = AmnesiaWeight::gaussian_operational(0.1, 0.5, s).unwrap();
        let report = check_admissibility(&s, &w, &probe());
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn growth_to_infinity() {
        let t = 1e3;
        for s in [
            AgingScale::identity(),
            AgingScale::affine(0.5, -3.0).unwrap(),
            AgingScale::sinh(),
            AgingScale::wobble(0.7).unwrap(),
        ] {
            assert!(s.forward(t) >= 0.4 * t);
            assert!(s.forward(-t) <= -0.4 * t);
        }
    }
}
