//! Bessel functions `J_nu` and `I_nu` of real order `nu` in `(-1, 1)`.
//!
//! Ascending series below the switchover argument, Hankel asymptotics above.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Arguments up to this value use the power series.
pub const SERIES_LIMIT: f64 = 12.0;
const MAX_TERMS: usize = 60;
const TERM_TOL: f64 = 1e-16;
const MAX_ASYMPTOTIC_TERMS: usize = 40;

/// `sum_m sign^m q^m / (m! Gamma(m + nu + 1))`, the common series factor of
/// `J_nu` (`sign = -1`) and `I_nu` (`sign = +1`) with `q = (z/2)^2`.
pub(crate) fn reduced_series(nu: f64, q: f64, sign: f64) -> f64 {
    let mut term = 1.0 / gamma(nu + 1.0);
    let mut sum = term;
    for m in 0..MAX_TERMS {
        let mf = m as f64;
        term *= sign * q / ((mf + 1.0) * (mf + 1.0 + nu));
        sum += term;
        if term.abs() <= TERM_TOL * sum.abs() {
            break;
        }
    }
    sum
}

/// Terms `a_k(nu) z^-k` of the Hankel expansion, truncated at the smallest.
fn hankel_terms(nu: f64, z: f64) -> Vec<f64> {
    let mu = 4.0 * nu * nu;
    let mut terms = Vec::with_capacity(MAX_ASYMPTOTIC_TERMS);
    let mut a = 1.0;
    terms.push(a);
    for k in 1..MAX_ASYMPTOTIC_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = a * (mu - odd * odd) / (8.0 * k as f64 * z);
        // Stop at the smallest term; the series is only asymptotic.
        if next.abs() >= a.abs() || next == 0.0 {
            break;
        }
        a = next;
        terms.push(a);
        if a.abs() < 1e-17 {
            break;
        }
    }
    terms
}

fn j_asymptotic(nu: f64, z: f64) -> f64 {
    let terms = hankel_terms(nu, z);
    let mut p = 0.0;
    let mut q = 0.0;
    for (k, &a) in terms.iter().enumerate() {
        // a_k z^-k with the i^k phase split into P (even) and Q (odd).
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
    }
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn i_asymptotic(nu: f64, z: f64) -> f64 {
    let terms = hankel_terms(nu, z);
    let growing: f64 = terms.iter().enumerate().map(|(k, a)| if k % 2 == 0 { *a } else { -a }).sum();
    let decaying: f64 = terms.iter().sum();
    let norm = 1.0 / (2.0 * PI * z).sqrt();
    z.exp() * norm * growing - (nu * PI).sin() * (-z).exp() * norm * decaying
}

fn at_zero(nu: f64) -> f64 {
    if nu == 0.0 {
        1.0
    } else if nu > 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Bessel function of the first kind `J_nu(z)` for `nu` in `(-1, 1)`, `z >= 0`.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    debug_assert!(nu > -1.0 && nu < 1.0 && z >= 0.0);
    if z == 0.0 {
        return at_zero(nu);
    }
    if z <= SERIES_LIMIT {
        let half = 0.5 * z;
        half.powf(nu) * reduced_series(nu, half * half, -1.0)
    } else {
        j_asymptotic(nu, z)
    }
}

/// Modified Bessel function of the first kind `I_nu(z)` for `nu` in `(-1, 1)`, `z >= 0`.
pub fn bessel_i(nu: f64, z: f64) -> f64 {
    debug_assert!(nu > -1.0 && nu < 1.0 && z >= 0.0);
    if z == 0.0 {
        return at_zero(nu);
    }
    if z <= SERIES_LIMIT {
        let half = 0.5 * z;
        half.powf(nu) * reduced_series(nu, half * half, 1.0)
    } else {
        i_asymptotic(nu, z)
    }
}
