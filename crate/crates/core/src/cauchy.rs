//! The fractional Cauchy problem `dv/dtau = sigma D v + f` in the
//! transmuted frame, solved spectrally and by the method of lines.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::fracops::{ConvolutionQuadrature, MarchaudQuadrature, SQuad, Stencil, TailPolicy};
use crate::grid::{norms, GridFunction};
use crate::kernels::{Regime, SoninePair};
use crate::spectral::{Fourier, EPS_TRUNC};
use crate::timescales::{AgingScale, AmnesiaWeight};

/// Sharp constant of `sup |v| <= C ||v||_{H^1(R)}`.
pub const EMBEDDING_CONSTANT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Norm growth beyond this factor aborts an expansive run.
pub const GROWTH_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorForm {
    /// `int_0^S [v(x) - v(x - s)] k(s) ds`, symbol `khat(0) - khat(i xi)`.
    Marchaud,
    /// `d/dx (k * v)`, symbol `i xi khat(i xi)`.
    Weyl,
}

/// Source term `f(tau, x)`.
pub type Forcing = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CauchyProblem {
    pub pair: SoninePair,
    pub scale: AgingScale,
    pub weight: AmnesiaWeight,
    pub u0: GridFunction,
    pub forcing: Option<Forcing>,
    pub horizon: f64,
    pub dt: f64,
    /// `-1` (dissipative, default) or `+1`.
    pub sign: f64,
    pub form: OperatorForm,
    /// Cutoff for Marchaud weights when `k` is not tail-integrable.
    pub tail: Option<TailPolicy>,
    /// Keep every `snapshot_every`-th state (0 keeps only the first and last).
    pub snapshot_every: usize,
}

impl fmt::Debug for CauchyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyProblem")
            .field("pair", &self.pair)
            .field("horizon", &self.horizon)
            .field("dt", &self.dt)
            .field("sign", &self.sign)
            .field("form", &self.form)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl CauchyProblem {
    /// Dissipative Marchaud problem without forcing.
    pub fn new(
        pair: SoninePair,
        scale: AgingScale,
        weight: AmnesiaWeight,
        u0: GridFunction,
        horizon: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(validation(format!("horizon must be > 0, got {horizon}")));
        }
        if !(dt > 0.0) || dt > horizon * (1.0 + 1e-12) {
            return Err(validation(format!(
                "time step must satisfy 0 < dt <= horizon (dt = {dt}, horizon = {horizon})"
            )));
        }
        let edge = u0.edge_ratio();
        if edge > EPS_TRUNC {
            return Err(validation(format!(
                "initial datum has not decayed at the window edge (edge/peak = {edge:.3e} > {EPS_TRUNC:.0e})"
            )));
        }
        Ok(Self {
            pair,
            scale,
            weight,
            u0,
            forcing: None,
            horizon,
            dt,
            sign: -1.0,
            form: OperatorForm::Marchaud,
            tail: None,
            snapshot_every: 0,
        })
    }

    pub fn with_form(mut self, form: OperatorForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn with_tail(mut self, tail: TailPolicy) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        self
    }

    /// Sets the operator sign; `+1` is expansive and must be asked for.
    pub fn with_sign(mut self, sign: f64, allow_expansive: bool) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(validation(format!("operator sign must be +1 or -1, got {sign}")));
        }
        if sign > 0.0 && !allow_expansive {
            return Err(Error::Config("sign +1 is expansive; set the explicit allow flag to run it".into()));
        }
        self.sign = sign;
        Ok(self)
    }

    fn steps(&self) -> (usize, f64) {
        let count = ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (count, self.horizon / count as f64)
    }

    fn forcing_at(&self, tau: f64) -> Option<Vec<f64>> {
        self.forcing.as_ref().map(|f| self.u0.grid().points().map(|x| f(tau, x)).collect())
    }

    /// Symbol `m(xi)` of the chosen operator form.
    pub fn symbol(&self, xi: f64) -> Result<Complex64> {
        let p = Complex64::new(0.0, xi);
        match self.form {
            OperatorForm::Marchaud => {
                let mass = self.pair.k.total_mass().ok_or_else(|| {
                    Error::Config("Marchaud form needs a tail-integrable k (khat(0) is undefined)".into())
                })?;
                Ok(Complex64::new(mass, 0.0) - self.pair.k.laplace(p))
            }
            OperatorForm::Weyl => Ok(self.pair.k.derivative_symbol(p)),
        }
    }
}

/// Norm history of an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub l2_norms: Vec<f64>,
    pub h1_norms: Vec<f64>,
    pub sup_weighted: Vec<f64>,
    /// `sup |v(tau)| - C ||u0||_{H^1}`.
    pub envelope_margin: Vec<f64>,
    pub sign: f64,
    #[serde(skip)]
    pub snapshots: Vec<(usize, f64, GridFunction)>,
    #[serde(skip)]
    pub final_state: Option<GridFunction>,
}

impl EvolutionTrace {
    fn new(sign: f64) -> Self {
        Self {
            times: Vec::new(),
            l2_norms: Vec::new(),
            h1_norms: Vec::new(),
            sup_weighted: Vec::new(),
            envelope_margin: Vec::new(),
            sign,
            snapshots: Vec::new(),
            final_state: None,
        }
    }

    fn record(&mut self, step: usize, tau: f64, v: &GridFunction, u0_h1: f64, every: usize, last: bool) {
        let r = norms(v);
        self.times.push(tau);
        self.l2_norms.push(r.l2);
        self.h1_norms.push(r.h1);
        self.sup_weighted.push(r.sup_weighted);
        self.envelope_margin.push(r.sup_weighted - EMBEDDING_CONSTANT * u0_h1);
        if step == 0 || last || (every > 0 && step % every == 0) {
            self.snapshots.push((step, tau, v.clone()));
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `tau,l2,h1,sup_weighted,envelope_margin`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Config(format!("csv write failed: {e}"));
        w.write_record(["tau", "l2", "h1", "sup_weighted", "envelope_margin"]).map_err(io)?;
        for i in 0..self.times.len() {
            let row =
                [self.times[i], self.l2_norms[i], self.h1_norms[i], self.sup_weighted[i], self.envelope_margin[i]];
            w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Config(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

fn guard(problem: &CauchyProblem, tau: f64, l2: f64, l2_0: f64) -> Result<()> {
    if problem.sign > 0.0 && l2_0 > 0.0 {
        let ratio = l2 / l2_0;
        if !(ratio <= GROWTH_CAP) {
            return Err(Error::GrowthGuard { tau, ratio });
        }
    }
    Ok(())
}

/// Exponential integrator: `vhat <- e^{sigma dt m} vhat + phi fhat`, exact
/// in time for autonomous problems, first order (frozen `f`) with forcing.
pub fn spectral_evolve(problem: &CauchyProblem) -> Result<EvolutionTrace> {
    let grid = *problem.u0.grid();
    let n = grid.len();
    if !n.is_power_of_two() {
        return Err(validation(format!("spectral evolution needs a power-of-two grid, got n = {n}")));
    }
    let fourier = Fourier::new(n, grid.h());
    let (count, dt) = problem.steps();
    let sigma = problem.sign;
    let mut propagator = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for (k, &xi) in fourier.frequencies().iter().enumerate() {
        if fourier.is_nyquist(k) {
            propagator.push(Complex64::new(0.0, 0.0));
            phi.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let z = sigma * dt * problem.symbol(xi)?;
        let e = z.exp();
        propagator.push(e);
        // (e^z - 1) / z * dt, with the series near z = 0
        phi.push(if z.norm() < 1e-8 { dt * (1.0 + 0.5 * z) } else { dt * (e - 1.0) / z });
    }

    let u0_h1 = norms(&problem.u0).h1;
    let l2_0 = problem.u0.l2();
    let mut trace = EvolutionTrace::new(sigma);
    trace.record(0, 0.0, &problem.u0, u0_h1, problem.snapshot_every, count == 0);
    let mut spec = fourier.transform(problem.u0.values());
    let mut state = problem.u0.clone();
    for step in 1..=count {
        let tau_prev = (step - 1) as f64 * dt;
        let forcing = problem.forcing_at(tau_prev).map(|f| fourier.transform(&f));
        for k in 0..n {
            spec[k] *= propagator[k];
            if let Some(fh) = &forcing {
                spec[k] += phi[k] * fh[k];
            }
        }
        let tau = step as f64 * dt;
        state = GridFunction::new(grid, fourier.inverse_real(spec.clone()))?;
        guard(problem, tau, state.l2(), l2_0)?;
        trace.record(step, tau, &state, u0_h1, problem.snapshot_every, step == count);
    }
    trace.final_state = Some(state);
    Ok(trace)
}

/// Dense lower-triangular discretisation of the operator on the window.
#[derive(Debug, Clone, PartialEq)]
pub struct MolOperator {
    n: usize,
    /// Row `i` holds columns `0..=i`, packed.
    rows: Vec<f64>,
}

impl MolOperator {
    fn offset(i: usize) -> usize {
        i * (i + 1) / 2
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.rows[Self::offset(i) + j]
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[Self::offset(i)..Self::offset(i) + i + 1]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Assembles the causal operator for the problem's form and grid.
    pub fn assemble(problem: &CauchyProblem) -> Result<Self> {
        let grid = problem.u0.grid();
        let (n, h) = (grid.len(), grid.h());
        let mut rows = vec![0.0; n * (n + 1) / 2];
        match problem.form {
            OperatorForm::Marchaud => {
                let tail = match problem.tail {
                    Some(t) => t,
                    None if problem.pair.k.tail_integrable() => TailPolicy::Unbounded,
                    None => {
                        return Err(Error::Config(
                            "Marchaud form with a non-integrable tail needs an explicit cutoff".into(),
                        ))
                    }
                };
                let q = MarchaudQuadrature::build_with(&problem.pair.k, h, n, tail, SQuad::default(), Stencil::Causal)?;
                for i in 0..n {
                    let base = Self::offset(i);
                    rows[base + i] += q.diagonal();
                    for m in 0..=i.min(q.max_offset()) {
                        rows[base + i - m] -= q.history_weight(m as isize);
                    }
                }
            }
            OperatorForm::Weyl => {
                let q = ConvolutionQuadrature::build(&problem.pair.k, h, n)?;
                // conv row i: sum_{j<i} w_j v_{i-j} + edge_i v_0
                let conv_row = |i: usize| -> Vec<f64> {
                    let mut r = vec![0.0; i + 1];
                    for j in 0..i {
                        r[i - j] += q.weights()[j];
                    }
                    if i > 0 {
                        r[0] += q.edge_weight(i);
                    }
                    r
                };
                let mut prev2: Vec<f64> = Vec::new();
                let mut prev1: Vec<f64> = Vec::new();
                for i in 0..n {
                    let cur = conv_row(i);
                    let base = Self::offset(i);
                    // Backward differences: BDF2 where two past rows exist.
                    match i {
                        0 => {}
                        1 => {
                            for (j, c) in cur.iter().enumerate() {
                                rows[base + j] += c / h;
                            }
                            for (j, c) in prev1.iter().enumerate() {
                                rows[base + j] -= c / h;
                            }
                        }
                        _ => {
                            let s = 0.5 / h;
                            for (j, c) in cur.iter().enumerate() {
                                rows[base + j] += 3.0 * s * c;
                            }
                            for (j, c) in prev1.iter().enumerate() {
                                rows[base + j] -= 4.0 * s * c;
                            }
                            for (j, c) in prev2.iter().enumerate() {
                                rows[base + j] += s * c;
                            }
                        }
                    }
                    prev2 = std::mem::replace(&mut prev1, cur);
                }
            }
        }
        Ok(Self { n, rows })
    }

    /// Solves `(I - sigma dt M) x = rhs` by forward substitution.
    pub fn solve_implicit(&self, rhs: &[f64], sigma: f64, dt: f64) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            let row = self.row(i);
            let diag = 1.0 - sigma * dt * row[i];
            if !(diag.abs() > 1e-14) {
                return Err(Error::Numerical(format!(
                    "implicit step is singular at row {i}: diagonal 1 - sigma dt M_ii = {diag:.3e} \
                     (M_ii = {:.3e}, dt = {dt})",
                    row[i]
                )));
            }
            let mut acc = rhs[i];
            for j in 0..i {
                acc += sigma * dt * row[j] * x[j];
            }
            x[i] = acc / diag;
        }
        Ok(x)
    }
}

/// Implicit Euler on the assembled operator: first order in `dt`, second in `h`.
pub fn mol_evolve(problem: &CauchyProblem) -> Result<EvolutionTrace> {
    let op = MolOperator::assemble(problem)?;
    mol_evolve_with(problem, &op)
}

pub fn mol_evolve_with(problem: &CauchyProblem, op: &MolOperator) -> Result<EvolutionTrace> {
    let grid = *problem.u0.grid();
    let (count, dt) = problem.steps();
    let u0_h1 = norms(&problem.u0).h1;
    let l2_0 = problem.u0.l2();
    let mut trace = EvolutionTrace::new(problem.sign);
    trace.record(0, 0.0, &problem.u0, u0_h1, problem.snapshot_every, false);
    let mut state = problem.u0.clone();
    for step in 1..=count {
        let tau = step as f64 * dt;
        let mut rhs = state.values().to_vec();
        if let Some(f) = problem.forcing_at(tau) {
            for (r, fi) in rhs.iter_mut().zip(f) {
                *r += dt * fi;
            }
        }
        state = GridFunction::new(grid, op.solve_implicit(&rhs, problem.sign, dt)?)?;
        guard(problem, tau, state.l2(), l2_0)?;
        trace.record(step, tau, &state, u0_h1, problem.snapshot_every, step == count);
    }
    trace.final_state = Some(state);
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeViolation {
    pub tau: f64,
    pub sup: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub samples: usize,
    /// Times where `sup |v| > C ||v||_{H^1} (1 + tol)`.
    pub violations: Vec<EnvelopeViolation>,
    /// Largest `sup |v| / (C ||v||_{H^1})` seen.
    pub worst_ratio: f64,
    /// Whether `||v(tau)||_{H^1} <= ||u0||_{H^1}` held throughout.
    pub h1_nonincreasing: bool,
    /// Per snapshot: `max_x |v| - C ||u0||_{H^1}`; dividing by the weight
    /// gives the physical bound `|u(t)| <= C ||u0|| / omega(t)`.
    pub snapshot_margins: Vec<(f64, f64)>,
    /// Whether the run was in the regime where the norm bound is claimed.
    pub regime_claimed: bool,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const ENVELOPE_TOL: f64 = 1e-6;

/// Checks the embedding `sup |v| <= C ||v||_{H^1}` at every sampled time.
pub fn decay_envelope_check(trace: &EvolutionTrace, u0_h1_norm: f64, pair: Option<&SoninePair>) -> EnvelopeReport {
    let mut violations = Vec::new();
    let mut worst_ratio = 0.0f64;
    for i in 0..trace.len() {
        let bound = EMBEDDING_CONSTANT * trace.h1_norms[i];
        let sup = trace.sup_weighted[i];
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(sup / bound);
        }
        if sup > bound * (1.0 + ENVELOPE_TOL) {
            violations.push(EnvelopeViolation { tau: trace.times[i], sup, bound });
        }
    }
    let h1_nonincreasing = trace.h1_norms.iter().all(|&h| h <= u0_h1_norm * (1.0 + 1e-10) + 1e-300);
    let snapshot_margins =
        trace.snapshots.iter().map(|(_, tau, v)| (*tau, v.sup() - EMBEDDING_CONSTANT * u0_h1_norm)).collect();
    let regime_claimed = trace.sign < 0.0 && pair.map_or(true, |p| p.regime == Regime::Diffusive);
    EnvelopeReport { samples: trace.len(), violations, worst_ratio, h1_nonincreasing, snapshot_margins, regime_claimed }
}
