//! The named experiments. Each one writes its own CSVs and plots and
//! returns check records; library errors become failed records.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ExperimentName, KernelSpec};
use super::plot::{write_svg, PlotSpec};
use super::summary::{CheckRecord, Status};
use crate::cauchy::{decay_envelope_check, mol_evolve, spectral_evolve, CauchyProblem, EvolutionTrace, OperatorForm};
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::fracops::{
    equivalence_discrepancy, estimate_symbol, fractional_integral, inversion_residual, marchaud_derivative,
    tail_profile, weyl_derivative, ConvolutionQuadrature, MarchaudQuadrature, PairQuadratures, SQuad, TailPolicy,
};
use crate::grid::{norms, GridFunction, OperationalGrid};
use crate::kernels::{sonine_residual, Regime, SoninePair};
use crate::semigroup::{
    apply_shift, generator_apply_with, generator_fd_residual, generator_physical, similarity_residual,
};
use crate::spectral::DiffMethod;

/// Static description used by `list`.
pub struct ExperimentInfo {
    pub name: ExperimentName,
    pub keys: &'static str,
    pub anchor: &'static str,
}

pub const CATALOGUE: [ExperimentInfo; 9] = [
    ExperimentInfo {
        name: ExperimentName::SonineCheck,
        keys: "kernel, params.alphas, params.samples, params.t_max",
        anchor: "Sonine condition k * kappa = 1",
    },
    ExperimentInfo {
        name: ExperimentName::SemigroupCheck,
        keys: "scale, weight, grid, params.center, params.width",
        anchor: "Deformed shift semigroup and topological similarity",
    },
    ExperimentInfo {
        name: ExperimentName::GeneratorCheck,
        keys: "scale, weight, grid, params.shifts",
        anchor: "Infinitesimal generator of the deformed shift",
    },
    ExperimentInfo {
        name: ExperimentName::OperatorsCheck,
        keys: "kernel, grid, params.center, params.cutoff",
        anchor: "Fourier symbols of the Sonine integral, Weyl and Marchaud forms",
    },
    ExperimentInfo {
        name: ExperimentName::Equivalence,
        keys: "kernel, grid, params.xi, params.cutoff",
        anchor: "Marchaud/Weyl equivalence claim (diagnostic only)",
    },
    ExperimentInfo {
        name: ExperimentName::Neutralization,
        keys: "weight, kernel (bessel), grid, params.eps, params.band, params.s_max",
        anchor: "Topological neutralization of memory kernels",
    },
    ExperimentInfo {
        name: ExperimentName::Inversion,
        keys: "kernel, grid, params.alphas",
        anchor: "Fundamental Inversion Theorem",
    },
    ExperimentInfo {
        name: ExperimentName::Evolve,
        keys: "kernel, scale, weight, grid, params.horizon, params.dt, params.sign, params.form, params.refine",
        anchor: "Well-posedness via topological similarity",
    },
    ExperimentInfo {
        name: ExperimentName::Envelope,
        keys: "kernel, grid, params.horizon, params.dt",
        anchor: "Physical envelopes and pointwise decay",
    },
];

pub fn list_table() -> String {
    let mut out = format!("{:<17} {:<62} {}\n", "experiment", "anchor", "config keys");
    for e in &CATALOGUE {
        out.push_str(&format!("{:<17} {:<62} {}\n", e.name.as_str(), e.anchor, e.keys));
    }
    out
}

/// Runs one experiment, writing outputs under `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Vec<CheckRecord> {
    let name = cfg.name.as_str();
    if let Err(e) = std::fs::create_dir_all(dir) {
        return vec![CheckRecord::failed(name, "setup", format!("cannot create {}: {e}", dir.display()))];
    }
    let out = match cfg.name {
        ExperimentName::SonineCheck => sonine_check(cfg, seed, dir),
        ExperimentName::SemigroupCheck => semigroup_check(cfg, dir),
        ExperimentName::GeneratorCheck => generator_check(cfg, dir),
        ExperimentName::OperatorsCheck => operators_check(cfg, dir),
        ExperimentName::Equivalence => equivalence(cfg, dir),
        ExperimentName::Neutralization => neutralization(cfg, dir),
        ExperimentName::Inversion => inversion(cfg, dir),
        ExperimentName::Evolve => evolve(cfg, dir),
        ExperimentName::Envelope => envelope(cfg, dir),
    };
    out.unwrap_or_else(|e| {
        let check = if matches!(e, Error::GrowthGuard { .. }) { "growth_guard" } else { "run" };
        vec![CheckRecord::failed(name, check, e.to_string())]
    })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("cannot write {}: {e}", path.display()))
}

/// Writes a numeric table with 17 significant digits.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn gaussian(grid: OperationalGrid, center: f64, width: f64) -> Result<GridFunction> {
    GridFunction::from_fn(grid, |x| {
        let z = (x - center) / width;
        (-z * z).exp()
    })
}

fn datum(cfg: &ExperimentConfig, grid: OperationalGrid) -> Result<GridFunction> {
    gaussian(grid, cfg.params.center.unwrap_or(0.0), cfg.params.width.unwrap_or(1.0))
}

fn sonine_check(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let alphas = cfg.params.alphas.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let samples = cfg.params.samples.unwrap_or(20);
    let t_max = cfg.params.t_max.unwrap_or(10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts: Vec<f64> = (0..samples).map(|_| t_max * (1.0 - rng.gen::<f64>())).collect();
    let bound = if matches!(cfg.kernel, KernelSpec::PowerLaw { .. }) { 1e-8 } else { 1e-6 };
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &alpha in &alphas {
        let pair = cfg.kernel.with_alpha(alpha).build()?;
        let mut worst = 0.0f64;
        for &t in &ts {
            let r = sonine_residual(&pair, t, 1e-12)?;
            worst = worst.max(r);
            rows.push(vec![alpha, t, r]);
        }
        records.push(
            CheckRecord::at_most(name, &format!("sonine_residual_max[alpha={alpha}]"), worst, bound)
                .with_note(cfg.kernel.with_alpha(alpha).label()),
        );
    }
    write_table(&dir.join("sonine.csv"), &["alpha", "t", "residual"], &rows)?;
    Ok(records)
}

fn semigroup_check(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let grid = cfg.grid.build()?;
    let (scale, weight) = (cfg.scale()?, cfg.weight()?);
    let v = datum(cfg, grid)?;
    let h = grid.h();
    let mut rec = Vec::new();

    let id = apply_shift(&v, 0.0)?;
    let id_err = id.axpby(1.0, &v, -1.0)?.sup();
    rec.push(CheckRecord::judged(name, "identity_max_abs", id_err, id == v, "== 0 (bit-exact)".into()));

    let two = apply_shift(&apply_shift(&v, 3.0 * h)?, 5.0 * h)?;
    let one = apply_shift(&v, 8.0 * h)?;
    rec.push(CheckRecord::at_most(name, "composition_aligned", two.axpby(1.0, &one, -1.0)?.sup(), 1e-14));

    // unaligned composition on this grid and on one with half the spacing;
    // shifts scale with h so the fractional offsets match
    let comp_err = |g: OperationalGrid| -> Result<f64> {
        let v = datum(cfg, g)?;
        let (a, b) = (7.3 * g.h(), 11.45 * g.h());
        let two = apply_shift(&apply_shift(&v, a)?, b)?;
        Ok(two.axpby(1.0, &apply_shift(&v, a + b)?, -1.0)?.sup())
    };
    let fine = OperationalGrid::new(grid.x_min(), grid.x_max(), 2 * (grid.len() - 1) + 1)?;
    let (e1, e2) = (comp_err(grid)?, comp_err(fine)?);
    let order = (e1 / e2).log2();
    rec.push(
        CheckRecord::at_least(name, "composition_order_unaligned", order, 3.5)
            .with_note(format!("errors {e1:.3e} -> {e2:.3e}")),
    );

    let s_iso = 10.0 * h;
    let iso = (apply_shift(&v, s_iso)?.l2() / v.l2() - 1.0).abs();
    rec.push(CheckRecord::at_most(name, "l2_isometry_rel", iso, 1e-9));

    // physical datum whose transmuted image is the Gaussian above
    let (c, w) = (cfg.params.center.unwrap_or(0.0), cfg.params.width.unwrap_or(1.0));
    let u = |t: f64| {
        let z = (scale.forward(t) - c) / w;
        (-z * z).exp() / weight.value(t)
    };
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for k in [0usize, 1, 5, 20] {
        let r = similarity_residual(u, &scale, &weight, k as f64 * h, &grid)?;
        worst = worst.max(r);
        rows.push(vec![k as f64 * h, r]);
    }
    write_table(&dir.join("similarity.csv"), &["s", "residual"], &rows)?;
    rec.push(CheckRecord::at_most(name, "similarity_residual_aligned", worst, 1e-10));
    Ok(rec)
}

fn generator_check(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let grid = cfg.grid.build()?;
    let (scale, weight) = (cfg.scale()?, cfg.weight()?);
    let (c, w) = (cfg.params.center.unwrap_or(0.0), cfg.params.width.unwrap_or(1.0));
    let v = gaussian(grid, c, w)?;
    let shifts = cfg.params.shifts.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.025, 0.0125]);
    let res = generator_fd_residual(&v, &shifts)?;
    let rows: Vec<Vec<f64>> = res.iter().map(|&(s, r)| vec![s, r]).collect();
    write_table(&dir.join("generator_fd.csv"), &["s", "residual"], &rows)?;
    let (s, r): (Vec<f64>, Vec<f64>) = res.into_iter().unzip();
    let order = log_log_slope(&s, &r).unwrap_or(f64::NAN);
    let mut rec = vec![CheckRecord::judged(
        name,
        "fd_quotient_order",
        order,
        (0.9..=1.1).contains(&order),
        "in [0.9, 1.1]".into(),
    )];
    let pts: Vec<(f64, f64)> = s.iter().zip(&r).map(|(s, r)| (s.log10(), *r)).collect();
    let mut spec = PlotSpec::new("s", "residual").log_y(true);
    spec.x_label = "log10 s [operational time]".into();
    write_svg(&dir.join("generator_fd.svg"), &pts, &spec)?;

    // -v' in closed form against the spectral derivative
    let exact = GridFunction::from_fn(grid, |x| 2.0 * (x - c) / (w * w) * (-((x - c) / w).powi(2)).exp())?;
    let spectral = generator_apply_with(&v, DiffMethod::Spectral);
    let gap = spectral.axpby(1.0, &exact, -1.0)?.l2() / exact.l2();
    rec.push(CheckRecord::at_most(name, "spectral_vs_analytic_rel_l2", gap, 1e-6));

    // physical generator against T^-1 (-d/dx) T at the nodes
    let g = |x: f64| (-((x - c) / w).powi(2)).exp();
    let dg = |x: f64| -2.0 * (x - c) / (w * w) * g(x);
    let u = |t: f64| g(scale.forward(t)) / weight.value(t);
    let du = |t: f64| {
        let om = weight.value(t);
        (dg(scale.forward(t)) * scale.derivative(t) * om - g(scale.forward(t)) * weight.derivative(t)) / (om * om)
    };
    let a = generator_physical(u, du, &scale, &weight);
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for x in grid.points() {
        let t = scale.inverse(x);
        let via_frame = -dg(x) / weight.value(t);
        worst = worst.max((a(t) - via_frame).abs());
        peak = peak.max(via_frame.abs());
    }
    rec.push(CheckRecord::at_most(name, "physical_vs_transmuted_rel", worst / peak.max(f64::MIN_POSITIVE), 1e-10));
    Ok(rec)
}

fn marchaud_tail(pair: &SoninePair, cfg: &ExperimentConfig) -> Result<TailPolicy> {
    if pair.k.tail_integrable() {
        Ok(TailPolicy::Unbounded)
    } else {
        TailPolicy::fixed(cfg.params.cutoff.unwrap_or(20.0))
    }
}

fn operators_check(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let grid = cfg.grid.build()?;
    let pair = cfg.kernel.build()?;
    let center = cfg.params.center.unwrap_or(-5.0);
    let v = gaussian(grid, center, 1.0)?;
    // the integral of a positive bump leaves a plateau at the right edge;
    // a zero-mean datum keeps the output window-decayed
    let dv = GridFunction::from_fn(grid, |x| -2.0 * (x - center) * (-(x - center) * (x - center)).exp())?;
    let quads = PairQuadratures::build(&pair, grid.h(), grid.len())?;
    let mq = MarchaudQuadrature::build(&pair.k, grid.h(), grid.len(), marchaud_tail(&pair, cfg)?, SQuad::default())?;
    let threshold = 1e-8;
    let mass = pair.k.total_mass();
    let p = |xi: f64| num_complex::Complex64::new(0.0, xi);

    let mut rec = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut judge = |label: &str,
                     input: &GridFunction,
                     out: &GridFunction,
                     exact: &dyn Fn(f64) -> Option<num_complex::Complex64>| {
        let mut worst = 0.0f64;
        let mut count = 0usize;
        for est in estimate_symbol(input, out, threshold) {
            if let Some(m) = exact(est.xi) {
                let rel = (est.symbol - m).norm() / m.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                count += 1;
                rows.push(vec![est.xi, est.input_magnitude, rel]);
            }
        }
        rec.push(
            CheckRecord::at_most(name, &format!("{label}_symbol_rel"), worst, 1e-2).with_note(format!("{count} modes")),
        );
    };
    let integral = fractional_integral(&dv, &quads.kappa)?;
    judge("integral", &dv, &integral, &|xi| if xi == 0.0 { None } else { Some(pair.kappa.laplace(p(xi))) });
    let weyl = weyl_derivative(&v, &quads.k)?;
    judge("weyl", &v, &weyl, &|xi| if xi == 0.0 { None } else { Some(pair.k.derivative_symbol(p(xi))) });
    let marchaud = marchaud_derivative(&v, &mq)?;
    match mass {
        Some(m0) => judge("marchaud", &v, &marchaud, &|xi| {
            if xi == 0.0 {
                None
            } else {
                Some(num_complex::Complex64::new(m0, 0.0) - pair.k.laplace(p(xi)))
            }
        }),
        None => rec.push(
            CheckRecord::reported(name, "marchaud_symbol_rel", f64::NAN).with_note("khat(0) undefined for this kernel"),
        ),
    }
    write_table(&dir.join("symbols.csv"), &["xi", "input_magnitude", "rel_error"], &rows)?;
    Ok(rec)
}

fn equivalence(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let grid = cfg.grid.build()?;
    let pair = cfg.kernel.build()?;
    let v = datum(cfg, grid)?;
    let mq = MarchaudQuadrature::build(&pair.k, grid.h(), grid.len(), marchaud_tail(&pair, cfg)?, SQuad::default())?;
    let kq = ConvolutionQuadrature::build(&pair.kappa, grid.h(), grid.len())?;
    let xi = cfg.params.xi.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 4.0]);
    let report = equivalence_discrepancy(&v, &pair, &mq, &kq, &xi)?;
    let mut rec = vec![
        CheckRecord::reported(name, "l2_rel", report.l2_rel),
        CheckRecord::reported(name, "linf_rel", report.linf_rel),
    ];
    for &(x, gap) in &report.symbol_gap {
        rec.push(CheckRecord::reported(name, &format!("symbol_gap[xi={x}]"), gap));
    }
    let rows: Vec<Vec<f64>> = report.symbol_gap.iter().map(|&(x, g)| vec![x, g]).collect();
    write_table(&dir.join("symbol_gap.csv"), &["xi", "gap"], &rows)?;
    Ok(rec)
}

fn neutralization(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let pair = cfg.kernel.build()?;
    let weight = cfg.weight()?;
    let beta = weight.past_decay_rate();
    let growth = pair.k.growth_rate();
    let margin = 2.0 * beta - growth;
    let eps = cfg.params.eps.unwrap_or(1e-8);
    let policy = match TailPolicy::weighted_auto(eps, beta, growth) {
        Ok(p) => p,
        Err(e) => {
            let refused = matches!(e, Error::TailPolicy(_)) && margin <= 0.0;
            return Ok(vec![CheckRecord::judged(
                name,
                "tail_policy_refused",
                margin,
                refused,
                "refuse when 2 beta - alpha_g <= 0".into(),
            )
            .with_note(e.to_string())]);
        }
    };
    let grid = cfg.grid.build()?;
    // transmuted datum omega^2 b with b a logistic step that vanishes to the right
    let steep = 2.0 * beta + 1.0;
    let v = GridFunction::from_fn(grid, |x| {
        let w = weight.at_operational(x);
        w * w / (1.0 + (steep * x).exp())
    })?;
    let band = cfg.params.band.unwrap_or([0.0, 1.0]);
    let s_max = cfg.params.s_max.unwrap_or(30.0);
    let s: Vec<f64> = (1..=60).map(|i| s_max * i as f64 / 60.0).collect();
    let profile = tail_profile(&v, &pair.k, &weight, (band[0], band[1]), &s)?;
    let rows: Vec<Vec<f64>> = profile.samples.iter().map(|&(s, g)| vec![s, g]).collect();
    write_table(&dir.join("tail_profile.csv"), &["s", "g"], &rows)?;
    write_svg(&dir.join("tail_profile.svg"), &profile.samples, &PlotSpec::new("s", "g").log_y(true).fit_slope(true))?;
    let rate = profile.rate.unwrap_or(f64::NAN);
    Ok(vec![CheckRecord::at_least(name, "tail_decay_rate", rate, 0.9 * margin)
        .with_note(format!("2 beta - alpha_g = {margin}, cutoff S = {:.3}", policy.cutoff()))])
}

fn inversion(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let grid = cfg.grid.build()?;
    let alphas = cfg.params.alphas.clone().unwrap_or_else(|| vec![cfg.kernel.alpha()]);
    let coarse = OperationalGrid::new(grid.x_min(), grid.x_max(), (grid.len() / 2).max(8))?;
    let mut rec = Vec::new();
    let mut rows = Vec::new();
    for &alpha in &alphas {
        let pair = cfg.kernel.with_alpha(alpha).build()?;
        let residual = |g: OperationalGrid| -> Result<f64> {
            let quads = PairQuadratures::build(&pair, g.h(), g.len())?;
            inversion_residual(&datum(cfg, g)?, &quads)
        };
        let (rc, rf) = (residual(coarse)?, residual(grid)?);
        let order = (rc / rf).ln() / (coarse.h() / grid.h()).ln();
        rows.push(vec![alpha, coarse.len() as f64, rc]);
        rows.push(vec![alpha, grid.len() as f64, rf]);
        rec.push(CheckRecord::at_most(name, &format!("inversion_residual[alpha={alpha}]"), rf, 1e-3));
        rec.push(CheckRecord::at_least(name, &format!("refinement_order[alpha={alpha}]"), order, 1.0));
    }
    write_table(&dir.join("inversion.csv"), &["alpha", "n", "residual"], &rows)?;
    Ok(rec)
}

fn problem(cfg: &ExperimentConfig, horizon: f64, dt: f64) -> Result<CauchyProblem> {
    let grid = cfg.grid.build()?;
    let pair = cfg.kernel.build()?;
    let (scale, weight) = (cfg.scale()?, cfg.weight()?);
    let u0 = datum(cfg, grid)?;
    let mut p = CauchyProblem::new(pair, scale, weight, u0, horizon, dt)?
        .with_form(cfg.params.form.unwrap_or(OperatorForm::Marchaud))
        .with_snapshots(cfg.params.snapshot_every.unwrap_or(0))
        .with_sign(cfg.params.sign.unwrap_or(-1.0), cfg.params.allow_expansive.unwrap_or(false))?;
    if let Some(c) = cfg.params.cutoff {
        p = p.with_tail(TailPolicy::fixed(c)?);
    }
    Ok(p)
}

fn save_trace(trace: &EvolutionTrace, dir: &Path, stem: &str) -> Result<()> {
    let path = dir.join(format!("{stem}.csv"));
    let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    trace.write_csv(std::io::BufWriter::new(file))?;
    let l2: Vec<(f64, f64)> = trace.times.iter().copied().zip(trace.l2_norms.iter().copied()).collect();
    write_svg(&dir.join(format!("{stem}_l2.svg")), &l2, &PlotSpec::new("tau", "l2"))?;
    for (step, _, v) in &trace.snapshots {
        v.save_csv(&dir.join(format!("{stem}_snapshot_{step:06}.csv")))?;
    }
    Ok(())
}

fn max_increase(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] - 1.0 } else { w[1] - w[0] }).fold(0.0, f64::max)
}

fn evolve(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let horizon = cfg.params.horizon.unwrap_or(1.0);
    let dt = cfg.params.dt.unwrap_or(1e-3);
    let p = problem(cfg, horizon, dt)?;
    let spectral = spectral_evolve(&p)?;
    save_trace(&spectral, dir, "trace")?;
    let last = spectral.final_state.as_ref().expect("evolution records its final state");
    let dissipative = p.sign < 0.0 && p.pair.regime == Regime::Diffusive;
    let mut rec = Vec::new();
    if dissipative {
        rec.push(CheckRecord::at_most(name, "l2_max_relative_increase", max_increase(&spectral.l2_norms), 1e-10));
    }
    if p.form == OperatorForm::Marchaud {
        let sum = |v: &GridFunction| v.values().iter().sum::<f64>();
        let m0 = sum(&p.u0);
        rec.push(CheckRecord::at_most(name, "zero_mode_drift_rel", (sum(last) / m0 - 1.0).abs(), 1e-10));
    }
    let (lo, hi) = last.values().iter().fold((0.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let min_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if dissipative {
        rec.push(CheckRecord::at_least(name, "min_over_max", min_ratio, -1e-6).with_note("positivity"));
    } else {
        rec.push(CheckRecord::reported(name, "min_over_max", min_ratio));
    }
    if p.sign < 0.0 {
        let gap = |p: &CauchyProblem, a: &GridFunction| -> Result<f64> {
            let b = mol_evolve(p)?.final_state.expect("evolution records its final state");
            Ok(a.axpby(1.0, &b, -1.0)?.l2() / a.l2())
        };
        let g = gap(&p, last)?;
        rec.push(CheckRecord::at_most(name, "spectral_vs_mol_rel_l2", g, 5e-2));
        if cfg.params.refine.unwrap_or(false) {
            let mut rows = vec![vec![dt, g]];
            for factor in [2.0, 4.0] {
                let q = problem(cfg, horizon, factor * dt)?;
                let a = spectral_evolve(&q)?.final_state.expect("evolution records its final state");
                rows.push(vec![factor * dt, gap(&q, &a)?]);
            }
            rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
            write_table(&dir.join("dt_refinement.csv"), &["dt", "gap"], &rows)?;
            let (d, e): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
            let order = log_log_slope(&d, &e).unwrap_or(f64::NAN);
            rec.push(CheckRecord::at_least(name, "dt_order", order, 0.9));
        }
    }
    Ok(rec)
}

/// `sup |v| / (C ||v||_{H^1})` for a smoothed two-sided exponential.
pub fn extremal_ratio(grid: OperationalGrid) -> Result<f64> {
    let v = GridFunction::from_fn(grid, |x| (-x.abs()).exp())?;
    let r = norms(&v);
    Ok(r.sup_weighted / (crate::cauchy::EMBEDDING_CONSTANT * r.h1))
}

fn envelope(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CheckRecord>> {
    let name = cfg.name.as_str();
    let p = problem(cfg, cfg.params.horizon.unwrap_or(5.0), cfg.params.dt.unwrap_or(1e-2))?;
    let trace = spectral_evolve(&p)?;
    save_trace(&trace, dir, "trace")?;
    let h1_0 = norms(&p.u0).h1;
    let report = decay_envelope_check(&trace, h1_0, Some(&p.pair));
    let rows: Vec<Vec<f64>> = report.snapshot_margins.iter().map(|&(t, m)| vec![t, m]).collect();
    write_table(&dir.join("snapshot_margins.csv"), &["tau", "margin"], &rows)?;
    let mut rec = vec![CheckRecord::judged(
        name,
        "embedding_worst_ratio",
        report.worst_ratio,
        report.passed(),
        "<= 1 + 1e-6 at every tau".into(),
    )
    .with_note(format!("{} violations over {} samples", report.violations.len(), report.samples))];
    let h1_growth = trace.h1_norms.iter().fold(0.0f64, |m, &h| m.max(h / h1_0));
    if report.regime_claimed {
        rec.push(CheckRecord::judged(name, "h1_max_over_initial", h1_growth, report.h1_nonincreasing, "<= 1".into()));
    } else {
        rec.push(CheckRecord::reported(name, "h1_max_over_initial", h1_growth));
    }
    let extremal = extremal_ratio(OperationalGrid::new(-30.0, 30.0, 4096)?)?;
    rec.push(CheckRecord::at_most(name, "extremal_ratio_deviation", (extremal - 1.0).abs(), 0.02));
    Ok(rec)
}

impl CheckRecord {
    pub fn is_fail(&self) -> bool {
        self.status == Status::Fail
    }
}
