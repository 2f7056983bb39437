//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sonine::cauchy::{decay_envelope_check, mol_evolve, spectral_evolve, CauchyProblem, EvolutionTrace};
use sonine::fit::log_log_slope;
use sonine::fracops::{
    equivalence_discrepancy, estimate_symbol, fractional_integral, inversion_residual, marchaud_derivative,
    tail_profile, weyl_derivative, ConvolutionQuadrature, MarchaudQuadrature, PairQuadratures, SQuad, TailPolicy,
};
use sonine::grid::{norms, transmute, GridFunction, OperationalGrid};
use sonine::kernels::{sonine_residual, SoninePair};
use sonine::semigroup::{apply_shift, generator_apply_with, generator_physical, similarity_residual, DeformedShift};
use sonine::spectral::DiffMethod;
use sonine::timescales::{AgingScale, AmnesiaWeight};
use sonine::Error;

type Outcome = Result<String, String>;

fn check(ok: bool, what: String) -> Outcome {
    if ok {
        Ok(what)
    } else {
        Err(what)
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(|p| p.is_ok());
    let text: Vec<String> = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect();
    check(ok, text.join("; "))
}

fn gaussian(g: OperationalGrid, c: f64, w: f64) -> GridFunction {
    GridFunction::from_fn(g, |x| (-((x - c) / w).powi(2)).exp()).unwrap()
}

fn tempered() -> SoninePair {
    SoninePair::tempered_power_law(0.5, 1.0).unwrap()
}

fn sonine_condition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ts: Vec<f64> = (0..20).map(|_| 10.0 * (1.0 - rng.gen::<f64>())).collect();
    let mut parts = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let pairs = [
            ("power", SoninePair::power_law(alpha).unwrap(), 1e-8),
            ("tempered", SoninePair::tempered_power_law(alpha, 1.0).unwrap(), 1e-6),
            ("bessel", SoninePair::bessel(alpha).unwrap(), 1e-6),
        ];
        for (label, pair, tol) in pairs {
            let worst = ts.iter().map(|&t| sonine_residual(&pair, t, 1e-12).unwrap()).fold(0.0, f64::max);
            parts.push(check(worst <= tol, format!("{label} a={alpha} {worst:.1e}")));
        }
    }
    all(parts)
}

fn semigroup_axioms() -> Outcome {
    let g = OperationalGrid::new(-12.0, 12.0, 1024).unwrap();
    let v = gaussian(g, 0.0, 1.0);
    let h = g.h();
    let identity = apply_shift(&v, 0.0).unwrap() == v;

    let aligned = apply_shift(&apply_shift(&v, 3.0 * h).unwrap(), 5.0 * h)
        .unwrap()
        .axpby(1.0, &apply_shift(&v, 8.0 * h).unwrap(), -1.0)
        .unwrap()
        .sup();

    let comp = |n: usize| {
        let g = OperationalGrid::new(-12.0, 12.0, n).unwrap();
        let v = gaussian(g, 0.0, 1.0);
        let (a, b) = (7.3 * g.h(), 11.45 * g.h());
        let two = apply_shift(&apply_shift(&v, a).unwrap(), b).unwrap();
        two.axpby(1.0, &apply_shift(&v, a + b).unwrap(), -1.0).unwrap().sup()
    };
    let order = (comp(1024) / comp(2047)).log2();

    let iso_aligned = (apply_shift(&v, 10.0 * h).unwrap().l2() / v.l2() - 1.0).abs();
    let fine = gaussian(OperationalGrid::new(-10.0, 10.0, 8193).unwrap(), -2.0, 1.0);
    let iso_unaligned = (apply_shift(&fine, 1.234).unwrap().l2() / fine.l2() - 1.0).abs();

    let scale = AgingScale::sinh();
    let weight = AmnesiaWeight::exp_operational(0.5, scale).unwrap();
    let u = |t: f64| (-scale.forward(t).powi(2)).exp() / weight.value(t);
    let sim = [1usize, 5, 20]
        .iter()
        .map(|&k| similarity_residual(u, &scale, &weight, k as f64 * h, &g).unwrap())
        .fold(0.0, f64::max);

    all(vec![
        check(identity, "identity bit-exact".into()),
        check(aligned <= 1e-14, format!("aligned composition {aligned:.1e}")),
        check(order >= 3.5, format!("unaligned composition order {order:.2}")),
        check(iso_aligned <= 1e-9 && iso_unaligned <= 1e-9, format!("isometry {iso_aligned:.1e}/{iso_unaligned:.1e}")),
        check(sim <= 1e-10, format!("similarity {sim:.1e}")),
    ])
}

fn generator() -> Outcome {
    let scale = AgingScale::sinh();
    let weight = AmnesiaWeight::exp_operational(0.5, scale).unwrap();
    // physical datum with transmuted image exp(-(x + 1)^2)
    let g_op = |x: f64| (-(x + 1.0).powi(2)).exp();
    let dg_op = |x: f64| -2.0 * (x + 1.0) * g_op(x);
    let u = |t: f64| g_op(scale.forward(t)) / weight.value(t);
    let du = |t: f64| {
        let om = weight.value(t);
        (dg_op(scale.forward(t)) * scale.derivative(t) * om - g_op(scale.forward(t)) * weight.derivative(t)) / (om * om)
    };
    let a = generator_physical(u, du, &scale, &weight);
    let probes: Vec<f64> = (0..81).map(|i| -2.0 + 0.05 * i as f64).collect();
    let s_list = [0.1, 0.05, 0.025, 0.0125];
    let res: Vec<f64> = s_list
        .iter()
        .map(|&s| {
            let shift = DeformedShift::new(scale, weight, s).unwrap();
            let sq: f64 = probes.iter().map(|&t| ((shift.apply_physical(u, t) - u(t)) / s - a(t)).powi(2)).sum();
            sq.sqrt()
        })
        .collect();
    let order = log_log_slope(&s_list, &res).unwrap();

    let grid = OperationalGrid::new(-20.0, 20.0, 1024).unwrap();
    let v = transmute(u, &scale, &weight, &grid).unwrap();
    let spectral = generator_apply_with(&v, DiffMethod::Spectral);
    let analytic = transmute(&a, &scale, &weight, &grid).unwrap();
    let gap = spectral.axpby(1.0, &analytic, -1.0).unwrap().l2() / analytic.l2();
    all(vec![
        check((0.9..=1.1).contains(&order), format!("difference quotient order {order:.3}")),
        check(gap <= 1e-6, format!("spectral vs analytic {gap:.1e}")),
    ])
}

fn symbols() -> Outcome {
    let (alpha, lambda) = (0.5, 1.0);
    let pair = tempered();
    let g = OperationalGrid::new(-20.0, 20.0, 2048).unwrap();
    let c = -5.0;
    let v = gaussian(g, c, 1.0);
    let dv = GridFunction::from_fn(g, |x| -2.0 * (x - c) * (-(x - c) * (x - c)).exp()).unwrap();
    let quads = PairQuadratures::build(&pair, g.h(), g.len()).unwrap();
    let mq = MarchaudQuadrature::build(&pair.k, g.h(), g.len(), TailPolicy::Unbounded, SQuad::default()).unwrap();

    // closed-form symbols, written out independently of the library
    let p = |xi: f64| Complex64::new(lambda, xi);
    let kappa_hat = |xi: f64| p(xi).powf(-alpha) * (1.0 + lambda / Complex64::new(0.0, xi));
    let weyl_k = |xi: f64| Complex64::new(0.0, xi) * p(xi).powf(alpha - 1.0);
    let marchaud_k = |xi: f64| Complex64::new(lambda.powf(alpha - 1.0), 0.0) - p(xi).powf(alpha - 1.0);

    let worst = |input: &GridFunction, out: &GridFunction, exact: &dyn Fn(f64) -> Complex64| {
        estimate_symbol(input, out, 1e-8)
            .into_iter()
            .filter(|e| e.xi != 0.0)
            .map(|e| (e.symbol - exact(e.xi)).norm() / exact(e.xi).norm())
            .fold(0.0, f64::max)
    };
    let e_int = worst(&dv, &fractional_integral(&dv, &quads.kappa).unwrap(), &kappa_hat);
    let e_weyl = worst(&v, &weyl_derivative(&v, &quads.k).unwrap(), &weyl_k);
    let e_mar = worst(&v, &marchaud_derivative(&v, &mq).unwrap(), &marchaud_k);
    all(vec![
        check(e_int <= 1e-2, format!("integral {e_int:.1e}")),
        check(e_weyl <= 1e-2, format!("weyl {e_weyl:.1e}")),
        check(e_mar <= 1e-2, format!("marchaud {e_mar:.1e}")),
    ])
}

fn inversion() -> Outcome {
    let residual = |pair: &SoninePair, n: usize| {
        let g = OperationalGrid::new(-20.0, 20.0, n).unwrap();
        let quads = PairQuadratures::build(pair, g.h(), g.len()).unwrap();
        inversion_residual(&gaussian(g, 0.0, 1.0), &quads).unwrap()
    };
    let mut parts = Vec::new();
    let mut pairs: Vec<(String, SoninePair)> =
        [0.3, 0.5, 0.7].iter().map(|&a| (format!("power a={a}"), SoninePair::power_law(a).unwrap())).collect();
    pairs.push(("tempered".into(), tempered()));
    for (label, pair) in &pairs {
        let (coarse, fine) = (residual(pair, 2048), residual(pair, 4096));
        let order = (coarse / fine).ln() / (4095.0f64 / 2047.0).ln();
        parts.push(check(fine <= 1e-3 && order >= 1.0, format!("{label} {fine:.1e} order {order:.2}")));
    }
    all(parts)
}

fn neutralization() -> Outcome {
    let g = OperationalGrid::new(-40.0, 10.0, 4001).unwrap();
    let s: Vec<f64> = (1..=60).map(|i| 0.5 * i as f64).collect();
    let mut parts = Vec::new();
    for (beta, growth) in [(1.0, 1.0), (0.75, 1.0), (1.0, 1.5)] {
        let weight = AmnesiaWeight::exp_operational(beta, AgingScale::identity()).unwrap();
        let pair = SoninePair::bessel_with_growth(0.5, growth).unwrap();
        let margin = 2.0 * beta - growth;
        TailPolicy::weighted_auto(1e-8, beta, growth).unwrap();
        let steep = 2.0 * beta + 1.0;
        let v = GridFunction::from_fn(g, |x| {
            let w = weight.at_operational(x);
            w * w / (1.0 + (steep * x).exp())
        })
        .unwrap();
        let rate = tail_profile(&v, &pair.k, &weight, (0.0, 1.0), &s).unwrap().rate.unwrap();
        parts.push(check(rate >= 0.9 * margin, format!("b={beta} ag={growth} rate {rate:.3} vs {:.3}", 0.9 * margin)));
    }
    for (beta, growth) in [(0.4, 1.0), (0.5, 1.0)] {
        let refused = matches!(TailPolicy::weighted_auto(1e-8, beta, growth), Err(Error::TailPolicy(_)));
        parts.push(check(refused, format!("b={beta} ag={growth} refused")));
    }
    all(parts)
}

fn equivalence_diagnostic() -> Outcome {
    // |(khat(0) - khat(i xi)) - i xi kappahat(i xi)| at 40 digits, alpha = 1/2, lambda = 1
    let fixtures = [
        (0.0, 1.0),
        (0.5, 0.9498738884495658),
        (1.0, 0.8856589100591042),
        (2.0, 0.946541337163866),
        (4.0, 1.368719398798473),
    ];
    let pair = tempered();
    let g = OperationalGrid::new(-20.0, 20.0, 1024).unwrap();
    let mq = MarchaudQuadrature::build(&pair.k, g.h(), g.len(), TailPolicy::Unbounded, SQuad::default()).unwrap();
    let kq = ConvolutionQuadrature::build(&pair.kappa, g.h(), g.len()).unwrap();
    let xi: Vec<f64> = fixtures.iter().map(|f| f.0).collect();
    let report = match equivalence_discrepancy(&gaussian(g, 0.0, 1.0), &pair, &mq, &kq, &xi) {
        Ok(r) => r,
        Err(e) => return Err(format!("did not complete: {e}")),
    };
    let drift = report.symbol_gap.iter().zip(&fixtures).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    let gaps: Vec<String> = report.symbol_gap.iter().map(|(x, gp)| format!("{x}:{gp:.6}")).collect();
    check(
        drift <= 1e-12,
        format!("reported l2_rel {:.3}, gaps [{}], fixture drift {drift:.1e}", report.l2_rel, gaps.join(" ")),
    )
}

fn benchmark(dt: f64) -> CauchyProblem {
    let g = OperationalGrid::new(-20.0, 20.0, 1024).unwrap();
    let s = AgingScale::identity();
    CauchyProblem::new(tempered(), s, AmnesiaWeight::constant(s), gaussian(g, 0.0, 1.0), 1.0, dt).unwrap()
}

fn rel_gap(p: &CauchyProblem) -> (EvolutionTrace, f64) {
    let a = spectral_evolve(p).unwrap();
    let b = mol_evolve(p).unwrap().final_state.unwrap();
    let fa = a.final_state.as_ref().unwrap();
    let gap = fa.axpby(1.0, &b, -1.0).unwrap().l2() / fa.l2();
    (a, gap)
}

fn cauchy(trace_out: &mut Option<EvolutionTrace>) -> Outcome {
    let start = Instant::now();
    let p = benchmark(1e-3);
    let (trace, gap) = rel_gap(&p);
    let rise = trace.l2_norms.windows(2).map(|w| w[1] / w[0] - 1.0).fold(0.0, f64::max);
    let h = p.u0.grid().h();
    let mass = |v: &GridFunction| h * v.values().iter().sum::<f64>();
    let drift = (mass(trace.final_state.as_ref().unwrap()) / mass(&p.u0) - 1.0).abs();
    let dts = [4e-3, 2e-3, 1e-3];
    let gaps: Vec<f64> = dts.iter().map(|&dt| if dt == 1e-3 { gap } else { rel_gap(&benchmark(dt)).1 }).collect();
    let order = log_log_slope(&dts, &gaps).unwrap();
    let secs = start.elapsed().as_secs_f64();
    *trace_out = Some(trace);
    all(vec![
        check(rise <= 1e-10, format!("l2 max rise {rise:.1e}")),
        check(drift <= 1e-10, format!("zero mode {drift:.1e}")),
        check(gap <= 5e-2, format!("spectral vs mol {gap:.2e}")),
        check(order >= 0.9, format!("dt order {order:.3}")),
        check(secs <= 60.0, format!("{secs:.1}s")),
    ])
}

fn envelope(trace: Option<&EvolutionTrace>) -> Outcome {
    let Some(trace) = trace else { return Err("criterion 8 produced no trace".into()) };
    let u0 = gaussian(OperationalGrid::new(-20.0, 20.0, 1024).unwrap(), 0.0, 1.0);
    let report = decay_envelope_check(trace, norms(&u0).h1, Some(&tempered()));
    // e^{-|x|}: sup = 1, ||.||_{H^1} = sqrt(2), so the ratio to 2^{-1/2} ||.|| is 1
    let v = GridFunction::from_fn(OperationalGrid::new(-30.0, 30.0, 4096).unwrap(), |x| (-x.abs()).exp()).unwrap();
    let r = norms(&v);
    let extremal = r.sup_weighted / (std::f64::consts::FRAC_1_SQRT_2 * r.h1);
    all(vec![
        check(
            report.passed(),
            format!(
                "{} violations over {} samples, worst ratio {:.4}",
                report.violations.len(),
                report.samples,
                report.worst_ratio
            ),
        ),
        check((extremal - 1.0).abs() <= 0.02, format!("extremal ratio {extremal:.4}")),
    ])
}

fn oscillatory(trace: Option<&EvolutionTrace>) -> Outcome {
    let kappa = SoninePair::bessel(0.5).unwrap().kappa;
    let vals: Vec<f64> = (1..=50_000).map(|i| kappa.eval(i as f64 * 1e-3)).collect();
    let max = vals.iter().copied().fold(f64::MIN, f64::max);
    let min = vals.iter().copied().fold(f64::MAX, f64::min);
    let Some(trace) = trace else { return Err("criterion 8 produced no trace".into()) };
    let fin = trace.final_state.as_ref().unwrap();
    let vmax = fin.values().iter().copied().fold(f64::MIN, f64::max);
    let vmin = fin.values().iter().copied().fold(f64::MAX, f64::min);
    all(vec![
        check(min <= -1e-3 * max, format!("bessel kappa min/max {:.3}", min / max)),
        check(vmin >= -1e-6 * vmax, format!("diffusive min/max {:.1e}", vmin / vmax)),
    ])
}

fn main() {
    let mut trace = None;
    let results: Vec<(&str, Outcome)> = vec![
        ("Sonine condition", sonine_condition()),
        ("semigroup axioms", semigroup_axioms()),
        ("generator", generator()),
        ("symbol agreement", symbols()),
        ("inversion", inversion()),
        ("tail neutralization", neutralization()),
        ("equivalence diagnostic", equivalence_diagnostic()),
        ("Cauchy problem", cauchy(&mut trace)),
        ("decay envelope", envelope(trace.as_ref())),
        ("oscillatory regime", oscillatory(trace.as_ref())),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name:<24} PASS  {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name:<24} FAIL  {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
