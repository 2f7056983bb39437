use proptest::prelude::*;

use sonine::cauchy::{spectral_evolve, CauchyProblem};
use sonine::fracops::ConvolutionQuadrature;
use sonine::grid::{GridFunction, OperationalGrid};
use sonine::kernels::{sonine_residual, SoninePair};
use sonine::semigroup::apply_shift;
use sonine::timescales::{AgingScale, AmnesiaWeight};

fn scale_strategy() -> impl Strategy<Value = AgingScale> {
    prop_oneof![
        Just(AgingScale::identity()),
        Just(AgingScale::sinh()),
        (0.1f64..5.0, -3.0f64..3.0).prop_map(|(a, b)| AgingScale::affine(a, b).unwrap()),
        (0.0f64..0.95).prop_map(|e| AgingScale::wobble(e).unwrap()),
    ]
}

fn bump(g: OperationalGrid, c: f64, w: f64) -> GridFunction {
    GridFunction::from_fn(g, |x| (-((x - c) / w).powi(2)).exp()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_inverse_round_trips(scale in scale_strategy(), t in -4.0f64..4.0) {
        let back = scale.inverse(scale.forward(t));
        prop_assert!((back - t).abs() <= 1e-10 * t.abs().max(1.0));
        prop_assert!(scale.derivative(t) > 0.0);
    }

    #[test]
    fn weight_is_positive_and_logs_agree(beta in 0.05f64..2.0, scale in scale_strategy(), t in -2.0f64..2.0) {
        let w = AmnesiaWeight::exp_operational(beta, scale).unwrap();
        let x = scale.forward(t);
        prop_assert!(w.value(t) > 0.0);
        prop_assert!((w.log_at_operational(x) - beta * x).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn aligned_shifts_compose_exactly(a in 0usize..40, b in 0usize..40, c in -5.0f64..5.0) {
        let g = OperationalGrid::new(-20.0, 20.0, 401).unwrap();
        let v = bump(g, c, 1.0);
        let h = g.h();
        let two = apply_shift(&apply_shift(&v, a as f64 * h).unwrap(), b as f64 * h).unwrap();
        let one = apply_shift(&v, (a + b) as f64 * h).unwrap();
        prop_assert_eq!(two.values(), one.values());
    }

    #[test]
    fn shifts_never_increase_the_sup_much(s in 0.0f64..10.0, c in -5.0f64..5.0) {
        // cubic Lagrange overshoot is bounded; the sup cannot blow up
        let g = OperationalGrid::new(-20.0, 20.0, 801).unwrap();
        let v = bump(g, c, 1.0);
        let out = apply_shift(&v, s).unwrap();
        prop_assert!(out.sup() <= v.sup() * 1.01);
    }

    #[test]
    fn convolution_is_linear(alpha in 0.1f64..0.9, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = OperationalGrid::new(-10.0, 10.0, 257).unwrap();
        let pair = SoninePair::power_law(alpha).unwrap();
        let q = ConvolutionQuadrature::build(&pair.kappa, g.h(), g.len()).unwrap();
        let u = bump(g, -1.0, 1.0);
        let v = bump(g, 2.0, 0.5);
        let combo = u.axpby(a, &v, b).unwrap();
        let lhs = q.apply(combo.values());
        let (qu, qv) = (q.apply(u.values()), q.apply(v.values()));
        for i in 0..g.len() {
            let rhs = a * qu[i] + b * qv[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn csv_round_trip_is_lossless(c in -5.0f64..5.0, w in 0.2f64..3.0) {
        let g = OperationalGrid::new(-7.5, 3.25, 97).unwrap();
        let v = bump(g, c, w);
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values(), v.values());
        prop_assert_eq!(back.grid().len(), g.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn power_law_sonine_condition(alpha in 0.05f64..0.95, t in 0.01f64..10.0) {
        let pair = SoninePair::power_law(alpha).unwrap();
        prop_assert!(sonine_residual(&pair, t, 1e-12).unwrap() <= 1e-8);
    }

    #[test]
    fn tempered_evolution_contracts(alpha in 0.2f64..0.8, lambda in 0.2f64..3.0, c in -3.0f64..3.0) {
        let g = OperationalGrid::new(-20.0, 20.0, 256).unwrap();
        let s = AgingScale::identity();
        let pair = SoninePair::tempered_power_law(alpha, lambda).unwrap();
        let p = CauchyProblem::new(pair, s, AmnesiaWeight::constant(s), bump(g, c, 1.0), 0.5, 0.05).unwrap();
        let t = spectral_evolve(&p).unwrap();
        for w in t.l2_norms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-10));
        }
    }
}
