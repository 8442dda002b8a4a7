use orlicz_morrey::norms::luxemburg_norm;
use orlicz_morrey::operators::{default_maximal_radii, maximal};
use orlicz_morrey::young::{eval, inverse};
use orlicz_morrey::{Grid, GridFunction, Weight, YoungFunction};
use proptest::prelude::*;

fn young() -> impl Strategy<Value = YoungFunction> {
    prop_oneof![
        (1.1f64..6.0).prop_map(|p| YoungFunction::Power { p }),
        (1.1f64..4.0, 0.0f64..2.0).prop_map(|(p, a)| YoungFunction::PowerLog { p, a }),
        Just(YoungFunction::Identity),
        Just(YoungFunction::ExpType),
    ]
}

fn sample(values: &[f64]) -> GridFunction {
    let g = Grid::new(-4.0, 4.0, values.len()).unwrap();
    GridFunction::new(g, values.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_eval(phi in young(), r in 1e-3f64..20.0) {
        let s = eval(&phi, r).unwrap();
        prop_assume!(s.is_finite() && s > 0.0);
        let back = inverse(&phi, s).unwrap();
        prop_assert!((back / r - 1.0).abs() < 1e-8, "{} -> {} -> {}", r, s, back);
    }

    #[test]
    fn luxemburg_norm_is_homogeneous(
        phi in young(),
        values in prop::collection::vec(-3.0f64..3.0, 64),
        c in 0.1f64..10.0,
    ) {
        let f = sample(&values);
        prop_assume!(!f.is_zero());
        let w = Weight::PowerAbs { alpha: 0.5, center: 0.0 };
        let a = luxemburg_norm(&f, &phi, &w, None).unwrap().value;
        let b = luxemburg_norm(&f.scale(c), &phi, &w, None).unwrap().value;
        prop_assert!((b / (c * a) - 1.0).abs() < 1e-6, "{} vs {}", b, c * a);
    }

    #[test]
    fn maximal_function_dominates_the_function(values in prop::collection::vec(-5.0f64..5.0, 128)) {
        let f = sample(&values);
        let m = maximal(&f, &default_maximal_radii(f.grid())).unwrap();
        for (mv, fv) in m.values().iter().zip(f.values()) {
            prop_assert!(*mv >= fv.abs() * (1.0 - 1e-12));
        }
    }
}
