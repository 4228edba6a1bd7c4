use proptest::prelude::*;
use std::f64::consts::PI;

use qkad::ar::{Scaler, SCALED_HIGH, SCALED_LOW};
use qkad::gram::GramMatrix;
use qkad::ocsvm::train;
use qkad::{Entanglement, FeatureMapSpec, GammaRule};

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..2.0 * PI, d)
}

fn pair() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|d| (Just(d), point(d), point(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantum_kernel_is_a_fidelity((d, x, y) in pair(), layers in 1usize..=3, all in any::<bool>()) {
        let kind = if all { Entanglement::AllToAll } else { Entanglement::Linear };
        let spec = FeatureMapSpec::new(kind, d, layers).unwrap();
        let kxy = spec.kernel(&x, &y).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&kxy));
        prop_assert!((kxy - spec.kernel(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!((spec.kernel(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let norm = spec.encode(&x).unwrap().norm_sqr();
        prop_assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scaler_bounds(rows in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 3), 2..20),
                     probe in prop::collection::vec(-50.0..50.0f64, 3)) {
        let s = Scaler::fit(&rows).unwrap();
        for r in &rows {
            for v in s.transform(r).unwrap() {
                prop_assert!((0.0..=PI).contains(&v));
            }
        }
        for v in s.transform(&probe).unwrap() {
            prop_assert!((SCALED_LOW..=SCALED_HIGH).contains(&v));
        }
    }

    #[test]
    fn dual_stays_feasible(pts in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 3..25),
                           frac in 0.0..1.0f64) {
        let n = pts.len();
        let nu = 1.0 / n as f64 + frac * (1.0 - 1.0 / n as f64);
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| (-(a[0] - b[0]).powi(2) - (a[1] - b[1]).powi(2)).exp()).collect())
            .collect();
        let model = train(&GramMatrix::from_rows(&rows).unwrap(), nu).unwrap();
        let c = model.upper_bound();
        prop_assert!((model.alphas.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(model.alphas.iter().all(|&a| (-1e-12..=c + 1e-12).contains(&a)));
    }

    #[test]
    fn gamma_rule_round_trips(g in prop_oneof![Just(GammaRule::Auto), (1e-6..1e3f64).prop_map(GammaRule::Fixed)]) {
        let json = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(serde_json::from_str::<GammaRule>(&json).unwrap(), g);
    }
}
