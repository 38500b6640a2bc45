use drmoo_core::metrics::{pareto_filter, FrontierPoint};
use drmoo_core::oracle;
use drmoo_core::simplex::{project_simplex, PreferenceVector};
use proptest::prelude::*;

fn points(values: Vec<Vec<f64>>) -> Vec<FrontierPoint> {
    values
        .into_iter()
        .enumerate()
        .map(|(k, v)| FrontierPoint::new(vec![k as f64], v))
        .collect()
}

proptest! {
    #[test]
    fn projection_lands_on_simplex(v in prop::collection::vec(-1e3f64..1e3, 1..40)) {
        let w = project_simplex(&v).unwrap();
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(PreferenceVector::try_new(w.to_vec()).is_ok());
    }

    #[test]
    fn projection_is_idempotent(v in prop::collection::vec(-10.0f64..10.0, 1..20)) {
        let w = project_simplex(&v).unwrap();
        let again = project_simplex(&w).unwrap();
        for (a, b) in w.iter().zip(again.iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_matches_exhaustive(v in prop::collection::vec(-4.0f64..4.0, 1..=6)) {
        let w = project_simplex(&v).unwrap();
        let slow = oracle::simplex_projection_exhaustive(&v).unwrap();
        for (a, b) in w.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn pareto_matches_brute_force(
        m in 1usize..=4,
        raw in prop::collection::vec(prop::collection::vec(0u8..5, 4), 1..120),
    ) {
        let pts = points(raw.into_iter().map(|r| r[..m].iter().map(|&x| x as f64).collect()).collect());
        prop_assert_eq!(pareto_filter(&pts).unwrap(), oracle::pareto_brute_force(&pts));
    }

    #[test]
    fn pareto_front_is_mutually_nondominated(raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..100)) {
        let pts = points(raw.into_iter().map(|(a, b)| vec![a, b]).collect());
        let front = pareto_filter(&pts).unwrap();
        prop_assert!(!front.is_empty());
        for p in &front {
            prop_assert!(!pts.iter().any(|q| drmoo_core::metrics::dominates(&q.values, &p.values)));
        }
    }
}

#[test]
fn projection_rejects_bad_input() {
    assert!(project_simplex(&[]).is_err());
    assert!(project_simplex(&[f64::NAN, 1.0]).is_err());
}
