use drmoo_core::dro::{self, DualContext, SampleBatch};
use drmoo_core::oracle;
use proptest::prelude::*;

fn ctx(lambda: f64) -> DualContext {
    DualContext::new(lambda, 1.0, 1).unwrap()
}

proptest! {
    #[test]
    fn dual_min_matches_closed_form(
        losses in prop::collection::vec(-20.0f64..20.0, 1..60),
        lambda in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0, 4.0]),
    ) {
        let c = ctx(lambda);
        let eta = dro::exact_dual_min(&c, &losses).unwrap();
        prop_assert!(dro::grad_eta(&c, &losses, eta).unwrap().abs() <= 1e-10);
        let closed = oracle::chi_square_dual_min(&c, &losses).unwrap();
        prop_assert!((eta - closed).abs() <= 1e-9 * (1.0 + closed.abs()));
    }

    #[test]
    fn dual_min_beats_probes(
        losses in prop::collection::vec(0.0f64..50.0, 1..40),
        probes in prop::collection::vec(-60.0f64..110.0, 100),
    ) {
        let c = ctx(1.0);
        let eta = dro::exact_dual_min(&c, &losses).unwrap();
        let best = dro::dual_value(&c, &losses, eta).unwrap();
        for p in probes {
            prop_assert!(best <= dro::dual_value(&c, &losses, p).unwrap() + 1e-12);
        }
    }

    #[test]
    fn dual_value_matches_direct_sum(
        losses in prop::collection::vec(-5.0f64..5.0, 1..30),
        eta in -10.0f64..10.0,
        lambda in 0.1f64..5.0,
    ) {
        let a = dro::dual_value(&ctx(lambda), &losses, eta).unwrap();
        let b = oracle::chi_square_dual_value(lambda, &losses, eta);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn grad_eta_is_nondecreasing(
        losses in prop::collection::vec(-5.0f64..5.0, 1..30),
        a in -10.0f64..10.0,
        b in -10.0f64..10.0,
    ) {
        let c = ctx(0.7);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(dro::grad_eta(&c, &losses, lo).unwrap() <= dro::grad_eta(&c, &losses, hi).unwrap() + 1e-15);
    }
}

#[test]
fn grad_eta_matches_finite_difference_off_kink() {
    let c = ctx(1.3);
    let losses = [0.0, 0.7, 2.2, 5.0, -1.5];
    for k in 0..200 {
        let eta = -6.0 + 0.06 * k as f64;
        if losses.iter().any(|l| ((l - eta) / c.lambda + 2.0).abs() <= 0.1) {
            continue;
        }
        let fd = oracle::central_difference(|e| dro::dual_value(&c, &losses, e).unwrap(), eta, 1e-5);
        let an = dro::grad_eta(&c, &losses, eta).unwrap();
        assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "eta={eta} fd={fd} an={an}");
    }
}

#[test]
fn phi_oracle_on_two_point_losses() {
    let c = ctx(1.0);
    let batch = SampleBatch::new(vec![0.0, 2.0], vec![vec![1.0], vec![3.0]]).unwrap();
    let phi = dro::phi_oracle(&c, &[batch]).unwrap();
    assert!((phi.etas[0] - 1.0).abs() < 1e-12);
    // f*(-1) = -0.75, f*(1) = 1.25.
    assert!((phi.values[0] - 1.25).abs() < 1e-12);
    // Weights f*'(-1) = 0.5 and f*'(1) = 1.5 average to (0.5 + 4.5) / 2.
    assert!((phi.jacobian[0][0] - 2.5).abs() < 1e-12);
}

#[test]
fn bracket_failure_is_an_error() {
    let c = ctx(1.0);
    assert!(dro::exact_dual_min(&c, &[0.0, f64::INFINITY]).is_err());
    assert!(dro::exact_dual_min(&c, &[]).is_err());
}
