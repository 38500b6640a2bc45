//! Numeric checks of the analytical inequalities behind the solvers.

use drmoo_core::check;

fn assert_passes(r: check::CheckResult) {
    assert!(r.passed, "{r}");
}

#[test]
fn gradients_match_finite_differences() {
    for r in check::fd_checks(11, 60, false).unwrap() {
        assert_passes(r);
    }
}

#[test]
fn semi_smoothness_on_quadratic_tasks() {
    assert_passes(check::semi_smoothness(3, 300).unwrap());
}

#[test]
fn gradient_domination_in_one_dimension() {
    assert_passes(check::descent_inequality(5, 150).unwrap());
}

#[test]
fn bias_is_bounded_by_dual_gradient() {
    assert_passes(check::bias_bound(2, 150).unwrap());
}

#[test]
fn rescaled_gradients_are_coupled() {
    assert_passes(check::gradient_coupling(4, 150).unwrap());
}

#[test]
fn surrogate_and_rescaled_chain() {
    assert_passes(check::stationarity_chain(6, 150).unwrap());
}

#[test]
fn inner_descent_is_monotone_and_converges() {
    assert_passes(check::inner_loop_progress(8, 10).unwrap());
}

#[test]
fn per_sample_variance_is_affine_bounded() {
    assert_passes(check::affine_variance(9, 6).unwrap());
}

#[test]
fn toy_frontiers() {
    assert_passes(check::toy_frontier(1).unwrap());
}
