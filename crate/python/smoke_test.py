"""Smoke test for the drmoo extension module.

Build and install first:

    pip install maturin
    cd crates/python && maturin develop --release
"""

import math
import tempfile

import drmoo


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    w = drmoo.project_simplex([0.6, 0.8])
    assert close(w[0], 0.4) and close(w[1], 0.6), w

    ctx = drmoo.DualContext(1.0)
    eta = ctx.exact_dual_min([0.0, 2.0])
    assert close(eta, 1.0), eta
    assert close(ctx.dual_value([0.0, 2.0], eta), 1.25)
    assert abs(ctx.grad_eta([0.0, 2.0], eta)) < 1e-10

    assert drmoo.pareto_filter([[1, 2], [2, 1], [2, 2], [1, 2]]) == [0, 1]

    problem = drmoo.Problem.linear(seed=0)
    assert (problem.num_objectives, problem.dim) == (3, 10)
    g = problem.estimate_lipschitz()
    values, etas, jac = problem.phi(drmoo.DualContext(0.8, g, 3), [0.0] * 10)
    assert len(values) == 3 and len(jac[0]) == 10

    trace = drmoo.solve(problem, "double_clip", seed=1, T=60)
    assert len(trace) == 60
    assert all(math.isfinite(v) for v in trace.balanced_grad)
    assert all(close(sum(w), 1.0, 1e-12) for w in trace.weights)
    assert trace.final_mean(20) < trace.initial_mean(20)
    again = drmoo.solve(problem, "double_clip", seed=1, T=60)
    assert trace.to_csv() == again.to_csv()

    try:
        drmoo.solve(problem, "double_clip", D=3)
    except drmoo.DrmooError as e:
        assert "does not apply" in str(e)
    else:
        raise AssertionError("D is not a double_clip key")

    nominal, robust = drmoo.robust_frontier(std=0.5, draws=50, grid=81)
    assert nominal != robust
    flat_nominal, flat_robust = drmoo.robust_frontier(std=0.0, draws=10, grid=81)
    assert len(flat_nominal) == len(flat_robust)

    results = drmoo.check()
    assert len(results) >= 10 and all(r[1] for r in results), [r for r in results if not r[1]]
    assert not all(r[1] for r in drmoo.check(self_test=True))

    assert "linear_e1_doubleloop" in drmoo.preset_names()
    with tempfile.TemporaryDirectory() as out:
        text = "seeds = 0, 1\n[run.m]\nproblem = toy\nsolver = mgda\nT = 30\n"
        rows = drmoo.run_config(text, output_dir=out)
        assert rows[0]["ok"] == 2 and rows[0]["status"] == "ok", rows

    print("drmoo smoke test passed")


if __name__ == "__main__":
    main()
