"""Smoke test for the `infodesign` Python module.

Build and install first:

    pip install maturin
    maturin develop -m crates/py/Cargo.toml   # or: maturin build + pip install
    python python/smoke_test.py
"""

import math

import infodesign as idz


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def check_beliefs():
    a = idz.PosteriorDist([0.0, 1.0], [0.5, 0.5])
    b = idz.PosteriorDist.point_mass(0.5)
    assert idz.convex_order_compare(a, b) == "a_dominates"
    assert idz.convex_order_compare(b, a) == "b_dominates"
    g = a.garble([[0.8, 0.2], [0.2, 0.8]])
    assert close(g.mean, 0.5)
    assert idz.convex_order_compare(a, g) == "a_dominates"
    assert close(a.stop_loss(0.5), 0.25)


def check_risk_and_decisions():
    assert idz.check_dv(idz.BayesRisk.log(), idz.BayesRisk.brier())
    assert idz.concavity_order(idz.BayesRisk.log(), idz.BayesRisk.brier()) == "h_below"
    dp = idz.DecisionProblem.from_costs(1.0, 1.0)
    assert dp.optimal_action(0.9) == "act"
    w0, w1, gap, rel = idz.pipeline_compare(
        dp, idz.PosteriorDist([0.0, 1.0], [0.5, 0.5]), idz.PosteriorDist.point_mass(0.5)
    )
    assert rel == "a_dominates" and gap >= 0.0


def check_learning():
    dist, obj = idz.solve_quadratic_closed_form(0.5, 8.0, 0.5)
    q_high = sum(p * p * w for p, w in zip(dist.support, dist.weights)) / dist.mean
    assert close(q_high, 0.25 / 0.5 + 0.5 / 8.0 / 0.5)
    grid, grid_obj = idz.solve_learning(idz.BayesRisk.quadratic(0.5), 0.5, "dispersion", 8.0)
    assert grid_obj >= obj - 1e-12 and grid_obj - obj < 1e-4


def check_attention():
    dp = idz.DecisionProblem(["guess0", "guess1"], [(1.0, 0.0), (0.0, 1.0)])
    q0 = idz.PosteriorDist([0.0, 1.0], [0.5, 0.5])
    q1 = idz.PosteriorDist([0.25, 0.75], [0.5, 0.5])
    bar0, bar1, star = idz.attention_thresholds(dp, q0, q1)
    assert close(bar0, 0.5 / math.log(2.0), 1e-7)
    assert star is not None and star < bar0 < bar1


def check_rlhf():
    g = idz.Generator.goodhart_example()
    base = g.quality_dist([1.0])
    assert close(base.mean, 0.743)
    hacked = g.tilt([1.0], 1e-3, alpha=0.6).quality_dist([1.0])
    assert hacked.mean < base.mean
    aligned = g.tilt([1.0], 0.05).quality_dist([1.0])
    assert idz.fosd_check(aligned, base)


def check_simplex():
    a, b = idz.incomparable_pair_k3()
    assert idz.cx_compare_k(a, b) == "incomparable"
    assert idz.refutation_gap(a, b) > 0.0


def check_scenarios():
    names = [n for n, _ in idz.list_builtins()]
    assert "goodhart_builtin" in names
    files = idz.run_scenario("builtin:goodhart_builtin")
    text = next(iter(files.values()))
    assert text.startswith("# scenario=goodhart_builtin")
    assert files == idz.run_scenario("builtin:goodhart_builtin")


def main():
    for check in (
        check_beliefs,
        check_risk_and_decisions,
        check_learning,
        check_attention,
        check_rlhf,
        check_simplex,
        check_scenarios,
    ):
        check()
        print(f"ok  {check.__name__}")
    print("\n".join(idz.run_selftest()))


if __name__ == "__main__":
    main()
