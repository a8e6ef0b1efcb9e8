"""LP backends: float/exact agreement and status handling."""

from fractions import Fraction

import numpy as np
import pytest

from contagion.lp import LinearProgram, solve_lp


def _program(c, A, b, upper=None):
    m, n = len(A), len(c)
    lp = LinearProgram.empty(n, m)
    lp.obj = list(c)
    for i, row in enumerate(A):
        for j, v in enumerate(row):
            if v:
                lp.add_entry(i, j, v)
    lp.b = list(b)
    if upper is not None:
        lp.upper = list(upper)
    return lp


def test_maximize_with_slack():
    # maximize g subject to g <= 5  (as min -g with a slack variable)
    lp = _program([-1, 0], [[1, 1]], [5])
    for exact in (False, True):
        sol = solve_lp(lp, exact=exact)
        assert sol.status == "optimal"
        assert abs(float(sol.objective) + 5) < 1e-12
    assert solve_lp(lp, exact=True).x[0] == Fraction(5)


def test_infeasible_detected():
    # x1 + x2 = -1 with x >= 0
    lp = _program([1, 1], [[1, 1]], [-1])
    assert solve_lp(lp).status == "infeasible"
    assert solve_lp(lp, exact=True).status == "infeasible"


def test_unbounded_detected():
    # min -x1 with x1 - x2 = 0, both unbounded above
    lp = _program([-1, 0], [[1, -1]], [0])
    assert solve_lp(lp).status == "unbounded"
    assert solve_lp(lp, exact=True).status == "unbounded"


def test_upper_bounds_respected():
    lp = _program([-1, -1], [[1, 1]], [3], upper=[2, None])
    for exact in (False, True):
        sol = solve_lp(lp, exact=exact)
        assert abs(float(sol.objective) + 3) < 1e-12


def test_exact_solver_requires_finite_lower():
    lp = _program([1], [[1]], [1])
    lp.lower = [None]
    with pytest.raises(ValueError):
        solve_lp(lp, exact=True)


def test_shifted_lower_bounds():
    # min x with x >= -2 and x + s = 0 -> x = -2 infeasible? s >= 0 so x <= 0;
    # optimum x = -2, s = 2.
    lp = _program([1, 0], [[1, 1]], [0])
    lp.lower = [-2, 0]
    for exact in (False, True):
        sol = solve_lp(lp, exact=exact)
        assert abs(float(sol.objective) + 2) < 1e-12


def test_random_cross_check_float_vs_exact():
    rng = np.random.default_rng(123)
    for _ in range(40):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(2, 7))
        A = rng.integers(-3, 4, size=(m, n))
        x0 = rng.integers(0, 3, size=n)
        b = A @ x0
        c = rng.integers(-4, 5, size=n)
        upper = [int(v) if rng.random() < 0.7 else None for v in x0 + rng.integers(0, 3, size=n)]
        lp = _program([int(v) for v in c], A.tolist(), [int(v) for v in b], upper)
        sf, se = solve_lp(lp), solve_lp(lp, exact=True)
        assert sf.status == se.status
        if sf.status == "optimal":
            assert abs(sf.objective - float(se.objective)) < 1e-7
