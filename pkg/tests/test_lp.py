import numpy as np
import pytest
from scipy.optimize import linprog

from fairbalance import LinearProgram, LpStatus, NumericalBreakdown, solve_lp

INF = np.inf


def taxi_min_max():
    # variables x1, x2, x3, T; every complaint <= T, efficiency, x >= 0
    rows = [
        [-1, -1, 0, -1],
        [-1, 0, -1, -1],
        [0, -1, -1, -1],
        [-1, 0, 0, -1],
        [0, -1, 0, -1],
        [0, 0, -1, -1],
        [1, 1, 1, 0],
    ]
    b = [-11, -11, -5, 0, 0, 0, 21]
    return LinearProgram([0, 0, 0, 1], rows, b, ["<="] * 6 + ["=="], [0, 0, 0, -INF])


def test_taxi_min_max_value():
    sol = solve_lp(taxi_min_max())
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(-5, abs=1e-12)
    np.testing.assert_allclose(sol.z[:3], [11, 5, 5], atol=1e-12)


def test_max_of_lower_bounds():
    sol = solve_lp(LinearProgram([1], [[1], [1]], [3, 5], [">=", ">="], [-INF]))
    assert sol.optimal and sol.objective == pytest.approx(5)


def test_contradictory_bounds_infeasible():
    sol = solve_lp(LinearProgram([1], [[1], [1]], [1, 2], ["<=", ">="], [-INF]))
    assert sol.status is LpStatus.INFEASIBLE


def test_unbounded():
    sol = solve_lp(LinearProgram([-1, 0], [[1, -1]], [1], ["<="]))
    assert sol.status is LpStatus.UNBOUNDED


def test_redundant_equalities():
    lp = LinearProgram([1, 1], [[1, 1], [2, 2], [1, 0]], [4, 8, 1], ["==", "==", ">="])
    sol = solve_lp(lp)
    assert sol.optimal and sol.objective == pytest.approx(4)


def test_beale_cycling_example():
    # cycles under textbook Dantzig pricing without an anti-cycling rule
    c = [-0.75, 20, -0.5, 6]
    A = [[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]]
    sol = solve_lp(LinearProgram(c, A, [0, 0, 1]))
    assert sol.optimal
    assert sol.objective == pytest.approx(-1.25, abs=1e-10)


def test_iteration_cap_raises():
    with pytest.raises(NumericalBreakdown):
        solve_lp(taxi_min_max(), max_iter=1)


def test_malformed_program_rejected():
    with pytest.raises(ValueError):
        LinearProgram([1, 2], [[1, 2]], [1, 2])
    with pytest.raises(ValueError):
        LinearProgram([1], [[1]], [1], ["<"])


def _scipy(c, A, b, senses, lower):
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, rhs, s in zip(A, b, senses):
        if s == "<=":
            a_ub.append(row), b_ub.append(rhs)
        elif s == ">=":
            a_ub.append(-row), b_ub.append(-rhs)
        else:
            a_eq.append(row), b_eq.append(rhs)
    kw = dict(
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=b_ub or None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=b_eq or None,
        bounds=[(None if np.isinf(lo) else lo, None) for lo in lower],
        method="highs",
    )
    res = linprog(c, **kw)
    if res.status == 2:
        # HiGHS reports "infeasible or unbounded" as infeasible; separate the two
        feas = linprog(np.zeros_like(c), **kw)
        return ("unbounded", None) if feas.status == 0 else ("infeasible", None)
    return {0: "optimal", 3: "unbounded"}[res.status], res.fun


def test_agrees_with_highs_on_random_programs():
    rng = np.random.default_rng(2024)
    for _ in range(400):
        m, n = int(rng.integers(1, 8)), int(rng.integers(1, 7))
        A = rng.integers(-3, 4, (m, n)).astype(float)
        b = rng.integers(-5, 6, m).astype(float)
        c = rng.integers(-3, 4, n).astype(float)
        senses = list(rng.choice(["<=", "==", ">="], m))
        lower = np.where(rng.random(n) < 0.4, -INF, rng.integers(-2, 2, n).astype(float))
        sol = solve_lp(LinearProgram(c, A, b, senses, lower))
        status, fun = _scipy(c, A, b, senses, lower)
        assert sol.status.value == status
        if status == "optimal":
            assert sol.objective == pytest.approx(fun, abs=1e-7)
            lp = LinearProgram(c, A, b, senses, lower)
            assert lp.violation(sol.z) <= 1e-8 * max(1.0, np.abs(b).max())
