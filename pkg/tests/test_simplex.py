import numpy as np
import pytest
from scipy.optimize import linprog as scipy_linprog

from sdfkit.errors import LpNumericalFailure
from sdfkit.simplex import linprog


def _feasible(x, A_ub, b_ub, A_eq, b_eq, bounds, tol=1e-7):
    if A_ub is not None and np.any(A_ub @ x > b_ub + tol):
        return False
    if A_eq is not None and np.any(np.abs(A_eq @ x - b_eq) > tol):
        return False
    for xi, (lo, hi) in zip(x, bounds):
        if lo is not None and xi < lo - tol or hi is not None and xi > hi + tol:
            return False
    return True


def _random_lp(rng):
    n = int(rng.integers(1, 7))
    m_ub = int(rng.integers(0, 5))
    m_eq = int(rng.integers(0, 3))
    c = rng.integers(-3, 4, n).astype(float)
    A_ub = rng.integers(-3, 4, (m_ub, n)).astype(float) if m_ub else None
    b_ub = rng.integers(-2, 6, m_ub).astype(float) if m_ub else None
    A_eq = rng.integers(-3, 4, (m_eq, n)).astype(float) if m_eq else None
    b_eq = rng.integers(-2, 4, m_eq).astype(float) if m_eq else None
    bounds = []
    for _ in range(n):
        kind = rng.integers(4)
        lo = [0.0, None, -2.0, 0.0][kind]
        hi = [None, None, 3.0, 1.0][kind]
        bounds.append((lo, hi))
    return c, A_ub, b_ub, A_eq, b_eq, bounds


def test_agrees_with_highs_on_random_lps():
    rng = np.random.default_rng(0)
    statuses = {}
    for _ in range(600):
        c, A_ub, b_ub, A_eq, b_eq, bounds = _random_lp(rng)
        ours = linprog(c, A_ub, b_ub, A_eq, b_eq, bounds)
        ref = scipy_linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
        statuses[ours.status] = statuses.get(ours.status, 0) + 1
        if ref.status == 0:
            assert ours.success
            assert ours.fun == pytest.approx(ref.fun, abs=1e-7)
            assert _feasible(ours.x, A_ub, b_ub, A_eq, b_eq, bounds)
        elif ref.status == 2:
            # HiGHS may answer "infeasible" for problems that are feasible but
            # unbounded; our verdict must then be unbounded with a feasible point.
            if ours.status != "infeasible":
                assert ours.status == "unbounded"
        elif ref.status == 3:
            assert ours.status == "unbounded"
        if ours.success:
            assert _feasible(ours.x, A_ub, b_ub, A_eq, b_eq, bounds)
    assert statuses.get("optimal", 0) > 100 and statuses.get("infeasible", 0) > 10


def test_beale_cycling_example_terminates():
    # Classic instance on which Dantzig's rule without anti-cycling loops forever.
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    A = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    b = np.array([0.0, 0.0, 1.0])
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(0, None)] * 4)
    assert res.success
    assert res.fun == pytest.approx(-0.05, abs=1e-12)


def test_statuses():
    assert linprog([1.0], A_ub=[[1.0]], b_ub=[-1.0], bounds=[(0, None)]).status == "infeasible"
    assert linprog([-1.0], bounds=[(0, None)]).status == "unbounded"
    res = linprog([1.0, 1.0], A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0], bounds=[(0, None)] * 2)
    assert res.success and res.fun == pytest.approx(1.0)  # redundant equality row


def test_free_and_boxed_variables():
    res = linprog([1.0, -1.0], A_ub=[[-1.0, 0.0]], b_ub=[2.0], bounds=[(None, None), (-1.0, 4.0)])
    assert res.success
    np.testing.assert_allclose(res.x, [-2.0, 4.0])


def test_deterministic():
    rng = np.random.default_rng(1)
    for _ in range(50):
        lp = _random_lp(rng)
        a, b = linprog(*lp), linprog(*lp)
        assert a.status == b.status
        if a.success:
            assert a.x.tobytes() == b.x.tobytes()


def test_iteration_cap_raises():
    c = -np.ones(6)
    A = np.eye(6)
    with pytest.raises(LpNumericalFailure):
        linprog(c, A_ub=A, b_ub=np.ones(6), bounds=[(0, None)] * 6, max_iter=1)
