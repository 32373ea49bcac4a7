"""Dense bounded-variable primal simplex.

Solves::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lo <= x <= hi

with a two-phase method on a full tableau. Nonbasic variables rest at
either bound, so finite upper bounds never become extra rows. Entering and
leaving variables follow Bland's lowest-index rule, which rules out cycling
and makes the pivot sequence (and thus the output) a pure function of the
input. Problem sizes here are tens of rows; dense linear algebra is fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LpNumericalFailure

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-11  # phase-1 residual; must sit well below callers' interior margins
REINVERT_EVERY = 32


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    fun: float | None
    iterations: int

    @property
    def success(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, A, b, u):
        self.A = A
        self.b = b
        self.u = u
        m, n = A.shape
        self.m, self.n = m, n
        self.at_upper = np.zeros(n, dtype=bool)
        self.basis = np.empty(m, dtype=int)
        self.T = None
        self.xB = None
        self.iterations = 0

    def nonbasic_values(self):
        x = np.where(self.at_upper, self.u, 0.0)
        x[self.basis] = 0.0
        return np.where(np.isfinite(x), x, 0.0)

    def reinvert(self):
        B = self.A[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.A)
            self.xB = np.linalg.solve(B, self.b - self.A @ self.nonbasic_values())
        except np.linalg.LinAlgError:
            raise LpNumericalFailure("basis matrix became singular") from None
        self.T[np.abs(self.T) < 1e-14] = 0.0

    def values(self):
        x = self.nonbasic_values()
        x[self.basis] = self.xB
        return x

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0

    def run(self, cost, max_iter, allowed):
        """Primal simplex iterations on ``cost``; returns "optimal" or "unbounded"."""
        is_basic = np.zeros(self.n, dtype=bool)
        while True:
            if self.iterations >= max_iter:
                raise LpNumericalFailure(f"simplex exceeded {max_iter} iterations")
            if self.iterations % REINVERT_EVERY == 0:
                self.reinvert()
            is_basic[:] = False
            is_basic[self.basis] = True
            red = cost - cost[self.basis] @ self.T
            eligible = (
                allowed & ~is_basic & (self.u > 0)
                & np.where(self.at_upper, red > COST_TOL, red < -COST_TOL)
            )
            cands = np.flatnonzero(eligible)
            if cands.size == 0:
                return "optimal"
            j = int(cands[0])
            s = -1.0 if self.at_upper[j] else 1.0
            alpha = self.T[:, j] * s

            # (step, variable index, row or -1 for bound flip, leaves at upper)
            best = (self.u[j], j, -1, False)
            ties = []
            for i in range(self.m):
                a = alpha[i]
                bi = self.basis[i]
                if a > PIVOT_TOL:
                    t, up = max(self.xB[i], 0.0) / a, False
                elif a < -PIVOT_TOL and np.isfinite(self.u[bi]):
                    t, up = max(self.u[bi] - self.xB[i], 0.0) / -a, True
                else:
                    continue
                ties.append((t, int(bi), i, up))
            ties.append(best)
            t_min = min(e[0] for e in ties)
            if not np.isfinite(t_min):
                return "unbounded"
            window = t_min + 1e-12 * max(1.0, abs(t_min))
            t_star, _, r, up = min((e for e in ties if e[0] <= window), key=lambda e: e[1])
            t_star = t_min

            self.xB -= t_star * alpha
            if r < 0:
                self.at_upper[j] = not self.at_upper[j]
            else:
                leaving = self.basis[r]
                entering_val = (self.u[j] if self.at_upper[j] else 0.0) + s * t_star
                self.pivot(r, j)
                self.basis[r] = j
                self.xB[r] = entering_val
                self.at_upper[j] = False
                self.at_upper[leaving] = up
            self.iterations += 1


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None, max_iter=None) -> LpResult:
    """Minimize a linear objective. ``bounds`` is a list of ``(lo, hi)`` pairs,
    ``None`` meaning unbounded on that side; the default is ``(0, None)``."""
    c = np.asarray(c, dtype=float)
    nvar = c.shape[0]
    A_ub = np.zeros((0, nvar)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, nvar)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.size == 0:
        A_ub = np.zeros((0, nvar))
    if A_eq.size == 0:
        A_eq = np.zeros((0, nvar))
    if bounds is None:
        bounds = [(0.0, None)] * nvar
    if len(bounds) != nvar:
        raise ValueError("bounds length does not match number of variables")

    # Map every original variable to standard columns in [0, u].
    cols = []  # (orig index, sign)
    upper = []
    offset = np.zeros(nvar)
    for k, (lo, hi) in enumerate(bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            return LpResult("infeasible", None, None, 0)
        if np.isfinite(lo):
            offset[k] = lo
            cols.append((k, 1.0))
            upper.append(hi - lo)
        elif np.isfinite(hi):
            offset[k] = hi
            cols.append((k, -1.0))
            upper.append(np.inf)
        else:
            cols.append((k, 1.0))
            upper.append(np.inf)
            cols.append((k, -1.0))
            upper.append(np.inf)
    nstd = len(cols)
    M = np.zeros((nvar, nstd))
    for q, (k, sgn) in enumerate(cols):
        M[k, q] = sgn

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    n_struct = nstd + m_ub
    A = np.zeros((m, n_struct + m))
    A[:m_ub, :nstd] = A_ub @ M
    A[:m_ub, nstd:n_struct] = np.eye(m_ub)
    A[m_ub:, :nstd] = A_eq @ M
    b = np.concatenate([b_ub - A_ub @ offset, b_eq - A_eq @ offset])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    A[:, n_struct:] = np.eye(m)
    u = np.concatenate([upper, np.full(m_ub, np.inf), np.full(m, np.inf)])
    cost2 = np.concatenate([M.T @ c, np.zeros(m_ub + m)])

    if max_iter is None:
        max_iter = 50 * (m + n_struct) + 1000

    tab = _Tableau(A, b, u)
    tab.basis[:] = np.arange(n_struct, n_struct + m)
    allowed = np.ones(n_struct + m, dtype=bool)

    if m > 0:
        cost1 = np.concatenate([np.zeros(n_struct), np.ones(m)])
        tab.run(cost1, max_iter, allowed)
        tab.reinvert()
        infeas = float(np.sum(tab.values()[n_struct:]))
        if infeas > FEAS_TOL * max(1.0, float(np.max(np.abs(b)))):
            return LpResult("infeasible", None, None, tab.iterations)
        _drive_out_artificials(tab, n_struct)
        allowed[n_struct:] = False
        tab.u[n_struct:] = 0.0

    status = "optimal"
    if m > 0:
        status = tab.run(cost2, max_iter, allowed)
        tab.reinvert()
        xs = tab.values()
    else:
        # No rows: every variable sits at whichever bound its cost prefers.
        xs = np.zeros(n_struct)
        for q in range(n_struct):
            if cost2[q] < 0:
                if not np.isfinite(u[q]):
                    status = "unbounded"
                    break
                xs[q] = u[q]
    if status == "unbounded":
        return LpResult("unbounded", None, None, tab.iterations)

    lo_viol = -np.min(xs[:n_struct], initial=0.0)
    hi_viol = np.max((xs - tab.u)[:n_struct], initial=0.0)
    if max(lo_viol, hi_viol) > 1e-7 * max(1.0, float(np.max(np.abs(b), initial=0.0))):
        raise LpNumericalFailure("final basis violates variable bounds")
    x = offset + M @ np.clip(xs[:nstd], 0.0, None)
    return LpResult("optimal", x, float(c @ x), tab.iterations)


def _drive_out_artificials(tab: _Tableau, n_struct: int) -> None:
    """Pivot zero-level artificials out of the basis; drop redundant rows."""
    r = 0
    while r < tab.m:
        if tab.basis[r] < n_struct:
            r += 1
            continue
        row = tab.T[r, :n_struct]
        is_basic = np.zeros(tab.n, dtype=bool)
        is_basic[tab.basis] = True
        cand = np.flatnonzero((np.abs(row) > PIVOT_TOL) & ~is_basic[:n_struct])
        if cand.size:
            j = int(cand[0])
            tab.pivot(r, j)
            tab.basis[r] = j
            tab.at_upper[j] = False
            tab.reinvert()
            r += 1
        else:
            keep = np.arange(tab.m) != r
            tab.A = tab.A[keep]
            tab.b = tab.b[keep]
            tab.basis = tab.basis[keep]
            tab.m -= 1
            tab.reinvert()
