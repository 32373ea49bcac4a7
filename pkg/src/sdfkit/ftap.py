"""The equivalent forms of no-arbitrage on a finite outcome space. Each one
is decided by its own linear program, so their agreement is a real check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checks import check_arbitrage, check_risk_neutral, check_sdf
from .errors import Infeasible, InternalInconsistency, LpNumericalFailure
from .market import DiscreteMarket, Strategy, terminal_wealth
from .simplex import linprog

EPS = 1e-9  # interior margin standing in for strict positivity
ARB_TOL = 1e-9
# The max-min LP must clear EPS by this much (relative to the solution's
# size); otherwise positivity is only reached on the orthant's boundary.
POS_MARGIN = 1e-8


@dataclass(frozen=True, eq=False)
class SdfVector:
    y_T: np.ndarray


@dataclass(frozen=True, eq=False)
class RiskNeutralMeasure:
    q: np.ndarray


@dataclass(frozen=True, eq=False)
class ArbitrageCertificate:
    theta: np.ndarray
    payoff: np.ndarray


@dataclass(frozen=True, eq=False)
class SdfSpace:
    """Affine hull of the SDF set: ``particular + span(basis)``, intersected
    with the open orthant ``y > 0``."""

    particular: SdfVector
    basis: np.ndarray  # (dimension, n_outcomes), orthonormal rows
    rank: int
    positivity: str = "y(w) > 0 for every outcome (open constraint, not encoded in basis)"

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True, eq=False)
class FtapReport:
    no_arbitrage: bool
    sdf_exists: bool
    rn_exists: bool
    certificate: ArbitrageCertificate | None = None
    sdf: SdfVector | None = None
    risk_neutral: RiskNeutralMeasure | None = None
    notes: list = field(default_factory=list)


def pricing_matrix(market: DiscreteMarket) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``P(w) S^i_T(w)`` for i = 0..d and the price vector ``S^i_0``."""
    s0, sT = market.all_prices()
    return sT * market.prob, s0


def find_arbitrage(market: DiscreteMarket) -> ArbitrageCertificate | None:
    """Search for a zero-cost strategy with nonnegative, nonzero payoff.

    LP in (theta, s): maximize sum(s) with deflated gains G.T @ theta >= s,
    0 <= s <= 1. The optimum is positive exactly when an arbitrage exists.
    """
    d, n = market.d, market.n_outcomes
    if d == 0:
        return None
    G = market.deflated_gains  # (d, n)
    scale = max(1.0, float(np.max(np.abs(G))))
    c = np.concatenate([np.zeros(d), -np.ones(n)])
    A_ub = np.hstack([-G.T / scale, np.eye(n)])
    b_ub = np.zeros(n)
    bounds = [(None, None)] * d + [(0.0, 1.0)] * n
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds)
    if not res.success:
        raise LpNumericalFailure(f"arbitrage LP ended with status {res.status}")
    if -res.fun <= ARB_TOL:
        return None
    theta = res.x[:d] / scale
    payoff = terminal_wealth(market, Strategy(theta, 0.0))
    # Rescale so the largest payoff is one; sign pattern is unaffected.
    top = float(np.max(payoff))
    theta, payoff = theta / top, payoff / top
    problems = check_arbitrage(market, theta)
    if problems:
        raise LpNumericalFailure("arbitrage certificate failed re-verification: " + "; ".join(problems))
    return ArbitrageCertificate(theta, payoff)


def _interior_point(A_eq, b_eq, n):
    """Maximize t subject to A_eq y = b_eq, y - t >= EPS, t >= 0."""
    c = np.concatenate([np.zeros(n), [-1.0]])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = -np.full(n, EPS)
    A = np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))])
    bounds = [(EPS, None)] * n + [(0.0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A, b_eq=b_eq, bounds=bounds)
    if res.status == "infeasible":
        return None
    if not res.success:
        raise LpNumericalFailure(f"interior-point LP ended with status {res.status}")
    y, t = res.x[:n], res.x[n]
    if t <= POS_MARGIN * max(1.0, float(np.max(y))):
        return None
    return y


def find_sdf(market: DiscreteMarket) -> SdfVector:
    """Return a strictly positive solution of the pricing equations.

    Among all solutions, the LP picks one maximizing the smallest entry, so
    the answer sits as deep inside the positive orthant as possible.

    Raises :class:`Infeasible` when no SDF exists.
    """
    A, s0 = pricing_matrix(market)
    scale = np.maximum(np.abs(s0), np.max(np.abs(A), axis=1))
    y = _interior_point(A / scale[:, None], s0 / scale, market.n_outcomes)
    if y is None:
        raise Infeasible("no strictly positive solution of the pricing equations")
    y = _polish(A, s0, y)
    return SdfVector(y)


def _polish(A, b, y):
    """One least-squares correction step onto the pricing equations; keeps
    LP round-off from leaking into the 1e-9 pricing tolerance."""
    resid = b - A @ y
    dy = np.linalg.lstsq(A, resid, rcond=None)[0]
    y2 = y + dy
    if np.all(y2 > 0) and np.max(np.abs(b - A @ y2)) <= np.max(np.abs(resid)):
        return y2
    return y


def find_risk_neutral(market: DiscreteMarket) -> RiskNeutralMeasure:
    """Search directly for Q > 0 with sum(Q) = 1 and E^Q[beta S^i_T] = S^i_0."""
    s0, sT = market.all_prices()
    beta = market.baseline_s0 / market.baseline_sT
    rows = np.vstack([np.ones(market.n_outcomes), sT * beta])
    rhs = np.concatenate([[1.0], s0])
    scale = np.maximum(np.abs(rhs), np.max(np.abs(rows), axis=1))
    q = _interior_point(rows / scale[:, None], rhs / scale, market.n_outcomes)
    if q is None:
        raise Infeasible("no equivalent martingale measure")
    q = _polish(rows, rhs, q)
    q = q / q.sum()
    return RiskNeutralMeasure(q)


def sdf_solution_space(market: DiscreteMarket) -> SdfSpace:
    particular = find_sdf(market)
    A, _ = pricing_matrix(market)
    _, sv, vt = np.linalg.svd(A)
    tol = max(A.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    return SdfSpace(particular, vt[rank:].copy(), rank)


def sdf_to_risk_neutral(market: DiscreteMarket, y: SdfVector) -> RiskNeutralMeasure:
    return RiskNeutralMeasure(market.growth * y.y_T * market.prob)


def risk_neutral_to_sdf(market: DiscreteMarket, q: RiskNeutralMeasure) -> SdfVector:
    return SdfVector(q.q / (market.growth * market.prob))


def ftap_verdict(market: DiscreteMarket) -> FtapReport:
    """Run the three independent searches and insist they agree."""
    cert = find_arbitrage(market)
    try:
        sdf = find_sdf(market)
    except Infeasible:
        sdf = None
    try:
        rn = find_risk_neutral(market)
    except Infeasible:
        rn = None
    notes = []
    if sdf is not None:
        notes += [f"sdf: {p}" for p in check_sdf(market, sdf.y_T)]
    if rn is not None:
        notes += [f"risk-neutral: {p}" for p in check_risk_neutral(market, rn.q)]
    report = FtapReport(cert is None, sdf is not None, rn is not None, cert, sdf, rn, notes)
    if notes or len({report.no_arbitrage, report.sdf_exists, report.rn_exists}) != 1:
        raise InternalInconsistency(
            f"FTAP verdicts disagree: no_arbitrage={report.no_arbitrage}, "
            f"sdf={report.sdf_exists}, rn={report.rn_exists}; {notes}")
    return report
