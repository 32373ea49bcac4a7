"""Pricing new claims against a finite-state market."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArbitrageDetected, BaselineNotConstantRate, InternalInconsistency, LpNumericalFailure
from .ftap import EPS, SdfVector, find_arbitrage, pricing_matrix
from .market import ClaimPayoff, DiscreteMarket
from .simplex import linprog
from .utility import UtilitySpec, optimize

REPLICATION_TOL = 1e-9
INDIFFERENCE_EPS_TOL = 1e-6


@dataclass(frozen=True)
class PriceInterval:
    """Closure of the arbitrage-free price set, with attainment flags.

    When the claim is not replicable the price set itself is the open interval
    ``(lower, upper)``; an endpoint is attained only if some strictly positive
    SDF prices the claim there.
    """

    lower: float
    upper: float
    lower_attained: bool
    upper_attained: bool
    replicable: bool

    def contains(self, price: float, tol: float = 0.0) -> bool:
        lo_ok = price > self.lower - tol if not self.lower_attained else price >= self.lower - tol
        hi_ok = price < self.upper + tol if not self.upper_attained else price <= self.upper + tol
        return lo_ok and hi_ok


@dataclass(frozen=True, eq=False)
class Replication:
    replicable: bool
    x: float | None
    theta: np.ndarray | None
    residual: float


@dataclass(frozen=True, eq=False)
class StatePriceDensity:
    p: np.ndarray


@dataclass(frozen=True)
class CovarianceDecomposition:
    rn_term: float
    cov_term: float
    total: float


def replication_check(market: DiscreteMarket, claim: ClaimPayoff) -> Replication:
    """Least-squares fit of ``x * growth + theta @ excess`` to the claim."""
    h = claim.h_T
    A = np.column_stack([market.growth, market.excess_payoffs.T])
    coef = np.linalg.lstsq(A, h, rcond=None)[0]
    resid = float(np.max(np.abs(A @ coef - h)))
    if resid <= REPLICATION_TOL * max(1.0, float(np.max(np.abs(h)))):
        return Replication(True, float(coef[0]), coef[1:], resid)
    return Replication(False, None, None, resid)


def _optimal_face_interior(A, b, obj, opt):
    """Is there y > 0 with A y = b and obj @ y = opt? (max-min-slack LP)."""
    n = A.shape[1]
    rows = np.vstack([A, obj])
    rhs = np.concatenate([b, [opt]])
    scale = np.maximum(np.abs(rhs), np.max(np.abs(rows), axis=1))
    scale[scale == 0] = 1.0
    rows, rhs = rows / scale[:, None], rhs / scale
    c = np.concatenate([np.zeros(n), [-1.0]])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=np.hstack([rows, np.zeros((rows.shape[0], 1))]),
                  b_eq=rhs, bounds=[(0, None)] * n + [(0, 1.0)])
    if res.status == "infeasible":
        return False
    if not res.success:
        raise LpNumericalFailure(f"attainment LP ended with status {res.status}")
    return -res.fun > EPS


def price_bounds(market: DiscreteMarket, claim: ClaimPayoff) -> PriceInterval:
    """Inf and sup of E[Y H] over the closure of the SDF set."""
    if find_arbitrage(market) is not None:
        raise ArbitrageDetected("price bounds need an arbitrage-free market")
    A, s0 = pricing_matrix(market)
    obj = market.prob * claim.h_T
    n = market.n_outcomes
    rep = replication_check(market, claim)
    ends = []
    for sign in (1.0, -1.0):
        res = linprog(sign * obj, A_eq=A, b_eq=s0, bounds=[(0, None)] * n)
        if not res.success:
            raise LpNumericalFailure(f"price-bound LP ended with status {res.status}")
        ends.append(sign * res.fun)
    lower, upper = ends
    if rep.replicable:
        # Every SDF gives the replication cost; report it exactly.
        return PriceInterval(rep.x, rep.x, True, True, True)
    lower_att = _optimal_face_interior(A, s0, obj, lower)
    upper_att = _optimal_face_interior(A, s0, obj, upper)
    return PriceInterval(lower, upper, lower_att, upper_att, False)


def indifference_price(market: DiscreteMarket, u: UtilitySpec, x: float, claim: ClaimPayoff,
                       verify: bool = False) -> float:
    """E[Y H] under the SDF induced by the agent's optimal wealth.

    With ``verify`` the claim is added to the market at this price and the
    enlarged problem is re-solved; the optimal claim position must vanish.
    """
    sol = optimize(market, u, x)
    price = float(market.prob @ (sol.sdf.y_T * claim.h_T))
    if verify:
        eps = indifference_position(market, u, x, claim, price)
        if eps is not None and abs(eps) > INDIFFERENCE_EPS_TOL:
            raise InternalInconsistency(f"optimal claim position {eps:.3g} at the indifference price")
    return price


def indifference_prices(market: DiscreteMarket, u: UtilitySpec, x: float, claims) -> list[float]:
    """Price a batch of claims from a single utility optimization."""
    sol = optimize(market, u, x)
    return [float(market.prob @ (sol.sdf.y_T * c.h_T)) for c in claims]


def indifference_position(market: DiscreteMarket, u: UtilitySpec, x: float, claim: ClaimPayoff,
                          price: float) -> float | None:
    """Optimal units of the claim when it trades at ``price``.

    Returns ``None`` for replicable claims, where the position is not
    identified (any amount can be offset by the replicating portfolio).
    """
    if replication_check(market, claim).replicable:
        return None
    bigger = market.with_asset(claim.name, price, claim.h_T)
    sol = optimize(bigger, u, x)
    return float(sol.theta_star[-1])


def state_prices(market: DiscreteMarket, y: SdfVector) -> StatePriceDensity:
    return StatePriceDensity(y.y_T * market.prob)


def constant_rate(market: DiscreteMarket, T: float = 1.0, tol: float = 1e-12) -> float:
    """Simple rate r with S0_0 = 1 and S0_T = 1 + r T, or raise."""
    bT = market.baseline_sT
    if abs(market.baseline_s0 - 1.0) > tol or np.ptp(bT) > tol * max(1.0, float(np.max(bT))):
        raise BaselineNotConstantRate("baseline is not a constant-rate account with S0_0 = 1")
    return (float(bT[0]) - 1.0) / T


def covariance_decomposition(market: DiscreteMarket, y: SdfVector, claim: ClaimPayoff,
                             r: float | None = None, T: float = 1.0) -> CovarianceDecomposition:
    """Split E[Y H] into the discounted real-world mean plus cov(Y, H)."""
    r_market = constant_rate(market, T)
    if r is None:
        r = r_market
    elif abs(r - r_market) > 1e-12 * max(1.0, abs(r)):
        raise BaselineNotConstantRate(f"baseline grows at rate {r_market}, not {r}")
    p, yv, h = market.prob, y.y_T, claim.h_T
    mean_h = float(p @ h)
    cov = float(p @ (yv * h)) - float(p @ yv) * mean_h
    rn = mean_h / (1.0 + r * T)
    return CovarianceDecomposition(rn, cov, rn + cov)
