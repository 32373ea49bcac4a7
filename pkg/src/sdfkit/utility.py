"""Expected-utility portfolio choice and the discount factor it induces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArbitrageDetected,
    DimensionMismatch,
    DomainViolation,
    MaxIterationsExceeded,
)
from .ftap import SdfVector, find_arbitrage
from .market import DiscreteMarket, Strategy, terminal_wealth

GRAD_TOL = 1e-9
DOMAIN_FLOOR = 1e-12  # iterates keep min wealth >= DOMAIN_FLOOR * x
COND_MAX = 1e12
RAY_DOUBLINGS = 60
ESCAPE_FACTOR = 1e10
ROUNDOFF = 1e-12
NULL_PAYOFF = 1e-10  # payoff/|p||V| below this is round-off


@dataclass(frozen=True)
class UtilitySpec:
    """``log``, ``power`` (``U = x**(1-gamma)/(1-gamma)``) or ``exp`` (``U = -exp(-alpha x)``)."""

    family: str
    param: float | None = None

    def __post_init__(self):
        if self.family == "log":
            if self.param is not None:
                raise ValueError("log utility takes no parameter")
        elif self.family == "power":
            g = self.param
            if g is None or not g > 0 or g == 1 or not math.isfinite(g):
                raise ValueError("power utility needs gamma in (0,1) or (1,inf)")
        elif self.family == "exp":
            a = self.param
            if a is None or not a > 0 or not math.isfinite(a):
                raise ValueError("exponential utility needs alpha > 0")
        else:
            raise ValueError(f"unknown utility family {self.family!r}")

    @property
    def positive_domain(self) -> bool:
        return self.family != "exp"

    def in_domain(self, w) -> bool:
        return bool(np.all(np.asarray(w) > 0)) if self.positive_domain else bool(np.all(np.isfinite(w)))

    def value(self, w):
        w = np.asarray(w, dtype=float)
        if self.family == "log":
            return np.log(w)
        if self.family == "power":
            g = self.param
            return w ** (1.0 - g) / (1.0 - g)
        return -np.exp(-self.param * w)

    def d1(self, w):
        w = np.asarray(w, dtype=float)
        if self.family == "log":
            return 1.0 / w
        if self.family == "power":
            return w ** (-self.param)
        return self.param * np.exp(-self.param * w)

    def d2(self, w):
        w = np.asarray(w, dtype=float)
        if self.family == "log":
            return -1.0 / w**2
        if self.family == "power":
            g = self.param
            return -g * w ** (-g - 1.0)
        return -self.param**2 * np.exp(-self.param * w)

    def label(self) -> str:
        if self.family == "log":
            return "log"
        if self.family == "power":
            return f"power:gamma={self.param:g}"
        return f"exp:alpha={self.param:g}"


def parse_utility(text: str) -> UtilitySpec:
    """Parse ``log``, ``power:gamma=2`` or ``exp:alpha=1``."""
    family, _, rest = text.strip().partition(":")
    family = {"exponential": "exp"}.get(family, family)
    if family == "log":
        if rest:
            raise ValueError("log utility takes no parameters")
        return UtilitySpec("log")
    key = {"power": "gamma", "exp": "alpha"}.get(family)
    if key is None:
        raise ValueError(f"unknown utility {text!r}")
    name, eq, val = rest.partition("=")
    if name.strip() != key or not eq:
        raise ValueError(f"{family} utility needs '{key}=<value>'")
    return UtilitySpec(family, float(val))


def check_utility_shape(u: UtilitySpec, grid=None, h: float = 1e-4) -> bool:
    """Finite-difference check that U is increasing and strictly concave on a grid."""
    if grid is None:
        grid = np.linspace(0.05, 5.0, 200) if u.positive_domain else np.linspace(-5.0, 5.0, 200)
    up = (u.value(grid + h) - u.value(grid - h)) / (2 * h)
    upp = (u.value(grid + h) - 2 * u.value(grid) + u.value(grid - h)) / h**2
    return bool(np.all(up > 0) and np.all(upp < 0))


@dataclass(frozen=True, eq=False)
class OptimalSolution:
    theta_star: np.ndarray
    x: float
    wealth_star: np.ndarray
    objective: float
    sdf: SdfVector
    iterations: int
    grad_norm: float
    utility: UtilitySpec


def expected_utility(market: DiscreteMarket, u: UtilitySpec, strat: Strategy) -> tuple[float, np.ndarray]:
    """E[U(X_T)] and its gradient in theta."""
    w = terminal_wealth(market, strat)
    if not u.in_domain(w):
        raise DomainViolation(f"terminal wealth {w} outside the domain of {u.label()} utility")
    p = market.prob
    return float(p @ u.value(w)), market.excess_payoffs @ (p * u.d1(w))


def _hessian(market, u, w):
    V = market.excess_payoffs
    return (V * (market.prob * u.d2(w))) @ V.T


def induced_sdf(market: DiscreteMarket, u: UtilitySpec, wealth: np.ndarray) -> SdfVector:
    """Y_T = U'(X_T) / E[(S0_T/S0_0) U'(X_T)]."""
    mu = u.d1(wealth)
    return SdfVector(mu / float(market.prob @ (market.growth * mu)))


class _Problem:
    def __init__(self, market, u, x):
        self.market, self.u, self.x = market, u, x
        self.V = market.excess_payoffs
        self.base = x * market.growth
        self.floor = DOMAIN_FLOOR * x if u.positive_domain else -np.inf
        # -exp(-a w) = exp(-a c) * -exp(-a (w - c)): the optimizer works on the
        # shifted wealth so values stay O(1) however large riskless wealth is.
        self.shift = float(np.min(self.base)) if u.family == "exp" else 0.0

    def grad(self, w):
        return self.V @ (self.market.prob * self.u.d1(w - self.shift))

    def step(self, w, grad):
        return _newton_or_gradient(self.market, self.u, w - self.shift, grad)

    def wealth(self, theta):
        return self.base + theta @ self.V

    def f(self, theta):
        return self._f_wealth(self.wealth(theta))

    def _f_wealth(self, w):
        if self.u.positive_domain and np.any(w <= 0):
            return -np.inf
        with np.errstate(over="ignore"):
            val = float(self.market.prob @ self.u.value(w - self.shift))
        return val if not math.isnan(val) else -np.inf

    def max_step(self, theta, p):
        """Largest t keeping min wealth >= floor along theta + t p."""
        if not self.u.positive_domain:
            return np.inf
        w = self.wealth(theta)
        dw = p @ self.V
        neg = dw < 0
        if not np.any(neg):
            return np.inf
        return float(np.min((w[neg] - self.floor) / -dw[neg]))

    def ray_is_unbounded(self, theta, p):
        """Objective never decreases along the payoff ray w + 2^k t0 dw, k < 60.

        ``dw`` is the payoff of direction ``p`` after :func:`_snap`, so payoff
        entries that are zero up to round-off are exactly zero. The first step
        is small relative to wealth; after 60 doublings any negative payoff
        component has grown far past the point where it costs utility, so only
        a nonnegative payoff direction (an arbitrage) survives.
        """
        raw = p @ self.V
        size = float(np.linalg.norm(p)) * float(np.max(np.abs(self.V), initial=0.0))
        if float(np.max(np.abs(raw), initial=0.0)) <= NULL_PAYOFF * size:
            return False  # pays nothing: a flat direction, not a ray of ascent
        dw = _snap(self.V, p)
        top = float(np.max(np.abs(dw), initial=0.0))
        if top == 0.0:
            return False
        w0 = self.wealth(theta)
        scale = max(1.0, abs(self.x), float(np.max(np.abs(self.base))))
        step = 1e-3 * scale / top
        prev = start = self._f_wealth(w0)
        for _ in range(RAY_DOUBLINGS):
            cur = self._f_wealth(w0 + step * dw)
            if not cur >= prev - ROUNDOFF * max(1.0, abs(prev)):
                return False
            prev = max(prev, cur)
            step *= 2.0
        return prev > start + ROUNDOFF * max(1.0, abs(start))


def optimize(market: DiscreteMarket, u: UtilitySpec, x: float, theta0=None,
             max_iter: int = 200, check_arbitrage: bool = True) -> OptimalSolution:
    """Maximize E[U(X_T)] over theta by damped Newton with backtracking.

    With ``check_arbitrage`` the LP arbitrage test runs first. Independently of
    it, the iteration declares :class:`ArbitrageDetected` when a search
    direction turns out to be an ascent ray of unbounded length, or when the
    iterates' payoff escapes every reasonable bound while still improving.
    """
    x = float(x)
    if u.positive_domain and not x > 0:
        raise DomainViolation(f"{u.label()} utility needs positive initial capital, got {x}")
    if check_arbitrage:
        cert = find_arbitrage(market)
        if cert is not None:
            raise ArbitrageDetected("market admits arbitrage; utility supremum is not attained", cert)

    prob = _Problem(market, u, x)
    d = market.d
    theta = np.zeros(d) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if theta.shape != (d,):
        raise DimensionMismatch(f"theta0 has shape {theta.shape}, market has d={d}")
    w = prob.wealth(theta)
    if not u.in_domain(w) or (u.positive_domain and np.min(w) < prob.floor):
        raise DomainViolation("starting strategy leaves the utility domain")

    escape = ESCAPE_FACTOR * max(1.0, abs(x), float(np.max(np.abs(prob.base))))
    fval = prob.f(theta)
    it = 0
    gnorm = 0.0
    converged = False
    for it in range(max_iter + 1):
        w = prob.wealth(theta)
        grad = prob.grad(w)
        gnorm = float(np.max(np.abs(grad), initial=0.0))
        if gnorm <= GRAD_TOL * max(1.0, abs(fval)):
            converged = True
            break
        if it == max_iter:
            break
        p = prob.step(w, grad)
        if prob.ray_is_unbounded(theta, p):
            raise ArbitrageDetected("objective increases without bound along a ray")
        t = min(1.0, 0.99 * prob.max_step(theta, p)) if u.positive_domain else 1.0
        slope = float(grad @ p)
        while t >= 1e-20:
            cand = theta + t * p
            fc = prob.f(cand)
            if fc >= fval + 1e-4 * t * slope - ROUNDOFF * 1e-3 * max(1.0, abs(fval)):
                break
            t *= 0.5
        if t < 1e-20:
            break  # no ascent left at machine precision
        theta, fval = cand, fc
        if float(np.max(np.abs(prob.wealth(theta) - prob.base))) > escape:
            raise ArbitrageDetected("iterates escape to infinity while the objective keeps improving")

    if converged and d:
        theta, fval, gnorm = _polish(prob, theta, fval, gnorm)

    # A small or stalled gradient is not attainment when the objective merely
    # flattens out along an arbitrage (bounded utilities do this).
    w = prob.wealth(theta)
    for direction in _flat_directions(market, u, w - prob.shift, grad):
        if prob.ray_is_unbounded(theta, direction):
            raise ArbitrageDetected("objective increases without bound along a ray")
    if not converged and it == max_iter:
        raise MaxIterationsExceeded(f"no convergence after {max_iter} iterations (|grad|={gnorm:.3g})")
    objective = float(market.prob @ u.value(w)) if prob.shift else float(fval)
    return OptimalSolution(theta, x, w, objective, induced_sdf(market, u, w - prob.shift), it, gnorm, u)


def _polish(prob, theta, fval, gnorm):
    """One extra full Newton step, kept only if it lowers the gradient."""
    u = prob.u
    w = prob.wealth(theta)
    cand = theta + prob.step(w, prob.grad(w))
    wc = prob.wealth(cand)
    if not u.in_domain(wc) or (u.positive_domain and np.min(wc) < prob.floor):
        return theta, fval, gnorm
    fc = prob.f(cand)
    gc = float(np.max(np.abs(prob.grad(wc))))
    if gc < gnorm and fc >= fval - ROUNDOFF * max(1.0, abs(fval)):
        return cand, fc, gc
    return theta, fval, gnorm


def _flat_directions(market, u, w, grad):
    """Candidate recession directions at a stationary point: the Newton step
    and both signs of the Hessian's weakest-curvature eigenvector."""
    if market.d == 0:
        return []
    out = [_newton_or_gradient(market, u, w, grad)]
    H = _hessian(market, u, w)
    _, vecs = np.linalg.eigh(-H)
    out += [vecs[:, 0], -vecs[:, 0]]
    return out


def _snap(V, p):
    """Payoff of direction ``p`` with near-zero entries made exactly zero.

    States whose payoff is below 1e-6 of the largest form a set Z; ``p`` is
    projected onto the strategies paying exactly nothing on Z, and the payoff
    of that projection (zeroed on Z, where it vanishes up to round-off) is
    returned. If the projection kills the payoff, the raw payoff is kept.
    """
    dw = p @ V
    top = float(np.max(np.abs(dw), initial=0.0))
    if top == 0.0:
        return dw
    zero = np.abs(dw) <= 1e-6 * top
    if not np.any(zero):
        return dw
    _, sv, vt = np.linalg.svd(V[:, zero].T)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0] if sv.size else 0.0)))
    null = vt[rank:]
    q = null.T @ (null @ p)
    out = q @ V
    if np.max(np.abs(out[zero]), initial=0.0) > 1e-12 * top or np.max(np.abs(out)) < 0.5 * top:
        return dw
    out[zero] = 0.0
    return out


def _newton_or_gradient(market, u, w, grad):
    H = _hessian(market, u, w)
    if H.size:
        try:
            cond = np.linalg.cond(H)
        except np.linalg.LinAlgError:
            cond = np.inf
        if np.isfinite(cond) and cond <= COND_MAX:
            return np.linalg.solve(-H, grad)
        # Redundant assets make H singular; the gradient lies in its range,
        # so a minimum-norm Newton step still solves the reduced problem.
        p = np.linalg.lstsq(-H, grad, rcond=1e-12)[0]
        if np.all(np.isfinite(p)) and float(grad @ p) > 0:
            return p
    return grad


@dataclass(frozen=True)
class MartingaleCheck:
    trials: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def verify_sdf_martingale(market: DiscreteMarket, sol: OptimalSolution | SdfVector, trials: int = 100,
                          seed: int = 0, tol: float = 1e-9) -> MartingaleCheck:
    """Check E[Y_T X_T] = x for random capitals and strategies."""
    y = sol.sdf.y_T if isinstance(sol, OptimalSolution) else sol.y_T
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-1, 1)
        theta = rng.uniform(-1, 1, market.d)
        wealth = terminal_wealth(market, Strategy(theta, x))
        worst = max(worst, abs(float(market.prob @ (y * wealth)) - x))
    return MartingaleCheck(trials, worst, tol)


@dataclass(frozen=True, eq=False)
class LogIdentityReport:
    solution: OptimalSolution
    max_product_error: float  # max |Y X* - x|
    reciprocal_mean_error: float  # |E[1/(beta X*)] - 1/x|
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.max_product_error, self.reciprocal_mean_error) <= self.tolerance


def log_optimal_identity(market: DiscreteMarket, x: float = 1.0, tol: float = 1e-9) -> LogIdentityReport:
    """Solve the log-utility problem and compare its SDF with 1/X*.

    For general capital the identity reads Y X* = x and E[1/(beta X*)] = 1/x;
    at x = 1 these are the familiar Y = 1/X* and E[1/(beta X*)] = 1.
    """
    sol = optimize(market, UtilitySpec("log"), x)
    w = sol.wealth_star
    beta = market.baseline_s0 / market.baseline_sT
    prod_err = float(np.max(np.abs(sol.sdf.y_T * w - x)))
    recip = float(market.prob @ (1.0 / (beta * w)))
    return LogIdentityReport(sol, prod_err, abs(recip - 1.0 / x), tol)
