"""Stand-alone re-verification of solver outputs.

Deliberately written with plain Python loops over the raw market fields and
no imports from the solver modules, so that a bug in the vectorized LP path
cannot silently agree with itself here.
"""

from __future__ import annotations


def _rows(market):
    outcomes = range(len(market.outcomes))
    prices = [float(market.baseline_s0)] + [float(v) for v in market.asset_s0]
    payoffs = [[float(market.baseline_sT[w]) for w in outcomes]]
    for i in range(len(market.asset_s0)):
        payoffs.append([float(market.asset_sT[i][w]) for w in outcomes])
    return prices, payoffs


def _close(a, b, tol):
    return abs(a - b) <= tol * (1.0 + abs(b))


def check_sdf(market, y, tol=1e-9):
    """Return a list of violated conditions (empty means ``y`` is an SDF)."""
    problems = []
    n = len(market.outcomes)
    if len(y) != n:
        return [f"length {len(y)} != {n} outcomes"]
    for w in range(n):
        if not float(y[w]) > 0.0:
            problems.append(f"Y[{w}] = {float(y[w])!r} is not positive")
    prices, payoffs = _rows(market)
    for i, (p0, row) in enumerate(zip(prices, payoffs)):
        value = 0.0
        for w in range(n):
            value += float(market.prob[w]) * float(y[w]) * row[w]
        if not _close(value, p0, tol):
            problems.append(f"asset {i}: E[Y S_T] = {value!r}, price {p0!r}")
    return problems


def check_risk_neutral(market, q, tol=1e-9):
    problems = []
    n = len(market.outcomes)
    if len(q) != n:
        return [f"length {len(q)} != {n} outcomes"]
    total = 0.0
    for w in range(n):
        if not float(q[w]) > 0.0:
            problems.append(f"Q[{w}] = {float(q[w])!r} is not positive")
        total += float(q[w])
    if abs(total - 1.0) > 1e-12 * n:
        problems.append(f"Q sums to {total!r}")
    prices, payoffs = _rows(market)
    for i, (p0, row) in enumerate(zip(prices, payoffs)):
        value = 0.0
        for w in range(n):
            beta = float(market.baseline_s0) / float(market.baseline_sT[w])
            value += float(q[w]) * beta * row[w]
        if not _close(value, p0, tol):
            problems.append(f"asset {i}: E^Q[beta S_T] = {value!r}, price {p0!r}")
    return problems


def check_arbitrage(market, theta, nonneg_tol=1e-10, pos_tol=1e-8):
    """Recompute the zero-capital payoff of ``theta`` and test the arbitrage
    conditions: nonnegative everywhere, positive somewhere."""
    n = len(market.outcomes)
    d = len(market.asset_s0)
    if len(theta) != d:
        return [f"theta has {len(theta)} entries, market has d={d}"]
    problems = []
    best = 0.0
    for w in range(n):
        g = float(market.baseline_sT[w]) / float(market.baseline_s0)
        pay = 0.0
        for i in range(d):
            pay += float(theta[i]) * (float(market.asset_sT[i][w]) - g * float(market.asset_s0[i]))
        if pay < -nonneg_tol:
            problems.append(f"payoff[{w}] = {pay!r} < 0")
        best = max(best, pay)
    if not best > pos_tol:
        problems.append(f"max payoff {best!r} is not positive")
    return problems
