"""Finite-state one-period markets: validation, deflation and wealth."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonPositiveBaseline,
    NonPositiveProbability,
    ProbabilityNotNormalized,
    SchemaError,
)

PROB_SUM_TOL = 1e-12
CANCEL_ULPS = 8  # gains within this many ulps of their operands are zero


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: not numeric ({exc})") from None
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{name}: non-finite entries")
    arr.setflags(write=False)
    return arr


def _cancel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a - b`` with differences at rounding level set to exactly zero."""
    out = a - b
    out[np.abs(out) <= CANCEL_ULPS * np.finfo(float).eps * (np.abs(a) + np.abs(b))] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class DiscreteMarket:
    """One-period market on a finite outcome space.

    ``asset_sT`` has shape ``(d, n_outcomes)``; ``d`` may be zero.
    Build instances through :func:`validate_market` (or :meth:`from_arrays`),
    which enforces positivity and normalization.
    """

    outcomes: tuple[str, ...]
    prob: np.ndarray
    baseline_s0: float
    baseline_sT: np.ndarray
    asset_s0: np.ndarray
    asset_sT: np.ndarray
    asset_names: tuple[str, ...] = field(default=())

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    @property
    def d(self) -> int:
        return self.asset_s0.shape[0]

    @property
    def growth(self) -> np.ndarray:
        """Baseline growth factor S0_T / S0_0 per outcome."""
        return self.baseline_sT / self.baseline_s0

    @property
    def excess_payoffs(self) -> np.ndarray:
        """``(d, n)`` matrix of S^i_T - (S0_T/S0_0) S^i_0."""
        hedge = np.outer(self.asset_s0, self.growth)
        return _cancel(self.asset_sT, hedge)

    @property
    def deflated_gains(self) -> np.ndarray:
        """``(d, n)`` matrix of beta_T S^i_T - S^i_0."""
        beta = self.baseline_s0 / self.baseline_sT
        return _cancel(self.asset_sT * beta, np.broadcast_to(self.asset_s0[:, None], self.asset_sT.shape))

    def all_prices(self) -> tuple[np.ndarray, np.ndarray]:
        """Today's prices and payoffs of assets 0..d stacked, baseline first."""
        s0 = np.concatenate([[self.baseline_s0], self.asset_s0])
        sT = np.vstack([self.baseline_sT[None, :], self.asset_sT])
        return s0, sT

    def with_asset(self, name: str, s0: float, sT) -> "DiscreteMarket":
        """Return a copy augmented by one more traded asset."""
        sT = np.asarray(sT, dtype=float)
        return validate_market({
            "outcomes": list(self.outcomes),
            "probabilities": self.prob.tolist(),
            "baseline": {"s0": self.baseline_s0, "sT": self.baseline_sT.tolist()},
            "assets": [
                {"name": n, "s0": float(p), "sT": row.tolist()}
                for n, p, row in zip(self.asset_names, self.asset_s0, self.asset_sT)
            ] + [{"name": name, "s0": float(s0), "sT": sT.tolist()}],
        })

    @classmethod
    def from_arrays(cls, prob, baseline_s0, baseline_sT, asset_s0=(), asset_sT=None,
                    outcomes=None, asset_names=None) -> "DiscreteMarket":
        n = len(prob)
        if outcomes is None:
            outcomes = [f"w{k}" for k in range(n)]
        asset_s0 = list(np.atleast_1d(np.asarray(asset_s0, dtype=float)))
        if asset_sT is None:
            asset_sT = np.zeros((0, n))
        asset_sT = np.asarray(asset_sT, dtype=float).reshape(len(asset_s0), n)
        if asset_names is None:
            asset_names = [f"S{i + 1}" for i in range(len(asset_s0))]
        return validate_market({
            "outcomes": list(outcomes),
            "probabilities": list(np.asarray(prob, dtype=float)),
            "baseline": {"s0": float(baseline_s0), "sT": list(np.asarray(baseline_sT, dtype=float))},
            "assets": [
                {"name": nm, "s0": float(p), "sT": list(row)}
                for nm, p, row in zip(asset_names, asset_s0, asset_sT)
            ],
        })

    def to_dict(self) -> dict:
        return {
            "outcomes": list(self.outcomes),
            "probabilities": self.prob.tolist(),
            "baseline": {"s0": float(self.baseline_s0), "sT": self.baseline_sT.tolist()},
            "assets": [
                {"name": n, "s0": float(p), "sT": row.tolist()}
                for n, p, row in zip(self.asset_names, self.asset_s0, self.asset_sT)
            ],
        }


@dataclass(frozen=True, eq=False)
class Deflator:
    beta_T: np.ndarray


@dataclass(frozen=True, eq=False)
class Strategy:
    theta: np.ndarray
    x: float = 0.0

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if not np.all(np.isfinite(theta)) or not np.isfinite(self.x):
            raise ValueError("strategy entries must be finite")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "x", float(self.x))


@dataclass(frozen=True, eq=False)
class ClaimPayoff:
    h_T: np.ndarray
    name: str = "claim"

    def __post_init__(self):
        h = _frozen_array(self.h_T, 1, "claim payoff")
        object.__setattr__(self, "h_T", h)


_MARKET_KEYS = {"outcomes", "probabilities", "baseline", "assets"}
_BASELINE_KEYS = {"s0", "sT"}
_ASSET_KEYS = {"name", "s0", "sT"}
_CLAIM_KEYS = {"name", "payoff"}


def _check_keys(obj: Any, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, Mapping):
        raise SchemaError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")


def validate_market(raw: Mapping[str, Any]) -> DiscreteMarket:
    """Check a raw market description and build a :class:`DiscreteMarket`.

    ``raw`` follows the JSON market schema (see README). Probabilities that
    sum to one within ``1e-12`` are rescaled to sum to one (vectors already
    normalized to round-off are kept bit-for-bit).
    """
    _check_keys(raw, _MARKET_KEYS, {"outcomes", "probabilities", "baseline"}, "market")
    outcomes = raw["outcomes"]
    if not isinstance(outcomes, Sequence) or isinstance(outcomes, str) or len(outcomes) < 1:
        raise SchemaError("market.outcomes: need a non-empty array of labels")
    outcomes = tuple(str(o) for o in outcomes)
    if len(set(outcomes)) != len(outcomes):
        raise SchemaError("market.outcomes: duplicate labels")
    n = len(outcomes)

    prob = np.array(_frozen_array(raw["probabilities"], 1, "probabilities"))
    if prob.shape[0] != n:
        raise DimensionMismatch(f"probabilities: {prob.shape[0]} entries for {n} outcomes")
    if np.any(prob <= 0):
        raise NonPositiveProbability("every outcome needs strictly positive probability")
    total = math.fsum(prob)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ProbabilityNotNormalized(f"probabilities sum to {total!r}")
    # Vectors already normalized up to round-off are kept as given, so that
    # loading is idempotent; anything further off is rescaled.
    if abs(total - 1.0) > n * np.finfo(float).eps:
        prob = prob / total

    base = raw["baseline"]
    _check_keys(base, _BASELINE_KEYS, _BASELINE_KEYS, "market.baseline")
    try:
        b0 = float(base["s0"])
    except (TypeError, ValueError):
        raise SchemaError("baseline.s0: not a number") from None
    bT = _frozen_array(base["sT"], 1, "baseline.sT")
    if bT.shape[0] != n:
        raise DimensionMismatch(f"baseline.sT: {bT.shape[0]} entries for {n} outcomes")
    if not np.isfinite(b0) or b0 <= 0 or np.any(bT <= 0):
        raise NonPositiveBaseline("baseline prices must be strictly positive")

    assets = raw.get("assets", [])
    if not isinstance(assets, Sequence) or isinstance(assets, str):
        raise SchemaError("market.assets: expected an array")
    names, s0s, sTs = [], [], []
    for k, a in enumerate(assets):
        _check_keys(a, _ASSET_KEYS, {"s0", "sT"}, f"market.assets[{k}]")
        names.append(str(a.get("name", f"S{k + 1}")))
        try:
            s0s.append(float(a["s0"]))
        except (TypeError, ValueError):
            raise SchemaError(f"assets[{k}].s0: not a number") from None
        row = _frozen_array(a["sT"], 1, f"assets[{k}].sT")
        if row.shape[0] != n:
            raise DimensionMismatch(f"assets[{k}].sT: {row.shape[0]} entries for {n} outcomes")
        sTs.append(row)
    asset_s0 = _frozen_array(s0s, 1, "asset s0") if s0s else _frozen_array(np.zeros(0), 1, "asset s0")
    asset_sT = _frozen_array(np.array(sTs).reshape(len(sTs), n), 2, "asset sT")

    prob.setflags(write=False)
    return DiscreteMarket(outcomes, prob, b0, bT, asset_s0, asset_sT, tuple(names))


def deflate(market: DiscreteMarket) -> Deflator:
    beta = market.baseline_s0 / market.baseline_sT
    beta.setflags(write=False)
    return Deflator(beta)


def terminal_wealth(market: DiscreteMarket, strat: Strategy) -> np.ndarray:
    """Terminal wealth of starting capital ``strat.x`` invested per ``strat.theta``.

    The remainder after buying the risky assets sits in the baseline asset.
    """
    if strat.theta.shape != (market.d,):
        raise DimensionMismatch(f"theta has shape {strat.theta.shape}, market has d={market.d}")
    return strat.x * market.growth + strat.theta @ market.excess_payoffs


def deflated_terminal_wealth(market: DiscreteMarket, strat: Strategy) -> np.ndarray:
    """beta_T X_T computed from deflated gains (second form of the wealth identity)."""
    if strat.theta.shape != (market.d,):
        raise DimensionMismatch(f"theta has shape {strat.theta.shape}, market has d={market.d}")
    return strat.x + strat.theta @ market.deflated_gains


# -- file formats ------------------------------------------------------------

def load_market(path) -> DiscreteMarket:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return validate_market(raw)


def dump_market(market: DiscreteMarket, path) -> None:
    Path(path).write_text(json.dumps(market.to_dict(), indent=2) + "\n")


def validate_claim(raw: Mapping[str, Any], market: DiscreteMarket) -> ClaimPayoff:
    _check_keys(raw, _CLAIM_KEYS, {"payoff"}, "claim")
    claim = ClaimPayoff(raw["payoff"], str(raw.get("name", "claim")))
    if claim.h_T.shape[0] != market.n_outcomes:
        raise DimensionMismatch(
            f"claim payoff has {claim.h_T.shape[0]} entries, market has {market.n_outcomes} outcomes")
    return claim


def load_claim(path, market: DiscreteMarket) -> ClaimPayoff:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return validate_claim(raw, market)
