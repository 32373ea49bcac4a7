"""Constant-coefficient Ito markets and their risk premia."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from ..errors import DimensionMismatch, KappaNotInKernel, SchemaError, SingularCovariation

KINDS = ("constant_coefficients", "bessel3", "inverse_bessel3")
RANK_TOL = 1e-10
KERNEL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ItoModelSpec:
    """Market model for Monte Carlo work.

    For ``constant_coefficients``: ``d`` assets driven by an ``m``-dimensional
    Brownian motion, dS^i/S^i = b^i dt + sum_j sigma[j, i] dW^j, savings
    account growing at the constant short rate ``r``. For the Bessel kinds
    only ``T`` and the scalar start ``s0`` matter; the baseline is S0 = 1.
    """

    kind: str
    T: float
    d: int = 1
    m: int = 1
    r: float = 0.0
    b: np.ndarray | None = None
    sigma: np.ndarray | None = None  # (m, d)
    s0: np.ndarray | None = None
    baseline_s0: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown model kind {self.kind!r}")
        if not (np.isfinite(self.T) and self.T > 0):
            raise SchemaError("horizon T must be positive")
        if self.kind != "constant_coefficients":
            s0 = 1.0 if self.s0 is None else float(np.ravel(self.s0)[0])
            if not s0 > 0:
                raise SchemaError("Bessel start must be positive")
            object.__setattr__(self, "s0", np.array([s0]))
            object.__setattr__(self, "d", 1)
            object.__setattr__(self, "m", 3)
            return
        d, m = int(self.d), int(self.m)
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim == 1 and sigma.size == m * d:
            sigma = sigma.reshape(m, d)
        s0 = np.atleast_1d(np.asarray(self.s0 if self.s0 is not None else np.ones(d), dtype=float))
        if b.shape != (d,) or sigma.shape != (m, d) or s0.shape != (d,):
            raise DimensionMismatch(
                f"expected b:({d},), sigma:({m},{d}), s0:({d},); got {b.shape}, {sigma.shape}, {s0.shape}")
        if not self.r >= 0:
            raise SchemaError("short rate must be nonnegative")
        if np.any(s0 <= 0) or not self.baseline_s0 > 0:
            raise SchemaError("initial prices must be positive")
        if d > m:
            raise SingularCovariation(f"d={d} assets need at least as many Brownian drivers, m={m}")
        sv = np.linalg.svd(sigma, compute_uv=False)
        if sv.size == 0 or sv[-1] <= RANK_TOL * sv[0]:
            raise SingularCovariation("sigma^T sigma is not of full rank")
        for name, val in (("b", b), ("sigma", sigma), ("s0", s0)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "r", float(self.r))

    @property
    def c(self) -> np.ndarray:
        return self.sigma.T @ self.sigma

    @property
    def excess_drift(self) -> np.ndarray:
        return self.b - self.r

    def to_dict(self) -> dict:
        if self.kind != "constant_coefficients":
            return {"kind": self.kind, "T": self.T}
        return {"kind": self.kind, "d": self.d, "m": self.m, "r": self.r, "b": self.b.tolist(),
                "sigma": self.sigma.ravel().tolist(), "s0": self.s0.tolist(), "T": self.T}


_MODEL_KEYS = {"kind", "d", "m", "r", "b", "sigma", "s0", "T", "baseline_s0"}


def validate_model(raw: Mapping[str, Any]) -> ItoModelSpec:
    if not isinstance(raw, Mapping):
        raise SchemaError("model: expected an object")
    unknown = set(raw) - _MODEL_KEYS
    if unknown:
        raise SchemaError(f"model: unknown keys {sorted(unknown)}")
    kind = raw.get("kind")
    if "T" not in raw:
        raise SchemaError("model: missing key 'T'")
    if kind in ("bessel3", "inverse_bessel3"):
        extra = set(raw) - {"kind", "T", "s0"}
        if extra:
            raise SchemaError(f"Bessel model takes only kind, T, s0; got {sorted(extra)}")
        return ItoModelSpec(kind, float(raw["T"]), s0=raw.get("s0"))
    missing = {"d", "m", "r", "b", "sigma", "T"} - set(raw)
    if missing:
        raise SchemaError(f"model: missing keys {sorted(missing)}")
    d, m = int(raw["d"]), int(raw["m"])
    sigma = np.asarray(raw["sigma"], dtype=float)
    if sigma.size != m * d:
        raise DimensionMismatch(f"sigma has {sigma.size} entries, need m*d = {m * d}")
    return ItoModelSpec(kind, float(raw["T"]), d, m, float(raw["r"]), raw["b"], sigma.reshape(m, d),
                        raw.get("s0"), float(raw.get("baseline_s0", 1.0)))


def load_model(path) -> ItoModelSpec:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return validate_model(raw)


@dataclass(frozen=True, eq=False)
class RiskPremium:
    lambda_star: np.ndarray
    kernel_basis: np.ndarray  # (m - d, m), orthonormal rows spanning ker(sigma^T)
    pi_star: np.ndarray  # c^{-1}(b - r 1), the log-optimal proportions
    kappa: np.ndarray | None = None

    @property
    def norm2_star(self) -> float:
        return float(self.lambda_star @ self.lambda_star)

    @property
    def total(self) -> np.ndarray:
        return self.lambda_star if self.kappa is None else self.lambda_star + self.kappa


def _require_constant(model):
    if model.kind != "constant_coefficients":
        raise SchemaError(f"operation needs a constant-coefficient model, got {model.kind}")


def risk_premium_star(model: ItoModelSpec, kappa=None) -> RiskPremium:
    """Minimal risk premium sigma c^{-1}(b - r 1) and a basis of ker(sigma^T)."""
    _require_constant(model)
    sigma = model.sigma
    try:
        pi_star = np.linalg.solve(model.c, model.excess_drift)
    except np.linalg.LinAlgError:
        raise SingularCovariation("covariation matrix is singular") from None
    lam = sigma @ pi_star
    # Rows of vt beyond rank d span the null space of sigma^T.
    _, _, vt = np.linalg.svd(sigma.T)
    basis = vt[model.d:].copy()
    rp = RiskPremium(lam, basis, pi_star)
    return rp if kappa is None else with_kappa(model, rp, kappa)


def with_kappa(model: ItoModelSpec, rp: RiskPremium, kappa) -> RiskPremium:
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    if kappa.shape != (model.m,):
        raise DimensionMismatch(f"kappa must have {model.m} entries")
    resid = float(np.max(np.abs(model.sigma.T @ kappa), initial=0.0))
    if resid > KERNEL_TOL * max(1.0, float(np.max(np.abs(kappa)))):
        raise KappaNotInKernel(f"sigma^T kappa has sup-norm {resid:.3g}")
    return RiskPremium(rp.lambda_star, rp.kernel_basis, rp.pi_star, kappa)


def log_wealth_drift(model: ItoModelSpec, pi) -> float:
    """Drift of log X^pi: r + <pi, b - r1> - <pi, c pi>/2."""
    pi = np.asarray(pi, dtype=float)
    return float(model.r + pi @ model.excess_drift - 0.5 * pi @ model.c @ pi)


@dataclass(frozen=True)
class NontradedDrift:
    drift: float
    kappa_invariant: bool


def nontraded_drift(model: ItoModelSpec, rp: RiskPremium, a: float, f, kappa=None) -> NontradedDrift:
    """Drift of dZ = a dt + <f, dW> under the pricing measure built from kappa.

    The drift does not depend on kappa exactly when ``f`` is orthogonal to
    ker(sigma^T), i.e. Z is spanned by the traded assets.
    """
    _require_constant(model)
    f = np.atleast_1d(np.asarray(f, dtype=float))
    if f.shape != (model.m,):
        raise DimensionMismatch(f"f must have {model.m} entries")
    if kappa is None:
        kappa = rp.kappa if rp.kappa is not None else np.zeros(model.m)
    else:
        kappa = with_kappa(model, rp, kappa).kappa
    proj = rp.kernel_basis @ f if rp.kernel_basis.size else np.zeros(0)
    invariant = bool(np.all(np.abs(proj) <= 1e-12 * max(1.0, float(np.max(np.abs(f), initial=0.0)))))
    return NontradedDrift(float(a - f @ rp.lambda_star - f @ kappa), invariant)
