"""Path simulation and pathwise wealth / discount-factor processes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, InvalidPathCount, InvalidStepCount, KappaNotInKernel
from .model import ItoModelSpec, RiskPremium
from .rng import standard_normals


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Simulated paths on a uniform grid.

    ``dW`` holds Brownian increments, shape ``(n_paths, n_steps, dims)``;
    ``S`` holds asset prices, shape ``(n_paths, n_steps + 1, d)``; ``beta`` is
    the deflator on the grid (deterministic here, so one row for all paths).
    """

    model: ItoModelSpec
    time_grid: np.ndarray
    dW: np.ndarray
    S: np.ndarray
    beta: np.ndarray
    seed: int

    @property
    def n_paths(self) -> int:
        return self.dW.shape[0]

    @property
    def n_steps(self) -> int:
        return self.dW.shape[1]

    @property
    def dt(self) -> float:
        return self.model.T / self.n_steps

    def checkpoint_indices(self, fractions=(0.25, 0.5, 0.75, 1.0)) -> np.ndarray:
        """Grid indices nearest to the given fractions of the horizon."""
        return np.array([int(round(f * self.n_steps)) for f in fractions])


def _cumulative(increments: np.ndarray) -> np.ndarray:
    """Prepend a zero along the time axis and accumulate."""
    out = np.zeros((increments.shape[0], increments.shape[1] + 1) + increments.shape[2:])
    np.cumsum(increments, axis=1, out=out[:, 1:])
    return out


def simulate(model: ItoModelSpec, n_steps: int, n_paths: int, seed: int, workers: int = 1) -> PathEnsemble:
    """Simulate ``n_paths`` paths of ``model`` on ``n_steps`` equal steps.

    Constant-coefficient prices use the exact log scheme (exact in law on the
    grid). Bessel(3) is the norm of a 3-d Brownian motion started at
    (s0, 0, 0); the inverse kind is its reciprocal.
    """
    if isinstance(n_steps, bool) or int(n_steps) != n_steps or n_steps < 1:
        raise InvalidStepCount(f"need a positive step count, got {n_steps!r}")
    if isinstance(n_paths, bool) or int(n_paths) != n_paths or n_paths < 1:
        raise InvalidPathCount(f"need a positive path count, got {n_paths!r}")
    n_steps, n_paths = int(n_steps), int(n_paths)
    grid = np.linspace(0.0, model.T, n_steps + 1)
    dt = model.T / n_steps
    dims = model.m
    dW = standard_normals(seed, n_paths, n_steps, dims, workers) * np.sqrt(dt)

    if model.kind == "constant_coefficients":
        log_drift = (model.b - 0.5 * np.diag(model.c)) * dt
        incr = dW @ model.sigma + log_drift
        S = model.s0 * np.exp(_cumulative(incr))
        beta = np.exp(-model.r * grid)
    else:
        W = _cumulative(dW)
        W[:, :, 0] += model.s0[0]
        R = np.sqrt(np.einsum("ptk,ptk->pt", W, W))[:, :, None]
        S = R if model.kind == "bessel3" else 1.0 / R
        beta = np.ones(n_steps + 1)
    for arr in (grid, dW, S, beta):
        arr.setflags(write=False)
    return PathEnsemble(model, grid, dW, S, beta, seed)


def _require_constant(ens):
    if ens.model.kind != "constant_coefficients":
        raise DimensionMismatch("operation needs a constant-coefficient ensemble")


def wealth_paths(ens: PathEnsemble, pi) -> np.ndarray:
    """X^pi from unit capital with constant proportions ``pi``, shape (n_paths, n+1)."""
    _require_constant(ens)
    model = ens.model
    pi = np.atleast_1d(np.asarray(pi, dtype=float))
    if pi.shape != (model.d,):
        raise DimensionMismatch(f"portfolio needs {model.d} proportions")
    drift = model.r + pi @ model.excess_drift - 0.5 * pi @ model.c @ pi
    incr = ens.dW @ (model.sigma @ pi) + drift * ens.dt
    return np.exp(_cumulative(incr))


def sdf_star_paths(ens: PathEnsemble, rp: RiskPremium) -> np.ndarray:
    """Y* = beta exp(-int <lambda*, dW> - |lambda*|^2 t / 2), shape (n_paths, n+1)."""
    _require_constant(ens)
    lam = rp.lambda_star
    if lam.shape != (ens.model.m,):
        raise DimensionMismatch("risk premium does not match the model")
    # Same increments as wealth_paths(pi*) with the sign flipped, so that
    # Y* X^{pi*} = 1 holds to round-off.
    drift = ens.model.r + rp.pi_star @ ens.model.excess_drift - 0.5 * rp.pi_star @ ens.model.c @ rp.pi_star
    incr = ens.dW @ (ens.model.sigma @ rp.pi_star) + drift * ens.dt
    return np.exp(-_cumulative(incr))


def density_paths(ens: PathEnsemble, kappa) -> np.ndarray:
    """N^kappa = exp(-<kappa, W_t> - |kappa|^2 t / 2) for constant kappa."""
    kappa = np.asarray(kappa, dtype=float)
    incr = -(ens.dW @ kappa) - 0.5 * float(kappa @ kappa) * ens.dt
    return np.exp(_cumulative(incr))


def sdf_compose(ens: PathEnsemble, rp: RiskPremium) -> np.ndarray:
    """Y = Y* N^kappa for the kernel vector stored in ``rp``."""
    _require_constant(ens)
    if rp.kappa is None:
        raise KappaNotInKernel("risk premium carries no kappa")
    sigma = ens.model.sigma
    resid = float(np.max(np.abs(sigma.T @ rp.kappa), initial=0.0))
    if resid > 1e-10 * max(1.0, float(np.max(np.abs(rp.kappa)))):
        raise KappaNotInKernel(f"sigma^T kappa has sup-norm {resid:.3g}")
    return sdf_star_paths(ens, rp) * density_paths(ens, rp.kappa)
