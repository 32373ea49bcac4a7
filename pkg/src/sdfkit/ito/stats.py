"""Monte Carlo tests of the martingale property."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientPaths

Z_CRIT = 3.0
MIN_PATHS = 1000
# Spreads and gaps below this multiple of machine epsilon (relative to the
# values involved) are round-off, not sampling noise.
ROUNDOFF_ULPS = 64


@dataclass(frozen=True, eq=False)
class MartingaleTestReport:
    times: np.ndarray
    means: np.ndarray
    std_errors: np.ndarray
    z_scores: np.ndarray
    initial: float
    n_paths: int
    z_crit: float
    verdict: str  # consistent_with_martingale | supermartingale_strict | inconclusive

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "means": self.means.tolist(),
            "std_errors": self.std_errors.tolist(),
            "z_scores": self.z_scores.tolist(),
            "initial": self.initial,
            "n_paths": self.n_paths,
            "z_crit": self.z_crit,
            "verdict": self.verdict,
        }


def mean_and_se(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and standard errors of an ``(n_paths, k)`` array."""
    cols = np.ascontiguousarray(np.atleast_2d(np.asarray(values, dtype=float).T))
    n = cols.shape[1]
    # Contiguous last-axis reductions use numpy's fixed pairwise summation tree.
    mean = cols.sum(axis=1) / n
    dev = cols - mean[:, None]
    var = (dev * dev).sum(axis=1) / (n - 1)
    return mean, np.sqrt(var / n)


def verdict_from_z(z: np.ndarray, z_crit: float = Z_CRIT) -> str:
    if np.all(np.abs(z) <= z_crit):
        return "consistent_with_martingale"
    if np.any(z < -z_crit) and not np.any(z > z_crit):
        return "supermartingale_strict"
    return "inconclusive"


def martingale_test(values, initial: float, times=None, z_crit: float = Z_CRIT,
                    min_paths: int = MIN_PATHS) -> MartingaleTestReport:
    """Compare per-checkpoint sample means with the initial value.

    ``values`` has one row per path and one column per checkpoint. A column
    whose spread is at round-off level counts as exact: z = 0 if it equals ``initial``,
    otherwise infinite with the sign of the gap.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    if n < min_paths:
        raise InsufficientPaths(f"{n} paths; the test needs at least {min_paths}")
    mean, se = mean_and_se(values)
    floor = ROUNDOFF_ULPS * np.finfo(float).eps * np.maximum(np.abs(mean), abs(initial))
    gap = np.where(np.abs(mean - initial) <= floor, 0.0, mean - initial)
    exact = se <= floor
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(exact, np.sign(gap) * np.inf, gap / np.where(exact, 1.0, se))
    z = np.where(exact & (gap == 0), 0.0, z)
    if times is None:
        times = np.arange(values.shape[1], dtype=float)
    return MartingaleTestReport(np.asarray(times, dtype=float), mean, se, z, float(initial), n,
                                float(z_crit), verdict_from_z(z, z_crit))
