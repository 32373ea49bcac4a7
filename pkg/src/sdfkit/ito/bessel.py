"""The two Bessel(3) counterexamples: a discount factor that is only a
strict local martingale, and an asset whose price exceeds its expected
payoff under the only local martingale measure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .model import ItoModelSpec
from .paths import simulate
from .stats import MartingaleTestReport, martingale_test, mean_and_se


def reciprocal_bessel_mean(T: float, s0: float = 1.0) -> float:
    """E[1/R_T] for a Bessel(3) process started at s0: (2 Phi(s0/sqrt T) - 1)/s0."""
    return float((2.0 * ndtr(s0 / np.sqrt(T)) - 1.0) / s0)


@dataclass(frozen=True, eq=False)
class BesselReport:
    T: float
    n_paths: int
    seed: int
    oracle_mean: float  # closed-form E[1/R_T]
    # kind 1: S = R, Y = 1/R
    max_pathwise_error: float  # max |Y S - 1|
    discount_test: MartingaleTestReport  # Y * S0 = 1/R against 1
    # kind 2: S = 1/R
    terminal_mean: float
    terminal_se: float
    price_gap: float  # S_0 - E[S_T]
    oracle_gap: float

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "oracle_mean": self.oracle_mean,
            "example1": {
                "max_pathwise_error": self.max_pathwise_error,
                "discount_test": self.discount_test.to_dict(),
            },
            "example2": {
                "terminal_mean": self.terminal_mean,
                "terminal_se": self.terminal_se,
                "price_gap": self.price_gap,
                "oracle_gap": self.oracle_gap,
            },
        }


def bessel_counterexamples(T: float, n_paths: int, seed: int, n_steps: int = 4,
                           workers: int = 1) -> BesselReport:
    """Simulate both examples on the same Brownian paths.

    Kind 1 uses S = R and Y = 1/R: Y S is identically one, while Y times
    the baseline (S0 = 1) loses mass over time. Kind 2 uses S = 1/R, whose
    expected terminal value falls short of its price S_0 = 1 by the same gap.
    """
    ens1 = simulate(ItoModelSpec("bessel3", T), n_steps, n_paths, seed, workers)
    R = ens1.S[:, :, 0]
    Y = 1.0 / R
    idx = ens1.checkpoint_indices()
    test = martingale_test(Y[:, idx], 1.0, ens1.time_grid[idx])
    pathwise = float(np.max(np.abs(Y * R - 1.0)))

    ens2 = simulate(ItoModelSpec("inverse_bessel3", T), n_steps, n_paths, seed, workers)
    ST = ens2.S[:, -1, 0]
    mean, se = mean_and_se(ST[:, None])
    oracle = reciprocal_bessel_mean(T)
    return BesselReport(T, n_paths, seed, oracle, pathwise, test, float(mean[0]), float(se[0]),
                        float(1.0 - mean[0]), 1.0 - oracle)
