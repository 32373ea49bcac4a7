from .bessel import BesselReport, bessel_counterexamples, reciprocal_bessel_mean
from .model import (
    ItoModelSpec,
    NontradedDrift,
    RiskPremium,
    load_model,
    log_wealth_drift,
    nontraded_drift,
    risk_premium_star,
    validate_model,
    with_kappa,
)
from .paths import PathEnsemble, density_paths, sdf_compose, sdf_star_paths, simulate, wealth_paths
from .stats import MartingaleTestReport, martingale_test, mean_and_se

__all__ = [
    "BesselReport", "ItoModelSpec", "MartingaleTestReport", "NontradedDrift", "PathEnsemble",
    "RiskPremium", "bessel_counterexamples", "density_paths", "load_model", "log_wealth_drift",
    "martingale_test", "mean_and_se", "nontraded_drift", "reciprocal_bessel_mean",
    "risk_premium_star", "sdf_compose", "sdf_star_paths", "simulate", "validate_model",
    "wealth_paths", "with_kappa",
]
