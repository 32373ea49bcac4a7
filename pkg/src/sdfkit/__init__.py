"""Pricing kernels (SDFs): constructed, then stress-tested.

Finite-state one-period markets are handled by LP-based no-arbitrage
analysis and expected-utility pricing; continuous-time Ito markets by
closed-form risk premia and seeded Monte Carlo.
"""

from . import errors
from .ftap import (
    ArbitrageCertificate,
    FtapReport,
    RiskNeutralMeasure,
    SdfSpace,
    SdfVector,
    find_arbitrage,
    find_risk_neutral,
    find_sdf,
    ftap_verdict,
    risk_neutral_to_sdf,
    sdf_solution_space,
    sdf_to_risk_neutral,
)
from .market import (
    ClaimPayoff,
    Deflator,
    DiscreteMarket,
    Strategy,
    deflate,
    deflated_terminal_wealth,
    load_claim,
    load_market,
    terminal_wealth,
    validate_claim,
    validate_market,
)
from .pricing import (
    CovarianceDecomposition,
    PriceInterval,
    Replication,
    StatePriceDensity,
    covariance_decomposition,
    indifference_price,
    indifference_prices,
    price_bounds,
    replication_check,
    state_prices,
)
from .utility import (
    OptimalSolution,
    UtilitySpec,
    expected_utility,
    induced_sdf,
    log_optimal_identity,
    optimize,
    parse_utility,
    verify_sdf_martingale,
)

__version__ = "0.1.0"

__all__ = [
    "ArbitrageCertificate", "ClaimPayoff", "CovarianceDecomposition", "Deflator", "DiscreteMarket",
    "FtapReport", "OptimalSolution", "PriceInterval", "Replication", "RiskNeutralMeasure", "SdfSpace",
    "SdfVector", "StatePriceDensity", "Strategy", "UtilitySpec", "covariance_decomposition", "deflate",
    "deflated_terminal_wealth", "errors", "expected_utility", "find_arbitrage", "find_risk_neutral",
    "find_sdf", "ftap_verdict", "indifference_price", "indifference_prices", "induced_sdf",
    "load_claim", "load_market", "log_optimal_identity", "optimize", "parse_utility", "price_bounds",
    "replication_check", "risk_neutral_to_sdf", "sdf_solution_space", "sdf_to_risk_neutral",
    "state_prices", "terminal_wealth", "validate_claim", "validate_market", "verify_sdf_martingale",
]
