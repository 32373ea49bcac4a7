# %% [markdown]
# # Pricing with an optimal investor
#
# An investor maximizing expected utility induces an SDF proportional to
# marginal utility of optimal wealth. In an incomplete market that SDF picks
# one price out of the no-arbitrage interval, and the pick depends on the
# utility.

# %%
import numpy as np

from sdfkit import (
    ClaimPayoff,
    DiscreteMarket,
    SdfVector,
    UtilitySpec,
    covariance_decomposition,
    indifference_price,
    log_optimal_identity,
    optimize,
    price_bounds,
)

trinomial = DiscreteMarket.from_arrays([1 / 3] * 3, 1.0, [1.0] * 3, [1.0], [[2.0, 1.0, 0.5]])
arrow = ClaimPayoff([1.0, 0.0, 0.0])

# %%
iv = price_bounds(trinomial, arrow)
print(f"no-arbitrage interval ({iv.lower:.4f}, {iv.upper:.4f})")
for u in (UtilitySpec("log"), UtilitySpec("power", 2.0), UtilitySpec("power", 5.0), UtilitySpec("exp", 1.0)):
    sol = optimize(trinomial, u, 1.0)
    price = indifference_price(trinomial, u, 1.0, arrow, verify=True)
    print(f"{u.label():16s} theta*={sol.theta_star[0]:+.6f}  Y={np.round(sol.sdf.y_T, 6)}  price={price:.6f}")

# %% [markdown]
# For log utility the SDF is the reciprocal of optimal wealth, so the
# product Y X* equals the initial capital in every state.

# %%
rep = log_optimal_identity(trinomial)
print("Y X* =", rep.solution.sdf.y_T * rep.solution.wealth_star, "max error", rep.max_product_error)

# %% [markdown]
# With a constant riskless rate the price splits into a discounted
# risk-neutral expectation plus a covariance with the SDF.

# %%
r = 0.03
market = DiscreteMarket.from_arrays([0.25, 0.5, 0.25], 1.0, [1.0 + r] * 3, [1.0], [[1.4, 1.05, 0.8]])
sol = optimize(market, UtilitySpec("log"), 1.0)
call = ClaimPayoff(np.maximum(market.asset_sT[0] - 1.0, 0.0))
dec = covariance_decomposition(market, SdfVector(sol.sdf.y_T), call, r=r)
print(f"E[H]/(1+r) = {dec.rn_term:.6f}, Cov(Y, H) = {dec.cov_term:+.6f}, price = {dec.total:.6f}")
