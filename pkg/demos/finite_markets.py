# %% [markdown]
# # No-arbitrage analysis of two small markets
#
# A binary market is complete: one stock, two states, one SDF. A trinomial
# market with the same stock is incomplete, so the SDF is a line segment and
# an Arrow claim only has a price interval.

# %%
import numpy as np

from sdfkit import (
    ClaimPayoff,
    DiscreteMarket,
    find_arbitrage,
    ftap_verdict,
    price_bounds,
    replication_check,
    sdf_solution_space,
    state_prices,
)

binary = DiscreteMarket.from_arrays([0.5, 0.5], 1.0, [1.0, 1.0], [1.0], [[2.0, 0.5]])
trinomial = DiscreteMarket.from_arrays([1 / 3] * 3, 1.0, [1.0] * 3, [1.0], [[2.0, 1.0, 0.5]])

# %% [markdown]
# The three verdicts (no arbitrage, an SDF, a risk-neutral measure) come from
# separate linear programs and must agree.

# %%
for name, m in [("binary", binary), ("trinomial", trinomial)]:
    rep = ftap_verdict(m)
    space = sdf_solution_space(m)
    print(f"{name:9s} no_arbitrage={rep.no_arbitrage} Y={np.round(rep.sdf.y_T, 6)} "
          f"Q={np.round(rep.risk_neutral.q, 6)} free dimensions={space.dimension}")

# %% [markdown]
# Binary market: the Arrow claim on the up state is replicable, costs 1/3
# and needs 2/3 of a share.

# %%
arrow = ClaimPayoff([1.0, 0.0])
rep = replication_check(binary, arrow)
print("replicable:", rep.replicable, "cost:", rep.x, "shares:", rep.theta)
print("state prices:", state_prices(binary, ftap_verdict(binary).sdf).p)

# %% [markdown]
# Trinomial market: the same kind of claim is priced anywhere in the open
# interval (0, 1/3). Adding it as a traded asset keeps the market free of
# arbitrage exactly for prices inside that interval.

# %%
arrow3 = ClaimPayoff([1.0, 0.0, 0.0])
iv = price_bounds(trinomial, arrow3)
print(f"interval [{iv.lower:.6f}, {iv.upper:.6f}], attained: {iv.lower_attained}, {iv.upper_attained}")
for price in (-0.05, 0.0, 0.1, 0.2, 1 / 3, 0.5):
    cert = find_arbitrage(trinomial.with_asset("arrow", price, arrow3.h_T))
    print(f"  price {price:+.4f}: {'arbitrage, theta=' + str(np.round(cert.theta, 4)) if cert else 'arbitrage-free'}")

# %% [markdown]
# A market whose single asset pays at least its cost in every state, and
# more in one, is an arbitrage. The certificate is the position to buy.

# %%
dominated = DiscreteMarket.from_arrays([0.5, 0.5], 1.0, [1.0, 1.0], [1.0], [[2.0, 1.0]])
cert = find_arbitrage(dominated)
print("theta:", cert.theta, "payoff:", cert.payoff)
