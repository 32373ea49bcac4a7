# %% [markdown]
# # SDFs in continuous time, checked by simulation
#
# In a Black-Scholes market the minimal SDF Y* is the reciprocal of the
# log-optimal wealth, so deflated prices are martingales. With an extra
# Brownian motion the market is incomplete and any kernel direction kappa
# gives another SDF. A reciprocal Bessel(3) process shows that a positive
# local martingale can still lose mass: it is a strict supermartingale.

# %%
import numpy as np

from sdfkit.ito import (
    ItoModelSpec,
    bessel_counterexamples,
    martingale_test,
    reciprocal_bessel_mean,
    risk_premium_star,
    sdf_compose,
    sdf_star_paths,
    simulate,
    with_kappa,
)

bs = ItoModelSpec(kind="constant_coefficients", d=1, m=1, r=0.02, b=[0.06], sigma=[[0.2]], s0=[1.0], T=1.0)
rp = risk_premium_star(bs)
print("lambda* =", rp.lambda_star, " pi* =", rp.pi_star)

# %%
ens = simulate(bs, n_steps=8, n_paths=20_000, seed=42)
y = sdf_star_paths(ens, rp)
cols = ens.checkpoint_indices()
test = martingale_test((y / ens.beta)[:, cols], 1.0, ens.time_grid[cols])
for t, mean, se, z in zip(test.times, test.means, test.std_errors, test.z_scores):
    print(f"t={t:.2f}  E[Y* S0_t]/S0_0 = {mean:.5f}  SE {se:.1e}  z {z:+.2f}")
print("verdict:", test.verdict)

# %% [markdown]
# Incomplete market: the second Brownian motion is not traded, so kappa must
# lie in the kernel of sigma transposed.

# %%
inc = ItoModelSpec(kind="constant_coefficients", d=1, m=2, r=0.02, b=[0.06], sigma=[[0.2], [0.0]], s0=[1.0], T=1.0)
rp2 = with_kappa(inc, risk_premium_star(inc), [0.0, 0.3])
ens2 = simulate(inc, n_steps=4, n_paths=20_000, seed=1)
yk = sdf_compose(ens2, rp2)
test = martingale_test((yk * ens2.S[..., 0])[:, ens2.checkpoint_indices()], 1.0)
print("E[Y S] at quartiles:", np.round(test.means, 5), "verdict:", test.verdict)

# %% [markdown]
# Bessel(3): with S = 1/R the price falls below its start value even though
# it is a local martingale. The closed form is E[1/R_T] = 2 Phi(1/sqrt T) - 1.

# %%
rep = bessel_counterexamples(T=1.0, n_paths=50_000, seed=5)
print(f"E[1/R_1] simulated {rep.terminal_mean:.5f} (SE {rep.terminal_se:.1e}), exact {reciprocal_bessel_mean(1.0):.5f}")
print(f"price gap {rep.price_gap:.5f} vs exact {rep.oracle_gap:.5f}")
print("discount test verdict:", rep.discount_test.verdict)
