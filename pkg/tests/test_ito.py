import math

import numpy as np
import pytest
from scipy import integrate

from sdfkit.errors import (
    DimensionMismatch,
    InsufficientPaths,
    InvalidPathCount,
    InvalidStepCount,
    KappaNotInKernel,
    SchemaError,
    SingularCovariation,
)
from sdfkit.ito import (
    ItoModelSpec,
    bessel_counterexamples,
    density_paths,
    load_model,
    log_wealth_drift,
    martingale_test,
    nontraded_drift,
    reciprocal_bessel_mean,
    risk_premium_star,
    sdf_compose,
    sdf_star_paths,
    simulate,
    validate_model,
    wealth_paths,
)
from sdfkit.ito.rng import BLOCK, standard_normals

from conftest import DATA

BS = ItoModelSpec("constant_coefficients", 1.0, 1, 1, 0.02, [0.06], [[0.2]], [1.0])
TWO = ItoModelSpec("constant_coefficients", 1.0, 1, 2, 0.02, [0.06], [[0.2], [0.0]], [1.0])


def random_model(rng, d, m):
    sigma = rng.normal(0.0, 0.3, (m, d))
    return ItoModelSpec("constant_coefficients", 1.0, d, m, rng.uniform(0, 0.05),
                        rng.normal(0.05, 0.05, d), sigma, rng.uniform(0.5, 2.0, d))


# -- models and risk premia ---------------------------------------------------

def test_model_validation():
    with pytest.raises(SingularCovariation):
        ItoModelSpec("constant_coefficients", 1.0, 1, 1, 0.02, [0.06], [[0.0]], [1.0])
    with pytest.raises(SingularCovariation):
        ItoModelSpec("constant_coefficients", 1.0, 2, 1, 0.02, [0.06, 0.05], [[0.2, 0.1]], [1.0, 1.0])
    with pytest.raises(SingularCovariation):
        ItoModelSpec("constant_coefficients", 1.0, 2, 2, 0.0, [0.1, 0.1], [[0.2, 0.4], [0.1, 0.2]], [1, 1])
    with pytest.raises(SchemaError):
        ItoModelSpec("constant_coefficients", 1.0, 1, 1, -0.01, [0.06], [[0.2]], [1.0])
    with pytest.raises(SchemaError):
        ItoModelSpec("constant_coefficients", 0.0, 1, 1, 0.01, [0.06], [[0.2]], [1.0])
    with pytest.raises(DimensionMismatch):
        ItoModelSpec("constant_coefficients", 1.0, 1, 2, 0.01, [0.06], [[0.2, 0.1, 0.3]], [1.0])
    with pytest.raises(SchemaError):
        ItoModelSpec("geometric", 1.0)


def test_model_files():
    assert load_model(DATA / "bs.json").sigma.shape == (1, 1)
    two = load_model(DATA / "incomplete.json")
    np.testing.assert_array_equal(two.sigma, [[0.2], [0.0]])
    assert load_model(DATA / "bessel.json").kind == "bessel3"
    with pytest.raises(SchemaError):
        validate_model({"kind": "bessel3", "T": 1.0, "sigma": [1.0]})
    with pytest.raises(SchemaError):
        validate_model({"kind": "constant_coefficients", "T": 1.0, "d": 1})


def test_risk_premium_examples():
    rp = risk_premium_star(BS)
    np.testing.assert_allclose(rp.lambda_star, [0.2], atol=1e-15)
    assert rp.kernel_basis.shape == (0, 1)
    rp = risk_premium_star(TWO)
    np.testing.assert_allclose(rp.lambda_star, [0.2, 0.0], atol=1e-15)
    np.testing.assert_allclose(np.abs(rp.kernel_basis), [[0.0, 1.0]], atol=1e-15)
    flat = ItoModelSpec("constant_coefficients", 1.0, 1, 1, 0.05, [0.05], [[0.3]], [1.0])
    np.testing.assert_array_equal(risk_premium_star(flat).lambda_star, [0.0])


def test_risk_premium_properties_random():
    rng = np.random.default_rng(40)
    for _ in range(300):
        d = int(rng.integers(1, 5))
        m = int(rng.integers(d, 7))
        model = random_model(rng, d, m)
        rp = risk_premium_star(model)
        ex = model.b - model.r
        assert np.max(np.abs(model.sigma.T @ rp.lambda_star - ex)) <= 1e-10
        assert rp.norm2_star == pytest.approx(float(ex @ np.linalg.solve(model.c, ex)), rel=1e-9, abs=1e-12)
        assert rp.kernel_basis.shape == (m - d, m)
        np.testing.assert_allclose(rp.kernel_basis @ rp.kernel_basis.T, np.eye(m - d), atol=1e-12)
        if m > d:
            kappa = rng.normal(size=m - d) @ rp.kernel_basis
            rpk = risk_premium_star(model, kappa)
            lam = rpk.lambda_star
            assert abs(float(lam @ kappa)) <= 1e-10
            total = rpk.total
            assert abs(float(total @ total - lam @ lam - kappa @ kappa)) <= 1e-10


def test_kappa_must_lie_in_kernel():
    with pytest.raises(KappaNotInKernel):
        risk_premium_star(TWO, [0.3, 0.0])
    with pytest.raises(DimensionMismatch):
        risk_premium_star(TWO, [0.3])


def test_nontraded_drift_examples():
    rp = risk_premium_star(TWO, [0.0, 0.3])
    out = nontraded_drift(TWO, rp, 0.1, [0.2, 0.0])
    assert out.kappa_invariant and out.drift == pytest.approx(0.1 - 0.04, abs=1e-15)
    out = nontraded_drift(TWO, rp, 0.1, [0.0, 1.0])
    assert not out.kappa_invariant and out.drift == pytest.approx(0.1 - 0.3, abs=1e-15)
    out = nontraded_drift(TWO, rp, 0.1, [0.0, 0.0])
    assert out.kappa_invariant and out.drift == 0.1


def test_log_optimal_maximizes_drift():
    rng = np.random.default_rng(41)
    for _ in range(200):
        d = int(rng.integers(1, 4))
        model = random_model(rng, d, int(rng.integers(d, 5)))
        pi_star = risk_premium_star(model).pi_star
        pi = rng.normal(0, 2, d)
        gap = pi - pi_star
        lhs = log_wealth_drift(model, pi)
        rhs = log_wealth_drift(model, pi_star) - 0.5 * gap @ model.c @ gap
        assert lhs == pytest.approx(rhs, abs=1e-12)
    # one-asset example: r + |lambda*|^2 / 2
    assert log_wealth_drift(BS, risk_premium_star(BS).pi_star) == pytest.approx(0.04, abs=1e-15)


# -- random numbers and paths -------------------------------------------------

def test_normals_do_not_depend_on_partitioning():
    a = standard_normals(5, 3 * BLOCK + 17, 3, 2)
    b = standard_normals(5, 3 * BLOCK + 17, 3, 2, workers=3)
    assert a.tobytes() == b.tobytes()
    prefix = standard_normals(5, BLOCK + 3, 3, 2)
    assert prefix.tobytes() == a[:BLOCK + 3].tobytes()
    assert not np.array_equal(standard_normals(6, 10, 3, 2), a[:10])


def test_normals_look_standard():
    z = standard_normals(0, 200_000, 1, 1).ravel()
    assert abs(z.mean()) < 4 / math.sqrt(z.size)
    assert abs(z.var() - 1.0) < 4 * math.sqrt(2 / z.size)
    assert np.all(np.isfinite(z))


def test_simulate_argument_checks():
    with pytest.raises(InvalidStepCount):
        simulate(BS, 0, 10, 1)
    with pytest.raises(InvalidPathCount):
        simulate(BS, 4, 0, 1)
    with pytest.raises(InvalidPathCount):
        simulate(BS, 4, 2.5, 1)


def test_simulate_determinism():
    a, b, c = simulate(BS, 8, 1, 1), simulate(BS, 8, 1, 1), simulate(BS, 8, 1, 2)
    assert a.S.tobytes() == b.S.tobytes()
    assert not np.array_equal(a.S, c.S)


def test_ensemble_invariants():
    ens = simulate(TWO, 16, 2000, 3)
    assert ens.time_grid[0] == 0.0 and ens.time_grid[-1] == 1.0
    assert np.all(np.diff(ens.time_grid) > 0)
    assert np.all(ens.S > 0)
    np.testing.assert_allclose(ens.beta, np.exp(-0.02 * ens.time_grid), rtol=1e-12, atol=0)
    np.testing.assert_array_equal(ens.checkpoint_indices(), [4, 8, 12, 16])
    with pytest.raises(ValueError):
        ens.S[0, 0, 0] = 1.0


def test_wealth_paths():
    ens = simulate(BS, 12, 500, 9)
    X0 = wealth_paths(ens, [0.0])
    np.testing.assert_allclose(X0, np.broadcast_to(np.exp(0.02 * ens.time_grid), X0.shape), rtol=1e-14)
    assert np.all(wealth_paths(ens, [3.0]) > 0)
    assert wealth_paths(ens, [0.7]).tobytes() == wealth_paths(ens, [0.7]).tobytes()
    with pytest.raises(DimensionMismatch):
        wealth_paths(ens, [0.5, 0.5])
    # log-optimal drift r + |lambda*|^2/2 shows up in the mean log-wealth
    rp = risk_premium_star(BS)
    ens = simulate(BS, 4, 100_000, 10)
    logx = np.log(wealth_paths(ens, rp.pi_star)[:, -1])
    assert abs(logx.mean() - 0.04) < 4 * logx.std() / math.sqrt(logx.size)


def test_sdf_star_paths():
    ens = simulate(TWO, 20, 300, 11)
    rp = risk_premium_star(TWO)
    Y = sdf_star_paths(ens, rp)
    assert np.max(np.abs(Y * wealth_paths(ens, rp.pi_star) - 1.0)) <= 1e-10
    flat = ItoModelSpec("constant_coefficients", 1.0, 1, 1, 0.03, [0.03], [[0.25]], [1.0])
    ens = simulate(flat, 10, 50, 12)
    np.testing.assert_allclose(sdf_star_paths(ens, risk_premium_star(flat)),
                               np.broadcast_to(ens.beta, (50, 11)), rtol=1e-14)


def test_sdf_compose():
    ens = simulate(TWO, 8, 400, 13)
    rp = risk_premium_star(TWO)
    with pytest.raises(KappaNotInKernel):
        sdf_compose(ens, rp)
    zero = risk_premium_star(TWO, [0.0, 0.0])
    np.testing.assert_array_equal(density_paths(ens, zero.kappa), 1.0)
    np.testing.assert_allclose(sdf_compose(ens, zero), sdf_star_paths(ens, rp), rtol=1e-15)


@pytest.mark.statistical
def test_sdf_prices_every_asset_random_models():
    rng = np.random.default_rng(42)
    for k in range(5):
        model = random_model(rng, 2, 3)
        rp = risk_premium_star(model, 0.3 * risk_premium_star(model).kernel_basis[0])
        ens = simulate(model, 4, 20_000, 100 + k)
        Y = sdf_compose(ens, rp)
        idx = ens.checkpoint_indices()
        for i in range(model.d):
            rep = martingale_test(Y[:, idx] * ens.S[:, idx, i], model.s0[i])
            assert rep.verdict == "consistent_with_martingale", (k, i, rep.z_scores)


# -- martingale test ----------------------------------------------------------

def test_martingale_test_rules():
    const = np.full((1000, 4), 2.5)
    rep = martingale_test(const, 2.5)
    assert rep.verdict == "consistent_with_martingale"
    np.testing.assert_array_equal(rep.z_scores, 0.0)
    assert martingale_test(const, 2.0).verdict == "inconclusive"  # z = +inf
    assert martingale_test(const, 3.0).verdict == "supermartingale_strict"  # z = -inf
    with pytest.raises(InsufficientPaths):
        martingale_test(np.ones((999, 1)), 1.0)
    rng = np.random.default_rng(0)
    noisy = 1.0 + rng.normal(0, 0.1, (4000, 3))
    assert martingale_test(noisy, 1.0).verdict == "consistent_with_martingale"
    assert martingale_test(noisy - 0.05, 1.0).verdict == "supermartingale_strict"
    assert martingale_test(noisy + 0.05, 1.0).verdict == "inconclusive"


def test_round_off_spread_counts_as_exact():
    vals = 1.0 + np.tile([0.0, 2.2e-16], 1000)[:, None]
    assert martingale_test(vals, 1.0).z_scores[0] == 0.0


# -- Bessel counterexamples ---------------------------------------------------

def test_reciprocal_mean_against_quadrature():
    for T in (0.25, 1.0, 4.0):
        def dens(rho):
            return rho / math.sqrt(2 * math.pi * T) * (math.exp(-(rho - 1) ** 2 / (2 * T))
                                                       - math.exp(-(rho + 1) ** 2 / (2 * T)))
        val, _ = integrate.quad(lambda r: dens(r) / r, 0, np.inf, epsabs=1e-13)
        assert reciprocal_bessel_mean(T) == pytest.approx(val, abs=1e-10)


def test_bessel_paths():
    ens = simulate(ItoModelSpec("bessel3", 1.0), 4, 2000, 1)
    inv = simulate(ItoModelSpec("inverse_bessel3", 1.0), 4, 2000, 1)
    assert np.all(ens.S > 0)
    np.testing.assert_array_equal(ens.S[:, 0, 0], 1.0)
    np.testing.assert_allclose(ens.S * inv.S, 1.0, rtol=1e-15)


@pytest.mark.statistical
def test_bessel_small_horizon_has_no_gap():
    rep = bessel_counterexamples(0.01, 100_000, 7)
    assert rep.oracle_gap == pytest.approx(0.0, abs=1e-15)
    assert abs(rep.price_gap) <= 3 * rep.terminal_se
    assert rep.max_pathwise_error <= 1e-12


def test_bessel_report_structure():
    rep = bessel_counterexamples(1.0, 1000, 3, n_steps=8)
    d = rep.to_dict()
    assert set(d) == {"T", "n_paths", "seed", "oracle_mean", "example1", "example2"}
    assert len(d["example1"]["discount_test"]["times"]) == 4
