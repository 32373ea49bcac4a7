import numpy as np
import pytest

from sdfkit.checks import check_arbitrage, check_risk_neutral, check_sdf
from sdfkit.errors import Infeasible
from sdfkit.ftap import (
    RiskNeutralMeasure,
    SdfVector,
    find_arbitrage,
    find_risk_neutral,
    find_sdf,
    ftap_verdict,
    risk_neutral_to_sdf,
    sdf_solution_space,
    sdf_to_risk_neutral,
)
from sdfkit.market import DiscreteMarket

from conftest import random_market


@pytest.fixture
def dominated():
    return DiscreteMarket.from_arrays([0.5, 0.5], 1.0, [1.0, 1.0], [1.0], [[2.0, 1.0]])


@pytest.fixture
def no_assets():
    return DiscreteMarket.from_arrays([0.5, 0.5], 1.0, [1.0, 1.0])


def test_binary_has_no_arbitrage(binary):
    assert find_arbitrage(binary) is None


def test_dominated_asset_certificate(dominated):
    cert = find_arbitrage(dominated)
    np.testing.assert_allclose(cert.theta, [1.0], atol=1e-12)
    np.testing.assert_allclose(cert.payoff, [1.0, 0.0], atol=1e-12)
    assert check_arbitrage(dominated, cert.theta) == []


def test_no_assets(no_assets):
    assert find_arbitrage(no_assets) is None
    np.testing.assert_allclose(find_sdf(no_assets).y_T, [1.0, 1.0], atol=1e-12)
    assert sdf_solution_space(no_assets).dimension == 1
    rep = ftap_verdict(no_assets)
    assert (rep.no_arbitrage, rep.sdf_exists, rep.rn_exists) == (True, True, True)


def test_binary_sdf_and_measure(binary):
    np.testing.assert_allclose(find_sdf(binary).y_T, [2 / 3, 4 / 3], atol=1e-12)
    q = sdf_to_risk_neutral(binary, SdfVector(np.array([2 / 3, 4 / 3])))
    np.testing.assert_allclose(q.q, [1 / 3, 2 / 3], atol=1e-15)
    np.testing.assert_allclose(find_risk_neutral(binary).q, [1 / 3, 2 / 3], atol=1e-12)


def test_dominated_has_no_sdf(dominated):
    with pytest.raises(Infeasible):
        find_sdf(dominated)
    with pytest.raises(Infeasible):
        find_risk_neutral(dominated)
    rep = ftap_verdict(dominated)
    assert (rep.no_arbitrage, rep.sdf_exists, rep.rn_exists) == (False, False, False)


def test_solution_space_dimensions(binary, trinomial):
    assert sdf_solution_space(binary).dimension == 0
    space = sdf_solution_space(trinomial)
    assert space.dimension == 1
    # every point of the affine hull solves the pricing equations
    y = space.particular.y_T + 0.1 * space.basis[0]
    assert check_sdf(trinomial, y) == []


def test_trinomial_measure_prices_asset(trinomial):
    q = sdf_to_risk_neutral(trinomial, find_sdf(trinomial))
    assert check_risk_neutral(trinomial, q.q) == []
    assert float(q.q @ trinomial.asset_sT[0]) == pytest.approx(1.0, abs=1e-9)


def test_identity_transforms():
    m = DiscreteMarket.from_arrays([0.2, 0.3, 0.5], 1.0, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(sdf_to_risk_neutral(m, SdfVector(np.ones(3))).q, m.prob)
    np.testing.assert_allclose(risk_neutral_to_sdf(m, RiskNeutralMeasure(m.prob)).y_T, 1.0)


def test_conversions_round_trip_on_random_markets():
    rng = np.random.default_rng(4)
    for _ in range(200):
        m = random_market(rng, int(rng.integers(1, 7)), int(rng.integers(0, 5)), "free")
        y = find_sdf(m)
        back = risk_neutral_to_sdf(m, sdf_to_risk_neutral(m, y)).y_T
        np.testing.assert_allclose(back, y.y_T, rtol=1e-12, atol=1e-12)


def test_witnesses_pass_independent_checker():
    rng = np.random.default_rng(8)
    for _ in range(300):
        m = random_market(rng, int(rng.integers(1, 7)), int(rng.integers(0, 5)))
        rep = ftap_verdict(m)
        if rep.no_arbitrage:
            assert check_sdf(m, rep.sdf.y_T) == []
            assert check_risk_neutral(m, rep.risk_neutral.q) == []
        else:
            assert check_arbitrage(m, rep.certificate.theta) == []


def test_checkers_catch_bad_witnesses(binary):
    assert check_sdf(binary, [1.0, 1.0])  # misprices the stock
    assert check_sdf(binary, [-1.0, 3.0])  # not positive
    assert check_risk_neutral(binary, [0.5, 0.6])
    assert check_arbitrage(binary, [1.0])


def test_verdict_is_deterministic(trinomial):
    a, b = ftap_verdict(trinomial), ftap_verdict(trinomial)
    assert a.sdf.y_T.tobytes() == b.sdf.y_T.tobytes()
