from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from sdfkit.market import DiscreteMarket

DATA = Path(__file__).parent / "data"


def binary_market() -> DiscreteMarket:
    return DiscreteMarket.from_arrays([0.5, 0.5], 1.0, [1.0, 1.0], [1.0], [[2.0, 0.5]])


def trinomial_market() -> DiscreteMarket:
    return DiscreteMarket.from_arrays([1 / 3, 1 / 3, 1 / 3], 1.0, [1.0, 1.0, 1.0], [1.0], [[2.0, 1.0, 0.5]])


def random_market(rng: np.random.Generator, n: int, d: int, mode: str = "mixed") -> DiscreteMarket:
    """Random finite market.

    ``free`` prices every asset with a random positive SDF (no arbitrage by
    construction); ``raw`` draws prices independently (often arbitrage);
    ``edge`` prices with an SDF that vanishes on one state (arbitrage on the
    boundary of the cone); ``mixed`` picks one of the three.
    """
    if mode == "mixed":
        mode = rng.choice(["free", "free", "raw", "edge"])
    prob = rng.dirichlet(np.ones(n))
    prob = prob / prob.sum()
    base_sT = np.exp(rng.normal(0.03, 0.02, n)) if rng.random() < 0.5 else np.full(n, 1.0 + rng.uniform(0, 0.1))
    sT = np.exp(rng.normal(0.0, 0.4, (d, n)))
    if d and rng.random() < 0.2:
        sT[-1] = sT[0] * rng.uniform(0.5, 2.0)  # redundant asset
    if mode == "raw":
        s0 = rng.uniform(0.6, 1.4, d) * sT.mean(axis=1)
        b0 = 1.0
    else:
        y = rng.uniform(0.2, 2.0, n)
        if mode == "edge":
            y[rng.integers(n)] = 0.0
        b0 = float(prob @ (y * base_sT))
        s0 = (sT * prob) @ y
        if mode == "edge" and (b0 <= 0 or np.any(s0 <= 0)):
            return random_market(rng, n, d, "free")
    return DiscreteMarket.from_arrays(prob, b0, base_sT, s0, sT)


@pytest.fixture
def binary():
    return binary_market()


@pytest.fixture
def trinomial():
    return trinomial_market()


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE: dict[int, dict] = {}


def record(number: int, title: str, detail: str) -> None:
    """Attach a measured summary to an acceptance criterion."""
    _ACCEPTANCE.setdefault(number, {}).update(title=title, detail=detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    entry = _ACCEPTANCE.setdefault(mark.args[0], {"title": mark.args[1], "detail": ""})
    entry.setdefault("title", mark.args[1])
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        entry["passed"] = rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[num]
        status = {True: "PASS", False: "FAIL"}.get(e.get("passed"), "NOT RUN")
        tr.write_line(f"[{status}] {num:2d}. {e.get('title', '')}: {e.get('detail', '')}")
