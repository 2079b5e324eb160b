from __future__ import annotations

import numpy as np
import pytest

from braess.core import FourNodeConfig

SECTION5 = ((2, 36, 6, 40, 2), (30, 32, 3, 8, 19))
ARNOTT_SMALL = ((0, 15, 7.5, 15, 0), (0.01, 0, 0, 0, 0.01))
ASYMMETRIC = ((1, 2, 5, 1, 2), (3, 4, 9, 3, 4))


@pytest.fixture
def sec5() -> FourNodeConfig:
    return FourNodeConfig(*SECTION5)


@pytest.fixture
def arnott_small() -> FourNodeConfig:
    return FourNodeConfig(*ARNOTT_SMALL, relaxed=True)


@pytest.fixture
def asym() -> FourNodeConfig:
    return FourNodeConfig(*ASYMMETRIC)


def random_config(rng: np.random.Generator, alpha_max: float = 50.0) -> FourNodeConfig:
    """Strict config: alpha uniform, beta log-uniform over [0.1, 30]."""
    alpha = rng.uniform(0.0, alpha_max, 5)
    beta = np.exp(rng.uniform(np.log(0.1), np.log(30.0), 5))
    return FourNodeConfig(tuple(alpha), tuple(beta))


def random_m_config(rng: np.random.Generator) -> FourNodeConfig:
    a2 = rng.uniform(0, 50)
    a3 = rng.uniform(0, 50)
    b1, b2 = np.exp(rng.uniform(np.log(0.1), np.log(30.0), 2))
    return FourNodeConfig((0.0, a2, a3, a2, 0.0), (b1, b2, b2, b2, b1))


def random_s_config(rng: np.random.Generator) -> FourNodeConfig:
    a1, a2, a3 = rng.uniform(0, 50, 3)
    b1, b2, b3 = np.exp(rng.uniform(np.log(0.1), np.log(30.0), 3))
    return FourNodeConfig((a1, a2, a3, a2, a1), (b1, b2, b3, b2, b1))


def random_a_config(rng: np.random.Generator) -> FourNodeConfig:
    a1, a2, a3 = rng.uniform(0, 50, 3)
    b1, b2, b3 = np.exp(rng.uniform(np.log(0.1), np.log(30.0), 3))
    return FourNodeConfig((a1, a2, a3, a1, a2), (b1, b2, b3, b1, b2))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 11):
        if n in mod.RESULTS:
            ok, detail = mod.RESULTS[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
