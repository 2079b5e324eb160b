from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from braess.core import FourNodeConfig, derive_quantities, ext_div, sub_sum
from braess.errors import InvalidConfig, ZeroOverZero

from conftest import random_config


def exact_derived(alpha, beta):
    """Rational recomputation straight from the definitions."""
    a = [Fraction(x) for x in alpha]
    b = [Fraction(x) for x in beta]
    s = lambda v, idx: sum(v[int(c) - 1] for c in idx)  # noqa: E731
    al = s(a, "45") - s(a, "12")
    al_bar = a[3] - s(a, "13")
    al_hat = a[1] - s(a, "35")
    beta = s(b, "1245")
    return {
        "al": al,
        "al_bar": al_bar,
        "al_hat": al_hat,
        "beta": beta,
        "b1": b[0] * b[4] - b[1] * b[3],
        "b2": s(b, "135") * beta - s(b, "12") * s(b, "45"),
        "b3": s(b, "45") ** 2 * s(b, "134") - b[3] ** 2 * beta,
        "b4": s(b, "12") ** 2 * s(b, "235") - b[1] ** 2 * beta,
        "mu1": (al_hat * s(b, "14") - al * b[2]) / (b[2] * s(b, "45") + b[4] * s(b, "14")),
        "mu2": (al_bar * s(b, "25") + al * b[2]) / (b[0] * s(b, "25") + b[2] * s(b, "12")),
    }


# ---------------------------------------------------------------- examples


def test_section5_values(sec5):
    d = derive_quantities(sec5)
    assert (d.al, d.al_bar, d.al_hat, d.beta_total) == (4, 32, 28, 89)
    assert (d.b1, d.b2, d.b3, d.b4) == (314, 2954, 24193, 116440)
    assert d.mu1 == pytest.approx(1052 / 803, rel=1e-12)
    assert d.mu2 == pytest.approx(1644 / 1716, rel=1e-12)


def test_section5_matches_rational_oracle(sec5):
    d = derive_quantities(sec5)
    ex = exact_derived(sec5.alpha, sec5.beta)
    assert d.mu1 == pytest.approx(float(ex["mu1"]), rel=1e-15)
    assert d.mu2 == pytest.approx(float(ex["mu2"]), rel=1e-15)


def test_arnott_small_values(arnott_small):
    d = derive_quantities(arnott_small)
    assert d.al == 0 and d.al_bar == 7.5 and d.al_hat == 7.5
    assert d.beta_total == pytest.approx(0.02)
    assert d.b1 == pytest.approx(1e-4)
    assert d.mu1 == pytest.approx(750) and d.mu2 == pytest.approx(750)


def test_all_ones():
    d = derive_quantities(FourNodeConfig((1,) * 5, (1,) * 5))
    assert (d.al, d.al_bar, d.al_hat, d.beta_total, d.b1) == (0, -1, -1, 4, 0)


def test_bridgeless_config_has_no_bridge_quantities():
    cfg = FourNodeConfig((2, 36, 40, 2), (30, 32, 8, 19))
    assert not cfg.has_bc
    d = derive_quantities(cfg)
    assert d.al == 4 and d.beta_total == 89
    assert d.al_bar is None and d.mu1 is None and d.b2 is None


# -------------------------------------------------------------- ext reals


@pytest.mark.parametrize(
    "num,den,expected",
    [(3.0, 2.0, 1.5), (1.0, 0.0, math.inf), (-7.5, 0.0, -math.inf), (0.0, 4.0, 0.0)],
)
def test_ext_div(num, den, expected):
    assert ext_div(num, den) == expected


def test_ext_div_zero_over_zero():
    with pytest.raises(ZeroOverZero):
        ext_div(0.0, 0.0)


def test_infinite_ordering():
    assert max(-math.inf, 3.0) == 3.0
    assert min(math.inf, 3.0) == 3.0


def test_relaxed_zero_over_zero_surfaces():
    # beta_3 = beta_5 = 0 kills the mu1 denominator; alpha_hat = 0 kills its numerator
    cfg = FourNodeConfig((1, 2, 1, 2, 1), (1, 1, 0, 1, 0), relaxed=True)
    with pytest.raises(ZeroOverZero):
        derive_quantities(cfg)


def test_sub_sum_repeated_index():
    assert sub_sum([1, 2, 3, 4, 5], "455") == 14
    assert sub_sum([1, 2, 3, 4, 5], "335") == 11


# ------------------------------------------------------------- validation


@pytest.mark.parametrize(
    "alpha,beta",
    [
        ((1, 1, 1, 1, -1), (1, 1, 1, 1, 1)),
        ((1, 1, 1, 1, 1), (1, 1, 0, 1, 1)),
        ((1, 1, 1, 1), (1, 1, 1, 1, 1)),
        ((1, 1, 1, float("nan"), 1), (1, 1, 1, 1, 1)),
        ((1, 1, 1), (1, 1, 1)),
        ((None, 1, 1, 1, 1), (1, 1, 1, 1, 1)),
    ],
)
def test_invalid_configs(alpha, beta):
    with pytest.raises(InvalidConfig):
        FourNodeConfig(alpha, beta)


def test_relaxed_needs_positive_beta_total():
    with pytest.raises(InvalidConfig):
        FourNodeConfig((1,) * 5, (0, 0, 1, 0, 0), relaxed=True)
    FourNodeConfig((1,) * 5, (0, 0, 1, 0, 1e-3), relaxed=True)


def test_mode_override():
    cfg = FourNodeConfig((0, 15, 7.5, 15, 0), (0.01, 0, 0, 0, 0.01), relaxed=True)
    with pytest.raises(InvalidConfig):
        derive_quantities(cfg, mode="strict")


# ------------------------------------------------------------- properties


def identity_forms(beta):
    """Right-hand sides of the three Braess-number identities, in exact rationals."""
    b = [Fraction(x) for x in beta]
    s = lambda idx: sum(b[int(c) - 1] for c in idx)  # noqa: E731
    b1 = b[0] * b[4] - b[1] * b[3]
    return (
        s("12") * s("13") + s("35") * s("45") + b1,
        b[4] ** 2 * s("134") + b[3] * (b[2] * s("455") + b[4] * s("14") + b1),
        b[0] ** 2 * s("235") + b[1] * (b[0] * s("335") + b[1] * s("13") + b1),
    )


def test_braess_number_identities_10k():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10_000):
        cfg = random_config(rng)
        d = derive_quantities(cfg)
        for got, rhs in zip((d.b2, d.b3, d.b4), identity_forms(cfg.beta)):
            worst = max(worst, abs(got - float(rhs)) / abs(float(rhs)))
    assert worst <= 1e-12


def test_against_rational_oracle_random():
    rng = np.random.default_rng(7)
    for _ in range(500):
        cfg = random_config(rng)
        d = derive_quantities(cfg)
        ex = exact_derived(cfg.alpha, cfg.beta)
        for key in ("b1", "b2", "b3", "b4", "mu1", "mu2"):
            # rounded once from the exact value
            assert getattr(d, key) == float(ex[key])


positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
nonneg = st.floats(min_value=0.0, max_value=1e3, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(st.lists(nonneg, min_size=5, max_size=5), st.lists(positive, min_size=5, max_size=5))
def test_alpha_identity_exact(alpha, beta):
    d = derive_quantities(FourNodeConfig(tuple(alpha), tuple(beta)))
    assert d.al == d.al_bar - d.al_hat


@settings(max_examples=300, deadline=None)
@given(st.lists(nonneg, min_size=5, max_size=5), st.lists(positive, min_size=5, max_size=5))
def test_sign_test(alpha, beta):
    d = derive_quantities(FourNodeConfig(tuple(alpha), tuple(beta)))
    if d.b1 >= 0:
        assert d.b2 > 0 and d.b3 > 0 and d.b4 > 0
