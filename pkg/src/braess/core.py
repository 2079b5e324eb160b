"""Canonical four-node configuration, derived scalars and extended-real helpers.

Links are numbered 1=(a,b), 2=(b,d), 3=(b,c), 4=(a,c), 5=(c,d).  Index strings
such as ``"135"`` select a sum over links, so ``cfg.bsum("45")`` is
beta_4 + beta_5 and ``cfg.bsum("455")`` is beta_4 + 2 beta_5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

from braess.errors import InvalidConfig, ZeroOverZero

Mode = Literal["strict", "relaxed"]

INF = math.inf


def ext_div(num: float, den: float) -> float:
    """Quotient over the extended reals: x/0 is +-inf for x != 0, 0/0 raises."""
    if den != 0:
        return num / den
    if num > 0:
        return INF
    if num < 0:
        return -INF
    raise ZeroOverZero(f"0/0 while dividing {num!r} by {den!r}")


def sub_sum(values: Sequence[Optional[float]], idx: str) -> float:
    """Sum ``values`` over the 1-based link indices spelled out in ``idx``."""
    total = 0.0
    for ch in idx:
        v = values[int(ch) - 1]
        if v is None:
            raise InvalidConfig(f"link {ch} is absent from this configuration")
        total += v
    return total


def _as_params(values: Iterable, name: str) -> tuple[Optional[float], ...]:
    vals = list(values)
    if len(vals) == 4:
        # (1, 2, 4, 5) ordering: network N without the bridge
        vals = [vals[0], vals[1], None, vals[2], vals[3]]
    if len(vals) != 5:
        raise InvalidConfig(f"{name} needs 5 entries (or 4 without the bridge), got {len(vals)}")
    out: list[Optional[float]] = []
    for i, v in enumerate(vals, start=1):
        if v is None:
            if i != 3:
                raise InvalidConfig(f"{name}[{i}] is missing; only link 3 may be absent")
            out.append(None)
            continue
        try:
            fv = float(v)
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"{name}[{i}] is not a number: {v!r}") from exc
        if not math.isfinite(fv) or fv < 0:
            raise InvalidConfig(f"{name}[{i}] must be finite and >= 0, got {v!r}")
        out.append(fv)
    return tuple(out)


@dataclass(frozen=True)
class FourNodeConfig:
    """Free-flow times and delay parameters of the five canonical links.

    ``alpha[2]``/``beta[2]`` (link 3, the bridge b->c) are ``None`` when only
    the network without the bridge is being modelled.  In strict mode every
    present delay parameter must be positive; relaxed mode admits zeros as long
    as beta_1 + beta_2 + beta_4 + beta_5 > 0.
    """

    alpha: tuple[Optional[float], ...]
    beta: tuple[Optional[float], ...]
    relaxed: bool = False

    def __post_init__(self) -> None:
        alpha = _as_params(self.alpha, "alpha")
        beta = _as_params(self.beta, "beta")
        if (alpha[2] is None) != (beta[2] is None):
            raise InvalidConfig("alpha[3] and beta[3] must be both present or both absent")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if self.relaxed:
            if sub_sum(beta, "1245") <= 0:
                raise InvalidConfig("beta_1 + beta_2 + beta_4 + beta_5 must be positive")
        else:
            for i, b in enumerate(beta, start=1):
                if b is not None and b <= 0:
                    raise InvalidConfig(
                        f"beta[{i}] = {b} must be > 0 in strict mode (use relaxed mode for zeros)"
                    )

    @classmethod
    def from_lists(cls, alpha, beta, *, relaxed: bool = False) -> "FourNodeConfig":
        return cls(tuple(alpha), tuple(beta), relaxed=relaxed)

    @property
    def has_bc(self) -> bool:
        return self.beta[2] is not None

    def asum(self, idx: str) -> float:
        return sub_sum(self.alpha, idx)

    def bsum(self, idx: str) -> float:
        return sub_sum(self.beta, idx)

    def without_bc(self) -> "FourNodeConfig":
        a, b = list(self.alpha), list(self.beta)
        a[2] = b[2] = None
        return FourNodeConfig(tuple(a), tuple(b), relaxed=self.relaxed)

    def with_mode(self, mode: Mode) -> "FourNodeConfig":
        return FourNodeConfig(self.alpha, self.beta, relaxed=(mode == "relaxed"))

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "beta": list(self.beta)}


@dataclass(frozen=True)
class DerivedQuantities:
    """Scalar combinations of the link parameters used by every bound.

    Fields that involve the bridge link are ``None`` for a bridgeless config.
    ``mu1``/``mu2`` may be +-inf in relaxed mode.
    """

    al: float
    al_bar: Optional[float]
    al_hat: Optional[float]
    beta_total: float
    b1: float
    b2: Optional[float]
    b3: Optional[float]
    b4: Optional[float]
    mu1: Optional[float]
    mu2: Optional[float]

    def to_dict(self) -> dict:
        return {
            "alpha": self.al,
            "alpha_bar": self.al_bar,
            "alpha_hat": self.al_hat,
            "beta": self.beta_total,
            "B1": self.b1,
            "B2": self.b2,
            "B3": self.b3,
            "B4": self.b4,
            "mu1": self.mu1,
            "mu2": self.mu2,
        }


def _to_ints(values: Sequence[float]) -> tuple[list[int], int]:
    """Exact integers n_i and a power of two D with values[i] == n_i / D."""
    ratios = [float(v).as_integer_ratio() for v in values]
    den = max(d for _, d in ratios)
    return [n * (den // d) for n, d in ratios], den


def _exact_div(num: int, den: int) -> float:
    if den != 0:
        return num / den  # int / int is correctly rounded
    return ext_div(float(num), 0.0)


def derive_quantities(cfg: FourNodeConfig, mode: Optional[Mode] = None) -> DerivedQuantities:
    """Derived scalars; the Braess numbers and mu values are rounded once from exact values.

    Those quantities are differences of products that cancel heavily when
    B1 is near zero, so plain float evaluation can lose most of their digits.
    They are evaluated in scaled integer arithmetic instead.
    """
    if mode is not None and (mode == "relaxed") != cfg.relaxed:
        cfg = cfg.with_mode(mode)
    beta_total = cfg.bsum("1245")
    if beta_total <= 0:
        raise InvalidConfig("beta_1 + beta_2 + beta_4 + beta_5 must be positive")
    present = [v for v in cfg.beta if v is not None]
    bi, db = _to_ints(present)
    if not cfg.has_bc:
        b1x = bi[0] * bi[3] - bi[1] * bi[2]
        al = cfg.asum("45") - cfg.asum("12")
        return DerivedQuantities(al, None, None, beta_total, b1x / db**2, None, None, None, None, None)

    a1, a2, a3, a4, a5 = cfg.alpha
    # paired differences first: they cancel exactly in the symmetric patterns
    al_bar = (a4 - a1) - a3
    al_hat = (a2 - a5) - a3
    # same value as alpha_45 - alpha_12, but keeps al == al_bar - al_hat bitwise
    al = al_bar - al_hat

    b = [0] + bi  # 1-based
    s = lambda idx: sum(b[int(c)] for c in idx)  # noqa: E731
    bt = s("1245")
    b1x = b[1] * b[5] - b[2] * b[4]
    # degree 2 in beta
    b2 = s("135") * bt - s("12") * s("45")
    # degree 3
    b3 = s("45") ** 2 * s("134") - b[4] ** 2 * bt
    b4 = s("12") ** 2 * s("235") - b[2] ** 2 * bt

    ai, da = _to_ints(cfg.alpha)
    a = [0] + ai
    alx = a[4] + a[5] - a[1] - a[2]
    al_bar_x = a[4] - a[1] - a[3]
    al_hat_x = a[2] - a[3] - a[5]
    # numerators carry a factor 1/(da*db), denominators 1/db**2
    mu1 = _exact_div((al_hat_x * s("14") - alx * b[3]) * db, (b[3] * s("45") + b[5] * s("14")) * da)
    mu2 = _exact_div((al_bar_x * s("25") + alx * b[3]) * db, (b[1] * s("25") + b[3] * s("12")) * da)
    return DerivedQuantities(
        al, al_bar, al_hat, beta_total,
        b1x / db**2, b2 / db**2, b3 / db**3, b4 / db**3, mu1, mu2,
    )
