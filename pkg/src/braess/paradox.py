"""Exact Q-ranges where adding the bridge hurts (paradox) or changes nothing (pseudo-paradox)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from braess.core import INF, DerivedQuantities, FourNodeConfig, derive_quantities, ext_div
from braess.equilibrium import EquilibriumSolution, equilibrium_N, equilibrium_Nplus
from braess.errors import ConsistencyError, InvalidConfig, NotSymmetric

MERGE_RTOL = 1e-12
CLASSIFY_RTOL = 1e-9

# theorem number -> Mega-Theorem case, and the bridged-network case it covers
MEGA_CASE = {1: "a", 2: "b", 3: "c", 4: "d"}
THEOREM_NPLUS_CASE = {1: "g", 2: "a", 3: "d", 4: "e"}
PARADOX_NPLUS_CASES = frozenset({"a", "d", "e", "g"})


def _close(x: float, y: float, rtol: float = MERGE_RTOL) -> bool:
    if math.isinf(x) or math.isinf(y):
        return x == y
    return abs(x - y) <= rtol * (1.0 + max(abs(x), abs(y)))


@dataclass(frozen=True)
class Interval:
    """Interval of Q with extended-real endpoints. Use :func:`interval` to build one."""

    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    @property
    def is_empty(self) -> bool:
        return self is EMPTY or self.lo > self.hi

    def __contains__(self, q: float) -> bool:
        if self.is_empty:
            return False
        above = q > self.lo if self.lo_open else q >= self.lo
        below = q < self.hi if self.hi_open else q <= self.hi
        return above and below

    @property
    def width(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    def __str__(self) -> str:
        return self.format(digits=None)

    def format(self, digits: Optional[int] = 2) -> str:
        if self.is_empty:
            return "empty"

        def num(x: float) -> str:
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return f"{x:.{digits}f}" if digits is not None else repr(x)

        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open or math.isinf(self.hi) else "]"
        return f"{left}{num(self.lo)}, {num(self.hi)}{right}"

    def to_dict(self) -> Optional[dict]:
        if self.is_empty:
            return None

        def enc(x: float):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")

        return {"lo": enc(self.lo), "hi": enc(self.hi), "lo_open": self.lo_open, "hi_open": self.hi_open}


EMPTY = Interval(INF, -INF)


def interval(lo: float, hi: float, lo_open: bool = True, hi_open: bool = True) -> Interval:
    """Normalised constructor: anything without interior collapses to EMPTY.

    Endpoints within MERGE_RTOL of each other count as equal, so rounding
    slivers do not produce spurious intervals.
    """
    if math.isinf(hi) and hi > 0:
        hi_open = True
    if math.isinf(lo) and lo < 0:
        lo_open = True
    if lo > hi or _close(lo, hi):
        return EMPTY
    return Interval(lo, hi, lo_open, hi_open)


def union(intervals: Iterable[Interval]) -> list[Interval]:
    """Sorted union; pieces that overlap or touch at a covered point are merged."""
    items = sorted(
        (iv for iv in intervals if not iv.is_empty), key=lambda iv: (iv.lo, iv.lo_open)
    )
    merged: list[Interval] = []
    for iv in items:
        if merged:
            last = merged[-1]
            touching = _close(last.hi, iv.lo) and not (last.hi_open and iv.lo_open)
            if iv.lo < last.hi and not _close(last.hi, iv.lo) or touching:
                if iv.hi > last.hi or (iv.hi == last.hi and not iv.hi_open):
                    last = Interval(last.lo, iv.hi, last.lo_open, iv.hi_open)
                merged[-1] = last
                continue
        merged.append(iv)
    return merged


# ----------------------------------------------------------------- theorems


def _common(cfg: FourNodeConfig, d: DerivedQuantities) -> list[float]:
    return [ext_div(d.al, cfg.bsum("12")), ext_div(-d.al, cfg.bsum("45"))]


def _require_bc(cfg: FourNodeConfig) -> None:
    if not cfg.has_bc:
        raise InvalidConfig("paradox analysis needs the bridge link 3 (b,c)")


def theorem1_interval(cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None) -> Interval:
    """Both networks use every path."""
    _require_bc(cfg)
    d = derive_quantities(cfg) if d is None else d
    if not d.b1 > 0:
        return EMPTY
    lo = max(*_common(cfg, d), d.mu1, d.mu2)
    hi = (d.al_hat * cfg.bsum("14") + d.al_bar * cfg.bsum("25")) / d.b1
    return interval(lo, hi, True, True)


def theorem2_interval(cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None) -> Interval:
    """Bridged network routes everything over a-b-c-d."""
    _require_bc(cfg)
    d = derive_quantities(cfg) if d is None else d
    if not d.b2 > 0:
        return EMPTY
    bs = cfg.bsum
    lo = max(*_common(cfg, d), (d.al_hat * bs("45") + d.al_bar * bs("12")) / d.b2)
    hi = min(ext_div(d.al_hat, bs("35")), ext_div(d.al_bar, bs("13")))
    return interval(lo, hi, True, False)


def theorem3_interval(cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None) -> Interval:
    """Bridged network leaves a-b-d unused."""
    _require_bc(cfg)
    d = derive_quantities(cfg) if d is None else d
    if not d.b3 > 0:
        return EMPTY
    bs = cfg.bsum
    b4 = cfg.beta[3]
    lo = max(
        *_common(cfg, d),
        ext_div(d.al_bar, bs("13")),
        ext_div(-d.al_bar, b4),
        (d.al_bar * b4 * d.beta_total - d.al * bs("134") * bs("45")) / d.b3,
    )
    return interval(lo, d.mu1, True, False)


def theorem4_interval(cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None) -> Interval:
    """Bridged network leaves a-c-d unused."""
    _require_bc(cfg)
    d = derive_quantities(cfg) if d is None else d
    if not d.b4 > 0:
        return EMPTY
    bs = cfg.bsum
    b2 = cfg.beta[1]
    lo = max(
        *_common(cfg, d),
        ext_div(d.al_hat, bs("35")),
        ext_div(-d.al_hat, b2),
        (d.al_hat * b2 * d.beta_total + d.al * bs("235") * bs("12")) / d.b4,
    )
    return interval(lo, d.mu2, True, False)


THEOREMS = {
    1: theorem1_interval,
    2: theorem2_interval,
    3: theorem3_interval,
    4: theorem4_interval,
}


# ------------------------------------------------------------ pseudo-paradox


@dataclass(frozen=True)
class PseudoPiece:
    condition: str  # "a".."d"
    interval: Interval


def pseudo_paradox_pieces(
    cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None
) -> list[PseudoPiece]:
    """Sufficient conditions for T+ == T on a whole Q-interval (not claimed complete)."""
    _require_bc(cfg)
    d = derive_quantities(cfg) if d is None else d
    bs = cfg.bsum
    q_ab, q_ac = _common(cfg, d)
    interior = max(q_ab, q_ac)
    k = d.al_hat * bs("14") + d.al_bar * bs("25")

    pieces = [
        ("a", interval(0.0, min(q_ac, ext_div(-d.al_bar, cfg.beta[3])), True, False)),
        ("b", interval(0.0, min(q_ab, ext_div(-d.al_hat, cfg.beta[1])), True, False)),
    ]
    # Q > interior and Q * B1 >= k
    if d.b1 > 0:
        bound = k / d.b1
        if bound > interior:
            pieces.append(("c", interval(bound, INF, False, True)))
        else:
            pieces.append(("c", interval(interior, INF, True, True)))
    elif d.b1 == 0:
        if k <= 0:
            pieces.append(("c", interval(interior, INF, True, True)))
    else:
        pieces.append(("c", interval(interior, k / d.b1, True, False)))
    if d.b1 == 0 and k > 0:
        pieces.append(("d", interval(max(interior, d.mu1, d.mu2), INF, True, True)))
    return [PseudoPiece(c, iv) for c, iv in pieces if not iv.is_empty]


def pseudo_paradox_region(cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None) -> list[Interval]:
    return union(p.interval for p in pseudo_paradox_pieces(cfg, d))


# ----------------------------------------------------------- classification


# case pairs (N, N+) whose travel-time formulas coincide term for term
_SAME_FORMULA = frozenset({("a", "b"), ("b", "c"), ("c", "f")})


def structural_delta(n: EquilibriumSolution, nplus: EquilibriumSolution, d: DerivedQuantities) -> float:
    """T+ - T formed per case pair instead of by subtracting two large numbers.

    Identical formulas give exactly 0.  With N in case c and N+ in case g the
    difference is g * B1 / beta; near the end of the Theorem 1 interval it is
    many orders of magnitude below T, so subtraction would lose it.
    """
    pair = (n.case, nplus.case)
    if pair in _SAME_FORMULA:
        return 0.0
    if pair == ("c", "g"):
        return nplus.g * d.b1 / d.beta_total
    return nplus.T - n.T


@dataclass(frozen=True)
class Classification:
    kind: str  # "improvement" | "paradox" | "equal"
    Q: float
    n: EquilibriumSolution
    nplus: EquilibriumSolution
    delta: float  # T+ - T

    @property
    def mega_case(self) -> Optional[str]:
        if self.kind != "paradox":
            return None
        by_case = {"g": "a", "a": "b", "d": "c", "e": "d"}
        return by_case.get(self.nplus.case)

    @property
    def consistent(self) -> bool:
        """A paradox must have N in case c and N+ in one of a, d, e, g."""
        if self.kind != "paradox":
            return True
        return self.n.case == "c" and self.nplus.case in PARADOX_NPLUS_CASES


def classify(
    cfg: FourNodeConfig,
    Q: float,
    d: Optional[DerivedQuantities] = None,
    rtol: float = CLASSIFY_RTOL,
) -> Classification:
    """Compare T+ with T at one Q.

    Generic case pairs use a relative tolerance.  The c/g pair is decided by
    the sign of its exact difference, which is the sign test Theorem 1 gates on.
    """
    _require_bc(cfg)
    d = derive_quantities(cfg) if d is None else d
    n = equilibrium_N(cfg, Q, d)
    nplus = equilibrium_Nplus(cfg, Q, d)
    diff = structural_delta(n, nplus, d)
    scale = 0.0 if (n.case, nplus.case) == ("c", "g") else rtol * max(1.0, abs(n.T))
    if diff > scale:
        kind = "paradox"
    elif diff < -scale:
        kind = "improvement"
    else:
        kind = "equal"
    return Classification(kind, float(Q), n, nplus, diff)


# ------------------------------------------------------------------- report


@dataclass(frozen=True)
class TheoremResult:
    theorem: int
    braess_number: float
    gate: bool
    interval: Interval

    @property
    def mega_case(self) -> str:
        return MEGA_CASE[self.theorem]


@dataclass(frozen=True)
class ParadoxReport:
    cfg: FourNodeConfig
    derived: DerivedQuantities
    per_theorem: tuple[TheoremResult, ...]
    region: tuple[Interval, ...]
    pseudo: tuple[PseudoPiece, ...]
    pseudo_region: tuple[Interval, ...] = field(default=())

    @property
    def is_empty(self) -> bool:
        return not self.region

    def contains(self, Q: float) -> bool:
        return any(Q in iv for iv in self.region)

    def theorem_for(self, Q: float) -> Optional[int]:
        for t in self.per_theorem:
            if Q in t.interval:
                return t.theorem
        return None

    def classification_at(self, Q: float) -> Classification:
        return classify(self.cfg, Q, self.derived)


def paradox_region(cfg: FourNodeConfig) -> ParadoxReport:
    """Exact paradox region as the union of the four theorem intervals."""
    _require_bc(cfg)
    d = derive_quantities(cfg)
    numbers = {1: d.b1, 2: d.b2, 3: d.b3, 4: d.b4}
    per = tuple(
        TheoremResult(k, numbers[k], numbers[k] > 0, THEOREMS[k](cfg, d)) for k in (1, 2, 3, 4)
    )
    region = tuple(union(t.interval for t in per))
    pieces = tuple(pseudo_paradox_pieces(cfg, d))
    return ParadoxReport(cfg, d, per, region, pieces, tuple(union(p.interval for p in pieces)))


# ---------------------------------------------------------------- patterns

PATTERN_ATOL = 1e-12


def _eq(x: float, y: float) -> bool:
    return abs(x - y) <= PATTERN_ATOL * (1.0 + max(abs(x), abs(y)))


def symmetry_pattern(cfg: FourNodeConfig) -> Optional[str]:
    """'M', 'S', 'A' or None. M is checked before S because M is a special case of S."""
    if not cfg.has_bc:
        return None
    a, b = cfg.alpha, cfg.beta
    s_like = _eq(a[0], a[4]) and _eq(a[1], a[3]) and _eq(b[0], b[4]) and _eq(b[1], b[3])
    if s_like and _eq(a[0], 0.0) and _eq(b[1], b[2]):
        return "M"
    if s_like:
        return "S"
    if _eq(a[0], a[3]) and _eq(a[1], a[4]) and _eq(b[0], b[3]) and _eq(b[1], b[4]):
        return "A"
    return None


@dataclass(frozen=True)
class SymmetricReport:
    pattern: str
    closed_form: Interval
    general: tuple[Interval, ...]


def symmetric_analysis(cfg: FourNodeConfig, rtol: float = 1e-9) -> SymmetricReport:
    """Closed-form paradox bounds for the M and S patterns, cross-checked against the theorems."""
    pattern = symmetry_pattern(cfg)
    if pattern not in ("M", "S"):
        raise NotSymmetric("configuration matches neither the M nor the S pattern")
    a, b = cfg.alpha, cfg.beta
    if pattern == "M":
        gap = a[1] - a[2]
        den_lo = 3 * b[0] + b[1]
    else:
        gap = a[1] - a[0] - a[2]
        den_lo = 3 * b[0] + 2 * b[2] - b[1]
    if b[0] > b[1] and gap > 0:
        closed = interval(2 * gap / den_lo, 2 * gap / (b[0] - b[1]))
    else:
        closed = EMPTY

    general = paradox_region(cfg).region
    agree = (closed.is_empty and not general) or (
        len(general) == 1
        and _close(general[0].lo, closed.lo, rtol)
        and _close(general[0].hi, closed.hi, rtol)
    )
    if not agree:
        raise ConsistencyError(
            f"{pattern}-pattern bounds {closed} disagree with theorem region {[str(g) for g in general]}"
        )
    return SymmetricReport(pattern, closed, general)
