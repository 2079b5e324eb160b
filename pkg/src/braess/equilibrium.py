"""Closed-form Wardrop equilibria of the four-node network with and without the bridge.

Paths: P1 = a-b-d, P2 = a-c-d, P3 = a-b-c-d.  With ``f`` the flow on (a,b)
and ``g`` the flow on the bridge (b,c), the path flows are h1 = f - g,
h2 = Q - f and h3 = g.

Guards are compared exactly, with no epsilon padding.  Where two guards meet,
both cases give the same travel time, and the earlier letter wins.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

from braess.core import DerivedQuantities, FourNodeConfig, derive_quantities, ext_div
from braess.errors import InvalidConfig, InvalidQ, NoCaseMatched

log = logging.getLogger(__name__)

N_CASES = ("a", "b", "c")
NPLUS_CASES = ("a", "b", "c", "d", "e", "f", "g")


@dataclass(frozen=True)
class EquilibriumSolution:
    network: str  # "N" or "N+"
    case: str
    Q: float
    T: float
    path_flows: tuple[float, float, float]

    @property
    def case_label(self) -> str:
        return ("N." if self.network == "N" else "Nplus.") + self.case

    @property
    def f(self) -> float:
        return self.path_flows[0] + self.path_flows[2]

    @property
    def g(self) -> float:
        return self.path_flows[2]

    @property
    def link_flows(self) -> dict[str, float]:
        h1, h2, h3 = self.path_flows
        return {"ab": h1 + h3, "bd": h1, "bc": h3, "ac": h2, "cd": h2 + h3}

    def to_dict(self) -> dict:
        return {
            "network": self.network,
            "case": self.case_label,
            "Q": self.Q,
            "T": self.T,
            "path_flows": list(self.path_flows),
            "link_flows": self.link_flows,
        }


def _check_q(Q: float) -> float:
    Q = float(Q)
    if not Q > 0 or not math.isfinite(Q):
        raise InvalidQ(f"total flow must be a finite positive number, got {Q!r}")
    return Q


def _derived(cfg: FourNodeConfig, d: Optional[DerivedQuantities]) -> DerivedQuantities:
    return derive_quantities(cfg) if d is None else d


def _solution(network, case, Q, T, f, g) -> EquilibriumSolution:
    return EquilibriumSolution(network, case, Q, T, (f - g, Q - f, g))


# ---------------------------------------------------------------- network N


def n_thresholds(cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None) -> dict[str, float]:
    d = _derived(cfg, d)
    return {
        "al/b12": ext_div(d.al, cfg.bsum("12")),
        "-al/b45": ext_div(-d.al, cfg.bsum("45")),
    }


def equilibrium_N(
    cfg: FourNodeConfig, Q: float, d: Optional[DerivedQuantities] = None
) -> EquilibriumSolution:
    """Equilibrium of the bridgeless network (three cases)."""
    Q = _check_q(Q)
    d = _derived(cfg, d)
    th = n_thresholds(cfg, d)
    a12, a45 = cfg.asum("12"), cfg.asum("45")
    b12, b45 = cfg.bsum("12"), cfg.bsum("45")

    if Q <= th["-al/b45"]:
        return _solution("N", "a", Q, a45 + Q * b45, 0.0, 0.0)
    if Q <= th["al/b12"]:
        return _solution("N", "b", Q, a12 + Q * b12, Q, 0.0)
    h = (d.al + Q * b45) / d.beta_total
    return _solution("N", "c", Q, a12 + (d.al + Q * b45) * b12 / d.beta_total, h, 0.0)


# --------------------------------------------------------------- network N+


def nplus_thresholds(cfg: FourNodeConfig, d: Optional[DerivedQuantities] = None) -> dict[str, float]:
    """Every threshold on Q that appears in a guard of the bridged network."""
    d = _derived(cfg, d)
    if not cfg.has_bc:
        raise InvalidConfig("the bridged network needs link 3 (b,c)")
    bs = cfg.bsum
    th = n_thresholds(cfg, d)
    th.update(
        {
            "ah/b35": ext_div(d.al_hat, bs("35")),
            "ab/b13": ext_div(d.al_bar, bs("13")),
            "-ab/b4": ext_div(-d.al_bar, bs("4")),
            "-ah/b2": ext_div(-d.al_hat, bs("2")),
            "mu1": d.mu1,
            "mu2": d.mu2,
        }
    )
    return th


def _b1_rhs(cfg: FourNodeConfig, d: DerivedQuantities) -> float:
    # alpha_hat * beta_14 + alpha_bar * beta_25
    return d.al_hat * cfg.bsum("14") + d.al_bar * cfg.bsum("25")


def nplus_guards(
    cfg: FourNodeConfig, Q: float, d: Optional[DerivedQuantities] = None
) -> dict[str, bool]:
    """Evaluate the seven case guards of the bridged network at ``Q``."""
    Q = _check_q(Q)
    d = _derived(cfg, d)
    th = nplus_thresholds(cfg, d)
    k_over_q = _b1_rhs(cfg, d) / Q
    interior = Q > max(th["al/b12"], th["-al/b45"])
    return {
        "a": Q <= min(th["ah/b35"], th["ab/b13"]),
        "b": Q <= min(th["-al/b45"], th["-ab/b4"]),
        "c": Q <= min(th["al/b12"], th["-ah/b2"]),
        "d": max(th["ab/b13"], th["-ab/b4"]) < Q <= d.mu1,
        "e": max(th["ah/b35"], th["-ah/b2"]) < Q <= d.mu2,
        "f": interior and d.b1 >= k_over_q,
        "g": Q > max(d.mu1, d.mu2) and d.b1 < k_over_q,
    }


def nplus_case_value(
    cfg: FourNodeConfig, Q: float, case: str, d: Optional[DerivedQuantities] = None
) -> EquilibriumSolution:
    """Travel time and flows prescribed by ``case`` (guards not checked)."""
    d = _derived(cfg, d)
    a, b = cfg.alpha, cfg.beta
    asum, bs = cfg.asum, cfg.bsum
    beta = d.beta_total
    if case == "a":
        return _solution("N+", "a", Q, asum("135") + Q * bs("135"), Q, Q)
    if case == "b":
        return _solution("N+", "b", Q, asum("45") + Q * bs("45"), 0.0, 0.0)
    if case == "c":
        return _solution("N+", "c", Q, asum("12") + Q * bs("12"), Q, 0.0)
    if case == "d":
        f = ext_div(d.al_bar + Q * b[3], bs("134"))
        T = asum("45") + Q * bs("45") - (d.al_bar + Q * b[3]) * b[3] / bs("134")
        return _solution("N+", "d", Q, T, f, f)
    if case == "e":
        g = ext_div(d.al_hat + Q * b[1], bs("235"))
        T = asum("12") + Q * bs("12") - (d.al_hat + Q * b[1]) * b[1] / bs("235")
        return _solution("N+", "e", Q, T, Q, g)
    if case == "f":
        f = (d.al + Q * bs("45")) / beta
        T = asum("12") + (d.al + Q * bs("45")) * bs("12") / beta
        return _solution("N+", "f", Q, T, f, 0.0)
    if case == "g":
        g = ext_div(
            d.al_bar * beta - d.al * bs("14") - Q * d.b1, b[2] * beta + bs("14") * bs("25")
        )
        f = (d.al + g * bs("25") + Q * bs("45")) / beta
        T = asum("12") + (d.al + Q * bs("45")) * bs("12") / beta + g * d.b1 / beta
        return _solution("N+", "g", Q, T, f, g)
    raise ValueError(f"unknown case {case!r}")


def equilibrium_Nplus(
    cfg: FourNodeConfig, Q: float, d: Optional[DerivedQuantities] = None
) -> EquilibriumSolution:
    """Equilibrium of the bridged network (seven cases, checked in letter order)."""
    Q = _check_q(Q)
    d = _derived(cfg, d)
    guards = nplus_guards(cfg, Q, d)
    for case in NPLUS_CASES:
        if guards[case]:
            return nplus_case_value(cfg, Q, case, d)
    dump = {"Q": Q, "derived": d.to_dict(), "thresholds": nplus_thresholds(cfg, d)}
    log.error("no equilibrium case matched: %r", dump)
    raise NoCaseMatched(f"no case of the bridged network matched at Q={Q!r}: {dump!r}")


def equilibrium(cfg: FourNodeConfig, Q: float, with_bc: bool = True) -> EquilibriumSolution:
    if with_bc:
        return equilibrium_Nplus(cfg, Q)
    return equilibrium_N(cfg, Q)


# ------------------------------------------------------ piecewise functions


@dataclass(frozen=True)
class Segment:
    lo: float  # open end
    hi: float  # closed end; inf for the last segment
    slope: float
    intercept: float
    case: str

    def __call__(self, Q: float) -> float:
        return self.intercept + self.slope * Q


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Equilibrium time as a function of Q; segments are (lo, hi] and tile (0, inf)."""

    network: str
    segments: tuple[Segment, ...]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(s.hi for s in self.segments[:-1])

    def segment_at(self, Q: float) -> Segment:
        for s in self.segments:
            if Q <= s.hi:
                return s
        return self.segments[-1]

    def __call__(self, Q: float) -> float:
        return self.segment_at(Q)(Q)

    def max_jump(self) -> float:
        """Largest relative discontinuity across the breakpoints."""
        worst = 0.0
        for left, right in zip(self.segments, self.segments[1:]):
            x = left.hi
            l, r = left(x), right(x)
            worst = max(worst, abs(l - r) / (1.0 + max(abs(l), abs(r))))
        return worst


def case_line(
    cfg: FourNodeConfig, network: str, case: str, d: Optional[DerivedQuantities] = None
) -> tuple[float, float]:
    """``(intercept, slope)`` of the equilibrium time inside one case."""
    d = _derived(cfg, d)
    asum, bs, b = cfg.asum, cfg.bsum, cfg.beta
    beta = d.beta_total
    interior = (asum("12") + d.al * bs("12") / beta, bs("45") * bs("12") / beta)
    if network == "N":
        return {
            "a": (asum("45"), bs("45")),
            "b": (asum("12"), bs("12")),
            "c": interior,
        }[case]
    if case == "a":
        return asum("135"), bs("135")
    if case == "b":
        return asum("45"), bs("45")
    if case == "c":
        return asum("12"), bs("12")
    if case == "d":
        return asum("45") - d.al_bar * b[3] / bs("134"), bs("45") - b[3] ** 2 / bs("134")
    if case == "e":
        return asum("12") - d.al_hat * b[1] / bs("235"), bs("12") - b[1] ** 2 / bs("235")
    if case == "f":
        return interior
    if case == "g":
        den = b[2] * beta + bs("14") * bs("25")
        extra0 = (d.al_bar * beta - d.al * bs("14")) * d.b1 / (beta * den)
        return interior[0] + extra0, interior[1] - d.b1 ** 2 / (beta * den)
    raise ValueError(f"unknown case {case!r}")


def piecewise_equilibrium(
    cfg: FourNodeConfig, with_bc: bool, q_max: float, *, continuity_rtol: float = 1e-9
) -> PiecewiseLinearFn:
    """Assemble the case-structured equilibrium time over (0, q_max].

    Segments are labelled by probing their midpoints with the point solver;
    adjacent segments in the same case are merged.  Thresholds above ``q_max``
    are ignored, so the tail segment is exact only up to ``q_max``.
    """
    if not q_max > 0:
        raise InvalidQ(f"q_max must be positive, got {q_max!r}")
    d = derive_quantities(cfg)
    if with_bc:
        th = dict(nplus_thresholds(cfg, d))
        if d.b1 != 0:
            # the f/g switch sits at K/B1 for either sign of B1
            th["K/B1"] = _b1_rhs(cfg, d) / d.b1
        solve, network = equilibrium_Nplus, "N+"
    else:
        th = n_thresholds(cfg, d)
        solve, network = equilibrium_N, "N"

    cuts = sorted({v for v in th.values() if 0 < v <= q_max and math.isfinite(v)})
    edges = [0.0, *cuts]
    segments: list[Segment] = []
    for i, lo in enumerate(edges):
        hi = edges[i + 1] if i + 1 < len(edges) else math.inf
        probe = 0.5 * (lo + (hi if math.isfinite(hi) else q_max))
        if probe <= lo:
            probe = lo + 0.5 * max(q_max - lo, 1.0)
        case = solve(cfg, probe, d).case
        intercept, slope = case_line(cfg, network, case, d)
        if segments and segments[-1].case == case:
            prev = segments[-1]
            segments[-1] = Segment(prev.lo, hi, prev.slope, prev.intercept, case)
        else:
            segments.append(Segment(lo, hi, slope, intercept, case))
    fn = PiecewiseLinearFn(network, tuple(segments))
    jump = fn.max_jump()
    if jump > continuity_rtol:
        raise NoCaseMatched(f"equilibrium function of {network} jumps by {jump:.3g} at a breakpoint")
    return fn
