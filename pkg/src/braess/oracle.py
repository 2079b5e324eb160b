"""Independent equilibrium solver used to check the closed-form cases.

The equilibrium minimises the Beckmann potential, i.e. the sum over links of
the integral of the link cost.  This module never calls the closed-form
solver.  It offers two methods: exhaustive active-set enumeration of the KKT
conditions, and derivative-free nested golden-section search over the
polytope 0 <= g <= f <= Q.  The second one also works when some delay
parameters are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from braess import _kernels
from braess.core import FourNodeConfig
from braess.errors import InfeasibleFlows, InvalidQ, NoKKTPoint
from braess.paradox import Interval, interval

KKT_RTOL = 1e-8
FEAS_TOL = 1e-12

# path-link incidence, links in canonical order ab, bd, bc, ac, cd
INCIDENCE = np.array(
    [
        [1, 0, 1],
        [1, 0, 0],
        [0, 0, 1],
        [0, 1, 0],
        [0, 1, 1],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class OracleSolution:
    Q: float
    path_flows: tuple[float, ...]  # (h1, h2) or (h1, h2, h3)
    T: float
    potential_value: float
    kkt_residual: float
    method: str


def config_arrays(cfg: FourNodeConfig) -> tuple[np.ndarray, np.ndarray]:
    alpha = np.array([0.0 if v is None else v for v in cfg.alpha])
    beta = np.array([0.0 if v is None else v for v in cfg.beta])
    return alpha, beta


def link_flows(path_flows: Sequence[float]) -> np.ndarray:
    h = np.zeros(3)
    h[: len(path_flows)] = path_flows
    return INCIDENCE @ h


def path_times(alpha: np.ndarray, beta: np.ndarray, path_flows: Sequence[float]) -> np.ndarray:
    """Travel time on P1, P2, P3 given path flows (link-level evaluation)."""
    x = link_flows(path_flows)
    return INCIDENCE.T @ (alpha + beta * x)


def beckmann_potential(alpha: np.ndarray, beta: np.ndarray, path_flows: Sequence[float]) -> float:
    x = link_flows(path_flows)
    return float(np.sum(alpha * x + 0.5 * beta * x * x))


def _auto_method(cfg: FourNodeConfig, method: Optional[str]) -> str:
    if method is not None:
        if method not in ("active_set", "grid"):
            raise ValueError(f"unknown method {method!r}")
        return method
    betas = [b for b in cfg.beta if b is not None]
    return "active_set" if all(b > 0 for b in betas) else "grid"


def _npaths(cfg: FourNodeConfig, with_bc: bool) -> int:
    if with_bc and not cfg.has_bc:
        raise ValueError("with_bc=True needs link 3 in the configuration")
    return 3 if with_bc else 2


def _finish(alpha, beta, Q, h, npaths, method) -> OracleSolution:
    times = path_times(alpha, beta, h)[:npaths]
    hp = np.asarray(h[:npaths], dtype=float)
    T = float(hp @ times / Q)
    used = hp > FEAS_TOL * (1.0 + Q)
    res = max(
        float(np.max(np.abs(times[used] - T))) if used.any() else 0.0,
        float(np.max(np.maximum(0.0, T - times[~used]))) if (~used).any() else 0.0,
        float(np.max(np.maximum(0.0, -hp))),
    )
    return OracleSolution(
        Q, tuple(float(v) for v in hp), T, beckmann_potential(alpha, beta, h), res, method
    )


def beckmann_solve_many(
    cfg: FourNodeConfig,
    with_bc: bool,
    qs: Sequence[float],
    method: Optional[str] = None,
    *,
    check: bool = True,
) -> list[OracleSolution]:
    """Solve the potential minimisation for each total flow in ``qs``."""
    q = np.asarray(qs, dtype=float).reshape(-1)
    if q.size and not (np.all(q > 0) and np.all(np.isfinite(q))):
        raise InvalidQ("total flows must be finite and positive")
    method = _auto_method(cfg, method)
    npaths = _npaths(cfg, with_bc)
    alpha, beta = config_arrays(cfg)
    if method == "active_set":
        h, t, res = _kernels.active_set(alpha, beta, q, npaths)
    else:
        f, g = _kernels.golden(alpha, beta, q, npaths)
        h = np.stack([f - g, q - f, g], axis=1)
    out = []
    for i, Q in enumerate(q):
        sol = _finish(alpha, beta, float(Q), h[i], npaths, method)
        if method == "active_set" and check and not sol.kkt_residual <= KKT_RTOL * (1.0 + abs(sol.T)):
            raise NoKKTPoint(f"no KKT point found at Q={Q!r} (residual {sol.kkt_residual:.3g})")
        out.append(sol)
    return out


def beckmann_solve(
    cfg: FourNodeConfig, with_bc: bool, Q: float, method: Optional[str] = None
) -> OracleSolution:
    """Wardrop equilibrium by minimising the Beckmann potential.

    ``method`` defaults to active-set enumeration when every delay parameter is
    positive and to golden-section search otherwise.
    """
    Q = float(Q)
    if not Q > 0 or not math.isfinite(Q):
        raise InvalidQ(f"total flow must be a finite positive number, got {Q!r}")
    return beckmann_solve_many(cfg, with_bc, [Q], method)[0]


def beckmann_solve_batch(
    alpha: np.ndarray,
    beta: np.ndarray,
    q: np.ndarray,
    with_bc: bool,
    method: str = "active_set",
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised solve over many configs at once: returns ``(path_flows, T)``.

    ``alpha``/``beta`` are ``(n, 5)``; ``q`` is ``(n,)``.
    """
    npaths = 3 if with_bc else 2
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    q = np.asarray(q, dtype=float)
    if method == "active_set":
        h, t, _ = _kernels.active_set(alpha, beta, q, npaths)
    else:
        f, g = _kernels.golden(alpha, beta, q, npaths)
        h = np.stack([f - g, q - f, g], axis=1)
        c, M = _kernels.path_system(np.nan_to_num(alpha), np.nan_to_num(beta))
        costs = c + np.einsum("nij,nj->ni", M, h)
        t = np.einsum("ni,ni->n", h[:, :npaths], costs[:, :npaths]) / q
    if not with_bc:
        h[:, 2] = 0.0
    return h, t


def system_optimum(cfg: FourNodeConfig, with_bc: bool, Q: float) -> tuple[tuple[float, ...], float]:
    """Flows minimising total travel time, and the resulting average time.

    Marginal link cost is alpha + 2 beta x, so the optimum is the equilibrium of
    the doubled-delay network, found with the same active-set machinery.
    """
    alpha, beta = config_arrays(cfg)
    npaths = _npaths(cfg, with_bc)
    h, _, res = _kernels.active_set(alpha, 2.0 * beta, np.array([float(Q)]), npaths)
    flows = h[0, :npaths]
    x = link_flows(flows)
    total = float(np.sum(x * (alpha + beta * x)))
    return tuple(float(v) for v in flows), total / Q


@dataclass(frozen=True)
class WardropCheck:
    passed: bool
    T: float
    path_times: tuple[float, ...]
    used_spread: float  # largest gap between a used path time and T
    unused_deficit: float  # largest amount an unused path undercuts T


def verify_wardrop(
    cfg: FourNodeConfig,
    with_bc: bool,
    Q: float,
    path_flows: Sequence[float],
    tol: float = 1e-9,
) -> WardropCheck:
    """Check the equal-times / no-cheaper-unused-path conditions for given path flows."""
    npaths = _npaths(cfg, with_bc)
    h = np.zeros(3)
    flows = list(path_flows)[:npaths]
    if len(flows) != npaths:
        raise InfeasibleFlows(f"expected {npaths} path flows, got {len(flows)}")
    h[:npaths] = flows
    scale = FEAS_TOL * (1.0 + abs(Q))
    if np.any(h < -scale) or abs(h.sum() - Q) > scale:
        raise InfeasibleFlows(f"path flows {flows} are not a feasible split of Q={Q}")
    alpha, beta = config_arrays(cfg)
    times = path_times(alpha, beta, h)[:npaths]
    used = h[:npaths] > scale
    T = float(times[used].min()) if used.any() else float(times.min())
    spread = float(np.max(np.abs(times[used] - T))) if used.any() else 0.0
    deficit = float(np.max(np.maximum(0.0, T - times))) if npaths else 0.0
    passed = spread <= tol and deficit <= tol
    return WardropCheck(passed, T, tuple(float(t) for t in times), spread, deficit)


# ---------------------------------------------------------------- scanning


def _paradox_flags(cfg, qs, method, rtol):
    n = beckmann_solve_many(cfg, False, qs, method, check=False)
    p = beckmann_solve_many(cfg, True, qs, method, check=False)
    return np.array([b.T - a.T > rtol * max(1.0, abs(a.T)) for a, b in zip(n, p)])


def scan_paradox(
    cfg: FourNodeConfig,
    q_lo: float,
    q_hi: float,
    n_samples: int,
    method: Optional[str] = None,
    rtol: Optional[float] = None,
) -> list[Interval]:
    """Empirical paradox runs on a uniform grid, endpoints refined by bisection.

    Each run is reported as an open interval.  Endpoints that coincide with the
    scan limits are not refined.
    """
    if not 0 < q_lo < q_hi:
        raise InvalidQ("need 0 < q_lo < q_hi")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    method = _auto_method(cfg, method)
    if rtol is None:
        rtol = 1e-9 if method == "active_set" else 1e-6
    qs = np.linspace(q_lo, q_hi, n_samples)
    flags = _paradox_flags(cfg, qs, method, rtol)
    tol = (q_hi - q_lo) / n_samples / 100.0

    def refine(outside: float, inside: float) -> float:
        while abs(inside - outside) > tol:
            mid = 0.5 * (inside + outside)
            if _paradox_flags(cfg, [mid], method, rtol)[0]:
                inside = mid
            else:
                outside = mid
        return 0.5 * (inside + outside)

    runs = []
    i = 0
    while i < n_samples:
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < n_samples and flags[j + 1]:
            j += 1
        lo = qs[i] if i == 0 else refine(qs[i - 1], qs[i])
        hi = qs[j] if j == n_samples - 1 else refine(qs[j + 1], qs[j])
        runs.append(interval(float(lo), float(hi), True, True))
        i = j + 1
    return [r for r in runs if not r.is_empty]
