"""Batched inner loops of the equilibrium oracle.

Two implementations of each kernel live here: scalar loops compiled with
numba, and a pure-numpy version vectorised over the batch.  Set
``BRAESS_NUMBA=0`` to force the numpy path; it is also used automatically
when numba cannot be imported.

Problem layout, shared by both paths: ``alpha``/``beta`` are ``(n, 5)`` float
arrays in canonical link order (ab, bd, bc, ac, cd), ``q`` is ``(n,)``.
Path order is P1 = a-b-d, P2 = a-c-d, P3 = a-b-c-d.  With ``npaths == 2`` the
bridge entries are ignored.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def numba_enabled() -> bool:
    return NUMBA_AVAILABLE and os.environ.get("BRAESS_NUMBA", "1").strip().lower() not in (
        "0",
        "false",
        "no",
        "off",
    )


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
PASS1_SHRINK = 1e-6  # first pass narrows the f-bracket to this fraction of Q
PASS2_HALF_WIDTH = 1e-3  # second-pass bracket half-width, as a fraction of Q
FLOW_TOL = 1e-12  # target final bracket width, as a fraction of Q


def golden_iterations(ratio: float) -> int:
    """Golden-section steps needed to shrink a bracket by ``ratio``."""
    return int(math.ceil(math.log(ratio) / math.log(GOLDEN)))


ITERS_PASS1 = golden_iterations(PASS1_SHRINK)
ITERS_PASS2 = golden_iterations(FLOW_TOL / (2 * PASS2_HALF_WIDTH))
ITERS_PASS2_INNER = golden_iterations(FLOW_TOL / (6 * PASS2_HALF_WIDTH))


def path_system(alpha: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Path free-flow costs ``c`` (n, 3) and path delay matrix ``M`` (n, 3, 3).

    Path travel times are ``c + M @ h``; the Beckmann potential in path flows
    is ``c @ h + h @ M @ h / 2``.
    """
    a1, a2, a3, a4, a5 = alpha.T
    b1, b2, b3, b4, b5 = beta.T
    n = alpha.shape[0]
    c = np.stack([a1 + a2, a4 + a5, a1 + a3 + a5], axis=1)
    M = np.zeros((n, 3, 3))
    M[:, 0, 0] = b1 + b2
    M[:, 1, 1] = b4 + b5
    M[:, 2, 2] = b1 + b3 + b5
    M[:, 0, 2] = M[:, 2, 0] = b1
    M[:, 1, 2] = M[:, 2, 1] = b5
    return c, M


# ------------------------------------------------------------------ numba


@njit(cache=True)
def _assemble_one(al, be, c, M):
    c[0] = al[0] + al[1]
    c[1] = al[3] + al[4]
    c[2] = al[0] + al[2] + al[4]
    for r in range(3):
        for s in range(3):
            M[r, s] = 0.0
    M[0, 0] = be[0] + be[1]
    M[1, 1] = be[3] + be[4]
    M[2, 2] = be[0] + be[2] + be[4]
    M[0, 2] = be[0]
    M[2, 0] = be[0]
    M[1, 2] = be[4]
    M[2, 1] = be[4]


@njit(cache=True)
def _gauss_solve(A, x, m):
    """Solve A[:m,:m] y = x[:m] in place (x receives y). False when singular."""
    scale = 0.0
    for r in range(m):
        for s in range(m):
            if abs(A[r, s]) > scale:
                scale = abs(A[r, s])
    for col in range(m):
        piv = col
        for r in range(col + 1, m):
            if abs(A[r, col]) > abs(A[piv, col]):
                piv = r
        if abs(A[piv, col]) <= 1e-14 * scale:
            return False
        if piv != col:
            for s in range(m):
                tmp = A[col, s]
                A[col, s] = A[piv, s]
                A[piv, s] = tmp
            tmp = x[col]
            x[col] = x[piv]
            x[piv] = tmp
        for r in range(col + 1, m):
            fac = A[r, col] / A[col, col]
            if fac != 0.0:
                for s in range(col, m):
                    A[r, s] -= fac * A[col, s]
                x[r] -= fac * x[col]
    for r in range(m - 1, -1, -1):
        acc = x[r]
        for s in range(r + 1, m):
            acc -= A[r, s] * x[s]
        x[r] = acc / A[r, r]
    return True


@njit(cache=True)
def _kkt_residual(c, M, h, lam, npaths, q):
    res = 0.0
    for p in range(npaths):
        cost = c[p]
        for s in range(npaths):
            cost += M[p, s] * h[s]
        if h[p] > 0.0:
            r = abs(cost - lam)
        else:
            r = max(0.0, lam - cost)
        r = max(r, -h[p])
        if r > res:
            res = r
    return res


@njit(cache=True)
def active_set_jit(alpha, beta, q, npaths, out_h, out_t, out_res):
    n = alpha.shape[0]
    c = np.empty(3)
    M = np.empty((3, 3))
    A = np.empty((4, 4))
    x = np.empty(4)
    h = np.empty(3)
    used = np.empty(3, dtype=np.int64)
    for i in range(n):
        _assemble_one(alpha[i], beta[i], c, M)
        best = np.inf
        for mask in range(1, 1 << npaths):
            k = 0
            for p in range(npaths):
                if mask & (1 << p):
                    used[k] = p
                    k += 1
            for r in range(k + 1):
                for s in range(k + 1):
                    A[r, s] = 0.0
            for r in range(k):
                for s in range(k):
                    A[r, s] = M[used[r], used[s]]
                A[r, k] = -1.0
                A[k, r] = 1.0
                x[r] = -c[used[r]]
            x[k] = q[i]
            if not _gauss_solve(A, x, k + 1):
                continue
            for p in range(3):
                h[p] = 0.0
            for r in range(k):
                h[used[r]] = x[r]
            lam = x[k]
            res = _kkt_residual(c, M, h, lam, npaths, q[i])
            if res / (1.0 + abs(lam)) < best:
                best = res / (1.0 + abs(lam))
                for p in range(3):
                    out_h[i, p] = h[p]
                out_t[i] = lam
                out_res[i] = res
        if best == np.inf:
            out_t[i] = np.nan
            out_res[i] = np.inf


@njit(cache=True)
def _phi(f, g, q, cr, M, hr):
    d0 = (f - g) - hr[0]
    d1 = (q - f) - hr[1]
    d2 = g - hr[2]
    quad = (
        M[0, 0] * d0 * d0
        + M[1, 1] * d1 * d1
        + M[2, 2] * d2 * d2
        + 2.0 * (M[0, 2] * d0 * d2 + M[1, 2] * d1 * d2)
    )
    return cr[0] * d0 + cr[1] * d1 + cr[2] * d2 + 0.5 * quad


@njit(cache=True)
def _golden_g(f, lo, hi, iters, q, cr, M, hr):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1 = _phi(f, x1, q, cr, M, hr)
    f2 = _phi(f, x2, q, cr, M, hr)
    for _ in range(iters):
        if f1 <= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = _phi(f, x1, q, cr, M, hr)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = _phi(f, x2, q, cr, M, hr)
    g = 0.5 * (lo + hi)
    return g, _phi(f, g, q, cr, M, hr)


@njit(cache=True)
def _g_bracket(f, g_ref, half, with_bc):
    if not with_bc:
        return 0.0, 0.0
    if half < 0.0:
        return 0.0, f
    hi = min(f, g_ref + half)
    lo = min(max(0.0, g_ref - half), hi)
    return lo, hi


@njit(cache=True)
def _golden_pass(flo, fhi, iters_f, iters_g, g_ref, g_half, with_bc, q, cr, M, hr):
    x1 = fhi - GOLDEN * (fhi - flo)
    x2 = flo + GOLDEN * (fhi - flo)
    lo, hi = _g_bracket(x1, g_ref, g_half, with_bc)
    _, f1 = _golden_g(x1, lo, hi, iters_g, q, cr, M, hr)
    lo, hi = _g_bracket(x2, g_ref, g_half, with_bc)
    _, f2 = _golden_g(x2, lo, hi, iters_g, q, cr, M, hr)
    for _ in range(iters_f):
        if f1 <= f2:
            fhi = x2
            x2 = x1
            f2 = f1
            x1 = fhi - GOLDEN * (fhi - flo)
            lo, hi = _g_bracket(x1, g_ref, g_half, with_bc)
            _, f1 = _golden_g(x1, lo, hi, iters_g, q, cr, M, hr)
        else:
            flo = x1
            x1 = x2
            f1 = f2
            x2 = flo + GOLDEN * (fhi - flo)
            lo, hi = _g_bracket(x2, g_ref, g_half, with_bc)
            _, f2 = _golden_g(x2, lo, hi, iters_g, q, cr, M, hr)
    f = 0.5 * (flo + fhi)
    lo, hi = _g_bracket(f, g_ref, g_half, with_bc)
    g, _ = _golden_g(f, lo, hi, iters_g, q, cr, M, hr)
    return f, g


@njit(cache=True)
def _recentre(c, M, q, f, g, cr, hr):
    hr[0] = f - g
    hr[1] = q - f
    hr[2] = g
    base = 0.0
    for p in range(3):
        cost = c[p]
        for s in range(3):
            cost += M[p, s] * hr[s]
        cr[p] = cost
    base = cr[0]
    for p in range(3):
        cr[p] -= base


@njit(cache=True)
def golden_jit(alpha, beta, q, npaths, out_fg):
    n = alpha.shape[0]
    c = np.empty(3)
    M = np.empty((3, 3))
    cr = np.empty(3)
    hr = np.empty(3)
    with_bc = npaths == 3
    for i in range(n):
        _assemble_one(alpha[i], beta[i], c, M)
        Q = q[i]
        _recentre(c, M, Q, 0.5 * Q, 0.25 * Q if with_bc else 0.0, cr, hr)
        f1, g1 = _golden_pass(
            0.0, Q, ITERS_PASS1, ITERS_PASS1, 0.0, -1.0, with_bc, Q, cr, M, hr
        )
        _recentre(c, M, Q, f1, g1, cr, hr)
        w = PASS2_HALF_WIDTH * Q
        f, g = _golden_pass(
            max(0.0, f1 - w), min(Q, f1 + w), ITERS_PASS2, ITERS_PASS2_INNER,
            g1, 3.0 * w, with_bc, Q, cr, M, hr,
        )
        out_fg[i, 0] = f
        out_fg[i, 1] = g


# ------------------------------------------------------------------ numpy


def _supports(npaths: int) -> list[list[int]]:
    return [[p for p in range(npaths) if mask & (1 << p)] for mask in range(1, 1 << npaths)]


def kkt_residual_np(c, M, h, lam, npaths):
    cost = c[:, :npaths] + np.einsum("nij,nj->ni", M[:, :npaths, :npaths], h[:, :npaths])
    used = h[:, :npaths] > 0
    r = np.where(used, np.abs(cost - lam[:, None]), np.maximum(0.0, lam[:, None] - cost))
    r = np.maximum(r, -h[:, :npaths])
    return r.max(axis=1)


def active_set_numpy(alpha, beta, q, npaths, out_h, out_t, out_res):
    c, M = path_system(alpha, beta)
    n = alpha.shape[0]
    best = np.full(n, np.inf)
    out_t[:] = np.nan
    out_res[:] = np.inf
    for used in _supports(npaths):
        k = len(used)
        A = np.zeros((n, k + 1, k + 1))
        A[:, :k, :k] = M[:, used][:, :, used]
        A[:, :k, k] = -1.0
        A[:, k, :k] = 1.0
        rhs = np.zeros((n, k + 1))
        rhs[:, :k] = -c[:, used]
        rhs[:, k] = q
        scale = np.abs(A).max(axis=(1, 2))
        singular = np.abs(np.linalg.det(A)) <= 1e-14 * scale ** (k + 1)
        A[singular] = np.eye(k + 1)
        sol = np.linalg.solve(A, rhs[..., None])[..., 0]
        h = np.zeros((n, 3))
        h[:, used] = sol[:, :k]
        lam = sol[:, k]
        res = kkt_residual_np(c, M, h, lam, npaths)
        score = np.where(singular, np.inf, res / (1.0 + np.abs(lam)))
        better = score < best
        best = np.where(better, score, best)
        out_h[better] = h[better]
        out_t[better] = lam[better]
        out_res[better] = res[better]


def _phi_np(f, g, q, cr, M, hr):
    d = np.stack([(f - g) - hr[:, 0], (q - f) - hr[:, 1], g - hr[:, 2]], axis=1)
    quad = np.einsum("ni,nij,nj->n", d, M, d)
    return np.einsum("ni,ni->n", cr, d) + 0.5 * quad


def _golden_np(fun, lo, hi, iters):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        new_x = np.where(left, hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo))
        x1, x2 = np.where(left, new_x, x2), np.where(left, x1, new_x)
        f_new = fun(new_x)
        f1, f2 = np.where(left, f_new, f2), np.where(left, f1, f_new)
    return 0.5 * (lo + hi)


def _g_bracket_np(f, g_ref, half, with_bc):
    if not with_bc:
        z = np.zeros_like(f)
        return z, z
    if half is None:
        return np.zeros_like(f), f
    hi = np.minimum(f, g_ref + half)
    lo = np.minimum(np.maximum(0.0, g_ref - half), hi)
    return lo, hi


def _golden_pass_np(flo, fhi, iters_f, iters_g, g_ref, g_half, with_bc, q, cr, M, hr):
    def inner(f):
        lo, hi = _g_bracket_np(f, g_ref, g_half, with_bc)
        g = _golden_np(lambda gg: _phi_np(f, gg, q, cr, M, hr), lo, hi, iters_g)
        return g

    def outer(f):
        return _phi_np(f, inner(f), q, cr, M, hr)

    f = _golden_np(outer, flo, fhi, iters_f)
    return f, inner(f)


def _recentre_np(c, M, q, f, g):
    hr = np.stack([f - g, q - f, g], axis=1)
    cr = c + np.einsum("nij,nj->ni", M, hr)
    return cr - cr[:, :1], hr


def golden_numpy(alpha, beta, q, npaths, out_fg):
    c, M = path_system(alpha, beta)
    with_bc = npaths == 3
    g0 = 0.25 * q if with_bc else np.zeros_like(q)
    cr, hr = _recentre_np(c, M, q, 0.5 * q, g0)
    f1, g1 = _golden_pass_np(
        np.zeros_like(q), q.copy(), ITERS_PASS1, ITERS_PASS1, None, None, with_bc, q, cr, M, hr
    )
    cr, hr = _recentre_np(c, M, q, f1, g1)
    w = PASS2_HALF_WIDTH * q
    f, g = _golden_pass_np(
        np.maximum(0.0, f1 - w), np.minimum(q, f1 + w), ITERS_PASS2, ITERS_PASS2_INNER,
        g1, 3.0 * w, with_bc, q, cr, M, hr,
    )
    out_fg[:, 0] = f
    out_fg[:, 1] = g


# --------------------------------------------------------------- dispatch


def _prep(alpha, beta, q):
    alpha = np.ascontiguousarray(np.nan_to_num(np.asarray(alpha, dtype=np.float64)))
    beta = np.ascontiguousarray(np.nan_to_num(np.asarray(beta, dtype=np.float64)))
    q = np.ascontiguousarray(np.asarray(q, dtype=np.float64).reshape(-1))
    if alpha.ndim == 1:
        alpha = np.broadcast_to(alpha, (q.size, 5)).copy()
        beta = np.broadcast_to(beta, (q.size, 5)).copy()
    return alpha, beta, q


def active_set(alpha, beta, q, npaths, *, use_numba: bool | None = None):
    """Return ``(h, T, residual)`` for every problem in the batch."""
    alpha, beta, q = _prep(alpha, beta, q)
    n = q.size
    h = np.zeros((n, 3))
    t = np.empty(n)
    res = np.empty(n)
    jit = numba_enabled() if use_numba is None else (use_numba and NUMBA_AVAILABLE)
    (active_set_jit if jit else active_set_numpy)(alpha, beta, q, npaths, h, t, res)
    return h, t, res


def golden(alpha, beta, q, npaths, *, use_numba: bool | None = None):
    """Return ``(f, g)`` minimising the potential over 0 <= g <= f <= Q for every problem."""
    alpha, beta, q = _prep(alpha, beta, q)
    fg = np.zeros((q.size, 2))
    jit = numba_enabled() if use_numba is None else (use_numba and NUMBA_AVAILABLE)
    (golden_jit if jit else golden_numpy)(alpha, beta, q, npaths, fg)
    return fg[:, 0], fg[:, 1]
