"""Hot loops for shooting and kernel assembly, compiled and numpy variants.

Shooting output layout (length ``n+1``): entry ``j`` holds the pair
``(g_j, gamma_{j-1})`` as mantissas ``g[j]``, ``c[j]`` with a shared
natural-log scale ``L[j]``; true values are ``g[j] * exp(L[j])``.
"""
from __future__ import annotations

import math

import numpy as np

from ._jit import njit, nb

RESCALE_EVERY = 64


@njit
def _shoot_forward_jit(a, dxi, v0, v1, block):
    n = a.shape[0]
    g = np.empty(n + 1)
    c = np.empty(n + 1)
    L = np.empty(n + 1)
    x, y, s = v0, v1, 0.0
    g[0], c[0], L[0] = x, y, s
    for j in range(n):
        cj = a[j] * dxi
        x, y = (1.0 + cj * cj) * x + cj * y, cj * x + y
        if (j + 1) % block == 0:
            m = max(abs(x), abs(y))
            x /= m
            y /= m
            s += math.log(m)
        g[j + 1], c[j + 1], L[j + 1] = x, y, s
    return g, c, L


@njit
def _shoot_backward_jit(a, dxi, w0, w1, block):
    # w = (g_j, -gamma_{j-1}) evolves by the backward matrix [[1, c], [c, 1 + c^2]]
    n = a.shape[0]
    g = np.empty(n + 1)
    c = np.empty(n + 1)
    L = np.empty(n + 1)
    x, y, s = w0, w1, 0.0
    g[n], c[n], L[n] = x, -y, s
    for k in range(n):
        j = n - 1 - k
        cj = a[j] * dxi
        x, y = x + cj * y, cj * x + (1.0 + cj * cj) * y
        if (k + 1) % block == 0:
            m = max(abs(x), abs(y))
            x /= m
            y /= m
            s += math.log(m)
        g[j], c[j], L[j] = x, -y, s
    return g, c, L


def _shoot_forward_np(a, dxi, v0, v1, block):
    n = a.shape[0]
    g = np.empty(n + 1)
    c = np.empty(n + 1)
    L = np.empty(n + 1)
    x, y, s = v0, v1, 0.0
    g[0], c[0], L[0] = x, y, s
    cs = (a * dxi).tolist()
    for j, cj in enumerate(cs):
        x, y = (1.0 + cj * cj) * x + cj * y, cj * x + y
        if (j + 1) % block == 0:
            m = max(abs(x), abs(y))
            x /= m
            y /= m
            s += math.log(m)
        g[j + 1], c[j + 1], L[j + 1] = x, y, s
    return g, c, L


def _shoot_backward_np(a, dxi, w0, w1, block):
    n = a.shape[0]
    g = np.empty(n + 1)
    c = np.empty(n + 1)
    L = np.empty(n + 1)
    x, y, s = w0, w1, 0.0
    g[n], c[n], L[n] = x, -y, s
    cs = (a * dxi).tolist()
    for k in range(n):
        j = n - 1 - k
        cj = cs[j]
        x, y = x + cj * y, cj * x + (1.0 + cj * cj) * y
        if (k + 1) % block == 0:
            m = max(abs(x), abs(y))
            x /= m
            y /= m
            s += math.log(m)
        g[j], c[j], L[j] = x, -y, s
    return g, c, L


_prange = nb.prange if nb is not None else range


@njit(parallel=True)
def _assemble_jit(gm, cm, lgm, lcm, gp, cp, lgp, lcp, logw, G, K, GA, KA):
    # Entry (i, j): source i, evaluation j. Window gamma_j uses shot index j+1.
    n = gm.shape[0]
    for i in _prange(n):
        e_g = e_c = e_k = e_q = np.inf
        f_g = f_c = f_k = f_q = 0.0
        for j in range(n):
            if j >= i:
                t = lgm[j] + lgp[i] - logw
                if t != e_g:
                    e_g, f_g = t, math.exp(t)
                G[i, j] = gm[j] * gp[i] * f_g
                t = lcm[j] + lgp[i] - logw
                if t != e_c:
                    e_c, f_c = t, math.exp(t)
                GA[i, j] = cm[j] * gp[i] * f_c
            else:
                t = lgp[j] + lgm[i] - logw
                if t != e_g:
                    e_g, f_g = t, math.exp(t)
                G[i, j] = gp[j] * gm[i] * f_g
                t = lcp[j] + lgm[i] - logw
                if t != e_c:
                    e_c, f_c = t, math.exp(t)
                GA[i, j] = cp[j] * gm[i] * f_c
            if j > i:
                t = lcm[j] + lcp[i] - logw
                if t != e_k:
                    e_k, f_k = t, math.exp(t)
                K[i, j] = -cm[j] * cp[i] * f_k
                t = lgm[j] + lcp[i] - logw
                if t != e_q:
                    e_q, f_q = t, math.exp(t)
                KA[i, j] = -gm[j] * cp[i] * f_q
            else:
                t = lcp[j] + lcm[i] - logw
                if t != e_k:
                    e_k, f_k = t, math.exp(t)
                K[i, j] = -cp[j] * cm[i] * f_k
                t = lgp[j] + lcm[i] - logw
                if t != e_q:
                    e_q, f_q = t, math.exp(t)
                KA[i, j] = -gp[j] * cm[i] * f_q


def _assemble_np(gm, cm, lgm, lcm, gp, cp, lgp, lcp, logw, G, K, GA, KA):
    n = gm.shape[0]
    upper = np.triu(np.ones((n, n), dtype=bool))       # j >= i
    strict = np.triu(np.ones((n, n), dtype=bool), 1)   # j > i

    def outer(rows, lrows, cols, lcols):
        with np.errstate(over="ignore", invalid="ignore"):
            return rows[:, None] * cols[None, :] * np.exp(lrows[:, None] + lcols[None, :] - logw)

    G[...] = np.where(upper, outer(gp, lgp, gm, lgm), outer(gm, lgm, gp, lgp))
    GA[...] = np.where(upper, outer(gp, lgp, cm, lcm), outer(gm, lgm, cp, lcp))
    K[...] = -np.where(strict, outer(cp, lcp, cm, lcm), outer(cm, lcm, cp, lcp))
    KA[...] = -np.where(strict, outer(cp, lcp, gm, lgm), outer(cm, lcm, gp, lgp))


def shoot_forward(a, dxi, v0, v1, jit=True, block=RESCALE_EVERY):
    f = _shoot_forward_jit if jit else _shoot_forward_np
    return f(np.ascontiguousarray(a, dtype=float), float(dxi), float(v0), float(v1), int(block))


def shoot_backward(a, dxi, w0, w1, jit=True, block=RESCALE_EVERY):
    f = _shoot_backward_jit if jit else _shoot_backward_np
    return f(np.ascontiguousarray(a, dtype=float), float(dxi), float(w0), float(w1), int(block))


def assemble(gm, cm, lgm, lcm, gp, cp, lgp, lcp, logw, jit=True):
    n = gm.shape[0]
    out = [np.empty((n, n)) for _ in range(4)]
    f = _assemble_jit if jit else _assemble_np
    args = [np.ascontiguousarray(x, dtype=float) for x in (gm, cm, lgm, lcm, gp, cp, lgp, lcp)]
    f(*args, float(logw), *out)
    return tuple(out)  # g, k, gamma, kappa


@njit
def _apply_rq_jit(gm, cm, lgm, lcm, gp, cp, lgp, lcp, logw, f1, f2, dxi):
    # O(n) evaluation of R = gamma*f1 + k*f2 and Q = g*f1 + kappa*f2 using the
    # rank-one structure of each triangle. Running sums are kept in units of
    # the current index's log-scale so nothing overflows.
    n = gm.shape[0]
    pg = np.empty(n)   # sum_{i<=j} f1_i g+_i        units exp(lgp[j])
    pc = np.empty(n)   # sum_{i<j}  f2_i gamma+_i    units exp(lcp[j])
    sg = np.empty(n)   # sum_{i>j}  f1_i g-_i        units exp(lgm[j])
    sc = np.empty(n)   # sum_{i>=j} f2_i gamma-_i    units exp(lcm[j])
    acc_g = 0.0
    acc_c = 0.0
    for j in range(n):
        if j > 0:
            acc_g *= math.exp(lgp[j - 1] - lgp[j])
            acc_c = (acc_c + f2[j - 1] * cp[j - 1]) * math.exp(lcp[j - 1] - lcp[j])
        acc_g += f1[j] * gp[j]
        pg[j] = acc_g
        pc[j] = acc_c
    acc_g = 0.0
    acc_c = 0.0
    for k in range(n):
        j = n - 1 - k
        if j < n - 1:
            acc_g = (acc_g + f1[j + 1] * gm[j + 1]) * math.exp(lgm[j + 1] - lgm[j])
            acc_c *= math.exp(lcm[j + 1] - lcm[j])
        acc_c += f2[j] * cm[j]
        sg[j] = acc_g
        sc[j] = acc_c
    R = np.empty(n)
    Q = np.empty(n)
    for j in range(n):
        Q[j] = dxi * (gm[j] * pg[j] * math.exp(lgm[j] + lgp[j] - logw)
                      - gm[j] * pc[j] * math.exp(lgm[j] + lcp[j] - logw)
                      + gp[j] * sg[j] * math.exp(lgp[j] + lgm[j] - logw)
                      - gp[j] * sc[j] * math.exp(lgp[j] + lcm[j] - logw))
        R[j] = dxi * (cm[j] * pg[j] * math.exp(lcm[j] + lgp[j] - logw)
                      - cm[j] * pc[j] * math.exp(lcm[j] + lcp[j] - logw)
                      + cp[j] * sg[j] * math.exp(lcp[j] + lgm[j] - logw)
                      - cp[j] * sc[j] * math.exp(lcp[j] + lcm[j] - logw))
    return R, Q


def apply_rq(gm, cm, lgm, lcm, gp, cp, lgp, lcp, logw, f1, f2, dxi):
    args = [np.ascontiguousarray(x, dtype=float) for x in (gm, cm, lgm, lcm, gp, cp, lgp, lcp)]
    return _apply_rq_jit(*args, float(logw), np.ascontiguousarray(f1, dtype=float),
                         np.ascontiguousarray(f2, dtype=float), float(dxi))
