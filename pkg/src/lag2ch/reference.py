"""Slow, independent oracles for the test suite.

Nothing here calls the shooting or assembly code in :mod:`lag2ch.greens`;
the kernels are obtained from one sparse linear system per kernel pair,
with boundary closures taken from a numerically computed eigenbasis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate as si
import scipy.sparse as sp
import scipy.sparse.linalg as spla


@dataclass(frozen=True)
class OracleConfig:
    quad_limit: int = 400
    quad_rtol: float = 1e-11
    fd_eps: float = 1e-5
    decay_probe: float = 200.0

    def __post_init__(self):
        if self.quad_limit <= 0 or self.quad_rtol <= 0 or self.fd_eps <= 0 or self.decay_probe <= 0:
            raise ValueError("oracle parameters must be positive")


def _closure_vectors(dxi: float):
    # eigenbasis of the constant forward transfer matrix, via LAPACK
    c = dxi
    A = np.array([[1 + c * c, c], [c, 1.0]])
    w, V = np.linalg.eigh(A)
    return V[:, 0], V[:, 1]  # decaying to the right, decaying to the left


def _assemble_system(a: np.ndarray, dxi: float) -> sp.csc_matrix:
    """2n+2 unknowns ``(p_0..p_n, q_{-1}..q_{n-1})`` for

        a_j p_j - (q_j - q_{j-1})/dxi = rhs_j,    a_j q_j - (p_{j+1} - p_j)/dxi = 0,

    closed by ``(p_0, q_{-1})`` on the left-decaying and ``(p_n, q_{n-1})``
    on the right-decaying eigenvector. With ``p = g, q = gamma`` this is the
    g-system; with ``p = kappa, q = k`` the roles of the two rows swap.
    """
    n = a.size
    P = lambda j: j            # p_j, j = 0..n
    Q = lambda j: n + 2 + j    # q_j, j = -1..n-1
    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(r), cols.append(c), vals.append(v)

    for j in range(n):
        put(j, P(j), a[j])
        put(j, Q(j), -1 / dxi)
        put(j, Q(j - 1), 1 / dxi)
        put(n + j, Q(j), a[j])
        put(n + j, P(j + 1), -1 / dxi)
        put(n + j, P(j), 1 / dxi)
    r_right, r_left = _closure_vectors(dxi)
    put(2 * n, P(0), r_left[1])
    put(2 * n, Q(-1), -r_left[0])
    put(2 * n + 1, P(n), r_right[1])
    put(2 * n + 1, Q(n - 1), -r_right[0])
    return sp.csc_matrix((vals, (rows, cols)), shape=(2 * n + 2, 2 * n + 2))


def _factor(a, dxi):
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError("negative coefficient")
    M = _assemble_system(a, dxi)
    try:
        return spla.splu(M)
    except RuntimeError as exc:
        raise np.linalg.LinAlgError(f"singular oracle assembly: {exc}") from exc


def solve_gg_column(a, dxi: float, i: int):
    """Row ``i`` of ``(g, gamma)`` by a single sparse solve."""
    a = np.asarray(a, dtype=float)
    n = a.size
    lu = _factor(a, dxi)
    rhs = np.zeros(2 * n + 2)
    rhs[i] = 1 / dxi
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("oracle solve produced non-finite values")
    return x[:n], x[n + 2:2 * n + 2]


def oracle_kernels(a, dxi: float):
    """All four kernels from two sparse factorizations with n right-hand sides each."""
    from .greens import KernelSet  # container only

    a = np.asarray(a, dtype=float)
    n = a.size
    lu = _factor(a, dxi)
    # g-system: source in the first block row
    rhs = np.zeros((2 * n + 2, n))
    rhs[np.arange(n), np.arange(n)] = 1 / dxi
    X = lu.solve(rhs)
    g = X[:n].T.copy()
    gam = X[n + 2:2 * n + 2].T.copy()
    # k-system: same matrix with (p, q) = (kappa, k); source in the second block row
    rhs = np.zeros((2 * n + 2, n))
    rhs[n + np.arange(n), np.arange(n)] = 1 / dxi
    X = lu.solve(rhs)
    kap = X[:n].T.copy()
    k = X[n + 2:2 * n + 2].T.copy()
    for M in (g, gam, k, kap):
        if not np.all(np.isfinite(M)):
            raise np.linalg.LinAlgError("oracle solve produced non-finite values")
    return KernelSet(g, k, gam, kap, a.copy(), float(dxi))


def oracle_energy(u, ux, rho=None, rho_inf: float = 0.0, breakpoints=(), config: OracleConfig | None = None) -> float:
    """``1/2 int (u^2 + u_x^2) dx + 1/2 int (rho - rho_inf)^2 dx`` by adaptive quadrature.

    ``breakpoints`` lists kinks to split the integral at. Raises when the
    integrand has not decayed at ``+-config.decay_probe``.
    """
    cfg = config or OracleConfig()

    def dens(x):
        v = u(x) ** 2 + ux(x) ** 2
        if rho is not None:
            v += (rho(x) - rho_inf) ** 2
        return 0.5 * v

    for x in (-cfg.decay_probe, cfg.decay_probe):
        if not abs(dens(x)) < 1e-14:
            raise ValueError("non-decaying spec: integrand does not vanish at infinity")
    pts = sorted(float(b) for b in breakpoints)
    edges = [-np.inf] + pts + [np.inf] if pts else [-np.inf, 0.0, np.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = si.quad(dens, lo, hi, limit=cfg.quad_limit, epsabs=0.0, epsrel=cfg.quad_rtol)
        total += val
    return float(total)


def _flat(v) -> np.ndarray:
    if isinstance(v, (tuple, list)):
        return np.concatenate([np.ravel(np.asarray(x, dtype=float)) for x in v])
    return np.ravel(np.asarray(v, dtype=float))


def fd_check(f, x, direction, derivative, eps: float | None = None) -> float:
    """Relative error of the central difference of ``f`` along ``direction`` against ``derivative``.

    ``f`` may return an array or a tuple of arrays; ``x`` and ``direction``
    must support ``x + eps * direction``.
    """
    eps = OracleConfig().fd_eps if eps is None else eps
    fp = _flat(f(x + eps * direction))
    fm = _flat(f(x - eps * direction))
    fd = (fp - fm) / (2 * eps)
    d = _flat(derivative)
    return float(np.max(np.abs(fd - d)) / max(np.max(np.abs(d)), 1e-300))
