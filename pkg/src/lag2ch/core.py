"""Uniform label grid, one-sided differences, windowed norms and kernel action.

Fields live on a finite window of ``n`` cells. Neighbours outside the
window are supplied by a ghost policy: a fixed constant, ``"clamp"``
(repeat the edge value) or ``"linear"`` (extend with the edge slope).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

Ghost = Union[float, str]
NORM_KINDS = ("l1", "l2", "linf", "h1", "Vd")


@dataclass(frozen=True)
class Grid:
    n: int
    dxi: float
    xi0: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid.n must be an integer >= 3, got {self.n}")
        if not (np.isfinite(self.dxi) and self.dxi > 0):
            raise ValueError(f"grid.dxi must be positive, got {self.dxi}")
        if not np.isfinite(self.xi0):
            raise ValueError("grid.xi0 must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "dxi", float(self.dxi))
        object.__setattr__(self, "xi0", float(self.xi0))

    @property
    def xi(self) -> np.ndarray:
        return self.xi0 + self.dxi * np.arange(self.n)

    def xi_at(self, j):
        return self.xi0 + self.dxi * np.asarray(j)

    @property
    def xi_end(self) -> float:
        """Label of the right ghost node, ``xi0 + n*dxi``."""
        return self.xi0 + self.n * self.dxi

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.n * factor, self.dxi / factor, self.xi0)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Window values plus the ghost policy used for out-of-window neighbours."""

    values: np.ndarray
    grid: Grid
    left: Ghost = 0.0
    right: Ghost = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        for g in (self.left, self.right):
            if isinstance(g, str):
                if g not in ("clamp", "linear"):
                    raise ValueError(f"unknown ghost policy {g!r}")
            elif not np.isfinite(g):
                raise ValueError("ghost values must be finite")
        object.__setattr__(self, "values", v)

    def ghost_left(self) -> float:
        v = self.values
        if self.left == "clamp":
            return float(v[0])
        if self.left == "linear":
            return float(2 * v[0] - v[1])
        return float(self.left)

    def ghost_right(self) -> float:
        v = self.values
        if self.right == "clamp":
            return float(v[-1])
        if self.right == "linear":
            return float(2 * v[-1] - v[-2])
        return float(self.right)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_values(v) -> np.ndarray:
    if isinstance(v, GridFunction):
        return v.values
    return np.asarray(v, dtype=float)


def dplus(v: np.ndarray, dxi: float, right: float = 0.0) -> np.ndarray:
    """Forward difference of a plain array with a constant right neighbour."""
    out = np.empty_like(v)
    out[:-1] = v[1:] - v[:-1]
    out[-1] = right - v[-1]
    return out / dxi


def dminus(v: np.ndarray, dxi: float, left: float = 0.0) -> np.ndarray:
    """Backward difference of a plain array with a constant left neighbour."""
    out = np.empty_like(v)
    out[1:] = v[1:] - v[:-1]
    out[0] = v[0] - left
    return out / dxi


def _diff_ghost(v: GridFunction, side: str) -> float:
    pol = v.left if side == "left" else v.right
    if pol == "linear":
        return float(v.values[1] - v.values[0]) / v.grid.dxi if side == "left" \
            else float(v.values[-1] - v.values[-2]) / v.grid.dxi
    return 0.0


def fwd_diff(v: GridFunction) -> GridFunction:
    d = dplus(v.values, v.grid.dxi, v.ghost_right())
    return GridFunction(d, v.grid, _diff_ghost(v, "left"), _diff_ghost(v, "right"))


def bwd_diff(v: GridFunction) -> GridFunction:
    d = dminus(v.values, v.grid.dxi, v.ghost_left())
    return GridFunction(d, v.grid, _diff_ghost(v, "left"), _diff_ghost(v, "right"))


def lp_norm(values: np.ndarray, dxi: float, p: float) -> float:
    a = np.abs(values)
    if p == np.inf:
        return float(a.max()) if a.size else 0.0
    return float((dxi * np.sum(a ** p)) ** (1.0 / p))


def norm(v: GridFunction, kind: str) -> float:
    """Window-restricted norm; ``h1`` and ``Vd`` use ``D+`` with the ghost policy."""
    vals = v.values
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite value")
    dxi = v.grid.dxi
    if kind == "l1":
        return lp_norm(vals, dxi, 1)
    if kind == "l2":
        return lp_norm(vals, dxi, 2)
    if kind == "linf":
        return lp_norm(vals, dxi, np.inf)
    d = fwd_diff(v).values
    if kind == "h1":
        return float(np.sqrt(dxi * np.sum(vals ** 2 + d ** 2)))
    if kind == "Vd":
        return lp_norm(vals, dxi, np.inf) + lp_norm(d, dxi, 2)
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def kernel_apply(K: np.ndarray, f, grid: Grid | None = None) -> GridFunction:
    """``(K * f)_j = dxi * sum_i K[i, j] f_i``."""
    if isinstance(f, GridFunction):
        grid = f.grid
    if grid is None:
        raise ValueError("a Grid is required when f is a plain array")
    fv = as_values(f)
    K = np.asarray(K, dtype=float)
    if K.shape != (fv.size, fv.size):
        raise ValueError(f"dimension mismatch: kernel {K.shape} vs sequence {fv.shape}")
    return GridFunction(grid.dxi * (fv @ K), grid)


def operator_norm(K: np.ndarray, q: float, dxi: float, transpose: bool = False) -> float:
    """``sup_i (dxi * sum_j |K_ij|^q)^(1/q)``; ``transpose`` swaps the roles of i and j."""
    A = np.abs(np.asarray(K, dtype=float))
    if transpose:
        A = A.T
    if q == np.inf:
        return float(A.max())
    return float(np.max((dxi * np.sum(A ** q, axis=1)) ** (1.0 / q)))


def young_bound(K: np.ndarray, f: np.ndarray, dxi: float, r: float, p: float, q: float):
    """Both sides of ``||K*f||_r <= ||K||_q^(q/r) ||K^T||_q^(1-q/r) ||f||_p``.

    Requires ``1 + 1/r = 1/p + 1/q``. Conventions: ``q/inf = 0``, ``inf/inf = 1``.
    """
    inv = lambda s: 0.0 if s == np.inf else 1.0 / s
    if abs(1 + inv(r) - inv(p) - inv(q)) > 1e-12:
        raise ValueError("exponents must satisfy 1 + 1/r = 1/p + 1/q")
    f = np.asarray(f, dtype=float)
    lhs = lp_norm(dxi * (f @ K), dxi, r)
    if r == np.inf:
        theta = 1.0 if q == np.inf else 0.0
    else:
        theta = q / r
    rhs = 1.0
    if theta > 0:
        rhs *= operator_norm(K, q, dxi) ** theta
    if theta < 1:
        rhs *= operator_norm(K, q, dxi, transpose=True) ** (1 - theta)
    return lhs, rhs * lp_norm(f, dxi, p)
