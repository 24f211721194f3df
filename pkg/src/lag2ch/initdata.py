"""Lagrangian initial data from Eulerian (u0, rho0, atoms), plus scenario builders.

The energy measure is ``mu = (u0^2 + u0_x^2 + (rho0 - rho_inf)^2) dx + sum a_i delta_{x_i}``
and labels come from the generalized inverse of ``F(x) = mu((-inf, x)) + x``,
so that ``D+y + 2h = 1`` up to discretization and an atom of mass ``a``
becomes a plateau of label length ``a`` carrying energy ``a/2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Grid, dplus
from .dynamics import LagrangianState

PLATEAU_EPS = 1e-12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: tuple = ()

    def __post_init__(self):
        atoms = tuple((float(x), float(m)) for x, m in self.atoms)
        xs = [x for x, _ in atoms]
        if any(m < 0 or not np.isfinite(m) for _, m in atoms):
            raise ValueError("atom masses must be finite and nonnegative")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("atom positions must be strictly increasing")
        object.__setattr__(self, "atoms", atoms)

    @property
    def total(self) -> float:
        return float(sum(m for _, m in self.atoms))


def _table_fn(tab):
    x, v = (np.asarray(t, dtype=float) for t in tab)
    if x.ndim != 1 or x.shape != v.shape or np.any(np.diff(x) <= 0):
        raise ValueError("tables need strictly increasing positions and matching values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise ValueError("tables must be finite")
    return lambda s: np.interp(s, x, v, left=v[0], right=v[-1])


def _table_slope(tab):
    x, v = (np.asarray(t, dtype=float) for t in tab)
    slope = np.diff(v) / np.diff(x)

    def f(s):
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(x, s, side="right") - 1, 0, slope.size - 1)
        return np.where((s < x[0]) | (s > x[-1]), 0.0, slope[k])
    return f


@dataclass
class EulerianInit:
    """Eulerian data. ``u0``/``rho0`` may be callables or ``(positions, values)`` tables.

    ``support`` bounds the region where the energy density is integrated;
    outside it the data are treated as exactly at rest. ``breakpoints`` are
    kinks that the quadrature nodes must include.
    """

    u0: Callable | tuple
    support: tuple
    rho0: Callable | tuple | None = None
    rho_inf: float = 0.0
    u0x: Callable | None = None
    mu_sing: AtomicMeasure = field(default_factory=AtomicMeasure)
    breakpoints: Sequence[float] = ()

    def __post_init__(self):
        lo, hi = map(float, self.support)
        if not lo < hi:
            raise ValueError("support must be an increasing interval")
        self.support = (lo, hi)
        if self.rho_inf < 0:
            raise ValueError("rho_inf must be nonnegative")
        bps = list(self.breakpoints)
        if not callable(self.u0):
            if self.u0x is None:
                self.u0x = _table_slope(self.u0)
            bps += list(np.asarray(self.u0[0], dtype=float))
            self.u0 = _table_fn(self.u0)
        if self.u0x is None:
            f = self.u0
            self.u0x = lambda s, f=f: (f(np.asarray(s) + 1e-6) - f(np.asarray(s) - 1e-6)) / 2e-6
        if self.rho0 is None:
            r = self.rho_inf
            self.rho0 = lambda s, r=r: np.full_like(np.asarray(s, dtype=float), r)
        elif not callable(self.rho0):
            bps += list(np.asarray(self.rho0[0], dtype=float))
            self.rho0 = _table_fn(self.rho0)
        self.breakpoints = tuple(b for b in bps if lo < b < hi)
        for x, _ in self.mu_sing.atoms:
            if not lo <= x <= hi:
                raise ValueError(f"atom at {x} lies outside the support")

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return self.u0(x) ** 2 + self.u0x(x) ** 2 + (self.rho0(x) - self.rho_inf) ** 2


def _cumulative_F(init: EulerianInit, dxi: float):
    """Nodes of the piecewise-linear ``F`` (trapezoid on 4x refined sampling; atoms as jumps)."""
    lo, hi = init.support
    m = max(int(np.ceil(4 * (hi - lo) / dxi)), 8)
    xs = np.unique(np.concatenate([np.linspace(lo, hi, m + 1), init.breakpoints,
                                   [x for x, _ in init.mu_sing.atoms]]))
    # one-sided limits at kinks: evaluate slightly inside each interval
    left_d = init.density(xs[1:] - 1e-13 * np.maximum(1, np.abs(xs[1:])))
    right_d = init.density(xs[:-1] + 1e-13 * np.maximum(1, np.abs(xs[:-1])))
    inc = 0.5 * np.diff(xs) * (right_d + left_d)
    if not np.all(np.isfinite(inc)):
        raise ValueError("non-finite energy density")
    mu = np.concatenate([[0.0], np.cumsum(inc)])
    X, Fv = [], []
    atoms = dict(init.mu_sing.atoms)
    jump = 0.0
    for x, c in zip(xs, mu):
        X.append(x)
        Fv.append(x + c + jump)
        if x in atoms and atoms[x] > 0:
            jump += atoms[x]
            X.append(x)
            Fv.append(x + c + jump)
    return np.array(X), np.array(Fv), float(mu[-1] + jump)


def lagrangian_from_eulerian(init: EulerianInit, grid: Grid, margin: float | None = None) -> LagrangianState:
    lo, hi = init.support
    dxi = grid.dxi
    margin = 2 * dxi if margin is None else margin
    X, Fv, mu_tot = _cumulative_F(init, dxi)
    if grid.xi0 > lo - margin or grid.xi_end - mu_tot < hi + margin:
        raise ValueError(
            f"window too small: labels [{grid.xi0:.6g}, {grid.xi_end:.6g}] must cover "
            f"support [{lo:.6g}, {hi:.6g}] plus total mass {mu_tot:.6g} and margin {margin:.3g}")
    xi_nodes = np.append(grid.xi, grid.xi_end)
    y_nodes = np.interp(xi_nodes, Fv, X)
    y_nodes = np.where(xi_nodes <= Fv[0], xi_nodes, y_nodes)
    y_nodes = np.where(xi_nodes >= Fv[-1], xi_nodes - mu_tot, y_nodes)
    y_nodes = np.maximum.accumulate(y_nodes)  # interpolation roundoff on plateaus
    zeta_right = float(y_nodes[-1] - xi_nodes[-1])
    y = y_nodes[:-1]
    U = np.asarray(init.u0(y), dtype=float)
    # cell averages of rbar: (1/dxi) * integral of (rho0 - rho_inf) over [y_j, y_{j+1}]
    ya, yb = y_nodes[:-1], y_nodes[1:]
    half = 0.5 * (yb - ya)
    pts = 0.5 * (ya + yb)[:, None] + half[:, None] * _GL_X[None, :]
    rb = (init.rho0(pts) - init.rho_inf) @ _GL_W * half / dxi
    Dy = np.diff(y_nodes) / dxi
    DU = dplus(U, dxi, 0.0)
    flat = Dy <= PLATEAU_EPS
    safe = np.where(flat, 1.0, Dy)
    h = np.where(flat, 0.5, 0.5 * (U ** 2 * Dy + (DU ** 2 + rb ** 2) / safe))
    rb = np.where(flat, 0.0, rb)
    H = dxi * np.concatenate([[0.0], np.cumsum(h)[:-1]])
    H_inf = dxi * float(np.sum(h))
    return LagrangianState(grid, y - grid.xi, U, H, rb, H_inf, init.rho_inf, zeta_right)


def smooth_init(u0: Callable, rho0: Callable | None, grid: Grid, rho_inf: float = 0.0,
                u0x: Callable | None = None) -> LagrangianState:
    """Identity labelling ``y = xi``; ``h = 1/2 (U^2 + (D+U)^2 + rbar^2)``.

    ``u0x`` is accepted for interface symmetry and unused: the discrete
    energy uses ``D+U``.
    """
    xi = grid.xi
    U = np.asarray(u0(xi), dtype=float)
    rb = np.zeros(grid.n) if rho0 is None else np.asarray(rho0(xi), dtype=float) - rho_inf
    DU = dplus(U, grid.dxi, 0.0)
    h = 0.5 * (U ** 2 + DU ** 2 + rb ** 2)
    H = grid.dxi * np.concatenate([[0.0], np.cumsum(h)[:-1]])
    return LagrangianState(grid, np.zeros(grid.n), U, H, rb, grid.dxi * float(np.sum(h)), rho_inf, 0.0)


def peakon_profile(p: float, x1: float, x2: float):
    """``u0 = p e^{-|x-x1|} - p e^{-|x-x2|}`` and its exact derivative away from the kinks."""
    def u(x):
        x = np.asarray(x, dtype=float)
        return p * np.exp(-np.abs(x - x1)) - p * np.exp(-np.abs(x - x2))

    def ux(x):
        x = np.asarray(x, dtype=float)
        return -p * np.sign(x - x1) * np.exp(-np.abs(x - x1)) + p * np.sign(x - x2) * np.exp(-np.abs(x - x2))
    return u, ux


def peakon_pair(p: float, x1: float, x2: float, rho_const: float, grid: Grid,
                support_tol: float = 1e-4) -> LagrangianState:
    """Peakon at ``x1`` and antipeakon at ``x2`` on constant density ``rho_const``.

    The energy is integrated where ``|u0| > support_tol * |p|``; beyond that the
    data count as at rest.
    """
    if not x1 < x2:
        raise ValueError("need x1 < x2")
    tail = np.log(1.0 / support_tol)
    u, ux = peakon_profile(p, x1, x2)
    init = EulerianInit(u0=u, u0x=ux, support=(x1 - tail, x2 + tail), rho_inf=rho_const,
                        breakpoints=(x1, x2))
    return lagrangian_from_eulerian(init, grid)


def gaussian(amplitude: float = 1.0, center: float = 0.0, width: float = 1.0):
    def f(x):
        return amplitude * np.exp(-((np.asarray(x, dtype=float) - center) / width) ** 2)
    return f
