"""Continuum interpolants of grid solutions and their Eulerian pushforward."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import LagrangianState

PLATEAU_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class PiecewiseInterpolant:
    """Piecewise polynomial in the label variable.

    ``node``: linear through ``(xi_j, v_j)`` for j = 0..n (last node is the ghost);
    ``cell``: constant ``v_j`` on ``[xi_j, xi_{j+1})``;
    ``shifted``: linear through ``(xi_j, v_{j-1})`` with ``v_{-1}`` the left ghost.
    Outside the nodes, values are held at the end values.
    """

    kind: str
    xi: np.ndarray
    values: np.ndarray

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cell":
            dx = self.xi[1] - self.xi[0]
            j = np.clip(np.floor((s - self.xi[0]) / dx).astype(int), 0, self.values.size - 1)
            return self.values[j]
        return np.interp(s, self.xi, self.values)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cell":
            return np.zeros_like(s)
        dx = self.xi[1] - self.xi[0]
        slope = np.diff(self.values) / dx
        j = np.floor((s - self.xi[0]) / dx).astype(int)
        inside = (j >= 0) & (j < slope.size)
        return np.where(inside, slope[np.clip(j, 0, slope.size - 1)], 0.0)


def interpolants(state: LagrangianState, RQ=None) -> dict:
    g = state.grid
    nodes = np.append(g.xi, g.xi_end)
    out = {
        "zeta": PiecewiseInterpolant("node", nodes, np.append(state.zeta, state.zeta_right)),
        "U": PiecewiseInterpolant("node", nodes, np.append(state.U, 0.0)),
        "H": PiecewiseInterpolant("node", nodes, np.append(state.H, state.H_inf)),
        "rbar": PiecewiseInterpolant("cell", nodes, state.rbar.copy()),
        "y": PiecewiseInterpolant("node", nodes, state.y_nodes),
    }
    if RQ is not None:
        R, Q = RQ
        out["Q"] = PiecewiseInterpolant("node", nodes, np.append(Q, 0.0))
        out["R"] = PiecewiseInterpolant("shifted", nodes, np.concatenate([[0.0], R]))
    return out


@dataclass
class EulerianField:
    x: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    energy_density: np.ndarray
    rho_inf: float
    singular: np.ndarray
    atoms: list = field(default_factory=list)
    bin_edges: np.ndarray | None = None

    def total_energy(self) -> float:
        return float(np.sum(self.energy_density * np.diff(self.bin_edges)) + sum(m for _, m in self.atoms))


def _bin_edges(x):
    mid = 0.5 * (x[1:] + x[:-1])
    return np.concatenate([[x[0] - (mid[0] - x[0])], mid, [x[-1] + (x[-1] - mid[-1])]])


def push_to_eulerian(state: LagrangianState, x_samples, eps: float = PLATEAU_EPS) -> EulerianField:
    """Sample ``u`` and ``rho`` at ``x_samples`` and bin the energy measure.

    ``u`` uses the leftmost label mapped to ``x``. Cells with ``D+y <= eps``
    carry energy concentrated at a point; consecutive ones are merged and
    reported as ``(x, mass)`` atoms instead of being binned.
    """
    x = np.asarray(x_samples, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("x samples must be strictly increasing with at least two entries")
    g = state.grid
    dx = g.dxi
    yn = state.y_nodes
    Dy = np.diff(yn) / dx
    tol = 1e-12 * max(1.0, float(np.max(np.abs(Dy))))
    if Dy.min() < -tol:
        raise ValueError(f"label map not monotone: D+y = {Dy.min():.3e}")
    yn = np.maximum.accumulate(yn)
    Dy = np.diff(yn) / dx
    nodes = np.append(g.xi, g.xi_end)
    Un = np.append(state.U, 0.0)

    k = np.searchsorted(yn, x, side="left")
    inside = (k > 0) & (k <= g.n)
    kk = np.clip(k, 1, g.n)
    c = kk - 1
    ya, yb = yn[c], yn[kk]
    exact = yn[np.clip(k, 0, g.n)] == x
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(yb > ya, (x - ya) / (yb - ya), 1.0)
    s = np.where(exact, nodes[np.clip(k, 0, g.n)], nodes[c] + frac * dx)
    u = np.where(inside | exact, np.interp(s, nodes, Un), 0.0)

    flat = Dy <= eps
    cell = np.where(exact & (k < g.n), np.clip(k, 0, g.n - 1), c)
    singular = inside & (flat[cell] | (exact & (k < g.n) & flat[np.clip(k, 0, g.n - 1)]))
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(inside & ~singular, state.rbar[cell] / Dy[cell] + state.rho_inf, state.rho_inf)
    rho = np.where(singular, np.nan, rho)

    h = state.h
    mass = dx * np.where(flat, 0.0, h)
    E = np.concatenate([[0.0], np.cumsum(mass)])
    edges = _bin_edges(x)
    edens = np.diff(np.interp(edges, yn, E)) / np.diff(edges)

    atoms = []
    j = 0
    while j < g.n:
        if flat[j]:
            m = 0.0
            x0 = yn[j]
            while j < g.n and flat[j]:
                m += dx * h[j]
                j += 1
            atoms.append((float(x0), float(m)))
        else:
            j += 1
    return EulerianField(x, u, rho, np.maximum(edens, 0.0), state.rho_inf, singular, atoms, edges)


def characteristics_export(traj, stride: int = 1) -> np.ndarray:
    """Rows ``(t, j, y_j(t))`` for every ``stride``-th label of every snapshot."""
    if not traj.snapshots:
        raise ValueError("empty trajectory")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    rows = []
    for t, st in zip(traj.times, traj.snapshots):
        j = np.arange(0, st.grid.n, stride)
        rows.append(np.column_stack([np.full(j.size, t), j, st.y[j]]))
    return np.vstack(rows)


def min_characteristic_gap(state: LagrangianState) -> float:
    return float(np.min(np.diff(state.y)))


def e_norm(parts: dict, s: np.ndarray, ds: float) -> float:
    """E-norm of interpolant differences sampled at midpoints ``s`` of spacing ``ds``.

    ``parts`` maps names to ``(values, slopes)`` sample pairs; the norm is
    ``|zeta|_V + |U|_H1 + |H|_V + |rbar|_L2`` with ``|f|_V = sup|f| + |f'|_L2``.
    """
    l2 = lambda v: float(np.sqrt(ds * np.sum(v ** 2)))
    z, dz = parts["zeta"]
    U, dU = parts["U"]
    H, dH = parts["H"]
    r, _ = parts["rbar"]
    return (np.max(np.abs(z)) + l2(dz)
            + np.sqrt(l2(U) ** 2 + l2(dU) ** 2)
            + np.max(np.abs(H)) + l2(dH)
            + l2(r))


def e_norm_distance(a: LagrangianState, b: LagrangianState, refine: int = 4) -> float:
    """E-norm distance between the interpolants of two states on a shared label window.

    Sampling uses midpoints of a grid ``refine`` times finer than the finer
    state, so derivative and cell terms are integrated exactly.
    """
    lo = min(a.grid.xi0, b.grid.xi0)
    hi = max(a.grid.xi_end, b.grid.xi_end)
    ds = min(a.grid.dxi, b.grid.dxi) / refine
    m = int(round((hi - lo) / ds))
    s = lo + ds * (np.arange(m) + 0.5)
    ia, ib = interpolants(a), interpolants(b)
    parts = {}
    for name in ("zeta", "U", "H", "rbar"):
        fa, fb = ia[name], ib[name]
        parts[name] = (fa(s) - fb(s), fa.derivative(s) - fb.derivative(s))
    return float(e_norm(parts, s, ds))
