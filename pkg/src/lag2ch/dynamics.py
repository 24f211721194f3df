"""Right-hand sides of the semi-discrete Lagrangian system and its invariants.

State fields on window cells j = 0..n-1 with fixed ghost constants:

* ``zeta``  (y = xi + zeta): right neighbour ``zeta_right`` (constant of motion)
* ``U``: 0 on both sides
* ``H``: 0 on the left, ``H_inf`` on the right
* ``rbar``: 0

so ``D+y = 1`` and ``h = U = rbar = 0`` beyond the window. During
evolution ``h`` is always ``D+H``; nothing divides by ``D+y``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import Grid, dminus, dplus
from .greens import KernelFactors, KernelSet, identity_residuals


@dataclass(frozen=True, eq=False)
class LagrangianState:
    grid: Grid
    zeta: np.ndarray
    U: np.ndarray
    H: np.ndarray
    rbar: np.ndarray
    H_inf: float
    rho_inf: float = 0.0
    zeta_right: float = 0.0

    def __post_init__(self):
        n = self.grid.n
        for name in ("zeta", "U", "H", "rbar"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (n,):
                raise ValueError(f"{name} must have {n} entries, got {v.shape}")
            object.__setattr__(self, name, v)
        if self.rho_inf < 0:
            raise ValueError("rho_inf must be nonnegative")

    @property
    def y(self) -> np.ndarray:
        return self.grid.xi + self.zeta

    @property
    def y_nodes(self) -> np.ndarray:
        """``y`` at indices 0..n including the right ghost node."""
        return np.append(self.y, self.grid.xi_end + self.zeta_right)

    @property
    def Dy(self) -> np.ndarray:
        return 1.0 + dplus(self.zeta, self.grid.dxi, self.zeta_right)

    @property
    def DU(self) -> np.ndarray:
        return dplus(self.U, self.grid.dxi, 0.0)

    @property
    def h(self) -> np.ndarray:
        return dplus(self.H, self.grid.dxi, self.H_inf)

    def pack(self) -> np.ndarray:
        return np.concatenate([self.zeta, self.U, self.H, self.rbar])

    def unpack(self, vec: np.ndarray) -> "LagrangianState":
        z, U, H, r = np.split(np.asarray(vec, dtype=float), 4)
        return replace(self, zeta=z, U=U, H=H, rbar=r)

    def copy(self) -> "LagrangianState":
        return self.unpack(self.pack().copy())


@dataclass(frozen=True, eq=False)
class SystemState:
    state: LagrangianState
    kernels: KernelSet | None
    t: float = 0.0


def h_from_primitives(state: LagrangianState, floor: float = 0.0) -> np.ndarray:
    """``h = 1/2 U^2 D+y + 1/2 (D+U)^2 / D+y + 1/2 rbar^2 / D+y`` (initialization only)."""
    Dy = state.Dy
    bad = np.flatnonzero(Dy <= floor)
    if bad.size:
        raise ZeroDivisionError(f"division at degenerate cell j={int(bad[0])} (D+y = {Dy[bad[0]]:.3g})")
    DU = state.DU
    return 0.5 * (state.U ** 2 * Dy + (DU ** 2 + state.rbar ** 2) / Dy)


def sources(state: LagrangianState):
    """The two sequences the kernels act on: ``U D+U`` and ``h + rho_inf rbar``."""
    return state.U * state.DU, state.h + state.rho_inf * state.rbar


def compute_RQ(state: LagrangianState, kernels: KernelSet | KernelFactors):
    """``R = gamma*(U D+U) + k*(h + rho_inf rbar)``, ``Q = g*(U D+U) + kappa*(h + rho_inf rbar)``."""
    if kernels.n != state.grid.n:
        raise ValueError(f"dimension mismatch: kernels {kernels.n} vs grid {state.grid.n}")
    f1, f2 = sources(state)
    if isinstance(kernels, KernelFactors):
        return kernels.apply(f1, f2)
    dx = state.grid.dxi
    R = dx * (f1 @ kernels.gamma + f2 @ kernels.k)
    Q = dx * (f1 @ kernels.g + f2 @ kernels.kappa)
    return R, Q


def rq_relation_residual(state: LagrangianState, R: np.ndarray, Q: np.ndarray) -> float:
    """Max residual of ``-D-R + aQ = U D+U`` and ``aR - D+Q = h + rho_inf rbar`` on interior cells."""
    dx = state.grid.dxi
    a = state.Dy
    f1, f2 = sources(state)
    r1 = -(R[1:] - R[:-1]) / dx + a[1:] * Q[1:] - f1[1:]
    r2 = a[:-1] * R[:-1] - (Q[1:] - Q[:-1]) / dx - f2[:-1]
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def state_rhs(sys: SystemState, RQ=None):
    """Time derivatives ``(dzeta, dU, dH, drbar)``."""
    st = sys.state
    R, Q = compute_RQ(st, sys.kernels) if RQ is None else RQ
    R_prev = np.concatenate([[0.0], R[:-1]])
    return st.U.copy(), -Q, -st.U * R_prev, -st.rho_inf * st.DU


def kernel_rhs(kernels: KernelSet, DpU: np.ndarray):
    """Time derivatives of ``(g, k, gamma, kappa)`` when ``d/dt a = D+U``.

    Dense products ``-dxi * (X diag(D+U) Y + ...)``.
    """
    g, k, gam, kap = kernels.arrays()
    w = kernels.dxi * np.asarray(DpU, dtype=float)
    gw, kw, gamw, kapw = g * w, k * w, gam * w, kap * w  # scale columns m
    dg = -(gw @ g + gamw @ kap)
    dk = -(kw @ k + kapw @ gam)
    dgam = -(gamw @ k + gw @ gam)
    dkap = -(kw @ kap + kapw @ g)
    return dg, dk, dgam, dkap


def hamiltonian(state: LagrangianState):
    """``(dxi * sum h, primitive form)``.

    The primitive form divides by ``D+y``; on collapsed cells (``D+y <= 1e-12``)
    it takes ``h`` itself, which is where atom energy lives.
    """
    dx = state.grid.dxi
    h = state.h
    H_dis = dx * float(np.sum(h))
    Dy, DU = state.Dy, state.DU
    ok = Dy > 1e-12
    prim = 0.5 * dx * float(np.sum(state.U[ok] ** 2 * Dy[ok] + (DU[ok] ** 2 + state.rbar[ok] ** 2) / Dy[ok]))
    return H_dis, prim + dx * float(np.sum(h[~ok]))


def momentum(state: LagrangianState) -> float:
    return state.grid.dxi * float(np.sum(state.U * state.Dy))


def bid_residual(state: LagrangianState) -> float:
    Dy, DU = state.Dy, state.DU
    r = 2 * Dy * state.h - state.U ** 2 * Dy ** 2 - DU ** 2 - state.rbar ** 2
    return float(np.max(np.abs(r)))


def default_tol_B(state: LagrangianState) -> float:
    return 1e-8 * (1 + abs(state.H_inf)) ** 2


@dataclass
class SetBReport:
    min_Dy: float
    min_h: float
    min_Dy_plus_h: float
    bid_residual: float
    H_decrease: float
    eps_neg: float
    tol_B: float
    UDU_sum: float
    U_sup: float
    rbar_slack: float
    H_inf: float
    kernel_residual: float | None = None
    flags: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags


def validate_setB(state: LagrangianState, kernels: KernelSet | None = None, tol_B: float | None = None) -> SetBReport:
    """Report-only check of set membership, the energy identity and the derived bounds."""
    Dy, h, U, DU, rb = state.Dy, state.h, state.U, state.DU, state.rbar
    dx = state.grid.dxi
    eps = 1e-12 * max(1.0, float(np.max(np.abs(Dy))))
    tol = default_tol_B(state) if tol_B is None else tol_B
    Hn = np.append(np.concatenate([[0.0], state.H]), state.H_inf)
    rep = SetBReport(
        min_Dy=float(Dy.min()),
        min_h=float(h.min()),
        min_Dy_plus_h=float((Dy + h).min()),
        bid_residual=bid_residual(state),
        H_decrease=float(max(0.0, -np.min(np.diff(Hn)))),
        eps_neg=eps,
        tol_B=tol,
        UDU_sum=dx * float(np.sum(np.abs(U * DU))),
        U_sup=float(np.max(np.abs(U))),
        rbar_slack=float(np.min(np.sqrt(np.maximum(2 * Dy * h, 0.0)) - np.abs(rb))),
        H_inf=float(state.H_inf),
    )
    H_inf = max(state.H_inf, 0.0)
    if rep.min_Dy < -eps:
        rep.flags.append("D+y negative")
    if rep.min_h < -eps:
        rep.flags.append("D+H negative")
    if rep.min_Dy_plus_h <= 0:
        rep.flags.append("D+y + D+H not positive")
    if rep.bid_residual > tol:
        rep.flags.append("energy identity violated")
    if rep.UDU_sum > H_inf * (1 + 1e-9) + tol:
        rep.flags.append("sum |U||D+U| exceeds H_inf")
    if rep.U_sup > np.sqrt(2 * H_inf) + 1e-9 + tol:
        rep.flags.append("sup |U| exceeds sqrt(2 H_inf)")
    if rep.rbar_slack < -np.sqrt(tol):
        rep.flags.append("|rbar| exceeds sqrt(2 D+y h)")
    if kernels is not None:
        rep.kernel_residual = max(identity_residuals(kernels.replace(a=Dy)).values())
        if rep.kernel_residual > 1e-9:
            rep.flags.append("kernel identities violated")
    return rep
