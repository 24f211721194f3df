"""Fixed-step RK4 over the semi-discrete system, with step halving and diagnostics."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (LagrangianState, SystemState, bid_residual, compute_RQ, default_tol_B,
                       hamiltonian, kernel_rhs, momentum, state_rhs)
from .greens import KernelFactors, KernelSet, build_kernels, factor_kernels, identity_residuals

log = logging.getLogger(__name__)

MODES = ("propagate", "resolve", "auto")
NEG_ABORT = 1e-6


class StepRejected(RuntimeError):
    pass


class SimulationAborted(RuntimeError):
    pass


@dataclass
class SimConfig:
    dt: float
    t_end: float
    mode: str = "auto"
    output_every: int = 1
    tol_B: float | None = None
    drift_budget: float = 1e-5
    max_halvings: int = 10
    keep_kernels: bool = False
    resolve_threshold: int = 512

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("sim.dt must be positive")
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError("sim.t_end must be nonnegative")
        if int(self.output_every) != self.output_every or self.output_every < 1:
            raise ValueError("sim.output_every must be an integer >= 1")
        if self.mode not in MODES:
            raise ValueError(f"sim.mode must be one of {MODES}")
        if self.max_halvings < 0:
            raise ValueError("sim.max_halvings must be >= 0")

    def resolved_mode(self, n: int) -> str:
        if self.mode != "auto":
            return self.mode
        return "resolve" if n > self.resolve_threshold else "propagate"


@dataclass
class Diagnostics:
    t: float
    H_inf: float
    H_prim: float
    I: float
    minDy: float
    maxh: float
    residB: float
    kernel_residual: float
    kernel_tail: float
    Umax: float


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    kernels: list = field(default_factory=list)
    aborted: str | None = None
    flags: list = field(default_factory=list)
    rejected_steps: int = 0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(d, name) for d in self.diagnostics])


def eps_neg(Dy: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.max(np.abs(Dy))))


def _factors_for(st: LagrangianState, clip: float) -> KernelFactors:
    a = st.Dy
    if a.min() < -clip:
        raise StepRejected(f"D+y = {a.min():.3e} below -{clip:.1e} inside a stage")
    return factor_kernels(np.maximum(a, 0.0), st.grid.dxi)


def _stage(st: LagrangianState, ks, with_kernels: bool):
    dz, dU, dH, dr = state_rhs(SystemState(st, ks))
    dstate = np.concatenate([dz, dU, dH, dr])
    dker = kernel_rhs(ks, st.DU) if with_kernels else None
    return dstate, dker


def rk4_step(sys: SystemState, dt: float, mode: str, clip: float | None = None) -> SystemState:
    """One classical RK4 step. ``clip`` is the tolerated negative ``D+y`` in stage kernel builds.

    In ``resolve`` mode stages use O(n) kernel factors and the returned
    state carries no kernels (see :func:`kernels_of`).
    """
    st0 = sys.state
    x0 = st0.pack()
    clip = eps_neg(st0.Dy) if clip is None else clip
    if mode == "resolve":
        k1, _ = _stage(st0, _factors_for(st0, clip), False)
        st = st0.unpack(x0 + 0.5 * dt * k1)
        k2, _ = _stage(st, _factors_for(st, clip), False)
        st = st0.unpack(x0 + 0.5 * dt * k2)
        k3, _ = _stage(st, _factors_for(st, clip), False)
        st = st0.unpack(x0 + dt * k3)
        k4, _ = _stage(st, _factors_for(st, clip), False)
        new = st0.unpack(x0 + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        return SystemState(new, None, sys.t + dt)
    if mode != "propagate":
        raise ValueError(f"unknown mode {mode!r}")
    K0 = sys.kernels
    if K0 is None:
        K0 = _factors_for(st0, clip).assemble()
    M0 = K0.arrays()

    def shift(coef, dK):
        return K0.replace(**dict(zip(("g", "k", "gamma", "kappa"),
                                     (m + coef * d for m, d in zip(M0, dK)))))

    k1, d1 = _stage(st0, K0, True)
    k2, d2 = _stage(st0.unpack(x0 + 0.5 * dt * k1), shift(0.5 * dt, d1), True)
    k3, d3 = _stage(st0.unpack(x0 + 0.5 * dt * k2), shift(0.5 * dt, d2), True)
    k4, d4 = _stage(st0.unpack(x0 + dt * k3), shift(dt, d3), True)
    new = st0.unpack(x0 + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
    dK = [(a + 2 * b + 2 * c + d) / 6 for a, b, c, d in zip(d1, d2, d3, d4)]
    ks = shift(dt, dK).replace(a=new.Dy)
    return SystemState(new, ks, sys.t + dt)


def _try_step(sys, dt, mode, clip=None):
    new = rk4_step(sys, dt, mode, clip)
    x = new.state.pack()
    if not np.all(np.isfinite(x)):
        raise StepRejected("non-finite value")
    m = float(new.state.Dy.min())
    if m < -eps_neg(new.state.Dy):
        raise StepRejected(f"D+y = {m:.3e} after step")
    return new


def advance(sys: SystemState, dt: float, mode: str, max_halvings: int, traj: Trajectory | None = None,
            depth: int = 0) -> SystemState:
    """Advance by ``dt``, splitting into two half steps on rejection (recursively)."""
    try:
        return _try_step(sys, dt, mode)
    except StepRejected as exc:
        if traj is not None:
            traj.rejected_steps += 1
        reason = str(exc)
    if depth >= max_halvings:
        try:
            new = rk4_step(sys, dt, mode, clip=NEG_ABORT)
        except StepRejected:
            new = None
        if new is not None and np.all(np.isfinite(new.state.pack())) and new.state.Dy.min() >= -NEG_ABORT:
            if traj is not None:
                traj.flags.append(f"t={new.t:.6g}: accepted D+y = {new.state.Dy.min():.3e} at maximum halving")
            return new
        raise SimulationAborted(f"step-halving exhausted at t={sys.t:.6g} ({reason})")
    half = advance(sys, dt / 2, mode, max_halvings, traj, depth + 1)
    return advance(half, dt / 2, mode, max_halvings, traj, depth + 1)


def kernels_of(sys: SystemState) -> KernelSet:
    """The state's kernels, rebuilt from ``D+y`` when none are carried."""
    if sys.kernels is not None:
        return sys.kernels
    return build_kernels(np.maximum(sys.state.Dy, 0.0), sys.state.grid.dxi)


def diagnose(sys: SystemState, ks: KernelSet | None = None) -> Diagnostics:
    st = sys.state
    H_dis, H_prim = hamiltonian(st)
    ks = kernels_of(sys) if ks is None else ks
    kr = max(identity_residuals(ks.replace(a=np.maximum(st.Dy, 0.0))).values())
    tail = float(max(abs(ks.g[0, -1]), abs(ks.g[-1, 0]), abs(ks.k[0, -1])))
    return Diagnostics(sys.t, H_dis, H_prim, momentum(st), float(st.Dy.min()), float(st.h.max()),
                       bid_residual(st), kr, tail, float(np.max(np.abs(st.U))))


def _record(traj: Trajectory, sys: SystemState, keep_kernels: bool):
    traj.times.append(sys.t)
    traj.snapshots.append(sys.state.copy())
    ks = kernels_of(sys)
    traj.diagnostics.append(diagnose(sys, ks))
    if keep_kernels:
        traj.kernels.append(ks)


def simulate(config: SimConfig, init: SystemState | LagrangianState) -> Trajectory:
    """Integrate to ``t_end``; aborts are recorded on the trajectory, not raised."""
    if isinstance(init, LagrangianState):
        init = SystemState(init, None, 0.0)
    mode = config.resolved_mode(init.state.grid.n)
    sys = init
    if sys.kernels is None and mode == "propagate":
        sys = SystemState(sys.state, kernels_of(sys), sys.t)
    traj = Trajectory()
    tol_B = default_tol_B(sys.state) if config.tol_B is None else config.tol_B
    _record(traj, sys, config.keep_kernels)
    H0 = traj.diagnostics[0].H_prim
    nsteps = int(np.ceil(config.t_end / config.dt - 1e-9)) if config.t_end > 0 else 0
    t0 = sys.t
    for step in range(1, nsteps + 1):
        t_target = t0 + min(step * config.dt, config.t_end)
        dt = t_target - sys.t
        try:
            sys = advance(sys, dt, mode, config.max_halvings, traj)
        except SimulationAborted as exc:
            traj.aborted = str(exc)
            log.info("simulation aborted: %s", exc)
            break
        sys = SystemState(sys.state, sys.kernels, t_target)
        if step % config.output_every == 0 or step == nsteps:
            _record(traj, sys, config.keep_kernels)
            d = traj.diagnostics[-1]
            if d.residB > tol_B:
                traj.flags.append(f"t={d.t:.6g}: energy identity residual {d.residB:.3e} exceeds {tol_B:.1e}")
            if H0 > 0 and np.isfinite(d.H_prim) and d.minDy > 0 and abs(d.H_prim - H0) > config.drift_budget * H0:
                traj.flags.append(f"t={d.t:.6g}: Hamiltonian drift {abs(d.H_prim - H0) / H0:.3e}")
    return traj
