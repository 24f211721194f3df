"""Fundamental solutions g, k, gamma, kappa of the discrete momentum operator.

For a nonnegative coefficient sequence ``a`` (in practice ``a = D+y``) the
kernels solve, for every source index ``i``,

    a_j g_ij     - D-_j gamma_ij = delta_ij / dxi,    a_j gamma_ij - D+_j g_ij = 0,
    a_j k_ij     - D+_j kappa_ij = delta_ij / dxi,    a_j kappa_ij - D-_j k_ij = 0,

with decay as ``|i - j| -> inf``. Outside the window the coefficient is 1.

Construction: two decaying homogeneous solutions are shot across the
window with 2x2 transfer matrices, then combined through their Wronskian.
Array convention throughout: ``K[i, j]`` has source ``i`` and evaluation
point ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _loops
from ._jit import use_jit
from .core import GridFunction, as_values

SIGN_SLACK = 1e-12
IDENTITY_TOL = 1e-9


class NegativeCoefficient(ValueError):
    pass


class DegenerateWronskian(ArithmeticError):
    pass


def _check_coeff(a) -> np.ndarray:
    a = as_values(a)
    if a.ndim != 1 or a.size < 3:
        raise ValueError("coefficient sequence must be 1-D with at least 3 entries")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite coefficient")
    if np.any(a < 0):
        j = int(np.argmin(a))
        raise NegativeCoefficient(f"negative coefficient a[{j}] = {a[j]:.3g}")
    return a


def transfer_matrix(a_j: float, dxi: float, form: str = "forward") -> np.ndarray:
    """2x2 transfer matrix of the homogeneous problem.

    ``forward`` maps ``(g_j, gamma_{j-1})`` to ``(g_{j+1}, gamma_j)``;
    ``backward`` maps ``(g_{j+1}, -gamma_j)`` to ``(g_j, -gamma_{j-1})``.
    """
    if a_j < 0:
        raise NegativeCoefficient("negative coefficient")
    if dxi <= 0:
        raise ValueError("dxi must be positive")
    c = a_j * dxi
    if form == "forward":
        return np.array([[1.0 + c * c, c], [c, 1.0]])
    if form == "backward":
        return np.array([[1.0, c], [c, 1.0 + c * c]])
    raise ValueError(f"unknown form {form!r}")


def transfer_eigs(a_j, dxi: float):
    """Eigenvalues ``(lam_minus, lam_plus)`` of the transfer matrix; ``lam_minus * lam_plus = 1``."""
    c = np.asarray(a_j, dtype=float) * dxi
    if np.any(c < 0):
        raise NegativeCoefficient("negative coefficient")
    s = np.sqrt(4.0 + c * c)
    # ((s -+ c)/2)^2 avoids the cancellation in 1 + c^2/2 - (c/2) s
    lm, lp = ((s - c) / 2) ** 2, ((s + c) / 2) ** 2
    if np.ndim(lm) == 0:
        return float(lm), float(lp)
    return lm, lp


def asymptotic_eigenvectors(dxi: float):
    """Unit-free eigenvectors ``(r_minus, r_plus)`` of the transfer matrix with ``a = 1``.

    ``r_minus`` decays under forward propagation (to the right),
    ``r_plus`` decays under backward propagation (to the left).
    """
    lm, lp = transfer_eigs(1.0, dxi)
    r_minus = np.array([1 / np.sqrt(1 + lp), -1 / np.sqrt(1 + lm)])
    r_plus = np.array([1 / np.sqrt(1 + lm), 1 / np.sqrt(1 + lp)])
    return r_minus, r_plus


@dataclass(frozen=True, eq=False)
class Shot:
    """Scaled homogeneous solution over window indices 0..n.

    Entry ``j`` stores ``g_j`` and ``gamma_{j-1}`` as mantissas sharing the
    log-scale ``log_scale[j]``.
    """

    side: str
    g: np.ndarray
    gamma_prev: np.ndarray
    log_scale: np.ndarray

    def window(self):
        """Mantissas and log-scales of ``g_j`` and ``gamma_j`` for j = 0..n-1."""
        n = self.g.size - 1
        return self.g[:n], self.gamma_prev[1:], self.log_scale[:n], self.log_scale[1:]

    def values(self):
        """Unscaled ``(g_j, gamma_j)`` for j = 0..n-1 (may overflow on huge windows)."""
        g, c, lg, lc = self.window()
        return g * np.exp(lg), c * np.exp(lc)


def shoot_decaying(a, dxi: float, side: str, jit: bool | None = None) -> Shot:
    """Homogeneous solution decaying to the ``left`` (plus) or ``right`` (minus).

    The left-decaying solution starts on the ``r_plus`` eigenvector at the
    left edge and is propagated forward; the right-decaying one starts on
    ``r_minus`` at the right edge and is propagated backward. Both
    propagations multiply positive vectors by positive matrices, so no
    cancellation occurs. The state is renormalized every 64 steps.
    """
    a = _check_coeff(a)
    r_minus, r_plus = asymptotic_eigenvectors(dxi)
    if side == "left":
        g, c, L = _loops.shoot_forward(a, dxi, r_plus[0], r_plus[1], jit=use_jit(jit))
    elif side == "right":
        g, c, L = _loops.shoot_backward(a, dxi, r_minus[0], -r_minus[1], jit=use_jit(jit))
    else:
        raise ValueError("side must be 'left' or 'right'")
    return Shot(side, g, c, L)


def wronskian(gm, gam_m, gp, gam_p, at: int) -> float:
    """``W_n = g-_n gamma+_n - g+_n gamma-_n`` evaluated at index ``at``."""
    t1 = gm[at] * gam_p[at]
    t2 = -gp[at] * gam_m[at]
    w = t1 + t2
    scale = abs(t1) + abs(t2)
    if not np.isfinite(w) or scale == 0 or abs(w) < 1e-12 * scale:
        raise DegenerateWronskian(f"degenerate Wronskian at index {at}")
    return float(w)


def _log_wronskian(minus: Shot, plus: Shot, at: int = 0) -> float:
    # Both terms are positive (g > 0, gamma- < 0, gamma+ > 0): add in log space.
    t1 = minus.g[at] * plus.gamma_prev[at + 1]
    t2 = -plus.g[at] * minus.gamma_prev[at + 1]
    if not (t1 > 0 and t2 > 0 and np.isfinite(t1) and np.isfinite(t2)):
        raise DegenerateWronskian("degenerate Wronskian: decaying solutions lost their sign structure")
    l1 = np.log(t1) + minus.log_scale[at] + plus.log_scale[at + 1]
    l2 = np.log(t2) + plus.log_scale[at] + minus.log_scale[at + 1]
    return float(np.logaddexp(l1, l2))


@dataclass(frozen=True, eq=False)
class KernelSet:
    g: np.ndarray
    k: np.ndarray
    gamma: np.ndarray
    kappa: np.ndarray
    a: np.ndarray
    dxi: float
    log_wronskian: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def wronskian_value(self) -> float:
        return float(np.exp(self.log_wronskian))

    def arrays(self):
        return self.g, self.k, self.gamma, self.kappa

    def replace(self, **kw) -> "KernelSet":
        d = dict(g=self.g, k=self.k, gamma=self.gamma, kappa=self.kappa, a=self.a,
                 dxi=self.dxi, log_wronskian=self.log_wronskian)
        d.update(kw)
        return KernelSet(**d)


@dataclass(frozen=True, eq=False)
class KernelFactors:
    """Shooting data from which every kernel entry is a product of two factors.

    Cheaper than :class:`KernelSet` when only the kernel action is needed:
    :meth:`apply` evaluates the R/Q sums in O(n).
    """

    minus: Shot
    plus: Shot
    a: np.ndarray
    dxi: float
    log_wronskian: float
    jit: bool

    @property
    def n(self) -> int:
        return self.a.size

    def _args(self):
        return (*self.minus.window(), *self.plus.window(), self.log_wronskian)

    def assemble(self) -> KernelSet:
        g, k, gam, kap = _loops.assemble(*self._args(), jit=self.jit)
        return KernelSet(g, k, gam, kap, self.a.copy(), self.dxi, self.log_wronskian)

    def apply(self, f1: np.ndarray, f2: np.ndarray):
        """``(gamma*f1 + k*f2, g*f1 + kappa*f2)`` with ``(K*f)_j = dxi sum_i K_ij f_i``."""
        if self.jit:
            return _loops.apply_rq(*self._args(), f1, f2, self.dxi)
        ks = self.assemble()
        return (self.dxi * (f1 @ ks.gamma + f2 @ ks.k),
                self.dxi * (f1 @ ks.g + f2 @ ks.kappa))


def factor_kernels(a, dxi: float, jit: bool | None = None) -> KernelFactors:
    a = _check_coeff(a)
    j = use_jit(jit)
    plus = shoot_decaying(a, dxi, "left", jit=j)
    minus = shoot_decaying(a, dxi, "right", jit=j)
    return KernelFactors(minus, plus, a.copy(), float(dxi), _log_wronskian(minus, plus), j)


def build_kernels(a, dxi: float | None = None, jit: bool | None = None) -> KernelSet:
    """Assemble all four kernels for coefficient ``a`` (``a = 1`` outside the window)."""
    if dxi is None:
        if not isinstance(a, GridFunction):
            raise ValueError("dxi is required when a is a plain array")
        dxi = a.grid.dxi
    return factor_kernels(a, dxi, jit).assemble()


def constant_greens(dxi: float, j):
    """Closed-form kernel for ``a = 1``: ``(4+dxi^2)^(-1/2) * lam_plus^(-|j|)``."""
    if dxi <= 0:
        raise ValueError("dxi must be positive")
    lam = 1 + dxi ** 2 / 2 + (dxi / 2) * np.sqrt(4 + dxi ** 2)
    return (4 + dxi ** 2) ** -0.5 * lam ** (-np.abs(np.asarray(j, dtype=float)))


def dense_solve_column(a, dxi: float, i: int):
    """Row ``i`` of ``(g, gamma)`` from a direct sparse solve (independent of shooting)."""
    from .reference import solve_gg_column

    return solve_gg_column(_check_coeff(a), dxi, i)


# --- verification helpers -------------------------------------------------

def identity_residuals(ks: KernelSet) -> dict:
    """Max-abs residuals of the four defining relations over window-interior indices."""
    g, k, gam, kap = ks.arrays()
    a, dx = ks.a, ks.dxi
    n = ks.n
    eye = np.eye(n) / dx
    r_g = a[None, 1:] * g[:, 1:] - (gam[:, 1:] - gam[:, :-1]) / dx - eye[:, 1:]
    r_gam = a[None, :-1] * gam[:, :-1] - (g[:, 1:] - g[:, :-1]) / dx
    r_k = a[None, :-1] * k[:, :-1] - (kap[:, 1:] - kap[:, :-1]) / dx - eye[:, :-1]
    r_kap = a[None, 1:] * kap[:, 1:] - (k[:, 1:] - k[:, :-1]) / dx
    return {name: float(np.max(np.abs(r))) for name, r in
            (("g", r_g), ("gamma", r_gam), ("k", r_k), ("kappa", r_kap))}


def symmetry_defects(ks: KernelSet) -> dict:
    return {
        "g": float(np.max(np.abs(ks.g - ks.g.T))),
        "k": float(np.max(np.abs(ks.k - ks.k.T))),
        "gamma_kappa": float(np.max(np.abs(ks.gamma.T + ks.kappa))),
    }


def sign_violations(ks: KernelSet, slack: float = SIGN_SLACK) -> list[str]:
    """Violations of positivity, diagonal dominance, monotone decay and the gamma/kappa sign pattern."""
    out = []
    n = ks.n
    i, j = np.indices((n, n))
    for name, K in (("g", ks.g), ("k", ks.k)):
        if np.any(K <= 0):
            out.append(f"{name} not strictly positive")
        if np.any(K > np.diag(K)[:, None] + slack):
            out.append(f"{name} row maximum off the diagonal")
        d = np.diff(K, axis=1)
        if np.any(d[j[:, :-1] >= i[:, :-1]] > slack) or np.any(d[j[:, 1:] <= i[:, 1:]] < -slack):
            out.append(f"{name} not monotone away from the diagonal")
    if np.any(ks.gamma[j >= i] >= 0) or np.any(ks.gamma[j < i] <= 0):
        out.append("gamma sign pattern")
    if np.any(ks.kappa[j > i] >= 0) or np.any(ks.kappa[j <= i] <= 0):
        out.append("kappa sign pattern")
    return out


def lattice_sums(ks: KernelSet) -> dict:
    """Row sums over the whole lattice, adding exact geometric tails outside the window.

    Returns per-row ``dxi*sum a g``, ``dxi*sum a k`` (both should be 1) and
    ``dxi*sum a|gamma|``, ``dxi*sum a|kappa|`` (should equal ``2 g_ii``, ``2 k_ii``).
    """
    g, k, gam, kap = ks.arrays()
    a, dx = ks.a, ks.dxi
    lm, lp = transfer_eigs(1.0, dx)
    rho_m, rho_p = -np.sqrt(lp), np.sqrt(lm)  # gamma/g ratio on r_minus, r_plus
    g_n = g[:, -1] + dx * a[-1] * gam[:, -1]
    s_g = dx * (g @ a + g[:, 0] / (lp - 1) + g_n / (1 - lm))
    s_gam = dx * (np.abs(gam) @ a + rho_p * g[:, 0] * lp / (lp - 1) + abs(rho_m) * g_n * lm / (1 - lm))
    s_k = dx * (k @ a + rho_p * kap[:, 0] * lp / (lp - 1) + k[:, -1] * lm / (1 - lm))
    kap_n = kap[:, -1] + dx * a[-1] * k[:, -1]
    kap_n[-1] -= 1.0  # the source term sits in the last cell for the last row
    s_kap = dx * (np.abs(kap) @ a + kap[:, 0] / (lp - 1) + np.abs(kap_n) / (1 - lm))
    return {"g": s_g, "k": s_k, "gamma": s_gam, "kappa": s_kap}
