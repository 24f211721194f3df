import numpy as np
import pytest

from lag2ch import build_kernels, kernel_rhs
from lag2ch.reference import OracleConfig, fd_check, oracle_energy, oracle_kernels, solve_gg_column


def test_oracle_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(fd_eps=0.0)


def test_oracle_constant_closed_form():
    ks = oracle_kernels(np.ones(40), 0.2)
    assert ks.g[20, 20] == pytest.approx(1 / np.sqrt(4.04), rel=1e-12)


def test_oracle_handles_zero_cells():
    a = np.ones(30)
    a[10:20] = 0
    ref, ks = oracle_kernels(a, 0.3), build_kernels(a, 0.3)
    assert max(np.abs(x - y).max() for x, y in zip(ref.arrays(), ks.arrays())) < 1e-12


def test_column_solve():
    a = np.random.default_rng(0).uniform(0, 2, 25)
    g, gam = solve_gg_column(a, 0.2, 7)
    ks = build_kernels(a, 0.2)
    assert np.allclose(g, ks.g[7]) and np.allclose(gam, ks.gamma[7])


def test_oracle_energy_examples():
    zero = lambda x: 0.0 * x
    assert oracle_energy(zero, zero) == 0.0
    peak = lambda x: np.exp(-abs(x))
    dpeak = lambda x: -np.sign(x) * np.exp(-abs(x))
    assert oracle_energy(peak, dpeak, breakpoints=(0.0,)) == pytest.approx(1.0, rel=1e-10)
    u = lambda x: np.exp(-abs(x + 2.5)) - np.exp(-abs(x - 2.5))
    ux = lambda x: -np.sign(x + 2.5) * np.exp(-abs(x + 2.5)) + np.sign(x - 2.5) * np.exp(-abs(x - 2.5))
    assert oracle_energy(u, ux, breakpoints=(-2.5, 2.5)) == pytest.approx(2 * (1 - np.exp(-5)), rel=1e-8)
    with pytest.raises(ValueError, match="non-decaying"):
        oracle_energy(lambda x: 1.0 + 0 * x, zero)


def test_fd_check_linear():
    M = np.random.default_rng(1).normal(size=(5, 5))
    x, d = np.ones(5), np.arange(5.0)
    assert fd_check(lambda v: M @ v, x, d, M @ d) <= 1e-12 * 10 + 1e-9


def test_kernel_rhs_matches_resolved_kernels():
    rng = np.random.default_rng(2)
    n, dxi = 40, 0.2
    a = rng.uniform(0.5, 2.0, n)
    DU = rng.normal(size=n)
    ks = build_kernels(a, dxi)
    errs = [fd_check(lambda s: build_kernels(a + s * DU, dxi).arrays(), 0.0, 1.0, kernel_rhs(ks, DU), eps)
            for eps in (1e-3, 5e-4)]
    assert errs[0] < 1e-5
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)  # O(eps^2)
