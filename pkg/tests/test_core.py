import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lag2ch.core import (Grid, GridFunction, bwd_diff, dminus, dplus, fwd_diff, kernel_apply, norm,
                         operator_norm, young_bound)


def test_grid_validation():
    with pytest.raises(ValueError, match="grid.n"):
        Grid(2, 0.1)
    with pytest.raises(ValueError, match="grid.dxi"):
        Grid(10, 0.0)
    g = Grid(10, 0.5, -1.0)
    assert g.xi[0] == -1.0 and g.xi_end == 4.0
    assert g.refined().n == 20 and g.refined().dxi == 0.25


def test_differences_and_ghosts():
    g = Grid(4, 0.5)
    v = GridFunction(np.array([1.0, 2.0, 4.0, 7.0]), g, left="clamp", right="linear")
    assert np.allclose(fwd_diff(v).values, [2, 4, 6, 6])
    assert np.allclose(bwd_diff(v).values, [0, 2, 4, 6])
    assert np.allclose(dplus(np.arange(3.0), 1.0, right=5.0), [1, 1, 3])
    assert np.allclose(dminus(np.arange(3.0), 1.0, left=-1.0), [1, 1, 1])
    with pytest.raises(ValueError, match="ghost"):
        GridFunction(np.zeros(4), g, left="mirror")


def test_summation_by_parts():
    rng = np.random.default_rng(0)
    n, dx = 50, 0.3
    u, v = rng.normal(size=n), rng.normal(size=n)
    # sum u D+v = -sum (D-u) v with zero ghosts on both sides
    lhs = np.sum(u * dplus(v, dx))
    rhs = -np.sum(dminus(u, dx) * v)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_norms():
    g = Grid(100, 0.1)
    v = GridFunction(np.ones(100), g)
    assert norm(v, "l1") == pytest.approx(10.0)
    assert norm(v, "l2") == pytest.approx(np.sqrt(10.0))
    assert norm(v, "linf") == 1.0
    assert norm(v, "Vd") == pytest.approx(1.0 + np.sqrt(0.1 * 100))  # jump to the zero ghost
    with pytest.raises(ValueError, match="non-finite"):
        norm(GridFunction(np.full(100, np.nan), g), "l2")
    with pytest.raises(ValueError, match="unknown norm"):
        norm(v, "sobolev")


def test_kernel_apply_convention_and_mismatch():
    g = Grid(3, 0.5)
    K = np.arange(9.0).reshape(3, 3)
    f = np.array([1.0, 0.0, 0.0])
    assert np.allclose(kernel_apply(K, f, g).values, 0.5 * K[0])
    with pytest.raises(ValueError, match="dimension mismatch"):
        kernel_apply(np.eye(4), f, g)


def test_operator_norm_transpose():
    K = np.array([[1.0, 2.0], [0.0, 0.0]])
    assert operator_norm(K, np.inf, 1.0) == 2.0
    assert operator_norm(K, 1, 1.0) == 3.0
    assert operator_norm(K, 1, 1.0, transpose=True) == 2.0


def test_young_rejects_bad_exponents():
    with pytest.raises(ValueError, match="exponents"):
        young_bound(np.eye(3), np.ones(3), 1.0, 2, 2, 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.floats(0.05, 2.0), st.integers(0, 2 ** 31 - 1),
       st.sampled_from([(2.0, 2.0, 1.0), (np.inf, 2.0, 2.0), (np.inf, 1.0, np.inf), (4.0, 2.0, 4 / 3)]))
def test_young_property(n, dxi, seed, triple):
    rng = np.random.default_rng(seed)
    K, f = rng.normal(size=(n, n)), rng.normal(size=n)
    lhs, rhs = young_bound(K, f, dxi, *triple)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300
