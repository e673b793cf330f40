import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlgrad.errors import GridMismatch, HorizonTooLarge, SingularSymbol
from nlgrad.grid import Field, Grid, VectorField, inner, lp_norm
from nlgrad.kernels import scale_kernel
from nlgrad.operator import (OperatorHandle, QuadParams, apply_divergence, apply_gradient, apply_P,
                             apply_Q, classical_gradient, direct_gradient_oracle, make_operator,
                             riesz_gradient)
from nlgrad.profile import riesz_symbol, symbol


def _mode(grid, k):
    x = grid.coords()[0]
    return Field(grid, np.sin(2 * math.pi * k * x / grid.L))


def test_classical_gradient_of_a_mode():
    g = Grid(1, 64, 3.0)
    du = classical_gradient(_mode(g, 5))
    x = g.axis_points
    assert du.values[0] == pytest.approx(2 * math.pi * 5 / 3.0 * np.cos(2 * math.pi * 5 * x / 3.0),
                                         abs=1e-12)


def test_nonlocal_gradient_of_a_mode(kernel_a):
    # D sin(2 pi xi x) = 2 pi xi Qhat(xi) cos(2 pi xi x)
    g = Grid(1, 64, 3.0)
    sk = scale_kernel(kernel_a, 0.4, "Vanishing")
    xi = 5 / 3.0
    q = float(symbol(kernel_a, np.array([0.4 * xi]))[0])
    du = apply_gradient(make_operator(sk, g, "exact"), _mode(g, 5))
    expect = 2 * math.pi * xi * q * np.cos(2 * math.pi * xi * g.axis_points)
    assert du.values[0] == pytest.approx(expect, abs=1e-12)


def test_riesz_gradient_of_a_mode():
    g = Grid(1, 64, 2.0)
    xi = 3 / 2.0
    du = riesz_gradient(_mode(g, 3), 0.4)
    expect = 2 * math.pi * xi * riesz_symbol(0.4, 1, xi) * np.cos(2 * math.pi * xi * g.axis_points)
    assert du.values[0] == pytest.approx(expect, abs=1e-11)


def test_riesz_gradient_kills_constants():
    g = Grid(2, 16, 2.0)
    assert np.all(riesz_gradient(Field(g, np.full(g.shape, 2.0)), 0.5).values == 0.0)


@pytest.fixture(scope="module")
def ops(kernel_a, kernel_a2):
    out = {}
    for dim, k in ((1, kernel_a), (2, kernel_a2)):
        g = Grid(dim, 32, 2.0)
        out[dim, "v"] = make_operator(scale_kernel(k, 0.3, "Vanishing"), g)
        out[dim, "d"] = make_operator(scale_kernel(k, 4.0, "Diverging"), g)
    return out


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("regime", ["v", "d"])
def test_duality(ops, dim, regime, rng):
    op = ops[dim, regime]
    g = op.grid
    u = Field(g, rng.standard_normal(g.shape))
    psi = VectorField(g, rng.standard_normal((dim,) + g.shape))
    lhs = inner(apply_gradient(op, u), psi)
    rhs = -inner(u, apply_divergence(op, psi))
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


@pytest.mark.parametrize("dim", [1, 2])
def test_translation_identities(ops, dim, rng):
    op = ops[dim, "v"]
    g = op.grid
    u = Field(g, rng.standard_normal(g.shape))
    d1 = apply_gradient(op, u)
    d2 = classical_gradient(apply_Q(op, u))
    assert lp_norm(d1 - d2) <= 1e-10 * lp_norm(d1)
    back = apply_P(op, apply_Q(op, u))
    assert lp_norm(back - u) <= 1e-10 * lp_norm(u)


def test_singular_symbols(kernel_riesz):
    g = Grid(1, 32, 2.0)
    op = make_operator(scale_kernel(kernel_riesz, 5.0, "Diverging"), g)
    u = _mode(g, 1)
    with pytest.raises(SingularSymbol):
        apply_Q(op, u)
    with pytest.raises(SingularSymbol):
        apply_P(op, u)


def test_grid_mismatch(ops):
    with pytest.raises(GridMismatch):
        apply_gradient(ops[1, "v"], Field(Grid(1, 64, 2.0), np.zeros(64)))


def test_handle_is_thread_safe(ops, rng):
    op = ops[2, "v"]
    u = Field(op.grid, rng.standard_normal(op.grid.shape))
    ref = apply_gradient(op, u).values
    results = []

    def work():
        results.append(all(np.array_equal(apply_gradient(op, u).values, ref) for _ in range(20)))

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(results)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), scale=st.floats(1e-3, 1e3))
def test_gradient_is_linear(kernel_a, seed, scale):
    r = np.random.default_rng(seed)
    g = Grid(1, 32, 2.0)
    op = make_operator(scale_kernel(kernel_a, 0.5, "Vanishing"), g)
    a, b = r.standard_normal(32), r.standard_normal(32)
    lhs = apply_gradient(op, Field(g, a + scale * b)).values
    rhs = apply_gradient(op, Field(g, a)).values + scale * apply_gradient(op, Field(g, b)).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * max(1.0, scale) * 32)


# oracle -----------------------------------------------------------------------

def _gaussian(grid):
    r2 = sum((x - grid.L / 2) ** 2 for x in grid.coords())
    return Field(grid, np.exp(-r2 / 0.15**2))


def test_oracle_1d_agrees_and_halves(kernel_a):
    g = Grid(1, 32, 2.0)
    u = _gaussian(g)
    sk = scale_kernel(kernel_a, 0.25, "Vanishing")
    spec = apply_gradient(make_operator(sk, g), u)
    errs = [lp_norm(direct_gradient_oracle(u, sk, QuadParams(refine=r)) - spec) / lp_norm(spec)
            for r in (0, 1)]
    assert errs[0] < 5e-3
    assert errs[1] / errs[0] == pytest.approx(0.5, abs=0.05)


def test_oracle_2d_agrees(kernel_a2):
    g = Grid(2, 32, 2.0)
    u = _gaussian(g)
    sk = scale_kernel(kernel_a2, 0.25, "Vanishing")
    spec = apply_gradient(make_operator(sk, g), u)
    oracle = direct_gradient_oracle(u, sk, QuadParams(angular_nodes=32))
    assert lp_norm(oracle - spec) / lp_norm(spec) < 5e-3


def test_oracle_targets_mask(kernel_a):
    g = Grid(1, 32, 2.0)
    mask = np.zeros(32, bool)
    mask[10:12] = True
    out = direct_gradient_oracle(_gaussian(g), scale_kernel(kernel_a, 0.25, "Vanishing"),
                                 targets=mask)
    assert np.isnan(out.values[0, 0]) and np.isfinite(out.values[0, 10:12]).all()


def test_oracle_rejects_large_or_infinite_horizons(kernel_a, kernel_riesz):
    g = Grid(1, 32, 2.0)
    with pytest.raises(HorizonTooLarge):
        direct_gradient_oracle(_gaussian(g), scale_kernel(kernel_a, 5.0, "Diverging"))
    with pytest.raises(HorizonTooLarge):
        direct_gradient_oracle(_gaussian(g), scale_kernel(kernel_riesz, 0.5, "Vanishing"))


def test_quad_params_refinement():
    q = QuadParams(refine=2)
    assert q.r_min(1.0, 0.5) == pytest.approx(1e-6 / 16)
