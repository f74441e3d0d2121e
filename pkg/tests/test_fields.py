"""Exact fields, masked finite differences, norms, manufactured solutions."""

import numpy as np
import pytest

from mixtype import geometry as geo
from mixtype.errors import MaskTooThin
from mixtype.fields import (
    CoefficientSet,
    GridFunction,
    ScalarField,
    manufacture,
    relative_l2_error,
)


def test_scalar_field_exact_derivatives():
    f = ScalarField("exp(x*y)")
    assert f(0.0, 0.0) == pytest.approx(1.0)
    # d/dx e^{xy} = y e^{xy}
    assert f(2.0, 3.0, dx=1) == pytest.approx(3.0 * np.exp(6.0))
    # mixed: d2/dxdy = (1 + xy) e^{xy}
    assert f(1.0, 1.0, dx=1, dy=1) == pytest.approx(2.0 * np.exp(1.0))


def test_scalar_field_vectorized():
    f = ScalarField("x**2 - y**2")
    X, Y = np.meshgrid([0.0, 1.0], [0.0, 2.0], indexing="ij")
    out = f(X, Y)
    assert out.shape == (2, 2)
    assert out[1, 1] == pytest.approx(1.0 - 4.0)


def test_jet_on_curve_against_hand_value():
    # g(x) = (x^2 - y^2) on y = x: identically 0, all jets vanish
    f = ScalarField("x**2 - y**2")
    jets = f.jet_on_curve(np.array([0.0, 1.0, 0.0, 0.0]), order=3)
    assert np.allclose(jets, 0.0, atol=1e-12)
    # on y = -x same thing; on y = 0: f(x,0) = x^2, second deriv 2
    jets0 = f.jet_on_curve(np.zeros(4), order=3)
    assert jets0 == pytest.approx([0.0, 0.0, 2.0, 0.0])


def test_manufacture_tricomi_identity():
    # L u = u_yy + K u_xx with K = x^2-y^2 applied to u = x^2 + y^2
    coeffs = CoefficientSet.tricomi_cross()
    f = manufacture(coeffs, "x**2 + y**2")
    # u_yy = 2, K u_xx = 2(x^2 - y^2)
    assert f(1.0, 2.0) == pytest.approx(2.0 + 2.0 * (1.0 - 4.0))


def test_manufacture_zero_solution():
    coeffs = CoefficientSet.tricomi_cross(b1="x", b2="y", c="1")
    f = manufacture(coeffs, "0")
    assert f(0.3, -0.7) == pytest.approx(0.0, abs=1e-14)


def grid_fn(h=1.0 / 32, expr="sin(x)*cos(y)"):
    g = geo.Grid2D.square(1.0, h)
    f = ScalarField(expr)
    return GridFunction.sample(g, f), f


def test_diff_central_second_order():
    errs = []
    for h in (1.0 / 16, 1.0 / 32):
        u, f = grid_fn(h)
        d = u.diff(dx=1)
        X, Y = u.grid.mesh()
        exact = f(X, Y, dx=1)
        errs.append(np.max(np.abs(d.values[d.mask] - exact[d.mask])))
    rate = np.log2(errs[0] / errs[1])
    assert rate > 1.8


def test_diff_one_sided_near_mask_edge():
    # mask out half the grid; edge nodes must still be second order
    g = geo.Grid2D.square(1.0, 1.0 / 32)
    f = ScalarField("exp(x)*y")
    X, Y = g.mesh()
    mask = X >= 0
    u = GridFunction.sample(g, f, mask)
    d = u.diff(dx=1)
    exact = f(X, Y, dx=1)
    err = np.max(np.abs(d.values[d.mask] - exact[d.mask]))
    assert err < 5e-3


def test_diff_mixed_matches_exact():
    u, f = grid_fn(1.0 / 64, "x**2*y**2")
    d = u.diff(dx=1, dy=1)
    X, Y = u.grid.mesh()
    exact = 4.0 * X * Y
    assert np.max(np.abs(d.values[d.mask] - exact[d.mask])) < 1e-8


def test_mask_too_thin_raises():
    g = geo.Grid2D.square(1.0, 0.5)
    mask = np.zeros((g.nx, g.ny), dtype=bool)
    mask[2, :] = True  # single-node segments along x
    u = GridFunction(g, np.ones((g.nx, g.ny)), mask)
    with pytest.raises(MaskTooThin):
        u.diff(dx=1)


def test_sobolev_norm_constant():
    g = geo.Grid2D.square(1.0, 1.0 / 8)
    u = GridFunction.sample(g, lambda x, y: np.ones_like(x))
    # H^0 norm of 1 on [-1,1]^2 is sqrt(area) = 2 up to grid quadrature
    n0 = u.sobolev_norm(0)
    assert n0 == pytest.approx(2.0, rel=0.15)
    # derivatives vanish so H^2 norm equals H^0 norm
    assert u.sobolev_norm(2) == pytest.approx(n0, rel=1e-12)


def test_sobolev_norm_monotone_in_s():
    u, _ = grid_fn(1.0 / 32)
    n0, n1, n2 = (u.sobolev_norm(s) for s in (0, 1, 2))
    assert n0 <= n1 <= n2


def test_relative_l2_error_zero_for_exact():
    u, f = grid_fn(1.0 / 16)
    assert relative_l2_error(u, f) == pytest.approx(0.0, abs=1e-14)
    v = u.copy()
    v.values *= 1.01
    assert relative_l2_error(v, f) == pytest.approx(0.01, rel=1e-6)
