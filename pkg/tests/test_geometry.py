"""Region decomposition, transversality, space-like and orientation checks."""

import numpy as np
import pytest

from mixtype import geometry as geo
from mixtype.errors import CoverageError, TransversalityViolation


def cross_spec(r_in=1.0, r_out=2.0):
    return geo.DomainSpec(
        radius_inner=r_in,
        radius_outer=r_out,
        gamma1=lambda x: -np.abs(x) if np.ndim(x) else -abs(x),
        gamma2=lambda x: np.abs(x) if np.ndim(x) else abs(x),
        gamma1_jets=geo.CurveJets(
            plus=np.array([0.0, -1.0] + [0.0] * 7),
            minus=np.array([0.0, 1.0] + [0.0] * 7),
        ),
        gamma2_jets=geo.CurveJets(
            plus=np.array([0.0, 1.0] + [0.0] * 7),
            minus=np.array([0.0, -1.0] + [0.0] * 7),
        ),
    )


def K_cross(x, y):
    return x**2 - y**2


def test_grid_origin_is_node():
    g = geo.Grid2D.square(2.0, 1.0 / 16)
    assert g.x[g.ix0] == 0.0
    assert g.y[g.iy0] == 0.0
    assert g.covers(2.0)


def test_region_labels_by_quadrant_axis():
    spec = cross_spec()
    g = geo.Grid2D.square(2.0, 1.0 / 32)
    rm = geo.build_region_map(spec, g, K_cross)
    ix, iy = g.ix0, g.iy0

    # points well inside each region
    def lab(x, y):
        return rm.labels[ix + int(round(x / g.h)), iy + int(round(y / g.h))]

    assert lab(1.0, 0.0) == geo.ELLIPTIC
    assert lab(-1.0, 0.0) == geo.ELLIPTIC
    assert lab(0.0, 1.0) == geo.HYP_UP
    assert lab(0.0, -1.0) == geo.HYP_DOWN
    assert lab(1.9, 1.9) == geo.EXTERIOR  # r > 2


def test_degenerate_band_is_thin():
    spec = cross_spec()
    g = geo.Grid2D.square(2.0, 1.0 / 64)
    rm = geo.build_region_map(spec, g, K_cross)
    frac = rm.fraction(geo.DEGENERATE)
    # band hugs y = |x| lines: O(h) fraction of the nodes
    assert frac < 8 * g.h


def test_transversality_violation_raised():
    spec = geo.DomainSpec(
        radius_inner=1.0,
        radius_outer=2.0,
        gamma1=lambda x: x,
        gamma2=lambda x: x + x**2,
    )
    with pytest.raises(TransversalityViolation):
        geo.build_region_map(spec, geo.Grid2D.square(2.0, 0.1), K_cross)


def test_coverage_error_raised():
    spec = cross_spec()
    g = geo.Grid2D.square(1.0, 0.1)  # too small for radius_outer = 2
    with pytest.raises(CoverageError):
        geo.build_region_map(spec, g, K_cross)


def test_spacelike_flat_curve_passes():
    rep = geo.spacelike_check(
        kappa=lambda x: 0.0,
        a=lambda x, y: 1.0,
        K=lambda x, y: x**2 - y**2,
        eta0=0.5,
    )
    assert rep["passed"]
    assert rep["sup_aK_kappax2"] == pytest.approx(0.0, abs=1e-10)


def test_spacelike_steep_curve_fails():
    # kappa = 2x gives a*K*kappa_x^2 = 4(x^2 - 4x^2) < 0 ... use K=1 instead
    rep = geo.spacelike_check(
        kappa=lambda x: 2.0 * x,
        a=lambda x, y: 1.0,
        K=lambda x, y: 1.0,
        eta0=0.5,
    )
    assert not rep["passed"]
    assert rep["sup_aK_kappax2"] == pytest.approx(4.0, rel=1e-6)


def test_orientation_passes_for_cross():
    spec = cross_spec()
    g = geo.Grid2D.square(2.0, 1.0 / 32)
    rm = geo.build_region_map(spec, g, K_cross)
    rep = geo.orientation_check(rm)
    assert rep["passed"]


def test_orientation_fails_for_reversed_sign():
    # K = y^2 - x^2: hyperbolic components flank the y-axis sideways,
    # so marching in y exits the component immediately.
    spec = geo.DomainSpec(
        radius_inner=1.0,
        radius_outer=2.0,
        gamma1=lambda x: -abs(x),
        gamma2=lambda x: abs(x),
        gamma1_jets=geo.CurveJets(np.array([0.0, -1.0]), np.array([0.0, 1.0])),
        gamma2_jets=geo.CurveJets(np.array([0.0, 1.0]), np.array([0.0, -1.0])),
    )
    g = geo.Grid2D.square(2.0, 1.0 / 32)
    rm = geo.build_region_map(spec, g, lambda x, y: y**2 - x**2)
    rep = geo.orientation_check(rm)
    assert not rep["passed"]


def test_orientation_vacuous_without_hyperbolic_region():
    spec = cross_spec()
    g = geo.Grid2D.square(2.0, 1.0 / 16)
    rm = geo.build_region_map(spec, g, lambda x, y: np.ones_like(x))
    rep = geo.orientation_check(rm)
    assert rep["passed"]


def test_fd_weights_exactness():
    # weights reproduce derivatives of polynomials exactly
    xs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * 0.1
    w = geo.fd_weights(xs, 2)
    # d2/dx2 of x^3 + 2x^2 at 0 is 4
    vals = xs**3 + 2 * xs**2
    assert w @ vals == pytest.approx(4.0, abs=1e-9)


def test_kappa_envelopes():
    spec = cross_spec()
    assert spec.kappa1(0.5) == pytest.approx(0.5)
    assert spec.kappa2(0.5) == pytest.approx(-0.5)
    kj = spec.kappa_jets(1)
    assert kj.plus[1] == pytest.approx(1.0)
    assert kj.minus[1] == pytest.approx(-1.0)


def test_region_map_csv_roundtrip(tmp_path):
    spec = cross_spec()
    g = geo.Grid2D.square(2.0, 0.25)
    rm = geo.build_region_map(spec, g, K_cross)
    p = tmp_path / "regions.csv"
    rm.to_csv(p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (g.nx * g.ny, 3)
    assert set(np.unique(data[:, 2])) <= {0.0, 1.0, 2.0, 3.0, 4.0}
