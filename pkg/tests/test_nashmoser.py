"""Scaled Monge-Ampere residual, transform, smoothing, and iteration."""

import numpy as np
import pytest

from mixtype import nashmoser as nm
from mixtype.errors import TransformDegenerate


def make_problem(eps=0.05, h=1.0 / 32, psi="1"):
    return nm.NashMoserProblem(eps=eps, h=h, psi=psi)


def bump(grid, scale=1.0):
    X, Y = grid.mesh()
    return scale * np.exp(-4 * (X**2 + Y**2)) * np.cos(2 * X) * np.cos(3 * Y)


def test_residual_at_zero_matches_hand_value():
    # F(0) = -eps^3 (x1^2 - x2^2) psi(..., 0 slots)
    p = make_problem(psi="1")
    F0 = p.residual(np.zeros((p.grid.nx, p.grid.ny)))
    X, Y = p.grid.mesh()
    assert np.allclose(F0, -p.eps**3 * (X**2 - Y**2), atol=1e-14)


def test_det_identity_machine_precision():
    p = make_problem(psi="1 + u + p1**2")
    rng = np.random.default_rng(3)
    w = bump(p.grid, 0.5) + 0.01 * rng.standard_normal((p.grid.nx, p.grid.ny))
    assert p.det_identity_gap(w) <= 1e-10


def test_gradient_check_slope_one():
    p = make_problem(psi="1 + u/2 + p2/3")
    w = bump(p.grid, 0.3)
    rho = bump(p.grid, 1.0) * np.cos(p.grid.mesh()[0])
    rep = nm.gradient_check(p, w, rho)
    assert abs(rep["slope"] - 1.0) <= 0.1
    assert rep["gaps"][-1] < 0.05


def test_transform_identity_at_zero():
    p = make_problem()
    y1, diag = p.transform(np.zeros((p.grid.nx, p.grid.ny)))
    assert np.array_equal(y1, np.broadcast_to(p.grid.x[:, None], y1.shape))
    assert diag["max_dev"] == 0.0
    assert diag["b12_max"] == 0.0


def test_transform_deviation_linear_in_eps():
    w = None
    devs = {}
    for eps in (0.02, 0.04):
        p = make_problem(eps=eps)
        if w is None:
            w = bump(p.grid)
        _, diag = p.transform(w)
        devs[eps] = diag["max_dev"]
    ratio = devs[0.04] / devs[0.02]
    assert abs(ratio - 2.0) <= 0.3


def test_transform_kills_mixed_term():
    h = 1.0 / 64
    p = make_problem(eps=0.05, h=h)
    w = bump(p.grid)
    _, diag = p.transform(w)
    assert diag["b12_max"] <= 5 * h**2


def test_transform_degenerate_raises():
    p = make_problem(eps=0.5, h=1.0 / 16)
    X, Y = p.grid.mesh()
    # curvature large enough to flip the sign of Phi22
    w = -20.0 * X**2
    with pytest.raises(TransformDegenerate):
        p.transform(w)


def test_smoothing_constants_stable():
    p = make_problem(h=1.0 / 64)
    u = nm.spectral_test_function(p.grid, decay=3.0, seed=11)
    reps = nm.smoothing_constants(p, u, thetas=(4, 8, 16))
    bounds = [r["bound"] for r in reps]
    approxs = [r["approx"] for r in reps]
    assert max(bounds) / min(bounds) < 2.0
    assert max(approxs) / min(approxs) < 2.0
    assert max(bounds) < 2.0


def test_iteration_contracts_residual():
    p = make_problem(eps=0.05, h=1.0 / 64)
    w, history = p.iterate(n_steps=3)
    assert history[-1] <= 0.1 * history[0]
    assert np.all(np.isfinite(w))
