"""Cut-stencil Dirichlet solver, continuation, corrections, traces."""

import numpy as np
import pytest
import sympy as sp

from mixtype import elliptic as ell
from mixtype import geometry as geo
from mixtype.errors import MaximumPrincipleViolation
from mixtype.fields import CoefficientSet, ScalarField, X_SYM, Y_SYM, manufacture


def cross_spec():
    return geo.DomainSpec(
        radius_inner=1.0,
        radius_outer=1.5,
        gamma1=lambda x: -np.abs(x),
        gamma2=lambda x: np.abs(x),
        gamma1_jets=geo.CurveJets(np.array([0.0, -1.0]), np.array([0.0, 1.0])),
        gamma2_jets=geo.CurveJets(np.array([0.0, 1.0]), np.array([0.0, -1.0])),
    )


def manufactured_problem(u_expr="(x**2 - y**2)*exp(x*y)"):
    coeffs = CoefficientSet.tricomi_cross()
    u_star = ScalarField(u_expr)
    f = manufacture(coeffs, u_star)
    return (
        ell.EllipticProblem(coeffs=coeffs, domain=cross_spec(), f=f, g=u_star),
        u_star,
    )


def rel_err(problem, u_star, h):
    grid = geo.Grid2D.square(1.5, h)
    u = ell.solve_dirichlet(problem, grid)
    X, Y = grid.mesh()
    ref = u_star(X, Y)
    m = u.mask
    return np.sqrt(np.sum((u.values[m] - ref[m]) ** 2) / np.sum(ref[m] ** 2))


def test_manufactured_solution_accuracy_and_order():
    problem, u_star = manufactured_problem()
    e1 = rel_err(problem, u_star, 1.0 / 16)
    e2 = rel_err(problem, u_star, 1.0 / 32)
    assert e2 < 0.01
    rate = np.log2(e1 / e2)
    assert rate > 1.5


def test_zero_data_gives_zero_solution():
    coeffs = CoefficientSet.tricomi_cross(b1="x", c="-1")
    problem = ell.EllipticProblem(
        coeffs=coeffs,
        domain=cross_spec(),
        f=ScalarField("0"),
        g=ScalarField("0"),
    )
    u = ell.solve_dirichlet(problem, geo.Grid2D.square(1.5, 1.0 / 24))
    assert u.norm_max() < 1e-12


def test_max_principle_holds_for_harmonic_like_data():
    coeffs = CoefficientSet.tricomi_cross()
    problem = ell.EllipticProblem(
        coeffs=coeffs,
        domain=cross_spec(),
        f=ScalarField("0"),
        g=ScalarField("sin(3*x) + y"),
    )
    u = ell.solve_dirichlet(
        problem, geo.Grid2D.square(1.5, 1.0 / 24), check_max_principle=True
    )
    assert np.isfinite(u.values[u.mask]).all()


def test_max_principle_violation_detected_on_forged_solution(monkeypatch):
    # force the check to see an out-of-range interior value
    coeffs = CoefficientSet.tricomi_cross()
    problem = ell.EllipticProblem(
        coeffs=coeffs,
        domain=cross_spec(),
        f=ScalarField("0"),
        g=ScalarField("1"),
    )
    import scipy.sparse.linalg as spla

    real = spla.spsolve

    def forged(M, rhs):
        out = real(M, rhs)
        out[len(out) // 2] = 10.0
        return out

    monkeypatch.setattr(ell.spla, "spsolve", forged)
    monkeypatch.setattr(
        ell.spla, "lgmres", lambda M, rhs, **kw: (forged(M, rhs), 0)
    )
    with pytest.raises(MaximumPrincipleViolation):
        ell.solve_dirichlet(
            problem, geo.Grid2D.square(1.5, 1.0 / 8), check_max_principle=True
        )


def test_continuation_gap_decreases():
    problem, u_star = manufactured_problem()
    grid = geo.Grid2D.square(1.5, 1.0 / 16)
    u, history = ell.continuation(problem, grid, delta0=1e-1, tol=1e-10, max_steps=12)
    gaps = [rec["gap"] for rec in history]
    assert len(gaps) >= 3
    assert gaps[-1] < gaps[0]
    # limit agrees with the delta = 0 solve
    u0 = ell.solve_dirichlet(problem, grid, delta=0.0)
    diff = np.max(np.abs(u.values[u.mask] - u0.values[u.mask]))
    assert diff < 1e-3


def test_correction_matrix_matches_symbolic_operator():
    # dual route: apply u_yy + a0*u_xx to Q basis elements with sympy and
    # read off the degree (k-2) moments
    x, y = X_SYM, Y_SYM
    rng = np.random.default_rng(7)
    for k in (2, 3, 4, 5):
        a0 = float(rng.uniform(0.1, 2.0))
        m = k - 1
        M_sym = np.zeros((m, m))
        for i in range(m):
            Q = (x**2 - y**2) * x ** (k - 2 - i) * y**i
            img = sp.expand(sp.diff(Q, y, 2) + a0 * sp.diff(Q, x, 2))
            for j in range(m):
                d = sp.diff(img, x, k - 2 - j, y, j)
                M_sym[j, i] = float(d.subs({x: 0, y: 0})) / (
                    sp.factorial(k - 2 - j) * sp.factorial(j)
                )
        assert np.allclose(M_sym, ell.correction_matrix(k, a0), atol=1e-10)


def test_taylor_correction_lowest_order_hand_value():
    # model operator with a(0)*K(0) = 0 and delta = 0: c_0 = -f(0)/2
    coeffs = CoefficientSet.tricomi_cross()
    f = ScalarField("3 + x")
    poly, levels = ell.taylor_correction(coeffs, f, m=2, delta=0.0)
    assert levels[0][0] == pytest.approx(-1.5)
    assert poly(1.0, 0.0) == pytest.approx(-1.5)


def test_taylor_correction_kills_residual_jet():
    coeffs = CoefficientSet.tricomi_cross(a="1 + x", b1="y", c="x*y")
    f = ScalarField("1 + x - 2*y + x*y + x**2")
    m = 5
    poly, _ = ell.taylor_correction(coeffs, f, m=m, delta=0.3)
    co_delta = CoefficientSet(
        a=coeffs.a,
        K=ScalarField(coeffs.K.expr + sp.Float(0.3)),
        b1=coeffs.b1,
        b2=coeffs.b2,
        c=coeffs.c,
    )
    resid = co_delta.apply(poly).expr - f.expr
    for i in range(m - 1):
        for j in range(m - 1 - i):
            d = sp.diff(resid, X_SYM, i, Y_SYM, j)
            assert abs(float(d.subs({X_SYM: 0, Y_SYM: 0}))) < 1e-9
    # the correction vanishes on the degeneracy lines
    assert poly(0.4, 0.4) == pytest.approx(0.0, abs=1e-12)
    assert poly(0.4, -0.4) == pytest.approx(0.0, abs=1e-12)


def test_trace_extraction_second_order():
    problem, u_star = manufactured_problem()
    spec = cross_spec()
    errs = []
    for h in (1.0 / 16, 1.0 / 32):
        grid = geo.Grid2D.square(1.5, h)
        u = ell.solve_dirichlet(problem, grid)
        xs, phi, psi = ell.extract_traces(
            u, spec, problem.g, side="up", x_min=0.15, x_max=0.9
        )
        assert np.isfinite(psi).all()
        uy = u_star.derivative(dy=1)
        exact = np.array([uy(x, abs(x)) for x in xs])
        assert np.allclose(phi, 0.0, atol=1e-12)  # u* vanishes on the curve
        errs.append(np.max(np.abs(psi - exact)))
    assert errs[1] < 0.7 * errs[0]
    assert errs[1] < 0.02
