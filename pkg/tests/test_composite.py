"""End-to-end mixed solves, gluing, estimates, and the reversed operator."""

import numpy as np
import pytest

from mixtype import composite, geometry as geo
from mixtype.errors import GlueDefectExceeded, OrientationFailure
from mixtype.fields import CoefficientSet, ScalarField, manufacture


def cross_domain(r_out=1.5):
    return geo.DomainSpec(
        radius_inner=1.0,
        radius_outer=r_out,
        gamma1=lambda x: -np.abs(x) if np.ndim(x) else -abs(x),
        gamma2=lambda x: np.abs(x) if np.ndim(x) else abs(x),
        gamma1_jets=geo.CurveJets(np.array([0.0, -1.0]), np.array([0.0, 1.0])),
        gamma2_jets=geo.CurveJets(np.array([0.0, 1.0]), np.array([0.0, -1.0])),
    )


def manufactured():
    coeffs = CoefficientSet.tricomi_cross()
    u_star = ScalarField("(x**2 - y**2)*exp(x*y)")
    f = manufacture(coeffs, u_star)
    return coeffs, u_star, f


def rel_l2(res, u_star):
    X, Y = res.u.grid.mesh()
    m = res.u.mask
    ref = u_star(X, Y)
    return float(
        np.sqrt(np.sum((res.u.values[m] - ref[m]) ** 2) / np.sum(ref[m] ** 2))
    )


def test_manufactured_composite_accuracy():
    coeffs, u_star, f = manufactured()
    res = composite.solve_composite(
        coeffs, cross_domain(), f, u_star, h=1.0 / 32
    )
    assert rel_l2(res, u_star) < 0.01
    assert res.glue_defect < 0.05


def test_manufactured_composite_order():
    coeffs, u_star, f = manufactured()
    errs = [
        rel_l2(
            composite.solve_composite(coeffs, cross_domain(), f, u_star, h=h),
            u_star,
        )
        for h in (1.0 / 16, 1.0 / 32)
    ]
    assert np.log2(errs[0] / errs[1]) > 1.5


def test_zero_data_zero_solution():
    coeffs = CoefficientSet.tricomi_cross()
    res = composite.solve_composite(
        coeffs, cross_domain(), ScalarField("0"), ScalarField("0"), h=1.0 / 32
    )
    assert res.u.norm_max() <= 1e-12
    assert res.glue_defect <= 1e-12


def test_reversed_operator_refused():
    with pytest.raises(OrientationFailure):
        composite.counterexample_reversed_operator(h=1.0 / 32)


def test_glue_tolerance_enforced():
    coeffs, u_star, f = manufactured()
    with pytest.raises(GlueDefectExceeded):
        composite.solve_composite(
            coeffs, cross_domain(), f, u_star, h=1.0 / 16, glue_tol=1e-15
        )


def test_estimate_constants_stable():
    coeffs, u_star, f = manufactured()
    tables = [
        composite.estimate_constants(
            coeffs, cross_domain(), f, u_star, h=h, s_values=(0, 1, 2)
        )
        for h in (1.0 / 16, 1.0 / 32)
    ]
    for s in (0, 1, 2):
        c1, c2 = tables[0][s], tables[1][s]
        assert c2 > 0
        assert abs(c2 - c1) / c1 < 0.2, f"s={s}: {c1} vs {c2}"
