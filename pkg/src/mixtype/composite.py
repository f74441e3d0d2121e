"""Composite solve across the elliptic and hyperbolic regions.

The recipe, for an operator with K > 0 on the side lobes and K < 0
above and below:

1. solve the Dirichlet problem on the elliptic lobes Omega_+;
2. read Cauchy traces (phi from the boundary data, psi = u_y from the
   solve) on the upper and lower envelope curves;
3. extend the traces off each curve with the equation-compatible Taylor
   extension;
4. march the two hyperbolic components away from their curves, feeding
   ghost and fresh nodes from the extensions;
5. glue, and report the mismatch across the degeneracy band.

Marching must point away from the elliptic region into each component;
``orientation_check`` guards this, and for the reversed operator
(K = y^2 - x^2) the solve refuses to run.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate

from . import compat, elliptic, geometry as geo, hyperbolic as hyp
from .errors import GlueDefectExceeded, InstabilityDetected, OrientationFailure
from .fields import CoefficientSet, GridFunction, ScalarField, scalar_sobolev_norm


@dataclass
class CompositeResult:
    u: GridFunction
    region: geo.RegionMap
    traces: dict
    glue_defect: float
    energy_up: hyp.EnergyLedger
    energy_down: hyp.EnergyLedger
    diagnostics: dict = field(default_factory=dict)


def _curve_disk_reach(kappa, radius: float) -> float:
    """Largest |x| with x^2 + kappa(x)^2 <= radius^2 (bisection)."""
    lo, hi = 0.0, radius
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid**2 + float(kappa(mid)) ** 2 <= radius**2:
            lo = mid
        else:
            hi = mid
    return lo


def _fill_nan(xs: np.ndarray, vals: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(vals)
    if bad.any():
        good = ~bad
        vals = vals.copy()
        if good.sum() >= 4:
            # smooth fill: a linear patch would put kinks into the Cauchy
            # data that the extensions then amplify
            spl = interpolate.CubicSpline(xs[good], vals[good])
            vals[bad] = spl(xs[bad])
        else:
            vals[bad] = np.interp(xs[bad], xs[good], vals[good])
    return vals


def solve_composite(
    coeffs: CoefficientSet,
    domain: geo.DomainSpec,
    f: ScalarField,
    g: ScalarField,
    h: float,
    delta: float = 0.0,
    d_ext: int = 4,
    width: float = 0.25,
    cfl: float = 0.8,
    mu: float = 0.0,
    glue_tol: float | None = None,
) -> CompositeResult:
    grid = geo.Grid2D.square(domain.radius_outer, h)
    region = geo.build_region_map(
        grid=grid, spec=domain, K=lambda x, y: coeffs.K(x, y)
    )
    orient = geo.orientation_check(region)
    if not orient["passed"]:
        raise OrientationFailure(
            "y-marching does not enter the hyperbolic components; "
            "the composite recipe does not apply to this operator"
        )

    ep = elliptic.EllipticProblem(coeffs=coeffs, domain=domain, f=f, g=g, delta=delta)
    u_ell = elliptic.solve_dirichlet(ep, grid)

    R = domain.radius_outer
    traces = {}
    vs = {}
    for side in ("up", "down"):
        kap = domain.kappa1 if side == "up" else domain.kappa2
        reach = min(
            _curve_disk_reach(kap, R), _curve_disk_reach(lambda t: kap(-t), R)
        )
        xs, phi, psi = elliptic.extract_traces(
            u_ell, domain, g, side=side, x_min=-reach, x_max=reach
        )
        psi = _fill_nan(xs, psi)
        traces[side] = {"x": xs, "phi": phi, "psi": psi}
        vs[side] = compat.extend_cauchy_data(
            coeffs, f, xs, lambda t, k=kap: float(k(t)), phi, psi,
            d=d_ext, width=width,
        )

    hp = hyp.HyperbolicProblem(coeffs=coeffs, f=f, g=g)
    u_up, e_up = hyp.march_component(
        hp, grid, domain, region, vs["up"], side="up", cfl=cfl, mu=mu
    )
    u_dn, e_dn = hyp.march_component(
        hp, grid, domain, region, vs["down"], side="down", cfl=cfl, mu=mu
    )

    # glue defect: elliptic values against the extensions just inside the
    # lobes, where both are defined
    X, Y = grid.mesh()
    defect = 0.0
    for side in ("up", "down"):
        kap = domain.kappa1 if side == "up" else domain.kappa2
        kap_v = np.array([float(kap(x)) for x in grid.x])
        t = Y - kap_v[:, None]
        near = u_ell.mask & (np.abs(t) <= 0.5 * width)
        near &= np.abs(X) <= traces[side]["x"][-1]
        if near.any():
            vv = vs[side](X[near], Y[near])
            defect = max(defect, float(np.max(np.abs(vv - u_ell.values[near]))))
    if glue_tol is not None and defect > glue_tol:
        raise GlueDefectExceeded(
            f"glue defect {defect:.3e} exceeds tolerance {glue_tol:.3e}"
        )

    # assemble: extensions fill the band, marches and the elliptic solve
    # overwrite their own regions
    values = np.zeros((grid.nx, grid.ny))
    mask = np.zeros_like(values, dtype=bool)
    inside = np.hypot(X, Y) <= R + 1e-12
    band = region.mask(geo.DEGENERATE) & inside
    if band.any():
        up_pref = Y[band] >= 0
        vals_band = np.where(
            up_pref, vs["up"](X[band], Y[band]), vs["down"](X[band], Y[band])
        )
        values[band] = vals_band
        mask |= band
    for part in (u_up, u_dn, u_ell):
        values[part.mask] = part.values[part.mask]
        mask |= part.mask
    # re-impose the extensions on a thin layer around each curve so that
    # difference stencils straddling a curve read a single smooth field;
    # the marched values take over again a couple of cells away
    layer = 1.6 * h
    lays = {}
    for side in ("up", "down"):
        kap = domain.kappa1 if side == "up" else domain.kappa2
        kap_v = np.array([float(kap(x)) for x in grid.x])
        t = Y - kap_v[:, None]
        lay = inside & (np.abs(t) <= layer)
        lay &= np.abs(X) <= traces[side]["x"][-1]
        lays[side] = lay
    # where the two layers overlap (near the corner) the marches were
    # seeded from the extension on their own side; keep that pairing
    overlap = lays["up"] & lays["down"]
    lays["up"] &= ~overlap | (Y >= 0)
    lays["down"] &= ~overlap | (Y < 0)
    for side in ("up", "down"):
        lay = lays[side]
        if lay.any():
            values[lay] = vs[side](X[lay], Y[lay])
            mask |= lay
    u = GridFunction(grid, values, mask & inside)

    return CompositeResult(
        u=u,
        region=region,
        traces=traces,
        glue_defect=defect,
        energy_up=e_up,
        energy_down=e_dn,
        diagnostics={"orientation": orient, "h": h, "delta": delta},
    )


def estimate_constants(
    coeffs: CoefficientSet,
    domain: geo.DomainSpec,
    f: ScalarField,
    g: ScalarField,
    h: float,
    s_values=(0, 1, 2),
    r_inner: float | None = None,
    r_outer: float | None = None,
    d: int = 2,
    **kwargs,
) -> dict:
    """Ratios ||u||_(H^s, inner disk) / ||f||_(H^(s+d+3), outer disk).

    Stability of these constants under grid refinement is the discrete
    shadow of the interior estimate with loss of d + 3 derivatives.
    """
    r_inner = r_inner if r_inner is not None else domain.radius_inner
    r_outer = r_outer if r_outer is not None else domain.radius_outer
    res = solve_composite(coeffs, domain, f, g, h, **kwargs)
    grid = res.u.grid
    X, Y = grid.mesh()
    m_in = np.hypot(X, Y) <= r_inner
    m_out = np.hypot(X, Y) <= r_outer
    out = {}
    for s in s_values:
        num = res.u.sobolev_norm(s, mask=m_in)
        den = scalar_sobolev_norm(f, grid, s + d + 3, mask=m_out)
        out[s] = num / den if den > 0 else 0.0
    return out


def demonstrate_failure_mode(
    coeffs: CoefficientSet, h: float = 1.0 / 32, force: bool = False
) -> dict:
    """Diagnose whether y-marching suits the given operator.

    Returns {'failure_mode': None} when the orientation check passes
    and {'failure_mode': 'orientation'} when it does not.  With
    force=True a march is attempted anyway, using the signed wave speed
    a*(-K): wherever that is negative the leapfrog recursion amplifies
    every mode and the run trips the instability guard.
    """
    domain = geo.DomainSpec(
        radius_inner=1.0,
        radius_outer=1.5,
        gamma1=lambda x: -np.abs(x) if np.ndim(x) else -abs(x),
        gamma2=lambda x: np.abs(x) if np.ndim(x) else abs(x),
        gamma1_jets=geo.CurveJets(np.array([0.0, -1.0]), np.array([0.0, 1.0])),
        gamma2_jets=geo.CurveJets(np.array([0.0, 1.0]), np.array([0.0, -1.0])),
    )
    grid = geo.Grid2D.square(domain.radius_outer, h)
    region = geo.build_region_map(
        grid=grid, spec=domain, K=lambda x, y: coeffs.K(x, y)
    )
    orient = geo.orientation_check(region)
    out = {
        "failure_mode": None if orient["passed"] else "orientation",
        "orientation": orient,
    }
    if orient["passed"] or not force:
        return out

    # forced march across the strip with the signed speed; data is an
    # oscillatory profile so u_xx is nonzero from the first level
    xs = grid.x
    dt = 0.8 * h
    cur = np.cos(8.0 * np.pi * xs)
    old = cur.copy()
    scale = float(np.max(np.abs(cur)))
    y = 0.0
    n_steps = int(round(domain.radius_outer / dt))
    for _ in range(n_steps):
        y += dt
        Yv = np.full_like(xs, y)
        speed2 = coeffs.a(xs, Yv) * (-coeffs.K(xs, Yv))
        uxx = np.zeros_like(cur)
        uxx[1:-1] = (cur[2:] - 2 * cur[1:-1] + cur[:-2]) / h**2
        new = 2 * cur - old + dt**2 * speed2 * uxx
        old, cur = cur, new
        if np.max(np.abs(cur)) > 1e6 * scale:
            raise InstabilityDetected(
                f"forced march blew up at y = {y:.3f}: "
                f"max |u| = {np.max(np.abs(cur)):.3e}"
            )
    out["forced_march_max"] = float(np.max(np.abs(cur)))
    return out


def counterexample_reversed_operator(h: float = 1.0 / 32) -> None:
    """The same recipe with K = y^2 - x^2 must refuse to run.

    Raises OrientationFailure: the elliptic lobes now sit above and
    below, the hyperbolic components flank sideways, and y-marching
    exits them immediately.
    """
    domain = geo.DomainSpec(
        radius_inner=1.0,
        radius_outer=1.5,
        gamma1=lambda x: -abs(x),
        gamma2=lambda x: abs(x),
        gamma1_jets=geo.CurveJets(np.array([0.0, -1.0]), np.array([0.0, 1.0])),
        gamma2_jets=geo.CurveJets(np.array([0.0, 1.0]), np.array([0.0, -1.0])),
    )
    coeffs = CoefficientSet(
        a=ScalarField("1"),
        K=ScalarField("y**2 - x**2"),
        b1=ScalarField("0"),
        b2=ScalarField("0"),
        c=ScalarField("0"),
    )
    solve_composite(coeffs, domain, ScalarField("0"), ScalarField("0"), h)
