"""Cauchy marching in the hyperbolic components.

In the region where K < 0 the equation u_yy + a K u_xx + ... = f is a
wave equation with speed sqrt(a K') in the marching variable y, where
K' = -K.  The marcher is an explicit leapfrog scheme: second
differences in y, central differences in x, with the first-order b2
term folded into the pointwise update.  eps >= 0 regularizes the
degeneracy (K' + eps) near the initial curve.

Two drivers:

* ``march_strip``: rectangle with data on the bottom edge, used for
  estimate studies and stability experiments;
* ``march_component``: ragged march over a labeled hyperbolic component
  of the region map, activating nodes as the front passes the initial
  curve and reading not-yet-active and exterior values from the data
  extension v.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CFLViolation, InstabilityDetected
from .fields import CoefficientSet, GridFunction, ScalarField
from .geometry import DEGENERATE, DomainSpec, Grid2D, HYP_DOWN, HYP_UP, RegionMap

_BLOWUP_CAP = 1e6


@dataclass
class HyperbolicProblem:
    coeffs: CoefficientSet
    f: ScalarField
    eps: float = 0.0
    # boundary values where the march leaves the domain (disk edge,
    # strip sides); defaults to zero
    g: ScalarField | None = None


@dataclass
class EnergyLedger:
    """Weighted energy E(y) recorded along the march.

    E(y) = sum_x h e^(-mu y) (u^2/(K'+eps) + u_y^2/(K'+eps) + a u_x^2)
    """

    mu: float
    ys: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def record(self, y, e):
        self.ys.append(float(y))
        self.values.append(float(e))

    def ratio(self) -> float:
        v = np.asarray(self.values)
        v = v[v > 0]
        if len(v) == 0:
            return 1.0
        return float(np.max(v) / np.min(v))


@dataclass
class MarchResult:
    xs: np.ndarray
    ys: np.ndarray
    u: np.ndarray  # (nx, n_rows)
    energy: EnergyLedger
    dt: float
    cfl: float


def _kprime(problem, X, Y):
    return np.maximum(-problem.coeffs.K(X, Y), 0.0) + problem.eps


def _energy_row(problem, xs, y, u_row, uy_row, h, mu, active=None):
    kp = _kprime(problem, xs, np.full_like(xs, y))
    kp = np.maximum(kp, 1e-300)
    a = problem.coeffs.a(xs, np.full_like(xs, y))
    ux = np.gradient(u_row, h, edge_order=1)
    dens = u_row**2 / kp + uy_row**2 / kp + a * ux**2
    if active is not None:
        dens = np.where(active, dens, 0.0)
    return float(h * np.sum(np.exp(-mu * y) * dens))


def _update(problem, xs, y, cur, old, dt, h):
    """One leapfrog level: returns new interior values (all columns)."""
    Yv = np.full_like(xs, y)
    co = problem.coeffs
    uxx = np.zeros_like(cur)
    ux = np.zeros_like(cur)
    uxx[1:-1] = (cur[2:] - 2 * cur[1:-1] + cur[:-2]) / h**2
    ux[1:-1] = (cur[2:] - cur[:-2]) / (2 * h)
    speed2 = co.a(xs, Yv) * _kprime(problem, xs, Yv)
    rhs = problem.f(xs, Yv) + speed2 * uxx - co.b1(xs, Yv) * ux - co.c(xs, Yv) * cur
    b2 = co.b2(xs, Yv)
    denom = 1.0 / dt**2 + b2 / (2 * dt)
    new = (rhs + (2 * cur - old) / dt**2 + b2 * old / (2 * dt)) / denom
    return new


def march_strip(
    problem: HyperbolicProblem,
    x0: float,
    x1: float,
    y0: float,
    y1: float,
    h: float,
    phi,
    psi,
    cfl: float = 0.8,
    align: bool = True,
    mu: float = 0.0,
    record_energy: bool = True,
) -> MarchResult:
    """March data (phi, psi) on y = y0 up to y = y1 on [x0, x1].

    The two boundary columns are pinned to problem.g (zero if absent).
    With align=True the time step divides h, so recorded rows land on
    grid lines and the effective CFL number is at most ``cfl``; with
    align=False the step is exactly cfl * h / max speed, which lets
    stability experiments cross the CFL barrier on purpose.
    """
    nx = int(round((x1 - x0) / h)) + 1
    xs = x0 + h * np.arange(nx)
    X, Yg = np.meshgrid(xs, [y0, y1], indexing="ij")
    sup_speed = float(
        np.sqrt(
            np.max(
                np.maximum(
                    problem.coeffs.a(X, Yg) * _kprime(problem, X, Yg), 1e-12
                )
            )
        )
    )
    if align:
        n_sub = max(1, int(np.ceil(sup_speed / cfl)))
        dt = h / n_sub
    else:
        dt = cfl * h / sup_speed
        n_sub = None
    eff_cfl = sup_speed * dt / h

    n_steps = int(np.ceil((y1 - y0) / dt - 1e-12))
    gfun = problem.g if problem.g is not None else ScalarField("0")

    phi_v = np.asarray(phi(xs), dtype=float) if callable(phi) else np.asarray(phi)
    psi_v = np.asarray(psi(xs), dtype=float) if callable(psi) else np.asarray(psi)
    scale = max(
        1.0, np.max(np.abs(phi_v)), np.max(np.abs(psi_v))
    )

    # second-order start: u(y0 + dt) from the Taylor expansion with u_yy
    # taken from the equation
    co = problem.coeffs
    Y0 = np.full_like(xs, y0)
    phi_xx = np.zeros_like(phi_v)
    phi_x = np.zeros_like(phi_v)
    phi_xx[1:-1] = (phi_v[2:] - 2 * phi_v[1:-1] + phi_v[:-2]) / h**2
    phi_x[1:-1] = (phi_v[2:] - phi_v[:-2]) / (2 * h)
    uyy0 = (
        problem.f(xs, Y0)
        + co.a(xs, Y0) * _kprime(problem, xs, Y0) * phi_xx
        - co.b1(xs, Y0) * phi_x
        - co.b2(xs, Y0) * psi_v
        - co.c(xs, Y0) * phi_v
    )
    old = phi_v.copy()
    cur = phi_v + dt * psi_v + 0.5 * dt**2 * uyy0
    cur[0] = float(gfun(xs[0], y0 + dt))
    cur[-1] = float(gfun(xs[-1], y0 + dt))

    ledger = EnergyLedger(mu=mu)
    rows_y = [y0]
    rows_u = [old.copy()]
    if record_energy:
        ledger.record(y0, _energy_row(problem, xs, y0, phi_v, psi_v, h, mu))

    y = y0 + dt
    for n in range(1, n_steps + 1):
        if n > 1:
            new = _update(problem, xs, y - dt, cur, old, dt, h)
            new[0] = float(gfun(xs[0], y))
            new[-1] = float(gfun(xs[-1], y))
            old, cur = cur, new
        m = float(np.max(np.abs(cur)))
        if not np.isfinite(m) or m > _BLOWUP_CAP * scale:
            raise InstabilityDetected(
                f"march blew up at y={y:.4f} (max |u| = {m:.3e}, CFL {eff_cfl:.3f})"
            )
        on_row = (n_sub is not None and n % n_sub == 0) or n == n_steps
        if on_row or not align:
            rows_y.append(y)
            rows_u.append(cur.copy())
            if record_energy:
                uy = (cur - old) / dt
                ledger.record(y, _energy_row(problem, xs, y, cur, uy, h, mu))
        y += dt
    return MarchResult(
        xs=xs,
        ys=np.asarray(rows_y),
        u=np.column_stack(rows_u),
        energy=ledger,
        dt=dt,
        cfl=eff_cfl,
    )


def march_component(
    problem: HyperbolicProblem,
    grid: Grid2D,
    domain: DomainSpec,
    region: RegionMap,
    v,
    side: str = "up",
    cfl: float = 0.8,
    mu: float = 0.0,
) -> tuple:
    """March one hyperbolic component of the region map from its curve.

    ``v`` is the extension of the Cauchy data (callable on arrays); it
    supplies values at nodes the front has not reached and ghost values
    just behind the curve.  Nodes outside the disk are pinned to
    problem.g.  Returns (GridFunction on the component, EnergyLedger).
    """
    lab = HYP_UP if side == "up" else HYP_DOWN
    sgn = 1 if side == "up" else -1
    comp = region.mask(lab, DEGENERATE)
    xs = grid.x
    h = grid.h
    X, Y = grid.mesh()
    R = np.hypot(X, Y)
    inside = R <= domain.radius_outer + 1e-12
    cols = np.flatnonzero(comp.any(axis=1))
    if len(cols) == 0:
        return GridFunction.zeros(grid), EnergyLedger(mu=mu)

    hmask = region.mask(lab)
    sup_speed = float(
        np.sqrt(max(np.max(problem.coeffs.a(X, Y)[hmask] * _kprime(problem, X, Y)[hmask]), 1e-12))
    ) if hmask.any() else 1.0
    n_sub = max(1, int(np.ceil(sup_speed / cfl)))
    dt = h / n_sub
    eff_cfl = sup_speed * dt / h

    kap = domain.kappa1 if side == "up" else domain.kappa2
    kap_v = np.array([float(kap(x)) for x in xs])
    gfun = problem.g if problem.g is not None else ScalarField("0")

    iy_start = grid.iy0
    iy_end = grid.ny - 1 if side == "up" else 0
    n_rows = abs(iy_end - iy_start)
    n_steps = n_rows * n_sub

    y0 = 0.0
    old = np.asarray(v(xs, np.full_like(xs, y0)), dtype=float)
    cur = np.asarray(v(xs, np.full_like(xs, y0 + sgn * dt)), dtype=float)
    scale = max(1.0, float(np.max(np.abs(old))), float(np.max(np.abs(cur))))

    values = np.zeros((grid.nx, grid.ny))
    written = np.zeros((grid.nx, grid.ny), dtype=bool)
    ledger = EnergyLedger(mu=mu)

    # row y = 0 bookkeeping: only the corner node is active there
    iy = iy_start
    act0 = sgn * (0.0 - kap_v) >= -1e-12
    row_in = inside[:, iy]
    sel = act0 & row_in & comp[:, iy]
    values[sel, iy] = old[sel]
    written[sel, iy] = True

    y = y0 + sgn * dt
    for n in range(1, n_steps + 1):
        if n > 1:
            new = _update(problem, xs, y - sgn * dt, cur, old, sgn * dt, h)
            # activation: nodes the front has not yet reached, and ghost
            # values outside the disk or off the component, come from v/g
            tloc = sgn * (y - kap_v)
            fresh = tloc < dt  # not yet two levels of history behind the curve
            new = np.where(fresh, np.asarray(v(xs, np.full_like(xs, y))), new)
            out_disk = xs**2 + y**2 > domain.radius_outer**2
            if out_disk.any():
                new[out_disk] = gfun(xs[out_disk], np.full_like(xs[out_disk], y))
            old, cur = cur, new
        m = float(np.max(np.abs(cur)))
        if not np.isfinite(m) or m > _BLOWUP_CAP * scale:
            raise InstabilityDetected(
                f"component march blew up at y={y:.4f} (max |u| = {m:.3e})"
            )
        if n % n_sub == 0:
            iy = iy_start + sgn * (n // n_sub)
            sel = comp[:, iy] & inside[:, iy] & (sgn * (y - kap_v) >= -1e-12)
            values[sel, iy] = cur[sel]
            written[sel, iy] = True
            if sel.any():
                uy = (cur - old) / (sgn * dt)
                ledger.record(y, _energy_row(problem, xs, y, cur, uy, h, mu, active=sel))
        y += sgn * dt
    return GridFunction(grid, values, written), ledger


def conditions_report(
    coeffs: CoefficientSet,
    domain: DomainSpec,
    grid: Grid2D,
    region: RegionMap,
    side: str = "up",
    d: int = 2,
    bounds: dict | None = None,
) -> dict:
    """Sup constants for the structural conditions on one component.

    Reports, over the component's nodes,

        a_min, a_max                      (uniform ellipticity of a)
        levy = sup |b1| / (sqrt(K') + |K_x|)
        slope = sup K_x^2 / K_y
        thickness = sup (y - kappa)^d / K'

    A condition passes when its constant is finite and, if ``bounds``
    supplies a cap for it, at most that cap.
    """
    lab = HYP_UP if side == "up" else HYP_DOWN
    m = region.mask(lab)
    X, Y = grid.mesh()
    xs, ys = X[m], Y[m]
    kp = np.maximum(-coeffs.K(xs, ys), 1e-300)
    kx = -coeffs.K(xs, ys, dx=1)
    ky = -coeffs.K(xs, ys, dy=1) * (1 if side == "up" else -1)
    a = coeffs.a(xs, ys)
    b1 = coeffs.b1(xs, ys)
    kap = domain.kappa1 if side == "up" else domain.kappa2
    kv = np.array([float(kap(x)) for x in xs])
    dist = np.abs(ys - kv)

    rep = {
        "a_min": float(np.min(a)),
        "a_max": float(np.max(a)),
        "levy": float(np.max(np.abs(b1) / np.maximum(np.sqrt(kp) + np.abs(kx), 1e-300))),
        "slope": float(np.max(kx**2 / np.maximum(ky, 1e-300))),
        "thickness": float(np.max(dist**d / kp)),
        "d": d,
    }
    bounds = bounds or {}
    ok = rep["a_min"] > 0 and np.isfinite(rep["a_max"])
    for key in ("levy", "slope", "thickness"):
        ok = ok and np.isfinite(rep[key])
        if key in bounds:
            ok = ok and rep[key] <= bounds[key]
    if "a_min" in bounds:
        ok = ok and rep["a_min"] >= bounds["a_min"]
    if "a_max" in bounds:
        ok = ok and rep["a_max"] <= bounds["a_max"]
    rep["passed"] = bool(ok)
    return rep


def sobolev_norm_1d(vals: np.ndarray, h: float, s: int) -> float:
    """Discrete H^s norm of a sampled function of one variable."""
    total = 0.0
    cur = np.asarray(vals, dtype=float)
    for k in range(s + 1):
        total += float(np.sum(cur**2))
        cur = np.gradient(cur, h, edge_order=2)
    return float(np.sqrt(h * total))


def loss_ratio(
    problem: HyperbolicProblem,
    x0: float,
    x1: float,
    y0: float,
    y1: float,
    h: float,
    phi,
    psi,
    m: int,
    d: int,
) -> float:
    """Ratio ||u||_m / (||phi||_(m+d+1) + ||psi||_(m+d) + ||f||_(m+d)).

    The solution norm is measured on the marched rows away from the
    lateral boundaries; a stable ratio across resolutions reflects the
    estimate with loss of d derivatives.
    """
    res = march_strip(problem, x0, x1, y0, y1, h, phi, psi, record_energy=False)
    nx, nr = res.u.shape
    trim = max(2, int(0.15 * nx))
    sub = res.u[trim:-trim, :]
    g = Grid2D(h=h, nx=sub.shape[0], ny=sub.shape[1], ix0=0, iy0=0)
    uf = GridFunction(g, sub, np.ones_like(sub, dtype=bool))
    num = uf.sobolev_norm(m)
    xs = res.xs[trim:-trim]
    phi_v = np.asarray(phi(res.xs))[trim:-trim]
    psi_v = np.asarray(psi(res.xs))[trim:-trim]
    X, Yr = np.meshgrid(xs, res.ys, indexing="ij")
    fg = GridFunction(g, problem.f(X, Yr), np.ones_like(sub, dtype=bool))
    den = (
        sobolev_norm_1d(phi_v, h, m + d + 1)
        + sobolev_norm_1d(psi_v, h, m + d)
        + fg.sobolev_norm(m + d)
    )
    if den == 0:
        return 0.0
    return float(num / den)
