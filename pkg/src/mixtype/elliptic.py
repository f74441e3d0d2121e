"""Dirichlet solver on the elliptic lobes and the pieces built on it.

The operator is L u = u_yy + a(x,y) (K(x,y) + delta) u_xx + b1 u_x
+ b2 u_y + c u on Omega_+ = {K > 0} intersected with the disk of radius
``radius_outer``.  Boundary data is imposed on the true boundary (the
degeneracy curves and the outer circle) through cut stencils: where a
grid arm crosses the boundary, the crossing point is located by
bisection and a non-uniform three point stencil is used, which keeps
the scheme second order up to the curved boundary.

delta > 0 regularizes the degeneracy; ``continuation`` drives delta to
zero geometrically while watching the Cauchy gap between successive
solutions.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla
import sympy as sp

from .errors import (
    ContinuationStall,
    MaximumPrincipleViolation,
    SingularSystem,
    SolverDivergence,
)
from .fields import ScalarField, X_SYM, Y_SYM
from .geometry import DomainSpec, Grid2D
from .fields import CoefficientSet, GridFunction

_BISECT_ITERS = 60


@dataclass
class EllipticProblem:
    coeffs: CoefficientSet
    domain: DomainSpec
    f: ScalarField
    g: ScalarField  # Dirichlet data on curves and outer circle
    delta: float = 0.0


def _region_indicator(problem):
    K = problem.coeffs.K
    R = problem.domain.radius_outer

    def phi(x, y):
        return np.minimum(K(x, y), R - np.hypot(x, y))

    return phi


def _crossing(phi, p0, p1):
    """Fraction t in (0, 1] where phi crosses zero on [p0, p1]."""
    a, b = 0.0, 1.0
    x0, y0 = p0
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    for _ in range(_BISECT_ITERS):
        m = 0.5 * (a + b)
        if phi(x0 + m * dx, y0 + m * dy) > 0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def solve_dirichlet(
    problem: EllipticProblem,
    grid: Grid2D,
    delta: float | None = None,
    check_max_principle: bool = False,
) -> GridFunction:
    """Second order cut-stencil solve of the Dirichlet problem on Omega_+."""
    if delta is None:
        delta = problem.delta
    phi = _region_indicator(problem)
    X, Y = grid.mesh()
    h = grid.h
    inside = phi(X, Y) > 0
    nx, ny = grid.nx, grid.ny

    idx = -np.ones((nx, ny), dtype=np.int64)
    solved = np.argwhere(inside)
    idx[inside] = np.arange(len(solved))
    n = len(solved)
    if n == 0:
        raise SolverDivergence("no solved nodes: region is empty on this grid")

    co = problem.coeffs
    A = co.a(X, Y) * (co.K(X, Y) + delta)
    B1 = co.b1(X, Y)
    B2 = co.b2(X, Y)
    C = co.c(X, Y)
    F = problem.f(X, Y)

    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    bvals = []

    # neighbor table: (di, dj, axis)
    nbrs = ((-1, 0, 0), (1, 0, 0), (0, -1, 1), (0, 1, 1))

    for k, (i, j) in enumerate(solved):
        x, y = X[i, j], Y[i, j]
        # arm lengths: theta = 1 if neighbor solved, else cut fraction
        theta = {}
        gval = {}
        for di, dj, ax in nbrs:
            ii, jj = i + di, j + dj
            if 0 <= ii < nx and 0 <= jj < ny and inside[ii, jj]:
                theta[(di, dj)] = 1.0
                gval[(di, dj)] = None
            else:
                t = _crossing(phi, (x, y), (x + di * h, y + dj * h))
                t = max(t, 1e-6)
                theta[(di, dj)] = t
                xc, yc = x + t * di * h, y + t * dj * h
                gv = float(problem.g(xc, yc))
                gval[(di, dj)] = gv
                bvals.append(gv)

        diag = C[i, j]
        rhs[k] += F[i, j]

        def add(di, dj, w):
            nonlocal diag
            if gval[(di, dj)] is None:
                rows.append(k)
                cols.append(idx[i + di, j + dj])
                vals.append(w)
            else:
                rhs[k] -= w * gval[(di, dj)]

        for ax, (dm, dp) in (((0), ((-1, 0), (1, 0))), ((1), ((0, -1), (0, 1)))):
            hl = theta[dm] * h
            hr = theta[dp] * h
            second = A[i, j] if ax == 0 else 1.0
            first = B1[i, j] if ax == 0 else B2[i, j]
            # non-uniform 3 point stencils
            wl2 = 2.0 / (hl * (hl + hr))
            wr2 = 2.0 / (hr * (hl + hr))
            wc2 = -2.0 / (hl * hr)
            wl1 = -hr / (hl * (hl + hr))
            wr1 = hl / (hr * (hl + hr))
            wc1 = (hr - hl) / (hl * hr)
            add(*dm, second * wl2 + first * wl1)
            add(*dp, second * wr2 + first * wr1)
            diag += second * wc2 + first * wc1

        rows.append(k)
        cols.append(k)
        vals.append(diag)

    M = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    try:
        sol = spla.spsolve(M, rhs)
    except RuntimeError as exc:  # pragma: no cover - singular factorization
        raise SolverDivergence(f"direct solve failed: {exc}") from exc
    res = np.linalg.norm(M @ sol - rhs)
    scale = np.linalg.norm(rhs) or 1.0
    if not np.all(np.isfinite(sol)) or res / scale > 1e-8:
        sol, info = spla.lgmres(M, rhs, rtol=1e-12, maxiter=2000)
        if info != 0 or not np.all(np.isfinite(sol)):
            raise SolverDivergence(
                f"linear solve did not converge (relative residual {res / scale:.2e})"
            )

    values = np.zeros((nx, ny))
    values[inside] = sol
    u = GridFunction(grid, values, inside)

    if check_max_principle:
        csup = float(np.max(C[inside])) if inside.any() else 0.0
        fsup = float(np.max(np.abs(F[inside])))
        if csup <= 0 and fsup < 1e-13 and bvals:
            lo, hi = min(bvals), max(bvals)
            tol = 1e-10 * (1.0 + max(abs(lo), abs(hi)))
            if sol.min() < lo - tol or sol.max() > hi + tol:
                raise MaximumPrincipleViolation(
                    f"solution range [{sol.min():.3e}, {sol.max():.3e}] exceeds "
                    f"boundary range [{lo:.3e}, {hi:.3e}]"
                )
    return u


def continuation(
    problem: EllipticProblem,
    grid: Grid2D,
    delta0: float = 1e-2,
    factor: float = 0.5,
    tol: float = 1e-8,
    max_steps: int = 30,
):
    """Drive delta -> 0 and return (solution at delta=0 limit, history).

    The history records (delta, gap) where gap is the L2 distance to the
    previous iterate.  Stalls (two consecutive non-decreasing gaps after
    the initial transient) raise ContinuationStall.
    """
    prev = None
    history = []
    delta = delta0
    grow = 0
    last_gap = np.inf
    for step in range(max_steps):
        u = solve_dirichlet(problem, grid, delta=delta)
        if prev is not None:
            diff = GridFunction(grid, u.values - prev.values, u.mask & prev.mask)
            gap = diff.norm_l2()
            history.append({"delta": delta, "gap": gap})
            scale = u.norm_l2() or 1.0
            if gap < tol * scale:
                return u, history
            if step > 2 and gap > last_gap * (1.0 + 1e-12):
                grow += 1
                if grow >= 2:
                    raise ContinuationStall(
                        f"Cauchy gap stopped decreasing at delta={delta:.3e}"
                    )
            else:
                grow = 0
            last_gap = gap
        prev = u
        delta *= factor
    return prev, history


def correction_matrix(k: int, a0: float) -> np.ndarray:
    """Linear system mapping correction coefficients to residual moments.

    For the constant-coefficient model u_yy + a0 u_xx applied to
    Q = (x^2 - y^2) sum_i c_i x^(k-2-i) y^i, the degree (k-2) part of
    the image in the monomial basis x^(k-2-j) y^j is M c with

        M[j, j]   = a0 (k-j)(k-j-1) - (j+2)(j+1)
        M[j, j-2] = -a0 (k-j)(k-j-1)
        M[j, j+2] = (j+2)(j+1)
    """
    m = k - 1
    M = np.zeros((m, m))
    for j in range(m):
        M[j, j] = a0 * (k - j) * (k - j - 1) - (j + 2) * (j + 1)
        if j >= 2:
            M[j, j - 2] = -a0 * (k - j) * (k - j - 1)
        if j + 2 < m:
            M[j, j + 2] = (j + 2) * (j + 1)
    return M


def taylor_correction(coeffs: CoefficientSet, f: ScalarField, m: int, delta: float):
    """Polynomial u vanishing on {x^2 = y^2} with L u - f = O(|x|^(m-1)) at 0.

    Builds Q_k = (x^2 - y^2) P_(k-2), k = 2..m, level by level: each level
    cancels the degree (k-2) homogeneous part of the running residual.
    The level systems use the frozen coefficient a0 = a(0) (K(0) + delta);
    variable-coefficient and lower-order contributions enter through the
    symbolically recomputed residual.  Returns (poly, levels) where poly
    is the corrected ScalarField and levels the list of coefficient arrays.
    """
    a0 = float(coeffs.a(0.0, 0.0)) * (float(coeffs.K(0.0, 0.0)) + delta)
    x, y = X_SYM, Y_SYM
    total = sp.Integer(0)
    levels = []
    co_delta = CoefficientSet(
        a=coeffs.a,
        K=ScalarField(coeffs.K.expr + sp.Float(delta)),
        b1=coeffs.b1,
        b2=coeffs.b2,
        c=coeffs.c,
    )
    for k in range(2, m + 1):
        resid = f.expr - co_delta.apply(ScalarField(total)).expr
        # degree (k-2) homogeneous Taylor part of the residual at 0
        want = np.zeros(k - 1)
        for j in range(k - 1):
            i = k - 2 - j
            d = sp.diff(resid, x, i, y, j)
            want[j] = float(d.subs({x: 0, y: 0})) / (_fact(i) * _fact(j))
        # the frozen system is exact at this degree: variable-coefficient
        # and lower-order contributions of Q_k are all of degree > k-2,
        # so they surface in the residuals of later levels
        M = correction_matrix(k, a0)
        if np.linalg.cond(M) > 1e12:
            raise SingularSystem(f"level {k} correction system is singular")
        c = np.linalg.solve(M, want)
        levels.append(c)
        P = sum(
            sp.Float(c[i]) * x ** (k - 2 - i) * y**i for i in range(k - 1)
        )
        total = sp.expand(total + (x**2 - y**2) * P)
    return ScalarField(total), levels


def _fact(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def extract_traces(
    u: GridFunction,
    domain: DomainSpec,
    g: ScalarField,
    side: str,
    x_min: float,
    x_max: float,
):
    """Cauchy data (phi, psi) on the initial curve from the elliptic solve.

    side='up' reads along y = kappa1(x) with u_y taken one-sidedly from
    the elliptic lobes below; side='down' uses y = kappa2(x) from above.
    phi is the known Dirichlet value g on the curve; psi comes from a
    quadratic fit through the curve point and the nearest solved nodes,
    differentiated at the curve.  Columns with no room return NaN psi.
    """
    grid = u.grid
    xs = grid.x
    sel = (xs >= x_min - 1e-12) & (xs <= x_max + 1e-12)
    out_x, out_phi, out_psi = [], [], []
    for ix in np.flatnonzero(sel):
        x = xs[ix]
        yc = float(domain.kappa1(x) if side == "up" else domain.kappa2(x))
        col_mask = u.mask[ix, :]
        ys = grid.y
        if side == "up":
            cand = np.flatnonzero(col_mask & (ys < yc - 1e-12))
            cand = cand[::-1]  # nearest first
        else:
            cand = np.flatnonzero(col_mask & (ys > yc + 1e-12))
        phi_val = float(g(x, yc))
        if abs(x) < 0.5 * grid.h:
            # corner column: u equals g on two transversal curves
            # through the origin, which pins the whole gradient there,
            # so u_y(0) = g_y(0) exactly (no nodes to fit anyway)
            psi_val = float(g(0.0, 0.0, 0, 1))
        elif len(cand) >= 3:
            take = cand[: min(4, len(cand))]
            pts_y = [yc] + [ys[j] for j in take]
            pts_v = [phi_val] + [u.values[ix, j] for j in take]
            co = np.polyfit(np.asarray(pts_y) - yc, pts_v, len(pts_y) - 1)
            psi_val = float(co[-2])  # derivative at the curve point
        else:
            # too few solved nodes under the curve for a reliable
            # one-sided derivative; let the caller interpolate instead
            psi_val = np.nan
        out_x.append(x)
        out_phi.append(phi_val)
        out_psi.append(psi_val)
    return np.asarray(out_x), np.asarray(out_phi), np.asarray(out_psi)
