"""Nash-Moser iteration for a Monge-Ampere equation of mixed type.

The unknown surface is u(s) = s1^2/2 + eps^5 w(s / eps^2) near the
origin, with det D^2 u = K(s) psi(s, u, Du) and K(s) = s1^2 - s2^2.
In the blown-up coordinate x = s / eps^2 on the unit square the scaled
residual is

    F(w) = (1 + eps w_11) w_22 - eps w_12^2 - K psi~ / eps,

where K psi~ / eps = eps^3 (x1^2 - x2^2) psi~ and psi~ carries the
slow arguments (eps^2 x, eps^4 x1^2/2 + eps^5 w, eps^2 x1 + eps^3 w_1,
eps^3 w_2).  The linearization is the mixed-type operator

    L(w) rho = Phi11 rho_11 + 2 Phi12 rho_12 + Phi22 rho_22
               + a1 rho_1 + a2 rho_2 + a0 rho,

with the cofactors Phi11 = eps w_22, Phi12 = -eps w_12,
Phi22 = 1 + eps w_11 and a_i = -eps^2 K psi~_{p_i}, a0 = -eps^4 K
psi~_u.  The coordinate change y2 = x2, Phi12 d1 y1 + Phi22 d2 y1 = 0
with y1 = x1 on the axis removes the mixed term; in y the operator is
again of the u_yy + a K u_xx + ... form and is handed to the composite
solver.  Each iteration smooths the increment with a spectral low-pass
whose cutoff theta_l = theta0 2^l grows geometrically.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np
import sympy as sp

from . import composite, geometry as geo
from .compat import smooth_cutoff
from .errors import TransformDegenerate
from .fields import GridFunction, ScalarField, SplineField
from .geometry import CurveJets, DomainSpec, Grid2D

_PSI_SYMS = sp.symbols("s1 s2 u p1 p2")


def _d1(arr, h):
    out = np.empty_like(arr)
    out[1:-1] = (arr[2:] - arr[:-2]) / (2 * h)
    out[0] = (-3 * arr[0] + 4 * arr[1] - arr[2]) / (2 * h)
    out[-1] = (3 * arr[-1] - 4 * arr[-2] + arr[-3]) / (2 * h)
    return out


def dx(arr, h, axis=0):
    return np.apply_along_axis(_d1, axis, arr, h)


def dxx(arr, h, axis=0):
    def f(a):
        out = np.empty_like(a)
        out[1:-1] = (a[2:] - 2 * a[1:-1] + a[:-2]) / h**2
        out[0] = (2 * a[0] - 5 * a[1] + 4 * a[2] - a[3]) / h**2
        out[-1] = (2 * a[-1] - 5 * a[-2] + 4 * a[-3] - a[-4]) / h**2
        return out

    return np.apply_along_axis(f, axis, arr)


@dataclass
class NashMoserProblem:
    """Scaled Monge-Ampere problem on the unit square."""

    eps: float
    psi: str = "1"  # expression in s1, s2, u, p1, p2; must be positive
    grid: Grid2D = None
    h: float = 1.0 / 64
    radius_outer: float = 0.9
    radius_inner: float = 0.55

    def __post_init__(self):
        if self.grid is None:
            self.grid = Grid2D.square(1.0, self.h)
        expr = sp.sympify(self.psi)
        self._psi = sp.lambdify(_PSI_SYMS, expr, "numpy")
        self._psi_u = sp.lambdify(_PSI_SYMS, sp.diff(expr, _PSI_SYMS[2]), "numpy")
        self._psi_p1 = sp.lambdify(_PSI_SYMS, sp.diff(expr, _PSI_SYMS[3]), "numpy")
        self._psi_p2 = sp.lambdify(_PSI_SYMS, sp.diff(expr, _PSI_SYMS[4]), "numpy")

    # -- pointwise fields ------------------------------------------------

    def _w_derivs(self, w):
        h = self.grid.h
        return {
            "w1": dx(w, h, 0),
            "w2": dx(w, h, 1),
            "w11": dxx(w, h, 0),
            "w22": dxx(w, h, 1),
            "w12": dx(dx(w, h, 0), h, 1),
        }

    def _psi_args(self, w, d):
        X, Y = self.grid.mesh()
        e = self.eps
        return (
            e**2 * X,
            e**2 * Y,
            e**4 * X**2 / 2 + e**5 * w,
            e**2 * X + e**3 * d["w1"],
            e**3 * d["w2"],
        )

    def K_slow(self):
        """K at the slow argument: eps^4 (x1^2 - x2^2) on the grid."""
        X, Y = self.grid.mesh()
        return self.eps**4 * (X**2 - Y**2)

    def residual(self, w):
        """F(w) on the grid."""
        d = self._w_derivs(w)
        e = self.eps
        args = self._psi_args(w, d)
        psi = np.broadcast_to(self._psi(*args), w.shape)
        return (
            (1 + e * d["w11"]) * d["w22"]
            - e * d["w12"] ** 2
            - self.K_slow() * psi / e
        )

    def cofactors(self, w, d=None):
        d = d or self._w_derivs(w)
        e = self.eps
        ones = np.ones_like(w)
        return {
            "11": e * d["w22"],
            "12": -e * d["w12"],
            "22": 1 + e * d["w11"],
        }

    def lower_order(self, w, d=None):
        d = d or self._w_derivs(w)
        e = self.eps
        args = self._psi_args(w, d)
        K = self.K_slow()
        shape = w.shape
        a1 = -(e**2) * K * np.broadcast_to(self._psi_p1(*args), shape)
        a2 = -(e**2) * K * np.broadcast_to(self._psi_p2(*args), shape)
        a0 = -(e**4) * K * np.broadcast_to(self._psi_u(*args), shape)
        return a1, a2, a0

    def det_identity_gap(self, w):
        """max |det(Phi) - (eps F(w) + K psi~)|; an algebraic identity."""
        d = self._w_derivs(w)
        phi = self.cofactors(w, d)
        det = phi["11"] * phi["22"] - phi["12"] ** 2
        args = self._psi_args(w, d)
        psi = np.broadcast_to(self._psi(*args), w.shape)
        other = self.eps * self.residual(w) + self.K_slow() * psi
        return float(np.max(np.abs(det - other)))

    def linearize(self, w, rho):
        """L(w) rho on the grid (x coordinates, no transform)."""
        d = self._w_derivs(w)
        phi = self.cofactors(w, d)
        a1, a2, a0 = self.lower_order(w, d)
        h = self.grid.h
        return (
            phi["11"] * dxx(rho, h, 0)
            + 2 * phi["12"] * dx(dx(rho, h, 0), h, 1)
            + phi["22"] * dxx(rho, h, 1)
            + a1 * dx(rho, h, 0)
            + a2 * dx(rho, h, 1)
            + a0 * rho
        )

    # -- coordinate transform --------------------------------------------

    def transform(self, w):
        """Solve Phi12 d1 y1 + Phi22 d2 y1 = 0, y1(x1, 0) = x1.

        Marches rows away from the x2 = 0 axis with a Lax-Wendroff step
        for the transport equation d2 y1 = c d1 y1, c = -Phi12/Phi22.
        Returns (y1, diagnostics); for w = 0 the result is exactly x1.
        """
        grid = self.grid
        d = self._w_derivs(w)
        phi = self.cofactors(w, d)
        if np.min(phi["22"]) < 0.1:
            raise TransformDegenerate("Phi22 lost uniform positivity")
        c = -phi["12"] / phi["22"]
        h = grid.h
        y1 = np.empty((grid.nx, grid.ny))
        y1[:, grid.iy0] = grid.x
        if np.max(np.abs(c)) > 0.9:
            raise TransformDegenerate("transport speed too large for the march")

        def step(row, ci, dt):
            # Lax-Wendroff for d2 y = c(x1, x2) d1 y: the second-order
            # term is c d1(c d1 y) = c^2 d11 y + c (d1 c)(d1 y)
            nu = ci * dt / h
            cx = np.gradient(ci, h)
            out = row.copy()
            out[1:-1] = (
                row[1:-1]
                + 0.5 * nu[1:-1] * (row[2:] - row[:-2])
                + 0.5 * nu[1:-1] ** 2 * (row[2:] - 2 * row[1:-1] + row[:-2])
                + 0.25 * dt**2 / h * (ci * cx)[1:-1] * (row[2:] - row[:-2])
            )
            # the map is near-identity at the lateral edges
            out[0] = row[0] + nu[0] * h
            out[-1] = row[-1] + nu[-1] * h
            return out

        for iy in range(grid.iy0 + 1, grid.ny):
            ch = 0.5 * (c[:, iy - 1] + c[:, iy])
            y1[:, iy] = step(y1[:, iy - 1], ch, h)
        for iy in range(grid.iy0 - 1, -1, -1):
            ch = 0.5 * (c[:, iy + 1] + c[:, iy])
            y1[:, iy] = step(y1[:, iy + 1], ch, -h)

        d1y1 = dx(y1, h, 0)
        d2y1 = dx(y1, h, 1)
        if np.min(d1y1) < 0.1:
            raise TransformDegenerate("y1 stopped being monotone in x1")
        b12 = phi["12"] * d1y1 + phi["22"] * d2y1
        X, Yg = grid.mesh()
        disk = np.hypot(X, Yg) <= self.radius_outer
        diag = {
            "max_dev": float(np.max(np.abs(y1 - grid.x[:, None])[disk])),
            "b12_max": float(np.max(np.abs(b12[disk]))),
            "d1y1": d1y1,
            "d2y1": d2y1,
        }
        return y1, diag

    def _pullback_tables(self, y1):
        """Per-row inverse x1(y1) sampled on the grid columns."""
        xs = self.grid.x
        x1_of_y = np.empty_like(y1)
        for iy in range(self.grid.ny):
            x1_of_y[:, iy] = np.interp(xs, y1[:, iy], xs)
        return x1_of_y

    def _compose(self, arr, x1_of_y):
        """Field on the x grid -> field on the y grid (rows y2 = x2)."""
        xs = self.grid.x
        out = np.empty_like(arr)
        for iy in range(self.grid.ny):
            out[:, iy] = np.interp(x1_of_y[:, iy], xs, arr[:, iy])
        return out

    # -- one linear solve --------------------------------------------------

    def solve_linearized(self, w, rhs_scale=1.0):
        """Solve L(w) rho = -F(w) through the transform + composite solve.

        Returns (rho on the x grid, diagnostics).  The quadratically
        small eps F part of det(Phi) is dropped from the transformed
        coefficients, which keeps them smooth across the degeneracy.
        """
        grid = self.grid
        e = self.eps
        d = self._w_derivs(w)
        phi = self.cofactors(w, d)
        a1, a2, a0 = self.lower_order(w, d)
        F = self.residual(w)
        y1, tdiag = self.transform(w)
        x1_of_y = self._pullback_tables(y1)
        X, Y = grid.mesh()
        h = grid.h

        args = self._psi_args(w, d)
        psi = np.broadcast_to(self._psi(*args), w.shape)
        detK = self.K_slow() * psi  # det(Phi) with the eps F part dropped

        d1y1, d2y1 = tdiag["d1y1"], tdiag["d2y1"]
        c_y1 = (
            phi["11"] * dxx(y1, h, 0)
            + 2 * phi["12"] * dx(dx(y1, h, 0), h, 1)
            + phi["22"] * dxx(y1, h, 1)
            + a1 * d1y1
            + a2 * d2y1
        )

        def to_y(arr):
            return self._compose(arr, x1_of_y)

        Ktilde = to_y(X) ** 2 - Y**2  # order-one hyperbolicity function
        atilde = to_y(e**4 * psi * d1y1**2 / phi["22"] ** 2)
        b1 = to_y(c_y1 / phi["22"])
        b2 = to_y(a2 / phi["22"])
        c0 = to_y(a0 / phi["22"])
        rhs = to_y(-F / phi["22"]) * rhs_scale

        class _Num:
            pass

        coeffs = _Num()
        coeffs.a = SplineField(grid, atilde)
        coeffs.K = SplineField(grid, Ktilde)
        coeffs.b1 = SplineField(grid, b1)
        coeffs.b2 = SplineField(grid, b2)
        coeffs.c = SplineField(grid, c0)
        ffield = SplineField(grid, rhs)

        Ksf = coeffs.K

        def curve(t, sign):
            lo, hi = 0.0, self.radius_outer + 0.05
            # K > 0 at y = 0+ for t != 0, becomes negative past the curve
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if Ksf(t, sign * mid) > 0:
                    lo = mid
                else:
                    hi = mid
            return sign * 0.5 * (lo + hi)

        domain = DomainSpec(
            radius_inner=self.radius_inner,
            radius_outer=self.radius_outer,
            gamma1=lambda t: curve(t, -1),
            gamma2=lambda t: curve(t, +1),
            jet_order=3,
        )
        res = composite.solve_composite(
            coeffs, domain, ffield, ScalarField("0"), h,
            d_ext=3, width=0.2,
        )
        # the composite solver works on its own disk-covering grid; pull
        # the increment back to x coordinates through (y1(x), x2) and
        # taper it smoothly to zero at the disk edge
        rho_y = np.where(res.u.mask, res.u.values, 0.0)
        rho_spl = SplineField(res.u.grid, rho_y, k=3)
        rho_x = rho_spl(y1, Y)
        r = np.hypot(X, Y)
        # the curve corner leaves a weak ridge in the pieced solution
        # along the column above and below it; smooth the increment
        # across that column with a per-row polynomial fit, blended in
        # smoothly (an extra smoothing of the correction)
        W = 10.0 * h
        strip = np.abs(grid.x) <= W + 1e-12
        xs_s = grid.x[strip]
        A = np.stack([xs_s**k for k in range(5)], axis=1)
        co, *_ = np.linalg.lstsq(A, rho_x[strip, :], rcond=None)
        chi = smooth_cutoff(np.abs(xs_s) / (0.5 * W))[:, None]
        rho_x[strip, :] += chi * (A @ co - rho_x[strip, :])
        stripy = np.abs(grid.y) <= W + 1e-12
        ys_s = grid.y[stripy]
        Ay = np.stack([ys_s**k for k in range(5)], axis=1)
        coy, *_ = np.linalg.lstsq(Ay, rho_x[:, stripy].T, rcond=None)
        chiy = smooth_cutoff(np.abs(ys_s) / (0.5 * W))[:, None]
        rho_x[:, stripy] += (chiy * (Ay @ coy - rho_x[:, stripy].T)).T
        # keep the increment untouched on the measurement disk
        # (r <= radius_inner) and roll it off before the solve boundary
        r0 = self.radius_inner + 0.05
        r1 = 0.95 * self.radius_outer
        rho_x *= smooth_cutoff(np.maximum(1.0, 1.0 + (r - r0) / (r1 - r0)))
        diag = {"transform": tdiag, "glue_defect": res.glue_defect}
        return rho_x, diag

    # -- smoothing ---------------------------------------------------------

    def smooth(self, arr, theta):
        """Spectral low-pass S_theta via even reflection (no boundary jump).

        Keeps modes with |k| <= theta, kills |k| >= 2 theta, with a
        smooth ramp between; k counts half-waves across the square.
        """
        nx, ny = arr.shape
        ext = np.concatenate([arr, arr[-2:0:-1, :]], axis=0)
        ext = np.concatenate([ext, ext[:, -2:0:-1]], axis=1)
        ft = np.fft.fft2(ext)
        kx = np.fft.fftfreq(ext.shape[0]) * ext.shape[0] / 2.0
        ky = np.fft.fftfreq(ext.shape[1]) * ext.shape[1] / 2.0
        kk = np.sqrt(kx[:, None] ** 2 + ky[None, :] ** 2)
        ft *= smooth_cutoff(kk / theta)
        sm = np.real(np.fft.ifft2(ft))
        return sm[:nx, :ny]

    # -- outer loop ----------------------------------------------------------

    def residual_norm(self, w, s: int = 2) -> float:
        X, Y = self.grid.mesh()
        m = np.hypot(X, Y) <= self.radius_inner
        gf = GridFunction(self.grid, self.residual(w), m)
        return gf.sobolev_norm(s)

    def iterate(self, n_steps: int = 3, theta0: float | None = None):
        """Run the smoothed Newton loop from w = 0.

        The default cutoff theta0 = 2/h passes every mode the grid can
        represent at level 0, so the first correction is kept whole;
        coarser cutoffs discard resolvable content and slow the decay.
        Returns (w, history) where history[l] holds the H^2 residual
        norm before step l (history[-1] is the final residual).
        """
        if theta0 is None:
            theta0 = 2.0 / self.grid.h
        w = np.zeros((self.grid.nx, self.grid.ny))
        history = [self.residual_norm(w)]
        for ell in range(n_steps):
            rho, _ = self.solve_linearized(w)
            w = w + self.smooth(rho, theta0 * 2.0**ell)
            history.append(self.residual_norm(w))
        return w, history


def gradient_check(
    problem: NashMoserProblem,
    w: np.ndarray,
    rho: np.ndarray,
    taus=(1e-2, 1e-3, 1e-4),
) -> dict:
    """Directional-difference test of the linearization.

    Fits the log-log slope of ||F(w + tau rho) - F(w)|| against tau
    (should be 1.0 for a correct first derivative) and reports the
    worst relative gap between the difference quotient and L(w) rho.
    """
    X, Y = problem.grid.mesh()
    m = np.hypot(X, Y) <= problem.radius_inner
    F0 = problem.residual(w)
    L = problem.linearize(w, rho)
    diffs, gaps = [], []
    for tau in taus:
        Ft = problem.residual(w + tau * rho)
        diffs.append(np.sqrt(np.sum((Ft - F0)[m] ** 2)))
        quot = (Ft - F0) / tau
        gaps.append(
            np.sqrt(np.sum((quot - L)[m] ** 2)) / max(np.sqrt(np.sum(L[m] ** 2)), 1e-300)
        )
    slope = np.polyfit(np.log(taus), np.log(diffs), 1)[0]
    return {"slope": float(slope), "gaps": gaps, "diffs": diffs}


def spectral_test_function(grid, decay: float = 3.0, seed: int = 0) -> np.ndarray:
    """Function with |u^(k)| ~ k^-decay: the critical profile for the
    smoothing estimates at s = 2 (H^2 norm barely converges)."""
    rng = np.random.default_rng(seed)
    nx, ny = grid.nx, grid.ny
    kx = np.fft.fftfreq(nx) * nx
    ky = np.fft.fftfreq(ny) * ny
    kk = np.sqrt(kx[:, None] ** 2 + ky[None, :] ** 2)
    amp = np.where(kk > 0, np.maximum(kk, 1.0) ** -decay, 0.0)
    phase = np.exp(2j * np.pi * rng.random((nx, ny)))
    u = np.real(np.fft.ifft2(amp * phase))
    return u / np.max(np.abs(u))


def smoothing_constants(problem: NashMoserProblem, u: np.ndarray, thetas=(4, 8, 16)):
    """Boundedness and approximation constants of the smoothing family.

    For each theta: C_bound = ||S u||_H2 / ||u||_H2 and
    C_approx = theta^2 ||u - S u||_L2 / ||u||_H2.  Stability of these
    across theta is what the iteration relies on.
    """
    grid = problem.grid
    ones = np.ones(u.shape, dtype=bool)
    X, Y = grid.mesh()
    m = np.hypot(X, Y) <= problem.radius_inner
    base = GridFunction(grid, u, ones).sobolev_norm(2, mask=m)
    out = []
    for th in thetas:
        su = problem.smooth(u, th)
        cb = GridFunction(grid, su, ones).sobolev_norm(2, mask=m) / base
        ca = (
            th**2
            * GridFunction(grid, u - su, ones).sobolev_norm(0, mask=m)
            / base
        )
        out.append({"theta": th, "bound": float(cb), "approx": float(ca)})
    return out
