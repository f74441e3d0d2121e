"""Scalar fields, grid functions, masked finite differences, norms.

Two representations of functions on the domain:

* ``ScalarField`` wraps a sympy expression in (x, y).  Derivatives of any
  order are exact, so coefficient jets used by the corner analysis carry
  no discretization error.
* ``GridFunction`` is a value array on a Grid2D with a boolean mask of
  nodes where the values mean anything.  Finite differences respect the
  mask: interior nodes get central stencils, nodes near the edge of a
  mask segment get one-sided stencils of the same order.
"""

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .errors import MaskTooThin
from .geometry import Grid2D, fd_weights

X_SYM, Y_SYM = sp.symbols("x y")


class ScalarField:
    """A smooth function of (x, y) with exact derivatives via sympy."""

    def __init__(self, expr):
        if isinstance(expr, str):
            expr = sp.sympify(expr)
        self.expr = sp.sympify(expr)
        self._fns = {}

    def derivative(self, dx: int = 0, dy: int = 0) -> "ScalarField":
        return ScalarField(sp.diff(self.expr, X_SYM, dx, Y_SYM, dy))

    def _fn(self, dx: int, dy: int):
        key = (dx, dy)
        if key not in self._fns:
            e = sp.diff(self.expr, X_SYM, dx, Y_SYM, dy)
            self._fns[key] = sp.lambdify((X_SYM, Y_SYM), e, "numpy")
        return self._fns[key]

    def __call__(self, x, y, dx: int = 0, dy: int = 0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.asarray(self._fn(dx, dy)(x, y), dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        if out.shape != shape:  # constant expressions lambdify to scalars
            out = np.broadcast_to(out, shape).copy()
        return out if shape else float(out)

    def jet_on_curve(self, kappa_jets: np.ndarray, order: int) -> list:
        """Taylor coefficients at x=0 of x -> self(x, kappa(x)), one side.

        ``kappa_jets[k]`` is the k-th one-sided derivative of kappa at 0.
        Returns derivatives (not divided by factorials) up to ``order``.
        """
        t = sp.symbols("t")
        n = order
        kap = sum(
            sp.Rational(1, _fact(k)) * float(kappa_jets[k]) * t**k
            for k in range(min(len(kappa_jets), n + 1))
        )
        comp = self.expr.subs({X_SYM: t, Y_SYM: kap})
        series = sp.series(comp, t, 0, n + 1).removeO()
        poly = sp.Poly(series, t)
        out = []
        for k in range(n + 1):
            out.append(float(poly.coeff_monomial(t**k)) * _fact(k))
        return out

    def __add__(self, other):
        return ScalarField(self.expr + _expr(other))

    def __sub__(self, other):
        return ScalarField(self.expr - _expr(other))

    def __mul__(self, other):
        return ScalarField(self.expr * _expr(other))

    __rmul__ = __mul__

    def __repr__(self):
        return f"ScalarField({self.expr})"


def _expr(other):
    return other.expr if isinstance(other, ScalarField) else sp.sympify(other)


def _fact(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def constant_field(c: float) -> ScalarField:
    return ScalarField(sp.Float(c))


@dataclass
class CoefficientSet:
    """Coefficients of L u = u_yy + a K u_xx + b1 u_x + b2 u_y + c u."""

    a: ScalarField
    K: ScalarField
    b1: ScalarField
    b2: ScalarField
    c: ScalarField

    @classmethod
    def tricomi_cross(cls, a="1", b1="0", b2="0", c="0"):
        return cls(
            a=ScalarField(a),
            K=ScalarField("x**2 - y**2"),
            b1=ScalarField(b1),
            b2=ScalarField(b2),
            c=ScalarField(c),
        )

    def apply(self, u: ScalarField) -> ScalarField:
        """L u as an exact ScalarField."""
        return ScalarField(
            sp.diff(u.expr, Y_SYM, 2)
            + self.a.expr * self.K.expr * sp.diff(u.expr, X_SYM, 2)
            + self.b1.expr * sp.diff(u.expr, X_SYM)
            + self.b2.expr * sp.diff(u.expr, Y_SYM)
            + self.c.expr * u.expr
        )


def manufacture(coeffs: CoefficientSet, u_exact) -> ScalarField:
    """Right-hand side f = L u_exact for a manufactured solution."""
    u = u_exact if isinstance(u_exact, ScalarField) else ScalarField(u_exact)
    return coeffs.apply(u)


class GridFunction:
    """Values on a Grid2D, meaningful only where ``mask`` is True."""

    def __init__(self, grid: Grid2D, values: np.ndarray, mask: np.ndarray):
        values = np.asarray(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        if values.shape != (grid.nx, grid.ny) or mask.shape != values.shape:
            raise ValueError("values/mask shape must match grid")
        self.grid = grid
        self.values = values
        self.mask = mask

    @classmethod
    def sample(cls, grid: Grid2D, fun, mask: np.ndarray | None = None):
        X, Y = grid.mesh()
        vals = np.asarray(fun(X, Y), dtype=float)
        if vals.shape != X.shape:
            vals = np.broadcast_to(vals, X.shape).copy()
        if mask is None:
            mask = np.ones_like(vals, dtype=bool)
        return cls(grid, vals, mask)

    @classmethod
    def zeros(cls, grid: Grid2D, mask: np.ndarray | None = None):
        vals = np.zeros((grid.nx, grid.ny))
        if mask is None:
            mask = np.ones_like(vals, dtype=bool)
        return cls(grid, vals, mask)

    def copy(self):
        return GridFunction(self.grid, self.values.copy(), self.mask.copy())

    def diff(
        self,
        dx: int = 0,
        dy: int = 0,
        strict: bool = True,
        central_only: bool = False,
    ) -> "GridFunction":
        """Mask-aware finite difference, second-order accurate.

        Mixed derivatives are taken by composition (x first, then y).
        With strict=False, mask segments too short for the stencil are
        dropped from the result mask instead of raising MaskTooThin.
        With central_only=True no one-sided stencils are used at all:
        the result mask erodes by the stencil radius.  Compositions of
        one-sided stencils switch weights between neighbouring nodes,
        which the next derivative stage amplifies; central-only keeps
        high and mixed orders convergent.
        """
        out = self.values
        mask = self.mask
        if dx:
            out, mask = _diff_axis(out, mask, self.grid.h, 0, dx, strict, central_only)
        if dy:
            out, mask = _diff_axis(out, mask, self.grid.h, 1, dy, strict, central_only)
        return GridFunction(self.grid, out, mask)

    def norm_l2(self, mask: np.ndarray | None = None) -> float:
        m = self.mask if mask is None else (self.mask & mask)
        h = self.grid.h
        return float(np.sqrt(h * h * np.sum(self.values[m] ** 2)))

    def norm_max(self, mask: np.ndarray | None = None) -> float:
        m = self.mask if mask is None else (self.mask & mask)
        if not m.any():
            return 0.0
        return float(np.max(np.abs(self.values[m])))

    def sobolev_norm(self, s: int, mask: np.ndarray | None = None) -> float:
        """Discrete H^s norm: sum of L2 norms of derivatives up to order s.

        Near mask edges the one-sided stencils lose nothing in order, so
        the value converges to the continuum norm on the masked set.
        """
        total = 0.0
        for i in range(s + 1):
            for j in range(s + 1 - i):
                d = (
                    self
                    if (i == 0 and j == 0)
                    else self.diff(i, j, strict=False, central_only=True)
                )
                m = d.mask if mask is None else (d.mask & mask)
                total += float(np.sum(d.values[m] ** 2))
        return float(np.sqrt(self.grid.h**2 * total))


def _diff_axis(values, mask, h, axis, order, strict=True, central_only=False):
    """Derivative of given order along one axis, per masked segment."""
    if axis == 1:
        vt, mt = _diff_axis(values.T, mask.T, h, 0, order, strict, central_only)
        return vt.T, mt.T
    # second-order accuracy: central uses order+1 (odd order: order+2) pts,
    # one-sided uses order+2 points
    n_central = order + 1 + (order % 2)
    n_sided = order + 2
    out = np.zeros_like(values)
    omask = np.zeros_like(mask)
    nx, ny = values.shape
    for jcol in range(ny):
        col_mask = mask[:, jcol]
        if not col_mask.any():
            continue
        # contiguous runs of True
        idx = np.flatnonzero(col_mask)
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [len(idx) - 1]])
        for s0, e0 in zip(starts, ends):
            lo, hi = idx[s0], idx[e0]
            length = hi - lo + 1
            if central_only:
                half = n_central // 2 + 1  # fourth-order symmetric window
                for i in range(lo + half, hi - half + 1):
                    offs = np.arange(-half, half + 1)
                    w = fd_weights(offs * h, order)
                    out[i, jcol] = w @ values[i - half : i + half + 1, jcol]
                    omask[i, jcol] = True
                continue
            if length < n_sided:
                if length <= order:
                    if not strict:
                        continue
                    raise MaskTooThin(
                        f"segment of {length} nodes cannot support order-{order} derivative"
                    )
                # fall back to the full-segment stencil (exact for
                # polynomials of degree length-1, first order at worst)
                for i in range(lo, hi + 1):
                    offs = np.arange(lo, hi + 1) - i
                    w = fd_weights(offs * h, order)
                    out[i, jcol] = w @ values[lo : hi + 1, jcol]
                    omask[i, jcol] = True
                continue
            half = n_central // 2
            for i in range(lo, hi + 1):
                if i - half >= lo and i + half <= hi:
                    offs = np.arange(-half, half + 1)
                elif i - lo < hi - i:
                    offs = np.arange(lo, lo + n_sided) - i
                else:
                    offs = np.arange(hi - n_sided + 1, hi + 1) - i
                w = fd_weights(offs * h, order)
                out[i, jcol] = w @ values[i + offs[0] : i + offs[-1] + 1, jcol]
                omask[i, jcol] = True
    return out, omask


def relative_l2_error(u: GridFunction, exact, mask: np.ndarray | None = None) -> float:
    X, Y = u.grid.mesh()
    ref = np.asarray(exact(X, Y), dtype=float)
    m = u.mask if mask is None else (u.mask & mask)
    num = np.sqrt(np.sum((u.values[m] - ref[m]) ** 2))
    den = np.sqrt(np.sum(ref[m] ** 2))
    if den == 0:
        return float(num)
    return float(num / den)


def scalar_sobolev_norm(field: ScalarField, grid, s: int, mask=None) -> float:
    """Discrete H^s norm of an exact field: exact derivatives, grid quadrature."""
    X, Y = grid.mesh()
    if mask is None:
        mask = np.ones(X.shape, dtype=bool)
    total = 0.0
    for i in range(s + 1):
        for j in range(s + 1 - i):
            total += float(np.sum(field(X, Y, dx=i, dy=j)[mask] ** 2))
    return float(np.sqrt(grid.h**2 * total))


class SplineField:
    """Numeric field on a grid, with derivatives from a quintic spline.

    Quacks like ScalarField (call signature with dx/dy) so numerically
    produced coefficients can flow through the same solver plumbing.
    """

    def __init__(self, grid, values: np.ndarray, k: int = 5):
        from scipy.interpolate import RectBivariateSpline

        values = np.asarray(values, dtype=float)
        if values.shape != (grid.nx, grid.ny):
            raise ValueError("values shape must match grid")
        self.grid = grid
        self.values = values
        self._spl = RectBivariateSpline(grid.x, grid.y, values, kx=k, ky=k)

    def __call__(self, x, y, dx: int = 0, dy: int = 0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        xb = np.broadcast_to(x, shape).ravel()
        yb = np.broadcast_to(y, shape).ravel()
        xb = np.clip(xb, self.grid.x[0], self.grid.x[-1])
        yb = np.clip(yb, self.grid.y[0], self.grid.y[-1])
        out = self._spl(xb, yb, dx=dx, dy=dy, grid=False)
        if shape == ():
            return float(out[0])
        return out.reshape(shape)
