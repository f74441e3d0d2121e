"""Corner compatibility analysis and extension of Cauchy data.

Cauchy data (phi, psi) lives on an initial curve y = kappa(x) with a
corner at the origin (kappa has one-sided slopes).  Two questions are
answered here:

* do the one-sided jets of the data fit together with the equation at
  the corner?  ``corner_jets`` resolves the full 2-jet table of u at 0
  on each side; ``compatibility_defects`` measures the mismatch.  The
  first defect has a closed form in the data alone:

      r1 = | psi(0) (kappa_x(0+) - kappa_x(0-))
             - (phi_x(0+) - phi_x(0-)) |

* how to extend the data off the curve: ``curve_y_jets`` resolves the
  normal derivatives w_j = d^j u / dy^j on the curve from the equation,
  and ``ExtensionFunction`` assembles the truncated Taylor extension
  v(x, y) = sum_j w_j(x) (y - kappa(x))^j / j! times a smooth cutoff,
  so that f - L v vanishes to order d-1 on the curve.
"""

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .errors import (
    CharacteristicCorner,
    DivisionByDegeneracy,
    IncompatibleData,
    SingularSystem,
)
from .fields import CoefficientSet, ScalarField, X_SYM, Y_SYM


def jets_of(fun_x, order: int, side: int = +1, h: float = 1e-2) -> np.ndarray:
    """One-sided derivative jets at 0 of a function of one variable.

    Prefer exact jets (sympy expressions via ``sympy_jets``) when you
    have them; this numerical fallback is only good to moderate order.
    """
    from .geometry import fd_weights

    out = np.zeros(order + 1)
    out[0] = float(fun_x(0.0))
    for k in range(1, order + 1):
        xs = np.arange(k + 2) * h * side
        w = fd_weights(xs, k)
        out[k] = float(sum(wi * fun_x(xi) for wi, xi in zip(w, xs)))
    return out


def sympy_jets(expr, order: int) -> np.ndarray:
    """Exact jets at 0 of a sympy expression in x (symmetric sides)."""
    x = X_SYM
    e = sp.sympify(expr)
    return np.array(
        [float(sp.diff(e, x, k).subs(x, 0)) for k in range(order + 1)]
    )


def corner_jets(
    coeffs: CoefficientSet,
    f: ScalarField,
    kappa_jets: np.ndarray,
    phi_jets: np.ndarray,
    psi_jets: np.ndarray,
    m: int,
) -> dict:
    """Resolve the jet of u at the origin on one side of the corner.

    Unknowns are all U_ij = d^(i+j) u / dx^i dy^j (0) with i + j <= m.
    The equation contributes one linear relation per moment of order up
    to m - 2; the curve data contributes matching of the Taylor
    expansions of u and u_y along y = kappa(x) to orders m and m - 1.
    Returns {'X': [U_i0], 'Y': [U_i1], 'U': table}.
    """
    x, y, t = X_SYM, Y_SYM, sp.symbols("t")
    unknowns = {}
    upoly = sp.Integer(0)
    for i in range(m + 1):
        for j in range(m + 1 - i):
            s = sp.Symbol(f"U_{i}_{j}")
            unknowns[(i, j)] = s
            upoly += s * x**i * y**j / (factorial(i) * factorial(j))

    # characteristic-corner guard: slope vs sound speed of the principal
    # part u_yy + (aK)(0) u_xx at the corner
    aK0 = float(coeffs.a(0.0, 0.0)) * float(coeffs.K(0.0, 0.0))
    slope = float(kappa_jets[1])
    if abs(1.0 + aK0 * slope * slope) < 1e-10:
        raise CharacteristicCorner(
            f"initial curve slope {slope:.6g} is characteristic at the corner"
        )

    eqs = []
    resid = coeffs.apply(ScalarField(upoly)).expr - f.expr
    for i in range(m - 1):
        for j in range(m - 1 - i):
            d = sp.diff(resid, x, i, y, j)
            eqs.append(sp.expand(d.subs({x: 0, y: 0})))

    kap = sum(
        sp.Rational(1, factorial(k)) * sp.Float(kappa_jets[k]) * t**k
        for k in range(min(len(kappa_jets), m + 1))
    )
    on_curve = sp.expand(upoly.subs({x: t, y: kap}))
    on_curve = sp.series(on_curve, t, 0, m + 1).removeO()
    uy_curve = sp.expand(sp.diff(upoly, y).subs({x: t, y: kap}))
    uy_curve = sp.series(uy_curve, t, 0, m).removeO()
    for k in range(m + 1):
        eqs.append(
            sp.expand(on_curve.coeff(t, k) * factorial(k) - sp.Float(phi_jets[k]))
        )
    for k in range(m):
        eqs.append(
            sp.expand(uy_curve.coeff(t, k) * factorial(k) - sp.Float(psi_jets[k]))
        )

    syms = list(unknowns.values())
    A, b = sp.linear_eq_to_matrix(eqs, syms)
    An = np.array(A.tolist(), dtype=float)
    bn = np.array(b.tolist(), dtype=float).ravel()
    if An.shape[0] != An.shape[1]:
        sol, *_ = np.linalg.lstsq(An, bn, rcond=None)
    else:
        if np.linalg.cond(An) > 1e12:
            raise SingularSystem("corner jet system is numerically singular")
        sol = np.linalg.solve(An, bn)
    table = {}
    for s, v in zip(syms, sol):
        i, j = (int(p) for p in s.name.split("_")[1:])
        table[(i, j)] = float(v)
    return {
        "X": np.array([table[(i, 0)] for i in range(m + 1)]),
        "Y": np.array([table[(i, 1)] for i in range(m)]),
        "U": table,
    }


def compatibility_defects(
    coeffs: CoefficientSet,
    f: ScalarField,
    kappa_jets_plus: np.ndarray,
    kappa_jets_minus: np.ndarray,
    phi_jets_plus: np.ndarray,
    phi_jets_minus: np.ndarray,
    psi_jets_plus: np.ndarray,
    psi_jets_minus: np.ndarray,
    m: int,
) -> np.ndarray:
    """Defects r_1 .. r_m measuring corner incompatibility of the data.

    r_1 comes straight from the closed formula (no solve, exact in the
    inputs); higher defects compare the per-side resolved jets.
    """
    r = np.zeros(m)
    r[0] = abs(
        psi_jets_plus[0] * (kappa_jets_plus[1] - kappa_jets_minus[1])
        - (phi_jets_plus[1] - phi_jets_minus[1])
    )
    if m == 1:
        return r
    jp = corner_jets(coeffs, f, kappa_jets_plus, phi_jets_plus, psi_jets_plus, m)
    jm = corner_jets(coeffs, f, kappa_jets_minus, phi_jets_minus, psi_jets_minus, m)
    for i in range(2, m + 1):
        dx = abs(jp["X"][i] - jm["X"][i])
        dy = abs(jp["Y"][i - 1] - jm["Y"][i - 1])
        r[i - 1] = dx + dy
    return r


def check_compatibility(defects: np.ndarray, tol: float = 1e-8) -> None:
    bad = [(i + 1, float(d)) for i, d in enumerate(defects) if d > tol]
    if bad:
        raise IncompatibleData(
            "corner defects exceed tolerance: "
            + ", ".join(f"r{i}={d:.3e}" for i, d in bad)
        )


def curve_y_jets(
    coeffs: CoefficientSet,
    f: ScalarField,
    xs: np.ndarray,
    kappa: np.ndarray,
    kappa_x: np.ndarray,
    kappa_xx: np.ndarray,
    phi: np.ndarray,
    psi: np.ndarray,
    d: int,
) -> list:
    """Normal jets w_j = d^j u/dy^j on the curve, j = 0..d, from the data.

    Everything is sampled on the (uniform) abscissas ``xs``.  For j >= 2
    the equation is solved for w_j; the only occurrence of w_j on the
    right is through (aK) kappa_x^2 w_j, so each step is algebraic:

        (1 + (aK) kappa_x^2) w_j = d_y^(j-2) f - (lower jets and their
                                     x-derivatives)

    Mixed derivatives on the curve come from the transport identities
    h_(a+1,b) = d/dx h_(a,b) - kappa_x h_(a,b+1).
    """
    if len(xs) < 5:
        raise ValueError("need at least 5 curve samples")
    hx = xs[1] - xs[0]

    def ddx(arr):
        return np.gradient(arr, hx, edge_order=2)

    w = [np.asarray(phi, dtype=float), np.asarray(psi, dtype=float)]

    def on_curve(field, s):
        return field(xs, kappa, dy=s)

    aK = _LeibnizProduct(coeffs.a, coeffs.K)
    D = 1.0 + on_curve(aK, 0) * kappa_x**2
    if np.min(np.abs(D)) < 1e-10:
        raise DivisionByDegeneracy(
            "curve is characteristic: cannot resolve normal jets"
        )

    for j in range(2, d + 1):
        q = j - 2
        # first-x-derivative table h1[b] for b <= q (needs w_(b+1) <= w_(j-1))
        h1 = [ddx(w[b]) - kappa_x * w[b + 1] for b in range(q + 1)]
        rhs = on_curve(f, q).copy()
        for s in range(q + 1):
            cqs = comb(q, s)
            b = q - s
            # aK u_xx contribution, with
            # h2 = d/dx h1[b] - kappa_x h1[b+1]
            #    = d/dx h1[b] - kappa_x (w_(b+1)' - kappa_x w_(b+2))
            if b + 2 < j:
                h2 = ddx(h1[b]) - kappa_x * (ddx(w[b + 1]) - kappa_x * w[b + 2])
                rhs -= cqs * on_curve(aK, s) * h2
            else:  # b + 2 == j: split off the unknown kappa_x^2 w_j part
                h2_part = ddx(h1[b]) - kappa_x * ddx(w[b + 1])
                rhs -= cqs * on_curve(aK, s) * h2_part
            # lower order terms
            rhs -= cqs * on_curve(coeffs.b1, s) * h1[b]
            rhs -= cqs * on_curve(coeffs.b2, s) * w[b + 1]
            rhs -= cqs * on_curve(coeffs.c, s) * w[b]
        w.append(rhs / D)
    return w


class _LeibnizProduct:
    """Product of two fields with y-derivatives by the Leibniz rule.

    Works for any field exposing __call__(x, y, dx=..., dy=...), not
    just sympy-backed ones.
    """

    def __init__(self, f, g):
        self.f = f
        self.g = g

    def __call__(self, x, y, dx: int = 0, dy: int = 0):
        if dx != 0:
            raise NotImplementedError("only y-derivatives are supported")
        out = 0.0
        for s in range(dy + 1):
            out = out + comb(dy, s) * self.f(x, y, dy=s) * self.g(x, y, dy=dy - s)
        return out


def smooth_cutoff(s: np.ndarray) -> np.ndarray:
    """C^inf cutoff: 1 on |s| <= 1, 0 on |s| >= 2."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    out[s <= 1.0] = 1.0
    mid = (s > 1.0) & (s < 2.0)
    r = s[mid] - 1.0
    a = np.exp(-1.0 / (1.0 - r))
    b = np.exp(-1.0 / r)
    out[mid] = a / (a + b)
    return out


@dataclass
class ExtensionFunction:
    """Truncated Taylor extension of Cauchy data off the curve."""

    xs: np.ndarray
    kappa: np.ndarray
    jets: list  # w_j arrays on xs
    width: float
    borel_base: float = 2.0
    borel_from: int = 8

    def __post_init__(self):
        self._kap = CubicSpline(self.xs, self.kappa)
        self._spl = [CubicSpline(self.xs, wj) for wj in self.jets]

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xq = np.clip(x, self.xs[0], self.xs[-1])
        t = y - self._kap(xq)
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        tp = np.ones_like(out)
        for j, spl in enumerate(self._spl):
            scale = 1.0
            if j >= self.borel_from:
                scale = self.borel_base ** -(j - self.borel_from + 1)
            out = out + spl(xq) * tp * scale / factorial(j)
            tp = tp * t
        return out * smooth_cutoff(t / self.width)


def extend_cauchy_data(
    coeffs: CoefficientSet,
    f: ScalarField,
    xs: np.ndarray,
    kappa_fun,
    phi: np.ndarray,
    psi: np.ndarray,
    d: int,
    width: float,
) -> ExtensionFunction:
    """Build the extension v from sampled Cauchy data on y = kappa(x)."""
    hx = xs[1] - xs[0]
    kap = np.array([float(kappa_fun(x)) for x in xs])
    kap_x = np.gradient(kap, hx, edge_order=2)
    kap_xx = np.gradient(kap_x, hx, edge_order=2)
    jets = curve_y_jets(coeffs, f, xs, kap, kap_x, kap_xx, phi, psi, d)
    return ExtensionFunction(xs=xs, kappa=kap, jets=jets, width=width)
