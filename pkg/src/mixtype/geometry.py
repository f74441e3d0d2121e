"""Domain geometry: degeneracy curves, grids, and region decomposition.

The computational domain is a disk of radius ``radius_outer`` cut by two
transversal curves y = gamma_1(x) (decreasing) and y = gamma_2(x)
(increasing) meeting at the origin.  The curves split the disk into four
open regions: two elliptic lobes around the x-axis and two hyperbolic
components around the y-axis.  All geometry objects are immutable after
construction.
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .errors import CoverageError, TransversalityViolation

# Region labels.
EXTERIOR = 0
ELLIPTIC = 1  # Omega_+, the two lobes around the x-axis
HYP_UP = 2  # component of Omega_- with positive-y centroid
HYP_DOWN = 3  # component of Omega_- with negative-y centroid
DEGENERATE = 4  # one-cell band around {K = 0}

LABEL_NAMES = {
    EXTERIOR: "exterior",
    ELLIPTIC: "elliptic",
    HYP_UP: "hyperbolic_up",
    HYP_DOWN: "hyperbolic_down",
    DEGENERATE: "degenerate",
}

_JET_ORDER_DEFAULT = 8


def onesided_slope(fun: Callable[[float], float], side: int, h: float = 1e-6) -> float:
    """Second-order one-sided difference quotient of ``fun`` at 0."""
    s = float(side)
    return s * (-3.0 * fun(0.0) + 4.0 * fun(s * h) - fun(2.0 * s * h)) / (2.0 * h)


@dataclass(frozen=True)
class CurveJets:
    """One-sided derivative jets of a curve function at the corner.

    ``plus[k]`` is the k-th derivative from the right, ``minus[k]`` from
    the left; order 0 entries are the (shared) value at 0.
    """

    plus: np.ndarray
    minus: np.ndarray

    @classmethod
    def from_callable(cls, fun, order: int = _JET_ORDER_DEFAULT, h: float = 1e-2):
        """Numerical one-sided jets; adequate for smooth curves only.

        Prefer analytic jets when available: numerical jets beyond order
        ~4 are noise-dominated.
        """
        plus = np.zeros(order + 1)
        minus = np.zeros(order + 1)
        plus[0] = minus[0] = fun(0.0)
        if order >= 1:
            plus[1] = onesided_slope(fun, +1)
            minus[1] = onesided_slope(fun, -1)
        for k in range(2, order + 1):
            # k-th one-sided derivative from a k+1 point forward stencil.
            xs = np.arange(k + 1) * h
            w = fd_weights(xs, k)
            plus[k] = sum(wi * fun(xi) for wi, xi in zip(w, xs))
            minus[k] = sum(wi * fun(-xi) for wi, xi in zip(w, xs)) * (-1.0) ** k
        return cls(plus=plus, minus=minus)

    def side(self, sign: int) -> np.ndarray:
        return self.plus if sign > 0 else self.minus


def fd_weights(xs: Sequence[float], k: int) -> np.ndarray:
    """Finite-difference weights for the k-th derivative at 0 on nodes xs."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    if k >= n:
        raise ValueError(f"need at least {k + 1} nodes for derivative order {k}")
    V = np.vander(xs, n, increasing=True).T  # V[i, j] = xs[j]**i
    rhs = np.zeros(n)
    rhs[k] = float(_factorial(k))
    return np.linalg.solve(V, rhs)


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


@dataclass(frozen=True)
class DomainSpec:
    """Disk domain with two transversal degeneracy curves through the origin."""

    radius_inner: float
    radius_outer: float
    gamma1: Callable[[float], float]  # decreasing, gamma1(0) = 0
    gamma2: Callable[[float], float]  # increasing, gamma2(0) = 0
    gamma1_jets: CurveJets | None = None
    gamma2_jets: CurveJets | None = None
    jet_order: int = _JET_ORDER_DEFAULT

    def __post_init__(self):
        if not self.radius_outer > self.radius_inner > 0:
            raise ValueError("require 0 < radius_inner < radius_outer")
        if self.gamma1_jets is None:
            object.__setattr__(
                self, "gamma1_jets", CurveJets.from_callable(self.gamma1, self.jet_order)
            )
        if self.gamma2_jets is None:
            object.__setattr__(
                self, "gamma2_jets", CurveJets.from_callable(self.gamma2, self.jet_order)
            )

    def check_transversality(self, tol: float = 1e-8) -> None:
        for sgn in (+1, -1):
            s1 = self.gamma1_jets.side(sgn)[1]
            s2 = self.gamma2_jets.side(sgn)[1]
            if abs(s1 - s2) < tol:
                raise TransversalityViolation(
                    f"gamma slopes at 0 ({'+' if sgn > 0 else '-'} side) coincide: "
                    f"{s1:.3e} vs {s2:.3e}"
                )

    def kappa1(self, x):
        """Upper envelope max(gamma1, gamma2); positive for x != 0."""
        return np.maximum(self.gamma1(x), self.gamma2(x))

    def kappa2(self, x):
        """Lower envelope min(gamma1, gamma2); negative for x != 0."""
        return np.minimum(self.gamma1(x), self.gamma2(x))

    def kappa_jets(self, which: int) -> CurveJets:
        """One-sided jets of kappa1 (which=1) or kappa2 (which=2).

        On each side the envelope coincides with one of the two smooth
        curves, selected by comparing values slightly off the corner.
        """
        pick_max = which == 1
        sides = {}
        for sgn in (+1, -1):
            x = sgn * 1e-3
            g1, g2 = self.gamma1(x), self.gamma2(x)
            use1 = (g1 >= g2) if pick_max else (g1 <= g2)
            jets = self.gamma1_jets if use1 else self.gamma2_jets
            sides[sgn] = jets.side(sgn)
        return CurveJets(plus=sides[+1], minus=sides[-1])


@dataclass(frozen=True)
class Grid2D:
    """Uniform square-cell grid with the origin exactly on a node."""

    h: float
    nx: int
    ny: int
    ix0: int  # node index of x = 0
    iy0: int  # node index of y = 0

    def __post_init__(self):
        if not (0 <= self.ix0 < self.nx and 0 <= self.iy0 < self.ny):
            raise ValueError("origin must be a grid node")

    @classmethod
    def square(cls, radius: float, h: float) -> "Grid2D":
        n = int(np.ceil(radius / h - 1e-12))
        m = 2 * n + 1
        return cls(h=h, nx=m, ny=m, ix0=n, iy0=n)

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.ix0) * self.h

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.iy0) * self.h

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def covers(self, radius: float) -> bool:
        return (
            self.x[0] <= -radius + 1e-12
            and self.x[-1] >= radius - 1e-12
            and self.y[0] <= -radius + 1e-12
            and self.y[-1] >= radius - 1e-12
        )


@dataclass(frozen=True)
class RegionMap:
    """Per-node region labels on a grid."""

    grid: Grid2D
    labels: np.ndarray  # int8, shape (nx, ny)

    def mask(self, *labels: int) -> np.ndarray:
        out = np.zeros(self.labels.shape, dtype=bool)
        for lab in labels:
            out |= self.labels == lab
        return out

    def fraction(self, label: int) -> float:
        return float(np.mean(self.labels == label))

    def to_csv(self, path) -> None:
        X, Y = self.grid.mesh()
        rows = np.column_stack(
            [X.ravel(), Y.ravel(), self.labels.ravel().astype(float)]
        )
        np.savetxt(path, rows, delimiter=",", header="x,y,label", comments="")


def build_region_map(spec: DomainSpec, grid: Grid2D, K: Callable) -> RegionMap:
    """Label every grid node by the region it belongs to.

    The degeneracy band is one cell wide: a node is DEGENERATE when its
    4-neighborhood (restricted to the disk) contains a sign change of K.
    Hyperbolic nodes are split into the up/down components by connected
    components of {K < 0}, classified by centroid.
    """
    spec.check_transversality()
    if not grid.covers(spec.radius_outer):
        raise CoverageError(
            f"grid extent {grid.x[-1]:.4f} does not cover radius {spec.radius_outer}"
        )
    X, Y = grid.mesh()
    R = np.hypot(X, Y)
    inside = R <= spec.radius_outer + 1e-12
    Kv = np.asarray(K(X, Y), dtype=float)
    if Kv.shape != X.shape:
        Kv = np.broadcast_to(Kv, X.shape).copy()

    sgn = np.sign(Kv)
    degen = Kv == 0.0
    # sign change against any 4-neighbor inside the disk
    for axis, shift in ((0, 1), (0, -1), (1, 1), (1, -1)):
        nb_sgn = np.roll(sgn, shift, axis=axis)
        nb_in = np.roll(inside, shift, axis=axis)
        flip = (sgn * nb_sgn < 0) & nb_in
        # roll wraps around; kill the wrapped edge row/column
        if axis == 0:
            flip[0 if shift == 1 else -1, :] = False
        else:
            flip[:, 0 if shift == 1 else -1] = False
        degen |= flip
    degen &= inside

    labels = np.full(Kv.shape, EXTERIOR, dtype=np.int8)
    labels[inside & degen] = DEGENERATE
    labels[inside & ~degen & (Kv > 0)] = ELLIPTIC

    hyp = inside & ~degen & (Kv < 0)
    comp, ncomp = ndimage.label(hyp)
    for c in range(1, ncomp + 1):
        nodes = comp == c
        cy = float(np.mean(Y[nodes]))
        labels[nodes] = HYP_UP if cy >= 0 else HYP_DOWN
    return RegionMap(grid=grid, labels=labels)


def spacelike_check(
    kappa: Callable[[float], float],
    a: Callable,
    K: Callable,
    eta0: float,
    x_range: tuple[float, float] = (-1.0, 1.0),
    n_samples: int = 801,
) -> dict:
    """Supremum of a*K*kappa_x^2 along the initial curve y = kappa(x).

    Pass iff the supremum does not exceed eta0 < 1 (space-like margin).
    The slope at the corner is taken one-sidedly from both sides.
    """
    xs = np.linspace(x_range[0], x_range[1], n_samples)
    hs = 1e-6
    vals = []
    for x in xs:
        if abs(x) < 2 * hs:
            slopes = [onesided_slope(kappa, +1), onesided_slope(kappa, -1)]
        else:
            slopes = [(kappa(x + hs) - kappa(x - hs)) / (2 * hs)]
        y = kappa(x)
        for s in slopes:
            vals.append(float(a(x, y)) * float(K(x, y)) * s * s)
    sup = float(np.max(vals))
    return {"sup_aK_kappax2": sup, "eta0": eta0, "passed": bool(sup <= eta0)}


def orientation_check(region: RegionMap, marching_axis: str = "y") -> dict:
    """Check that y-marching enters every hyperbolic component.

    For each hyperbolic component, take its initial-curve nodes (nodes
    adjacent to the degeneracy band) and require that stepping in the
    marching direction (+y for the up component, -y for down) stays in
    the component.  For K = y^2 - x^2 the components flank the y-axis
    sideways and the check fails.
    """
    if marching_axis != "y":
        raise ValueError("only y-marching is supported")
    labels = region.labels
    degen = labels == DEGENERATE
    report = {"passed": True, "components": []}
    for lab, step in ((HYP_UP, +1), (HYP_DOWN, -1)):
        nodes = labels == lab
        if not nodes.any():
            report["components"].append(
                {"label": LABEL_NAMES[lab], "present": False, "passed": True}
            )
            continue
        # initial-curve nodes: adjacent (4-neighborhood) to the band
        adj = np.zeros_like(nodes)
        adj[1:, :] |= degen[:-1, :]
        adj[:-1, :] |= degen[1:, :]
        adj[:, 1:] |= degen[:, :-1]
        adj[:, :-1] |= degen[:, 1:]
        init = nodes & adj
        ahead = np.zeros_like(nodes)
        if step > 0:
            ahead[:, :-1] = nodes[:, 1:]
        else:
            ahead[:, 1:] = nodes[:, :-1]
        bad = int(np.count_nonzero(init & ~ahead))
        total = int(np.count_nonzero(init))
        # tolerate stray nodes at the far ends of the curve (disk edge)
        ok = total == 0 or bad <= max(2, 0.02 * total)
        report["components"].append(
            {
                "label": LABEL_NAMES[lab],
                "present": True,
                "initial_nodes": total,
                "blocked_nodes": bad,
                "passed": ok,
            }
        )
        report["passed"] = report["passed"] and ok
    return report
