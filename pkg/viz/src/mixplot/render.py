"""Render solver artifacts to image files.

Six plot kinds, each fed by one documented input format:

* ``region_map``   <- region CSV (x, y, label)
* ``surface``      <- grid CSV (x, y, value), 3-D surface
* ``contour``      <- grid CSV (x, y, value), filled contours
* ``energy``       <- energy CSV (y, E)
* ``convergence``  <- convergence CSV (h, error), log-log
* ``residual_history`` <- report JSON with a ``residual_history`` list

Rendering never mutates the inputs and is deterministic: fixed figure
size, dpi, and axes for identical inputs.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (6.0, 4.8)
DPI = 120

REGION_COLORS = {
    0: "#f0f0f0",  # outside
    1: "#4c72b0",  # elliptic lobes
    2: "#dd8452",  # upper hyperbolic component
    3: "#55a868",  # lower hyperbolic component
    4: "#c44e52",  # degeneracy band
}
REGION_TITLES = {
    0: "outside",
    1: "elliptic",
    2: "hyperbolic (up)",
    3: "hyperbolic (down)",
    4: "degeneracy band",
}


class SchemaMismatch(Exception):
    """An input file does not match its documented schema."""


@dataclass
class PlotSpec:
    inputs: list
    kind: str
    output: str


def _read_csv(path, columns):
    path = Path(path)
    if not path.exists():
        raise SchemaMismatch(f"input file {path} does not exist")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    missing = [c for c in columns if c not in header]
    if missing:
        raise SchemaMismatch(
            f"{path}: missing column {missing[0]!r} "
            f"(found {', '.join(header)})"
        )
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.size == 0:
        raise SchemaMismatch(f"{path}: no data rows")
    return data


def _to_grid(data, value_col):
    """Rebuild the (nx, ny) arrays from row-major x,y CSV rows."""
    xs = np.unique(data["x"])
    ys = np.unique(data["y"])
    if xs.size * ys.size != data.size:
        raise SchemaMismatch(
            f"rows do not form a full product grid: {xs.size} x values "
            f"by {ys.size} y values but {data.size} rows"
        )
    order = np.lexsort((data["y"], data["x"]))
    vals = data[value_col][order].reshape(xs.size, ys.size)
    return xs, ys, vals


def _single_input(spec):
    if len(spec.inputs) != 1:
        raise SchemaMismatch(
            f"plot kind {spec.kind!r} takes exactly one input file, "
            f"got {len(spec.inputs)}"
        )
    return spec.inputs[0]


def count_interior_regions(path) -> int:
    """Connected components of the solved interior on a region map.

    Degeneracy-band and outside nodes separate components; the two
    elliptic lobes share a label but are counted separately because
    they do not touch.
    """
    data = _read_csv(path, ("x", "y", "label"))
    _, _, lab = _to_grid(data, "label")
    interior = np.isin(lab.astype(int), (1, 2, 3))
    seen = np.zeros_like(interior, dtype=bool)
    count = 0
    nx, ny = interior.shape
    for i0 in range(nx):
        for j0 in range(ny):
            if not interior[i0, j0] or seen[i0, j0]:
                continue
            count += 1
            stack = [(i0, j0)]
            seen[i0, j0] = True
            while stack:
                i, j = stack.pop()
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    a, b = i + di, j + dj
                    if 0 <= a < nx and 0 <= b < ny and interior[a, b] \
                            and not seen[a, b]:
                        seen[a, b] = True
                        stack.append((a, b))
    return count


def _render_region_map(spec, ax, fig):
    data = _read_csv(_single_input(spec), ("x", "y", "label"))
    xs, ys, lab = _to_grid(data, "label")
    lab = lab.astype(int)
    img = np.empty(lab.shape + (3,))
    for value, color in REGION_COLORS.items():
        img[lab == value] = matplotlib.colors.to_rgb(color)
    unknown = ~np.isin(lab, list(REGION_COLORS))
    if unknown.any():
        raise SchemaMismatch(
            f"unknown region label {int(lab[unknown][0])} in column 'label'"
        )
    ax.imshow(
        img.transpose(1, 0, 2),
        origin="lower",
        extent=(xs[0], xs[-1], ys[0], ys[-1]),
        interpolation="nearest",
    )
    handles = [
        plt.Rectangle((0, 0), 1, 1, color=REGION_COLORS[v])
        for v in sorted(set(lab.ravel()))
    ]
    names = [REGION_TITLES[v] for v in sorted(set(lab.ravel()))]
    ax.legend(handles, names, loc="upper right", fontsize=7)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"type regions ({count_interior_regions(spec.inputs[0])} "
                 "interior components)")


def _render_surface(spec, ax, fig):
    data = _read_csv(_single_input(spec), ("x", "y", "value"))
    xs, ys, vals = _to_grid(data, "value")
    fig.clf()
    ax3 = fig.add_subplot(projection="3d")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    ax3.plot_surface(
        X, Y, np.ma.masked_invalid(vals), cmap="viridis",
        rstride=1, cstride=1, linewidth=0,
    )
    ax3.set_xlabel("x")
    ax3.set_ylabel("y")
    ax3.set_title("solution surface")


def _render_contour(spec, ax, fig):
    data = _read_csv(_single_input(spec), ("x", "y", "value"))
    xs, ys, vals = _to_grid(data, "value")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    cs = ax.contourf(X, Y, np.ma.masked_invalid(vals), levels=21,
                     cmap="viridis")
    fig.colorbar(cs, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.set_title("solution contours")


def _render_energy(spec, ax, fig):
    data = _read_csv(_single_input(spec), ("y", "E"))
    ax.plot(np.atleast_1d(data["y"]), np.atleast_1d(data["E"]), "-")
    ax.set_xlabel("march level y")
    ax.set_ylabel("weighted energy E(y)")
    ax.set_title("energy along the march")
    ax.grid(True, alpha=0.3)


def _render_convergence(spec, ax, fig):
    data = _read_csv(_single_input(spec), ("h", "error"))
    h = np.atleast_1d(data["h"])
    err = np.atleast_1d(data["error"])
    ax.loglog(h, err, "o-", label="measured")
    if h.size >= 2 and np.all(err > 0):
        slope = np.polyfit(np.log(h), np.log(err), 1)[0]
        ref = err[0] * (h / h[0]) ** 2
        ax.loglog(h, ref, "--", color="gray", label="order 2 reference")
        ax.set_title(f"grid convergence (observed order {slope:.2f})")
    else:
        ax.set_title("grid convergence")
    ax.set_xlabel("grid spacing h")
    ax.set_ylabel("relative L2 error")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)


def _render_residual_history(spec, ax, fig):
    path = Path(_single_input(spec))
    if not path.exists():
        raise SchemaMismatch(f"input file {path} does not exist")
    try:
        with open(path) as fh:
            rep = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: not valid JSON ({exc})") from exc
    if "residual_history" not in rep:
        raise SchemaMismatch(f"{path}: missing field 'residual_history'")
    hist = rep["residual_history"]
    if not isinstance(hist, list) or not hist:
        raise SchemaMismatch(
            f"{path}: field 'residual_history' must be a nonempty list"
        )
    ax.semilogy(range(len(hist)), hist, "o-")
    ax.set_xlabel("iteration step")
    ax.set_ylabel("residual norm")
    ax.set_xticks(range(len(hist)))
    ax.set_title("iteration residual decay")
    ax.grid(True, which="both", alpha=0.3)


_RENDERERS = {
    "region_map": _render_region_map,
    "surface": _render_surface,
    "contour": _render_contour,
    "energy": _render_energy,
    "convergence": _render_convergence,
    "residual_history": _render_residual_history,
}

PLOT_KINDS = tuple(_RENDERERS)


def render(spec: PlotSpec) -> str:
    """Render the spec to its output image file; returns the path."""
    if spec.kind not in _RENDERERS:
        raise SchemaMismatch(
            f"unknown plot kind {spec.kind!r}; known: {', '.join(PLOT_KINDS)}"
        )
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        _RENDERERS[spec.kind](spec, ax, fig)
        fig.savefig(spec.output)
    finally:
        plt.close(fig)
    return spec.output
