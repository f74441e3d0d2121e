"""Run artifacts: CSV grids and a deterministic JSON report.

Every writer here uses a fixed float format and fixed key order, so two
runs with the same inputs produce byte-identical files.  The documented
schemas consumed by external tooling:

* grid CSV: header ``x,y,value``, one row per node, row-major in x then
  y; nodes outside the solution mask carry ``nan``.
* energy CSV: header ``y,E``, one row per recorded march level.
* convergence CSV: header ``h,error``, one row per resolution.
* report JSON: a single object with sorted keys; numeric fields are
  plain floats/ints, arrays are lists.
"""

import json
import sys

import numpy as np

FLOAT_FMT = "%.17g"


def grid_to_csv(path, gf) -> None:
    """Write a GridFunction as x,y,value rows (nan outside the mask)."""
    X, Y = gf.grid.mesh()
    vals = np.where(gf.mask, gf.values, np.nan)
    rows = np.column_stack([X.ravel(), Y.ravel(), vals.ravel()])
    np.savetxt(path, rows, delimiter=",", header="x,y,value",
               comments="", fmt=FLOAT_FMT)


def array_grid_to_csv(path, xs, ys, values) -> None:
    """Write a plain (nx, ny) array on the product grid xs x ys."""
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    rows = np.column_stack([X.ravel(), Y.ravel(), np.asarray(values).ravel()])
    np.savetxt(path, rows, delimiter=",", header="x,y,value",
               comments="", fmt=FLOAT_FMT)


def energy_to_csv(path, ledger) -> None:
    rows = np.column_stack([ledger.ys, ledger.values])
    np.savetxt(path, rows, delimiter=",", header="y,E",
               comments="", fmt=FLOAT_FMT)


def convergence_to_csv(path, hs, errors) -> None:
    rows = np.column_stack([hs, errors])
    np.savetxt(path, rows, delimiter=",", header="h,error",
               comments="", fmt=FLOAT_FMT)


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def versions() -> dict:
    import numpy
    import scipy
    import sympy

    from . import __version__

    return {
        "mixtype": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
        "python": sys.version.split()[0],
    }


def write_report(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")
