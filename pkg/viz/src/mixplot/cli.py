"""Command line front end: mixplot --kind KIND --out IMG INPUT..."""

import argparse
import sys

from .render import PLOT_KINDS, PlotSpec, SchemaMismatch, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mixplot",
        description=(
            "Render a solver artifact (CSV grid, energy ledger, "
            "convergence table, or JSON report) to an image file."
        ),
    )
    parser.add_argument("inputs", nargs="+", help="input artifact path(s)")
    parser.add_argument("--kind", required=True, choices=PLOT_KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(PlotSpec(inputs=args.inputs, kind=args.kind, output=args.out))
    except SchemaMismatch as exc:
        print(f"mixplot: schema mismatch: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
