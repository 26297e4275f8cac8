"""Script entry point: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .render import (
    KINDS,
    PlotSpec,
    RenderError,
    render_crossing,
    render_density_scaling,
    render_rate_comparison,
)

_RENDERERS = {
    "crossing": render_crossing,
    "density-scaling": render_density_scaling,
    "rate-comparison": render_rate_comparison,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="compass-plot")
    parser.add_argument("csv", help="input CSV path")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--measure", default="any", choices=("any", "z", "x"))
    parser.add_argument("--logy", action="store_true")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)

    spec = PlotSpec(
        kind=args.kind, out=args.out, measure=args.measure,
        logy=args.logy, title=args.title,
    )
    try:
        result = _RENDERERS[args.kind](args.csv, spec)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.kind == "crossing":
        if result is None:
            print("no crossing in plotted range")
        else:
            print(f"crossing p* = {result:.4f}")
    elif args.kind == "density-scaling":
        print(
            f"linear slope = {result['linear'][0]:.4f}  "
            f"quadratic = {result['quadratic'][0]:.4f} q "
            f"+ {result['quadratic'][1]:.4f} q^2"
        )
    print(f"figure written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
