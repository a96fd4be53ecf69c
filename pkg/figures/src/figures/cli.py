"""figures: render run CSVs as convergence plots.

Two invocation styles:

    figures spec.json -o out.png
    figures a.csv b.csv --labels "lam=0" "lam=0.4" --series d2 -o out.png

A JSON spec file holds {"inputs": [{"path": ..., "label": ...}, ...],
"series": ..., "xscale": ..., "yscale": ..., "output": ...}.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .render import PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures", description="Plot tdlab run CSVs with stderr bands")
    parser.add_argument("inputs", nargs="+",
                        help="a JSON spec file, or one or more run CSVs")
    parser.add_argument("--labels", nargs="*", default=None,
                        help="one label per CSV (defaults to file stems)")
    parser.add_argument("--series", default="d2",
                        choices=["d2", "j2", "combined"])
    parser.add_argument("--xscale", default="log", choices=["log", "linear"])
    parser.add_argument("--yscale", default="log", choices=["log", "linear"])
    parser.add_argument("--title", default=None)
    parser.add_argument("-o", "--output", default=None, help="output image path")
    return parser


def spec_from_args(args) -> PlotSpec:
    first = Path(args.inputs[0])
    if len(args.inputs) == 1 and first.suffix.lower() == ".json":
        payload = json.loads(first.read_text())
        spec = PlotSpec.from_dict(payload)
        if args.output is not None:
            spec = PlotSpec(inputs=spec.inputs, series=spec.series,
                            xscale=spec.xscale, yscale=spec.yscale,
                            output=args.output, title=spec.title)
        return spec
    labels = args.labels or [Path(p).stem for p in args.inputs]
    if len(labels) != len(args.inputs):
        raise ValueError(f"{len(args.inputs)} inputs but {len(labels)} labels")
    return PlotSpec(inputs=tuple(zip(args.inputs, labels)),
                    series=args.series, xscale=args.xscale, yscale=args.yscale,
                    output=args.output or "figure.png", title=args.title)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        render(spec)
    except (SchemaError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {spec.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
