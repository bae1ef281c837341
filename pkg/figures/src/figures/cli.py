"""Command-line entry point: ``figures power`` and ``figures table``."""

from __future__ import annotations

import argparse
import sys

from .core import FigureSpec, render_power_curves, render_size_table


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render power-curve panels and size tables from results CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    power = sub.add_parser("power", help="render one power-curve panel per design")
    power.add_argument("--in", dest="input", required=True, metavar="CSV",
                       help="results CSV with an s column")
    power.add_argument("--out", dest="output", required=True, metavar="DIR",
                       help="directory for power_<design>.<format> images")
    power.add_argument("--format", default="png", help="image format (default: png)")
    power.add_argument("--dpi", type=int, default=150, help="image resolution")
    power.add_argument("--alpha", type=float, default=0.05,
                       help="nominal level drawn as a reference line")

    table = sub.add_parser("table", help="write the empirical-size text table")
    table.add_argument("--in", dest="input", required=True, metavar="CSV",
                       help="size results CSV (empty s column)")
    table.add_argument("--out", dest="output", required=True, metavar="TXT",
                       help="output text file")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "power":
            spec = FigureSpec(
                input_csv_path=args.input,
                output_dir=args.output,
                image_format=args.format,
                dpi=args.dpi,
                alpha=args.alpha,
            )
            panels = render_power_curves(spec)
            print(f"wrote {len(panels)} panel(s) to {spec.output_dir}")
            for info in panels:
                print(f"  {info.path.name}: {len(info.series)} series")
        else:
            text = render_size_table(args.input, args.output)
            blocks = text.strip("\n").count("\n\n") + 1
            print(f"wrote table with {blocks} block(s) to {args.output}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
