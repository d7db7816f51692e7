"""Command-line wrapper: ``plotkit trajectory.csv --report slope.json --out fig.png``.

Exit codes: 0 success, 2 input contract violation (column diff or bad
report), 1 other errors (missing files, bad arguments).
"""

from __future__ import annotations

import argparse
import sys

from .render import ColumnMismatchError, PlotSpec, ReportFormatError, plot_current


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="render wellflow trajectory/ensemble CSVs into a figure")
    parser.add_argument("csv", nargs="+", help="trajectory or ensemble CSV")
    parser.add_argument("--report", default=None,
                        help="slope-report JSON to overlay as a line")
    parser.add_argument("--out", default="figure.png", help="output image")
    parser.add_argument("--title", default="")
    parser.add_argument("--yscale", choices=["linear", "log"],
                        default="linear")
    args = parser.parse_args(argv)

    try:
        spec = PlotSpec(csv_paths=tuple(args.csv), out_path=args.out,
                        report_path=args.report, title=args.title,
                        yscale=args.yscale)
        sidecar = plot_current(spec)
    except (ColumnMismatchError, ReportFormatError) as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 1
    print(f"plotkit: wrote {args.out} with "
          f"{len(sidecar['layers'])} layers")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
