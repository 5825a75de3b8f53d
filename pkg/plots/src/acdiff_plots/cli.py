"""Render figures from experiment CSV outputs.

Usage: acdiff-plots loglog --in DIR --out FILE [--metric NAME] [--title T]
       acdiff-plots panels --in DIR --out FILE [--title T]
"""

from __future__ import annotations

import argparse
import os
import sys

from .figures import plot_density_panels, plot_loglog
from .io import CsvFormatError


def build_parser():
    parser = argparse.ArgumentParser(prog="acdiff-plots")
    sub = parser.add_subparsers(dest="kind", required=True)
    for name in ("loglog", "panels"):
        p = sub.add_parser(name)
        p.add_argument("--in", dest="in_dir", required=True,
                       help="experiment output directory")
        p.add_argument("--out", required=True, help="output image (.png or .svg)")
        p.add_argument("--title", default=None)
        if name == "loglog":
            p.add_argument("--metric", default=None,
                           help="restrict to one metric column value")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "loglog":
            written, slopes = plot_loglog(os.path.join(args.in_dir, "errors.csv"),
                                          args.out, metric=args.metric,
                                          title=args.title)
            for label, slope in sorted(slopes.items()):
                print(f"{label}: slope {slope:.2f}")
        else:
            written = plot_density_panels(args.in_dir, args.out, title=args.title)
    except (CsvFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
