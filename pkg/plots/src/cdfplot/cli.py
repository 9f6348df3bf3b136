"""Command-line front end.

    cdfplot capacity_cdf.csv --out capacity.png
    cdfplot v2v_sinr_cdf.csv --out sinr.png --vline 5 --hline 0.01
    cdfplot capacity_cdf.csv baseline_capacity_cdf.csv \
        --out compare.pdf --labels optimized random
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .plot import PlotSpec, plot_cdf


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdfplot",
        description="render empirical-CDF CSV files as step plots")
    parser.add_argument("--version", action="version",
                        version=f"cdfplot {__version__}")
    parser.add_argument("csvs", nargs="+", metavar="CSV",
                        help="input CDF files ('<value>,cdf' columns); "
                             "several overlay into one figure")
    parser.add_argument("--out", required=True,
                        help="output image (.png/.pdf/.svg by suffix)")
    parser.add_argument("--labels", nargs="+", metavar="L",
                        help="legend labels, one per input")
    parser.add_argument("--xlabel", help="x-axis label "
                                         "(default: value column header)")
    parser.add_argument("--ylabel", default="CDF")
    parser.add_argument("--title")
    parser.add_argument("--vline", type=float,
                        help="vertical marker, e.g. the SINR target in dB")
    parser.add_argument("--hline", type=float,
                        help="horizontal marker, e.g. the outage budget")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(csv_paths=args.csvs, output=args.out,
                    labels=args.labels, xlabel=args.xlabel,
                    ylabel=args.ylabel, title=args.title,
                    vline=args.vline, hline=args.hline)
    try:
        path = plot_cdf(spec)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
