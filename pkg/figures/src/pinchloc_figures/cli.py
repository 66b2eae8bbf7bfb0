"""Command-line front end: render an experiment table into an image."""
from __future__ import annotations

import argparse
import sys

from .render import ColumnMismatchError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchloc-figures",
        description="Render localization experiment tables into figures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one CSV + sidecar into an image")
    p.add_argument("--csv", required=True, help="experiment CSV table")
    p.add_argument("--sidecar", required=True, help="JSON sidecar of the table")
    p.add_argument("--out", required=True, help="output image path (PNG)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(FigureSpec(args.csv, args.sidecar, args.out))
    except ColumnMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
