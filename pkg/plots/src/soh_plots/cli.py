"""Command line for figure generation from snapshot text mirrors."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, FigureSpec, render
from .textio import SnapshotFormatError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="soh-plot",
        description="Render a figure from a solver snapshot text mirror")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("snapshot", help="snapshot .txt mirror")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    parser.add_argument("--vmin", type=float)
    parser.add_argument("--vmax", type=float)
    parser.add_argument("--subsample", type=int, default=8,
                        help="arrow spacing in cells (quiver only)")
    args = parser.parse_args(argv)

    spec = FigureSpec(snapshot=Path(args.snapshot), kind=args.kind,
                      output=Path(args.output), vmin=args.vmin,
                      vmax=args.vmax, subsample=args.subsample)
    try:
        out = render(spec)
    except SnapshotFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
