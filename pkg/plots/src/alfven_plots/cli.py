"""Batch figure generation: alfven-plots --run DIR --out DIR [--force]."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURES, MissingColumns, PlotSpec, render_run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alfven-plots",
        description="emit diagnostic figures from a simulator run directory",
    )
    parser.add_argument("--run", required=True, help="run directory to read")
    parser.add_argument("--out", default=None,
                        help="output directory (default: the run directory)")
    parser.add_argument("--force", action="store_true",
                        help="plot even if the manifest records failures")
    parser.add_argument("--format", default="png", choices=("png", "svg"))
    parser.add_argument(
        "--figures", default=None,
        help=f"comma-separated subset of {','.join(FIGURES)}",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    run_dir = Path(args.run)
    out_dir = Path(args.out) if args.out else run_dir
    figures = args.figures.split(",") if args.figures else None
    spec = PlotSpec(
        run_dir=run_dir,
        out_dir=out_dir,
        fmt=args.format,
        force=args.force,
        **({"figures": figures} if figures else {}),
    )
    try:
        written = render_run(spec)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingColumns as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RuntimeError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 4
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
