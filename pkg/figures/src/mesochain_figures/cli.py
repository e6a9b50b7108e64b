"""Command-line entry point: figures --run <dir> [--zoom lo,hi] [--out <dir>]."""

from __future__ import annotations

import argparse
import sys

from .render import MissingColumnError, render_run


def _parse_zoom(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    if hi <= lo:
        raise argparse.ArgumentTypeError("zoom window must satisfy lo < hi")
    return lo, hi


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render stress, reconstruction and demo figures from a "
                    "mesochain run directory",
    )
    parser.add_argument("--run", required=True, help="run directory with CSV outputs")
    parser.add_argument("--zoom", type=_parse_zoom, default=None,
                        help="x window as 'lo,hi' (e.g. 0.26,0.34)")
    parser.add_argument("--out", default=None,
                        help="output directory (default: <run>/figures)")
    args = parser.parse_args(argv)
    try:
        written = render_run(args.run, zoom=args.zoom, out_dir=args.out)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingColumnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(written)} figures to {written[0].parent}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
