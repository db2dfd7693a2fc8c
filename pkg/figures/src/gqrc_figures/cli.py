"""Figure rendering entry point.

    render_figure --fig <id> --csv <path>... --out <path.png|svg>
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import render
from .schemas import FIGURE_SCHEMAS, SchemaError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figure",
        description="Render a gqrc CSV dataset into a figure panel",
    )
    parser.add_argument("--fig", required=True, choices=sorted(FIGURE_SCHEMAS),
                        help="figure id (fixes the expected CSV schema)")
    parser.add_argument("--csv", required=True, nargs="+", type=Path,
                        help="input CSV dataset(s)")
    parser.add_argument("--out", required=True, type=Path,
                        help="output image (.png or .svg)")
    args = parser.parse_args(argv)
    if args.out.suffix.lower() not in (".png", ".svg"):
        print("render_figure: output must end in .png or .svg", file=sys.stderr)
        return 2
    try:
        out = render(args.fig, args.csv, args.out)
    except SchemaError as err:
        print(f"render_figure: schema error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"render_figure: {err}", file=sys.stderr)
        return 1
    print(f"render_figure: wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
