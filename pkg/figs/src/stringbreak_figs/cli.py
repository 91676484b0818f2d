"""Render figures from CSV artifacts: stringbreak-figs [ids...]"""

import argparse
import sys

from .recipes import RECIPES
from .render import SchemaError, render_figure


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="stringbreak-figs",
        description="Regenerate figures from stringbreak CSV artifacts.",
    )
    parser.add_argument("figures", nargs="*", metavar="FIG",
                        help="figure ids (default: all)")
    parser.add_argument("--data", default="figs/golden",
                        help="directory holding the input CSV/JSON files")
    parser.add_argument("--out", default="figs/out",
                        help="directory for the rendered SVG files")
    args = parser.parse_args(argv)
    ids = args.figures or sorted(RECIPES, key=lambda s: int(s[3:]))
    unknown = [f for f in ids if f not in RECIPES]
    if unknown:
        print(f"error: unknown figure ids {unknown}", file=sys.stderr)
        return 1
    for fid in ids:
        try:
            path = render_figure(RECIPES[fid], args.data, args.out)
        except SchemaError as exc:
            print(f"error: {fid}: {exc}", file=sys.stderr)
            return 1
        print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
