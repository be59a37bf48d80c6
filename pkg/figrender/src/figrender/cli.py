"""Render figures from spec files: ``figrender spec.json [spec2.json ...]``."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import EmptyInput, FigureSpec, SchemaMismatch


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figrender",
                                     description="render trajectory/grid/border "
                                                 "figures from data files")
    parser.add_argument("specs", nargs="+", help="figure spec JSON files")
    args = parser.parse_args(argv)
    status = 0
    for path in args.specs:
        try:
            out = render(FigureSpec.from_file(path))
            print(out)
        except (SchemaMismatch, EmptyInput) as e:
            print(f"{path}: {type(e).__name__}: {e}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
