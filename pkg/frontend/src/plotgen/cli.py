"""plotgen command line: ``plotgen <recipe.json>``."""
from __future__ import annotations

import sys

from .render import FigureRecipe, SchemaError, render


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1 or argv[0] in ("-h", "--help"):
        print("usage: plotgen <recipe.json>", file=sys.stderr)
        return 2
    try:
        recipe = FigureRecipe.from_json_file(argv[0])
    except (OSError, ValueError) as exc:
        print(f"error: bad recipe: {exc}", file=sys.stderr)
        return 2
    try:
        out = render(recipe)
    except SchemaError as exc:
        print(f"error: csv schema: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
