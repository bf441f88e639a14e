"""Entry point: figs <experiment-id> <csv-in> <img-out>."""

from __future__ import annotations

import sys

from .render import NoDataError, SchemaError, recipe_for, render


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else argv
    if len(args) != 3:
        sys.stderr.write("usage: figs <experiment-id> <csv-in> <img-out>\n")
        return 2
    experiment, csv_in, img_out = args
    try:
        render(recipe_for(experiment, csv_in, img_out))
    except (SchemaError, NoDataError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
