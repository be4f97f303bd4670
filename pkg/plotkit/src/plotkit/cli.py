"""plotkit <kind> --in <csv...> --out <file> [--opt key=value ...]"""

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, plot


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plotkit")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--opt", action="append", default=[],
                        help="key=value figure option (e.g. eps=0.3)")
    args = parser.parse_args(argv)
    options = dict(kv.split("=", 1) for kv in args.opt)
    try:
        spec = FigureSpec(kind=args.kind, inputs=args.inputs, out=args.out,
                          options=options)
        report = plot(spec)
    except (SchemaError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for k, v in report.items():
        print(f"{k}: {v}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
