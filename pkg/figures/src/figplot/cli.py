import argparse
import sys

from .comparison import plot_comparison
from .kappa import plot_kappa


def build_parser():
    parser = argparse.ArgumentParser(prog="plot", description="regenerate experiment figures")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cmp = sub.add_parser("comparison", help="metric-vs-level curves from summary.csv")
    p_cmp.add_argument("--in", dest="in_path", required=True)
    p_cmp.add_argument("--out", dest="out_path", required=True)
    p_cmp.add_argument("--title", default=None)

    p_kappa = sub.add_parser("kappa", help="condition number distribution from kappa.csv")
    p_kappa.add_argument("--in", dest="in_path", required=True)
    p_kappa.add_argument("--out", dest="out_path", required=True)
    p_kappa.add_argument("--title", default=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "comparison":
            path = plot_comparison(args.in_path, args.out_path, title=args.title)
        else:
            path = plot_kappa(args.in_path, args.out_path, title=args.title)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
