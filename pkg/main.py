from dotenv import load_dotenv

# Load environment variables BEFORE any other imports
load_dotenv()

import argparse
import logging
import sys

from application.routes import analyze, gridsearch, preprocess, report, selftest, synth, train

ROUTES = (preprocess, synth, train, gridsearch, analyze, report, selftest)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kt-bench", description="Knowledge-tracing benchmark")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for route in ROUTES:
        route.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return int(e.code or 0)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
