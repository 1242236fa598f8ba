import logging

from application.app.harness.harness_exceptions import SelfTestFailedException
from application.app.harness.self_test import run_self_test
from application.routes.cli_support import add_config_flag, resolve_settings, run_command

logger = logging.getLogger(__name__)

DEFAULTS = {"max_entries": 25}


def register(subparsers) -> None:
    parser = subparsers.add_parser("selftest", help="gradient checks of every model and the metric oracles")
    parser.add_argument(
        "--max-entries", dest="max_entries", type=int,
        help="parameter entries sampled per tensor in the gradient checks (0 checks all)",
    )
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    return run_command("selftest", lambda: selftest(resolve_settings(args, DEFAULTS)))


def selftest(settings: dict) -> int:
    max_entries = int(settings["max_entries"]) or None
    outcomes = run_self_test(max_entries)
    for outcome in outcomes:
        print(f"{'pass' if outcome.passed else 'FAIL'}  {outcome.name}  ({outcome.detail})")
    failed = [outcome.name for outcome in outcomes if not outcome.passed]
    if failed:
        raise SelfTestFailedException(failed)
    print(f"{len(outcomes)} checks passed")
    return 0
