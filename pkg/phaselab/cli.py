"""
Command-line entry point.

    phaselab run CONFIG... [--out-dir DIR] [--jobs N] [--log-level LEVEL]
    phaselab validate CONFIG...
    phaselab list-scenarios
    phaselab report RUN_DIR
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from phaselab import __version__
from phaselab.config import RuntimeSettings, get_settings
from phaselab.errors import EXIT_INVALID, EXIT_OK, ConfigurationError, ErrorReporter
from phaselab.models.scenarios import load_scenario, required_keys, scenario_kinds

logger = logging.getLogger(__name__)


def configure_logging(level: str) -> None:
    """Root handler on stderr unless one is already installed; the level always applies."""
    logging.basicConfig(
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.getLogger().setLevel(getattr(logging, level, logging.INFO))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaselab", description="Material-phase numerical laboratory")
    parser.add_argument("--version", action="version", version=f"phaselab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute scenario configs")
    run.add_argument("configs", nargs="+", metavar="CONFIG")
    run.add_argument("--out-dir", default=None, help="run directory root (default: $PHASELAB_OUT_DIR or runs/)")
    run.add_argument("--jobs", type=int, default=None, help="configs to run concurrently")
    run.add_argument("--log-level", default=None)

    validate = sub.add_parser("validate", help="parse and validate configs without running")
    validate.add_argument("configs", nargs="+", metavar="CONFIG")
    validate.add_argument("--log-level", default=None)

    sub.add_parser("list-scenarios", help="print scenario kinds and their required keys")

    report = sub.add_parser("report", help="print a completed run's headline metrics")
    report.add_argument("run_dir", metavar="RUN_DIR")
    return parser


def _settings(args: argparse.Namespace) -> RuntimeSettings:
    settings = get_settings(getattr(args, "out_dir", None))
    updates = {}
    if getattr(args, "log_level", None):
        updates["log_level"] = args.log_level
    if getattr(args, "jobs", None) is not None:
        updates["jobs"] = args.jobs
    if updates:
        settings = RuntimeSettings.model_validate({**settings.model_dump(), **updates})
    return settings


def cmd_run(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from phaselab.runner import run_many

    return run_many(args.configs, settings, settings.jobs)


def cmd_validate(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    reporter = ErrorReporter()
    code = EXIT_OK
    for path in args.configs:
        try:
            scenario = load_scenario(path)
        except ConfigurationError as e:
            code = max(code, reporter.report(e, path))
            continue
        print(f"{path}: ok ({scenario.kind} '{scenario.name}')")
    return code


def cmd_list_scenarios(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    for kind in scenario_kinds():
        print(kind)
        for key in required_keys(kind):
            print(f"  {key}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    from phaselab.runner.report import render_report

    try:
        text = render_report(args.run_dir)
    except ConfigurationError as e:
        return ErrorReporter().report(e, args.run_dir)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "list-scenarios": cmd_list_scenarios,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = _settings(args)
    except (ValidationError, ValueError) as e:
        configure_logging("INFO")
        logger.error(f"Invalid runtime settings: {e}")
        return EXIT_INVALID
    configure_logging(settings.log_level)
    return COMMANDS[args.command](args, settings)


if __name__ == "__main__":
    sys.exit(main())
