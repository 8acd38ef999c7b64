"""Command-line front end.

    python -m app.main <scenario> [--config PATH] [--out PATH] [--format csv|json] [--seed N]

Exit status: 0 on success, 1 for configuration or precondition errors,
2 for numerical failures.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from app.errors import ConfigError, SimulationError
from app.models.config import load_config
from app.scenarios import histogram, noise, protocol, pulse, spectrum, squid
from app.scenarios.router import ScenarioRouter
from app.utils.output import write_report
from app.utils.summary import render_summary

logger = logging.getLogger("app")

app = ScenarioRouter()
app.include_router(spectrum.router)
app.include_router(pulse.router)
app.include_router(noise.router)
app.include_router(squid.router)
app.include_router(histogram.router)
app.include_router(protocol.router)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubit-etls", description="Qubit-ETLS measurement protocol simulator")
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="scenario")
    for entry in app.scenarios:
        cmd = sub.add_parser(entry.name, help=entry.summary)
        cmd.add_argument("--config", type=Path, help="key = value run configuration (defaults if omitted)")
        cmd.add_argument("--out", type=Path, help="output file (default <scenario>.<format>)")
        cmd.add_argument("--format", choices=("json", "csv"), help="output format (overrides run.format)")
        cmd.add_argument("--seed", type=int, help="base seed (overrides run.seed)")
        level = cmd.add_mutually_exclusive_group()
        level.add_argument("-v", "--verbose", action="store_true", help="log debug output")
        level.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    overrides = {}
    if args.seed is not None:
        overrides["run.seed"] = str(args.seed)
    if args.format is not None:
        overrides["run.format"] = args.format

    try:
        config = load_config(args.config, overrides, scenario=args.scenario)
        fmt = config.run.format
        out = args.out or Path(config.run.out or f"{args.scenario}.{fmt}")
        report = app.table()[args.scenario].handler(config)
        written = write_report(report, out, fmt)
    except SimulationError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except ValidationError as exc:
        # model-level checks that only run once sections are combined (e.g. y0 == y1)
        logger.error("ConfigError: %s", exc.errors()[0]["msg"])
        return ConfigError.exit_code

    logger.info("\n%s", render_summary(report, written).rstrip())
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
