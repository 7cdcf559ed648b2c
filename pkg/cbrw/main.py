"""Command line entry point"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import structlog

from cbrw import __version__
from cbrw.config import OutputSection, RunConfig, parse_config
from cbrw.context import RunContext
from cbrw.errors import CBRWError, ConfigError
from cbrw.handlers import EXIT_CONFIG, EXIT_NUMERICAL, CommandHandlers
from cbrw.utils import setup_logging

logger = structlog.get_logger()

COMMANDS = ("malthus", "front", "simulate", "verify", "model-check")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="JSON run config")
    common.add_argument("--seed", type=int, help="master seed (default: simulate.seed)")
    common.add_argument("--out", type=Path, help="output directory (default: output.path)")
    common.add_argument(
        "--format", choices=("csv", "json", "svg"), help="output format (default: output.format)"
    )
    common.add_argument("--log-level", default="INFO", help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--log-format", choices=("console", "json"), default="console")

    parser = argparse.ArgumentParser(
        prog="cbrw", description="Catalytic branching random walk solver and simulator"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("malthus", parents=[common], help="Malthusian parameter and regime")
    front = commands.add_parser("front", parents=[common], help="propagation front")
    front.add_argument("--nu", type=float, help="level nu instead of the solver value")
    commands.add_parser("simulate", parents=[common], help="Monte Carlo replicates")
    verify = commands.add_parser("verify", parents=[common], help="acceptance battery")
    verify.add_argument("--checks", help="comma separated check ids, e.g. C1,C4")
    commands.add_parser("model-check", parents=[common], help="validate the jump model")
    return parser


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    output = OutputSection(
        format=args.format or config.output.format,
        path=str(args.out) if args.out else config.output.path,
    )
    return config.model_copy(update={"output": output})


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_format)
    logger.info(f"cbrw {__version__}: {args.command}", config=str(args.config))

    try:
        config = _apply_overrides(parse_config(args.config), args)
        nu = getattr(args, "nu", None)
        if nu is not None and nu <= 0:
            raise ConfigError(f"--nu must be positive, got {nu}")
        context = RunContext(config, seed=args.seed, nu=nu)
        handlers = CommandHandlers(context, Path(config.output.path), config.output.format)

        if args.command == "malthus":
            code = handlers.cmd_malthus()
        elif args.command == "front":
            code = handlers.cmd_front()
        elif args.command == "simulate":
            code = handlers.cmd_simulate()
        elif args.command == "verify":
            checks = None
            if args.checks:
                checks = [c.strip() for c in args.checks.split(",") if c.strip()]
            code = handlers.cmd_verify(checks)
        else:
            code = handlers.cmd_model_check()
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except CBRWError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_NUMERICAL

    for path in handlers.written:
        logger.info("Output", path=str(path))
    return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
