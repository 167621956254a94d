import argparse
import os
import sys
from typing import Dict, List, Optional
from uuid import uuid4

import yaml
from dotenv import load_dotenv
from loguru import logger

from src.wpdiff.adapters.config_file import load_config
from src.wpdiff.adapters.notifications import CliNotifications
from src.wpdiff.bootstrap import bootstrap
from src.wpdiff.config import get_logging_config, get_output_config, get_runtime_config
from src.wpdiff.domain import commands, events
from src.wpdiff.observability.context import ctx_run_id
from src.wpdiff.observability.logging import setup_logging
from src.wpdiff.physics.errors import NumericalError
from src.wpdiff.service_layer import scenarios

if os.getenv("IS_TESTING") != "true":
    load_dotenv(".env")


setup_logging(get_logging_config())


bus = bootstrap(notifications=[CliNotifications()])

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class CliParser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's exit 2."""

    def error(self, message):
        raise ValueError(message)


def parse_vary(items: Optional[List[str]]) -> Dict[str, List[float]]:
    """
    Parses repeated `key=v1,v2,...` flags.

    Raises:
        ValueError: for malformed items or non-numeric values.
    """
    axes: Dict[str, List[float]] = {}
    for item in items or []:
        key, sep, values = item.partition("=")
        if not sep or not key:
            raise ValueError(f"--vary expects key=v1,v2; got '{item}'")
        axes[key.strip()] = [float(v) for v in values.split(",") if v.strip()]
    if not axes:
        raise ValueError("sweep needs at least one --vary key=v1,v2")
    return axes


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(description="Wave-packet diffraction runs.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=CliParser)

    def add_common(p, config_required: bool = True):
        p.add_argument("--config", type=str, required=config_required, help="YAML run config")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--nk", type=int, default=None, help="quadrature order (>= 64)")

    add_common(sub.add_parser("simulate", help="evolve a configuration"))
    add_common(sub.add_parser("analytic", help="evaluate closed forms on a grid"))
    add_common(
        sub.add_parser("experiment", help="helium drop against a plate"), config_required=False
    )

    preset = sub.add_parser("preset", help="run a figure preset")
    preset.add_argument("name", nargs="?", choices=scenarios.preset_names())
    preset.add_argument("--preset", dest="preset_flag", choices=scenarios.preset_names())
    preset.add_argument("--out", type=str, default=None)
    preset.add_argument("--nk", type=int, default=None)

    compare = sub.add_parser("compare", help="metrics between two profile files")
    compare.add_argument("a", type=str)
    compare.add_argument("b", type=str)
    compare.add_argument("--name", type=str, default="compare")
    compare.add_argument("--out", type=str, default=None)

    sweep = sub.add_parser("sweep", help="cartesian product over parameter values")
    add_common(sweep)
    sweep.add_argument("--vary", action="append", help="section.field=v1,v2 (repeatable)")
    sweep.add_argument("--threads", type=int, default=None)
    return parser


def build_command(args: argparse.Namespace, run_id: str) -> commands.Command:
    out = args.out or str(get_output_config()["output_dir"])
    runtime = get_runtime_config()

    if args.subcommand == "compare":
        return commands.Compare(path_a=args.a, path_b=args.b, out=out, run_id=run_id, name=args.name)

    nk = args.nk if args.nk is not None else runtime["nk"]
    if nk < 64:
        raise ValueError("--nk must be at least 64")

    if args.subcommand == "preset":
        name = args.name or args.preset_flag
        if name is None:
            raise ValueError("preset needs a name")
        return commands.RunPreset(name=name, out=out, run_id=run_id, nk=nk)

    if args.subcommand == "experiment":
        config = load_config(args.config) if args.config else scenarios.fig10()
        return commands.Experiment(config=config, out=out, run_id=run_id, nk=nk)

    config = load_config(args.config)
    if args.subcommand == "simulate":
        return commands.Simulate(config=config, out=out, run_id=run_id, nk=nk)
    if args.subcommand == "analytic":
        return commands.Analytic(config=config, out=out, run_id=run_id, nk=nk)

    threads = args.threads if args.threads is not None else runtime["threads"]
    if threads < 1:
        raise ValueError("--threads must be at least 1")
    return commands.Sweep(
        config=config, axes=parse_vary(args.vary), out=out, run_id=run_id, threads=threads, nk=nk
    )


def _fail(run_id: str, name: str, error: Exception, code: int) -> int:
    bus.handle(
        events.RunFailed(
            run_id=run_id, name=name, exception=f"{type(error).__name__}: {error}", exit_code=code
        )
    )
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entrypoint for the command line. Results are written by the exporter,
    messages go to stderr through the notifications.

    Args:
        argv: List[str] | None: arguments without the program name.

    Returns:
        int: 0 on success, 1 on configuration errors, 2 on numerical failures
            and any other error raised while running.
    """
    run_id = uuid4().hex
    ctx_run_id.set(run_id)
    name = argv[0] if argv else "wpdiff"
    try:
        args = build_parser().parse_args(argv)
        name = args.subcommand
        bus.handle(build_command(args, run_id))
    except NumericalError as e:
        return _fail(run_id, name, e, EXIT_NUMERICAL)
    except (ValueError, KeyError, OSError, yaml.YAMLError) as e:
        return _fail(run_id, name, e, EXIT_CONFIG)
    except Exception as e:
        logger.exception(f"unexpected failure in {name}")
        return _fail(run_id, name, e, EXIT_NUMERICAL)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
