import argparse
import logging
import sys

from src.core.config import RunConfig, config_digest, load_config
from src.core.errors import CapoError, ConfigError, DigestMismatchError, PrerequisiteError
from src.core.logs import setup_logging
from src.core.phases.phase_parameters import COMMANDS
from src.core.phases.phase_typings import ArtifactStore
from src.core.pipeline import build_pipeline
from src.db.database import create_registry_engine
from src.db.entities import RunStatus
from src.db.registry import RunRegistry

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_PREREQUISITE = 3
EXIT_DIGEST = 4


def exit_code(error: CapoError) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, PrerequisiteError):
        return EXIT_PREREQUISITE
    if isinstance(error, DigestMismatchError):
        return EXIT_DIGEST
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capo", description="Prompt-based domain-adaptive navigation")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparser = subparsers.add_parser(command)
        subparser.add_argument("--config", default=None, help="JSON config file (default configs/default.json)")
        subparser.add_argument("--seed", type=int, default=None)
        subparser.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="dotted override"
        )
        subparser.add_argument("--out", default=None, help="run directory")
    return parser


def run_command(command: str, config: RunConfig) -> None:
    """Run one command and record it in the run registry."""
    digest = config_digest(config)
    store = ArtifactStore(config.out_path)
    registry = RunRegistry(create_registry_engine(config.out_path))
    run_id = registry.start(command, config.seed, digest, config.out_dir)
    try:
        build_pipeline(command, config, store).run()
    except Exception as error:
        registry.finish(run_id, store.produced, digest, RunStatus.FAILED, str(error))
        raise
    registry.finish(run_id, store.produced, digest)


def command_dispatch(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides, args.seed, args.out)
        setup_logging(config.out_path, args.command)
        logging.info(f"{args.command}: out_dir={config.out_dir} seed={config.seed} digest={config_digest(config)}")
        run_command(args.command, config)
    except CapoError as error:
        logging.error(f"{args.command} failed: {error}")
        print(f"capo {args.command}: {type(error).__name__}: {error}", file=sys.stderr)
        return exit_code(error)
    return EXIT_OK


def main():
    sys.exit(command_dispatch())


if __name__ == "__main__":
    main()
