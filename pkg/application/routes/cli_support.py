"""
Shared plumbing of the subcommands: flag/config merging, manifests, and the translation of exceptions into
exit statuses with one categorized error line on stderr.
"""
import argparse
import logging
import sys
import time
import traceback
from dataclasses import replace
from typing import Callable

from application.app.config.config_exceptions import ConfigurationException
from application.app.config.config_loader import ConfigLoader, merge_settings, read_command_config
from application.app.harness.results_store import artifact_versions, config_digest, now, write_manifest
from domain.max_attempt_policy import MaxAttemptPolicy
from domain.run_manifest import RunManifest
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CATEGORIES = {2: "usage", 3: "data", 4: "divergence", 5: "internal"}


def add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value file with defaults for this command's flags")


def resolve_settings(args: argparse.Namespace, defaults: dict) -> dict:
    """Flags beat the --config file, which beats the built-in defaults."""
    config = read_command_config(args.config, defaults) if getattr(args, "config", None) else {}
    flags = {key: getattr(args, key) for key in defaults if hasattr(args, key)}
    return merge_settings(defaults, config, flags)


def require(settings: dict, *keys: str) -> None:
    missing = [key for key in keys if settings.get(key) in (None, "", [])]
    if missing:
        raise ConfigurationException(
            f"Missing required setting(s): {', '.join('--' + key.replace('_', '-') for key in missing)}"
        )


def as_list(value) -> list[str]:
    """Flags with several values arrive as lists; the same setting in a config file is comma-separated."""
    if value is None:
        return []
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return list(value)


class ManifestWriter:
    """Times a command and writes its RunManifest into the output directory."""
    def __init__(self, command: str, settings: dict):
        self.command = command
        self.settings = settings
        self.started_at = now()
        self.started = time.perf_counter()
        self.config_paths: list[str] = []

    def uses_config(self, path: str | None, subdirectory: str = "") -> None:
        if path:
            self.config_paths.append(ConfigLoader.resolve(path, subdirectory))

    def write(self, directory: str, dataset_digest: str | None = None, master_seed: int | None = None) -> str:
        manifest = RunManifest(
            command=self.command,
            config_digest=config_digest(self.config_paths, self.settings),
            dataset_digest=dataset_digest,
            master_seed=master_seed,
            artifact_versions=artifact_versions(),
            started_at=self.started_at,
            finished_at=now(),
            wall_clock_seconds=round(time.perf_counter() - self.started, 3),
            arguments=self.settings,
        )
        path = write_manifest(directory, manifest)
        logger.info(f"Manifest written to '{path}'")
        return path


def run_command(name: str, action: Callable[[], int | None]) -> int:
    """Runs a subcommand and maps its exceptions to documented exit statuses."""
    try:
        status = action()
        return EXIT_OK if status is None else status
    except KeyboardInterrupt:
        logger.warning(f"{name} interrupted")
        return 130
    except Exception as e:
        code = getattr(e, "exit_code", None)
        if code not in EXIT_CATEGORIES:
            logger.error(f"{name} failed unexpectedly: {e}\n{traceback.format_exc()}")
            code = 5
        elif code in (2, 3):
            logger.warning(f"{name} rejected its input: {e}")
        else:
            logger.error(f"{name} failed: {e}")
        print(f"error[{EXIT_CATEGORIES[code]}]: {e}", file=sys.stderr)
        return code


def parse_policy(text: str) -> MaxAttemptPolicy:
    try:
        return MaxAttemptPolicy.parse(str(text))
    except ValueError as e:
        raise ConfigurationException(str(e))


def train_config_overrides(config: TrainConfig, settings: dict) -> TrainConfig:
    """Applies --max-epochs / --patience on top of a TrainConfig."""
    overrides = {key: int(settings[key]) for key in ("max_epochs", "patience") if settings.get(key) is not None}
    try:
        return replace(config, **overrides)
    except ValueError as e:
        raise ConfigurationException(str(e))
