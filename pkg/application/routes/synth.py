import json
import logging

from application.app.data.dataset_loader import DatasetLoader
from application.app.data.synthetic import (
    DEFAULT_ABILITY_SCALE,
    DEFAULT_DIFFICULTY_SCALE,
    DEFAULT_GUESS,
    DEFAULT_LEARNING_INCREMENT,
    generate_synthetic,
)
from application.routes.cli_support import ManifestWriter, add_config_flag, require, resolve_settings, run_command

logger = logging.getLogger(__name__)

DEFAULTS = {
    "students": 1000,
    "exercises": 50,
    "concepts": None,
    "seed": 0,
    "guess": DEFAULT_GUESS,
    "learning_increment": DEFAULT_LEARNING_INCREMENT,
    "ability_scale": DEFAULT_ABILITY_SCALE,
    "difficulty_scale": DEFAULT_DIFFICULTY_SCALE,
    "out": None,
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="generate an IRT-style synthetic dataset")
    parser.add_argument("--students", type=int)
    parser.add_argument("--exercises", type=int)
    parser.add_argument("--concepts", type=int, help="number of hidden concepts (required)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--guess", type=float)
    parser.add_argument("--learning-increment", dest="learning_increment", type=float)
    parser.add_argument("--ability-scale", dest="ability_scale", type=float, help="logit spread of student ability")
    parser.add_argument("--difficulty-scale", dest="difficulty_scale", type=float, help="logit spread of exercise difficulty")
    parser.add_argument("--out", help="output dataset directory")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    return run_command("synth", lambda: synth(resolve_settings(args, DEFAULTS)))


def synth(settings: dict) -> int:
    require(settings, "concepts", "out")
    manifest = ManifestWriter("synth", settings)
    dataset = generate_synthetic(
        n_students=int(settings["students"]),
        n_exercises=int(settings["exercises"]),
        n_concepts=int(settings["concepts"]),
        seed=int(settings["seed"]),
        guess=float(settings["guess"]),
        learning_increment=float(settings["learning_increment"]),
        ability_scale=float(settings["ability_scale"]),
        difficulty_scale=float(settings["difficulty_scale"]),
    )
    digest = DatasetLoader.save(dataset, settings["out"])
    manifest.write(settings["out"], dataset_digest=digest, master_seed=int(settings["seed"]))
    print(json.dumps(dataset.summary(), indent=2, sort_keys=True))
    return 0
