import logging
import os

from application.app.config.config_exceptions import ConfigurationException
from application.app.config.config_loader import ConfigLoader
from application.app.data.dataset_loader import DatasetLoader
from application.app.data.preprocessing import apply_max_attempt
from application.app.harness.cross_validation import DEFAULT_FOLDS, ModelSpec, cross_validate, default_jobs
from application.app.harness.reporting import aggregate_report
from application.app.harness.results_store import save_results
from application.app.harness.tracers import DEEP_TAGS, MODEL_TAGS
from application.routes.cli_support import (
    ManifestWriter,
    add_config_flag,
    parse_policy,
    require,
    resolve_settings,
    run_command,
    train_config_overrides,
)
from domain.hyper_params import Architecture, HyperParams
from domain.max_attempt_policy import MaxAttemptMode
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)

DEFAULTS = {
    "model": None,
    "dataset": None,
    "hyper": None,
    "max_attempt": "none",
    "seed": 0,
    "folds": DEFAULT_FOLDS,
    "jobs": None,
    "max_epochs": None,
    "patience": None,
    "out": None,
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="one cross-validated run of one model")
    parser.add_argument("--model", choices=MODEL_TAGS)
    parser.add_argument("--dataset", help="canonical dataset directory")
    parser.add_argument("--hyper", help="hyperparameter config (deep models; looked up under static/hyper)")
    parser.add_argument("--max-attempt", dest="max_attempt", help="none, cut:<limit> or split:<limit>")
    parser.add_argument("--seed", type=int, help="master seed for fold assignment and baseline fitting")
    parser.add_argument("--folds", type=int)
    parser.add_argument("--jobs", type=int, help="parallel folds (default: available CPUs)")
    parser.add_argument("--max-epochs", dest="max_epochs", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--out", help="output results directory")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    return run_command("train", lambda: train(resolve_settings(args, DEFAULTS)))


def model_spec(settings: dict, manifest: ManifestWriter) -> ModelSpec:
    tag = settings["model"]
    if tag not in MODEL_TAGS:
        raise ConfigurationException(f"Unknown model '{tag}'. Valid models: {', '.join(MODEL_TAGS)}")
    policy = parse_policy(settings["max_attempt"])
    hyper_params = None
    config = TrainConfig()
    if tag in DEEP_TAGS:
        if settings["hyper"]:
            manifest.uses_config(settings["hyper"], "hyper")
            hyper_params, config = ConfigLoader.load_hyper_params(settings["hyper"], tag)
        else:
            hyper_params = HyperParams(Architecture(tag))
            config = TrainConfig(batch_size=hyper_params.batch_size)
    elif settings["hyper"]:
        logger.warning(f"'{tag}' has no hyperparameters; ignoring {settings['hyper']}")
    return ModelSpec(tag, hyper_params, train_config_overrides(config, settings), policy)


def train(settings: dict) -> int:
    require(settings, "model", "dataset", "out")
    manifest = ManifestWriter("train", settings)
    spec = model_spec(settings, manifest)
    dataset = DatasetLoader.load(settings["dataset"])
    if spec.policy.mode is not MaxAttemptMode.NONE:
        # whole-dataset effect, for the log; folds apply the policy to their own training students
        apply_max_attempt(dataset, spec.policy)

    seed = int(settings["seed"])
    folds = int(settings["folds"])
    out = settings["out"]
    result = cross_validate(
        spec,
        dataset,
        k=folds,
        seed=seed,
        jobs=int(settings["jobs"] or default_jobs()),
        checkpoint_dir=_checkpoint_dir(out),
    )
    save_results(out, [result], extra={"run": spec.to_dict(), "folds": folds, "seed": seed, "dataset": dataset.summary()})
    manifest.write(out, dataset_digest=DatasetLoader.digest(settings["dataset"]), master_seed=seed)
    print(aggregate_report([result], "text"))
    return 0


def _checkpoint_dir(out: str) -> str:
    path = os.path.join(out, "checkpoints")
    os.makedirs(path, exist_ok=True)
    return path
