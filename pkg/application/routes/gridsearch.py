import logging

from application.app.config.config_exceptions import ConfigurationException
from application.app.config.config_loader import ConfigLoader, load_grid
from application.app.data.dataset_loader import DatasetLoader
from application.app.harness.cross_validation import DEFAULT_FOLDS, default_jobs
from application.app.harness.grid_search import GRID_SEARCH_POLICY, grid_search
from application.app.harness.reporting import aggregate_report
from application.app.harness.results_store import save_results
from application.app.harness.tracers import DEEP_TAGS
from application.routes.cli_support import (
    ManifestWriter,
    add_config_flag,
    parse_policy,
    require,
    resolve_settings,
    run_command,
    train_config_overrides,
)
from domain.hyper_params import STUDY_GRID, Architecture
from domain.train_config import TrainConfig

logger = logging.getLogger(__name__)

DEFAULTS = {
    "model": None,
    "dataset": None,
    "select": "auc",
    "grid": None,
    "hyper": None,
    "max_attempt": str(GRID_SEARCH_POLICY),
    "seed": 0,
    "folds": DEFAULT_FOLDS,
    "jobs": None,
    "max_epochs": None,
    "patience": None,
    "out": None,
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("gridsearch", help="cross-validate every grid point of a deep model")
    parser.add_argument("--model", choices=DEEP_TAGS)
    parser.add_argument("--dataset", help="canonical dataset directory")
    parser.add_argument("--select", help="metric the best configuration is selected by")
    parser.add_argument("--grid", help="grid config replacing option lists of the study grid (static/grids)")
    parser.add_argument("--hyper", help="training settings (max_epochs, patience, ...) shared by all grid points")
    parser.add_argument("--max-attempt", dest="max_attempt", help="none, cut:<limit> or split:<limit>")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--folds", type=int)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--max-epochs", dest="max_epochs", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--out", help="output results directory")
    add_config_flag(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    return run_command("gridsearch", lambda: gridsearch(resolve_settings(args, DEFAULTS)))


def gridsearch(settings: dict) -> int:
    require(settings, "model", "dataset", "out")
    if settings["model"] not in DEEP_TAGS:
        raise ConfigurationException(
            f"gridsearch needs a deep model, got '{settings['model']}'. Valid models: {', '.join(DEEP_TAGS)}"
        )
    manifest = ManifestWriter("gridsearch", settings)
    architecture = Architecture(settings["model"])
    policy = parse_policy(settings["max_attempt"])

    grid = STUDY_GRID
    if settings["grid"]:
        manifest.uses_config(settings["grid"], "grids")
        grid = load_grid(settings["grid"])
    config = TrainConfig()
    if settings["hyper"]:
        manifest.uses_config(settings["hyper"], "hyper")
        _, config = ConfigLoader.load_hyper_params(settings["hyper"], architecture.value)
    config = train_config_overrides(config, settings)

    dataset = DatasetLoader.load(settings["dataset"])
    seed = int(settings["seed"])
    folds = int(settings["folds"])
    search = grid_search(
        architecture,
        dataset,
        selection_metric=settings["select"],
        grid=grid,
        train_config=config,
        policy=policy,
        k=folds,
        seed=seed,
        jobs=int(settings["jobs"] or default_jobs()),
    )
    save_results(
        settings["out"],
        search.results,
        extra={"grid_search": search.to_dict(), "folds": folds, "seed": seed, "dataset": dataset.summary()},
    )
    manifest.write(settings["out"], dataset_digest=DatasetLoader.digest(settings["dataset"]), master_seed=seed)
    print(aggregate_report([search.best], "text"))
    return 0
