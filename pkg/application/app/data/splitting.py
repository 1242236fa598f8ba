import logging
import math

import numpy as np

from application.app.config.config_exceptions import ConfigurationException
from application.app.seeding import SeedStream, make_rng
from domain.dataset import Dataset
from domain.fold_plan import FoldPlan

logger = logging.getLogger(__name__)


def make_folds(dataset: Dataset, k: int, seed: int) -> FoldPlan:
    """Shuffles students with the seeded generator and deals them round-robin into k folds."""
    if k < 2:
        raise ConfigurationException(f"Cross-validation needs at least 2 folds, got {k}")
    students = np.array(dataset.students, dtype=np.int64)
    if len(students) < k:
        raise ConfigurationException(f"Dataset '{dataset.name}' has {len(students)} students, fewer than {k} folds")

    shuffled = make_rng(seed, SeedStream.FOLDS).permutation(students)
    assignment = {int(student): position % k for position, student in enumerate(shuffled)}
    plan = FoldPlan(fold_count=k, assignment=assignment)
    logger.info(f"Fold plan for '{dataset.name}' (seed {seed}): sizes {plan.fold_sizes()}")
    return plan


def split_validation(train_students, fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Moves ceil(fraction * N) students, chosen by seeded shuffle, into the validation subset."""
    if not 0.0 < fraction < 1.0:
        raise ConfigurationException(f"Validation fraction must be in (0, 1), got {fraction}")
    students = np.array(sorted(train_students), dtype=np.int64)
    # rounded first: 0.1 * 70 is 7.000000000000001 in floating point
    validation_count = math.ceil(round(fraction * len(students), 9))
    if validation_count == 0 or validation_count >= len(students):
        raise ConfigurationException(
            f"Validation fraction {fraction} of {len(students)} students leaves an empty train or validation set"
        )
    shuffled = make_rng(seed, SeedStream.VALIDATION).permutation(students)
    validation = sorted(int(s) for s in shuffled[:validation_count])
    train = sorted(int(s) for s in shuffled[validation_count:])
    return train, validation
