import logging

import numpy as np
from scipy.special import expit

from application.app.config.config_exceptions import ConfigurationException
from application.app.seeding import SeedStream, make_rng
from domain.dataset import Dataset, StudentSequence

logger = logging.getLogger(__name__)

DEFAULT_GUESS = 0.25
DEFAULT_LEARNING_INCREMENT = 0.1
# Logit-scale spreads of ability and difficulty; at 2 concepts about 70% of answers are correct.
DEFAULT_ABILITY_SCALE = 4.0
DEFAULT_DIFFICULTY_SCALE = 0.5


def generate_synthetic(
    n_students: int,
    n_exercises: int = 50,
    n_concepts: int = 5,
    seed: int = 0,
    guess: float = DEFAULT_GUESS,
    learning_increment: float = DEFAULT_LEARNING_INCREMENT,
    ability_scale: float = DEFAULT_ABILITY_SCALE,
    difficulty_scale: float = DEFAULT_DIFFICULTY_SCALE,
) -> Dataset:
    """
    IRT-style simulated students answering the same fixed sequence of exercises.

    Exercise e exercises concept e mod n_concepts and is its own skill. Abilities are drawn per student and
    concept as N(0, ability_scale^2), difficulties per exercise as N(0, difficulty_scale^2) (in that order, from
    the synthetic stream of `seed`). Ability on a concept grows by `learning_increment` for every earlier attempt
    on that concept, and

        P(correct) = guess + (1 - guess) * sigmoid(ability + increment * prior_attempts - difficulty)
    """
    if min(n_students, n_exercises, n_concepts) < 1:
        raise ConfigurationException(
            f"Synthetic sizes must be positive, got students={n_students}, exercises={n_exercises}, concepts={n_concepts}"
        )
    if n_concepts > n_exercises:
        raise ConfigurationException(f"{n_concepts} concepts cannot be spread over {n_exercises} exercises")
    if n_exercises < 2:
        raise ConfigurationException("Synthetic students need at least 2 exercises")
    if not 0.0 <= guess < 1.0:
        raise ConfigurationException(f"Guess probability must be in [0, 1), got {guess}")
    if ability_scale < 0.0 or difficulty_scale < 0.0:
        raise ConfigurationException(
            f"Spreads must be non-negative, got ability_scale={ability_scale}, difficulty_scale={difficulty_scale}"
        )

    rng = make_rng(seed, SeedStream.SYNTHETIC)
    ability = ability_scale * rng.standard_normal((n_students, n_concepts))
    difficulty = difficulty_scale * rng.standard_normal(n_exercises)

    exercises = np.arange(n_exercises)
    concepts = exercises % n_concepts
    prior_attempts = exercises // n_concepts
    logits = ability[:, concepts] + learning_increment * prior_attempts - difficulty
    probability = guess + (1.0 - guess) * expit(logits)
    correct = (rng.random((n_students, n_exercises)) < probability).astype(np.int64)

    parameters = {
        "generator": "irt-synthetic",
        "n_students": n_students,
        "n_exercises": n_exercises,
        "n_concepts": n_concepts,
        "seed": seed,
        "guess": guess,
        "learning_increment": learning_increment,
        "ability_scale": ability_scale,
        "difficulty_scale": difficulty_scale,
        "concept_assignment": "round-robin",
    }
    dataset = Dataset(
        sequences=tuple(StudentSequence(student, exercises, correct[student]) for student in range(n_students)),
        skill_count=n_exercises,
        skill_names={int(e): f"exercise-{e}" for e in exercises},
        student_names={student: f"synthetic-{student}" for student in range(n_students)},
        name=f"synthetic-k{n_concepts}",
        metadata=parameters,
    )
    logger.info(f"Synthetic dataset generated with {parameters}; mean correctness {correct.mean():.3f}")
    return dataset
