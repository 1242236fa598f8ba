"""
Bayesian Knowledge Tracing: a two-state (unlearned / learned), no-forgetting hidden Markov model per skill,
fitted with Baum-Welch expectation-maximisation.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from application.app.engine.engine_exceptions import ContractException
from application.app.seeding import SeedStream, make_rng
from domain.bkt_params import PROBABILITY_CEILING, PROBABILITY_FLOOR, BKTParams, SkillParams
from domain.dataset import Dataset

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 200
TOLERANCE = 1e-6
RESTARTS = 3


@dataclass
class SkillFit:
    params: SkillParams
    log_likelihood: float
    trace: list[float] = field(default_factory=list)


def _skill_observations(dataset: Dataset) -> dict[int, list[np.ndarray]]:
    """For every skill, the correctness subsequences of each student on that skill, in attempt order."""
    by_skill: dict[int, list[np.ndarray]] = {}
    for sequence in dataset.sequences:
        for skill in np.unique(sequence.skills):
            by_skill.setdefault(int(skill), []).append(sequence.correct[sequence.skills == skill])
    return by_skill


def _pad(subsequences: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    longest = max(len(s) for s in subsequences)
    observed = np.zeros((len(subsequences), longest))
    mask = np.zeros((len(subsequences), longest), dtype=bool)
    for row, values in enumerate(subsequences):
        observed[row, :len(values)] = values
        mask[row, :len(values)] = True
    return observed, mask


def _em_iteration(observed: np.ndarray, mask: np.ndarray, params: SkillParams) -> tuple[SkillParams, float]:
    """One E-step and M-step. Returns the new parameters and the log-likelihood of the *old* ones."""
    prior, transition, guess, slip = params.prior, params.transition, params.guess, params.slip
    count, length = observed.shape
    # emission[n, t, state]: P(observation | state)
    emission = np.stack([
        np.where(observed == 1, guess, 1.0 - guess),
        np.where(observed == 1, 1.0 - slip, slip),
    ], axis=-1)
    moves = np.array([[1.0 - transition, transition], [0.0, 1.0]])

    alpha = np.zeros((count, length, 2))
    scale = np.ones((count, length))
    alpha[:, 0] = np.array([1.0 - prior, prior]) * emission[:, 0]
    scale[:, 0] = alpha[:, 0].sum(axis=1)
    alpha[:, 0] /= scale[:, 0, None]
    for t in range(1, length):
        step = (alpha[:, t - 1] @ moves) * emission[:, t]
        total = step.sum(axis=1)
        valid = mask[:, t]
        alpha[:, t] = np.where(valid[:, None], step / np.where(valid, total, 1.0)[:, None], alpha[:, t - 1])
        scale[:, t] = np.where(valid, total, 1.0)

    beta = np.ones((count, length, 2))
    for t in range(length - 2, -1, -1):
        valid = mask[:, t + 1]
        step = ((emission[:, t + 1] * beta[:, t + 1]) @ moves.T) / scale[:, t + 1, None]
        beta[:, t] = np.where(valid[:, None], step, 1.0)

    gamma = alpha * beta
    gamma /= gamma.sum(axis=2, keepdims=True)
    gamma *= mask[..., None]

    # expected unlearned -> learned transitions between consecutive valid steps
    learned_moves = alpha[:, :-1, 0] * transition * emission[:, 1:, 1] * beta[:, 1:, 1] / scale[:, 1:]
    learned_moves *= mask[:, 1:]
    unlearned_before = gamma[:, :-1, 0] * mask[:, 1:]

    log_likelihood = float(np.log(scale[mask]).sum())

    def ratio(numerator, denominator, fallback):
        return float(np.clip(numerator / denominator, PROBABILITY_FLOOR, PROBABILITY_CEILING)) if denominator > 0 else fallback

    updated = SkillParams(
        prior=ratio(gamma[:, 0, 1].sum(), count, prior),
        transition=ratio(learned_moves.sum(), unlearned_before.sum(), transition),
        guess=ratio((gamma[..., 0] * observed).sum(), gamma[..., 0].sum(), guess),
        slip=ratio((gamma[..., 1] * (1.0 - observed) * mask).sum(), gamma[..., 1].sum(), slip),
    )
    return updated, log_likelihood


def log_likelihood(subsequences: list[np.ndarray], params: SkillParams) -> float:
    observed, mask = _pad(subsequences)
    return _em_iteration(observed, mask, params)[1]


def fit_skill(
    subsequences: list[np.ndarray],
    initial: SkillParams,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = TOLERANCE,
) -> SkillFit:
    """EM from one starting point until `max_iterations` or a log-likelihood gain below `tolerance`."""
    observed, mask = _pad(subsequences)
    params = initial.clamped()
    trace = []
    for _ in range(max_iterations):
        updated, current = _em_iteration(observed, mask, params)
        trace.append(current)
        if len(trace) > 1 and trace[-1] - trace[-2] < tolerance:
            break
        params = updated
    final = _em_iteration(observed, mask, params)[1]
    return SkillFit(params=params, log_likelihood=final, trace=trace)


def _initial_guesses(rng: np.random.Generator, restarts: int) -> list[SkillParams]:
    return [
        SkillParams(
            prior=rng.uniform(0.1, 0.9),
            transition=rng.uniform(0.05, 0.5),
            guess=rng.uniform(0.05, 0.4),
            slip=rng.uniform(0.05, 0.4),
        )
        for _ in range(restarts)
    ]


def fit_bkt(train: Dataset, seed: int = 0, restarts: int = RESTARTS, max_iterations: int = MAX_ITERATIONS) -> BKTParams:
    """
    Per-skill EM with `restarts` seeded starting points, keeping the best training log-likelihood.
    Skills absent from `train` are predicted with the global training mean.
    """
    if train.attempt_count == 0:
        raise ContractException("BKT needs training attempts")
    rng = make_rng(seed, SeedStream.BKT)
    by_skill = _skill_observations(train)
    fitted = {}
    for skill in range(train.skill_count):
        starts = _initial_guesses(rng, restarts)
        if skill not in by_skill:
            continue
        best = max((fit_skill(by_skill[skill], start, max_iterations) for start in starts), key=lambda f: f.log_likelihood)
        fitted[skill] = best.params
        logger.debug(f"BKT skill {skill}: {best.params.to_dict()} (log-likelihood {best.log_likelihood:.4f})")

    fallback = train.correct_count / train.attempt_count
    unseen = train.skill_count - len(fitted)
    if unseen:
        logger.warning(f"BKT: {unseen} skills have no training attempts; they fall back to the mean {fallback:.3f}")
    logger.info(f"BKT fitted by in-repo EM for {len(fitted)} skills ({restarts} restarts each)")
    return BKTParams(skills=fitted, fallback_probability=fallback)


def filter_step(mastery: float, correct: int, params: SkillParams) -> tuple[float, float, float]:
    """
    Returns (P(correct) before observing, posterior mastery, mastery after the learning transition).
    An observation the parameters give probability zero leaves the mastery unchanged before the transition.
    """
    predicted = mastery * (1.0 - params.slip) + (1.0 - mastery) * params.guess
    if correct == 1:
        evidence, likelihood = predicted, mastery * (1.0 - params.slip)
    else:
        evidence, likelihood = 1.0 - predicted, mastery * params.slip
    posterior = likelihood / evidence if evidence > 0 else mastery
    return predicted, posterior, posterior + (1.0 - posterior) * params.transition


def predict_bkt(params: BKTParams, skills, correct) -> np.ndarray:
    """
    Filters one student's sequence, each skill tracked independently.
    Returns P(correct) for targets t = 2..T.
    """
    skills = np.asarray(skills, dtype=np.int64)
    correct = np.asarray(correct, dtype=np.int64)
    mastery: dict[int, float] = {}
    predictions = np.empty(len(skills))
    for position, (skill, observed) in enumerate(zip(skills.tolist(), correct.tolist())):
        skill_params = params.skills.get(skill)
        if skill_params is None:
            predictions[position] = params.fallback_probability
            continue
        current = mastery.get(skill, skill_params.prior)
        predictions[position], _, mastery[skill] = filter_step(current, observed, skill_params)
    return predictions[1:]
