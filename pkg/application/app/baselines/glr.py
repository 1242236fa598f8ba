"""
Best-LR style logistic regression: student ability, skill difficulty and log-rescaled prior success / failure
counts, fitted as an L2-regularised logistic regression.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import expit

from application.app.engine.engine_exceptions import ContractException, TrainingDivergenceException
from application.app.engine.nadam import nadam_step
from application.app.engine.param_store import ParamStore
from domain.dataset import Dataset, StudentSequence

logger = logging.getLogger(__name__)

L2_PENALTY = 1.0
MAX_EPOCHS = 5000
GRADIENT_TOLERANCE = 1e-5
LEARNING_RATE = 0.01


def rescale(count):
    return np.log2(1.0 + np.asarray(count, dtype=np.float64))


@dataclass(frozen=True)
class GLRLayout:
    """
    Column layout of the design matrix, sized by the training vocabulary:
    [student one-hot | skill one-hot | per-skill successes | per-skill failures | total successes |
    total failures | bias]. The per-skill count blocks are non-zero only in the column of the current skill.
    """
    student_columns: dict[int, int]
    skill_count: int
    student_block: int | None = None

    @staticmethod
    def from_dataset(train: Dataset) -> "GLRLayout":
        return GLRLayout({student: column for column, student in enumerate(train.students)}, train.skill_count)

    def rebind(self, student_columns: dict[int, int]) -> "GLRLayout":
        """The same columns with a different set of students mapped into the ability block."""
        return GLRLayout(student_columns, self.skill_count, self.skill_offset)

    @property
    def skill_offset(self) -> int:
        if self.student_block is not None:
            return self.student_block
        return len(self.student_columns)

    @property
    def success_offset(self) -> int:
        return self.skill_offset + self.skill_count

    @property
    def failure_offset(self) -> int:
        return self.success_offset + self.skill_count

    @property
    def total_success_column(self) -> int:
        return self.failure_offset + self.skill_count

    @property
    def total_failure_column(self) -> int:
        return self.total_success_column + 1

    @property
    def bias_column(self) -> int:
        return self.total_success_column + 2

    @property
    def width(self) -> int:
        return self.bias_column + 1

    def to_dict(self):
        return {"students": len(self.student_columns), "skill_count": self.skill_count, "width": self.width}


@dataclass(frozen=True)
class GLRFeatures:
    """The features of one attempt, already rescaled. `student_column` is None for a student unseen in training."""
    student_column: int | None
    skill: int | None
    skill_successes: float
    skill_failures: float
    total_successes: float
    total_failures: float

    def vector(self, layout: GLRLayout) -> np.ndarray:
        row = np.zeros(layout.width)
        if self.student_column is not None:
            row[self.student_column] = 1.0
        if self.skill is not None:
            row[layout.skill_offset + self.skill] = 1.0
            row[layout.success_offset + self.skill] = self.skill_successes
            row[layout.failure_offset + self.skill] = self.skill_failures
        row[layout.total_success_column] = self.total_successes
        row[layout.total_failure_column] = self.total_failures
        row[layout.bias_column] = 1.0
        return row


def _prior_counts(sequence: StudentSequence) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Raw counts strictly before each position: (skill successes, skill failures, total successes, total failures)."""
    correct = sequence.correct.astype(np.float64)
    total_successes = np.concatenate(([0.0], np.cumsum(correct)[:-1]))
    total_failures = np.arange(len(sequence)) - total_successes
    skill_successes = np.zeros(len(sequence))
    skill_failures = np.zeros(len(sequence))
    for skill in np.unique(sequence.skills):
        positions = np.flatnonzero(sequence.skills == skill)
        on_skill = correct[positions]
        successes = np.concatenate(([0.0], np.cumsum(on_skill)[:-1]))
        skill_successes[positions] = successes
        skill_failures[positions] = np.arange(len(positions)) - successes
    return skill_successes, skill_failures, total_successes, total_failures


def build_glr_features(sequence: StudentSequence, position: int, layout: GLRLayout) -> GLRFeatures:
    """Features of attempt `position` of `sequence`, computed from attempts before it only."""
    history_skills = sequence.skills[:position]
    history_correct = sequence.correct[:position]
    skill = int(sequence.skills[position])
    on_skill = history_correct[history_skills == skill]
    return GLRFeatures(
        student_column=layout.student_columns.get(sequence.student),
        skill=skill if skill < layout.skill_count else None,
        skill_successes=float(rescale(on_skill.sum())),
        skill_failures=float(rescale(len(on_skill) - on_skill.sum())),
        total_successes=float(rescale(history_correct.sum())),
        total_failures=float(rescale(len(history_correct) - history_correct.sum())),
    )


def design_matrix(dataset: Dataset, layout: GLRLayout, first_position: int = 0) -> tuple[sparse.csr_matrix, np.ndarray]:
    """
    Sparse design matrix and labels for every attempt at `first_position` or later of every sequence
    (0 for training on all attempts, 1 for scoring targets t = 2..T).
    """
    rows, columns, values, labels = [], [], [], []
    row_offset = 0
    for sequence in dataset.sequences:
        skill_s, skill_f, total_s, total_f = (rescale(c)[first_position:] for c in _prior_counts(sequence))
        skills = sequence.skills[first_position:]
        count = len(skills)
        row_ids = np.arange(row_offset, row_offset + count)
        blocks = [
            (layout.skill_offset + skills, np.ones(count)),
            (layout.success_offset + skills, skill_s),
            (layout.failure_offset + skills, skill_f),
            (np.full(count, layout.total_success_column), total_s),
            (np.full(count, layout.total_failure_column), total_f),
            (np.full(count, layout.bias_column), np.ones(count)),
        ]
        student_column = layout.student_columns.get(sequence.student)
        if student_column is not None:
            blocks.append((np.full(count, student_column), np.ones(count)))
        for block_columns, block_values in blocks:
            rows.append(row_ids)
            columns.append(block_columns)
            values.append(block_values)
        labels.append(sequence.correct[first_position:])
        row_offset += count

    matrix = sparse.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(columns))),
        shape=(row_offset, layout.width),
    )
    return matrix, np.concatenate(labels).astype(np.float64)


def fit_glr(
    features,
    labels,
    l2: float = L2_PENALTY,
    bias_column: int | None = -1,
    learning_rate: float = LEARNING_RATE,
    max_epochs: int = MAX_EPOCHS,
    tolerance: float = GRADIENT_TOLERANCE,
) -> np.ndarray:
    """
    Minimises (sum of log losses + l2/2 * |w|^2) / N, the bias column unpenalised, by full-batch Nadam until the
    gradient norm drops below `tolerance` or `max_epochs` passes.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.size == 0 or labels.min() == labels.max():
        raise ContractException("Logistic regression needs at least one example of each label")
    count, width = features.shape
    penalty = np.full(width, l2)
    if bias_column is not None:
        penalty[bias_column] = 0.0

    store = ParamStore()
    weights = store.add("w", np.zeros(width))
    gradient_norm = np.inf
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        probabilities = expit(features @ weights.data)
        gradient = (features.T @ (probabilities - labels) + penalty * weights.data) / count
        gradient = np.asarray(gradient).ravel()
        gradient_norm = float(np.linalg.norm(gradient))
        if not np.isfinite(gradient_norm):
            raise TrainingDivergenceException(f"logistic regression epoch {epoch}")
        if gradient_norm < tolerance:
            break
        nadam_step(store, {"w": gradient}, learning_rate)
    logger.info(
        f"Logistic regression fitted by full-batch Nadam (substituting L-BFGS): {epoch} epochs, "
        f"gradient norm {gradient_norm:.2e}, {width} features"
    )
    return weights.data.copy()


def predict_glr(weights: np.ndarray, features) -> np.ndarray:
    return np.asarray(expit(features @ weights)).ravel()
