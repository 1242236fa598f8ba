from dataclasses import dataclass

import numpy as np

from application.app.data.preprocessing import encode_attempts
from domain.dataset import Dataset, StudentSequence


@dataclass(frozen=True)
class Batch:
    """
    Sequences padded to the longest one in the batch. `mask[b, t]` is 1 where attempt t exists.
    Padding sits at the end of each row and never reaches a real target.
    """
    students: np.ndarray
    skills: np.ndarray
    correct: np.ndarray
    mask: np.ndarray
    skill_count: int

    @property
    def size(self) -> int:
        return int(self.skills.shape[0])

    @property
    def length(self) -> int:
        return int(self.skills.shape[1])

    @property
    def encoded(self) -> np.ndarray:
        """2*skill + correct for the input attempts 1..T-1."""
        return encode_attempts(self.skills[:, :-1], self.correct[:, :-1], self.skill_count)

    @property
    def next_skills(self) -> np.ndarray:
        return self.skills[:, 1:]

    @property
    def target_labels(self) -> np.ndarray:
        return self.correct[:, 1:]

    @property
    def target_mask(self) -> np.ndarray:
        return self.mask[:, 1:]

    def window(self, start: int, stop: int) -> "Batch":
        """Attempts start..stop-1 of every row (a window of stop-start-1 targets)."""
        return Batch(
            students=self.students,
            skills=self.skills[:, start:stop],
            correct=self.correct[:, start:stop],
            mask=self.mask[:, start:stop],
            skill_count=self.skill_count,
        )


def pad_batch(sequences: list[StudentSequence], skill_count: int) -> Batch:
    length = max(len(s) for s in sequences)
    skills = np.zeros((len(sequences), length), dtype=np.int64)
    correct = np.zeros((len(sequences), length), dtype=np.int64)
    mask = np.zeros((len(sequences), length), dtype=np.int64)
    for row, sequence in enumerate(sequences):
        skills[row, :len(sequence)] = sequence.skills
        correct[row, :len(sequence)] = sequence.correct
        mask[row, :len(sequence)] = 1
    return Batch(
        students=np.array([s.student for s in sequences], dtype=np.int64),
        skills=skills,
        correct=correct,
        mask=mask,
        skill_count=skill_count,
    )


def make_batches(dataset: Dataset, batch_size: int, rng: np.random.Generator | None = None) -> list[Batch]:
    """Mini-batches in student order, or in a seeded shuffled order when `rng` is given."""
    order = np.arange(len(dataset))
    if rng is not None:
        order = rng.permutation(order)
    return [
        pad_batch([dataset.sequences[i] for i in order[start:start + batch_size]], dataset.skill_count)
        for start in range(0, len(order), batch_size)
    ]
