from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PredictionBatch:
    """
    Aligned (target, prediction) pairs: for each scored attempt, who made it, at which step, on which skill,
    the observed label c_{t+1} and the predicted probability y_t.
    """
    students: np.ndarray
    steps: np.ndarray
    skills: np.ndarray
    labels: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "students", np.asarray(self.students, dtype=np.int64))
        object.__setattr__(self, "steps", np.asarray(self.steps, dtype=np.int64))
        object.__setattr__(self, "skills", np.asarray(self.skills, dtype=np.int64))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "probabilities", np.asarray(self.probabilities, dtype=np.float64))
        length = self.labels.shape[0]
        for name in ("students", "steps", "skills", "probabilities"):
            if getattr(self, name).shape != (length,):
                raise ValueError(f"PredictionBatch field '{name}' is not aligned with {length} labels")
        if length and (self.probabilities.min() < 0.0 or self.probabilities.max() > 1.0):
            raise ValueError("PredictionBatch probabilities must lie in [0, 1]")

    def __len__(self):
        return int(self.labels.shape[0])

    @staticmethod
    def concatenate(batches: list["PredictionBatch"]) -> "PredictionBatch":
        if not batches:
            return PredictionBatch.empty()
        return PredictionBatch(
            students=np.concatenate([b.students for b in batches]),
            steps=np.concatenate([b.steps for b in batches]),
            skills=np.concatenate([b.skills for b in batches]),
            labels=np.concatenate([b.labels for b in batches]),
            probabilities=np.concatenate([b.probabilities for b in batches]),
        )

    @staticmethod
    def empty() -> "PredictionBatch":
        return PredictionBatch(*(np.zeros(0) for _ in range(5)))

    def sorted(self) -> "PredictionBatch":
        """Canonical order: by student, then step."""
        order = np.lexsort((self.steps, self.students))
        return PredictionBatch(
            students=self.students[order],
            steps=self.steps[order],
            skills=self.skills[order],
            labels=self.labels[order],
            probabilities=self.probabilities[order],
        )

    def to_dict(self):
        return {
            "targets": len(self),
            "positives": int(self.labels.sum()),
            "mean_probability": float(self.probabilities.mean()) if len(self) else None,
        }
