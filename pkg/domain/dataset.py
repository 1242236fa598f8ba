from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from domain.interaction import Interaction


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=np.int64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StudentSequence:
    """
    The ordered attempts of one student.
    Skills and correctness are stored as read-only integer arrays; `order` is implicit (the array position).
    """
    student: int
    skills: np.ndarray
    correct: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "skills", _frozen(self.skills))
        object.__setattr__(self, "correct", _frozen(self.correct))
        if self.skills.shape != self.correct.shape or self.skills.ndim != 1:
            raise ValueError(
                f"Sequence of student {self.student} has mismatched shapes "
                f"{self.skills.shape} and {self.correct.shape}"
            )

    def __len__(self):
        return int(self.skills.shape[0])

    def __eq__(self, other):
        if not isinstance(other, StudentSequence):
            return NotImplemented
        return (
            self.student == other.student
            and np.array_equal(self.skills, other.skills)
            and np.array_equal(self.correct, other.correct)
        )

    def __hash__(self):
        return hash((self.student, self.skills.tobytes(), self.correct.tobytes()))

    def interactions(self) -> Iterator[Interaction]:
        for order, (skill, correct) in enumerate(zip(self.skills.tolist(), self.correct.tolist())):
            yield Interaction(student=self.student, skill=skill, correct=correct, order=order)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Per-student attempt sequences plus the skill vocabulary.

    Sequences are kept in student-index order and every sequence has at least two attempts.
    `metadata` carries provenance such as synthetic generator parameters or the max-attempt policy applied.
    """
    sequences: tuple[StudentSequence, ...]
    skill_count: int
    skill_names: dict[int, str] = field(default_factory=dict)
    student_names: dict[int, str] = field(default_factory=dict)
    name: str = "dataset"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        if self.skill_count < 1:
            raise ValueError(f"Dataset '{self.name}' needs a positive skill count, got {self.skill_count}")
        for sequence in self.sequences:
            if len(sequence) < 2:
                raise ValueError(f"Student {sequence.student} in '{self.name}' has fewer than two attempts")
            if sequence.skills.min() < 0 or sequence.skills.max() >= self.skill_count:
                raise ValueError(f"Student {sequence.student} in '{self.name}' has a skill outside [0, {self.skill_count})")
            if not np.isin(sequence.correct, (0, 1)).all():
                raise ValueError(f"Student {sequence.student} in '{self.name}' has non-binary correctness")

    def __len__(self):
        return len(self.sequences)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.skill_count == other.skill_count and self.sequences == other.sequences

    def __hash__(self):
        return hash((self.skill_count, self.sequences))

    @property
    def students(self) -> list[int]:
        return [sequence.student for sequence in self.sequences]

    @property
    def attempt_count(self) -> int:
        return sum(len(sequence) for sequence in self.sequences)

    @property
    def correct_count(self) -> int:
        return int(sum(int(sequence.correct.sum()) for sequence in self.sequences))

    @property
    def max_attempts(self) -> int:
        return max((len(sequence) for sequence in self.sequences), default=0)

    def subset(self, students) -> "Dataset":
        """Returns the dataset restricted to the given student indices, keeping the skill vocabulary."""
        wanted = set(students)
        return Dataset(
            sequences=tuple(sequence for sequence in self.sequences if sequence.student in wanted),
            skill_count=self.skill_count,
            skill_names=self.skill_names,
            student_names=self.student_names,
            name=self.name,
            metadata=self.metadata,
        )

    def interactions(self) -> Iterator[Interaction]:
        for sequence in self.sequences:
            yield from sequence.interactions()

    def summary(self) -> dict:
        attempts = self.attempt_count
        correct = self.correct_count
        return {
            "name": self.name,
            "students": len(self.sequences),
            "attempts": attempts,
            "correct": correct,
            "percent_correct": round(100.0 * correct / attempts, 2) if attempts else 0.0,
            "skills": self.skill_count,
            "max_attempts": self.max_attempts,
        }

    def to_dict(self):
        return {
            **self.summary(),
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class PreprocessReport:
    """Counts of what ingestion discarded."""
    rows_read: int
    dropped_missing: int
    dropped_non_binary: int
    dropped_students: int
    dropped_student_attempts: int

    @property
    def dropped_rows(self) -> int:
        return self.dropped_missing + self.dropped_non_binary + self.dropped_student_attempts

    def to_dict(self):
        return {
            "rows_read": self.rows_read,
            "dropped_missing": self.dropped_missing,
            "dropped_non_binary": self.dropped_non_binary,
            "dropped_students": self.dropped_students,
            "dropped_student_attempts": self.dropped_student_attempts,
        }
