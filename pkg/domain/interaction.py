from dataclasses import dataclass


@dataclass(frozen=True)
class Interaction:
    """One student attempt at a skill."""
    student: int
    skill: int
    correct: int
    order: int

    def __post_init__(self):
        if self.correct not in (0, 1):
            raise ValueError(f"Correctness must be 0 or 1, got {self.correct}")
        if self.skill < 0 or self.order < 0:
            raise ValueError(f"Skill and order must be non-negative, got skill={self.skill}, order={self.order}")

    def to_dict(self):
        return {
            "student": self.student,
            "skill": self.skill,
            "correct": self.correct,
            "order": self.order,
        }
