from dataclasses import dataclass


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every student to exactly one cross-validation fold."""
    fold_count: int
    assignment: dict[int, int]

    def students_in(self, fold: int) -> list[int]:
        return sorted(student for student, assigned in self.assignment.items() if assigned == fold)

    def students_outside(self, fold: int) -> list[int]:
        return sorted(student for student, assigned in self.assignment.items() if assigned != fold)

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.fold_count
        for assigned in self.assignment.values():
            sizes[assigned] += 1
        return sizes

    def to_dict(self):
        return {
            "fold_count": self.fold_count,
            "fold_sizes": self.fold_sizes(),
            "assignment": {str(student): fold for student, fold in sorted(self.assignment.items())},
        }
