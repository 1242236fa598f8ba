from dataclasses import dataclass
from enum import Enum


class MaxAttemptMode(str, Enum):
    NONE = "none"
    CUT = "cut"
    SPLIT = "split"


@dataclass(frozen=True)
class MaxAttemptPolicy:
    """
    How over-long attempt sequences are treated: kept, truncated (cut) or partitioned into pseudo-students (split).
    Rendered and parsed as `none`, `cut:<limit>` or `split:<limit>`.
    """
    mode: MaxAttemptMode = MaxAttemptMode.NONE
    limit: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", MaxAttemptMode(self.mode))
        if self.mode is MaxAttemptMode.NONE:
            if self.limit is not None:
                raise ValueError("A 'none' max-attempt policy takes no limit")
        elif self.limit is None or self.limit < 2:
            raise ValueError(f"Max-attempt limit must be at least 2, got {self.limit}")

    @staticmethod
    def parse(text: str) -> "MaxAttemptPolicy":
        text = text.strip().lower()
        if text == MaxAttemptMode.NONE.value:
            return MaxAttemptPolicy()
        mode, _, limit = text.partition(":")
        try:
            return MaxAttemptPolicy(MaxAttemptMode(mode), int(limit))
        except ValueError as e:
            raise ValueError(f"Invalid max-attempt policy '{text}': expected none, cut:<limit> or split:<limit> ({e})")

    def __str__(self):
        if self.mode is MaxAttemptMode.NONE:
            return MaxAttemptMode.NONE.value
        return f"{self.mode.value}:{self.limit}"

    def to_dict(self):
        return {"mode": self.mode.value, "limit": self.limit}
