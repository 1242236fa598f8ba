class EmptyDatasetException(Exception):
    """
    Exception raised when no usable attempts remain after preprocessing.
    """
    exit_code = 3

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Dataset '{self.name}' is empty after filtering.")


class DatasetParseException(Exception):
    """
    Exception raised when a raw or canonical dataset file cannot be read.
    `row` is the 1-based data row (header excluded) when it is known.
    """
    exit_code = 3

    def __init__(self, source: str, reason: str, row: int | None = None):
        self.source = source
        self.reason = reason
        self.row = row
        location = f" at row {row}" if row is not None else ""
        super().__init__(f"Could not parse '{source}'{location}: {reason}")


class AttemptOutOfBoundsException(Exception):
    """
    Exception raised when a skill index does not fit the skill vocabulary.
    """
    exit_code = 3

    def __init__(self, skill: int, skill_count: int):
        self.skill = skill
        self.skill_count = skill_count
        super().__init__(f"Skill index {skill} is outside the vocabulary [0, {skill_count}).")
