from dataclasses import dataclass

import pandas as pd

from application.app.config.config_loader import ConfigLoader
from application.app.data.data_exceptions import DatasetParseException

MAPPING_KEYS = ("student", "skill", "correct", "delimiter", "name")


@dataclass(frozen=True)
class ColumnMapping:
    """
    Which raw columns hold the student id, skill id and correctness of an export.
    A Statics-style dataset that uses the exercise id as skill id just maps `skill` to the exercise column.
    """
    student: str = "student"
    skill: str = "skill"
    correct: str = "correct"
    delimiter: str = ","
    name: str | None = None

    @staticmethod
    def from_config(path: str) -> "ColumnMapping":
        values = ConfigLoader.read(path, MAPPING_KEYS, subdirectory="mappings")
        if values.get("delimiter") in ("\\t", "tab"):
            values["delimiter"] = "\t"
        return ColumnMapping(**values)

    def apply(self, raw: pd.DataFrame, source: str) -> pd.DataFrame:
        """Selects the three mapped columns and renames them to `student`, `skill`, `correct`."""
        columns = {self.student: "student", self.skill: "skill", self.correct: "correct"}
        absent = [column for column in columns if column not in raw.columns]
        if absent:
            raise DatasetParseException(
                source,
                f"mapped column(s) {', '.join(absent)} not in header ({', '.join(map(str, raw.columns))})",
            )
        return raw.loc[:, list(columns)].rename(columns=columns)

    def to_dict(self):
        return {
            "student": self.student,
            "skill": self.skill,
            "correct": self.correct,
            "delimiter": self.delimiter,
            "name": self.name,
        }
