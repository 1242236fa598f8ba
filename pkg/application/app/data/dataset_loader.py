import hashlib
import json
import logging
import os
import re

import numpy as np
import pandas as pd

from application.app.data.column_mapping import ColumnMapping
from application.app.data.data_exceptions import DatasetParseException
from application.app.data.preprocessing import parse_dataset
from domain.dataset import Dataset, PreprocessReport, StudentSequence

logger = logging.getLogger(__name__)

DATASET_FILE = "dataset.csv"
VOCABULARY_FILE = "vocabulary.json"
SUMMARY_FILE = "summary.json"
METADATA_FILE = "metadata.json"


class DatasetLoader:
    """
    Reads raw exports and reads/writes the canonical preprocessed dataset directory:

        dataset.csv      one attempt per line: student,skill,correct (internal indices, sequence order)
        vocabulary.json  {"skills": {index: label}, "students": {index: label}}
        summary.json     students, attempts, correct, percent correct, skills, max attempts (+ drop counts)
        metadata.json    provenance (generator parameters, applied policies)
    """

    @staticmethod
    def load_raw(path: str, mapping: ColumnMapping | None = None) -> tuple[Dataset, PreprocessReport]:
        mapping = mapping or ColumnMapping()
        name = mapping.name or os.path.splitext(os.path.basename(path))[0]
        logger.info(f"Reading raw attempts from '{path}' with mapping {mapping.to_dict()}")
        raw = DatasetLoader._read_table(path, mapping.delimiter)
        return parse_dataset(mapping.apply(raw, path), name=name)

    @staticmethod
    def _read_table(path: str, delimiter: str) -> pd.DataFrame:
        if not os.path.exists(path):
            raise DatasetParseException(path, "file not found")
        try:
            return pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False, skipinitialspace=True)
        except pd.errors.EmptyDataError:
            raise DatasetParseException(path, "file is empty")
        except pd.errors.ParserError as e:
            match = re.search(r"line (\d+)", str(e))
            # pandas counts the header as line 1
            row = int(match.group(1)) - 1 if match else None
            raise DatasetParseException(path, str(e).strip(), row=row)
        except UnicodeDecodeError as e:
            raise DatasetParseException(path, f"not valid text: {e}")

    @staticmethod
    def save(dataset: Dataset, directory: str, report: PreprocessReport | None = None) -> str:
        """Writes the canonical directory and returns the dataset digest."""
        os.makedirs(directory, exist_ok=True)
        frame = pd.DataFrame({
            "student": np.concatenate([np.full(len(s), s.student, dtype=np.int64) for s in dataset.sequences]),
            "skill": np.concatenate([s.skills for s in dataset.sequences]),
            "correct": np.concatenate([s.correct for s in dataset.sequences]),
        })
        frame.to_csv(os.path.join(directory, DATASET_FILE), index=False, lineterminator="\n")

        vocabulary = {
            "name": dataset.name,
            "skill_count": dataset.skill_count,
            "skills": {str(index): label for index, label in sorted(dataset.skill_names.items())},
            "students": {str(index): label for index, label in sorted(dataset.student_names.items())},
        }
        summary = dataset.summary()
        if report is not None:
            summary["preprocessing"] = report.to_dict()
        _write_json(os.path.join(directory, VOCABULARY_FILE), vocabulary)
        _write_json(os.path.join(directory, SUMMARY_FILE), summary)
        _write_json(os.path.join(directory, METADATA_FILE), dataset.metadata)
        digest = DatasetLoader.digest(directory)
        logger.info(f"Dataset '{dataset.name}' written to '{directory}' ({summary['students']} students, digest {digest[:12]})")
        return digest

    @staticmethod
    def load(directory: str) -> Dataset:
        """Reads a canonical dataset directory written by `save`."""
        path = os.path.join(directory, DATASET_FILE)
        frame = DatasetLoader._read_table(path, ",")
        if list(frame.columns) != ["student", "skill", "correct"]:
            raise DatasetParseException(path, f"expected header student,skill,correct, got {','.join(frame.columns)}")
        try:
            values = frame.astype(np.int64)
        except ValueError as e:
            raise DatasetParseException(path, f"non-integer value ({e})")

        vocabulary = _read_json(os.path.join(directory, VOCABULARY_FILE), default={})
        metadata = _read_json(os.path.join(directory, METADATA_FILE), default={})
        skill_count = int(vocabulary.get("skill_count", values["skill"].max() + 1))

        students = values["student"].to_numpy()
        skills = values["skill"].to_numpy()
        correct = values["correct"].to_numpy()
        order = np.argsort(students, kind="stable")
        boundaries = np.flatnonzero(np.diff(students[order])) + 1
        try:
            dataset = Dataset(
                sequences=tuple(
                    StudentSequence(int(students[chunk[0]]), skills[chunk], correct[chunk])
                    for chunk in np.split(order, boundaries)
                ),
                skill_count=skill_count,
                skill_names={int(k): v for k, v in vocabulary.get("skills", {}).items()},
                student_names={int(k): v for k, v in vocabulary.get("students", {}).items()},
                name=vocabulary.get("name", os.path.basename(os.path.normpath(directory))),
                metadata=metadata,
            )
        except ValueError as e:
            raise DatasetParseException(path, str(e))
        logger.info(f"Dataset '{dataset.name}' loaded from '{directory}': {len(dataset)} students, {dataset.attempt_count} attempts")
        return dataset

    @staticmethod
    def digest(directory: str) -> str:
        """SHA-256 of the canonical attempt file."""
        with open(os.path.join(directory, DATASET_FILE), "rb") as file:
            return hashlib.sha256(file.read()).hexdigest()


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as file:
        json.dump(payload, file, indent=2, sort_keys=True)
        file.write("\n")


def _read_json(path: str, default):
    if not os.path.exists(path):
        return default
    try:
        with open(path, "r", encoding="utf-8") as file:
            return json.load(file)
    except json.JSONDecodeError as e:
        raise DatasetParseException(path, f"invalid JSON: {e}")
