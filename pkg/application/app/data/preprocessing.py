import logging

import numpy as np
import pandas as pd

from application.app.data.data_exceptions import AttemptOutOfBoundsException, DatasetParseException, EmptyDatasetException
from domain.dataset import Dataset, PreprocessReport, StudentSequence
from domain.max_attempt_policy import MaxAttemptMode, MaxAttemptPolicy

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("student", "skill", "correct")


def _natural_key(label: str):
    # Integer-like labels sort numerically so canonical files re-parse to the same indices.
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


def parse_dataset(rows: pd.DataFrame, name: str = "dataset") -> tuple[Dataset, PreprocessReport]:
    """
    Turns raw attempt records into a Dataset.

    `rows` must have `student`, `skill` and `correct` columns (see ColumnMapping for renaming exports).
    Rows missing any of the three fields are dropped, then rows whose correctness is not exactly 0 or 1,
    then students left with a single attempt. Labels are remapped to dense 0-based indices in natural
    label order; each student's attempts keep the input row order.

    Raises:
        DatasetParseException: a required column is absent or a correctness value is not numeric.
        EmptyDatasetException: nothing survives the filters.
    """
    absent = [column for column in REQUIRED_COLUMNS if column not in rows.columns]
    if absent:
        raise DatasetParseException(name, f"missing required column(s): {', '.join(absent)}")

    frame = rows.loc[:, list(REQUIRED_COLUMNS)].copy()
    rows_read = len(frame)
    for column in REQUIRED_COLUMNS:
        frame[column] = frame[column].astype("string").str.strip()

    missing = frame.isna().any(axis=1) | (frame == "").any(axis=1)
    frame = frame[~missing]

    correctness = pd.to_numeric(frame["correct"], errors="coerce")
    unparseable = correctness.isna()
    if unparseable.any():
        position = int(np.flatnonzero(unparseable.to_numpy())[0])
        label = frame.index[position]
        row = int(label) + 1 if isinstance(label, (int, np.integer)) else None
        raise DatasetParseException(name, f"correctness value '{frame['correct'].iloc[position]}' is not numeric", row=row)

    binary = correctness.isin((0, 1))
    frame = frame[binary].assign(correct=correctness[binary].astype(np.int64))

    attempts_per_student = frame.groupby("student", sort=False)["student"].transform("size")
    single = attempts_per_student <= 1
    dropped_students = int(frame.loc[single, "student"].nunique())
    frame = frame[~single]

    report = PreprocessReport(
        rows_read=rows_read,
        dropped_missing=int(missing.sum()),
        dropped_non_binary=int((~binary).sum()),
        dropped_students=dropped_students,
        dropped_student_attempts=int(single.sum()),
    )
    if frame.empty:
        raise EmptyDatasetException(name)

    student_labels = sorted(frame["student"].unique(), key=_natural_key)
    skill_labels = sorted(frame["skill"].unique(), key=_natural_key)
    student_index = {label: index for index, label in enumerate(student_labels)}
    skill_index = {label: index for index, label in enumerate(skill_labels)}

    students = frame["student"].map(student_index).to_numpy(dtype=np.int64)
    skills = frame["skill"].map(skill_index).to_numpy(dtype=np.int64)
    correct = frame["correct"].to_numpy(dtype=np.int64)
    order = np.argsort(students, kind="stable")
    boundaries = np.flatnonzero(np.diff(students[order])) + 1

    sequences = []
    for chunk in np.split(order, boundaries):
        sequences.append(StudentSequence(student=int(students[chunk[0]]), skills=skills[chunk], correct=correct[chunk]))

    dataset = Dataset(
        sequences=tuple(sequences),
        skill_count=len(skill_labels),
        skill_names={index: str(label) for label, index in skill_index.items()},
        student_names={index: str(label) for label, index in student_index.items()},
        name=name,
    )
    logger.info(
        f"Dataset '{name}' parsed: {len(dataset)} students, {dataset.attempt_count} attempts, "
        f"{dataset.skill_count} skills; dropped {report.dropped_missing} rows with missing fields, "
        f"{report.dropped_non_binary} non-binary rows, {report.dropped_students} single-attempt students."
    )
    return dataset, report


def encode_attempt(skill: int, correct: int, skill_count: int) -> int:
    """Combines a (skill, correctness) pair into the attempt code 2*skill + correct."""
    if not 0 <= skill < skill_count:
        raise AttemptOutOfBoundsException(skill, skill_count)
    if correct not in (0, 1):
        raise ValueError(f"Correctness must be 0 or 1, got {correct}")
    return 2 * skill + correct


def encode_attempts(skills: np.ndarray, correct: np.ndarray, skill_count: int) -> np.ndarray:
    """Vectorised encode_attempt."""
    skills = np.asarray(skills, dtype=np.int64)
    if skills.size and (skills.min() < 0 or skills.max() >= skill_count):
        bad = int(skills[(skills < 0) | (skills >= skill_count)][0])
        raise AttemptOutOfBoundsException(bad, skill_count)
    return 2 * skills + np.asarray(correct, dtype=np.int64)


def apply_max_attempt(dataset: Dataset, policy: MaxAttemptPolicy) -> Dataset:
    """
    Applies a max-attempt policy.

    cut keeps each student's first `limit` attempts. split partitions each sequence, in order, into
    consecutive pseudo-students of `limit` attempts (the last one takes the remainder); pseudo-students are
    renumbered densely and pieces of a single attempt are discarded. The origin of every pseudo-student
    (original student index, offset of its first attempt) is kept in `metadata["origins"]`.
    """
    if policy.mode is MaxAttemptMode.NONE:
        return dataset

    limit = policy.limit
    over_limit = sum(1 for sequence in dataset.sequences if len(sequence) > limit)

    if policy.mode is MaxAttemptMode.CUT:
        sequences = tuple(
            StudentSequence(sequence.student, sequence.skills[:limit], sequence.correct[:limit])
            for sequence in dataset.sequences
        )
        logger.info(f"Max-attempt {policy} on '{dataset.name}': {over_limit} students truncated.")
        return Dataset(
            sequences=sequences,
            skill_count=dataset.skill_count,
            skill_names=dataset.skill_names,
            student_names=dataset.student_names,
            name=dataset.name,
            metadata={**dataset.metadata, "max_attempt": str(policy)},
        )

    sequences = []
    origins = []
    student_names = {}
    derived = 0
    for sequence in dataset.sequences:
        for part, start in enumerate(range(0, len(sequence), limit)):
            skills = sequence.skills[start:start + limit]
            if len(skills) < 2:
                continue
            index = len(sequences)
            sequences.append(StudentSequence(index, skills, sequence.correct[start:start + limit]))
            origins.append((sequence.student, start))
            original_name = dataset.student_names.get(sequence.student, str(sequence.student))
            student_names[index] = original_name if len(sequence) <= limit else f"{original_name}#{part}"
            if len(sequence) > limit:
                derived += 1

    logger.info(
        f"Max-attempt {policy} on '{dataset.name}': {over_limit} students exceeded the limit and were split "
        f"into {derived} derived sequences; {len(sequences)} sequences in total."
    )
    if not sequences:
        raise EmptyDatasetException(dataset.name)
    return Dataset(
        sequences=tuple(sequences),
        skill_count=dataset.skill_count,
        skill_names=dataset.skill_names,
        student_names=student_names,
        name=dataset.name,
        metadata={**dataset.metadata, "max_attempt": str(policy), "origins": origins},
    )
