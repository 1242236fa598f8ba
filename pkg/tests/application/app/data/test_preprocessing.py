import logging

import numpy as np
import pandas as pd
import pytest

from application.app.data.data_exceptions import AttemptOutOfBoundsException, DatasetParseException, EmptyDatasetException
from application.app.data.preprocessing import apply_max_attempt, encode_attempt, encode_attempts, parse_dataset
from domain.dataset import Dataset, StudentSequence
from domain.max_attempt_policy import MaxAttemptPolicy


def rows(records):
    return pd.DataFrame(records, columns=["student", "skill", "correct"], dtype=str)


@pytest.fixture
def long_dataset():
    """One student with 950 attempts and one with 60."""
    return Dataset(
        sequences=(
            StudentSequence(0, np.arange(950) % 3, np.arange(950) % 2),
            StudentSequence(1, np.zeros(60, dtype=int), np.ones(60, dtype=int)),
        ),
        skill_count=3,
        student_names={0: "long", 1: "short"},
        name="long",
    )


# --- Parsing ---

def test_parse_groups_attempts_per_student_in_order():
    """Attempts are grouped per student and keep their file order."""
    dataset, report = parse_dataset(rows([
        ("s1", "a", "1"), ("s2", "b", "0"), ("s1", "b", "0"), ("s2", "b", "1"), ("s1", "a", "1"),
    ]))

    assert dataset.skill_count == 2
    assert dataset.sequences[0].skills.tolist() == [0, 1, 0]
    assert dataset.sequences[0].correct.tolist() == [1, 0, 1]
    assert dataset.sequences[1].correct.tolist() == [0, 1]
    assert report.dropped_rows == 0


def test_parse_drops_missing_non_binary_and_single_attempt_rows():
    """Rows missing fields, non-binary rows and single-attempt students are dropped and counted."""
    dataset, report = parse_dataset(rows([
        ("s1", "a", "1"), ("s1", "", "1"), ("s1", "b", "0"),
        ("s2", "a", "2"), ("s2", "a", "1"),
        ("s3", "c", "1"),
    ]))

    assert len(dataset) == 1
    assert report.dropped_missing == 1
    assert report.dropped_non_binary == 1
    assert report.dropped_students == 2
    assert report.dropped_student_attempts == 2


def test_labels_remapped_in_natural_order():
    """Numeric labels map numerically so canonical output re-parses to the same indices."""
    dataset, _ = parse_dataset(rows([("10", "10", "1"), ("10", "9", "0"), ("2", "2", "1"), ("2", "10", "1")]))

    assert dataset.student_names == {0: "2", 1: "10"}
    assert dataset.skill_names == {0: "2", 1: "9", 2: "10"}


def test_reparsing_canonical_output_is_identity():
    """Feeding a parsed dataset back through the parser reproduces it exactly and drops nothing."""
    dataset, _ = parse_dataset(rows([
        ("u10", "q7", "1"), ("u2", "q12", "0"), ("u10", "q12", "0"), ("u9", "q1", "1"),
        ("u2", "q7", "1"), ("u10", "", "1"), ("u2", "q1", "1"), ("u9", "q7", "3"), ("u3", "q2", "1"),
    ]))
    canonical = rows([(str(i.student), str(i.skill), str(i.correct)) for i in dataset.interactions()])

    again, report = parse_dataset(canonical)

    assert again == dataset
    assert again.skill_count == dataset.skill_count
    assert report.dropped_missing + report.dropped_non_binary + report.dropped_students == 0


def test_non_numeric_correctness_is_a_parse_error():
    """A correctness value that is not a number names its row."""
    with pytest.raises(DatasetParseException, match="row 2"):
        parse_dataset(rows([("s1", "a", "1"), ("s1", "a", "yes")]))


def test_missing_column_is_a_parse_error():
    """The three canonical columns are required."""
    with pytest.raises(DatasetParseException, match="missing required column"):
        parse_dataset(pd.DataFrame({"student": ["a"], "skill": ["b"]}))


def test_nothing_left_is_an_empty_dataset():
    """A file where every student has one attempt leaves nothing."""
    with pytest.raises(EmptyDatasetException):
        parse_dataset(rows([("s1", "a", "1"), ("s2", "a", "0")]))


def test_parse_logs_drop_counts(caplog):
    """The ingestion log reports what was discarded."""
    with caplog.at_level(logging.INFO):
        parse_dataset(rows([("s1", "a", "1"), ("s1", "a", "0"), ("s2", "a", "1")]), name="logged")

    assert "1 single-attempt students" in caplog.text


# --- Attempt encoding ---

def test_encode_attempt_interleaves_correctness():
    """Attempt code is 2 * skill + correct."""
    assert encode_attempt(3, 1, 5) == 7
    assert encode_attempts(np.array([0, 4]), np.array([0, 1]), 5).tolist() == [0, 9]


def test_encode_attempt_out_of_vocabulary():
    """Skills outside [0, S) are rejected."""
    with pytest.raises(AttemptOutOfBoundsException):
        encode_attempt(5, 0, 5)
    with pytest.raises(AttemptOutOfBoundsException):
        encode_attempts(np.array([1, -1]), np.array([0, 0]), 5)


# --- Max-attempt policies ---

def test_split_950_attempts_into_ten_sequences(long_dataset):
    """950 attempts split by 100 give nine full pieces and one of 50."""
    split = apply_max_attempt(long_dataset, MaxAttemptPolicy.parse("split:100"))
    lengths = [len(s) for s in split.sequences]

    assert lengths[:10] == [100] * 9 + [50]
    assert lengths[10] == 60
    assert split.students == list(range(11))
    assert split.metadata["origins"][9] == (0, 900)
    assert split.student_names[9] == "long#9"


def test_cut_keeps_first_attempts(long_dataset):
    """cut:100 keeps only the first 100 attempts."""
    cut = apply_max_attempt(long_dataset, MaxAttemptPolicy.parse("cut:100"))

    assert [len(s) for s in cut.sequences] == [100, 60]
    assert np.array_equal(cut.sequences[0].skills, long_dataset.sequences[0].skills[:100])


def test_split_discards_single_attempt_remainder():
    """A trailing piece of one attempt is not a sequence."""
    dataset = Dataset(sequences=(StudentSequence(0, [0] * 5, [1] * 5),), skill_count=1)

    split = apply_max_attempt(dataset, MaxAttemptPolicy.parse("split:2"))

    assert [len(s) for s in split.sequences] == [2, 2]


def test_none_policy_is_identity(long_dataset):
    """The none policy returns the dataset unchanged."""
    assert apply_max_attempt(long_dataset, MaxAttemptPolicy()) is long_dataset


def test_split_logs_derived_sequences(long_dataset, caplog):
    """The log reports how many derived sequences the split produced."""
    with caplog.at_level(logging.INFO):
        apply_max_attempt(long_dataset, MaxAttemptPolicy.parse("split:100"))

    assert "split into 10 derived sequences" in caplog.text


def test_split_pieces_concatenate_back_to_the_original():
    """Joining the pieces of every student in offset order restores the sequence."""
    rng = np.random.default_rng(0)
    for _ in range(50):
        limit = int(rng.integers(2, 12))
        lengths = [int(n) for n in rng.integers(2, 60, size=int(rng.integers(1, 8)))]
        dataset = Dataset(
            sequences=tuple(
                StudentSequence(s, rng.integers(0, 4, size=n), rng.integers(0, 2, size=n))
                for s, n in enumerate(lengths)
            ),
            skill_count=4,
        )

        split = apply_max_attempt(dataset, MaxAttemptPolicy.parse(f"split:{limit}"))

        origins = split.metadata["origins"]
        for original in dataset.sequences:
            pieces = sorted(
                (start, piece) for piece, (student, start) in zip(split.sequences, origins)
                if student == original.student
            )
            kept = len(original) - 1 if len(original) % limit == 1 else len(original)
            assert np.array_equal(np.concatenate([piece.skills for _, piece in pieces]), original.skills[:kept])
            assert np.array_equal(np.concatenate([piece.correct for _, piece in pieces]), original.correct[:kept])
