import numpy as np

from application.app.models.batching import make_batches, pad_batch
from domain.dataset import Dataset, StudentSequence


def test_padding_sits_at_the_end():
    """Shorter rows are padded after their last attempt and masked out."""
    batch = pad_batch([StudentSequence(0, [1, 2, 0], [1, 0, 1]), StudentSequence(1, [2, 2], [0, 1])], skill_count=3)

    assert batch.mask.tolist() == [[1, 1, 1], [1, 1, 0]]
    assert batch.target_mask.tolist() == [[1, 1], [1, 0]]
    assert batch.encoded.tolist() == [[3, 4], [4, 5]]
    assert batch.next_skills.tolist() == [[2, 0], [2, 0]]


def test_window_keeps_rows():
    """A window slices attempts of every row."""
    batch = pad_batch([StudentSequence(0, [0, 1, 2, 0], [1, 1, 0, 0])], skill_count=3)

    window = batch.window(1, 3)

    assert window.skills.tolist() == [[1, 2]]
    assert window.target_labels.tolist() == [[0]]


def test_make_batches_covers_every_student_once():
    """Shuffled batches still contain every student exactly once."""
    dataset = Dataset(sequences=tuple(StudentSequence(s, [0, 1], [1, 0]) for s in range(10)), skill_count=2)

    batches = make_batches(dataset, 4, rng=np.random.default_rng(0))

    students = np.concatenate([b.students for b in batches])
    assert sorted(students.tolist()) == list(range(10))
    assert [b.size for b in batches] == [4, 4, 2]
