from dataclasses import dataclass
from typing import Callable

import numpy as np

from application.app.engine.param_store import ParamStore
from application.app.engine.tensor import Tensor, backward, no_grad

FINITE_DIFFERENCE_STEP = 1e-5
RELATIVE_ERROR_FLOOR = 1e-6


def relative_error(analytic, numeric) -> np.ndarray:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_ERROR_FLOOR)
    return np.abs(analytic - numeric) / scale


@dataclass
class GradientCheckResult:
    """Per-parameter relative errors of the checked entries."""
    errors: dict[str, np.ndarray]

    @property
    def worst(self) -> float:
        return max((float(e.max()) for e in self.errors.values() if e.size), default=0.0)

    def fraction_below(self, tolerance: float) -> float:
        flat = np.concatenate([e.ravel() for e in self.errors.values()]) if self.errors else np.zeros(0)
        return float((flat < tolerance).mean()) if flat.size else 1.0

    def to_dict(self):
        return {name: float(e.max()) if e.size else 0.0 for name, e in self.errors.items()}


def gradient_check(
    store: ParamStore,
    loss_fn: Callable[[], Tensor],
    names: list[str] | None = None,
    step: float = FINITE_DIFFERENCE_STEP,
    max_entries: int | None = None,
    seed: int = 0,
) -> GradientCheckResult:
    """
    Compares backward() gradients of `loss_fn` with central finite differences.
    `loss_fn` must be deterministic (no dropout). With `max_entries`, a seeded sample of entries is checked per
    parameter.
    """
    store.zero_grad()
    backward(loss_fn())
    analytic = store.gradients()
    rng = np.random.default_rng(seed)

    errors = {}
    for name in names or store.names():
        values = store[name].data
        flat_count = values.size
        entries = np.arange(flat_count)
        if max_entries is not None and flat_count > max_entries:
            entries = np.sort(rng.choice(flat_count, size=max_entries, replace=False))
        numeric = np.empty(len(entries))
        for position, entry in enumerate(entries):
            index = np.unravel_index(entry, values.shape)
            original = values[index]
            with no_grad():
                values[index] = original + step
                plus = loss_fn().item()
                values[index] = original - step
                minus = loss_fn().item()
            values[index] = original
            numeric[position] = (plus - minus) / (2.0 * step)
        errors[name] = relative_error(analytic[name].ravel()[entries], numeric)
    store.zero_grad()
    return GradientCheckResult(errors)
