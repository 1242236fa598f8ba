from dataclasses import dataclass


@dataclass(frozen=True)
class LossCell:
    mean: float
    max: float
    groups: int

    def to_dict(self):
        return {"mean": self.mean, "max": self.max, "groups": self.groups}


@dataclass(frozen=True)
class LossMatrix:
    """
    Score sacrificed on evaluation metric b when configurations are selected by metric a,
    aggregated over (model, dataset) groups. Keyed by (a, b).
    """
    metrics: tuple[str, ...]
    cells: dict[tuple[str, str], LossCell]

    def cell(self, selected_by: str, evaluated_on: str) -> LossCell:
        return self.cells[(selected_by, evaluated_on)]

    def to_dict(self):
        return {
            "metrics": list(self.metrics),
            "cells": [
                {"selected_by": a, "evaluated_on": b, **self.cells[(a, b)].to_dict()}
                for a in self.metrics
                for b in self.metrics
                if (a, b) in self.cells
            ],
        }
