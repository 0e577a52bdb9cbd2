"""Teacher feedback and reward-signal utilities.

The teacher is the only component that looks at ground-truth labels. It
grades a reproduction attempt with +1 when the executed pattern belongs to
the same true concept as the demonstration, else -1, and counts how many
times it was queried (the interaction cost of a run).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import ProcessedDemo
from .memory import MemEntry

REWARD_CORRECT = 1
REWARD_WRONG = -1
SMOOTH_WINDOW = 7


@dataclass
class TeacherOracle:
    """Grades attempts against demonstration provenance."""

    queries: int = field(default=0)

    def feedback(self, demo: ProcessedDemo, executed: MemEntry) -> int:
        self.queries += 1
        if executed.true_concept == demo.concept_label:
            return REWARD_CORRECT
        return REWARD_WRONG


def smoothed_signal(values, window: int = SMOOTH_WINDOW) -> np.ndarray:
    """Backward moving average with a truncated start.

    Element t averages the last ``window`` values up to and including t;
    the first window-1 elements average whatever prefix exists.
    """
    values = np.asarray(values, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    out = np.empty_like(values)
    csum = np.concatenate([[0.0], np.cumsum(values)])
    for t in range(len(values)):
        lo = max(0, t - window + 1)
        out[t] = (csum[t + 1] - csum[lo]) / (t + 1 - lo)
    return out
