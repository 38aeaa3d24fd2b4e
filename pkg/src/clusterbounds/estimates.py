"""Small statistics helpers shared by the Monte Carlo paths."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

JACKKNIFE_BLOCKS = 50


@dataclass(frozen=True)
class Estimate:
    value: complex
    stderr: float
    method: str
    samples: int = 0

    def agrees_with(self, other: "Estimate | complex", nsigma: float = 3.0, floor: float = 0.0) -> bool:
        if isinstance(other, Estimate):
            err = np.hypot(self.stderr, other.stderr)
            diff = abs(self.value - other.value)
        else:
            err = self.stderr
            diff = abs(self.value - other)
        return diff <= nsigma * err + floor


def jackknife(f: Callable[..., complex], columns: Sequence[np.ndarray],
              blocks: int = JACKKNIFE_BLOCKS) -> tuple[complex, float]:
    """Value and jackknife standard error of f(means of columns).

    ``columns`` are arrays whose first axis runs over samples; f receives the
    column means (same order) and returns a scalar.
    """
    n = len(columns[0])
    blocks = min(blocks, n)
    edges = np.linspace(0, n, blocks + 1).astype(int)
    sums = [np.stack([c[edges[b]:edges[b + 1]].sum(axis=0) for b in range(blocks)]) for c in columns]
    counts = np.diff(edges)
    totals = [s.sum(axis=0) for s in sums]
    full = f(*[t / n for t in totals])
    loo = np.array([f(*[(t - s[b]) / (n - counts[b]) for t, s in zip(totals, sums)])
                    for b in range(blocks)])
    mean_loo = loo.mean()
    err = np.sqrt((blocks - 1) / blocks * np.sum(np.abs(loo - mean_loo) ** 2))
    return complex(full), float(err)
