"""Photon counting: multinomial sampling of the diagonal and its errors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalSanityError
from .fock_core import DensityMatrix
from .homodyne import MeasuredElement


@dataclass
class CountHistogram:
    """Observed photon-number counts, one bin per Fock index."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 1 or np.any(self.counts < 0):
            raise ValueError("counts must be a 1-d array of nonnegative integers")

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())

    @property
    def dim(self) -> int:
        return self.counts.size


def sample_counts(rho: DensityMatrix, n: int, rng: np.random.Generator) -> CountHistogram:
    """Draw ``n`` ideal photon-number measurements of ``rho``.

    The diagonal must account for all probability up to the state's
    declared truncation tail; otherwise the histogram would silently
    misrepresent the distribution.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    probs = rho.diagonal().copy()
    missing = 1.0 - probs.sum()
    if missing > rho.tail_bound + 1e-9:
        raise NumericalSanityError(
            f"diagonal sums to {probs.sum():.12g} but tail bound is "
            f"{rho.tail_bound:.3g}; cannot sample a proper distribution")
    probs = np.clip(probs, 0.0, None)
    return CountHistogram(counts=rng.multinomial(n, probs / probs.sum()))


def estimate_probabilities(hist: CountHistogram) -> list[MeasuredElement]:
    """Binomial point estimates and errors for every diagonal element.

    Bins with observed frequency exactly 0 or 1 get ``degenerate=True``:
    the plug-in error formula returns zero there, which is a floor, not
    an estimate.
    """
    n = hist.n_samples
    if n < 1:
        raise ValueError("empty histogram")
    p_hat = hist.counts / n
    err = np.sqrt(p_hat * (1.0 - p_hat) / n)
    return [
        MeasuredElement(
            n=k, d=0, estimate=complex(p_hat[k]), stderr=float(err[k]),
            n_samples=n, degenerate=bool(p_hat[k] in (0.0, 1.0)))
        for k in range(hist.dim)
    ]
