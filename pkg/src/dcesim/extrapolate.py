"""Richardson extrapolation of coefficient magnitudes over the mode cutoff.

Runs at cutoffs N, 2N, 4N are combined entrywise under the single-power
model a_N = a_inf + c * N^(-p); the observed order p is estimated from the
successive differences and the limit follows from the finest pair.
Entries whose differences oscillate or grow are flagged non-converged and
fall back to the finest-cutoff value rather than being extrapolated.

Extrapolation always operates on squared magnitudes |alpha|^2, |beta|^2:
phases at different cutoffs are not comparable.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = ["CutoffSeries", "RichardsonResult", "richardson", "pair_series"]


@dataclass
class CutoffSeries:
    """Per-entry real magnitudes at geometrically increasing cutoffs."""

    cutoffs: tuple
    values: np.ndarray  # shape (len(cutoffs), ...) aligned with cutoffs

    def __post_init__(self):
        self.cutoffs = tuple(int(n) for n in self.cutoffs)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.cutoffs) < 3:
            raise InvalidParameterError("need at least 3 cutoffs")
        for a, b in zip(self.cutoffs, self.cutoffs[1:]):
            if b != 2 * a:
                raise InvalidParameterError(
                    f"cutoffs must ascend with ratio 2, got {self.cutoffs}"
                )
        if self.values.shape[0] != len(self.cutoffs):
            raise InvalidParameterError(
                "values first axis must match the number of cutoffs"
            )


@dataclass
class RichardsonResult:
    limit: np.ndarray
    order: np.ndarray
    converged: np.ndarray


def richardson(series):
    """Entrywise limit, observed order, and convergence flag.

    Uses the three finest cutoffs (a1, a2, a3).  With d1 = a1 - a2 and
    d2 = a2 - a3 the order is p = log2(d1/d2) and the limit is
    a3 + (a3 - a2)/(2^p - 1).  Convergence requires same-signed, shrinking
    differences and p > 0.25; a vanishing d2 counts as exact.
    Non-convergence is reported in the flag, never raised.
    """
    a1, a2, a3 = (np.asarray(v, dtype=float) for v in series.values[-3:])
    d1 = a1 - a2
    d2 = a2 - a3
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = d1 / d2
        order = np.where(ratio > 0, np.log2(np.abs(ratio)), np.nan)
        shrink = np.abs(d2) < np.abs(d1)
        same_sign = d1 * d2 > 0
        converged = same_sign & shrink & (order > 0.25)
        correction = d2 / (np.exp2(order) - 1.0)
        limit = np.where(converged, a3 - correction, a3)
    exact = d2 == 0
    order = np.where(exact, math.inf, order)
    converged = converged | exact
    limit = np.where(exact, a3, limit)
    return RichardsonResult(
        limit=limit, order=order, converged=converged.astype(bool)
    )


def pair_series(pairs):
    """Squared-magnitude CutoffSeries from Bogoliubov pairs at rising cutoffs.

    Entries are restricted to the common index range (the smallest cutoff).
    Returns (alpha_series, beta_series).
    """
    pairs = sorted(pairs, key=lambda p: p.n_modes)
    cutoffs = tuple(p.n_modes for p in pairs)
    n = cutoffs[0]
    alpha = np.stack([np.abs(p.alpha[:n, :n]) ** 2 for p in pairs])
    beta = np.stack([np.abs(p.beta[:n, :n]) ** 2 for p in pairs])
    return CutoffSeries(cutoffs, alpha), CutoffSeries(cutoffs, beta)
