"""Majority-vote correctness for n independent voters (jury theorem model).

Each of ``n`` voters independently picks the better of two options with
probability ``p``; :func:`majority_probability` returns the chance that the
majority picks it. :func:`condorcet_surface` tabulates that over a (p, n) grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError

# Above this n the binomial terms are summed in log space.
LOG_SPACE_THRESHOLD = 1000


class TieRule(enum.Enum):
    FAIR_COIN = "fair-coin"
    ODD_ONLY = "odd-only"


@dataclass(frozen=True)
class JuryParams:
    n: int
    p: float
    tie_rule: TieRule = TieRule.FAIR_COIN

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 <= self.p <= 1.0):
            raise ParameterError(f"p must lie in [0, 1], got {self.p!r}")
        if self.tie_rule is TieRule.ODD_ONLY and self.n % 2 == 0:
            raise ParameterError(f"tie rule odd-only rejects even n={self.n}")


def _relative_terms(n: int, p: float) -> np.ndarray:
    """Binomial pmf over k = 0..n, up to a common positive factor.

    Starts at the mode with value 1 and walks outward through the ratio
    t(k+1)/t(k); the largest term is 1, so nothing overflows and only
    terms negligible against the mode underflow.
    """
    q = 1.0 - p
    mode = min(int(math.floor((n + 1) * p)), n)
    terms = np.zeros(n + 1)
    terms[mode] = 1.0
    up = p / q
    for k in range(mode, n):
        terms[k + 1] = terms[k] * (n - k) / (k + 1) * up
    down = q / p
    for k in range(mode, 0, -1):
        terms[k - 1] = terms[k] * k / (n - k + 1) * down
    return terms


def _log_terms(n: int, p: float) -> np.ndarray:
    k = np.arange(n + 1, dtype=float)
    logs = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) + k * math.log(p) + (n - k) * math.log1p(-p)
    return np.exp(logs - logs.max())


def majority_probability(params: JuryParams) -> float:
    """Probability that a strict majority of ``params.n`` voters is correct.

    For even ``n`` under :attr:`TieRule.FAIR_COIN` a tie is settled by a fair
    coin, so half of the tie probability is added.
    """
    n, p = int(params.n), float(params.p)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    if n == 1:
        return p
    terms = _log_terms(n, p) if n > LOG_SPACE_THRESHOLD else _relative_terms(n, p)
    half = n // 2
    if n % 2:
        win = terms[half + 1:].sum()
        lose = terms[:half + 1].sum()
    else:
        tie = 0.5 * terms[half]
        win = terms[half + 1:].sum() + tie
        lose = terms[:half].sum() + tie
    # dividing by the full sum removes the common factor
    return float(win / (win + lose))


def jury_probability(n: int, p: float, tie_rule: TieRule = TieRule.FAIR_COIN) -> float:
    return majority_probability(JuryParams(n, p, tie_rule))


@dataclass(frozen=True)
class SurfaceGrid:
    p_min: float
    p_max: float
    p_step: float
    n_min: int
    n_max: int
    tie_rule: TieRule
    p_values: np.ndarray
    n_values: np.ndarray
    cells: np.ndarray  # shape (len(p_values), len(n_values))

    def rows(self):
        """Yield ``(p, n, probability)`` in p-major order."""
        for i, p in enumerate(self.p_values):
            for j, n in enumerate(self.n_values):
                yield float(p), int(n), float(self.cells[i, j])


def probability_grid(p_min: float, p_max: float, p_step: float) -> np.ndarray:
    if not p_step > 0:
        raise ParameterError(f"p_step must be positive, got {p_step!r}")
    if not (0.0 <= p_min <= p_max <= 1.0):
        raise ParameterError(f"need 0 <= p_min <= p_max <= 1, got [{p_min}, {p_max}]")
    count = int(math.floor((p_max - p_min) / p_step + 1e-9)) + 1
    # rounding keeps 0.07 as 0.07 rather than 0.07000000000000001
    values = np.round(p_min + p_step * np.arange(count), 12)
    return np.clip(values, 0.0, 1.0)


def condorcet_surface(
    p_min: float = 0.0,
    p_max: float = 1.0,
    p_step: float = 0.01,
    n_min: int = 1,
    n_max: int = 100,
    tie_rule: TieRule = TieRule.FAIR_COIN,
) -> SurfaceGrid:
    """Tabulate :func:`majority_probability` on a (p, n) grid.

    Under :attr:`TieRule.ODD_ONLY` only the odd ``n`` in range are included.
    """
    if n_min < 1 or n_max < n_min:
        raise ParameterError(f"need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")
    p_values = probability_grid(p_min, p_max, p_step)
    n_values = np.arange(n_min, n_max + 1)
    if tie_rule is TieRule.ODD_ONLY:
        n_values = n_values[n_values % 2 == 1]
    if len(p_values) == 0 or len(n_values) == 0:
        raise ParameterError("empty grid")
    cells = np.empty((len(p_values), len(n_values)))
    for i, p in enumerate(p_values):
        for j, n in enumerate(n_values):
            cells[i, j] = majority_probability(JuryParams(int(n), float(p), tie_rule))
    return SurfaceGrid(p_min, p_max, p_step, n_min, n_max, tie_rule, p_values, n_values, cells)
