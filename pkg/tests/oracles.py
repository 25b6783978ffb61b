"""Independent reference computations used only by the tests."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def outcome_counts(n: int) -> np.ndarray:
    """Enumerate all 2**n vote patterns; return how many have k correct voters, k = 0..n."""
    counts = np.zeros(n + 1, dtype=np.int64)
    chunk = 1 << 20
    for start in range(0, 1 << n, chunk):
        patterns = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint32)
        counts += np.bincount(np.bitwise_count(patterns), minlength=n + 1)[: n + 1]
    return counts


def enumerated_majority(n: int, p: float) -> float:
    """Majority-correct probability by summing over every vote pattern (fair coin on ties)."""
    counts = outcome_counts(n)
    k = np.arange(n + 1)
    pattern_prob = p ** k * (1.0 - p) ** (n - k)
    weight = np.where(2 * k > n, 1.0, np.where(2 * k == n, 0.5, 0.0))
    return float(np.sum(counts * pattern_prob * weight))


def monte_carlo_majority(n: int, p: float, trials: int, seed: int) -> tuple[float, float]:
    """Simulate ``trials`` juries voter by voter; return (estimate, standard error)."""
    rng = np.random.default_rng(seed)
    wins = 0
    chunk = 50_000
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        correct = (rng.random((size, n)) < p).sum(axis=1)
        wins += int(np.count_nonzero(2 * correct > n))
    est = wins / trials
    return est, float(np.sqrt(est * (1 - est) / trials))


def power_iteration_absorption(A: np.ndarray, active: np.ndarray, steps: int = 200_000, tol: float = 1e-15) -> np.ndarray:
    """Absorbed vote power by plain repeated flow, with no early stopping rule."""
    n = len(active)
    pi = np.full(n, 1.0 / n)
    y = np.zeros(n)
    for _ in range(steps):
        y += pi * active
        pi = (pi * (1 - active)) @ A
        if pi.sum() < tol:
            break
    return y
