"""Citizen tendencies and directed trust networks.

Networks are built by preferential attachment: citizens declare links one
at a time, each to ``m`` other citizens chosen with probability proportional
to ``(in_degree + 1) * similarity ** beta``. ``beta`` is the assortativity
exponent; 0 gives plain preferential attachment.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .seeding import derive_seed, make_rng


@dataclass(frozen=True)
class TendencyPopulation:
    x: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or len(x) < 2:
            raise ParameterError("a population needs at least 2 citizens")
        if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
            raise ParameterError("tendencies must lie in [0, 1]")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class NetworkGenParams:
    m: int = 3
    beta: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m!r}")
        if not self.beta >= 0:
            raise ParameterError(f"beta must be >= 0, got {self.beta!r}")


@dataclass(frozen=True)
class TrustNetwork:
    n: int
    edges: np.ndarray        # (E, 2) int array of (source, target)
    raw_weights: np.ndarray  # (E,) similarity weight of each edge
    A: np.ndarray            # (n, n) row-stochastic weight matrix
    params: NetworkGenParams

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.edges[:, 0], minlength=self.n)

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.edges[:, 1], minlength=self.n)

    def edge_rows(self):
        """Yield ``(source, target, raw_weight, normalized_weight)``."""
        for (i, j), w in zip(self.edges, self.raw_weights):
            yield int(i), int(j), float(w), float(self.A[i, j])

    def write_edge_list(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["source", "target", "raw_weight", "normalized_weight"])
            for i, j, w, a in self.edge_rows():
                writer.writerow([i, j, format(w, ".12g"), format(a, ".12g")])


def edge_weight(x_i: float, x_j: float) -> float:
    """Trust weight between two citizens: 1 for identical tendencies, 0 for opposite ones."""
    if not (0.0 <= x_i <= 1.0 and 0.0 <= x_j <= 1.0):
        raise ParameterError(f"tendencies must lie in [0, 1], got ({x_i!r}, {x_j!r})")
    return 1.0 - abs(x_i - x_j)


def generate_tendencies(n: int, seed: int) -> TendencyPopulation:
    if n < 2:
        raise ParameterError(f"a population needs at least 2 citizens, got n={n}")
    rng = make_rng(seed)
    return TendencyPopulation(rng.random(n), seed)


def _choose_targets(rng, weights: np.ndarray, m: int, exclude: int) -> np.ndarray:
    """Draw ``m`` distinct indices with probability proportional to ``weights``.

    If fewer than ``m`` candidates carry positive weight, all of them are
    taken and the remainder is filled uniformly from the zero-weight ones
    other than ``exclude``.
    """
    positive = np.flatnonzero(weights > 0.0)
    if len(positive) >= m:
        return rng.choice(len(weights), size=m, replace=False, p=weights / weights.sum())
    zero = np.flatnonzero(weights <= 0.0)
    zero = zero[zero != exclude]
    fill = rng.choice(zero, size=m - len(positive), replace=False)
    return np.concatenate([positive, fill])


def row_normalize(n: int, edges: np.ndarray, raw: np.ndarray) -> np.ndarray:
    """Dense row-stochastic matrix from an edge list.

    A row whose out-edges all carry zero weight (only possible between
    tendencies exactly 0 and 1) is spread uniformly over those edges.
    """
    A = np.zeros((n, n))
    A[edges[:, 0], edges[:, 1]] = raw
    sums = A.sum(axis=1)
    for i in np.flatnonzero(sums == 0.0):
        targets = edges[edges[:, 0] == i, 1]
        if len(targets) == 0:
            raise ParameterError(f"citizen {i} has no outgoing edge")
        A[i, targets] = 1.0 / len(targets)
    sums = A.sum(axis=1)
    return A / sums[:, None]


def generate_network(pop: TendencyPopulation, params: NetworkGenParams) -> TrustNetwork:
    """Build a directed trust network over ``pop`` by preferential attachment.

    Citizens declare their links one at a time in a seeded random order.
    Each picks ``m`` distinct other citizens, target ``j`` with probability
    proportional to ``(in_degree[j] + 1) * (1 - |x_i - x_j|) ** beta``, where
    ``in_degree`` counts the links declared so far. Any citizen may be a
    target, not only those who declared earlier, so vote power is not funnelled
    toward the first few citizens. Every citizen ends with out-degree ``m``.
    """
    n, m = pop.n, int(params.m)
    if m >= n:
        raise ParameterError(f"m must be smaller than n (m={m}, n={n})")
    rng = make_rng(derive_seed(params.seed, "trustnet"))
    x = pop.x
    in_deg = np.zeros(n)
    sources = np.repeat(rng.permutation(n), m)
    targets = np.empty(n * m, dtype=int)
    for pos in range(0, n * m, m):
        i = sources[pos]
        weights = (in_deg + 1.0) * (1.0 - np.abs(x - x[i])) ** params.beta
        weights[i] = 0.0
        picks = _choose_targets(rng, weights, m, exclude=i)
        targets[pos:pos + m] = picks
        in_deg[picks] += 1.0

    edges = np.column_stack([sources, targets])
    raw = 1.0 - np.abs(x[edges[:, 0]] - x[edges[:, 1]])
    return TrustNetwork(n, edges, raw, row_normalize(n, edges, raw), params)
