"""Sequential decision markets over a d-dimensional knowledge space.

Citizens hold knowledge points in [0, 1]^d. The market starts at the origin
and the environment (the truth) is the all-ones corner. Citizens act once
each, in random order, overwriting one market coordinate with their own
knowledge in that dimension:

* incentive-free: the dimension is uniform at random and the write always
  happens;
* incentive: the citizen uses their strongest dimension and writes only
  with probability equal to their knowledge there.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .seeding import derive_seed, make_rng


class DistanceVariant(enum.Enum):
    ROOT_NORMALIZED = "root-normalized"  # sqrt(sum (e - m)^2) / sqrt(d)
    MEAN_SQUARED = "mean-squared"        # sum (e - m)^2 / d


@dataclass(frozen=True)
class KnowledgeMatrix:
    c: np.ndarray  # (n, d)
    p: float
    seed: int | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ParameterError(f"knowledge must be a non-empty n x d matrix, got shape {c.shape}")
        if np.any(c < 0.0) or np.any(c > 1.0):
            raise ParameterError("knowledge entries must lie in [0, 1]")
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def d(self) -> int:
        return self.c.shape[1]


@dataclass(frozen=True)
class MarketState:
    m: np.ndarray
    citizens: np.ndarray      # acting citizen, in action order
    dims: np.ndarray          # dimension each one chose
    values: np.ndarray        # knowledge value offered
    participated: np.ndarray  # whether the write happened

    @property
    def log(self) -> list[tuple[int, int, float, bool]]:
        return [
            (int(i), int(j), float(v), bool(ok))
            for i, j, v, ok in zip(self.citizens, self.dims, self.values, self.participated)
        ]

    @property
    def written(self) -> np.ndarray:
        """Dimensions that received at least one write."""
        mask = np.zeros(len(self.m), dtype=bool)
        mask[self.dims[self.participated]] = True
        return mask


def environment(d: int) -> np.ndarray:
    if d < 1:
        raise ParameterError(f"d must be positive, got {d}")
    return np.ones(d)


def generate_knowledge(n: int, d: int, p: float, seed: int) -> KnowledgeMatrix:
    """Entries ~ Normal(p, sd = p (1 - p)), clamped to [0, 1]."""
    if n < 1 or d < 1:
        raise ParameterError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    rng = make_rng(seed)
    c = rng.normal(loc=p, scale=p * (1.0 - p), size=(n, d))
    return KnowledgeMatrix(np.clip(c, 0.0, 1.0), float(p), seed)


def _settle(d: int, dims: np.ndarray, values: np.ndarray, participated: np.ndarray) -> np.ndarray:
    """Market point after applying the writes in order; the last write to a dimension wins."""
    m = np.zeros(d)
    dims, values = dims[participated], values[participated]
    if len(dims):
        # first occurrence in the reversed sequence is the last write
        uniq, first = np.unique(dims[::-1], return_index=True)
        m[uniq] = values[::-1][first]
    return m


def _as_knowledge(know) -> np.ndarray:
    return know.c if isinstance(know, KnowledgeMatrix) else KnowledgeMatrix(know, float("nan")).c


def incentive_free_market(know, order, dims) -> MarketState:
    """Incentive-free market with an explicit action order and dimension choices.

    ``dims[t]`` is the (0-based) dimension chosen by the t-th acting citizen.
    """
    c = _as_knowledge(know)
    order = np.asarray(order, dtype=int)
    dims = np.asarray(dims, dtype=int)
    if len(order) != len(dims):
        raise ParameterError("order and dims differ in length")
    if np.any(dims < 0) or np.any(dims >= c.shape[1]):
        raise ParameterError("dimension index out of range")
    values = c[order, dims]
    participated = np.ones(len(order), dtype=bool)
    return MarketState(_settle(c.shape[1], dims, values, participated), order, dims, values, participated)


def best_dimensions(rows: np.ndarray, tie_rng: np.random.Generator | None = None) -> np.ndarray:
    """Index of each row's maximum.

    Ties go to the lowest index when ``tie_rng`` is None, otherwise to a
    uniformly random one of the tied dimensions. Clamping makes ties at 1.0
    common for high p, and lowest-index resolution would then pile every
    write onto the first few dimensions.
    """
    if tie_rng is None:
        return np.argmax(rows, axis=1)
    is_max = rows == rows.max(axis=1, keepdims=True)
    keys = np.where(is_max, tie_rng.random(rows.shape), -1.0)
    return np.argmax(keys, axis=1)


def incentive_market(know, order, coins, tie_rng: np.random.Generator | None = None) -> MarketState:
    """Incentive market with an explicit action order and coin draws.

    ``coins[t]`` is a uniform draw in [0, 1) for the t-th acting citizen, who
    writes iff it is below their best knowledge value. All-zero coins force
    every citizen with positive knowledge to participate. See
    :func:`best_dimensions` for ``tie_rng``.
    """
    c = _as_knowledge(know)
    order = np.asarray(order, dtype=int)
    coins = np.asarray(coins, dtype=float)
    if len(order) != len(coins):
        raise ParameterError("order and coins differ in length")
    rows = c[order]
    dims = best_dimensions(rows, tie_rng)
    values = rows[np.arange(len(order)), dims]
    participated = coins < values
    return MarketState(_settle(c.shape[1], dims, values, participated), order, dims, values, participated)


def run_incentive_free_market(know: KnowledgeMatrix, order_seed: int) -> MarketState:
    rng = make_rng(order_seed)
    order = rng.permutation(know.n)
    dims = rng.integers(0, know.d, size=know.n)
    return incentive_free_market(know, order, dims)


def run_incentive_market(know: KnowledgeMatrix, order_seed: int, coin_seed: int) -> MarketState:
    """Seeded incentive market; argmax ties are broken from ``derive_seed(order_seed, "ties")``."""
    order = make_rng(order_seed).permutation(know.n)
    coins = make_rng(coin_seed).random(know.n)
    return incentive_market(know, order, coins, tie_rng=make_rng(derive_seed(order_seed, "ties")))


def market_distance_error(m, e=None, variant: DistanceVariant = DistanceVariant.ROOT_NORMALIZED) -> float:
    """Distance between market and environment, scaled to [0, 1]."""
    m = np.asarray(m, dtype=float)
    e = environment(len(m)) if e is None else np.asarray(e, dtype=float)
    if m.ndim != 1 or m.shape != e.shape or len(m) == 0:
        raise ParameterError(f"market and environment shapes differ: {m.shape} vs {e.shape}")
    mean_sq = float(np.mean((e - m) ** 2))
    if variant is DistanceVariant.MEAN_SQUARED:
        return mean_sq
    return float(np.sqrt(mean_sq))


def market_decision(m) -> tuple[np.ndarray, bool]:
    """Round each coordinate half-up; correct iff every coordinate rounds to 1."""
    m = np.asarray(m, dtype=float)
    decision = (m >= 0.5).astype(int)
    return decision, bool(np.all(decision == 1))


# three citizens in a 3-d space, acting in order 1, 2, 3
EXAMPLE_KNOWLEDGE = np.array([
    [0.7, 0.5, 0.4],
    [0.5, 0.6, 0.3],
    [0.3, 0.5, 0.7],
])
EXAMPLE_FREE_DIMS = np.array([2, 0, 1])  # 3rd, 1st, 2nd dimension (0-based)


def worked_example() -> dict:
    """Replay the three-citizen example with scripted choices and forced coins."""
    order = np.arange(3)
    free = incentive_free_market(EXAMPLE_KNOWLEDGE, order, EXAMPLE_FREE_DIMS)
    paid = incentive_market(EXAMPLE_KNOWLEDGE, order, np.zeros(3))
    out = {}
    for name, state in (("incentive-free", free), ("incentive", paid)):
        out[name] = {
            "market": state.m,
            "mean_squared": market_distance_error(state.m, variant=DistanceVariant.MEAN_SQUARED),
            "root_normalized": market_distance_error(state.m, variant=DistanceVariant.ROOT_NORMALIZED),
            "decision": market_decision(state.m)[0],
            "correct": market_decision(state.m)[1],
        }
    return out
