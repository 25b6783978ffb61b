"""Vote-power propagation (dynamically distributed democracy) and baselines.

Every citizen starts with 1/n vote power. Active citizens keep whatever
reaches them; inactive ones pass theirs along their outgoing trust links,
split by the row-stochastic weights. The absorbed power ``y`` then weights
the active citizens' tendencies and votes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, StructuralError
from .seeding import derive_seed, make_rng
from .trustnet import TrustNetwork

DEFAULT_EPSILON = 1.0 - 1e-9
MAX_RESAMPLES = 10_000


@dataclass(frozen=True)
class ActivityMask:
    a: np.ndarray  # bool, True = active
    k: float       # participation percentage
    resamples: int = 0

    def __post_init__(self):
        if not np.any(self.a):
            raise ParameterError("activity mask has no active citizen")

    @property
    def n(self) -> int:
        return len(self.a)


@dataclass
class PropagationState:
    pi: np.ndarray        # vote power still in flight (zeroed at cutoff)
    absorbed: np.ndarray  # raw absorbed power, before renormalization
    y: np.ndarray         # absorbed power renormalized to sum 1
    iterations: int
    residual: float       # in-flight power discarded at cutoff
    max_conservation_error: float
    history: list[tuple[float, float]] = field(default_factory=list)  # (sum pi, sum y) per iteration


@dataclass(frozen=True)
class DecisionOutcome:
    tendency: float
    vote: int
    tie: bool = False


def sample_activity(n: int, k: float, seed: int) -> ActivityMask:
    """Each citizen is active with probability ``k / 100``.

    An all-inactive draw is redrawn from ``derive_seed(seed, "resample", i)``
    for i = 1, 2, ...; the number of redraws is kept on the mask.
    """
    if not (0.0 < k <= 100.0):
        raise ParameterError(f"participation k must lie in (0, 100], got {k!r}")
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    a = make_rng(seed).random(n) < k / 100.0
    resamples = 0
    while not a.any():
        resamples += 1
        if resamples > MAX_RESAMPLES:
            raise StructuralError(f"no active citizen after {MAX_RESAMPLES} draws (n={n}, k={k})")
        a = make_rng(derive_seed(seed, "resample", resamples)).random(n) < k / 100.0
    return ActivityMask(a, float(k), resamples)


def reaches_active(net: TrustNetwork, active: np.ndarray) -> np.ndarray:
    """Boolean mask of citizens with a directed path to some active citizen."""
    adj = net.A > 0.0
    live = np.asarray(active, dtype=bool).copy()
    while True:
        grown = live | adj[:, live].any(axis=1)
        if np.array_equal(grown, live):
            return live
        live = grown


def propagate_vote_power(
    net: TrustNetwork,
    mask: ActivityMask,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int | None = None,
    record_history: bool = False,
) -> PropagationState:
    """Iterate absorb / forward until ``epsilon`` of the power is settled.

    Each step: active citizens absorb the power they hold, then inactive
    citizens push theirs along their out-edges (``pi_j <- sum_i pi_i A_ij``).
    Power sitting on citizens that cannot reach any active citizen can never
    be absorbed; it counts as settled for the stopping test and ends up in
    ``residual``. Absorbed power is renormalized to sum 1.
    """
    n = net.n
    if mask.n != n:
        raise ParameterError(f"mask has {mask.n} entries but network has {n} citizens")
    if not (0.0 < epsilon < 1.0):
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if max_iter is None:
        max_iter = 10 * n
    if max_iter < 1:
        raise ParameterError(f"max_iter must be >= 1, got {max_iter}")

    a = mask.a.astype(float)
    keep = 1.0 - a
    dead = ~reaches_active(net, mask.a)
    A = net.A
    pi = np.full(n, 1.0 / n)
    y = np.zeros(n)
    history = []
    max_err = 0.0
    iterations = 0
    while iterations < max_iter:
        y += pi * a
        pi = (pi * keep) @ A
        iterations += 1
        sum_pi, sum_y = float(pi.sum()), float(y.sum())
        max_err = max(max_err, abs(sum_pi + sum_y - 1.0))
        if record_history:
            history.append((sum_pi, sum_y))
        if sum_y + float(pi[dead].sum()) >= epsilon:
            break

    residual = float(pi.sum())
    total = y.sum()
    if total <= 0.0:
        raise StructuralError("no vote power reached an active citizen")
    normalized = y / total if residual > 0.0 else y.copy()
    return PropagationState(
        pi=np.zeros(n), absorbed=y, y=normalized, iterations=iterations,
        residual=residual, max_conservation_error=max_err, history=history,
    )


def exact_absorption_oracle(net: TrustNetwork, mask: ActivityMask) -> np.ndarray:
    """Absorbed vote power from the absorbing-chain linear system.

    With ``T`` the inactive (transient) citizens and ``Q = A[T, T]``, the
    total power that ever passes through each transient citizen solves
    ``(I - Q^T) z = pi0[T]``; active citizen j absorbs its own 1/n plus
    ``sum_{i in T} z_i A_ij``.
    """
    n = net.n
    if mask.n != n:
        raise ParameterError(f"mask has {mask.n} entries but network has {n} citizens")
    active = mask.a.astype(bool)
    if not reaches_active(net, active).all():
        raise StructuralError("some inactive citizens have no path to an active citizen")
    pi0 = np.full(n, 1.0 / n)
    y = np.where(active, pi0, 0.0)
    T = np.flatnonzero(~active)
    if len(T) == 0:
        return y
    Q = net.A[np.ix_(T, T)]
    try:
        z = np.linalg.solve(np.eye(len(T)) - Q.T, pi0[T])
    except np.linalg.LinAlgError as exc:
        raise StructuralError("transient system is singular") from exc
    R = net.A[np.ix_(T, np.flatnonzero(active))]
    y[active] += z @ R
    return y


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)


def _decide(x: np.ndarray, w: np.ndarray, vote_seed: int) -> DecisionOutcome:
    """Weighted tendency and weighted-majority vote.

    A citizen at exactly 0.5 flips a fair coin for their side; an exact tie
    between the sides is settled by one more flip. Coins come from
    ``vote_seed``: one per 0.5-citizen in index order, then the tie coin.
    """
    rng = make_rng(vote_seed)
    tendency = min(max(float(x @ w), 0.0), 1.0)
    ones = float(w[x > 0.5].sum())
    zeros = float(w[x < 0.5].sum())
    for i in np.flatnonzero(x == 0.5):
        if rng.random() < 0.5:
            ones += w[i]
        else:
            zeros += w[i]
    if _close(ones, zeros):
        return DecisionOutcome(tendency, int(rng.random() < 0.5), tie=True)
    return DecisionOutcome(tendency, int(ones > zeros))


def weighted_outcome(x, y, vote_seed: int = 0) -> DecisionOutcome:
    """Collective tendency ``x . y`` and the ``y``-weighted majority vote."""
    x = np.asarray(getattr(x, "x", x), dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ParameterError("x and y differ in length")
    if abs(y.sum() - 1.0) > 1e-9 or np.any(y < 0.0):
        raise ParameterError(f"y must be a distribution summing to 1, got sum {y.sum()!r}")
    return _decide(x, y, vote_seed)


def full_population_reference(x, vote_seed: int = 0) -> DecisionOutcome:
    """Mean tendency and one-citizen-one-vote majority of the whole population."""
    x = np.asarray(getattr(x, "x", x), dtype=float)
    return _decide(x, np.full(len(x), 1.0 / len(x)), vote_seed)


def direct_baseline(x, mask: ActivityMask, vote_seed: int = 0) -> DecisionOutcome:
    """Unweighted tendency and majority over the active citizens only."""
    x = np.asarray(getattr(x, "x", x), dtype=float)
    active = np.asarray(getattr(mask, "a", mask), dtype=bool)
    count = int(active.sum())
    if count == 0:
        raise ParameterError("direct baseline needs at least one active citizen")
    return _decide(x, active / float(count), vote_seed)


def tendency_error(reference: float, observed: float) -> float:
    if not (0.0 <= reference <= 1.0 and 0.0 <= observed <= 1.0):
        raise ParameterError("tendencies must lie in [0, 1]")
    return abs(reference - observed)


def mask_from(a, k: float | None = None) -> ActivityMask:
    """Wrap an explicit 0/1 vector as an :class:`ActivityMask`."""
    a = np.asarray(a).astype(bool)
    return ActivityMask(a, 100.0 * a.mean() if k is None else float(k))
