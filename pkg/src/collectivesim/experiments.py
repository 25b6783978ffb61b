"""Parameter sweeps, replication management and CSV output.

Every stochastic draw in a sweep is seeded by
``derive_seed(master_seed, <experiment tag>, <replication>, <grid point>, <stream>)``
(see :mod:`collectivesim.seeding`), so a row does not depend on how many
other rows or workers there are. Replication results are gathered in
replication order before averaging, which makes the output byte-identical
for any worker count.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import condorcet, ddd, market, trustnet
from .errors import ParameterError
from .seeding import derive_seed


class Experiment(enum.Enum):
    CONDORCET_SURFACE = "condorcet"
    DDD_SWEEP = "ddd"
    MARKET_SWEEP = "market"
    MARKET_EXAMPLE = "market-example"


DEFAULT_PARAMS: dict[Experiment, dict[str, Any]] = {
    Experiment.CONDORCET_SURFACE: {
        "p_min": 0.0, "p_max": 1.0, "p_step": 0.01, "n_min": 1, "n_max": 100, "tie_rule": "fair-coin",
    },
    Experiment.DDD_SWEEP: {
        "citizens": 100, "m": 3, "beta": 20.0, "k_min": 1.0, "k_max": 100.0, "k_step": 1.0,
        "epsilon": ddd.DEFAULT_EPSILON, "max_iter": None,
    },
    Experiment.MARKET_SWEEP: {
        "citizens": 1000, "dims": 50, "p_min": 0.0, "p_max": 1.0, "p_step": 0.05, "variant": "root-normalized",
    },
    Experiment.MARKET_EXAMPLE: {},
}

COLUMNS = {
    Experiment.CONDORCET_SURFACE: ["p", "n", "probability"],
    Experiment.DDD_SWEEP: [
        "k", "e_tend_ddd", "e_tend_direct", "vote_agree_ddd", "vote_agree_direct", "mean_residual", "resamples",
    ],
    Experiment.MARKET_SWEEP: ["p", "e_dist_free", "e_dist_incentive", "e_deci_free", "e_deci_incentive"],
    Experiment.MARKET_EXAMPLE: ["market", "point", "e_dist_mean_squared", "e_dist_root_normalized", "decision", "correct"],
}


@dataclass
class ExperimentConfig:
    experiment: Experiment
    params: dict[str, Any] = field(default_factory=dict)
    replications: int = 1
    master_seed: int = 0
    out: str | None = None
    threads: int = 1
    with_se: bool = False

    def resolved_params(self) -> dict[str, Any]:
        merged = dict(DEFAULT_PARAMS[self.experiment])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ParameterError(f"unknown parameter(s) for {self.experiment.value}: {sorted(unknown)}")
        merged.update(self.params)
        return merged

    def describe(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment.value,
            "params": self.resolved_params(),
            "replications": self.replications,
            "master_seed": self.master_seed,
            "out": self.out,
            "threads": self.threads,
            "with_se": self.with_se,
        }


@dataclass
class SweepRow:
    coords: dict[str, Any]
    means: dict[str, float]
    se: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def get(self, key):
        for source in (self.coords, self.means, self.counts):
            if key in source:
                return source[key]
        raise KeyError(key)


@dataclass
class SweepTable:
    experiment: Experiment
    columns: list[str]
    rows: list[SweepRow]
    se_columns: list[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([row.get(name) for row in self.rows])

    def to_csv(self, with_se: bool = False) -> str:
        header = list(self.columns)
        if with_se:
            header += [f"{c}_se" for c in self.se_columns]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in self.rows:
            values = [row.get(c) for c in self.columns]
            if with_se:
                values += [row.se.get(c, math.nan) for c in self.se_columns]
            writer.writerow([_fmt(v) for v in values])
        return buf.getvalue()

    def write(self, path, with_se: bool = False) -> None:
        text = self.to_csv(with_se)
        try:
            with open(Path(path), "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def linear_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ParameterError(f"grid step must be positive, got {step!r}")
    if hi < lo:
        raise ParameterError(f"empty grid: [{lo}, {hi}]")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    if len(values) < 2:
        return mean, math.nan
    return mean, float(np.std(values, ddof=1) / math.sqrt(len(values)))


def _map(fn, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


# --- condorcet -------------------------------------------------------------

def _check_condorcet(params: dict) -> None:
    condorcet.probability_grid(float(params["p_min"]), float(params["p_max"]), float(params["p_step"]))
    if int(params["n_min"]) < 1 or int(params["n_max"]) < int(params["n_min"]):
        raise ParameterError(f"need 1 <= n_min <= n_max, got [{params['n_min']}, {params['n_max']}]")
    try:
        condorcet.TieRule(params["tie_rule"])
    except ValueError as exc:
        raise ParameterError(str(exc)) from None


def _run_condorcet(cfg: ExperimentConfig, params: dict) -> SweepTable:
    grid = condorcet.condorcet_surface(
        float(params["p_min"]), float(params["p_max"]), float(params["p_step"]),
        int(params["n_min"]), int(params["n_max"]), condorcet.TieRule(params["tie_rule"]),
    )
    rows = [SweepRow({"p": p, "n": n}, {"probability": v}) for p, n, v in grid.rows()]
    return SweepTable(cfg.experiment, COLUMNS[cfg.experiment], rows)


# --- ddd -------------------------------------------------------------------

def ddd_grid(params: dict) -> np.ndarray:
    ks = linear_grid(float(params["k_min"]), float(params["k_max"]), float(params["k_step"]))
    if ks[0] <= 0 or ks[-1] > 100:
        raise ParameterError(f"k must lie in (0, 100], got [{ks[0]}, {ks[-1]}]")
    return ks


def _k_tag(k: float) -> str:
    return format(float(k), ".12g")


def ddd_replication(task) -> np.ndarray:
    """One network, every k. Returns an array of shape (len(ks), 6)."""
    master_seed, rep, params, ks = task
    n = int(params["citizens"])
    pop = trustnet.generate_tendencies(n, derive_seed(master_seed, "ddd", rep, "population"))
    net = trustnet.generate_network(
        pop, trustnet.NetworkGenParams(int(params["m"]), float(params["beta"]), derive_seed(master_seed, "ddd", rep, "network"))
    )
    vote_seed = derive_seed(master_seed, "ddd", rep, "vote")
    full = ddd.full_population_reference(pop.x, vote_seed)
    out = np.empty((len(ks), 6))
    for idx, k in enumerate(ks):
        mask = ddd.sample_activity(n, float(k), derive_seed(master_seed, "ddd", rep, _k_tag(k), "mask"))
        state = ddd.propagate_vote_power(net, mask, float(params["epsilon"]), params["max_iter"])
        weighted = ddd.weighted_outcome(pop.x, state.y, vote_seed)
        direct = ddd.direct_baseline(pop.x, mask, vote_seed)
        out[idx] = (
            ddd.tendency_error(full.tendency, weighted.tendency),
            ddd.tendency_error(full.tendency, direct.tendency),
            weighted.vote == full.vote,
            direct.vote == full.vote,
            state.residual,
            mask.resamples,
        )
    return out


def _check_ddd(params: dict) -> np.ndarray:
    ks = ddd_grid(params)
    if int(params["citizens"]) < 2:
        raise ParameterError("need at least 2 citizens")
    if not (0.0 < float(params["epsilon"]) < 1.0):
        raise ParameterError(f"epsilon must lie in (0, 1), got {params['epsilon']!r}")
    if params["max_iter"] is not None and int(params["max_iter"]) < 1:
        raise ParameterError(f"max_iter must be >= 1, got {params['max_iter']!r}")
    trustnet.NetworkGenParams(int(params["m"]), float(params["beta"]))
    if int(params["m"]) >= int(params["citizens"]):
        raise ParameterError("m must be smaller than the number of citizens")
    return ks


def _run_ddd(cfg: ExperimentConfig, params: dict) -> SweepTable:
    ks = _check_ddd(params)
    tasks = [(cfg.master_seed, r, params, ks) for r in range(cfg.replications)]
    results = np.stack(_map(ddd_replication, tasks, cfg.threads))  # (reps, len(ks), 6)
    names = COLUMNS[cfg.experiment][1:-1]
    rows = []
    for idx, k in enumerate(ks):
        means, se = {}, {}
        for col, name in enumerate(names):
            means[name], se[name] = _mean_se(results[:, idx, col])
        k_value = int(k) if float(k).is_integer() else float(k)
        rows.append(SweepRow({"k": k_value}, means, se, {"resamples": int(results[:, idx, 5].sum())}))
    return SweepTable(cfg.experiment, COLUMNS[cfg.experiment], rows, se_columns=names)


# --- market ----------------------------------------------------------------

MARKET_STATS = [
    "e_dist_free_root", "e_dist_incentive_root", "e_dist_free_msq", "e_dist_incentive_msq",
    "e_deci_free", "e_deci_incentive", "written_mean_free", "written_mean_incentive",
]


def _written_mean(state: market.MarketState) -> float:
    written = state.written
    return float(state.m[written].mean()) if written.any() else math.nan


def market_replication(task) -> np.ndarray:
    """All replications for one p. Returns an array of shape (reps, len(MARKET_STATS))."""
    master_seed, p, reps, params = task
    n, d = int(params["citizens"]), int(params["dims"])
    tag = format(float(p), ".12g")
    out = np.empty((reps, len(MARKET_STATS)))
    for r in range(reps):
        know = market.generate_knowledge(n, d, float(p), derive_seed(master_seed, "market", r, tag, "knowledge"))
        free = market.run_incentive_free_market(know, derive_seed(master_seed, "market", r, tag, "free-order"))
        paid = market.run_incentive_market(
            know,
            derive_seed(master_seed, "market", r, tag, "incentive-order"),
            derive_seed(master_seed, "market", r, tag, "incentive-coins"),
        )
        root, msq = market.DistanceVariant.ROOT_NORMALIZED, market.DistanceVariant.MEAN_SQUARED
        out[r] = (
            market.market_distance_error(free.m, variant=root),
            market.market_distance_error(paid.m, variant=root),
            market.market_distance_error(free.m, variant=msq),
            market.market_distance_error(paid.m, variant=msq),
            market.market_decision(free.m)[1],
            market.market_decision(paid.m)[1],
            _written_mean(free),
            _written_mean(paid),
        )
    return out


def _check_market(params: dict) -> np.ndarray:
    ps = linear_grid(float(params["p_min"]), float(params["p_max"]), float(params["p_step"]))
    if ps[0] < 0 or ps[-1] > 1:
        raise ParameterError(f"p must lie in [0, 1], got [{ps[0]}, {ps[-1]}]")
    if int(params["citizens"]) < 1 or int(params["dims"]) < 1:
        raise ParameterError("need at least one citizen and one dimension")
    try:
        market.DistanceVariant(params["variant"])
    except ValueError as exc:
        raise ParameterError(str(exc)) from None
    return ps


def _run_market(cfg: ExperimentConfig, params: dict) -> SweepTable:
    ps = _check_market(params)
    variant = market.DistanceVariant(params["variant"])
    suffix = "root" if variant is market.DistanceVariant.ROOT_NORMALIZED else "msq"
    tasks = [(cfg.master_seed, float(p), cfg.replications, params) for p in ps]
    results = _map(market_replication, tasks, cfg.threads)
    rows = []
    for p, res in zip(ps, results):
        means, se = {}, {}
        for col, name in enumerate(MARKET_STATS):
            values = res[:, col]
            values = values[~np.isnan(values)]
            means[name], se[name] = _mean_se(values) if len(values) else (math.nan, math.nan)
        for side in ("free", "incentive"):
            means[f"e_dist_{side}"] = means[f"e_dist_{side}_{suffix}"]
            se[f"e_dist_{side}"] = se[f"e_dist_{side}_{suffix}"]
        rows.append(SweepRow({"p": float(p)}, means, se))
    return SweepTable(cfg.experiment, COLUMNS[cfg.experiment], rows, se_columns=COLUMNS[cfg.experiment][1:])


def _run_market_example(cfg: ExperimentConfig, params: dict) -> SweepTable:
    rows = []
    for name, info in market.worked_example().items():
        rows.append(SweepRow(
            {"market": name, "point": " ".join(_fmt(v) for v in info["market"]),
             "decision": " ".join(str(int(v)) for v in info["decision"]), "correct": info["correct"]},
            {"e_dist_mean_squared": info["mean_squared"], "e_dist_root_normalized": info["root_normalized"]},
        ))
    return SweepTable(cfg.experiment, COLUMNS[cfg.experiment], rows)


_RUNNERS = {
    Experiment.CONDORCET_SURFACE: _run_condorcet,
    Experiment.DDD_SWEEP: _run_ddd,
    Experiment.MARKET_SWEEP: _run_market,
    Experiment.MARKET_EXAMPLE: _run_market_example,
}


_CHECKS = {
    Experiment.CONDORCET_SURFACE: _check_condorcet,
    Experiment.DDD_SWEEP: _check_ddd,
    Experiment.MARKET_SWEEP: _check_market,
    Experiment.MARKET_EXAMPLE: lambda params: None,
}


def validate(config: ExperimentConfig) -> dict[str, Any]:
    """Raise :class:`ParameterError` for an unusable config; return the resolved parameters."""
    if int(config.replications) < 1:
        raise ParameterError(f"replications must be >= 1, got {config.replications}")
    if int(config.threads) < 1:
        raise ParameterError(f"threads must be >= 1, got {config.threads}")
    params = config.resolved_params()
    _CHECKS[config.experiment](params)
    return params


def run_experiment(config: ExperimentConfig) -> SweepTable:
    """Run the sweep described by ``config``; write CSV to ``config.out`` if set."""
    params = validate(config)
    table = _RUNNERS[config.experiment](config, params)
    if config.out:
        table.write(config.out, config.with_se)
    return table


# --- presets ---------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    experiment: Experiment
    params: dict
    replications: int
    summary: str


PRESETS = {
    "fig2": Preset(Experiment.CONDORCET_SURFACE, {"p_min": 0.0, "p_max": 1.0, "p_step": 0.01, "n_min": 1, "n_max": 100}, 1,
                   "majority-correct probability surface, p in 0..1 step 0.01, n = 1..100"),
    "fig4": Preset(Experiment.DDD_SWEEP, {"citizens": 100, "k_min": 1, "k_max": 100, "k_step": 1}, 1000,
                   "tendency error vs participation k, 1000 networks of 100 citizens"),
    "fig5": Preset(Experiment.DDD_SWEEP, {"citizens": 100, "k_min": 1, "k_max": 100, "k_step": 1}, 1000,
                   "vote agreement vs participation k, 1000 networks of 100 citizens"),
    "fig7": Preset(Experiment.MARKET_SWEEP, {"citizens": 1000, "dims": 50, "p_min": 0.0, "p_max": 1.0, "p_step": 0.05}, 1000,
                   "market distance error vs p, 1000 runs, d = 50, n = 1000"),
    "fig8": Preset(Experiment.MARKET_SWEEP, {"citizens": 1000, "dims": 50, "p_min": 0.0, "p_max": 1.0, "p_step": 0.05}, 1000,
                   "proportion of correct market decisions vs p, 1000 runs, d = 50, n = 1000"),
}


def preset(figure: str, scale: int = 1, master_seed: int = 0, out: str | None = None,
           threads: int | None = None) -> ExperimentConfig:
    """Full-size configuration for a figure; ``scale`` divides the replication count."""
    key = str(figure).lower()
    if key not in PRESETS:
        raise ParameterError(f"unknown preset {figure!r}; choose from {sorted(PRESETS)}")
    if int(scale) < 1:
        raise ParameterError(f"scale must be >= 1, got {scale}")
    entry = PRESETS[key]
    return ExperimentConfig(
        entry.experiment, dict(entry.params), max(1, entry.replications // int(scale)), master_seed, out,
        threads if threads is not None else (os.cpu_count() or 1),
    )


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, keys use ``-`` or ``_``."""
    values = {}
    with open(Path(path)) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values
