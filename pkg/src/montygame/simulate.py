"""Seeded Monte Carlo plays of a game model, and comparison against the exact engine.

Random numbers come from NumPy's PCG64 bit generator. Uniforms are formed
from raw 64-bit outputs as ``(x >> 11) * 2**-53`` so the stream does not
depend on NumPy's distribution code. Play ``i`` consumes raw draws
``4i .. 4i+3`` (car, pick, opened set, final door), each turned into an
outcome by inverse-CDF lookup over the support listed in ascending order.

Seed derivation: a single run uses ``SeedSequence(seed)``; shard ``s`` of a
sharded run uses ``SeedSequence([seed, s])``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .exact import _conditional, unconditional_win_prob
from .model import DoorSet, GameModel, ensure_valid

GENERATOR = "numpy.random.PCG64/SeedSequence; u = (raw >> 11) * 2**-53"
FLAG_Z = 4.0
LOW_SAMPLE = 30
_SEED_LIMIT = 2**64


@dataclass(frozen=True)
class SimResult:
    n_plays: int
    wins: int
    estimate: float
    std_error: float
    seed: int
    tallies: Dict[Tuple[int, DoorSet], Tuple[int, int]] = field(hash=False)
    generator: str = GENERATOR
    n_shards: int = 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < _SEED_LIMIT:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return int(seed)


def _uniforms(entropy, size: int) -> np.ndarray:
    raw = np.random.PCG64(np.random.SeedSequence(entropy)).random_raw(size)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _inverse_cdf(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(weights)
    cum /= cum[-1]
    cum[np.flatnonzero(weights > 0)[-1]:] = 1.0
    return np.searchsorted(cum, u, side="right")


def _groups(keys: np.ndarray):
    """Yield ``(key, row indices)`` for each distinct key, keys ascending."""
    order = np.argsort(keys, kind="stable")
    uniq, starts = np.unique(keys[order], return_index=True)
    for key, rows in zip(uniq, np.split(order, starts[1:])):
        yield int(key), rows


def _sample(model: GameModel, n: int, entropy) -> tuple[int, dict]:
    """Play ``n`` games; returns the win count and per-observation tallies."""
    cfg = model.config
    u = _uniforms(entropy, 4 * n).reshape(n, 4)
    car = _inverse_cdf(model.team.car_placement.as_array(), u[:, 0]) + 1
    pick = _inverse_cdf(model.player.pick.as_array(), u[:, 1]) + 1

    set_ids: dict[DoorSet, int] = {}
    opened = np.empty(n, dtype=np.int64)
    cell = (car - 1) * cfg.n_doors + (pick - 1)
    for key, rows in _groups(cell):
        c, p = divmod(key, cfg.n_doors)
        dist = sorted((o, w) for o, w in model.team.open_rule[(c + 1, p + 1)].items() if w > 0)
        idx = _inverse_cdf(np.array([w for _, w in dist]), u[rows, 2])
        ids = np.array([set_ids.setdefault(o, len(set_ids)) for o, _ in dist])
        opened[rows] = ids[idx]
    sets = sorted(set_ids, key=set_ids.get)

    final = np.empty(n, dtype=np.int64)
    obs = (pick - 1) * len(sets) + opened
    for key, rows in _groups(obs):
        p, o_id = divmod(key, len(sets))
        dist = sorted((f, w) for f, w in model.player.final_choice[(p + 1, sets[o_id])].items() if w > 0)
        idx = _inverse_cdf(np.array([w for _, w in dist]), u[rows, 3])
        final[rows] = np.array([f for f, _ in dist])[idx]

    member = np.zeros((len(sets), cfg.n_doors + 1), dtype=bool)
    for i, o in enumerate(sets):
        member[i, list(o)] = True
    assert not member[opened, car].any(), "host opened the car door"
    assert not member[opened, pick].any(), "host opened the picked door"
    assert not member[opened, final].any(), "final door was already opened"

    win = final == car
    tallies = {}
    keys, plays = np.unique(obs, return_counts=True)
    wins = np.bincount(np.searchsorted(keys, obs[win]), minlength=len(keys))
    for key, k_plays, k_wins in zip(keys, plays, wins):
        p, o_id = divmod(int(key), len(sets))
        tallies[(p + 1, sets[o_id])] = (int(k_plays), int(k_wins))
    return int(win.sum()), dict(sorted(tallies.items()))


def _result(n: int, wins: int, seed: int, tallies: dict, n_shards: int) -> SimResult:
    est = wins / n
    return SimResult(n, wins, est, math.sqrt(est * (1 - est) / n), seed, tallies, GENERATOR, n_shards)


def simulate(model: GameModel, n_plays: int, seed: int, n_shards: int = 1, max_workers: int | None = None) -> SimResult:
    """Estimate the win probability from ``n_plays`` seeded plays.

    With ``n_shards > 1`` the plays are split across independent substreams
    (optionally run on ``max_workers`` threads) and merged; the merged result
    is reproducible but differs bitwise from the single-stream run.
    """
    ensure_valid(model)
    if isinstance(n_plays, bool) or int(n_plays) != n_plays or n_plays < 1:
        raise ValueError(f"n_plays must be a positive integer, got {n_plays!r}")
    n_plays = int(n_plays)
    seed = check_seed(seed)
    if n_shards < 1:
        raise ValueError(f"n_shards must be at least 1, got {n_shards}")
    if n_shards == 1:
        wins, tallies = _sample(model, n_plays, seed)
        return _result(n_plays, wins, seed, tallies, 1)

    sizes = [n_plays // n_shards + (s < n_plays % n_shards) for s in range(n_shards)]
    jobs = [(size, [seed, s]) for s, size in enumerate(sizes) if size > 0]
    with ThreadPoolExecutor(max_workers=max_workers or 1) as pool:
        parts = list(pool.map(lambda job: _sample(model, *job), jobs))
    return merge_results(parts, n_plays, seed, n_shards)


def merge_results(parts, n_plays: int, seed: int, n_shards: int) -> SimResult:
    wins = sum(w for w, _ in parts)
    tallies: dict = {}
    for _, part in parts:
        for key, (plays, won) in part.items():
            old = tallies.get(key, (0, 0))
            tallies[key] = (old[0] + plays, old[1] + won)
    return _result(n_plays, wins, seed, dict(sorted(tallies.items())), n_shards)


@dataclass(frozen=True)
class ComparisonRow:
    observation: Tuple[int, DoorSet] | None
    plays: int
    wins: int
    empirical: float
    exact: float
    z: float
    flagged: bool
    low_sample: bool


@dataclass(frozen=True)
class ComparisonReport:
    sim: SimResult
    overall: ComparisonRow
    observations: Tuple[ComparisonRow, ...]

    @property
    def any_flag(self) -> bool:
        return self.overall.flagged or any(r.flagged for r in self.observations)


def _z_row(observation, plays: int, wins: int, exact: float) -> ComparisonRow:
    """z-score of an empirical win rate; tallies under ``LOW_SAMPLE`` plays are marked, never flagged."""
    empirical = wins / plays
    # z uses the exact probability for its standard error so a 0/1 estimate is not degenerate
    se = math.sqrt(exact * (1 - exact) / plays)
    diff = empirical - exact
    if se > 0:
        z = diff / se
    else:
        z = 0.0 if abs(diff) < 1e-12 else math.copysign(math.inf, diff)
    low = plays < LOW_SAMPLE
    return ComparisonRow(observation, plays, wins, empirical, exact, z, abs(z) > FLAG_Z and not low, low)


def compare_exact(model: GameModel, n_plays: int, seed: int, n_shards: int = 1) -> ComparisonReport:
    """Simulate, then z-score the overall and per-observation estimates against the exact engine."""
    sim = simulate(model, n_plays, seed, n_shards)
    overall = _z_row(None, sim.n_plays, sim.wins, unconditional_win_prob(model))
    rows = []
    for (p, o), (plays, wins) in sorted(sim.tallies.items()):
        exact = _conditional(model, p, o).win_prob
        rows.append(_z_row((p, o), plays, wins, exact))
    return ComparisonReport(sim, overall, tuple(rows))


class MonteCarloSimulator(BaseEstimator):
    """Estimator-style wrapper: ``fit(model)`` runs :func:`simulate` and stores ``result_``."""

    def __init__(self, n_plays=100_000, seed=0, n_shards=1):
        self.n_plays = n_plays
        self.seed = seed
        self.n_shards = n_shards

    def fit(self, X, y=None):
        self.result_ = simulate(X, self.n_plays, self.seed, self.n_shards)
        self.estimate_ = self.result_.estimate
        self.std_error_ = self.result_.std_error
        return self

    def score(self, X, y=None):
        """Negative absolute z-score of the fitted estimate against the exact win probability of ``X``."""
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "result_")
        return -abs(_z_row(None, self.result_.n_plays, self.result_.wins, unconditional_win_prob(X)).z)
