"""The player-vs-team zero-sum game in normal form: payoff matrix, minimax LP and certificates.

The row player is the contestant, the column player is the quiz team (car
placement plus host rule). Entry ``A[i, j]`` is 1 when row ``i`` ends on the
car against column ``j``. The game value is therefore a win probability.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from sklearn.base import BaseEstimator

from .exact import conditional_win_prob
from .model import (
    DEFAULT_ENUMERATION_CAP,
    DoorDistribution,
    GameConfig,
    PlayerStrategy,
    PurePlayerStrategy,
    PureTeamStrategy,
    TeamStrategy,
    count_player_pure,
    count_team_pure,
    enumerate_player_pure,
    enumerate_team_pure,
    make_preset,
)
from .validation import INPUT_TOL, EnumerationCapError, check_payoff_matrix, check_unit_interval

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12
DEFAULT_MAX_ENTRIES = 10**7


class SolverError(RuntimeError):
    """The LP could not produce strategies whose duality gap meets the tolerance."""

    def __init__(self, message: str, residuals: dict):
        self.residuals = residuals
        detail = ", ".join(f"{k}={v:.3g}" for k, v in residuals.items())
        super().__init__(f"{message} ({detail})")


@dataclass(frozen=True)
class PayoffMatrix:
    config: GameConfig
    rows: Tuple[PurePlayerStrategy, ...]
    cols: Tuple[PureTeamStrategy, ...]
    entries: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def build_payoff_matrix(
    config: GameConfig, cap: int = DEFAULT_ENUMERATION_CAP, max_entries: int = DEFAULT_MAX_ENTRIES
) -> PayoffMatrix:
    """Win-indicator matrix over all pure strategies, rows and columns in lexicographic order.

    ``cap`` bounds each side's enumeration; ``max_entries`` bounds the matrix itself.
    """
    size = count_player_pure(config) * count_team_pure(config)
    if size > max_entries:
        raise EnumerationCapError("payoff matrix entry", size, max_entries)
    rows = enumerate_player_pure(config, cap)
    cols = enumerate_team_pure(config, cap)
    obs_index = {p: {o: i for i, o in enumerate(config.observation_sets(p))} for p in config.doors}
    # opened[j, p - 1]: index (within observation_sets(p)) of the set column j opens against pick p
    opened = np.array([[obs_index[p][col.opened(p)] for p in config.doors] for col in cols])
    cars = np.array([col.c for col in cols])

    entries = np.empty((len(rows), len(cols)), dtype=np.int8)
    for p in config.doors:
        idx = [i for i, row in enumerate(rows) if row.p == p]
        finals = np.array([[f for _, f in rows[i].f_map] for i in idx])
        entries[idx] = finals[:, opened[:, p - 1]] == cars
    entries.setflags(write=False)
    return PayoffMatrix(config, tuple(rows), tuple(cols), entries)


@dataclass(frozen=True)
class MixedStrategy:
    """Probability weights over one side's pure strategies."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("mixed strategy must be a non-empty vector")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > INPUT_TOL:
            raise ValueError(f"mixed strategy weights must be non-negative and sum to 1 (sum={math.fsum(w)!r})")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform_over(cls, size: int, indices: Sequence[int]) -> "MixedStrategy":
        w = np.zeros(size)
        w[list(indices)] = 1.0 / len(indices)
        return cls(w)

    @classmethod
    def pure(cls, size: int, index: int) -> "MixedStrategy":
        return cls.uniform_over(size, [index])

    def __len__(self) -> int:
        return len(self.weights)

    def support(self, tol: float = 0.0) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.weights > tol)]


def _as_weights(strategy) -> np.ndarray:
    return strategy.weights if isinstance(strategy, MixedStrategy) else np.asarray(strategy, dtype=float)


def _check_side(side: str) -> str:
    if side not in ("player", "team"):
        raise ValueError(f"side must be 'player' or 'team', got {side!r}")
    return side


def security_level(matrix, strategy, side: str) -> float:
    """Worst case of a fixed strategy: min over columns for the player, max over rows for the team."""
    A = check_payoff_matrix(matrix)
    w = _as_weights(strategy)
    expected = len(A) if _check_side(side) == "player" else A.shape[1]
    if len(w) != expected:
        raise ValueError(f"{side} strategy has {len(w)} weights, matrix needs {expected}")
    return float((w @ A).min()) if side == "player" else float((A @ w).max())


def best_response(matrix, opponent, side: str) -> tuple[int, float]:
    """Best pure reply of ``side`` to the opponent's mixed strategy; ties go to the lowest index."""
    A = check_payoff_matrix(matrix)
    w = _as_weights(opponent)
    if _check_side(side) == "player":
        if len(w) != A.shape[1]:
            raise ValueError(f"team strategy has {len(w)} weights, matrix has {A.shape[1]} columns")
        payoffs = A @ w
        idx = int(np.flatnonzero(payoffs >= payoffs.max() - TIE_TOL)[0])
    else:
        if len(w) != len(A):
            raise ValueError(f"player strategy has {len(w)} weights, matrix has {len(A)} rows")
        payoffs = w @ A
        idx = int(np.flatnonzero(payoffs <= payoffs.min() + TIE_TOL)[0])
    return idx, float(payoffs[idx])


@dataclass(frozen=True)
class SolveResult:
    value: float
    player_optimal: MixedStrategy
    team_optimal: MixedStrategy
    duality_gap: float
    maximin: float
    minimax: float
    method: str


def _normalize(w) -> np.ndarray:
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    return w / math.fsum(w)


def _solve_highs(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m, n = A.shape
    # player: max v  s.t.  v - (x^T A)_j <= 0,  sum x = 1
    res_x = linprog(
        c=np.r_[np.zeros(m), -1.0],
        A_ub=np.c_[-A.T, np.ones(n)],
        b_ub=np.zeros(n),
        A_eq=np.r_[np.ones(m), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
    )
    # team: min w  s.t.  (A y)_i - w <= 0,  sum y = 1
    res_y = linprog(
        c=np.r_[np.zeros(n), 1.0],
        A_ub=np.c_[A, -np.ones(m)],
        b_ub=np.zeros(m),
        A_eq=np.r_[np.ones(n), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
    )
    if res_x.status != 0 or res_y.status != 0:
        raise SolverError(
            f"HiGHS failed: {res_x.message} / {res_y.message}",
            {"player_status": res_x.status, "team_status": res_y.status},
        )
    return _normalize(res_x.x[:m]), _normalize(res_y.x[:n])


def _solve_exact(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rational tableau simplex with Bland's rule; slow, used when float certificates fall short.

    Shifting payoffs to be positive turns the team's problem into
    ``max 1.w  s.t.  A' w <= 1, w >= 0`` whose origin is feasible. The
    player's strategy is read from the dual prices of the slack columns.
    """
    m, n = A.shape
    F = [[Fraction(float(a)) for a in row] for row in A]
    shift = min(min(row) for row in F) - 1
    # tableau rows: [A' | I | 1]; objective row holds reduced costs
    T = [[F[i][j] - shift for j in range(n)] + [Fraction(int(i == r)) for r in range(m)] + [Fraction(1)]
         for i in range(m)]
    obj = [Fraction(1)] * n + [Fraction(0)] * (m + 1)
    basis = list(range(n, n + m))
    while True:
        enter = next((j for j in range(n + m) if obj[j] > 0), None)
        if enter is None:
            break
        ratios = [(T[i][-1] / T[i][enter], basis[i], i) for i in range(m) if T[i][enter] > 0]
        _, _, r = min(ratios)
        pivot = T[r][enter]
        T[r] = [v / pivot for v in T[r]]
        for i in range(m):
            if i != r and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b for a, b in zip(T[i], T[r])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, T[r])]
        basis[r] = enter
    w = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            w[b] = T[i][-1]
    u = [-obj[n + i] for i in range(m)]
    total_w, total_u = sum(w), sum(u)
    x = np.array([float(v / total_u) for v in u])
    y = np.array([float(v / total_w) for v in w])
    return _normalize(x), _normalize(y)


def solve_minimax(matrix, tol: float = 1e-9, method: str = "auto") -> SolveResult:
    """Minimax value and optimal mixed strategies of a zero-sum matrix game.

    The duality gap is measured from the returned strategies themselves
    (``max_i (A y)_i - min_j (x^T A)_j``), so it certifies both sides.
    ``method="auto"`` runs HiGHS and falls back to rational simplex when the
    gap exceeds ``tol``.
    """
    A = check_payoff_matrix(matrix)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if method not in ("auto", "highs", "exact"):
        raise ValueError(f"unknown method {method!r}")

    attempts = {"auto": ["highs", "exact"], "highs": ["highs"], "exact": ["exact"]}[method]
    residuals = {}
    for name in attempts:
        x, y = _solve_highs(A) if name == "highs" else _solve_exact(A)
        maximin = float((x @ A).min())
        minimax = float((A @ y).max())
        gap = abs(minimax - maximin)
        if gap <= tol:
            value = 0.5 * (maximin + minimax)
            return SolveResult(value, MixedStrategy(x), MixedStrategy(y), gap, maximin, minimax, name)
        residuals = {"maximin": maximin, "minimax": minimax, "gap": gap, "tol": tol}
        logger.info("%s solution misses the gap certificate: %s", name, residuals)
    raise SolverError("no solution met the duality-gap tolerance", residuals)


def player_mixed(matrix: PayoffMatrix, player: PlayerStrategy) -> MixedStrategy:
    """Mixed strategy over rows induced by a behavioral player strategy (product of its local choices)."""
    w = [
        player.pick.prob(row.p) * math.prod(player.choice_prob(f, row.p, o) for o, f in row.f_map)
        for row in matrix.rows
    ]
    return MixedStrategy(_normalize(w))


def team_mixed(matrix: PayoffMatrix, team: TeamStrategy) -> MixedStrategy:
    """Mixed strategy over columns induced by a behavioral team strategy."""
    w = [
        team.car_placement.prob(col.c)
        * math.prod(team.open_prob(o, col.c, p) for p, o in enumerate(col.g_map, start=1))
        for col in matrix.cols
    ]
    return MixedStrategy(_normalize(w))


def stay_mass(matrix: PayoffMatrix, strategy: MixedStrategy) -> float:
    """Expected fraction of observations at which the mixed player strategy stays."""
    return math.fsum(w * row.stay_fraction() for w, row in zip(strategy.weights, matrix.rows) if w > 0)


def recommendation(matrix: PayoffMatrix, result: SolveResult, tol: float = 1e-9) -> str:
    """``switch`` when the optimal player strategy never stays, ``stay`` when it always does."""
    mass = stay_mass(matrix, result.player_optimal)
    if mass <= tol:
        return "switch"
    if mass >= 1 - tol:
        return "stay"
    return "mixed"


@dataclass(frozen=True)
class SweepRow:
    q: float
    conditionals: Tuple[Tuple[Tuple[int, ...], float], ...]
    minimum: float
    closed_form: float


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[SweepRow, ...]
    global_min: float
    argmin: Tuple[float, ...]


def conditional_lower_bound_sweep(q_grid: Sequence[float], car_placement: Sequence[float] | None = None) -> SweepResult:
    """Smallest conditional win probability of the switcher over observations, per host bias ``q``.

    The player's pick is fixed at door 1. ``closed_form`` is ``1/(1+q)``, the
    uniform-car answer at the observation ``O = {3}``.
    """
    q_grid = [check_unit_interval(q, "q") for q in q_grid]
    if not q_grid:
        raise ValueError("q grid is empty")
    rows = []
    for q in q_grid:
        model = make_preset("host-biased", q=q)
        player = PlayerStrategy(DoorDistribution.point(3, 1), model.player.final_choice)
        team = model.team
        if car_placement is not None:
            team = TeamStrategy(DoorDistribution(tuple(car_placement)), team.open_rule)
        model = model.with_player(player).with_team(team)
        conds = []
        for o in model.config.observation_sets(1):
            report = conditional_win_prob(model, 1, o)
            if report.reachable:
                conds.append((o, report.win_prob))
        rows.append(SweepRow(q, tuple(conds), min(v for _, v in conds), 1.0 / (1.0 + q)))
    global_min = min(r.minimum for r in rows)
    argmin = tuple(r.q for r in rows if r.minimum <= global_min + TIE_TOL)
    return SweepResult(tuple(rows), global_min, argmin)


class MinimaxSolver(BaseEstimator):
    """Estimator-style wrapper around :func:`solve_minimax`.

    ``fit`` takes a payoff matrix (array-like or :class:`PayoffMatrix`) and sets
    ``value_``, ``player_strategy_``, ``team_strategy_``, ``duality_gap_`` and
    ``result_``. ``predict`` returns the expected payoff of each row against
    the fitted team strategy.
    """

    def __init__(self, tol=1e-9, method="auto"):
        self.tol = tol
        self.method = method

    def fit(self, X, y=None):
        A = check_payoff_matrix(X)
        self.result_ = solve_minimax(A, tol=self.tol, method=self.method)
        self.value_ = self.result_.value
        self.player_strategy_ = self.result_.player_optimal
        self.team_strategy_ = self.result_.team_optimal
        self.duality_gap_ = self.result_.duality_gap
        self.n_rows_, self.n_cols_ = A.shape
        return self

    def predict(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "result_")
        A = check_payoff_matrix(X)
        if A.shape[1] != self.n_cols_:
            raise ValueError(f"expected {self.n_cols_} columns, got {A.shape[1]}")
        return A @ self.team_strategy_.weights
