"""Exact probabilities for a game model by full enumeration of (car, pick, opened set, final door)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .model import DoorDistribution, DoorSet, GameConfig, GameModel, ensure_valid
from .validation import DERIVED_TOL, UnreachableObservationError, check_door, check_door_set

Cell = Tuple[int, int, DoorSet, int]


@dataclass(frozen=True)
class JointDistribution:
    """Probability mass of every ``(c, p, O, f)`` with positive weight."""

    config: GameConfig
    table: Dict[Cell, float]

    def total(self) -> float:
        return math.fsum(self.table.values())

    def mass(self, c: int, p: int, opened, f: int) -> float:
        return self.table.get((c, p, tuple(opened), f), 0.0)

    def marginal_car(self) -> np.ndarray:
        out = np.zeros(self.config.n_doors)
        for (c, _, _, _), m in self.table.items():
            out[c - 1] += m
        return out

    def marginal_pick(self) -> np.ndarray:
        out = np.zeros(self.config.n_doors)
        for (_, p, _, _), m in self.table.items():
            out[p - 1] += m
        return out

    def observation_prob(self, p: int, opened) -> float:
        opened = tuple(opened)
        return math.fsum(m for (_, pp, o, _), m in self.table.items() if pp == p and o == opened)

    def win_prob(self) -> float:
        return math.fsum(m for (c, _, _, f), m in self.table.items() if f == c)


def joint_distribution(model: GameModel) -> JointDistribution:
    """Tabulate ``car(c) * pick(p) * open(O | c, p) * final(f | p, O)``, skipping zero cells."""
    ensure_valid(model)
    team, player = model.team, model.player
    table = {}
    for c, wc in enumerate(team.car_placement.weights, start=1):
        if wc == 0:
            continue
        for p, wp in enumerate(player.pick.weights, start=1):
            if wp == 0:
                continue
            for o, wo in team.open_rule[(c, p)].items():
                if wo == 0:
                    continue
                for f, wf in player.final_choice[(p, o)].items():
                    if wf > 0:
                        table[(c, p, o, f)] = wc * wp * wo * wf
    return JointDistribution(model.config, table)


def unconditional_win_prob(model: GameModel) -> float:
    """Probability that the final door hides the car."""
    return joint_distribution(model).win_prob()


def _check_observation(config: GameConfig, p: int, opened) -> DoorSet:
    p = check_door(p, config.n_doors)
    opened = check_door_set(opened, config.n_doors, config.k_opened)
    if p in opened:
        raise ValueError(f"opened set {opened} contains the picked door {p}")
    return opened


def _car_and_observation(model: GameModel, p: int, opened: DoorSet) -> np.ndarray:
    """``Pr(C = c, P = p, O = opened)`` for every door ``c``."""
    rule = model.team.open_rule
    wp = model.player.pick.prob(p)
    return np.array(
        [wc * wp * rule[(c, p)].get(opened, 0.0) for c, wc in enumerate(model.team.car_placement.weights, start=1)]
    )


@dataclass(frozen=True)
class ConditionalReport:
    observation: Tuple[int, DoorSet]
    reachable: bool
    observation_prob: float
    win_prob: Optional[float] = None
    posterior: Optional[DoorDistribution] = None


def conditional_win_prob(model: GameModel, p: int, opened) -> ConditionalReport:
    """Win probability given the player picked ``p`` and saw ``opened``.

    An observation of probability zero yields ``reachable=False`` and no numbers.
    """
    ensure_valid(model)
    return _conditional(model, p, _check_observation(model.config, p, opened))


def _conditional(model: GameModel, p: int, opened: DoorSet) -> ConditionalReport:
    """Conditional report for an already validated model and observation."""
    joint = _car_and_observation(model, p, opened)
    total = math.fsum(joint)
    if total <= 0:
        return ConditionalReport((p, opened), False, 0.0)
    posterior = joint / total
    choice = model.player.final_choice[(p, opened)]
    win = math.fsum(posterior[f - 1] * w for f, w in choice.items())
    return ConditionalReport((p, opened), True, total, win, DoorDistribution(tuple(posterior)))


def posterior_car_distribution(model: GameModel, p: int, opened) -> DoorDistribution:
    """``Pr(C = c | P = p, O = opened)``; raises for an unreachable observation."""
    report = conditional_win_prob(model, p, opened)
    if not report.reachable:
        raise UnreachableObservationError(f"unreachable observation (p={p}, O={report.observation[1]})")
    return report.posterior


def bayes_posterior_from_odds(prior_odds: Sequence, likelihoods: Sequence) -> tuple:
    """Normalize the componentwise product of prior odds and likelihoods.

    Integer and ``Fraction`` inputs are kept exact and give ``Fraction`` output.
    """
    if len(prior_odds) != len(likelihoods):
        raise ValueError(f"length mismatch: {len(prior_odds)} prior odds vs {len(likelihoods)} likelihoods")
    if any(x < 0 for x in prior_odds) or any(x < 0 for x in likelihoods):
        raise ValueError("odds and likelihoods must be non-negative")
    exact = all(isinstance(x, (int, Fraction)) for x in (*prior_odds, *likelihoods))
    prod = [Fraction(a) * b if exact else float(a) * float(b) for a, b in zip(prior_odds, likelihoods)]
    total = sum(prod) if exact else math.fsum(prod)
    if total == 0:
        raise ValueError("zero posterior mass")
    return tuple(x / total for x in prod)


@dataclass(frozen=True)
class SymmetryTable:
    """Conditional win probability of every reachable observation with its weight."""

    rows: Tuple[Tuple[int, DoorSet, float, float], ...]
    weighted_average: float
    unconditional: float

    @property
    def spread(self) -> float:
        probs = [r[3] for r in self.rows]
        return max(probs) - min(probs)


def symmetry_conditionals(model: GameModel) -> SymmetryTable:
    """Break the win probability down over observations by total probability."""
    ensure_valid(model)
    rows = []
    for p, o in model.config.observations():
        report = _conditional(model, p, o)
        if report.reachable:
            rows.append((p, o, report.observation_prob, report.win_prob))
    avg = math.fsum(w * v for _, _, w, v in rows)
    uncond = unconditional_win_prob(model)
    if abs(avg - uncond) > DERIVED_TOL:
        raise ArithmeticError(f"total probability check failed: {avg!r} vs {uncond!r}")
    return SymmetryTable(tuple(rows), avg, uncond)
