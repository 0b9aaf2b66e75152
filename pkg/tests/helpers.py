"""Independent oracles used by the test-suite (kept apart from the code they check)."""

import itertools
from fractions import Fraction

import numpy as np

from montygame.model import DoorDistribution, GameModel, PlayerStrategy, TeamStrategy


def brute_player_pure(n, k):
    """Every (pick, final-door map) built from unrestricted products, then filtered and deduplicated."""
    doors = range(1, n + 1)
    out = set()
    for p in doors:
        obs = [o for o in itertools.combinations(doors, k) if p not in o]
        for finals in itertools.product(doors, repeat=len(obs)):
            if all(f not in o for o, f in zip(obs, finals)):
                out.add((p, tuple(zip(obs, finals))))
    return out


def brute_team_pure(n, k):
    doors = range(1, n + 1)
    subsets = list(itertools.combinations(doors, k))
    out = set()
    for c in doors:
        for g in itertools.product(subsets, repeat=n):
            if all(c not in o and p not in o for p, o in zip(doors, g)):
                out.add((c, g))
    return out


def relabel(model: GameModel, perm: dict) -> GameModel:
    """Rename every door ``d`` to ``perm[d]`` throughout the model."""
    n = model.config.n_doors

    def dist(d):
        w = [0.0] * n
        for door, x in enumerate(d.weights, start=1):
            w[perm[door] - 1] = x
        return DoorDistribution(tuple(w))

    def rset(o):
        return tuple(sorted(perm[d] for d in o))

    open_rule = {
        (perm[c], perm[p]): {rset(o): m for o, m in cell.items()} for (c, p), cell in model.team.open_rule.items()
    }
    final = {
        (perm[p], rset(o)): {perm[f]: m for f, m in cell.items()} for (p, o), cell in model.player.final_choice.items()
    }
    return GameModel(
        model.config,
        TeamStrategy(dist(model.team.car_placement), open_rule),
        PlayerStrategy(dist(model.player.pick), final),
    )


def hand_bayes_biased(q: Fraction) -> Fraction:
    """Switch-win probability after pick 1, door 3 opened, uniform car, host bias q; by hand.

    Likelihood of seeing door 3 opened: car 1 -> q, car 2 -> 1, car 3 -> 0.
    """
    prior = [Fraction(1, 3)] * 3
    like = [q, Fraction(1), Fraction(0)]
    joint = [a * b for a, b in zip(prior, like)]
    return joint[1] / sum(joint)


def fictitious_play(A, iterations=20000):
    """Brown's fictitious play; returns (lower, upper) bounds that bracket the game value."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    row_counts = np.zeros(m)
    col_counts = np.zeros(n)
    row_payoff = np.zeros(m)  # cumulative payoff of each row against the column history
    col_payoff = np.zeros(n)  # cumulative payoff of each column against the row history
    i, j = 0, 0
    for _ in range(iterations):
        row_counts[i] += 1
        col_counts[j] += 1
        row_payoff += A[:, j]
        col_payoff += A[i, :]
        i = int(np.argmax(row_payoff))
        j = int(np.argmin(col_payoff))
    t = iterations
    return col_payoff.min() / t, row_payoff.max() / t


# pass/fail lines collected by test_acceptance.py and printed by conftest.py
ACCEPTANCE_RESULTS = []
