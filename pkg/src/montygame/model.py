"""Game configuration, strategies of both sides, presets and pure-strategy enumeration.

Doors are numbered ``1..N``. The host opens a set of ``k`` goat doors at once,
so an observation is the pair ``(p, O)`` of the player's pick and the sorted
tuple of opened doors. The player then names a final door ``f`` that is not in
``O``; ``f == p`` means stay.

The car location ``C`` and the pick ``P`` are independent by construction:
each side owns its own marginal and there is no way to couple them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Tuple

import numpy as np

from .validation import (
    INPUT_TOL,
    EnumerationCapError,
    InvalidModelError,
    check_door,
    check_unit_interval,
    distribution_issues,
)

DoorSet = Tuple[int, ...]
OpenRule = Dict[Tuple[int, int], Dict[DoorSet, float]]
FinalChoice = Dict[Tuple[int, DoorSet], Dict[int, float]]

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class GameConfig:
    """Number of doors and number of goat doors the host opens."""

    n_doors: int = 3
    k_opened: int = 1

    def __post_init__(self):
        if self.n_doors < 3:
            raise ValueError(f"need at least 3 doors, got {self.n_doors}")
        if not 1 <= self.k_opened <= self.n_doors - 2:
            raise ValueError(
                f"k_opened must lie in 1..{self.n_doors - 2} for {self.n_doors} doors, got {self.k_opened}"
            )

    @property
    def doors(self) -> range:
        return range(1, self.n_doors + 1)

    def open_sets(self, car: int, pick: int) -> list[DoorSet]:
        """Sets the host may legally open when the car is at ``car`` and the pick is ``pick``."""
        avail = [d for d in self.doors if d != car and d != pick]
        return list(itertools.combinations(avail, self.k_opened))

    def observation_sets(self, pick: int) -> list[DoorSet]:
        """All opened sets the player can see after picking ``pick``, in lexicographic order."""
        avail = [d for d in self.doors if d != pick]
        return list(itertools.combinations(avail, self.k_opened))

    def final_doors(self, opened: DoorSet) -> list[int]:
        return [d for d in self.doors if d not in opened]

    def observations(self) -> list[tuple[int, DoorSet]]:
        return [(p, o) for p in self.doors for o in self.observation_sets(p)]


@dataclass(frozen=True)
class DoorDistribution:
    """Probability weights over doors ``1..N`` (index 0 holds door 1)."""

    weights: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @classmethod
    def uniform(cls, n_doors: int) -> "DoorDistribution":
        return cls((1.0 / n_doors,) * n_doors)

    @classmethod
    def point(cls, n_doors: int, door: int) -> "DoorDistribution":
        check_door(door, n_doors)
        return cls(tuple(1.0 if d == door else 0.0 for d in range(1, n_doors + 1)))

    @property
    def n_doors(self) -> int:
        return len(self.weights)

    def prob(self, door: int) -> float:
        return self.weights[door - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)

    def support(self) -> list[int]:
        return [d for d, w in enumerate(self.weights, start=1) if w > 0]


def _uniform(keys) -> dict:
    keys = list(keys)
    return {key: 1.0 / len(keys) for key in keys}


@dataclass(frozen=True)
class TeamStrategy:
    """Car placement plus the host's rule ``open_rule[(c, p)] = {O: prob}``."""

    car_placement: DoorDistribution
    open_rule: OpenRule = field(hash=False)

    @classmethod
    def build(cls, config: GameConfig, car_placement: DoorDistribution, open_rule: Mapping | None = None):
        """Fill every ``(c, p)`` cell missing from ``open_rule`` with the uniform legal rule."""
        rule = {cell: dict(dist) for cell, dist in (open_rule or {}).items()}
        for c in config.doors:
            for p in config.doors:
                if (c, p) not in rule:
                    rule[(c, p)] = _uniform(config.open_sets(c, p))
        return cls(car_placement, rule)

    def open_prob(self, opened: DoorSet, car: int, pick: int) -> float:
        return self.open_rule.get((car, pick), {}).get(opened, 0.0)


@dataclass(frozen=True)
class PlayerStrategy:
    """Pick distribution plus ``final_choice[(p, O)] = {f: prob}``."""

    pick: DoorDistribution
    final_choice: FinalChoice = field(hash=False)

    @classmethod
    def build(cls, config: GameConfig, pick: DoorDistribution, final_choice: Mapping | None = None):
        """Fill every ``(p, O)`` cell missing from ``final_choice`` with the uniform legal rule."""
        rule = {cell: dict(dist) for cell, dist in (final_choice or {}).items()}
        for p, o in config.observations():
            if (p, o) not in rule:
                rule[(p, o)] = _uniform(config.final_doors(o))
        return cls(pick, rule)

    def choice_prob(self, final: int, pick: int, opened: DoorSet) -> float:
        return self.final_choice.get((pick, opened), {}).get(final, 0.0)


def always_switch(config: GameConfig) -> FinalChoice:
    """Move to a uniformly chosen unopened door other than the pick.

    With ``k = N - 2`` (in particular the three-door game) the target is unique.
    """
    rule = {}
    for p, o in config.observations():
        targets = [d for d in config.final_doors(o) if d != p]
        rule[(p, o)] = _uniform(targets)
    return rule


def always_stay(config: GameConfig) -> FinalChoice:
    return {(p, o): {p: 1.0} for p, o in config.observations()}


@dataclass(frozen=True)
class GameModel:
    config: GameConfig
    team: TeamStrategy
    player: PlayerStrategy

    def with_player(self, player: PlayerStrategy) -> "GameModel":
        return replace(self, player=player)

    def with_team(self, team: TeamStrategy) -> "GameModel":
        return replace(self, team=team)


@dataclass(frozen=True)
class ValidationReport:
    issues: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "pass" if self.ok else "fail:\n  " + "\n  ".join(self.issues)


def _cell_issues(dist: Mapping, name: str, tol: float) -> list[str]:
    total = math.fsum(dist.values())
    issues = []
    if any(v < 0 for v in dist.values()):
        issues.append(f"{name}: negative probability")
    if abs(total - 1.0) > tol:
        issues.append(f"{name}: normalization error, sums to {total:.12g}")
    return issues


def _obs_label(p: int, o) -> str:
    return f"(p,O)=({p},{'+'.join(map(str, o))})"


def validate_model(model: GameModel, tol: float = INPUT_TOL) -> ValidationReport:
    """Check every invariant of ``model`` and report all violations found.

    Never raises for a malformed model; problems are collected into the report.
    """
    cfg = model.config
    n, k = cfg.n_doors, cfg.k_opened
    issues: list[str] = []

    for name, dist in (("car_placement", model.team.car_placement), ("pick", model.player.pick)):
        if dist.n_doors != n:
            issues.append(f"{name}: has {dist.n_doors} weights, expected {n}")
        else:
            issues.extend(distribution_issues(dist.weights, name, tol))

    rule = model.team.open_rule
    for c in cfg.doors:
        for p in cfg.doors:
            cell = rule.get((c, p))
            if cell is None:
                issues.append(f"open_rule: missing cell (c,p)=({c},{p})")
                continue
            where = f"(c,p)=({c},{p})"
            for o, mass in cell.items():
                if mass <= 0:
                    continue
                o = tuple(o)
                if len(o) != k or len(set(o)) != k or min(o) < 1 or max(o) > n:
                    issues.append(f"open_rule: illegal door set {o} at {where}")
                    continue
                if c in o:
                    issues.append(f"host reveals car at {where}: opens {o}")
                if p in o:
                    issues.append(f"host opens player's pick at {where}: opens {o}")
            issues.extend(_cell_issues(cell, f"open_rule {where}", tol))
    extra = set(rule) - {(c, p) for c in cfg.doors for p in cfg.doors}
    if extra:
        issues.append(f"open_rule: cells outside the game {sorted(extra)}")

    choice = model.player.final_choice
    for p, o in cfg.observations():
        cell = choice.get((p, o))
        if cell is None:
            issues.append(f"final_choice: missing cell {_obs_label(p, o)}")
            continue
        for f, mass in cell.items():
            if mass <= 0:
                continue
            if not 1 <= f <= n:
                issues.append(f"final_choice: door {f} out of range at {_obs_label(p, o)}")
            elif f in o:
                issues.append(f"final door {f} is already opened at {_obs_label(p, o)}")
        for issue in _cell_issues(cell, "final_choice", tol):
            issues.append(f"{issue} at {_obs_label(p, o)}")

    return ValidationReport(tuple(issues))


def ensure_valid(model: GameModel) -> GameModel:
    report = validate_model(model)
    if not report.ok:
        raise InvalidModelError(report.issues)
    return model


PRESETS = {
    "classic-symmetric": "3 doors, uniform car and pick, host tosses a fair coin, player always switches",
    "host-biased": "classic, but with the car behind the pick the host opens the higher door with prob q",
    "hundred-doors": "N doors (default 100), host opens N-2 goat doors uniformly, player always switches",
    "fixed-pick": "classic, but the player always picks door 1",
}

PRESET_PARAMS = {
    "classic-symmetric": {},
    "host-biased": {"q": 0.5},
    "hundred-doors": {"n_doors": 100},
    "fixed-pick": {"door": 1},
}


def _biased_rule(q: float) -> OpenRule:
    rule = {}
    for c in (1, 2, 3):
        low, high = (d for d in (1, 2, 3) if d != c)
        rule[(c, c)] = {(low,): 1.0 - q, (high,): q}
    return rule


def make_preset(name: str, **params) -> GameModel:
    """Build one of the named models listed in ``PRESETS``."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    unknown = set(params) - set(PRESET_PARAMS[name])
    if unknown:
        raise ValueError(f"preset {name!r} does not take parameter(s) {sorted(unknown)}")

    if name == "hundred-doors":
        n = int(params.get("n_doors", 100))
        cfg = GameConfig(n, n - 2)
    else:
        cfg = GameConfig(3, 1)

    car = DoorDistribution.uniform(cfg.n_doors)
    pick = DoorDistribution.uniform(cfg.n_doors)
    rule = None
    if name == "host-biased":
        rule = _biased_rule(check_unit_interval(params.get("q", 0.5), "q"))
    elif name == "fixed-pick":
        pick = DoorDistribution.point(3, check_door(params.get("door", 1), 3))

    team = TeamStrategy.build(cfg, car, rule)
    player = PlayerStrategy.build(cfg, pick, always_switch(cfg))
    return GameModel(cfg, team, player)


def random_model(config: GameConfig, rng: np.random.Generator, sparsity: float = 0.3) -> GameModel:
    """Draw a valid model with random Dirichlet weights; some entries are zeroed at random."""

    def weights(m):
        w = rng.dirichlet(np.ones(m))
        if m > 1:
            w[rng.random(m) < sparsity] = 0.0
        if w.sum() == 0:
            w[rng.integers(m)] = 1.0
        return w / w.sum()

    car = DoorDistribution(tuple(weights(config.n_doors)))
    pick = DoorDistribution(tuple(weights(config.n_doors)))
    rule = {}
    for c in config.doors:
        for p in config.doors:
            sets = config.open_sets(c, p)
            rule[(c, p)] = dict(zip(sets, weights(len(sets)).tolist()))
    choice = {}
    for p, o in config.observations():
        fs = config.final_doors(o)
        choice[(p, o)] = dict(zip(fs, weights(len(fs)).tolist()))
    return GameModel(config, TeamStrategy(car, rule), PlayerStrategy(pick, choice))


# ---------------------------------------------------------------------------
# pure strategies


@dataclass(frozen=True, order=True)
class PurePlayerStrategy:
    """Deterministic pick ``p`` and final door ``f_map[O]`` for every observable ``O``."""

    p: int
    f_map: Tuple[Tuple[DoorSet, int], ...]

    def final(self, opened: DoorSet) -> int:
        return dict(self.f_map)[opened]

    def is_always_switch(self) -> bool:
        return all(f != self.p for _, f in self.f_map)

    def is_always_stay(self) -> bool:
        return all(f == self.p for _, f in self.f_map)

    def stay_fraction(self) -> float:
        return sum(f == self.p for _, f in self.f_map) / len(self.f_map)

    def to_behavioral(self, config: GameConfig) -> PlayerStrategy:
        cells = {(self.p, o): {f: 1.0} for o, f in self.f_map}
        return PlayerStrategy.build(config, DoorDistribution.point(config.n_doors, self.p), cells)

    def label(self) -> str:
        moves = ",".join(f"{'+'.join(map(str, o))}->{f}" for o, f in self.f_map)
        return f"pick {self.p}; {moves}"


@dataclass(frozen=True, order=True)
class PureTeamStrategy:
    """Deterministic car door ``c`` and opened set ``g_map[p - 1]`` for every pick ``p``."""

    c: int
    g_map: Tuple[DoorSet, ...]

    def opened(self, pick: int) -> DoorSet:
        return self.g_map[pick - 1]

    def to_behavioral(self, config: GameConfig) -> TeamStrategy:
        cells = {(self.c, p): {o: 1.0} for p, o in enumerate(self.g_map, start=1)}
        return TeamStrategy.build(config, DoorDistribution.point(config.n_doors, self.c), cells)

    def label(self) -> str:
        moves = ",".join(f"{p}->{'+'.join(map(str, o))}" for p, o in enumerate(self.g_map, start=1))
        return f"car {self.c}; {moves}"


def count_player_pure(config: GameConfig) -> int:
    n, k = config.n_doors, config.k_opened
    return n * (n - k) ** math.comb(n - 1, k)


def count_team_pure(config: GameConfig) -> int:
    n, k = config.n_doors, config.k_opened
    return n * math.comb(n - 1, k) * math.comb(n - 2, k) ** (n - 1)


def enumerate_player_pure(config: GameConfig, cap: int = DEFAULT_ENUMERATION_CAP) -> list[PurePlayerStrategy]:
    """All pure player strategies in lexicographic order of ``(p, final doors)``."""
    count = count_player_pure(config)
    if count > cap:
        raise EnumerationCapError("player", count, cap)
    out = []
    for p in config.doors:
        sets = config.observation_sets(p)
        for finals in itertools.product(*(config.final_doors(o) for o in sets)):
            out.append(PurePlayerStrategy(p, tuple(zip(sets, finals))))
    return out


def enumerate_team_pure(config: GameConfig, cap: int = DEFAULT_ENUMERATION_CAP) -> list[PureTeamStrategy]:
    """All pure team strategies in lexicographic order of ``(c, opened sets by pick)``."""
    count = count_team_pure(config)
    if count > cap:
        raise EnumerationCapError("team", count, cap)
    out = []
    for c in config.doors:
        for g in itertools.product(*(config.open_sets(c, p) for p in config.doors)):
            out.append(PureTeamStrategy(c, tuple(g)))
    return out
