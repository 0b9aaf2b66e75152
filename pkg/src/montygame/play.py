"""Interactive three-door game for the terminal.

The team side (car placement and host) is driven by a seeded stream; the
user supplies picks and stay/switch decisions line by line. Input and output
streams are injectable so sessions can be scripted.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

from .model import GameConfig, TeamStrategy, make_preset
from .simulate import check_seed

EXACT = {"stay": 1 / 3, "switch": 2 / 3}


class _Uniforms:
    def __init__(self, seed: int):
        self._bitgen = np.random.PCG64(np.random.SeedSequence(seed))

    def __call__(self) -> float:
        return (int(self._bitgen.random_raw()) >> 11) * 2.0**-53


def _draw(dist: dict, u: float):
    items = sorted((k, w) for k, w in dist.items() if w > 0)
    acc = 0.0
    for key, w in items:
        acc += w
        if u < acc:
            return key
    return items[-1][0]


@dataclass
class Tally:
    plays: int = 0
    wins: int = 0

    @property
    def frequency(self) -> float | None:
        return self.wins / self.plays if self.plays else None


@dataclass
class SessionSummary:
    seed: int
    host_bias: float
    tallies: dict = field(default_factory=lambda: {"stay": Tally(), "switch": Tally()})

    @property
    def plays(self) -> int:
        return sum(t.plays for t in self.tallies.values())

    def to_dict(self) -> dict:
        return {
            "schema": "montygame/play/v1",
            "seed": self.seed,
            "host_bias": self.host_bias,
            "plays": self.plays,
            "tallies": {
                k: {"plays": t.plays, "wins": t.wins, "frequency": t.frequency, "exact": EXACT[k]}
                for k, t in self.tallies.items()
            },
        }


class PlaySession:
    """Read-prompt loop over repeated plays of the classic game."""

    def __init__(self, seed: int = 0, host_bias: float = 0.5, team: TeamStrategy | None = None,
                 stdin=None, stdout=None):
        self.config = GameConfig(3, 1)
        self.team = team or make_preset("host-biased", q=host_bias).team
        self.uniform = _Uniforms(check_seed(seed))
        self.stdin = stdin or sys.stdin
        self.stdout = stdout or sys.stdout
        self.summary = SessionSummary(seed, host_bias)

    def _say(self, text: str = "") -> None:
        print(text, file=self.stdout)

    def _ask(self, prompt: str, parse):
        """Prompt until ``parse`` accepts the answer; ``None`` on EOF or quit."""
        while True:
            self.stdout.write(prompt)
            self.stdout.flush()
            line = self.stdin.readline()
            if not line:
                self._say()
                return None
            answer = line.strip().lower()
            if answer in ("q", "quit", "exit"):
                return None
            value = parse(answer)
            if value is not None:
                return value
            self._say(f"  not understood: {line.strip()!r}")

    @staticmethod
    def _door(answer: str):
        return int(answer) if answer in ("1", "2", "3") else None

    @staticmethod
    def _decision(answer: str):
        if answer in ("s", "stay", "k", "keep"):
            return "stay"
        if answer in ("w", "sw", "switch"):
            return "switch"
        return None

    def play_round(self) -> bool:
        """Play one round; returns False when the user ends the session."""
        car = _draw(dict(enumerate(self.team.car_placement.weights, start=1)), self.uniform())
        pick = self._ask("Pick a door [1-3]: ", self._door)
        if pick is None:
            return False
        (opened,) = _draw(self.team.open_rule[(car, pick)], self.uniform())
        (other,) = {1, 2, 3} - {pick, opened}
        self._say(f"The host opens door {opened}: a goat.")
        decision = self._ask(f"Stay with door {pick} or switch to door {other}? [stay/switch]: ", self._decision)
        if decision is None:
            return False
        final = pick if decision == "stay" else other
        won = final == car
        tally = self.summary.tallies[decision]
        tally.plays += 1
        tally.wins += won
        self._say(f"The car was behind door {car}. You {'WIN' if won else 'lose'}.")
        self._say(self.running_line())
        return True

    def running_line(self) -> str:
        parts = []
        for name, t in self.summary.tallies.items():
            freq = "-" if t.frequency is None else f"{t.frequency:.3f}"
            parts.append(f"{name}: {t.wins}/{t.plays} = {freq} (exact {EXACT[name]:.4f})")
        return "  " + " | ".join(parts)

    def run(self) -> SessionSummary:
        self._say("Three doors: one car, two goats. The host always opens a goat door. Ctrl-D or 'q' to stop.")
        while self.play_round():
            pass
        return self.summary
