"""Reading and writing game models as JSON documents.

The layout is described by ``schemas/model.schema.json``. Door sets are
written as doors joined by ``+`` (``"2+3"``); rule cells are keyed ``"c,p"``
for the host and ``"p|O"`` for the player.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema

from .model import DoorDistribution, GameConfig, GameModel, PlayerStrategy, TeamStrategy


def load_schema(name: str) -> dict:
    return json.loads(resources.files("montygame.schemas").joinpath(f"{name}.schema.json").read_text())


def format_door_set(doors) -> str:
    return "+".join(str(d) for d in doors)


def parse_door_set(text: str) -> tuple[int, ...]:
    return tuple(sorted(int(t) for t in str(text).replace(",", "+").split("+") if t.strip()))


def model_to_dict(model: GameModel) -> dict:
    cfg = model.config
    return {
        "n_doors": cfg.n_doors,
        "k_opened": cfg.k_opened,
        "car_placement": list(model.team.car_placement.weights),
        "pick": list(model.player.pick.weights),
        "open_rule": {
            f"{c},{p}": {format_door_set(o): m for o, m in sorted(cell.items())}
            for (c, p), cell in sorted(model.team.open_rule.items())
        },
        "final_choice": {
            f"{p}|{format_door_set(o)}": {str(f): m for f, m in sorted(cell.items())}
            for (p, o), cell in sorted(model.player.final_choice.items())
        },
    }


def model_from_dict(doc: dict) -> GameModel:
    """Build a model from a parsed document; schema violations raise ``jsonschema.ValidationError``.

    Semantic problems (normalization, illegal supports) are left for ``validate_model``.
    """
    jsonschema.validate(doc, load_schema("model"))
    cfg = GameConfig(doc["n_doors"], doc["k_opened"])
    open_rule = {}
    for key, cell in doc.get("open_rule", {}).items():
        c, p = (int(t) for t in key.split(","))
        open_rule[(c, p)] = {parse_door_set(o): float(m) for o, m in cell.items()}
    final_choice = {}
    for key, cell in doc.get("final_choice", {}).items():
        p, o = key.split("|")
        final_choice[(int(p), parse_door_set(o))] = {int(f): float(m) for f, m in cell.items()}
    team = TeamStrategy.build(cfg, DoorDistribution(doc["car_placement"]), open_rule)
    player = PlayerStrategy.build(cfg, DoorDistribution(doc["pick"]), final_choice)
    return GameModel(cfg, team, player)


def load_model(path) -> GameModel:
    return model_from_dict(json.loads(Path(path).read_text()))


def save_model(model: GameModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")
