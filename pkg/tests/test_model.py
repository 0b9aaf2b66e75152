import json
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_player_pure, brute_team_pure
from montygame.model import (
    DoorDistribution,
    GameConfig,
    GameModel,
    PlayerStrategy,
    TeamStrategy,
    always_stay,
    count_player_pure,
    count_team_pure,
    enumerate_player_pure,
    enumerate_team_pure,
    make_preset,
    random_model,
    validate_model,
)
from montygame.modelfile import load_model, load_schema, model_from_dict, model_to_dict, save_model
from montygame.validation import EnumerationCapError

SMALL_CONFIGS = [(n, k) for n in (3, 4, 5) for k in range(1, n - 1)]


class TestGameConfig:
    @pytest.mark.parametrize("n,k", [(2, 1), (3, 0), (3, 2), (5, 4)])
    def test_rejects_bad_config(self, n, k):
        with pytest.raises(ValueError):
            GameConfig(n, k)

    def test_open_sets_avoid_car_and_pick(self):
        cfg = GameConfig(5, 2)
        for c in cfg.doors:
            for p in cfg.doors:
                sets = cfg.open_sets(c, p)
                assert sets and all(c not in o and p not in o and len(o) == 2 for o in sets)
                assert len(sets) == math.comb(5 - (1 if c == p else 2), 2)


class TestValidate:
    def test_classic_passes(self, classic):
        assert validate_model(classic).ok
        assert str(validate_model(classic)) == "pass"

    def test_host_revealing_car_is_reported(self, classic):
        rule = dict(classic.team.open_rule)
        rule[(1, 1)] = {(1,): 0.5, (2,): 0.5}
        rule[(2, 1)] = {(2,): 1.0}
        bad = classic.with_team(TeamStrategy(classic.team.car_placement, rule))
        report = validate_model(bad)
        assert not report.ok
        assert any("host reveals car at (c,p)=(2,1)" in i for i in report.issues)
        assert any("pick at (c,p)=(1,1)" in i for i in report.issues)

    def test_unnormalized_car_placement(self, classic):
        bad = classic.with_team(TeamStrategy(DoorDistribution((0.5, 0.5, 0.1)), classic.team.open_rule))
        report = validate_model(bad)
        assert not report.ok
        assert any("car_placement" in i and "normalization" in i for i in report.issues)

    def test_final_door_in_opened_set(self, classic):
        choice = dict(classic.player.final_choice)
        choice[(1, (3,))] = {3: 1.0}
        report = validate_model(classic.with_player(PlayerStrategy(classic.player.pick, choice)))
        assert report.issues == ("final door 3 is already opened at (p,O)=(1,3)",)

    def test_missing_cells_reported(self):
        cfg = GameConfig()
        model = GameModel(cfg, TeamStrategy(DoorDistribution.uniform(3), {}), PlayerStrategy(DoorDistribution.uniform(3), {}))
        report = validate_model(model)
        assert sum("missing cell" in i for i in report.issues) == 9 + 6

    def test_wrong_dimension(self, classic):
        bad = classic.with_player(PlayerStrategy(DoorDistribution.uniform(4), classic.player.final_choice))
        assert any("expected 3" in i for i in validate_model(bad).issues)


class TestPresets:
    def test_classic_tie_break_is_fair(self, classic):
        assert classic.team.open_rule[(1, 1)] == {(2,): 0.5, (3,): 0.5}
        assert classic.team.open_rule[(1, 2)] == {(3,): 1.0}

    def test_host_biased_half_equals_classic(self, classic):
        assert make_preset("host-biased", q=0.5) == classic
        assert make_preset("host-biased", q=0.5).team.open_rule == classic.team.open_rule

    def test_host_biased_favours_higher_door(self):
        m = make_preset("host-biased", q=0.9)
        assert m.team.open_rule[(1, 1)] == {(2,): pytest.approx(0.1), (3,): 0.9}
        assert m.team.open_rule[(3, 3)] == {(1,): pytest.approx(0.1), (2,): 0.9}

    def test_hundred_doors(self):
        m = make_preset("hundred-doors", n_doors=100)
        assert (m.config.n_doors, m.config.k_opened) == (100, 98)
        assert validate_model(m).ok

    def test_fixed_pick(self):
        m = make_preset("fixed-pick")
        assert m.player.pick.weights == (1.0, 0.0, 0.0)

    @pytest.mark.parametrize("name", ["classic-symmetric", "host-biased", "hundred-doors", "fixed-pick"])
    def test_every_preset_validates(self, name):
        assert validate_model(make_preset(name)).ok

    def test_errors(self):
        with pytest.raises(ValueError, match="unknown preset"):
            make_preset("monty-crawl")
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            make_preset("host-biased", q=1.5)
        with pytest.raises(ValueError, match="does not take"):
            make_preset("classic-symmetric", q=0.3)


class TestEnumeration:
    def test_three_doors_player(self):
        strategies = enumerate_player_pure(GameConfig(3, 1))
        assert len(strategies) == 12 == len(set(strategies))
        stay = [s for s in strategies if s.p == 1 and s.is_always_stay()]
        assert len(stay) == 1
        assert stay[0].final((2,)) == 1 and stay[0].final((3,)) == 1

    def test_three_doors_team(self):
        strategies = enumerate_team_pure(GameConfig(3, 1))
        assert len(strategies) == 6
        labels = {(s.c, s.g_map) for s in strategies}
        assert (1, ((2,), (3,), (2,))) in labels

    def test_four_two_and_four_one(self):
        assert len(enumerate_player_pure(GameConfig(4, 2))) == 32
        assert len(enumerate_team_pure(GameConfig(4, 1))) == 96

    @pytest.mark.parametrize("n,k", SMALL_CONFIGS)
    def test_counts_match_brute_force(self, n, k):
        cfg = GameConfig(n, k)
        brute_team = brute_team_pure(n, k)
        team = enumerate_team_pure(cfg)
        assert len(team) == count_team_pure(cfg) == len(brute_team)
        assert {(s.c, s.g_map) for s in team} == brute_team
        if count_player_pure(cfg) <= 10**5:
            brute_player = brute_player_pure(n, k)
            player = enumerate_player_pure(cfg)
            assert len(player) == count_player_pure(cfg) == len(brute_player)
            assert {(s.p, s.f_map) for s in player} == brute_player

    def test_lexicographic_order(self):
        strategies = enumerate_player_pure(GameConfig(4, 1))
        assert strategies == sorted(strategies)

    def test_cap(self):
        with pytest.raises(EnumerationCapError) as err:
            enumerate_player_pure(GameConfig(5, 1), cap=1000)
        assert err.value.count == 5 * 4**4

    @pytest.mark.parametrize("n,k", [(3, 1), (4, 1), (4, 2)])
    def test_embeddings_are_valid(self, n, k):
        cfg = GameConfig(n, k)
        car = DoorDistribution.uniform(n)
        for s in enumerate_player_pure(cfg)[:: max(1, count_player_pure(cfg) // 20)]:
            team = TeamStrategy.build(cfg, car)
            assert validate_model(GameModel(cfg, team, s.to_behavioral(cfg))).ok
        for s in enumerate_team_pure(cfg)[:: max(1, count_team_pure(cfg) // 20)]:
            player = PlayerStrategy.build(cfg, car, always_stay(cfg))
            assert validate_model(GameModel(cfg, s.to_behavioral(cfg), player)).ok


@st.composite
def models(draw):
    n, k = draw(st.sampled_from(SMALL_CONFIGS))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_model(GameConfig(n, k), np.random.default_rng(seed))


@settings(max_examples=200, deadline=None)
@given(models())
def test_random_models_are_valid(model):
    report = validate_model(model)
    assert report.ok, report.issues
    for (c, p), cell in model.team.open_rule.items():
        assert all(c not in o and p not in o for o, m in cell.items() if m > 0)


class TestModelFile:
    def test_round_trip(self, tmp_path, biased):
        model = biased(0.3)
        path = tmp_path / "m.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        jsonschema.validate(doc, load_schema("model"))
        assert load_model(path) == model
        assert load_model(path).team.open_rule == model.team.open_rule

    def test_omitted_cells_default_to_uniform(self, classic):
        doc = {"n_doors": 3, "k_opened": 1, "car_placement": [1 / 3] * 3, "pick": [1 / 3] * 3,
               "final_choice": {"1|2": {"3": 1}, "1|3": {"2": 1}}}
        model = model_from_dict(doc)
        assert model.team.open_rule == classic.team.open_rule
        assert model.player.final_choice[(2, (1,))] == {2: 0.5, 3: 0.5}
        assert validate_model(model).ok

    def test_multi_door_sets(self):
        m = make_preset("hundred-doors", n_doors=5)
        doc = model_to_dict(m)
        assert "1|2+3+4" in doc["final_choice"]
        assert model_from_dict(doc).player.final_choice == m.player.final_choice

    def test_schema_rejects_garbage(self):
        with pytest.raises(jsonschema.ValidationError):
            model_from_dict({"n_doors": 3, "k_opened": 1, "car_placement": [1, 0, 0], "pick": [1, 0, 0], "colour": "red"})

    def test_semantic_errors_left_to_validation(self):
        doc = {"n_doors": 3, "k_opened": 1, "car_placement": [0.5, 0.5, 0.1], "pick": [1, 0, 0]}
        assert not validate_model(model_from_dict(doc)).ok
