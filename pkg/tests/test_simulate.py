import numpy as np
import pytest
from sklearn.base import clone

from montygame.model import DoorDistribution, GameConfig, PlayerStrategy, TeamStrategy, always_stay, make_preset
from montygame.simulate import MonteCarloSimulator, compare_exact, simulate


@pytest.fixture
def sure_win():
    cfg = GameConfig()
    team = TeamStrategy.build(cfg, DoorDistribution.point(3, 1))
    return make_preset("classic-symmetric").with_team(team).with_player(
        PlayerStrategy(DoorDistribution.point(3, 1), always_stay(cfg))
    )


def test_classic_estimate(classic):
    res = simulate(classic, 100_000, 12345)
    assert abs(res.estimate - 2 / 3) <= 4 * res.std_error
    assert res.estimate == res.wins / res.n_plays
    assert res.std_error == pytest.approx(np.sqrt(res.estimate * (1 - res.estimate) / res.n_plays))
    assert sum(p for p, _ in res.tallies.values()) == res.n_plays
    assert sum(w for _, w in res.tallies.values()) == res.wins
    assert "PCG64" in res.generator


def test_deterministic_model(sure_win):
    res = simulate(sure_win, 1000, 3)
    assert res.estimate == 1.0 and res.std_error == 0.0
    assert set(res.tallies) == {(1, (2,)), (1, (3,))}
    assert all(p == w for p, w in res.tallies.values())


def test_same_seed_same_result(classic):
    a, b = simulate(classic, 20_000, 99), simulate(classic, 20_000, 99)
    assert a == b
    assert a.tallies == b.tallies
    assert simulate(classic, 20_000, 100).tallies != a.tallies


def test_prefix_stability(classic):
    # play i only depends on raw draws 4i..4i+3, so a shorter run is a prefix of a longer one
    short, long = simulate(classic, 1000, 5), simulate(classic, 1001, 5)
    assert long.wins - short.wins in (0, 1)


def test_fixed_pick_only_reaches_door_one():
    res = simulate(make_preset("fixed-pick"), 5000, 1)
    assert {p for p, _ in res.tallies} == {1}


def test_sharded_runs(classic):
    a = simulate(classic, 30_001, 8, n_shards=4)
    b = simulate(classic, 30_001, 8, n_shards=4, max_workers=4)
    assert a == b
    assert a.n_plays == 30_001 and a.n_shards == 4
    assert sum(p for p, _ in a.tallies.values()) == a.n_plays
    assert sum(w for _, w in a.tallies.values()) == a.wins
    assert abs(a.estimate - 2 / 3) <= 4 * a.std_error


def test_hundred_doors():
    res = simulate(make_preset("hundred-doors"), 100_000, 7)
    assert abs(res.estimate - 0.99) <= 4 * res.std_error


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_bad_n(classic, n):
    with pytest.raises(ValueError):
        simulate(classic, n, 1)


@pytest.mark.parametrize("seed", [-1, 2**64, "7", 1.0])
def test_bad_seed(classic, seed):
    with pytest.raises(ValueError):
        simulate(classic, 10, seed)


class TestCompare:
    def test_classic_clear(self, classic):
        report = compare_exact(classic, 1_000_000, 2024)
        assert not report.any_flag
        assert len(report.observations) == 6
        assert all(abs(r.z) <= 4 for r in report.observations)

    def test_biased_host_conditional(self, biased):
        report = compare_exact(biased(1.0), 200_000, 4)
        row = next(r for r in report.observations if r.observation == (1, (3,)))
        assert row.exact == pytest.approx(0.5)
        assert abs(row.empirical - 0.5) < 0.02

    def test_single_play(self, classic):
        report = compare_exact(classic, 1, 0)
        assert report.overall.low_sample and not report.overall.flagged
        assert np.isfinite(report.overall.z)

    def test_deterministic_model_has_zero_z(self, sure_win):
        report = compare_exact(sure_win, 100, 0)
        assert report.overall.z == 0.0 and not report.any_flag

    def test_wrong_engine_value_is_flagged(self, classic, monkeypatch):
        import importlib

        sim = importlib.import_module("montygame.simulate")

        monkeypatch.setattr(sim, "unconditional_win_prob", lambda m: 0.5)
        assert compare_exact(classic, 100_000, 1).overall.flagged


class TestEstimator:
    def test_fit_and_score(self, classic):
        est = MonteCarloSimulator(n_plays=50_000, seed=3).fit(classic)
        assert est.result_ == simulate(classic, 50_000, 3)
        assert est.score(classic) >= -4

    def test_clone(self):
        est = MonteCarloSimulator(n_plays=10, seed=4, n_shards=2)
        assert clone(est).get_params() == {"n_plays": 10, "seed": 4, "n_shards": 2}
