"""Exact, game-theoretic and Monte Carlo analysis of the three-doors (Monty Hall) game."""

from .model import (
    DoorDistribution,
    GameConfig,
    GameModel,
    PlayerStrategy,
    PurePlayerStrategy,
    PureTeamStrategy,
    TeamStrategy,
    enumerate_player_pure,
    enumerate_team_pure,
    make_preset,
    validate_model,
)
from .exact import (
    bayes_posterior_from_odds,
    conditional_win_prob,
    joint_distribution,
    posterior_car_distribution,
    symmetry_conditionals,
    unconditional_win_prob,
)
from .solver import (
    MinimaxSolver,
    MixedStrategy,
    best_response,
    build_payoff_matrix,
    conditional_lower_bound_sweep,
    security_level,
    solve_minimax,
)
from .simulate import MonteCarloSimulator, compare_exact, simulate

__version__ = "0.1.0"
