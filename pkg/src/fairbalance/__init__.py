"""Fair profit division for characteristic-function games.

The nucleolus is computed exactly by sequential min-max linear programs
(:mod:`fairbalance.nucleolus`) and approximately by a relaxation model of
a gravity balance (:mod:`fairbalance.hydraulic`).  Bankruptcy problems
are divided by the Talmud rule (:mod:`fairbalance.bankruptcy`).
"""

from importlib import resources

from .bankruptcy import BankruptcyInstance, bankruptcy_game, cg_rule, plus_part, talmud_division
from .errors import (
    DimensionMismatch,
    DuplicateCoalitionKey,
    EstateExceedsClaims,
    FairBalanceError,
    GameInputError,
    InfeasibleGame,
    InvalidCoalition,
    MaxStepsExceeded,
    MissingGrandCoalition,
    NumericalBreakdown,
    UnsupportedPlayerCount,
)
from .game import (
    CoalitionGame,
    CoalitionId,
    ExcessVector,
    complaint,
    excess_vector,
    game_from_json,
    game_to_json,
    is_efficient,
    is_individually_rational,
    load_game,
    make_game,
    max_complaint,
)
from .hydraulic import SimConfig, SimState, init_state, level_bound_check, run, step
from .lp import LinearProgram, LpSolution, LpStatus, solve_lp
from .nucleolus import NucleolusResult, brute_force_min_max, min_max_lp, nucleolus

__version__ = "0.1.0"


def example_path(name: str):
    """Path to a bundled example game, e.g. ``example_path("taxi.json")``."""
    return resources.files(__package__).joinpath("examples", name)
