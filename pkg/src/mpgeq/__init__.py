"""Optimal Nash and political equilibria in multi-player mean-payoff games."""

from .bimatrix import Bimatrix, MixedProfile, nash_equilibria, parse_bimatrix, political_optimum
from .enumeration import (
    EquilibriumWitness,
    admissible_region,
    decide,
    exhaustive_optimize,
    optimize,
    search_optimum,
    threshold_vectors,
    validate_witness,
)
from .equilibrium_core import (
    Constraint,
    LinearProgram,
    LpOutcome,
    Mode,
    NASH,
    OWNER_RESTRICTED,
    PAPER_LITERAL,
    POLITICAL,
    RatioProfile,
    build_program,
    derive_thresholds,
    lp_solve,
    solve_region,
)
from .game_model import (
    Game,
    GameFormatError,
    InvalidGameError,
    LassoPlay,
    format_rational,
    lasso_payoff,
    parse_game,
    parse_rational,
    reachable,
    sccs,
    serialize_game,
    validate,
)
from .mpg_values import (
    PunishmentTable,
    brute_force_strategies,
    brute_force_values,
    punishment_strategies,
    punishment_values,
)
from .play_synthesis import (
    Scheduler,
    advance,
    build_schedule,
    measured_means,
    running_means,
    simulate_deviation,
    transfer_fraction,
)
from .reductions import (
    CnfFormula,
    add_social_player,
    lexicographic_optimize,
    make_zero_sum,
    parse_cnf,
    reduce_3sat,
)

__version__ = "0.1.0"
