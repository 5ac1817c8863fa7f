"""Bimatrix games: dictated optima and Nash enumeration.

The dictator fixes a mixed strategy for herself and assigns the opponent an
action; the assignment only has to be a best response for the opponent, so
the dictator may pick profiles she could privately improve on.  The optimum
over such profiles is found with one exact LP per opponent action (pure
assignments suffice: the dictator's payoff is linear on each best-response
region, so some pure-assignment vertex attains the optimum).

Nash equilibria are enumerated by equal-size supports with exact rational
linear algebra.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .equilibrium_core import Constraint, LinearProgram, lp_solve
from .game_model import GameFormatError, format_rational, parse_rational

__all__ = [
    "Bimatrix",
    "MixedProfile",
    "nash_equilibria",
    "parse_bimatrix",
    "political_optimum",
]

_SUPPORT_ENUM_LIMIT = 2**20

Matrix = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class Bimatrix:
    """Payoffs indexed dictator-action-major: ``dictator_payoffs[i][j]``."""

    dictator_actions: tuple[str, ...]
    opponent_actions: tuple[str, ...]
    dictator_payoffs: Matrix
    opponent_payoffs: Matrix

    def __post_init__(self) -> None:
        a, b = len(self.dictator_actions), len(self.opponent_actions)
        if a < 1 or b < 1:
            raise ValueError("both players need at least one action")
        for matrix in (self.dictator_payoffs, self.opponent_payoffs):
            if len(matrix) != a or any(len(row) != b for row in matrix):
                raise ValueError("payoff matrices must be fully populated a x b")


@dataclass(frozen=True)
class MixedProfile:
    """Mixed strategies (aligned with the action tuples) and their payoffs."""

    dictator_strategy: tuple[Fraction, ...]
    opponent_strategy: tuple[Fraction, ...]
    dictator_payoff: Fraction
    opponent_payoff: Fraction

    def __post_init__(self) -> None:
        for dist in (self.dictator_strategy, self.opponent_strategy):
            assert all(p >= 0 for p in dist) and sum(dist) == 1


def parse_bimatrix(text: str) -> Bimatrix:
    """Load the JSON matrix document; "dictator" says which side she plays."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    for key in ("rows", "cols", "A", "B", "dictator"):
        if key not in doc:
            raise GameFormatError(f"missing field {key!r}")
    rows, cols = list(doc["rows"]), list(doc["cols"])
    side = doc["dictator"]
    if side not in ("row", "col"):
        raise GameFormatError('"dictator" must be "row" or "col"')

    def load(matrix) -> Matrix:
        if len(matrix) != len(rows) or any(len(r) != len(cols) for r in matrix):
            raise GameFormatError("matrix shape must be rows x cols")
        return tuple(tuple(parse_rational(x) for x in row) for row in matrix)

    a_matrix, b_matrix = load(doc["A"]), load(doc["B"])
    if side == "row":
        return Bimatrix(tuple(rows), tuple(cols), a_matrix, b_matrix)
    transpose = lambda m: tuple(zip(*m))
    return Bimatrix(tuple(cols), tuple(rows), transpose(b_matrix), transpose(a_matrix))


def _expected(matrix: Matrix, x: Sequence[Fraction], j: int) -> Fraction:
    return sum((x[i] * matrix[i][j] for i in range(len(x))), Fraction(0))


def political_optimum(game: Bimatrix) -> MixedProfile:
    """Best dictated profile: maximise the dictator's payoff over mixtures
    for which the assigned opponent action is a best response (ties go to the
    assigned action)."""
    a = len(game.dictator_actions)
    b = len(game.opponent_actions)
    best: MixedProfile | None = None
    one = Fraction(1)
    for j in range(b):
        constraints = [
            Constraint({("x", i): one for i in range(a)}, "eq", one)
        ]
        constraints += [
            Constraint({("x", i): one}, "ge", Fraction(0)) for i in range(a)
        ]
        for other in range(b):
            if other == j:
                continue
            coeffs = {
                ("x", i): game.opponent_payoffs[i][j] - game.opponent_payoffs[i][other]
                for i in range(a)
            }
            constraints.append(Constraint(coeffs, "ge", Fraction(0)))
        objective = {("x", i): game.dictator_payoffs[i][j] for i in range(a)}
        outcome = lp_solve(
            LinearProgram(
                tuple(("x", i) for i in range(a)), tuple(constraints), objective
            )
        )
        if outcome.status != "optimal":
            continue
        if best is None or outcome.objective_value > best.dictator_payoff:
            x = tuple(outcome.assignment[("x", i)] for i in range(a))
            y = tuple(one if t == j else Fraction(0) for t in range(b))
            profile = MixedProfile(
                x, y, _expected(game.dictator_payoffs, x, j),
                _expected(game.opponent_payoffs, x, j),
            )
            for other in range(b):  # certificate: j really is a best response
                assert profile.opponent_payoff >= _expected(
                    game.opponent_payoffs, x, other
                )
            best = profile
    assert best is not None, "some opponent action is always enforceable"
    return best


def _solve_square(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Exact Gaussian elimination; None when the system is singular."""
    n = len(matrix)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        head = aug[col][col]
        aug[col] = [x / head for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def nash_equilibria(game: Bimatrix) -> list[MixedProfile]:
    """All extreme Nash equilibria found by equal-size support enumeration.

    For each support pair the indifference systems are solved exactly and
    the nonnegativity and best-response inequalities checked.  Degenerate
    games report their equilibrium components via the extreme points that
    square supports produce.
    """
    a = len(game.dictator_actions)
    b = len(game.opponent_actions)
    if 2 ** (a + b) > _SUPPORT_ENUM_LIMIT:
        raise ValueError("game too large for support enumeration")
    zero = Fraction(0)
    found: list[MixedProfile] = []
    seen: set[tuple] = set()
    for size in range(1, min(a, b) + 1):
        for rows in combinations(range(a), size):
            for cols in combinations(range(b), size):
                # Opponent mix y on cols making the dictator indifferent on rows.
                system = [
                    [game.dictator_payoffs[i][j] for j in cols] + [Fraction(-1)]
                    for i in rows
                ]
                system.append([Fraction(1)] * size + [zero])
                solution = _solve_square(system, [zero] * size + [Fraction(1)])
                if solution is None:
                    continue
                y_support, u = solution[:-1], solution[-1]
                system = [
                    [game.opponent_payoffs[i][j] for i in rows] + [Fraction(-1)]
                    for j in cols
                ]
                system.append([Fraction(1)] * size + [zero])
                solution = _solve_square(system, [zero] * size + [Fraction(1)])
                if solution is None:
                    continue
                x_support, v = solution[:-1], solution[-1]
                if any(p < 0 for p in x_support + y_support):
                    continue
                x = [zero] * a
                for i, p in zip(rows, x_support):
                    x[i] = p
                y = [zero] * b
                for j, p in zip(cols, y_support):
                    y[j] = p
                if any(
                    sum(game.dictator_payoffs[i][j] * y[j] for j in range(b)) > u
                    for i in range(a)
                ):
                    continue
                if any(
                    sum(game.opponent_payoffs[i][j] * x[i] for i in range(a)) > v
                    for j in range(b)
                ):
                    continue
                key = (tuple(x), tuple(y))
                if key in seen:
                    continue
                seen.add(key)
                found.append(MixedProfile(tuple(x), tuple(y), u, v))
    return found


def describe_profile(game: Bimatrix, profile: MixedProfile) -> dict:
    """JSON-friendly rendering keyed by action labels (zero entries omitted)."""
    return {
        "dictator": {
            label: format_rational(p)
            for label, p in zip(game.dictator_actions, profile.dictator_strategy)
            if p != 0
        },
        "opponent": {
            label: format_rational(p)
            for label, p in zip(game.opponent_actions, profile.opponent_strategy)
            if p != 0
        },
        "payoffs": [
            format_rational(profile.dictator_payoff),
            format_rational(profile.opponent_payoff),
        ],
    }
