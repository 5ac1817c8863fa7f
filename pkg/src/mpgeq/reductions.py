"""Hardness-instance generators and game transformations.

``reduce_3sat`` turns a 3-CNF formula into a mean-payoff game in which the
beneficiary can secure reward 1 exactly when the formula is satisfiable: she
proposes an assignment, walks each clause through one of its literals, and
then cycles a ring that penalises one literal of each variable per lap.  Any
literal player may instead divert the play into an absorbing vertex that pays
everyone but the beneficiary.

``make_zero_sum`` rebalances a {0,1}-reward game to edge sums of zero with
rewards in {-1,1} by adding vertexless makeweight players.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .enumeration import EquilibriumWitness, search_optimum
from .equilibrium_core import Mode
from .game_model import Edge, Game
from .mpg_values import PunishmentTable

__all__ = [
    "CnfFormula",
    "add_social_player",
    "lexicographic_optimize",
    "make_zero_sum",
    "parse_cnf",
    "reduce_3sat",
]


@dataclass(frozen=True)
class CnfFormula:
    """A 3-CNF formula: positive/negative literals as signed variable indices."""

    variable_count: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if self.variable_count < 1:
            raise ValueError("formula needs at least one variable")
        if not self.clauses:
            raise ValueError("formula needs at least one clause")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise ValueError(f"literal {lit} out of range in {clause}")


def parse_cnf(text: str, *, pad: bool = False) -> CnfFormula:
    """Parse a DIMACS CNF document into a 3-CNF formula.

    Clauses shorter than three literals are rejected unless ``pad`` is set,
    in which case they are padded by repeating their first literal.  Longer
    clauses are always rejected.
    """
    variable_count: int | None = None
    clause_count: int | None = None
    tokens: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("p"):
            if variable_count is not None:
                raise ValueError(f"line {lineno}: duplicate problem line")
            parts = stripped.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed problem line {line!r}")
            variable_count, clause_count = int(parts[2]), int(parts[3])
            continue
        if variable_count is None:
            raise ValueError(f"line {lineno}: clause before problem line")
        try:
            tokens.extend(int(tok) for tok in stripped.split())
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad token in {line!r}") from exc
    if variable_count is None:
        raise ValueError("missing problem line")

    clauses: list[tuple[int, int, int]] = []
    current: list[int] = []
    for tok in tokens:
        if tok != 0:
            current.append(tok)
            continue
        if len(current) > 3:
            raise ValueError(f"clause {current} has more than three literals")
        if len(current) < 3:
            if not pad or not current:
                raise ValueError(
                    f"clause {current} does not have exactly three literals"
                )
            current = [current[0]] * (3 - len(current)) + current
        clauses.append((current[0], current[1], current[2]))
        current = []
    if current:
        raise ValueError("unterminated clause (missing trailing 0)")
    if clause_count is not None and len(clauses) != clause_count:
        raise ValueError(
            f"expected {clause_count} clauses, found {len(clauses)}"
        )
    return CnfFormula(variable_count, tuple(clauses))


def _literal_player(lit: int) -> str:
    return f"z{lit}" if lit > 0 else f"nz{-lit}"


def _counter_player(lit: int) -> str:
    return _literal_player(-lit)


def reduce_3sat(formula: CnfFormula) -> Game:
    """Game with 2n+1 players and 5n+4m+2 vertices encoding satisfiability.

    The beneficiary "d" owns a chain of choice vertices; two players per
    variable own the assignment, clause and ring vertices of their literal.
    The political (and Nash) optimum for "d" is 1 when the formula is
    satisfiable and 0 otherwise.
    """
    n = formula.variable_count
    m = len(formula.clauses)
    one = Fraction(1)

    players = ["d"]
    for i in range(1, n + 1):
        players += [f"z{i}", f"nz{i}"]

    vertices: list[tuple[str, str]] = []  # (id, owner)
    edges: list[Edge] = []
    rewards: dict[Edge, dict[str, Fraction]] = {}

    for i in range(n + m + 1):
        vertices.append((f"d{i}", "d"))
    for i in range(1, n + 1):
        vertices.append((f"a_z{i}", f"z{i}"))
        vertices.append((f"a_nz{i}", f"nz{i}"))
    for j, clause in enumerate(formula.clauses, start=1):
        for slot, lit in enumerate(clause, start=1):
            vertices.append((f"c{j}_{slot}", _literal_player(lit)))
    vertices.append(("abs", "d"))
    for i in range(1, n + 1):
        vertices.append((f"w_z{i}", f"z{i}"))
        vertices.append((f"w_nz{i}", f"nz{i}"))

    for i in range(1, n + 1):
        edges.append((f"d{i - 1}", f"a_z{i}"))
        edges.append((f"d{i - 1}", f"a_nz{i}"))
        edges.append((f"a_z{i}", f"d{i}"))
        edges.append((f"a_z{i}", "abs"))
        edges.append((f"a_nz{i}", f"d{i}"))
        edges.append((f"a_nz{i}", "abs"))
    for j in range(1, m + 1):
        for slot in range(1, 4):
            edges.append((f"d{n + j - 1}", f"c{j}_{slot}"))
            edges.append((f"c{j}_{slot}", f"d{n + j}"))
            edges.append((f"c{j}_{slot}", "abs"))
    edges.append((f"d{n + m}", "w_z1"))
    edges.append((f"d{n + m}", "w_nz1"))

    def ring_targets(i: int) -> tuple[str, str]:
        succ = i + 1 if i != n else 1
        return f"w_z{succ}", f"w_nz{succ}"

    for i in range(1, n + 1):
        for polarity, losing in ((f"w_z{i}", f"nz{i}"), (f"w_nz{i}", f"z{i}")):
            payout = {p: one for p in players if p != losing}
            for target in ring_targets(i):
                edge = (polarity, target)
                edges.append(edge)
                rewards[edge] = dict(payout)
    edges.append(("abs", "abs"))
    rewards[("abs", "abs")] = {p: one for p in players if p != "d"}

    game = Game(
        players=tuple(players),
        vertices=tuple(v for v, _ in vertices),
        owner={v: o for v, o in vertices},
        initial="d0",
        edges=tuple(edges),
        rewards=rewards,
    )
    assert len(game.players) == 2 * n + 1
    assert len(game.vertices) == 5 * n + 4 * m + 2
    return game


def make_zero_sum(game: Game) -> Game:
    """Rebalance a {0,1}-reward game into a zero-sum one with rewards in
    {-1,1} by adding just enough vertexless makeweight players."""
    for edge in game.edges:
        for p in game.players:
            if game.reward(edge, p) not in (0, 1):
                raise ValueError(
                    f"reward {game.reward(edge, p)} for {p!r} on {edge!r} "
                    "is outside {0, 1}"
                )
    one = Fraction(1)
    flipped: dict[Edge, dict[str, Fraction]] = {}
    sums: dict[Edge, int] = {}
    for edge in game.edges:
        per_player = {
            p: (one if game.reward(edge, p) == 1 else -one) for p in game.players
        }
        flipped[edge] = per_player
        sums[edge] = int(sum(per_player.values()))

    needed = max(abs(s) for s in sums.values())
    makeweights = [f"dummy{i}" for i in range(1, needed + 1)]
    for name in makeweights:
        if name in game.players:
            raise ValueError(f"player name {name!r} already taken")
    # All edge sums share the parity of the player count, so the smallest
    # matching-parity count is the maximum absolute sum itself.
    for edge in game.edges:
        positive = (needed - sums[edge]) // 2
        for idx, name in enumerate(makeweights):
            flipped[edge][name] = one if idx < positive else -one

    return Game(
        players=game.players + tuple(makeweights),
        vertices=game.vertices,
        owner=dict(game.owner),
        initial=game.initial,
        edges=game.edges,
        rewards=flipped,
    )


def add_social_player(
    game: Game,
    weights: Mapping[str, Fraction] | None = None,
    *,
    name: str = "society",
) -> Game:
    """Append a vertexless player whose edge reward is the weighted sum of
    everyone else's (unit weights by default)."""
    if name in game.players:
        raise ValueError(f"player name {name!r} already taken")
    if weights is None:
        weights = {p: Fraction(1) for p in game.players}
    missing = [p for p in game.players if p not in weights]
    if missing:
        raise ValueError(f"weights missing for players {missing}")
    rewards: dict[Edge, dict[str, Fraction]] = {}
    for edge in game.edges:
        per_player = dict(game.rewards.get(edge, {}))
        social = sum(
            (Fraction(weights[p]) * game.reward(edge, p) for p in game.players),
            Fraction(0),
        )
        if social != 0:
            per_player[name] = social
        if per_player:
            rewards[edge] = per_player
    return Game(
        players=game.players + (name,),
        vertices=game.vertices,
        owner=dict(game.owner),
        initial=game.initial,
        edges=game.edges,
        rewards=rewards,
    )


def lexicographic_optimize(
    game: Game,
    mode: Mode,
    objectives: Sequence[str],
    *,
    exhaustive: bool = False,
    punish: PunishmentTable | None = None,
) -> EquilibriumWitness | None:
    """Optimise the objectives in order, freezing each stage's optimum as a
    reward floor for the next ("optimise, constrain, optimise again")."""
    if not objectives:
        raise ValueError("objectives must be nonempty")
    for p in objectives:
        if p not in game.players:
            raise ValueError(f"unknown objective player {p!r}")
    if punish is None:
        punish = PunishmentTable(game)
    floors: list[tuple[str, Fraction]] = []
    witness: EquilibriumWitness | None = None
    for objective in objectives:
        witness, _ = search_optimum(
            game,
            mode,
            objective_player=objective,
            extra_constraints=tuple(floors),
            exhaustive=exhaustive,
            punish=punish,
        )
        if witness is None:
            return None
        floors.append((objective, witness.player_rewards[objective]))
    return witness
