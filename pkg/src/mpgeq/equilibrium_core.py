"""Region constraint systems and their exact rational LP solver.

Given a set of vertices the play may visit and a strongly connected set it
visits infinitely often, the long-run behaviour of a well-behaved strategy
profile is captured by limit occupation ratios: one per vertex, one per edge.
This module builds the corresponding linear program (ratio geometry plus
per-player reward floors) and solves it with an exact simplex over
``fractions.Fraction`` using Bland's anti-cycling rule.  No floating point
enters anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .game_model import Edge, Game, reachable, sccs
from .mpg_values import PunishmentTable

__all__ = [
    "Constraint",
    "LinearProgram",
    "LpOutcome",
    "Mode",
    "NASH",
    "OWNER_RESTRICTED",
    "PAPER_LITERAL",
    "POLITICAL",
    "RatioProfile",
    "build_program",
    "derive_thresholds",
    "lp_solve",
    "solve_region",
]

POLITICAL = "political"
NASH = "nash"
OWNER_RESTRICTED = "owner_restricted"
PAPER_LITERAL = "paper_literal"


@dataclass(frozen=True)
class Mode:
    """Which equilibrium notion is sought and for whose benefit.

    ``political`` drops the deviation constraint for the beneficiary herself;
    ``nash`` keeps it for everyone.  ``constraint_variant`` selects whether a
    player's reward floor is the best punishment value over her own visited
    vertices only, or over every visited vertex.
    """

    kind: str
    beneficiary: str
    constraint_variant: str = OWNER_RESTRICTED

    def __post_init__(self) -> None:
        if self.kind not in (POLITICAL, NASH):
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if self.constraint_variant not in (OWNER_RESTRICTED, PAPER_LITERAL):
            raise ValueError(
                f"unknown constraint variant {self.constraint_variant!r}"
            )

    @property
    def is_political(self) -> bool:
        return self.kind == POLITICAL


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[Hashable, Fraction]
    relation: str  # "eq" | "ge"
    constant: Fraction


@dataclass(frozen=True)
class LinearProgram:
    variables: tuple[Hashable, ...]
    constraints: tuple[Constraint, ...]
    objective: Mapping[Hashable, Fraction]  # maximised


@dataclass(frozen=True)
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    assignment: Mapping[Hashable, Fraction] | None = None
    objective_value: Fraction | None = None


def _pivot(rows: list[list[Fraction]], zrow: list[Fraction],
           basis: list[int], r: int, c: int) -> None:
    piv = rows[r][c]
    rows[r] = [x / piv for x in rows[r]]
    pivot_row = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[c]:
            f = row[c]
            rows[i] = [a - f * b for a, b in zip(row, pivot_row)]
    if zrow[c]:
        f = zrow[c]
        zrow[:] = [a - f * b for a, b in zip(zrow, pivot_row)]
    basis[r] = c


def _make_zrow(rows: Sequence[Sequence[Fraction]], basis: Sequence[int],
               costs: Sequence[Fraction], width: int) -> list[Fraction]:
    zrow = [-costs[j] if j < len(costs) else Fraction(0) for j in range(width)]
    for i, row in enumerate(rows):
        cb = costs[basis[i]] if basis[i] < len(costs) else Fraction(0)
        if cb:
            for j in range(width):
                zrow[j] += cb * row[j]
    return zrow


def _run_simplex(rows: list[list[Fraction]], basis: list[int],
                 zrow: list[Fraction], enterable: Sequence[int]) -> str:
    """Bland's rule: smallest enterable index with negative reduced cost;
    leaving row is the minimum ratio, ties broken by smallest basis index."""
    while True:
        enter = -1
        for j in enterable:
            if zrow[j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best: Fraction | None = None
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(rows, zrow, basis, leave, enter)


def lp_solve(lp: LinearProgram) -> LpOutcome:
    """Exact two-phase primal simplex; decides optimal/infeasible/unbounded.

    Single-variable rows ``x = c`` and ``x >= 0`` are consumed during presolve
    (pins and sign markers); all other variables are treated as free via the
    usual split into two nonnegative parts.
    """
    zero = Fraction(0)
    pins: dict[Hashable, Fraction] = {}
    nonneg: set[Hashable] = set()
    pending = [
        ({v: Fraction(c) for v, c in con.coeffs.items() if c != 0},
         con.relation, Fraction(con.constant))
        for con in lp.constraints
    ]
    for _, relation, _ in pending:
        if relation not in ("eq", "ge"):
            raise ValueError(f"unknown relation {relation!r}")

    # Pin collection runs to a fixpoint: substituting a pin can reduce another
    # equality row to a single variable.
    changed = True
    while changed:
        changed = False
        remaining: list[tuple[dict[Hashable, Fraction], str, Fraction]] = []
        for coeffs, relation, constant in pending:
            reduced = {v: a for v, a in coeffs.items() if v not in pins}
            constant = constant - sum(
                (a * pins[v] for v, a in coeffs.items() if v in pins), zero
            )
            if not reduced:
                ok = constant == 0 if relation == "eq" else constant <= 0
                if not ok:
                    return LpOutcome("infeasible")
                continue
            if relation == "eq" and len(reduced) == 1:
                (var, a), = reduced.items()
                pins[var] = constant / a
                changed = True
                continue
            remaining.append((reduced, relation, constant))
        pending = remaining

    rows_in: list[tuple[dict[Hashable, Fraction], str, Fraction]] = []
    for coeffs, relation, constant in pending:
        if relation == "ge" and len(coeffs) == 1 and constant == 0:
            (var, a), = coeffs.items()
            if a > 0:
                nonneg.add(var)
                continue
        rows_in.append((coeffs, relation, constant))

    live_vars = [v for v in lp.variables if v not in pins]
    columns: list[tuple[Hashable, int]] = []
    for v in live_vars:
        columns.append((v, 1))
        if v not in nonneg:
            columns.append((v, -1))
    col_of: dict[Hashable, list[int]] = {}
    for j, (v, _) in enumerate(columns):
        col_of.setdefault(v, []).append(j)

    n_struct = len(columns)
    n_surplus = sum(1 for _, rel, _ in rows_in if rel == "ge")
    n_rows = len(rows_in)
    width = n_struct + n_surplus + n_rows + 1  # + artificials + rhs

    rows: list[list[Fraction]] = []
    surplus_seen = 0
    for i, (coeffs, relation, constant) in enumerate(rows_in):
        row = [zero] * width
        for v, a in coeffs.items():
            for j in col_of[v]:
                row[j] = a * columns[j][1]
        if relation == "ge":
            row[n_struct + surplus_seen] = Fraction(-1)
            surplus_seen += 1
        row[-1] = constant
        if constant < 0:
            row = [-x for x in row]
        row[n_struct + n_surplus + i] = Fraction(1)
        rows.append(row)

    basis = [n_struct + n_surplus + i for i in range(n_rows)]
    real_cols = list(range(n_struct + n_surplus))

    if rows:
        phase1_costs = [zero] * (n_struct + n_surplus) + [Fraction(-1)] * n_rows
        zrow = _make_zrow(rows, basis, phase1_costs, width)
        status = _run_simplex(rows, basis, zrow, real_cols)
        assert status == "optimal", "phase 1 objective is bounded"
        infeasibility = sum(
            (rows[i][-1] for i in range(n_rows) if basis[i] >= n_struct + n_surplus),
            zero,
        )
        if infeasibility > 0:
            return LpOutcome("infeasible")
        keep: list[int] = []
        for i in range(len(rows)):
            if basis[i] < n_struct + n_surplus:
                keep.append(i)
                continue
            pivot_col = next(
                (j for j in real_cols if rows[i][j] != 0), None
            )
            if pivot_col is None:
                continue  # redundant row
            _pivot(rows, zrow, basis, i, pivot_col)
            keep.append(i)
        rows = [rows[i] for i in keep]
        basis = [basis[i] for i in keep]
        rows = [row[: n_struct + n_surplus] + [row[-1]] for row in rows]

    width2 = n_struct + n_surplus + 1
    costs2 = [zero] * (n_struct + n_surplus)
    for j, (v, mult) in enumerate(columns):
        costs2[j] = Fraction(lp.objective.get(v, 0)) * mult
    zrow = _make_zrow(rows, basis, costs2, width2)
    status = _run_simplex(rows, basis, zrow, real_cols)
    if status == "unbounded":
        return LpOutcome("unbounded")

    col_values = [zero] * (n_struct + n_surplus)
    for i, b in enumerate(basis):
        col_values[b] = rows[i][-1]
    assignment: dict[Hashable, Fraction] = dict(pins)
    for v in live_vars:
        assignment[v] = sum(
            (col_values[j] * columns[j][1] for j in col_of[v]), zero
        )
    for con in lp.constraints:
        lhs = sum(
            (Fraction(a) * assignment[v] for v, a in con.coeffs.items()), zero
        )
        if con.relation == "eq":
            assert lhs == con.constant, "solution must satisfy equalities exactly"
        else:
            assert lhs >= con.constant, "solution must satisfy inequalities exactly"
    value = sum((Fraction(c) * assignment[v] for v, c in lp.objective.items()), zero)
    return LpOutcome("optimal", assignment, value)


@dataclass(frozen=True)
class RatioProfile:
    """Limit occupation ratios of a well-behaved play plus implied rewards.

    Only nonzero ratios are stored; everything outside the recurrent set is
    implicitly zero.
    """

    visited: frozenset[str]
    recurrent: frozenset[str]
    vertex_ratios: Mapping[str, Fraction]
    edge_ratios: Mapping[Edge, Fraction]
    player_rewards: Mapping[str, Fraction]
    beneficiary_reward: Fraction

    def check(self, game: Game) -> None:
        """Assert every profile invariant by re-substitution."""
        assert self.recurrent <= self.visited
        total = sum(self.vertex_ratios.values(), Fraction(0))
        assert total == 1, f"vertex ratios sum to {total}"
        for v, r in self.vertex_ratios.items():
            assert r > 0 and v in self.recurrent
        for (s, t), r in self.edge_ratios.items():
            assert r > 0 and s in self.recurrent and t in self.recurrent
            assert game.has_edge((s, t))
        for v in self.recurrent:
            out_flow = sum(
                (r for (s, _), r in self.edge_ratios.items() if s == v), Fraction(0)
            )
            in_flow = sum(
                (r for (_, t), r in self.edge_ratios.items() if t == v), Fraction(0)
            )
            assert out_flow == self.vertex_ratios.get(v, Fraction(0))
            assert in_flow == self.vertex_ratios.get(v, Fraction(0))
        for p in game.players:
            expect = sum(
                (r * game.reward(e, p) for e, r in self.edge_ratios.items()),
                Fraction(0),
            )
            assert self.player_rewards[p] == expect


def _vertex_var(v: str) -> tuple:
    return ("v", v)


def _edge_var(e: Edge) -> tuple:
    return ("e", e[0], e[1])


def build_program(
    game: Game,
    mode: Mode,
    visited: Iterable[str],
    recurrent: Iterable[str],
    thresholds: Mapping[str, Fraction | None],
    *,
    objective_player: str | None = None,
    extra_constraints: Sequence[tuple[str, Fraction]] = (),
) -> LinearProgram:
    """Constraint system for a region: ratio geometry plus reward floors.

    Part one pins all ratios outside the recurrent set to zero, requires the
    rest to be nonnegative, normalises vertex ratios to sum to 1 and conserves
    flow at each recurrent vertex.  Part two adds, for every constrained
    player, a floor on her ratio-weighted reward.  The objective maximises the
    reward of ``objective_player`` (the beneficiary by default).
    ``extra_constraints`` are additional (player, floor) pairs appended to
    part two, used by lexicographic optimisation.
    """
    q = frozenset(visited)
    s = frozenset(recurrent)
    if not s <= q:
        raise ValueError("recurrent set must be contained in the visited set")
    parts = sccs(game, s)
    if len(parts) != 1 or parts[0] != s:
        raise ValueError(
            f"recurrent set {sorted(s)} is not strongly connected with an edge"
        )
    if not (reachable(game, q) & s):
        raise ValueError("initial vertex cannot reach the recurrent set")

    s_edges = [e for e in game.edges if e[0] in s and e[1] in s]
    variables: list[Hashable] = [_vertex_var(v) for v in game.vertices]
    variables += [_edge_var(e) for e in game.edges]

    one = Fraction(1)
    zero = Fraction(0)
    constraints: list[Constraint] = []
    for v in game.vertices:
        if v not in s:
            constraints.append(Constraint({_vertex_var(v): one}, "eq", zero))
    for e in game.edges:
        if not (e[0] in s and e[1] in s):
            constraints.append(Constraint({_edge_var(e): one}, "eq", zero))
    for v in game.vertices:
        if v in s:
            constraints.append(Constraint({_vertex_var(v): one}, "ge", zero))
    for e in s_edges:
        constraints.append(Constraint({_edge_var(e): one}, "ge", zero))
    constraints.append(
        Constraint({_vertex_var(v): one for v in game.vertices}, "eq", one)
    )
    for v in sorted(s, key=game.vertex_index):
        out_coeffs: dict[Hashable, Fraction] = {_vertex_var(v): one}
        for e in game.out_edges(v):
            out_coeffs[_edge_var(e)] = -one
        constraints.append(Constraint(out_coeffs, "eq", zero))
        in_coeffs: dict[Hashable, Fraction] = {_vertex_var(v): one}
        for e in game.edges:
            if e[1] == v:
                in_coeffs[_edge_var(e)] = in_coeffs.get(_edge_var(e), zero) - one
        constraints.append(Constraint(in_coeffs, "eq", zero))

    def reward_floor(player: str, floor: Fraction) -> Constraint:
        coeffs = {
            _edge_var(e): game.reward(e, player)
            for e in s_edges
            if game.reward(e, player) != 0
        }
        return Constraint(coeffs, "ge", floor)

    for p in game.players:
        if p not in thresholds or thresholds[p] is None:
            continue
        if mode.is_political and p == mode.beneficiary:
            continue
        constraints.append(reward_floor(p, Fraction(thresholds[p])))
    for p, floor in extra_constraints:
        constraints.append(reward_floor(p, floor))

    target = objective_player or mode.beneficiary
    objective = {
        _edge_var(e): game.reward(e, target)
        for e in s_edges
        if game.reward(e, target) != 0
    }
    return LinearProgram(tuple(variables), tuple(constraints), objective)


def derive_thresholds(
    game: Game, mode: Mode, visited: Iterable[str], punish: PunishmentTable
) -> dict[str, Fraction]:
    """Per-player reward floors implied by the visited set.

    Owner-restricted: the best punishment value among a player's own visited
    vertices.  Literal: the best punishment value anywhere in the visited set,
    for every player owning something there.
    """
    q = sorted(visited, key=game.vertex_index)
    owners = {game.owner[v] for v in q}
    floors: dict[str, Fraction] = {}
    for p in game.players:
        if p not in owners:
            continue
        if mode.is_political and p == mode.beneficiary:
            continue
        values = punish.values(p)
        if mode.constraint_variant == OWNER_RESTRICTED:
            pool = [values[v] for v in q if game.owner[v] == p]
        else:
            pool = [values[v] for v in q]
        floors[p] = max(pool)
    return floors


def solve_region(
    game: Game,
    mode: Mode,
    visited: Iterable[str],
    recurrent: Iterable[str],
    punish: PunishmentTable,
    *,
    thresholds: Mapping[str, Fraction | None] | None = None,
    objective_player: str | None = None,
    extra_constraints: Sequence[tuple[str, Fraction]] = (),
) -> RatioProfile | None:
    """Solve one region's program; None when it is infeasible.

    When ``thresholds`` is omitted they are derived from the visited set per
    the mode's constraint variant; explicit thresholds are used verbatim.
    """
    q = frozenset(visited)
    if reachable(game, q) != q:
        raise ValueError("visited set must equal its reachable closure")
    if thresholds is None:
        thresholds = derive_thresholds(game, mode, q, punish)
    lp = build_program(
        game, mode, q, recurrent, thresholds,
        objective_player=objective_player,
        extra_constraints=extra_constraints,
    )
    outcome = lp_solve(lp)
    if outcome.status == "infeasible":
        return None
    assert outcome.status == "optimal", "region programs are always bounded"
    assignment = outcome.assignment
    vertex_ratios = {
        v: assignment[_vertex_var(v)]
        for v in game.vertices
        if assignment[_vertex_var(v)] != 0
    }
    edge_ratios = {
        e: assignment[_edge_var(e)]
        for e in game.edges
        if assignment[_edge_var(e)] != 0
    }
    rewards = {
        p: sum((r * game.reward(e, p) for e, r in edge_ratios.items()), Fraction(0))
        for p in game.players
    }
    profile = RatioProfile(
        visited=q,
        recurrent=frozenset(recurrent),
        vertex_ratios=vertex_ratios,
        edge_ratios=edge_ratios,
        player_rewards=rewards,
        beneficiary_reward=rewards[mode.beneficiary],
    )
    profile.check(game)
    return profile
