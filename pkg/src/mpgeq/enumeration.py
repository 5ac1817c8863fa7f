"""Search for optimal equilibria over threshold vectors and regions.

A well-behaved reward-and-punish profile is characterised by the set of
vertices its play visits, the strongly connected set it visits infinitely
often, and the edge ratios inside the latter.  Two searches are provided:

* ``optimize`` enumerates per-player reward floors drawn from each player's
  punishment values at her own vertices, derives the maximal admissible
  visited set for each floor vector, and solves one program per strongly
  connected candidate.
* ``exhaustive_optimize`` enumerates every (visited, recurrent) region pair
  directly and serves as the correctness oracle for ``optimize``.

Both return the same optimal beneficiary reward; ties between optimal regions
are resolved by the deterministic enumeration order (first found wins).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Mapping, Sequence

from .equilibrium_core import (
    Mode,
    RatioProfile,
    derive_thresholds,
    solve_region,
)
from .game_model import Game, reachable, sccs
from .mpg_values import PunishmentTable

__all__ = [
    "EquilibriumWitness",
    "admissible_region",
    "decide",
    "exhaustive_optimize",
    "optimize",
    "search_optimum",
    "threshold_vectors",
    "validate_witness",
]

_EXHAUSTIVE_VERTEX_BOUND = 14

ThresholdVector = dict[str, Fraction | None]


@dataclass(frozen=True)
class EquilibriumWitness:
    """An optimal equilibrium: the region, its ratio profile and an entry path."""

    mode: Mode
    profile: RatioProfile
    entry_path: tuple[str, ...]

    @property
    def visited(self) -> frozenset[str]:
        return self.profile.visited

    @property
    def recurrent(self) -> frozenset[str]:
        return self.profile.recurrent

    @property
    def player_rewards(self) -> Mapping[str, Fraction]:
        return self.profile.player_rewards

    @property
    def beneficiary_reward(self) -> Fraction:
        return self.profile.beneficiary_reward


def threshold_vectors(
    game: Game, punish: PunishmentTable, mode: Mode
) -> Iterator[ThresholdVector]:
    """Enumerate candidate reward-floor vectors.

    Each player contributes her distinct punishment values at her own
    vertices plus "no constraint" (None).  In political mode the beneficiary
    is fixed to no constraint.  Vectors are emitted in lexicographic order of
    the per-player candidate lists (values ascending, None last).
    """
    axes: list[tuple[str, list[Fraction | None]]] = []
    for p in game.players:
        if mode.is_political and p == mode.beneficiary:
            continue
        owned = game.owned_by(p)
        cands: list[Fraction | None]
        if owned:
            values = punish.values(p)
            cands = sorted({values[v] for v in owned})
            cands.append(None)
        else:
            cands = [None]
        axes.append((p, cands))
    names = [p for p, _ in axes]
    for combo in product(*(cands for _, cands in axes)):
        vector: ThresholdVector = dict(zip(names, combo))
        if mode.is_political:
            vector[mode.beneficiary] = None
        yield vector


def admissible_region(
    game: Game, mode: Mode, vector: ThresholdVector, punish: PunishmentTable
) -> tuple[frozenset[str], list[frozenset[str]]]:
    """Maximal visited set for a floor vector, plus its recurrent candidates.

    A vertex is admissible when its owner is the political beneficiary, or
    when the owner's floor is set and covers the owner's punishment value
    there.  Owners mapped to None admit nothing.  Candidates are the strongly
    connected components of the admissible reachable set.
    """
    allowed = set()
    for v in game.vertices:
        owner = game.owner[v]
        if mode.is_political and owner == mode.beneficiary:
            allowed.add(v)
            continue
        floor = vector.get(owner)
        if floor is not None and punish.values(owner)[v] <= floor:
            allowed.add(v)
    visited = reachable(game, allowed)
    return visited, sccs(game, visited)


def _entry_path(game: Game, visited: frozenset[str],
                recurrent: frozenset[str]) -> tuple[str, ...]:
    """Shortest path from the initial vertex into the recurrent set, staying
    inside the visited set; deterministic via vertex order."""
    if game.initial in recurrent:
        return (game.initial,)
    parent: dict[str, str] = {}
    seen = {game.initial}
    frontier = [game.initial]
    while frontier:
        nxt: list[str] = []
        for v in frontier:
            for t in game.successors(v):
                if t not in visited or t in seen:
                    continue
                parent[t] = v
                if t in recurrent:
                    path = [t]
                    while path[-1] != game.initial:
                        path.append(parent[path[-1]])
                    return tuple(reversed(path))
                seen.add(t)
                nxt.append(t)
        frontier = nxt
    raise ValueError("recurrent set is unreachable inside the visited set")


@dataclass
class _Best:
    witness: EquilibriumWitness | None = None
    value: Fraction | None = None

    def offer(self, game: Game, mode: Mode, profile: RatioProfile,
              objective_value: Fraction) -> None:
        if self.value is not None and objective_value <= self.value:
            return
        path = _entry_path(game, profile.visited, profile.recurrent)
        self.witness = EquilibriumWitness(mode, profile, path)
        self.value = objective_value


def search_optimum(
    game: Game,
    mode: Mode,
    *,
    objective_player: str | None = None,
    extra_constraints: Sequence[tuple[str, Fraction]] = (),
    exhaustive: bool = False,
    punish: PunishmentTable | None = None,
    exhaustive_bound: int = _EXHAUSTIVE_VERTEX_BOUND,
) -> tuple[EquilibriumWitness | None, int]:
    """Shared search core; returns (best witness, regions examined).

    The floor-vector search and the exhaustive region search differ only in
    how regions and their part-two floors are produced.
    """
    if mode.beneficiary not in game.players:
        raise ValueError(f"unknown beneficiary {mode.beneficiary!r}")
    if punish is None:
        punish = PunishmentTable(game)
    target = objective_player or mode.beneficiary
    best = _Best()
    explored = 0
    cache: dict[tuple, tuple[RatioProfile | None, Fraction | None]] = {}

    def attempt(visited: frozenset[str], recurrent: frozenset[str],
                thresholds: dict[str, Fraction]) -> None:
        nonlocal explored
        explored += 1
        s_edges = [e for e in game.edges if e[0] in recurrent and e[1] in recurrent]
        obj_cap = max(game.reward(e, target) for e in s_edges)
        if best.value is not None and obj_cap <= best.value:
            return
        floors = dict(thresholds)
        if mode.is_political:
            floors.pop(mode.beneficiary, None)
        for p, floor in list(floors.items()) + list(extra_constraints):
            if floor > max(game.reward(e, p) for e in s_edges):
                return  # ratios sum to 1, so the floor is unreachable
        key = (
            recurrent,
            tuple(sorted(floors.items())),
            tuple(extra_constraints),
            target,
        )
        if key in cache:
            profile, value = cache[key]
        else:
            profile = solve_region(
                game, mode, visited, recurrent, punish,
                thresholds=floors,
                objective_player=target,
                extra_constraints=extra_constraints,
            )
            value = None if profile is None else profile.player_rewards[target]
            cache[key] = (profile, value)
        if profile is not None:
            # Re-anchor the region at this visited set; the cached profile may
            # have been solved for a different (ratio-equivalent) one.
            if profile.visited != visited:
                profile = RatioProfile(
                    visited=visited,
                    recurrent=profile.recurrent,
                    vertex_ratios=profile.vertex_ratios,
                    edge_ratios=profile.edge_ratios,
                    player_rewards=profile.player_rewards,
                    beneficiary_reward=profile.beneficiary_reward,
                )
            best.offer(game, mode, profile, value)

    if exhaustive:
        n = len(game.vertices)
        if n > exhaustive_bound:
            raise ValueError(
                f"exhaustive search bound {exhaustive_bound} exceeded ({n} vertices)"
            )
        init_bit = 1 << game.vertex_index(game.initial)
        for q_mask in range(1 << n):
            if not q_mask & init_bit:
                continue
            visited = frozenset(
                v for i, v in enumerate(game.vertices) if q_mask >> i & 1
            )
            if reachable(game, visited) != visited:
                continue
            thresholds = derive_thresholds(game, mode, visited, punish)
            for component in sccs(game, visited):
                members = sorted(component, key=game.vertex_index)
                for s_mask in range(1, 1 << len(members)):
                    recurrent = frozenset(
                        v for i, v in enumerate(members) if s_mask >> i & 1
                    )
                    parts = sccs(game, recurrent)
                    if len(parts) != 1 or parts[0] != recurrent:
                        continue
                    attempt(visited, recurrent, thresholds)
    else:
        for vector in threshold_vectors(game, punish, mode):
            visited, candidates = admissible_region(game, mode, vector, punish)
            if not visited:
                continue
            owners = {game.owner[v] for v in visited}
            thresholds = {
                p: vector[p]
                for p in owners
                if vector.get(p) is not None
            }
            for recurrent in candidates:
                attempt(visited, recurrent, thresholds)

    return best.witness, explored


def optimize(game: Game, mode: Mode, *,
             punish: PunishmentTable | None = None) -> EquilibriumWitness | None:
    """Optimal equilibrium for the beneficiary, or None if no region is
    feasible (political mode always finds one on valid games)."""
    witness, _ = search_optimum(game, mode, punish=punish)
    return witness


def exhaustive_optimize(
    game: Game, mode: Mode, *,
    punish: PunishmentTable | None = None,
    bound: int = _EXHAUSTIVE_VERTEX_BOUND,
) -> EquilibriumWitness | None:
    """Oracle search over every region pair; small games only."""
    witness, _ = search_optimum(
        game, mode, exhaustive=True, punish=punish, exhaustive_bound=bound
    )
    return witness


def decide(game: Game, mode: Mode, reward_threshold: Fraction, *,
           punish: PunishmentTable | None = None) -> bool:
    """Whether some equilibrium grants the beneficiary at least the threshold."""
    witness = optimize(game, mode, punish=punish)
    return witness is not None and witness.beneficiary_reward >= reward_threshold


def validate_witness(game: Game, witness: EquilibriumWitness,
                     punish: PunishmentTable) -> list[str]:
    """Re-derive every witness guarantee from scratch; returns violations.

    The deviation floors are recomputed from the vertices the synthesized
    play actually visits: for each constrained player the profile reward must
    cover her punishment value at each of her own visited vertices, and (a
    strictly stronger consequence that holds for every true equilibrium play)
    at every visited vertex.
    """
    problems: list[str] = []
    mode = witness.mode
    path = witness.entry_path
    if not path or path[0] != game.initial:
        problems.append("entry path must start at the initial vertex")
    for a, b in zip(path, path[1:]):
        if not game.has_edge((a, b)):
            problems.append(f"entry path uses missing edge ({a!r}, {b!r})")
    if path and path[-1] not in witness.recurrent:
        problems.append("entry path must end in the recurrent set")
    if not set(path) <= witness.visited:
        problems.append("entry path leaves the visited set")
    try:
        witness.profile.check(game)
    except AssertionError as exc:
        problems.append(f"profile invariant broken: {exc}")

    play_vertices = set(path) | witness.recurrent
    for p in game.players:
        if mode.is_political and p == mode.beneficiary:
            continue
        owned_visited = [v for v in play_vertices if game.owner[v] == p]
        if not owned_visited:
            continue
        values = punish.values(p)
        reward = witness.player_rewards[p]
        own_floor = max(values[v] for v in owned_visited)
        if reward < own_floor:
            problems.append(
                f"player {p!r} would deviate: reward {reward} below "
                f"punishment value {own_floor} at an owned visited vertex"
            )
        full_floor = max(values[v] for v in play_vertices)
        if reward < full_floor:
            problems.append(
                f"player {p!r} reward {reward} below visited-set "
                f"punishment bound {full_floor}"
            )
    return problems
