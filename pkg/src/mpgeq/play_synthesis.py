"""Turn a ratio profile into an explicit infinite play.

The support of a profile (edges with positive ratio) decomposes into
strongly connected islands.  Inside an island a deterministic quota rule
realises the edge ratios: on each visit to a vertex, take the first support
edge (fixed document order) whose taken-count still trails its quota, else
the first support edge.  Several islands are woven together by playing them
in rounds with slowly growing segment lengths, so transfer steps vanish in
the limit and each island's share converges to its vertex-ratio mass.

Deviations are punished: once a player leaves the schedule, everyone else
switches to her coalition punishment strategy, and the resulting play is a
lasso whose mean is evaluated in closed form.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, lcm
from typing import Mapping, Sequence

from .enumeration import EquilibriumWitness
from .game_model import Edge, Game
from .mpg_values import PunishmentTable, _follow

__all__ = [
    "Scheduler",
    "advance",
    "build_schedule",
    "measured_means",
    "running_means",
    "simulate_deviation",
    "transfer_fraction",
]


@dataclass(frozen=True)
class _Plan:
    """Static, game-derived scheduling data shared by all scheduler states."""

    ids: tuple[str, ...]
    index: Mapping[str, int]
    islands: tuple[tuple[int, ...], ...]
    island_weights: tuple[int, ...]
    quota_scale: int  # cleared common denominator of all edge quotas
    entry_vertices: tuple[int, ...]
    support_out: tuple[tuple[tuple[int, int, int, int], ...], ...]
    # per vertex: (support edge id, target, quota numerator, quota denominator)
    support_edges: tuple[tuple[int, int], ...]
    recurrent_succ: Mapping[int, tuple[int, ...]]
    path_memo: dict[tuple[int, int], tuple[int, ...]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def transfer_path(self, src: int, dst: int) -> tuple[int, ...]:
        """Shortest path inside the recurrent set, excluding src; BFS in
        vertex order so ties are deterministic."""
        if src == dst:
            return ()
        key = (src, dst)
        if key not in self.path_memo:
            parent: dict[int, int] = {}
            seen = {src}
            frontier = [src]
            found = False
            while frontier and not found:
                nxt: list[int] = []
                for v in frontier:
                    for t in self.recurrent_succ[v]:
                        if t in seen:
                            continue
                        parent[t] = v
                        if t == dst:
                            found = True
                            break
                        seen.add(t)
                        nxt.append(t)
                    if found:
                        break
                frontier = nxt
            assert found, "recurrent set must be strongly connected"
            path = [dst]
            while path[-1] != src:
                path.append(parent[path[-1]])
            self.path_memo[key] = tuple(reversed(path))[1:]
        return self.path_memo[key]


@dataclass(frozen=True)
class Scheduler:
    """Immutable scheduler state; ``advance`` returns an updated copy.

    ``pending`` holds the vertices of the entry path or a transfer still to
    be visited; when it drains, play continues inside ``pending_island``.
    """

    game: Game
    witness: EquilibriumWitness
    plan: _Plan = field(repr=False, compare=False)
    current: int
    pending: tuple[int, ...]
    pending_island: int | None
    island: int
    round_index: int
    budget: int
    resume: tuple[int | None, ...]
    visit_counts: tuple[int, ...]
    edge_counts: tuple[int, ...]
    off_support_counts: Mapping[tuple[int, int], int]
    steps_total: int
    transfer_steps: int

    @property
    def current_vertex(self) -> str:
        return self.plan.ids[self.current]

    @property
    def islands(self) -> tuple[tuple[str, ...], ...]:
        return tuple(
            tuple(self.plan.ids[v] for v in comp) for comp in self.plan.islands
        )

    @property
    def island_weights(self) -> tuple[int, ...]:
        return self.plan.island_weights


def _island_components(vertices: list[int], succ: dict[int, list[int]]) -> list[list[int]]:
    """SCCs of the support digraph (iterative Tarjan), ordered by least vertex."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = iter(range(2 * len(vertices) + 1))
    out: list[list[int]] = []
    for root in vertices:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = next(counter)
                stack.append(v)
                on_stack.add(v)
            targets = succ[v]
            advanced = False
            for i in range(pos, len(targets)):
                t = targets[i]
                if t not in index:
                    work.append((v, i + 1))
                    work.append((t, 0))
                    advanced = True
                    break
                if t in on_stack:
                    low[v] = min(low[v], index[t])
            if advanced:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    out.sort(key=lambda comp: comp[0])
    return out


def build_schedule(game: Game, witness: EquilibriumWitness) -> Scheduler:
    """Decompose the witness support into islands and set up the quota state."""
    profile = witness.profile
    if not profile.edge_ratios:
        raise ValueError("witness support is empty")
    profile.check(game)

    ids = game.vertices
    index = {v: i for i, v in enumerate(ids)}
    support_edges = sorted(
        ((index[s], index[t]) for s, t in profile.edge_ratios),
    )
    edge_id = {e: i for i, e in enumerate(support_edges)}
    ratios_by_int: dict[tuple[int, int], Fraction] = {
        (index[s], index[t]): r for (s, t), r in profile.edge_ratios.items()
    }
    vertex_ratio = {index[v]: r for v, r in profile.vertex_ratios.items()}

    support_vertices = sorted(vertex_ratio)
    succ: dict[int, list[int]] = {v: [] for v in support_vertices}
    for s, t in support_edges:
        succ[s].append(t)
    islands = _island_components(support_vertices, succ)
    island_of = {v: j for j, comp in enumerate(islands) for v in comp}
    for s, t in support_edges:
        assert island_of[s] == island_of[t], (
            "support edges never cross islands (the ratios are a circulation)"
        )

    shares = [
        sum((vertex_ratio[v] for v in comp), Fraction(0)) for comp in islands
    ]
    denom = lcm(*(s.denominator for s in shares))
    raw = [int(s * denom) for s in shares]
    common = gcd(*raw)
    weights = tuple(r // common for r in raw)

    quota_scale = 1
    support_out: list[tuple[tuple[int, int, int, int], ...]] = []
    for i, v in enumerate(ids):
        rows: list[tuple[int, int, int, int]] = []
        vi = index[v]
        if vi in vertex_ratio:
            for t in game.successors(v):
                e = (vi, index[t])
                if e in ratios_by_int:
                    quota = ratios_by_int[e] / vertex_ratio[vi]
                    quota_scale = lcm(quota_scale, quota.denominator)
                    rows.append(
                        (edge_id[e], index[t], quota.numerator, quota.denominator)
                    )
        support_out.append(tuple(rows))

    recurrent = {index[v] for v in profile.recurrent}
    recurrent_succ = {
        v: tuple(
            index[t] for t in game.successors(ids[v]) if index[t] in recurrent
        )
        for v in recurrent
    }

    plan = _Plan(
        ids=ids,
        index=index,
        islands=tuple(tuple(c) for c in islands),
        island_weights=weights,
        quota_scale=quota_scale,
        entry_vertices=tuple(comp[0] for comp in islands),
        support_out=tuple(support_out),
        support_edges=tuple(support_edges),
        recurrent_succ=recurrent_succ,
    )

    path = [index[v] for v in witness.entry_path]
    for a, b in zip(witness.entry_path, witness.entry_path[1:]):
        if not game.has_edge((a, b)):
            raise ValueError(f"entry path uses missing edge ({a!r}, {b!r})")
    pending = tuple(path[1:]) + plan.transfer_path(path[-1], plan.entry_vertices[0])

    return Scheduler(
        game=game,
        witness=witness,
        plan=plan,
        current=path[0],
        pending=pending,
        pending_island=0,
        island=-1,
        round_index=1,
        budget=0,
        resume=(None,) * len(islands),
        visit_counts=(0,) * len(ids),
        edge_counts=(0,) * len(support_edges),
        off_support_counts={},
        steps_total=0,
        transfer_steps=0,
    )


def advance(scheduler: Scheduler, steps: int) -> tuple[list[str], Scheduler]:
    """Produce the next ``steps`` vertices of the play and the new state."""
    if steps <= 0:
        raise ValueError("steps must be positive")
    plan = scheduler.plan
    support_out = plan.support_out
    weights = plan.island_weights
    scale = plan.quota_scale
    n_islands = len(plan.islands)

    cur = scheduler.current
    pending = list(scheduler.pending)
    pending_pos = 0
    pending_island = scheduler.pending_island
    island = scheduler.island
    round_index = scheduler.round_index
    budget = scheduler.budget
    resume = list(scheduler.resume)
    n_v = list(scheduler.visit_counts)
    n_e = list(scheduler.edge_counts)
    off_support = dict(scheduler.off_support_counts)
    transfer_steps = scheduler.transfer_steps

    emitted: list[str] = []
    ids = plan.ids
    for _ in range(steps):
        if pending_island is not None and pending_pos >= len(pending):
            island = pending_island
            pending_island = None
            pending = []
            pending_pos = 0
            budget = round_index * weights[island] * scale
        if pending_pos < len(pending):
            nxt = pending[pending_pos]
            pending_pos += 1
            key = (cur, nxt)
            off_support[key] = off_support.get(key, 0) + 1
            transfer_steps += 1
        else:
            n_v[cur] += 1
            visits = n_v[cur]
            rows = support_out[cur]
            chosen = rows[0]
            for row in rows:
                if n_e[row[0]] * row[3] < row[2] * visits:
                    chosen = row
                    break
            n_e[chosen[0]] += 1
            nxt = chosen[1]
            budget -= 1
            if budget == 0:
                resume[island] = nxt
                nxt_island = island + 1
                if nxt_island == n_islands:
                    nxt_island = 0
                    round_index += 1
                dest = resume[nxt_island]
                if dest is None:
                    dest = plan.entry_vertices[nxt_island]
                pending = list(plan.transfer_path(nxt, dest))
                pending_pos = 0
                pending_island = nxt_island
        cur = nxt
        emitted.append(ids[nxt])

    new_state = replace(
        scheduler,
        current=cur,
        pending=tuple(pending[pending_pos:]),
        pending_island=pending_island,
        island=island,
        round_index=round_index,
        budget=budget,
        resume=tuple(resume),
        visit_counts=tuple(n_v),
        edge_counts=tuple(n_e),
        off_support_counts=off_support,
        steps_total=scheduler.steps_total + steps,
        transfer_steps=transfer_steps,
    )
    return emitted, new_state


def measured_means(scheduler: Scheduler) -> dict[str, Fraction]:
    """Exact per-player mean reward over every step taken so far."""
    if scheduler.steps_total == 0:
        raise ValueError("no steps taken yet")
    game = scheduler.game
    plan = scheduler.plan
    counts: Counter[Edge] = Counter()
    for eid, count in enumerate(scheduler.edge_counts):
        if count:
            s, t = plan.support_edges[eid]
            counts[(plan.ids[s], plan.ids[t])] += count
    for (s, t), count in scheduler.off_support_counts.items():
        counts[(plan.ids[s], plan.ids[t])] += count
    total = scheduler.steps_total
    return {
        p: sum(
            (count * game.reward(e, p) for e, count in counts.items()), Fraction(0)
        ) / total
        for p in game.players
    }


def transfer_fraction(scheduler: Scheduler) -> Fraction:
    """Share of steps spent outside island segments (entry and transfers)."""
    if scheduler.steps_total == 0:
        raise ValueError("no steps taken yet")
    return Fraction(scheduler.transfer_steps, scheduler.steps_total)


def running_means(game: Game, segment: Sequence[str]) -> dict[str, Fraction]:
    """Per-player average edge reward over a finite vertex sequence."""
    if len(segment) < 2:
        raise ValueError("segment traverses no edges")
    counts = Counter(zip(segment, segment[1:]))
    for edge in counts:
        if not game.has_edge(edge):
            raise ValueError(f"segment uses missing edge ({edge[0]!r}, {edge[1]!r})")
    total = len(segment) - 1
    return {
        p: sum(
            (count * game.reward(e, p) for e, count in counts.items()), Fraction(0)
        ) / total
        for p in game.players
    }


def simulate_deviation(
    game: Game,
    scheduler: Scheduler,
    deviator: str,
    at: int,
    alt: Edge,
    horizon: int,
    punish: PunishmentTable,
) -> Fraction:
    """Mean reward the deviator collects over ``horizon`` steps after leaving
    the schedule at step ``at`` (relative to ``scheduler``) via edge ``alt``.

    After the deviation the coalition plays its memoryless punishment
    strategy against her while she plays her own optimal memoryless strategy;
    the resulting lasso mean is evaluated in closed form.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    state = scheduler
    if at > 0:
        _, state = advance(scheduler, at)
    here = state.current_vertex
    if game.owner[here] != deviator:
        raise ValueError(
            f"scheduled vertex {here!r} at step {at} is owned by "
            f"{game.owner[here]!r}, not {deviator!r}"
        )
    if alt[0] != here or not game.has_edge(alt):
        raise ValueError(f"alternative edge {alt!r} does not leave {here!r}")
    peek, _ = advance(state, 1)
    if alt[1] == peek[0]:
        raise ValueError("alternative edge must differ from the scheduled edge")

    own, coalition = punish.strategies(deviator)
    next_vertex = {v: e[1] for v, e in own.items()}
    next_vertex.update({v: e[1] for v, e in coalition.items()})
    prefix_edges, cycle_edges = _follow(next_vertex, alt[1])

    head = [game.reward(alt, deviator)]
    head += [game.reward(e, deviator) for e in prefix_edges]
    cycle = [game.reward(e, deviator) for e in cycle_edges]

    total = Fraction(0)
    remaining = horizon
    for r in head:
        if remaining == 0:
            break
        total += r
        remaining -= 1
    if remaining:
        full, part = divmod(remaining, len(cycle))
        total += full * sum(cycle, Fraction(0)) + sum(cycle[:part], Fraction(0))
    return total / horizon
