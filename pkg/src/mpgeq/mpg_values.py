"""Punishment values: two-player mean-payoff games of one player vs the rest.

For a player p the remaining players form a coalition minimising p's mean
reward.  The value of that zero-sum game at each vertex is what p can still
secure once everyone turns against her; these values drive every equilibrium
constraint in the solver.

Values are computed exactly: p's rewards are scaled to integers, a
finite-horizon value iteration is run, and the averaged iterate is rounded to
the unique rational with denominator at most |V| inside the known error
window.  The iteration may stop early only when that window already pins a
unique candidate at every vertex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

import numpy as np

from .game_model import Edge, Game

__all__ = [
    "PunishmentTable",
    "brute_force_strategies",
    "brute_force_values",
    "punishment_strategies",
    "punishment_values",
]

# Above this many memoryless profiles, strategy extraction switches from the
# exhaustive scan to value-preserving edge halving.
_PROFILE_SCAN_LIMIT = 50_000

_BRUTE_FORCE_BOUND = 10**6


def _scaled_weights(game: Game, player: str) -> tuple[dict[Edge, int], int]:
    """Clear denominators of ``player``'s rewards; returns (weights, scale)."""
    denom = 1
    for edge in game.edges:
        denom = math.lcm(denom, game.reward(edge, player).denominator)
    weights = {e: int(game.reward(e, player) * denom) for e in game.edges}
    return weights, denom


class _ValueIterator:
    """Finite-horizon iteration nu_k(v) = max/min over edges of w + nu_{k-1}.

    The classical error bound |nu_k(v) - k*val(v)| <= 2nW holds at every
    horizon, so the window nu_k(v)/k +- 2nW/k always contains the exact value.
    """

    def __init__(self, game: Game, player: str, weights: dict[Edge, int],
                 restricted: Mapping[str, list[Edge]] | None = None):
        self.n = len(game.vertices)
        index = {v: i for i, v in enumerate(game.vertices)}
        srcs: list[int] = []
        dsts: list[int] = []
        wts: list[int] = []
        starts: list[int] = []
        signs_v: list[int] = []
        for v in game.vertices:
            starts.append(len(srcs))
            signs_v.append(1 if game.owner[v] == player else -1)
            edges = restricted[v] if restricted is not None else game.out_edges(v)
            for e in edges:
                srcs.append(index[e[0]])
                dsts.append(index[e[1]])
                wts.append(weights[e])
        self.max_weight = max((abs(w) for w in wts), default=0)
        self.starts = np.asarray(starts, dtype=np.int64)
        self.dst = np.asarray(dsts, dtype=np.int64)
        self.sign_v = np.asarray(signs_v, dtype=np.int64)
        self.sign_e = self.sign_v[np.asarray(srcs, dtype=np.int64)]
        self.w = np.asarray(wts, dtype=np.int64) * self.sign_e
        self.horizon_cap = 4 * self.n**3 * self.max_weight
        # int64 headroom: |nu_k| <= k * W must stay well under 2**62.
        self.exact_ints = self.horizon_cap * max(self.max_weight, 1) >= 2**62

    def run(self, accept) -> object:
        """Iterate, calling ``accept(k, values)`` at doubling checkpoints.

        ``accept`` returns None to continue, or a final result.  The horizon
        cap is always checked last; by then the window width 4nW/k is below
        the minimal gap between candidate rationals, so acceptance is total.
        """
        if self.max_weight == 0:
            return accept(1, [0] * self.n)
        if self.exact_ints:
            return self._run_python(accept)
        vals = np.zeros(self.n, dtype=np.int64)
        k = 0
        checkpoint = max(4 * self.n, 1)
        while True:
            step_to = min(checkpoint, self.horizon_cap)
            while k < step_to:
                cand = self.w + self.sign_e * vals[self.dst]
                vals = self.sign_v * np.maximum.reduceat(cand, self.starts)
                k += 1
            result = accept(k, [int(x) for x in vals])
            if result is not None or k >= self.horizon_cap:
                return result
            checkpoint *= 2

    def _run_python(self, accept) -> object:
        # Arbitrary-precision fallback for horizons that would overflow int64.
        starts = [int(s) for s in self.starts] + [len(self.dst)]
        dst = [int(d) for d in self.dst]
        w = [int(x) for x in self.w]
        sign_v = [int(s) for s in self.sign_v]
        sign_e = [int(s) for s in self.sign_e]
        vals = [0] * self.n
        k = 0
        checkpoint = max(4 * self.n, 1)
        while True:
            step_to = min(checkpoint, self.horizon_cap)
            while k < step_to:
                vals = [
                    sign_v[i]
                    * max(
                        w[j] + sign_e[j] * vals[dst[j]]
                        for j in range(starts[i], starts[i + 1])
                    )
                    for i in range(self.n)
                ]
                k += 1
            result = accept(k, vals)
            if result is not None or k >= self.horizon_cap:
                return result
            checkpoint *= 2


def _window_candidates(value: int, k: int, n: int, max_w: int) -> set[Fraction]:
    """Rationals with denominator <= n inside the exact-value window at step k."""
    lo = Fraction(value - 2 * n * max_w, k)
    hi = Fraction(value + 2 * n * max_w, k)
    found: set[Fraction] = set()
    for q in range(1, n + 1):
        for a in range(math.ceil(lo * q), math.floor(hi * q) + 1):
            found.add(Fraction(a, q))
    return found


def punishment_values(game: Game, player: str) -> dict[str, Fraction]:
    """Exact per-vertex value of the game of ``player`` against the coalition.

    ``player`` maximises her limit-inferior mean reward; all other players
    jointly minimise it.
    """
    weights, denom = _scaled_weights(game, player)
    it = _ValueIterator(game, player, weights)
    n, max_w = it.n, it.max_weight

    def accept(k: int, vals: list[int]):
        result: dict[str, Fraction] = {}
        for v, raw in zip(game.vertices, vals):
            cands = _window_candidates(raw, k, n, max_w)
            if len(cands) != 1:
                return None
            result[v] = cands.pop() / denom
        return result

    out = it.run(accept)
    assert out is not None, "horizon cap must pin a unique value"
    return out


def _values_match(game: Game, player: str, weights: dict[Edge, int],
                  restricted: Mapping[str, list[Edge]],
                  reference: Mapping[str, Fraction], denom: int) -> bool:
    """Whether the edge-restricted game has exactly the reference values."""
    it = _ValueIterator(game, player, weights, restricted)
    n = len(game.vertices)
    max_w = it.max_weight

    def accept(k: int, vals: list[int]):
        decided = True
        for v, raw in zip(game.vertices, vals):
            ref = reference[v] * denom
            lo = Fraction(raw - 2 * n * max_w, k)
            hi = Fraction(raw + 2 * n * max_w, k)
            if ref < lo or ref > hi:
                return False
            if len(_window_candidates(raw, k, n, max_w)) != 1:
                decided = False
        return True if decided else None

    out = it.run(accept)
    assert out is not None
    return out


def _follow(next_vertex: Mapping[str, str], start: str) -> tuple[list[Edge], list[Edge]]:
    """Walk a functional graph; returns (prefix edges, cycle edges)."""
    seen: dict[str, int] = {}
    path = [start]
    v = start
    while v not in seen:
        seen[v] = len(path) - 1
        v = next_vertex[v]
        path.append(v)
    cut = seen[v]
    edges = list(zip(path, path[1:]))
    return edges[:cut], edges[cut:]


def _cycle_mean(game: Game, player: str, cycle_edges: list[Edge]) -> Fraction:
    total = sum((game.reward(e, player) for e in cycle_edges), Fraction(0))
    return total / len(cycle_edges)


def _profile_payoffs(game: Game, player: str, next_vertex: dict[str, str]) -> dict[str, Fraction]:
    """Payoff for ``player`` from every start vertex under a fixed profile.

    Prefix vertices inherit the mean of the cycle their walk runs into.
    """
    payoff: dict[str, Fraction] = {}
    for start in game.vertices:
        if start in payoff:
            continue
        chain = [start]
        position = {start: 0}
        v = start
        while True:
            v = next_vertex[v]
            if v in payoff:
                mean = payoff[v]
                break
            if v in position:
                cycle_vertices = chain[position[v]:]
                cycle = list(zip(cycle_vertices, cycle_vertices[1:] + [v]))
                mean = _cycle_mean(game, player, cycle)
                break
            position[v] = len(chain)
            chain.append(v)
        for u in chain:
            payoff[u] = mean
    return payoff


def _profile_count(game: Game) -> int:
    count = 1
    for v in game.vertices:
        count *= len(game.successors(v))
    return count


def brute_force_values(game: Game, player: str, *,
                       bound: int = _BRUTE_FORCE_BOUND) -> dict[str, Fraction]:
    """Oracle: exact minimax over all memoryless strategy pairs.

    Each pair induces a functional graph; the payoff from a vertex is the
    mean of the cycle it runs into.  Only usable while the total number of
    profiles stays below ``bound``.
    """
    if _profile_count(game) > bound:
        raise ValueError(
            f"profile count {_profile_count(game)} exceeds bound {bound}"
        )
    mine = [v for v in game.vertices if game.owner[v] == player]
    theirs = [v for v in game.vertices if game.owner[v] != player]
    best: dict[str, Fraction] | None = None
    for my_choice in product(*(game.successors(v) for v in mine)):
        worst: dict[str, Fraction] | None = None
        for their_choice in product(*(game.successors(v) for v in theirs)):
            nxt = dict(zip(mine, my_choice))
            nxt.update(zip(theirs, their_choice))
            pay = _profile_payoffs(game, player, nxt)
            if worst is None:
                worst = pay
            else:
                worst = {v: min(worst[v], pay[v]) for v in game.vertices}
        assert worst is not None
        if best is None:
            best = worst
        else:
            best = {v: max(best[v], worst[v]) for v in game.vertices}
    assert best is not None
    return best


Strategy = dict[str, Edge]


def brute_force_strategies(game: Game, player: str,
                           values: Mapping[str, Fraction], *,
                           bound: int = _BRUTE_FORCE_BOUND) -> tuple[Strategy, Strategy]:
    """Scan memoryless strategies for a pair optimal at every vertex at once."""
    if _profile_count(game) > bound:
        raise ValueError("profile count exceeds bound")
    mine = [v for v in game.vertices if game.owner[v] == player]
    theirs = [v for v in game.vertices if game.owner[v] != player]

    own_strategy: Strategy | None = None
    for my_choice in product(*(game.successors(v) for v in mine)):
        ok = True
        for their_choice in product(*(game.successors(v) for v in theirs)):
            nxt = dict(zip(mine, my_choice))
            nxt.update(zip(theirs, their_choice))
            pay = _profile_payoffs(game, player, nxt)
            if any(pay[v] < values[v] for v in game.vertices):
                ok = False
                break
        if ok:
            own_strategy = {v: (v, t) for v, t in zip(mine, my_choice)}
            break
    coalition_strategy: Strategy | None = None
    for their_choice in product(*(game.successors(v) for v in theirs)):
        ok = True
        for my_choice in product(*(game.successors(v) for v in mine)):
            nxt = dict(zip(mine, my_choice))
            nxt.update(zip(theirs, their_choice))
            pay = _profile_payoffs(game, player, nxt)
            if any(pay[v] > values[v] for v in game.vertices):
                ok = False
                break
        if ok:
            coalition_strategy = {v: (v, t) for v, t in zip(theirs, their_choice)}
            break
    assert own_strategy is not None and coalition_strategy is not None, (
        "positional optimal strategies exist in mean-payoff games"
    )
    return own_strategy, coalition_strategy


def _halving_strategy(game: Game, player: str, side_vertices: list[str],
                      values: Mapping[str, Fraction]) -> Strategy:
    """Shrink one side's edge sets by halving while values stay unchanged.

    At least one half always preserves the values (a positional optimal
    strategy picks its edge from one half), so when the first half fails the
    second is kept without a recheck.
    """
    weights, denom = _scaled_weights(game, player)
    restricted: dict[str, list[Edge]] = {v: list(game.out_edges(v)) for v in game.vertices}
    for v in side_vertices:
        while len(restricted[v]) > 1:
            edges = restricted[v]
            half = edges[: (len(edges) + 1) // 2]
            trial = dict(restricted)
            trial[v] = half
            if _values_match(game, player, weights, trial, values, denom):
                restricted[v] = half
            else:
                restricted[v] = edges[(len(edges) + 1) // 2:]
    return {v: restricted[v][0] for v in side_vertices}


def punishment_strategies(game: Game, player: str,
                          values: Mapping[str, Fraction] | None = None
                          ) -> tuple[Strategy, Strategy]:
    """Optimal memoryless strategies for ``player`` and for the coalition.

    Following both from any vertex v yields a play whose mean reward for
    ``player`` is exactly the punishment value at v; the result is verified
    by replay before it is returned.
    """
    if values is None:
        values = punishment_values(game, player)
    mine = [v for v in game.vertices if game.owner[v] == player]
    theirs = [v for v in game.vertices if game.owner[v] != player]
    if _profile_count(game) <= _PROFILE_SCAN_LIMIT:
        own, coalition = brute_force_strategies(game, player, values)
    else:
        own = _halving_strategy(game, player, mine, values)
        coalition = _halving_strategy(game, player, theirs, values)

    nxt = {v: e[1] for v, e in own.items()}
    nxt.update({v: e[1] for v, e in coalition.items()})
    for v in game.vertices:
        _, cycle = _follow(nxt, v)
        achieved = _cycle_mean(game, player, cycle)
        assert achieved == values[v], (
            f"strategy replay from {v!r} yields {achieved}, expected {values[v]}"
        )
    return own, coalition


@dataclass
class PunishmentTable:
    """Per-player punishment values with lazily extracted strategies."""

    game: Game
    _values: dict[str, dict[str, Fraction]] = field(default_factory=dict)
    _strategies: dict[str, tuple[Strategy, Strategy]] = field(default_factory=dict)

    def values(self, player: str) -> dict[str, Fraction]:
        if player not in self._values:
            self._values[player] = punishment_values(self.game, player)
        return self._values[player]

    def strategies(self, player: str) -> tuple[Strategy, Strategy]:
        if player not in self._strategies:
            self._strategies[player] = punishment_strategies(
                self.game, player, self.values(player)
            )
        return self._strategies[player]
