"""Multi-player mean-payoff games on graphs.

A game is a finite directed graph whose vertices are owned by players.  The
player owning the current vertex picks an outgoing edge; the joint infinite
walk pays each player the limit-inferior average of her per-edge rewards.
All rewards are exact rationals and every operation here is a pure function,
so results are reproducible bit for bit.

The on-disk format is a JSON document::

    {
      "players": ["first", "dictator", "passive"],
      "initial": "1",
      "vertices": [{"id": "1", "owner": "first"}, ...],
      "edges": [{"from": "1", "to": "2", "rewards": {"first": "1"}}, ...]
    }

Reward values are rational strings, either an optionally signed integer or
"p/q" with q > 0.  Missing reward entries mean 0.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

__all__ = [
    "Game",
    "GameFormatError",
    "InvalidGameError",
    "LassoPlay",
    "format_rational",
    "lasso_payoff",
    "parse_game",
    "parse_rational",
    "reachable",
    "sccs",
    "serialize_game",
    "validate",
]


class GameFormatError(ValueError):
    """A game document is syntactically or structurally malformed."""


class InvalidGameError(ValueError):
    """A game violates a structural invariant; carries all violations."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/([1-9]\d*))?$")


def parse_rational(text: str) -> Fraction:
    """Parse a rational string: signed integer or "p/q" with q > 0."""
    s = text.strip()
    if not _RATIONAL_RE.match(s):
        raise GameFormatError(f"not a rational string: {text!r}")
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def format_rational(value: Fraction) -> str:
    """Canonical rational string: lowest terms, sign on the numerator."""
    return str(value)


Edge = tuple[str, str]


@dataclass(frozen=True)
class Game:
    """An immutable multi-player mean-payoff game.

    ``rewards`` maps an edge to the per-player mapping of nonzero rewards;
    omitted entries are 0.  Zero entries are normalised away on construction
    so that structural equality matches reward equality.
    """

    players: tuple[str, ...]
    vertices: tuple[str, ...]
    owner: Mapping[str, str]
    initial: str
    edges: tuple[Edge, ...]
    rewards: Mapping[Edge, Mapping[str, Fraction]]

    _succ: Mapping[str, tuple[str, ...]] = field(
        init=False, repr=False, compare=False, default=None
    )
    _edge_set: frozenset[Edge] = field(
        init=False, repr=False, compare=False, default=None
    )

    def __post_init__(self) -> None:
        cleaned: dict[Edge, dict[str, Fraction]] = {}
        for edge, per_player in self.rewards.items():
            nonzero = {p: Fraction(r) for p, r in per_player.items() if r != 0}
            if nonzero:
                cleaned[edge] = nonzero
        object.__setattr__(self, "rewards", cleaned)
        succ: dict[str, list[str]] = {v: [] for v in self.vertices}
        for src, dst in self.edges:
            if src in succ:
                succ[src].append(dst)
        object.__setattr__(
            self, "_succ", {v: tuple(ts) for v, ts in succ.items()}
        )
        object.__setattr__(self, "_edge_set", frozenset(self.edges))

    def successors(self, vertex: str) -> tuple[str, ...]:
        return self._succ[vertex]

    def out_edges(self, vertex: str) -> tuple[Edge, ...]:
        return tuple((vertex, t) for t in self._succ[vertex])

    def has_edge(self, edge: Edge) -> bool:
        return edge in self._edge_set

    def reward(self, edge: Edge, player: str) -> Fraction:
        return self.rewards.get(edge, {}).get(player, Fraction(0))

    def vertex_index(self, vertex: str) -> int:
        return self.vertices.index(vertex)

    def owned_by(self, player: str) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.owner[v] == player)


@dataclass(frozen=True)
class LassoPlay:
    """An ultimately periodic play: ``prefix`` followed by ``cycle`` forever."""

    prefix: tuple[str, ...]
    cycle: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.cycle:
            raise ValueError("lasso cycle must be nonempty")


def validate(game: Game) -> list[str]:
    """Return one description per violated game invariant (empty if valid)."""
    problems: list[str] = []
    vertex_set = set(game.vertices)
    player_set = set(game.players)
    if len(game.vertices) != len(vertex_set):
        problems.append("duplicate vertex identifiers")
    if len(game.players) != len(player_set):
        problems.append("duplicate player identifiers")
    if game.initial not in vertex_set:
        problems.append(f"initial vertex {game.initial!r} is not a vertex")
    for v in game.vertices:
        if v not in game.owner:
            problems.append(f"vertex {v!r} has no owner")
        elif game.owner[v] not in player_set:
            problems.append(f"vertex {v!r} owned by unknown player {game.owner[v]!r}")
    seen: set[Edge] = set()
    for src, dst in game.edges:
        if src not in vertex_set:
            problems.append(f"edge ({src!r}, {dst!r}) leaves unknown vertex {src!r}")
        if dst not in vertex_set:
            problems.append(f"edge ({src!r}, {dst!r}) enters unknown vertex {dst!r}")
        if (src, dst) in seen:
            problems.append(f"duplicate edge ({src!r}, {dst!r})")
        seen.add((src, dst))
    for v in game.vertices:
        if v in vertex_set and not game.successors(v):
            problems.append(f"vertex {v!r} has no outgoing edge")
    for edge, per_player in game.rewards.items():
        if edge not in seen:
            problems.append(f"reward on missing edge ({edge[0]!r}, {edge[1]!r})")
        for p in per_player:
            if p not in player_set:
                problems.append(f"reward for unknown player {p!r} on edge {edge!r}")
    return problems


def parse_game(text: str) -> Game:
    """Parse a UTF-8 game document, checking every game invariant.

    Raises GameFormatError for malformed documents (syntax errors carry the
    line/column position) and InvalidGameError when the described game breaks
    an invariant; the messages name the offending vertex or edge.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise GameFormatError("game document must be a JSON object")
    for key in ("players", "initial", "vertices", "edges"):
        if key not in doc:
            raise GameFormatError(f"missing field {key!r}")

    players = doc["players"]
    if not isinstance(players, list) or not all(isinstance(p, str) for p in players):
        raise GameFormatError('"players" must be an array of strings')
    player_set = set(players)

    vertices: list[str] = []
    owner: dict[str, str] = {}
    for entry in doc["vertices"]:
        if not isinstance(entry, dict) or "id" not in entry or "owner" not in entry:
            raise GameFormatError('each vertex needs "id" and "owner"')
        vid, who = entry["id"], entry["owner"]
        if who not in player_set:
            raise GameFormatError(f"vertex {vid!r} owned by unknown player {who!r}")
        vertices.append(vid)
        owner[vid] = who

    edges: list[Edge] = []
    rewards: dict[Edge, dict[str, Fraction]] = {}
    for entry in doc["edges"]:
        if not isinstance(entry, dict) or "from" not in entry or "to" not in entry:
            raise GameFormatError('each edge needs "from" and "to"')
        edge = (entry["from"], entry["to"])
        per_player: dict[str, Fraction] = {}
        for p, raw in entry.get("rewards", {}).items():
            if p not in player_set:
                raise GameFormatError(
                    f"reward for unknown player {p!r} on edge {edge!r}"
                )
            if not isinstance(raw, str):
                raise GameFormatError(
                    f"reward for {p!r} on edge {edge!r} must be a rational string"
                )
            per_player[p] = parse_rational(raw)
        edges.append(edge)
        if per_player:
            rewards[edge] = per_player

    game = Game(
        players=tuple(players),
        vertices=tuple(vertices),
        owner=owner,
        initial=doc["initial"],
        edges=tuple(edges),
        rewards=rewards,
    )
    problems = validate(game)
    if problems:
        raise InvalidGameError(problems)
    return game


def serialize_game(game: Game) -> str:
    """Canonical document for ``game``; parse_game round-trips exactly."""
    doc = {
        "players": list(game.players),
        "initial": game.initial,
        "vertices": [{"id": v, "owner": game.owner[v]} for v in game.vertices],
        "edges": [],
    }
    for edge in game.edges:
        entry: dict = {"from": edge[0], "to": edge[1]}
        per_player = game.rewards.get(edge, {})
        if per_player:
            entry["rewards"] = {
                p: format_rational(per_player[p])
                for p in game.players
                if p in per_player
            }
        doc["edges"].append(entry)
    return json.dumps(doc, indent=2) + "\n"


def lasso_payoff(game: Game, play: LassoPlay, player: str) -> Fraction:
    """Mean reward of ``player`` on the cycle of an ultimately periodic play.

    For such plays the cycle mean equals the limit-inferior running average.
    """
    walk = list(play.prefix) + list(play.cycle) + [play.cycle[0]]
    for a, b in zip(walk, walk[1:]):
        if not game.has_edge((a, b)):
            raise ValueError(f"play uses missing edge ({a!r}, {b!r})")
    cycle_walk = list(play.cycle) + [play.cycle[0]]
    total = sum(
        (game.reward((a, b), player) for a, b in zip(cycle_walk, cycle_walk[1:])),
        Fraction(0),
    )
    return total / len(play.cycle)


def reachable(game: Game, allowed: Iterable[str]) -> frozenset[str]:
    """Vertices reachable from the initial vertex via edges inside ``allowed``.

    Empty when the initial vertex is not itself in ``allowed``.
    """
    inside = set(allowed)
    if game.initial not in inside:
        return frozenset()
    seen = {game.initial}
    frontier = [game.initial]
    while frontier:
        v = frontier.pop()
        for t in game.successors(v):
            if t in inside and t not in seen:
                seen.add(t)
                frontier.append(t)
    return frozenset(seen)


def sccs(game: Game, within: Iterable[str]) -> list[frozenset[str]]:
    """Strongly connected components of the subgraph induced by ``within``.

    Only components containing at least one edge (a cycle) are returned,
    ordered by their smallest vertex position in the game's vertex order.
    """
    inside = set(within)
    order = [v for v in game.vertices if v in inside]
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = iter(range(len(order) + len(order) + 1))
    components: list[frozenset[str]] = []

    # Iterative Tarjan; recursion depth would be a hazard on long chains.
    for root in order:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, edge_pos = work.pop()
            if edge_pos == 0:
                index[v] = low[v] = next(counter)
                stack.append(v)
                on_stack.add(v)
            targets = [t for t in game.successors(v) if t in inside]
            advanced = False
            for pos in range(edge_pos, len(targets)):
                t = targets[pos]
                if t not in index:
                    work.append((v, pos + 1))
                    work.append((t, 0))
                    advanced = True
                    break
                if t in on_stack:
                    low[v] = min(low[v], index[t])
            if advanced:
                continue
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                components.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    def has_cycle(comp: frozenset[str]) -> bool:
        if len(comp) > 1:
            return True
        (v,) = comp
        return v in game.successors(v)

    cyclic = [c for c in components if has_cycle(c)]
    position = {v: i for i, v in enumerate(game.vertices)}
    cyclic.sort(key=lambda c: min(position[v] for v in c))
    return cyclic
