"""Shared fixtures: the running example game and a seeded game generator."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest

from mpgeq.game_model import Game

# Five-vertex example: "first" owns the initial vertex and chooses between a
# neutral loop (via 4) and handing control to the "dictator" (vertex 2), who
# chooses between a selfish loop (3) and a shared one (5) that hurts only the
# "passive" player.
FIG1_DOCUMENT = """\
{
  "players": ["first", "dictator", "passive"],
  "initial": "1",
  "vertices": [
    {"id": "1", "owner": "first"},
    {"id": "2", "owner": "dictator"},
    {"id": "3", "owner": "passive"},
    {"id": "4", "owner": "passive"},
    {"id": "5", "owner": "passive"}
  ],
  "edges": [
    {"from": "1", "to": "2"},
    {"from": "1", "to": "4"},
    {"from": "2", "to": "3"},
    {"from": "2", "to": "5"},
    {"from": "3", "to": "3", "rewards": {"first": "-1", "dictator": "2", "passive": "-1"}},
    {"from": "4", "to": "4"},
    {"from": "5", "to": "5", "rewards": {"first": "1", "dictator": "1", "passive": "-2"}}
  ]
}
"""


@pytest.fixture(scope="session")
def fig1() -> Game:
    from mpgeq.game_model import parse_game

    return parse_game(FIG1_DOCUMENT)


def random_game(
    rng: random.Random,
    *,
    max_vertices: int = 6,
    max_players: int = 3,
    reward_low: int = -2,
    reward_high: int = 2,
    max_out_degree: int = 3,
) -> Game:
    """Small random game: integer rewards, bounded out-degree, no sinks."""
    n = rng.randint(2, max_vertices)
    k = rng.randint(2, max_players)
    players = tuple(f"p{i}" for i in range(k))
    vertices = tuple(f"v{i}" for i in range(n))
    owner = {v: players[rng.randrange(k)] for v in vertices}
    edges: list[tuple[str, str]] = []
    rewards: dict[tuple[str, str], dict[str, Fraction]] = {}
    for v in vertices:
        degree = rng.randint(1, min(max_out_degree, n))
        for t in sorted(rng.sample(range(n), degree)):
            edge = (v, vertices[t])
            edges.append(edge)
            per_player = {
                p: Fraction(rng.randint(reward_low, reward_high)) for p in players
            }
            rewards[edge] = per_player
    return Game(
        players=players,
        vertices=vertices,
        owner=owner,
        initial=vertices[0],
        edges=tuple(edges),
        rewards=rewards,
    )
