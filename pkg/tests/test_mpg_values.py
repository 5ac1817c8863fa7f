"""Punishment values and strategies against the brute-force oracle."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest

from mpgeq.game_model import Game, parse_game
from mpgeq.mpg_values import (
    PunishmentTable,
    _follow,
    _halving_strategy,
    _scaled_weights,
    brute_force_strategies,
    brute_force_values,
    punishment_strategies,
    punishment_values,
)

from conftest import random_game


def _loop_game(reward: str) -> Game:
    return parse_game(
        '{"players": ["d"], "initial": "a",'
        ' "vertices": [{"id": "a", "owner": "d"}],'
        ' "edges": [{"from": "a", "to": "a", "rewards": {"d": "%s"}}]}' % reward
    )


def _replay_value(game: Game, player: str, own, coalition, start: str) -> Fraction:
    nxt = {v: e[1] for v, e in own.items()}
    nxt.update({v: e[1] for v, e in coalition.items()})
    _, cycle = _follow(nxt, start)
    total = sum((game.reward(e, player) for e in cycle), Fraction(0))
    return total / len(cycle)


class TestPunishmentValues:
    def test_forced_self_loop(self):
        game = _loop_game("5")
        assert punishment_values(game, "d") == {"a": 5}

    def test_fig1_first(self, fig1):
        values = punishment_values(fig1, "first")
        assert values["1"] == 0  # the coalition answers vertex 2 with the -1 loop
        assert values == brute_force_values(fig1, "first")

    def test_fig1_dictator(self, fig1):
        values = punishment_values(fig1, "dictator")
        assert values["2"] == 2
        assert values["1"] == 0
        assert values == brute_force_values(fig1, "dictator")

    def test_fig1_passive(self, fig1):
        values = punishment_values(fig1, "passive")
        assert values["1"] == -2
        assert values["3"] == -1
        assert values["4"] == 0
        assert values["5"] == -2
        assert values == brute_force_values(fig1, "passive")

    def test_rational_rewards(self):
        game = _loop_game("3/2")
        assert brute_force_values(game, "d") == {"a": Fraction(3, 2)}
        assert punishment_values(game, "d") == {"a": Fraction(3, 2)}

    def test_two_vertex_choice(self):
        # p owns both vertices, loops pay 0 and 1: p reaches the better loop.
        game = parse_game(
            '{"players": ["p", "q"], "initial": "a",'
            ' "vertices": [{"id": "a", "owner": "p"}, {"id": "b", "owner": "p"}],'
            ' "edges": ['
            '{"from": "a", "to": "a"},'
            '{"from": "a", "to": "b"},'
            '{"from": "b", "to": "b", "rewards": {"p": "1"}},'
            '{"from": "b", "to": "a"}]}'
        )
        assert punishment_values(game, "p") == {"a": 1, "b": 1}

    def test_oracle_equivalence_random(self):
        rng = random.Random(42)
        for _ in range(60):
            game = random_game(rng)
            for player in game.players:
                assert punishment_values(game, player) == brute_force_values(
                    game, player
                )

    def test_denominator_bound(self):
        rng = random.Random(43)
        for _ in range(40):
            game = random_game(rng)
            n = len(game.vertices)
            for player in game.players:
                for value in punishment_values(game, player).values():
                    assert value.denominator <= n

    def test_scaling_equivariance(self):
        rng = random.Random(44)
        for _ in range(10):
            game = random_game(rng)
            player = game.players[0]
            factor = Fraction(5, 3)
            scaled = Game(
                players=game.players, vertices=game.vertices,
                owner=dict(game.owner), initial=game.initial, edges=game.edges,
                rewards={
                    e: {p: (factor * r if p == player else r) for p, r in per.items()}
                    for e, per in game.rewards.items()
                },
            )
            base = punishment_values(game, player)
            assert punishment_values(scaled, player) == {
                v: factor * x for v, x in base.items()
            }

    def test_prefix_independence(self):
        rng = random.Random(45)
        for _ in range(10):
            game = random_game(rng)
            player = game.players[-1]
            base = punishment_values(game, player)
            for other_initial in game.vertices[1:]:
                moved = Game(
                    players=game.players, vertices=game.vertices,
                    owner=dict(game.owner), initial=other_initial,
                    edges=game.edges, rewards=dict(game.rewards),
                )
                assert punishment_values(moved, player) == base


class TestBruteForce:
    def test_bound_enforced(self, fig1):
        with pytest.raises(ValueError, match="bound"):
            brute_force_values(fig1, "first", bound=1)


class TestStrategies:
    def test_self_loop(self):
        game = _loop_game("2")
        own, coalition = punishment_strategies(game, "d")
        assert own == {"a": ("a", "a")}
        assert coalition == {}

    def test_fig1_coalition_punishes_first(self, fig1):
        _, coalition = punishment_strategies(fig1, "first")
        assert coalition["2"] == ("2", "3")

    def test_fig1_dictator_grabs_selfish_loop(self, fig1):
        own, _ = punishment_strategies(fig1, "dictator")
        assert own["2"] == ("2", "3")

    def test_replay_matches_values(self):
        rng = random.Random(46)
        for _ in range(25):
            game = random_game(rng)
            for player in game.players:
                values = punishment_values(game, player)
                own, coalition = punishment_strategies(game, player, values)
                assert set(own) == {v for v in game.vertices if game.owner[v] == player}
                assert set(coalition) == {
                    v for v in game.vertices if game.owner[v] != player
                }
                for v in game.vertices:
                    assert _replay_value(game, player, own, coalition, v) == values[v]

    def test_halving_agrees_with_scan(self):
        # Force the halving path on games small enough to cross-check.
        rng = random.Random(47)
        for _ in range(10):
            game = random_game(rng, max_vertices=5)
            player = game.players[0]
            values = punishment_values(game, player)
            mine = [v for v in game.vertices if game.owner[v] == player]
            theirs = [v for v in game.vertices if game.owner[v] != player]
            own = _halving_strategy(game, player, mine, values)
            coalition = _halving_strategy(game, player, theirs, values)
            for v in game.vertices:
                assert _replay_value(game, player, own, coalition, v) == values[v]
            # positional optimality: the halved strategies are a minimax pair
            scan_own, scan_coalition = brute_force_strategies(game, player, values)
            for v in game.vertices:
                assert _replay_value(game, player, scan_own, coalition, v) == values[v]
                assert _replay_value(game, player, own, scan_coalition, v) == values[v]


class TestPunishmentTable:
    def test_lazy_and_consistent(self, fig1):
        table = PunishmentTable(fig1)
        assert table.values("first")["1"] == 0
        own, coalition = table.strategies("first")
        assert coalition["2"] == ("2", "3")
        assert table.values("first") is table.values("first")


def test_scaled_weights_clears_denominators():
    game = _loop_game("3/2")
    weights, denom = _scaled_weights(game, "d")
    assert denom == 2
    assert weights[("a", "a")] == 3
