"""Game model: parsing, serialization, payoffs, graph utilities."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mpgeq.game_model import (
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

from conftest import FIG1_DOCUMENT, random_game

MINIMAL = '{"players": ["d"], "initial": "a", "vertices": [{"id": "a", "owner": "d"}], "edges": [{"from": "a", "to": "a"}]}'


class TestParseRational:
    @pytest.mark.parametrize(
        "text,value",
        [("0", 0), ("-2", -2), ("+7", 7), ("355/113", Fraction(355, 113)),
         ("-3/6", Fraction(-1, 2))],
    )
    def test_accepts(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("text", ["", "1.5", "1/0", "1/-2", "a", "1/2/3"])
    def test_rejects(self, text):
        with pytest.raises(GameFormatError):
            parse_rational(text)

    @given(st.fractions())
    def test_round_trip(self, value):
        assert parse_rational(format_rational(value)) == value


class TestParseGame:
    def test_minimal(self):
        game = parse_game(MINIMAL)
        assert game.vertices == ("a",)
        assert game.edges == (("a", "a"),)
        assert game.reward(("a", "a"), "d") == 0

    def test_fig1(self, fig1):
        assert len(fig1.vertices) == 5
        assert len(fig1.edges) == 7
        assert fig1.owner["1"] == "first"
        assert fig1.owner["2"] == "dictator"
        assert fig1.reward(("5", "5"), "passive") == -2

    def test_sink_vertex_named(self):
        doc = MINIMAL.replace('{"from": "a", "to": "a"}', '{"from": "a", "to": "a"}]}')
        text = (
            '{"players": ["d"], "initial": "a", '
            '"vertices": [{"id": "a", "owner": "d"}, {"id": "x", "owner": "d"}], '
            '"edges": [{"from": "a", "to": "x"}]}'
        )
        with pytest.raises(InvalidGameError, match="'x'"):
            parse_game(text)

    def test_syntax_error_position(self):
        with pytest.raises(GameFormatError, match="line"):
            parse_game("{not json")

    def test_unknown_owner(self):
        text = MINIMAL.replace('"owner": "d"', '"owner": "ghost"')
        with pytest.raises(GameFormatError, match="ghost"):
            parse_game(text)

    def test_unknown_reward_player(self):
        text = MINIMAL.replace(
            '{"from": "a", "to": "a"}',
            '{"from": "a", "to": "a", "rewards": {"ghost": "1"}}',
        )
        with pytest.raises(GameFormatError, match="ghost"):
            parse_game(text)

    def test_duplicate_edge(self):
        text = MINIMAL.replace(
            '{"from": "a", "to": "a"}',
            '{"from": "a", "to": "a"}, {"from": "a", "to": "a"}',
        )
        with pytest.raises(InvalidGameError, match="duplicate edge"):
            parse_game(text)

    def test_missing_field(self):
        with pytest.raises(GameFormatError, match="initial"):
            parse_game('{"players": [], "vertices": [], "edges": []}')


class TestSerialize:
    def test_round_trip_minimal(self):
        game = parse_game(MINIMAL)
        assert parse_game(serialize_game(game)) == game

    def test_round_trip_fig1(self, fig1):
        assert parse_game(serialize_game(fig1)) == fig1

    def test_exact_rational_kept_verbatim(self):
        text = MINIMAL.replace(
            '{"from": "a", "to": "a"}',
            '{"from": "a", "to": "a", "rewards": {"d": "355/113"}}',
        )
        game = parse_game(text)
        assert '"355/113"' in serialize_game(game)
        assert parse_game(serialize_game(game)) == game

    def test_round_trip_random(self):
        rng = random.Random(7)
        for _ in range(25):
            game = random_game(rng)
            assert parse_game(serialize_game(game)) == game


class TestLassoPayoff:
    def test_self_loop(self):
        game = parse_game(
            MINIMAL.replace(
                '{"from": "a", "to": "a"}',
                '{"from": "a", "to": "a", "rewards": {"d": "7/3"}}',
            )
        )
        play = LassoPlay(prefix=(), cycle=("a",))
        assert lasso_payoff(game, play, "d") == Fraction(7, 3)

    def test_fig1_neutral_play(self, fig1):
        play = LassoPlay(prefix=("1",), cycle=("4",))
        for p in fig1.players:
            assert lasso_payoff(fig1, play, p) == 0

    def test_fig1_shared_loop(self, fig1):
        play = LassoPlay(prefix=("1", "2"), cycle=("5",))
        assert lasso_payoff(fig1, play, "first") == 1
        assert lasso_payoff(fig1, play, "dictator") == 1
        assert lasso_payoff(fig1, play, "passive") == -2

    def test_bad_play_rejected(self, fig1):
        with pytest.raises(ValueError, match="missing edge"):
            lasso_payoff(fig1, LassoPlay(prefix=("1",), cycle=("3",)), "first")

    def test_rotation_and_pumping_invariance(self):
        rng = random.Random(11)
        checked = 0
        while checked < 15:
            game = random_game(rng)
            cycles = sccs(game, game.vertices)
            if not cycles:
                continue
            # build a concrete cycle inside the first component by walking it
            comp = cycles[0]
            start = min(comp, key=game.vertex_index)
            walk = [start]
            while True:
                nxt = next(t for t in game.successors(walk[-1]) if t in comp)
                if nxt == start:
                    break
                if nxt in walk:
                    walk = walk[walk.index(nxt):]
                    start = walk[0]
                    break
                walk.append(nxt)
            cycle = tuple(walk)
            base = LassoPlay(prefix=(), cycle=cycle)
            rotated = LassoPlay(prefix=(), cycle=cycle[1:] + cycle[:1])
            pumped = LassoPlay(prefix=(), cycle=cycle + cycle)
            for p in game.players:
                value = lasso_payoff(game, base, p)
                assert lasso_payoff(game, rotated, p) == value
                assert lasso_payoff(game, pumped, p) == value
            checked += 1

    def test_reward_scaling(self, fig1):
        scaled_rewards = {
            e: {p: (3 * r if p == "first" else r) for p, r in per.items()}
            for e, per in fig1.rewards.items()
        }
        scaled = Game(
            players=fig1.players, vertices=fig1.vertices, owner=dict(fig1.owner),
            initial=fig1.initial, edges=fig1.edges, rewards=scaled_rewards,
        )
        play = LassoPlay(prefix=("1", "2"), cycle=("5",))
        assert lasso_payoff(scaled, play, "first") == 3 * lasso_payoff(fig1, play, "first")
        assert lasso_payoff(scaled, play, "dictator") == lasso_payoff(fig1, play, "dictator")


class TestReachable:
    def test_full_graph(self, fig1):
        assert reachable(fig1, fig1.vertices) == frozenset("12345")

    def test_closed_subgraph(self, fig1):
        assert reachable(fig1, {"1", "4"}) == frozenset({"1", "4"})

    def test_initial_outside(self, fig1):
        assert reachable(fig1, {"2", "3", "5"}) == frozenset()

    def test_monotone(self):
        rng = random.Random(3)
        for _ in range(20):
            game = random_game(rng)
            small = {v for v in game.vertices if rng.random() < 0.5}
            big = small | {v for v in game.vertices if rng.random() < 0.5}
            assert reachable(game, small) <= reachable(game, big)


class TestSccs:
    def test_fig1_components(self, fig1):
        assert sccs(fig1, fig1.vertices) == [
            frozenset({"3"}), frozenset({"4"}), frozenset({"5"})
        ]

    def test_two_cycle(self):
        game = parse_game(
            '{"players": ["d"], "initial": "a",'
            ' "vertices": [{"id": "a", "owner": "d"}, {"id": "b", "owner": "d"}],'
            ' "edges": [{"from": "a", "to": "b"}, {"from": "b", "to": "a"}]}'
        )
        assert sccs(game, game.vertices) == [frozenset({"a", "b"})]

    def test_acyclic_path_has_no_components(self, fig1):
        assert sccs(fig1, {"1", "2"}) == []

    def test_components_disjoint_and_cyclic(self):
        rng = random.Random(5)
        for _ in range(20):
            game = random_game(rng)
            components = sccs(game, game.vertices)
            seen: set[str] = set()
            for comp in components:
                assert not comp & seen
                seen |= comp
                for v in comp:
                    # strongly connected: v reaches every other member inside comp
                    frontier, visited = [v], {v}
                    while frontier:
                        u = frontier.pop()
                        for t in game.successors(u):
                            if t in comp and t not in visited:
                                visited.add(t)
                                frontier.append(t)
                    targets = comp if len(comp) > 1 else set()
                    if len(comp) == 1:
                        assert v in game.successors(v)
                    else:
                        assert visited >= targets


class TestValidate:
    def test_fig1_clean(self, fig1):
        assert validate(fig1) == []

    def test_sink(self):
        game = Game(
            players=("d",), vertices=("a", "b"), owner={"a": "d", "b": "d"},
            initial="a", edges=(("a", "b"), ("b", "a"), ("a", "a")), rewards={},
        )
        clean = validate(game)
        assert clean == []
        broken = Game(
            players=("d",), vertices=("a", "b"), owner={"a": "d", "b": "d"},
            initial="a", edges=(("a", "b"),), rewards={},
        )
        assert any("'b'" in v and "outgoing" in v for v in validate(broken))

    def test_edge_to_unknown_vertex(self):
        game = Game(
            players=("d",), vertices=("a",), owner={"a": "d"},
            initial="a", edges=(("a", "ghost"), ("a", "a")), rewards={},
        )
        assert any("ghost" in v for v in validate(game))
