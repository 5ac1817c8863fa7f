"""Command-line front end producing reproducible JSON reports.

Exit codes: 0 success, 1 no equilibrium found (or decision threshold not
met), 2 input or usage errors.  All rewards, ratios and thresholds are
exchanged as rational strings; reports are byte-identical across runs except
for the wall-clock duration field.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .bimatrix import describe_profile, nash_equilibria, parse_bimatrix, political_optimum
from .enumeration import (
    EquilibriumWitness,
    search_optimum,
    validate_witness,
)
from .equilibrium_core import (
    Mode,
    NASH,
    OWNER_RESTRICTED,
    PAPER_LITERAL,
    POLITICAL,
    RatioProfile,
)
from .game_model import (
    Game,
    GameFormatError,
    InvalidGameError,
    format_rational,
    parse_game,
    parse_rational,
    serialize_game,
)
from .mpg_values import PunishmentTable, punishment_values
from .play_synthesis import advance, build_schedule, simulate_deviation
from .reductions import lexicographic_optimize, make_zero_sum, parse_cnf, reduce_3sat

__all__ = ["main", "run"]

_VARIANTS = {"owner": OWNER_RESTRICTED, "literal": PAPER_LITERAL}


class _InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}") from exc


def _load_game(path: str) -> Game:
    try:
        return parse_game(_read(path))
    except (GameFormatError, InvalidGameError) as exc:
        raise _InputError(f"{path}: {exc}") from exc


def _digest(game: Game) -> str:
    return hashlib.sha256(serialize_game(game).encode("utf-8")).hexdigest()


def _mode(args: argparse.Namespace, game: Game) -> Mode:
    if args.dictator not in game.players:
        raise _InputError(f"unknown player {args.dictator!r}")
    return Mode(args.mode, args.dictator, _VARIANTS[args.variant])


def _emit(args: argparse.Namespace, payload: dict) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _witness_report(game: Game, witness: EquilibriumWitness | None) -> dict:
    if witness is None:
        return {
            "optimal_reward": None,
            "player_rewards": None,
            "visited": None,
            "recurrent": None,
            "entry_path": None,
            "edge_ratios": None,
        }
    order = game.vertex_index
    return {
        "optimal_reward": format_rational(witness.beneficiary_reward),
        "player_rewards": {
            p: format_rational(witness.player_rewards[p]) for p in game.players
        },
        "visited": sorted(witness.visited, key=order),
        "recurrent": sorted(witness.recurrent, key=order),
        "entry_path": list(witness.entry_path),
        "edge_ratios": [
            {"from": s, "to": t, "ratio": format_rational(r)}
            for (s, t), r in sorted(
                witness.profile.edge_ratios.items(),
                key=lambda item: (order(item[0][0]), order(item[0][1])),
            )
        ],
    }


def _cmd_solve(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    mode = _mode(args, game)
    started = time.perf_counter()
    witness, regions = search_optimum(game, mode)
    report = {
        "command": "solve",
        "game_digest": _digest(game),
        "mode": mode.kind,
        "dictator": mode.beneficiary,
        "variant": args.variant,
        "threshold": args.threshold,
        **_witness_report(game, witness),
        "regions_explored": regions,
        "duration_seconds": round(time.perf_counter() - started, 6),
    }
    _emit(args, report)
    if witness is None:
        return 1
    if args.threshold is not None:
        if witness.beneficiary_reward < parse_rational(args.threshold):
            return 1
    return 0


def _cmd_values(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    if args.player not in game.players:
        raise _InputError(f"unknown player {args.player!r}")
    values = punishment_values(game, args.player)
    _emit(args, {
        "player": args.player,
        "values": {v: format_rational(values[v]) for v in game.vertices},
    })
    return 0


def _cmd_synthesize(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    mode = _mode(args, game)
    witness, _ = search_optimum(game, mode)
    if witness is None:
        print("no equilibrium found", file=sys.stderr)
        return 1
    scheduler = build_schedule(game, witness)
    vertices = [scheduler.current_vertex]
    if args.steps > 1:
        emitted, _ = advance(scheduler, args.steps - 1)
        vertices += emitted
    text = "\n".join(vertices) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_simulate_deviation(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    mode = _mode(args, game)
    if args.deviator not in game.players:
        raise _InputError(f"unknown player {args.deviator!r}")
    witness, _ = search_optimum(game, mode)
    if witness is None:
        print("no equilibrium found", file=sys.stderr)
        return 1
    scheduler = build_schedule(game, witness)
    punish = PunishmentTable(game)
    state = scheduler
    if args.at > 0:
        _, state = advance(scheduler, args.at)
    alt = (state.current_vertex, args.alt)
    try:
        mean = simulate_deviation(
            game, scheduler, args.deviator, args.at, alt, args.horizon, punish
        )
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    equilibrium = witness.player_rewards[args.deviator]
    _emit(args, {
        "deviator": args.deviator,
        "at": args.at,
        "alt": {"from": alt[0], "to": alt[1]},
        "horizon": args.horizon,
        "mean": format_rational(mean),
        "equilibrium_reward": format_rational(equilibrium),
        "profitable": mean > equilibrium,
    })
    return 0


def _cmd_reduce_3sat(args: argparse.Namespace) -> int:
    try:
        formula = parse_cnf(_read(args.cnf), pad=args.pad)
    except ValueError as exc:
        raise _InputError(f"{args.cnf}: {exc}") from exc
    game = reduce_3sat(formula)
    if args.zero_sum:
        game = make_zero_sum(game)
    text = serialize_game(game)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bimatrix(args: argparse.Namespace) -> int:
    try:
        game = parse_bimatrix(_read(args.matrix))
    except GameFormatError as exc:
        raise _InputError(f"{args.matrix}: {exc}") from exc
    political = political_optimum(game)
    nash = nash_equilibria(game)
    _emit(args, {
        "command": "bimatrix",
        "political": describe_profile(game, political),
        "nash": [describe_profile(game, profile) for profile in nash],
    })
    return 0


def _cmd_lex_solve(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    mode = _mode(args, game)
    objectives = [p.strip() for p in args.objectives.split(",") if p.strip()]
    for p in objectives:
        if p not in game.players:
            raise _InputError(f"unknown objective player {p!r}")
    started = time.perf_counter()
    witness = lexicographic_optimize(game, mode, objectives)
    report = {
        "command": "lex-solve",
        "game_digest": _digest(game),
        "mode": mode.kind,
        "dictator": mode.beneficiary,
        "variant": args.variant,
        "objectives": objectives,
        **_witness_report(game, witness),
        "duration_seconds": round(time.perf_counter() - started, 6),
    }
    _emit(args, report)
    return 0 if witness is not None else 1


def _cmd_verify(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    try:
        report = json.loads(_read(args.report))
    except json.JSONDecodeError as exc:
        raise _InputError(f"{args.report}: {exc}") from exc
    problems: list[str] = []
    if report.get("game_digest") != _digest(game):
        problems.append("game digest does not match the referenced game")
    if report.get("optimal_reward") is None:
        _emit(args, {"verified": not problems, "problems": problems})
        return 0 if not problems else 2
    try:
        mode = Mode(
            report["mode"], report["dictator"], _VARIANTS[report.get("variant", "owner")]
        )
        edge_ratios = {
            (entry["from"], entry["to"]): parse_rational(entry["ratio"])
            for entry in report["edge_ratios"]
        }
        vertex_ratios: dict[str, Fraction] = {}
        for (s, _), ratio in edge_ratios.items():
            vertex_ratios[s] = vertex_ratios.get(s, Fraction(0)) + ratio
        rewards = {
            p: sum(
                (r * game.reward(e, p) for e, r in edge_ratios.items()), Fraction(0)
            )
            for p in game.players
        }
        profile = RatioProfile(
            visited=frozenset(report["visited"]),
            recurrent=frozenset(report["recurrent"]),
            vertex_ratios=vertex_ratios,
            edge_ratios=edge_ratios,
            player_rewards=rewards,
            beneficiary_reward=rewards[mode.beneficiary],
        )
        witness = EquilibriumWitness(mode, profile, tuple(report["entry_path"]))
    except (KeyError, TypeError, GameFormatError) as exc:
        raise _InputError(f"{args.report}: malformed report ({exc})") from exc
    for p, text in report["player_rewards"].items():
        if parse_rational(text) != rewards.get(p):
            problems.append(f"reported reward for {p!r} does not match the ratios")
    if parse_rational(report["optimal_reward"]) != rewards[mode.beneficiary]:
        problems.append("reported optimal reward does not match the ratios")
    problems.extend(validate_witness(game, witness, PunishmentTable(game)))
    _emit(args, {"verified": not problems, "problems": problems})
    return 0 if not problems else 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpgeq",
        description="Optimal Nash and political equilibria in multi-player "
        "mean-payoff games",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def game_mode_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--game", required=True, help="game document path")
        p.add_argument("--mode", required=True, choices=[POLITICAL, NASH])
        p.add_argument("--dictator", required=True, help="beneficiary player")
        p.add_argument("--variant", choices=sorted(_VARIANTS), default="owner")

    p = sub.add_parser("solve", help="compute the optimal equilibrium")
    game_mode_flags(p)
    p.add_argument("--threshold", help="decision threshold (rational string)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("values", help="punishment values for one player")
    p.add_argument("--game", required=True)
    p.add_argument("--player", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_values)

    p = sub.add_parser("synthesize", help="stream the optimal play's vertices")
    game_mode_flags(p)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("simulate-deviation", help="punish one deviation")
    game_mode_flags(p)
    p.add_argument("--deviator", required=True)
    p.add_argument("--at", type=int, required=True, help="schedule step index")
    p.add_argument("--alt", required=True, help="deviation target vertex")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate_deviation)

    p = sub.add_parser("reduce-3sat", help="generate a hardness game from CNF")
    p.add_argument("--cnf", required=True)
    p.add_argument("--pad", action="store_true",
                   help="pad short clauses by repeating a literal")
    p.add_argument("--zero-sum", action="store_true", dest="zero_sum")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reduce_3sat)

    p = sub.add_parser("bimatrix", help="dictated optimum and Nash equilibria")
    p.add_argument("--matrix", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bimatrix)

    p = sub.add_parser("lex-solve", help="lexicographic multi-objective solve")
    game_mode_flags(p)
    p.add_argument("--objectives", required=True, help="comma-separated players")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_lex_solve)

    p = sub.add_parser("verify", help="re-validate a solve report")
    p.add_argument("--game", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GameFormatError, InvalidGameError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
