"""Command-line entry point with five subcommands.

gen-game      write a synthetic-tree descriptor file (the reproducibility
              token other configs consume)
analyze       run one search and dump the root's child statistics
tournament    play a seeded match between two engines
optimize      tune weight-profile knots by match win-rate
dump-profile  materialize a weight profile as CSV for plotting

Every run reads one strict config file (unknown keys are errors, messages
are line-anchored), writes its outputs atomically under --out, and drops
a manifest.ini capturing the resolved configuration and package version,
sufficient to reproduce the run bit-for-bit.  Exit status 0 on success,
2 on config/validation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from . import __version__
from .backup import parse_knots, format_knots, strategy_from_keys
from .bayesopt import OptimizeConfig, bayesopt_loop
from .config import (Config, ConfigError, REQUIRED, format_sections,
                     read_config, write_atomic)
from .games import (NoisyOracleEvaluator, RandomRolloutEvaluator,
                    SyntheticTreeSpec, generate_synthetic_tree)
from .search import SearchConfig, run_search
from .seeds import derive
from .tournament import (MatchConfig, SyntheticPool, TicTacToePool, run_match,
                         winrate_objective)
from .weights import build_weight_table

_GAME_KEYS = {"kind", "descriptor", "branching", "depth", "leaf_win_prob",
              "trap_level", "trap_count", "trap_prior",
              "trap_deviation_win_prob", "trap_sealed_win_prob",
              "seed", "trap_actions"}
_BACKUP_KEYS = {"backup", "alpha", "coulom_x", "coulom_y", "feedback_profile",
                "final_ratio", "horizon", "knots", "w0"}
_ENGINE_KEYS = _BACKUP_KEYS | {"policy", "exploration", "evaluator", "noise_sd",
                               "noise_seed", "simulations", "seed"}
_MATCH_KEYS = {"games", "sims_per_move", "seed"}
_OPTIMIZE_KEYS = {"kind", "m", "horizon", "lo", "hi", "n_init", "n_iter",
                  "batch", "acquisition", "kappa", "candidate_count",
                  "noise_var", "objective", "stub_noise_sd", "seed"}
_PROFILE_KEYS = {"knots", "horizon", "w0"}


def _load_game_section(config: Config, section: str) -> dict:
    """Resolve a [game]/[pool] section, following a descriptor reference."""
    config.check_keys(section, _GAME_KEYS)
    entries = dict(config.section(section))
    if "descriptor" in entries:
        if len(entries) > 1:
            raise config.error(section, "descriptor",
                               "descriptor cannot be combined with other keys")
        ref = read_config(entries["descriptor"])
        ref.check_keys("game", _GAME_KEYS)
        config = ref
        section = "game"
    kind = config.get_str(section, "kind", "synthetic")
    if kind == "tictactoe":
        for key in config.section(section):
            if key != "kind":
                raise config.error(section, key,
                                   f"{key!r} does not apply to tictactoe")
        return {"kind": "tictactoe"}
    if kind != "synthetic":
        raise config.error(section, "kind", f"unknown game kind {kind!r}")
    resolved = {
        "kind": "synthetic",
        "branching": config.get_int(section, "branching", 4),
        "depth": config.get_int(section, "depth", 8),
        "leaf_win_prob": config.get_float(section, "leaf_win_prob", 0.75),
        "trap_level": config.get_int(section, "trap_level", None),
        "trap_count": config.get_int(section, "trap_count", 0),
        "trap_prior": config.get_float(section, "trap_prior", None),
        "trap_deviation_win_prob": config.get_float(
            section, "trap_deviation_win_prob", None),
        "trap_sealed_win_prob": config.get_float(
            section, "trap_sealed_win_prob", None),
        "seed": config.get_int(section, "seed", 0),
    }
    return resolved


def _game_to_pool(game: dict):
    if game["kind"] == "tictactoe":
        return TicTacToePool()
    return SyntheticPool(branching=game["branching"], depth=game["depth"],
                         leaf_win_prob=game["leaf_win_prob"],
                         trap_level=game["trap_level"],
                         trap_count=game["trap_count"],
                         trap_prior=game["trap_prior"],
                         trap_deviation_win_prob=game["trap_deviation_win_prob"],
                         trap_sealed_win_prob=game["trap_sealed_win_prob"])


def _game_to_state(game: dict):
    """Concrete root position (for analyze): the exact seeded tree."""
    pool = _game_to_pool(game)
    if game["kind"] == "tictactoe":
        return pool.make(0)
    spec = SyntheticTreeSpec(branching=game["branching"], depth=game["depth"],
                             leaf_win_prob=game["leaf_win_prob"],
                             trap_level=game["trap_level"],
                             trap_count=game["trap_count"],
                             trap_deviation_win_prob=game["trap_deviation_win_prob"],
                             trap_sealed_win_prob=game["trap_sealed_win_prob"],
                             seed=game["seed"])
    root = generate_synthetic_tree(spec)
    if game["trap_prior"] is not None and root.tree.trap_actions:
        from .tournament import trap_priors
        priors = trap_priors(game["branching"], root.tree.trap_actions,
                             game["trap_prior"])
        root = root.tree.with_root_priors(priors).root
    return root


def _load_engine(config: Config, section: str,
                 simulations_default: int = 100) -> SearchConfig:
    config.check_keys(section, _ENGINE_KEYS)
    entries = config.section(section)
    backup_keys = {k: v for k, v in entries.items() if k in _BACKUP_KEYS}
    try:
        backup = strategy_from_keys(backup_keys)
    except (KeyError, ValueError) as exc:
        raise config.error(section, "backup", f"bad backup spec: {exc}") from exc
    evaluator_kind = config.get_str(section, "evaluator", "rollout")
    if evaluator_kind == "rollout":
        evaluator = RandomRolloutEvaluator()
    elif evaluator_kind == "noisy_oracle":
        evaluator = NoisyOracleEvaluator(
            noise_sd=config.get_float(section, "noise_sd", 0.0),
            seed=config.get_int(section, "noise_seed", 0))
    else:
        raise config.error(section, "evaluator",
                           f"unknown evaluator {evaluator_kind!r}")
    try:
        return SearchConfig(
            simulations=config.get_int(section, "simulations",
                                       simulations_default),
            policy=config.get_str(section, "policy", "UCB1"),
            exploration=config.get_float(section, "exploration", 1.0),
            backup=backup,
            evaluator=evaluator,
            seed=config.get_int(section, "seed", 0),
        )
    except ValueError as exc:
        raise config.error(section, None, str(exc)) from exc


def _write_manifest(out_dir: str, subcommand: str, config: Config,
                    args, resolved_extra: dict | None = None) -> None:
    sections = {"run": {
        "subcommand": subcommand,
        "version": __version__,
        "config": os.path.abspath(config.path),
        "seed_override": "none" if args.seed is None else str(args.seed),
        "workers": str(args.workers),
    }}
    for name, entries in config.sections.items():
        sections[f"config {name}"] = dict(entries)
    if resolved_extra:
        sections["resolved"] = {k: str(v) for k, v in resolved_extra.items()}
    write_atomic(os.path.join(out_dir, "manifest.ini"),
                 format_sections(sections))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _cmd_gen_game(config: Config, args) -> int:
    game = _load_game_section(config, "game")
    if game["kind"] != "synthetic":
        raise ConfigError(f"{config.path}:0: gen-game emits synthetic tree "
                          f"descriptors; got kind=tictactoe")
    if args.seed is not None:
        game["seed"] = args.seed
    spec = SyntheticTreeSpec(branching=game["branching"], depth=game["depth"],
                             leaf_win_prob=game["leaf_win_prob"],
                             trap_level=game["trap_level"],
                             trap_count=game["trap_count"],
                             trap_deviation_win_prob=game["trap_deviation_win_prob"],
                             trap_sealed_win_prob=game["trap_sealed_win_prob"],
                             seed=game["seed"])
    root = generate_synthetic_tree(spec)
    section = {
        "kind": "synthetic",
        "branching": str(spec.branching),
        "depth": str(spec.depth),
        "leaf_win_prob": repr(spec.leaf_win_prob),
        "trap_count": str(spec.trap_count),
        "seed": str(spec.seed),
    }
    if spec.trap_level is not None:
        section["trap_level"] = str(spec.trap_level)
    if root.tree.trap_actions:
        section["trap_actions"] = ", ".join(map(str, root.tree.trap_actions))
    if game["trap_prior"] is not None:
        section["trap_prior"] = repr(game["trap_prior"])
    if game["trap_deviation_win_prob"] is not None:
        section["trap_deviation_win_prob"] = repr(game["trap_deviation_win_prob"])
    if game["trap_sealed_win_prob"] is not None:
        section["trap_sealed_win_prob"] = repr(game["trap_sealed_win_prob"])
    path = os.path.join(args.out, "game.ini")
    write_atomic(path, format_sections({"game": section}))
    _write_manifest(args.out, "gen-game", config, args, section)
    print(f"wrote {path}")
    print(f"trap_actions = {section.get('trap_actions', 'none')}")
    return 0


def _cmd_analyze(config: Config, args) -> int:
    game = _load_game_section(config, "game")
    state = _game_to_state(game)
    engine = _load_engine(config, "search")
    if args.seed is not None:
        engine = engine.with_seed(args.seed)
    result = run_search(state, engine)
    rows = [(a, node.visits, f"{node.q:.10g}", f"{node.prior:.10g}")
            for a, node in zip(result.root.child_actions, result.root.children)]
    table = _csv_text(("action", "visits", "q", "prior"), rows)
    summary = {
        "best_action": result.best_action,
        "root_q": result.root_q,
        "root_visits": result.root.visits,
        "principal_variation": list(result.principal_variation),
        "visit_distribution": {str(k): v
                               for k, v in result.visit_distribution.items()},
    }
    write_atomic(os.path.join(args.out, "children.csv"), table)
    write_atomic(os.path.join(args.out, "analysis.json"),
                 json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_manifest(args.out, "analyze", config, args)
    print(json.dumps(summary, sort_keys=True))
    print(table, end="")
    return 0


def _cmd_tournament(config: Config, args) -> int:
    config.check_keys("match", _MATCH_KEYS, required=("games", "sims_per_move"))
    pool = _game_to_pool(_load_game_section(config, "pool"))
    seed = config.get_int("match", "seed", 0)
    if args.seed is not None:
        seed = args.seed
    try:
        match = MatchConfig(
            pool=pool,
            engine_a=_load_engine(config, "engine_a"),
            engine_b=_load_engine(config, "engine_b"),
            games=config.get_int("match", "games", REQUIRED),
            sims_per_move=config.get_int("match", "sims_per_move", REQUIRED),
            seed=seed,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise config.error("match", None, str(exc)) from exc
    result, records = run_match(match, workers=args.workers)
    payload = {
        "games": result.games,
        "wins_a": result.wins_a,
        "wins_b": result.wins_b,
        "draws": result.draws,
        "win_rate_a": result.win_rate_a,
        "ci95": list(result.ci95),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    rows = [(r.index, r.pair_seed, r.first_mover, r.outcome,
             " ".join(map(str, r.moves)), f"{r.final_return:.10g}")
            for r in records]
    write_atomic(os.path.join(args.out, "match.json"),
                 json.dumps(payload, indent=2, sort_keys=True) + "\n")
    write_atomic(os.path.join(args.out, "games.csv"),
                 _csv_text(("game", "seed", "first_mover", "outcome", "moves",
                            "final_return"), rows))
    _write_manifest(args.out, "tournament", config, args)
    print(json.dumps(payload, sort_keys=True))
    return 0


def _stub_objective(bounds, seed):
    """Deterministic noisy quadratic with a known interior optimum; used
    for exercising the optimize pipeline without playing games."""
    import numpy as np

    lows = np.array([lo for lo, _ in bounds])
    highs = np.array([hi for _, hi in bounds])
    center = lows + 0.7 * (highs - lows)
    state = {"count": 0}

    def objective(x):
        rng = np.random.Generator(np.random.Philox(
            key=derive(seed, "stub", state["count"])))
        state["count"] += 1
        return float(-np.sum((np.asarray(x) - center) ** 2)
                     + rng.normal(0.0, 0.02))

    return objective


def _cmd_optimize(config: Config, args) -> int:
    config.check_keys("optimize", _OPTIMIZE_KEYS)
    kind = config.get_str("optimize", "kind", "softmax")
    if kind not in ("softmax", "monotone"):
        raise config.error("optimize", "kind",
                           f"kind must be softmax or monotone, got {kind!r}")
    m = config.get_int("optimize", "m", 6)
    lo = config.get_float("optimize", "lo", -10.0)
    hi = config.get_float("optimize", "hi", -4.0)
    seed = config.get_int("optimize", "seed", 0)
    if args.seed is not None:
        seed = args.seed
    objective_kind = config.get_str("optimize", "objective", "match")

    games = 0
    base = None
    if objective_kind == "match":
        config.check_keys("match", _MATCH_KEYS,
                          required=("games", "sims_per_move"))
        pool = _game_to_pool(_load_game_section(config, "pool"))
        base = MatchConfig(
            pool=pool,
            engine_a=_load_engine(config, "engine_a"),
            engine_b=_load_engine(config, "engine_b"),
            games=config.get_int("match", "games", REQUIRED),
            sims_per_move=config.get_int("match", "sims_per_move", REQUIRED),
            seed=config.get_int("match", "seed", 0),
        )
        games = base.games
        default_noise = 0.25 / games     # binomial variance of a win-rate
    elif objective_kind == "stub":
        default_noise = 4e-4
    else:
        raise config.error("optimize", "objective",
                           f"objective must be match or stub, got "
                           f"{objective_kind!r}")

    horizon = config.get_int(
        "optimize", "horizon",
        base.sims_per_move if base is not None else 100)
    try:
        opt = OptimizeConfig(
            bounds=tuple((lo, hi) for _ in range(m)),
            n_init=config.get_int("optimize", "n_init", 8),
            n_iter=config.get_int("optimize", "n_iter", 40),
            batch=config.get_int("optimize", "batch", 1),
            acquisition=config.get_str("optimize", "acquisition", "EI"),
            kappa=config.get_float("optimize", "kappa", 2.0),
            candidate_count=config.get_int("optimize", "candidate_count", 4096),
            noise_var=config.get_float("optimize", "noise_var", default_noise),
            seed=seed,
        )
    except ValueError as exc:
        raise config.error("optimize", None, str(exc)) from exc

    eval_index = [0]
    if objective_kind == "stub":
        objective = _stub_objective(opt.bounds, seed)
    else:
        def objective(x):
            value = winrate_objective(tuple(x), kind, base, horizon=horizon,
                                      seed=derive(seed, "eval", eval_index[0]),
                                      workers=args.workers)
            return value

    history_rows = []

    def on_evaluation(entry):
        history_rows.append((
            eval_index[0], format_knots(entry.point), f"{entry.value:.10g}",
            games, time.strftime("%Y-%m-%dT%H:%M:%S"),
        ))
        eval_index[0] += 1

    best_x, history = bayesopt_loop(objective, opt, callback=on_evaluation)
    best_value = max(e.value for e in history)
    best_knots = format_knots(best_x)

    write_atomic(os.path.join(args.out, "history.csv"),
                 _csv_text(("eval", "knots", "win_rate", "games", "timestamp"),
                           history_rows))
    write_atomic(os.path.join(args.out, "best.json"), json.dumps({
        "kind": kind, "knots": [float(v) for v in best_x],
        "horizon": horizon, "best_value": best_value,
        "evaluations": len(history),
    }, indent=2, sort_keys=True) + "\n")
    _write_manifest(args.out, "optimize", config, args,
                    {"objective": objective_kind, "horizon": horizon})
    print(f"best {kind} profile: {best_knots}")
    print(f"best objective value: {best_value:.6g} over {len(history)} evaluations")
    return 0


def _cmd_dump_profile(config: Config, args) -> int:
    config.check_keys("profile", _PROFILE_KEYS, required=("knots", "horizon"))
    try:
        knots = parse_knots(config.get_str("profile", "knots", REQUIRED))
    except ValueError as exc:
        raise config.error("profile", "knots", str(exc)) from exc
    horizon = config.get_int("profile", "horizon", REQUIRED)
    w0 = config.get_float("profile", "w0", 1.0)
    try:
        profile = build_weight_table(knots, horizon, w0)
    except ValueError as exc:
        raise config.error("profile", None, str(exc)) from exc
    rows = [(t, f"{profile.log_slope_at(t):.10g}", f"{profile.table[t]:.10g}")
            for t in range(horizon + 1)]
    path = os.path.join(args.out, "profile.csv")
    write_atomic(path, _csv_text(("t", "p", "w"), rows))
    _write_manifest(args.out, "dump-profile", config, args)
    print(f"wrote {path} ({horizon + 1} rows)")
    return 0


_COMMANDS = {
    "gen-game": (_cmd_gen_game, {"game"},
                 "Generate a synthetic-tree descriptor (game.ini). "
                 "Config: [game] branching, depth, leaf_win_prob, trap_level, "
                 "trap_count, trap_prior, seed."),
    "analyze": (_cmd_analyze, {"game", "search"},
                "Search one position and dump per-child statistics. "
                "Config: [game] (or descriptor = file), [search]. "
                "CSV columns: action, visits, q, prior."),
    "tournament": (_cmd_tournament,
                   {"match", "pool", "engine_a", "engine_b"},
                   "Play a head-to-head match. Config: [match] games, "
                   "sims_per_move, seed; [pool]; [engine_a]; [engine_b]. "
                   "CSV columns: game, seed, first_mover, outcome, moves, "
                   "final_return."),
    "optimize": (_cmd_optimize,
                 {"optimize", "match", "pool", "engine_a", "engine_b"},
                 "Tune weight-profile knots by match win-rate. Config: "
                 "[optimize] and, for objective = match, the tournament "
                 "sections. CSV columns: eval, knots, win_rate, games, "
                 "timestamp."),
    "dump-profile": (_cmd_dump_profile, {"profile"},
                     "Materialize a weight profile. Config: [profile] knots, "
                     "horizon, w0. CSV columns: t, p, w."),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mctsopt",
        description="Monte-Carlo tree search with tunable backup strategies.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, _sections, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text.split(".")[0], description=help_text)
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes for parallel games")
    return parser


def dispatch(argv) -> int:
    args = build_parser().parse_args(argv)
    handler, allowed_sections, _ = _COMMANDS[args.command]
    try:
        config = read_config(args.config)
        for name in config.sections:
            if name not in allowed_sections:
                raise ConfigError(f"{config.anchor(name)}: unknown section "
                                  f"[{name}] for {args.command}")
        os.makedirs(args.out, exist_ok=True)
        return handler(config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
