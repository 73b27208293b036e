"""Command-line surface.

Subcommands: simulate, enumerate, check-conditions, best-response, sweep,
validate. Exit codes: 0 success, 1 configuration or usage error, 2 internal
runtime fault. All file outputs are atomic; identical configs and seeds
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .dynamics import classify_state, run
from .equilibria import (
    check_all_cooperation_exists,
    check_all_defection_unique,
    enumerate_equilibria,
    sweep,
)
from .io import (
    best_response_to_jsonable,
    condition_report_to_jsonable,
    emit_trajectory,
    equilibrium_report_to_jsonable,
    render_json,
    render_trajectory_csv,
    render_trajectory_jsonl,
    sweep_table_to_jsonable,
    write_json,
)
from .model import best_response


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coevo",
        description=(
            "Simulate and analyse coupled cooperate/defect actions and continuous "
            "opinions on an influence network."
        ),
    )
    parser.add_argument("--version", action="version", version=f"coevo {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to the experiment config JSON")
    common.add_argument("--seed", type=int, default=None, help="override every config seed")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    common.add_argument("--out", default=None, help="write the result to this file")

    p = sub.add_parser(
        "simulate", parents=[common], help="run the dynamics and emit the trajectory"
    )
    p.add_argument(
        "--format",
        choices=("csv", "json-lines"),
        default="csv",
        help="trajectory file format (default csv)",
    )

    sub.add_parser(
        "enumerate", parents=[common], help="enumerate all equilibria exhaustively"
    ).add_argument(
        "--max-n", type=int, default=16, help="refuse enumeration beyond this n (default 16)"
    )

    sub.add_parser(
        "check-conditions",
        parents=[common],
        help="evaluate both consensus conditions per player",
    )

    p = sub.add_parser(
        "best-response",
        parents=[common],
        help="print a player's best-response set for given opinions",
    )
    p.add_argument("--player", type=int, required=True, help="player id (1-based)")
    p.add_argument(
        "--opinions",
        required=True,
        help="comma-separated opinion vector of length n, e.g. 0.2,0.4,0.4,0.1",
    )

    p = sub.add_parser(
        "sweep", parents=[common], help="run the parameter sweep from the config's sweep section"
    )
    p.add_argument("--trials", type=int, default=None, help="override sweep.trials")

    sub.add_parser("validate", parents=[common], help="load and validate the config, nothing else")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        from .io import atomic_write

        atomic_write(out, text)


def _cmd_validate(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    if not args.quiet:
        print(
            f"config OK: {cfg.params.n} players, r={cfg.params.r}, "
            f"{cfg.schedule.kind} schedule, network symmetric={cfg.network.is_symmetric} "
            f"irreducible={cfg.network.is_irreducible}"
        )
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    traj = run(
        cfg.initial_state,
        cfg.schedule,
        cfg.params,
        cfg.network,
        max_steps=cfg.max_steps,
        fixed_point_tol=cfg.fixed_point_tol,
    )
    if args.out is None:
        render = render_trajectory_csv if args.format == "csv" else render_trajectory_jsonl
        sys.stdout.write(render(traj))
    else:
        emit_trajectory(traj, args.out, format=args.format)
    if not args.quiet:
        cls = classify_state(traj.final)
        print(
            f"stopped after {len(traj) - 1} steps: {traj.stop_reason}; "
            f"final class: {cls.full_class}",
            file=sys.stderr,
        )
    return 0


def _cmd_enumerate(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    report = enumerate_equilibria(cfg.params, cfg.network, max_n=args.max_n)
    _emit(render_json(equilibrium_report_to_jsonable(report)), args.out)
    if not args.quiet:
        print(
            f"scanned {report.action_profiles_scanned} action profiles: "
            f"{len(report.equilibria)} equilibria, "
            f"{len(report.boundary_equilibria)} boundary",
            file=sys.stderr,
        )
    return 0


def _format_condition_line(report) -> str:
    if report.all_hold:
        return f"{report.condition_id}: holds for all players"
    failing = [str(i + 1) for i, (_, _, h) in enumerate(report.per_player) if not h]
    return f"{report.condition_id}: fails for player(s) {', '.join(failing)}"


def _cmd_check_conditions(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    defection = check_all_defection_unique(cfg.params)
    cooperation = check_all_cooperation_exists(cfg.params)
    print(_format_condition_line(defection))
    print(_format_condition_line(cooperation))
    if args.out is not None:
        write_json(
            {
                "all_defection_unique": condition_report_to_jsonable(defection),
                "all_cooperation_exists": condition_report_to_jsonable(cooperation),
            },
            args.out,
        )
    return 0


def _cmd_best_response(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    n = cfg.params.n
    if not 1 <= args.player <= n:
        raise ConfigError(f"--player must be in 1..{n}, got {args.player}")
    try:
        y = np.array([float(v) for v in args.opinions.split(",")])
    except ValueError:
        raise ConfigError(f"--opinions must be comma-separated numbers, got {args.opinions!r}") from None
    if y.shape != (n,):
        raise ConfigError(f"--opinions must have {n} entries, got {y.shape[0]}")
    if (y < 0.0).any() or (y > 1.0).any():
        raise ConfigError("--opinions entries must lie in [0, 1]")
    br = best_response(args.player - 1, y, cfg.params, cfg.network)
    _emit(render_json(best_response_to_jsonable(br)), args.out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    if cfg.sweep_grid is None:
        raise ConfigError(
            f"{args.config}: no sweep section; add "
            '"sweep": {"r": [...], "alpha": [...], "beta": [...], "trials": 20}'
        )
    trials = args.trials if args.trials is not None else cfg.sweep_trials
    table = sweep(
        cfg.sweep_grid,
        cfg.network,
        schedule_kind=cfg.schedule.kind,
        trials=trials,
        seed=args.seed if args.seed is not None else cfg.schedule.seed or 0,
        max_steps=cfg.max_steps,
        fixed_point_tol=cfg.fixed_point_tol,
    )
    _emit(render_json(sweep_table_to_jsonable(table)), args.out)
    if not args.quiet:
        print(
            f"swept {len(table.cells)} cells "
            f"({len(table.invalid_cells)} invalid skipped), "
            f"{table.trials_per_cell} trials each",
            file=sys.stderr,
        )
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "enumerate": _cmd_enumerate,
    "check-conditions": _cmd_check_conditions,
    "best-response": _cmd_best_response,
    "sweep": _cmd_sweep,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; this surface reserves
        # 2 for runtime faults and reports usage problems as 1
        return 0 if exc.code in (0, None) else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports faults as exit 2
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
