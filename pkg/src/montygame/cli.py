"""``monty`` command line: presets, exact analysis, game solving, bias sweeps, simulation, play.

Exit codes: 0 success, 2 usage or invalid model, 3 unreachable observation,
4 enumeration cap or solver failure, 5 a simulation z-score beyond 4.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .exact import conditional_win_prob, symmetry_conditionals, unconditional_win_prob
from .model import PRESET_PARAMS, PRESETS, GameConfig, ensure_valid, make_preset
from .modelfile import format_door_set, load_model, load_schema, parse_door_set
from .play import PlaySession
from .simulate import compare_exact
from .solver import (
    SolverError,
    build_payoff_matrix,
    conditional_lower_bound_sweep,
    recommendation,
    security_level,
    solve_minimax,
    stay_mass,
)
from .validation import EnumerationCapError, InvalidModelError, UnreachableObservationError

EXIT_OK, EXIT_USAGE, EXIT_UNREACHABLE, EXIT_SOLVER, EXIT_FLAG = 0, 2, 3, 4, 5

PRESET_ALIASES = {
    "classic": "classic-symmetric",
    "biased": "host-biased",
    "hundred": "hundred-doors",
}


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def render_table(rows: list[dict], columns: list[str] | None = None) -> str:
    if not rows:
        return "(no rows)"
    columns = columns or list(rows[0])
    cells = [[fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines)


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument types


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def seed_int(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64), got {value}")
    return value


def unit_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def observation(text: str) -> tuple[int, tuple[int, ...]]:
    """Parse ``p=<door>,O=<door[+door...]>``."""
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected p=<door>,O=<doors>, got {text!r}")
        fields[key.strip()] = value.strip()
    if set(fields) != {"p", "O"}:
        raise argparse.ArgumentTypeError(f"expected p=<door>,O=<doors>, got {text!r}")
    try:
        return int(fields["p"]), parse_door_set(fields["O"])
    except ValueError:
        raise argparse.ArgumentTypeError(f"door numbers must be integers: {text!r}")


def default_seed() -> int:
    env = os.environ.get("MONTY_SEED")
    if env is None:
        return 0
    try:
        return seed_int(env)
    except argparse.ArgumentTypeError as exc:
        raise CommandError(f"MONTY_SEED: {exc}", EXIT_USAGE)


# ---------------------------------------------------------------------------
# model source


def resolve_model(args):
    """Build the model named by ``--preset``/``--model`` and describe where it came from."""
    if args.model:
        try:
            model = load_model(args.model)
        except (OSError, ValueError, jsonschema.ValidationError) as exc:
            raise CommandError(f"cannot load model {args.model}: {exc}", EXIT_USAGE)
        source = {"source": "file", "path": str(args.model)}
    else:
        name = PRESET_ALIASES.get(args.preset, args.preset)
        params = {}
        if args.q is not None:
            params["q"] = args.q
        if args.doors is not None:
            params["n_doors"] = args.doors
        if args.pick_door is not None:
            params["door"] = args.pick_door
        try:
            model = make_preset(name, **params)
        except ValueError as exc:
            raise CommandError(str(exc), EXIT_USAGE)
        source = {"source": "preset", "name": name, "params": params}
    try:
        ensure_valid(model)
    except InvalidModelError as exc:
        raise CommandError(str(exc), EXIT_USAGE)
    return model, source


def add_model_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--preset", default="classic-symmetric", help="preset name (see `presets`)")
    group.add_argument("--model", type=Path, help="model JSON file")
    p.add_argument("--q", type=unit_float, help="host bias for host-biased")
    p.add_argument("--doors", type=int, help="number of doors for hundred-doors")
    p.add_argument("--pick-door", type=int, help="picked door for fixed-pick")


# ---------------------------------------------------------------------------
# commands; each returns (payload, table rows, csv rows, exit code)


def cmd_analyze(args):
    model, source = resolve_model(args)
    payload = {
        "schema": "montygame/analyze/v1",
        "model": source,
        "n_doors": model.config.n_doors,
        "k_opened": model.config.k_opened,
        "unconditional_win_prob": unconditional_win_prob(model),
        "observation": None,
        "symmetry": None,
    }
    lines = [f"unconditional win probability: {fmt(payload['unconditional_win_prob'])}"]
    csv_rows = [{"quantity": "unconditional", "p": "", "opened": "", "weight": "",
                 "win_prob": payload["unconditional_win_prob"]}]

    if args.observe:
        p, opened = args.observe
        try:
            report = conditional_win_prob(model, p, opened)
        except ValueError as exc:
            raise CommandError(f"bad observation: {exc}", EXIT_USAGE)
        if not report.reachable:
            raise CommandError(
                f"unreachable observation p={p}, O={format_door_set(opened)} has probability 0", EXIT_UNREACHABLE
            )
        payload["observation"] = {
            "p": p,
            "opened": list(report.observation[1]),
            "reachable": True,
            "observation_prob": report.observation_prob,
            "win_prob": report.win_prob,
            "posterior": list(report.posterior.weights),
        }
        lines.append(f"observation p={p}, O={format_door_set(opened)} (probability {fmt(report.observation_prob)})")
        lines.append(f"conditional win probability: {fmt(report.win_prob)}")
        lines.append("posterior car distribution: (" + ", ".join(fmt(w) for w in report.posterior.weights) + ")")
        csv_rows.append({"quantity": "conditional", "p": p, "opened": format_door_set(opened),
                         "weight": report.observation_prob, "win_prob": report.win_prob})

    if args.all_observations:
        table = symmetry_conditionals(model)
        rows = [{"p": p, "opened": list(o), "weight": w, "win_prob": v} for p, o, w, v in table.rows]
        payload["symmetry"] = {"rows": rows, "weighted_average": table.weighted_average,
                               "unconditional": table.unconditional}
        lines.append("")
        lines.append(render_table([{**r, "opened": format_door_set(r["opened"])} for r in rows]))
        lines.append(f"weighted average: {fmt(table.weighted_average)}")
        csv_rows += [{"quantity": "symmetry", "p": r["p"], "opened": format_door_set(r["opened"]),
                      "weight": r["weight"], "win_prob": r["win_prob"]} for r in rows]
    return payload, "\n".join(lines), csv_rows, EXIT_OK


def cmd_solve(args):
    try:
        config = GameConfig(args.doors, args.open)
    except ValueError as exc:
        raise CommandError(str(exc), EXIT_USAGE)
    try:
        matrix = build_payoff_matrix(config, cap=args.cap)
        result = solve_minimax(matrix, tol=args.tol, method=args.method)
    except (EnumerationCapError, SolverError) as exc:
        raise CommandError(str(exc), EXIT_SOLVER)

    def listing(strategy, labels):
        return [{"index": i, "strategy": labels[i].label(), "weight": float(strategy.weights[i])}
                for i in strategy.support()]

    rec = recommendation(matrix, result, tol=args.tol)
    payload = {
        "schema": "montygame/solve/v1",
        "n_doors": config.n_doors,
        "k_opened": config.k_opened,
        "shape": list(matrix.shape),
        "value": result.value,
        "duality_gap": result.duality_gap,
        "maximin": result.maximin,
        "minimax": result.minimax,
        "tol": args.tol,
        "method": result.method,
        "player_optimal": listing(result.player_optimal, matrix.rows),
        "team_optimal": listing(result.team_optimal, matrix.cols),
        "security": {
            "player": security_level(matrix, result.player_optimal, "player"),
            "team": security_level(matrix, result.team_optimal, "team"),
        },
        "stay_mass": stay_mass(matrix, result.player_optimal),
        "recommendation": rec,
    }
    lines = [
        f"game: {config.n_doors} doors, host opens {config.k_opened}; payoff matrix {matrix.shape[0]}x{matrix.shape[1]}",
        f"value {fmt(result.value)}",
        f"duality gap {result.duality_gap:.3g} (tol {args.tol:g}, {result.method})",
        f"security levels: player {fmt(payload['security']['player'])}, team {fmt(payload['security']['team'])}",
        "",
        "player optimal strategy:",
        render_table(payload["player_optimal"]),
        "",
        "team optimal strategy:",
        render_table(payload["team_optimal"]),
        "",
        f"recommendation: {rec}",
    ]
    csv_rows = [{"side": side, **row, "value": result.value, "duality_gap": result.duality_gap, "recommendation": rec}
                for side in ("player", "team") for row in payload[f"{side}_optimal"]]
    return payload, "\n".join(lines), csv_rows, EXIT_OK


def cmd_simulate(args):
    model, source = resolve_model(args)
    seed = args.seed if args.seed is not None else default_seed()
    report = compare_exact(model, args.n_plays, seed, n_shards=args.shards)
    sim = report.sim

    def row(r):
        return {"p": r.observation[0] if r.observation else None,
                "opened": list(r.observation[1]) if r.observation else None,
                "plays": r.plays, "wins": r.wins, "empirical": r.empirical, "exact": r.exact,
                "z": r.z, "flagged": r.flagged, "low_sample": r.low_sample}

    payload = {
        "schema": "montygame/simulate/v1",
        "model": source,
        "n_plays": sim.n_plays,
        "wins": sim.wins,
        "estimate": sim.estimate,
        "std_error": sim.std_error,
        "seed": sim.seed,
        "generator": sim.generator,
        "n_shards": sim.n_shards,
        "overall": row(report.overall),
        "observations": [row(r) for r in report.observations],
        "any_flag": report.any_flag,
    }
    table_rows = [{**row(r), "opened": format_door_set(r.observation[1])} for r in report.observations]
    lines = [
        f"plays {sim.n_plays}, wins {sim.wins}, seed {sim.seed}",
        f"estimate {fmt(sim.estimate)} +/- {fmt(sim.std_error)} (exact {fmt(report.overall.exact)}, "
        f"z {report.overall.z:.3f})",
    ]
    if report.overall.low_sample:
        lines.append("warning: low sample, z-scores are unreliable")
    if len(table_rows) <= 50:
        lines += ["", render_table(table_rows, ["p", "opened", "plays", "wins", "empirical", "exact", "z", "flagged"])]
    lines.append("FLAG: some |z| > 4" if report.any_flag else "all z-scores within 4")
    csv_rows = [{**row(report.overall), "p": "all", "opened": ""}] + [
        {**r, "opened": r["opened"]} for r in table_rows
    ]
    return payload, "\n".join(lines), csv_rows, EXIT_FLAG if report.any_flag else EXIT_OK


def cmd_sweep(args):
    if not (0.0 <= args.q_from <= 1.0 and 0.0 <= args.q_to <= 1.0):
        raise CommandError("q bounds must lie in [0, 1]", EXIT_USAGE)
    if args.q_from > args.q_to or (args.steps == 1 and args.q_from != args.q_to):
        raise CommandError("malformed grid: need q-from <= q-to, and equal bounds for a single step", EXIT_USAGE)
    car = None
    if args.car:
        try:
            car = [float(x) for x in args.car.split(",")]
        except ValueError:
            raise CommandError(f"bad --car weights {args.car!r}", EXIT_USAGE)
        if len(car) != 3:
            raise CommandError("--car needs three weights", EXIT_USAGE)
    grid = np.linspace(args.q_from, args.q_to, args.steps).tolist()
    try:
        result = conditional_lower_bound_sweep(grid, car_placement=car)
    except InvalidModelError as exc:
        raise CommandError(str(exc), EXIT_USAGE)
    rows = []
    for r in result.rows:
        conds = dict(r.conditionals)
        rows.append({"q": r.q, "cond_O2": conds.get((2,)), "cond_O3": conds.get((3,)),
                     "minimum": r.minimum, "closed_form": r.closed_form})
    payload = {
        "schema": "montygame/sweep/v1",
        "pick": 1,
        "car_placement": car or [1 / 3] * 3,
        "rows": rows,
        "global_min": result.global_min,
        "argmin": list(result.argmin),
    }
    text = render_table(rows) + f"\n\nglobal minimum {fmt(result.global_min)} at q = " + ", ".join(
        fmt(q) for q in result.argmin
    )
    return payload, text, rows, EXIT_OK


def cmd_presets(args):
    items = [{"name": name, "params": PRESET_PARAMS[name], "description": desc} for name, desc in PRESETS.items()]
    csv_rows = [{**it, "params": json.dumps(it["params"])} for it in items]
    return items, render_table(csv_rows), csv_rows, EXIT_OK


def cmd_play(args):
    seed = args.seed if args.seed is not None else default_seed()
    # keep stdout parseable when a machine format is requested
    chatter = sys.stdout if args.format == "table" else sys.stderr
    summary = PlaySession(seed=seed, host_bias=args.host_bias, stdout=chatter).run()
    payload = summary.to_dict()
    rows = [{"decision": k, **v} for k, v in payload["tallies"].items()]
    text = f"session over after {summary.plays} plays\n" + render_table(rows)
    return payload, text, rows, EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "presets": cmd_presets,
    "play": cmd_play,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monty", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["table", "json", "csv"], default="table")
    common.add_argument("--record", type=Path, help="write a replayable run record to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="exact unconditional and conditional win probabilities")
    add_model_args(p)
    p.add_argument("--observe", type=observation, help="observation p=<door>,O=<door[+door...]>")
    p.add_argument("--all-observations", action="store_true", help="print every reachable conditional")

    p = sub.add_parser("solve", parents=[common], help="minimax value of the player-vs-team game")
    p.add_argument("--doors", type=int, default=3)
    p.add_argument("--open", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--cap", type=positive_int, default=10**6, help="enumeration cap per side")
    p.add_argument("--method", choices=["auto", "highs", "exact"], default="auto")

    p = sub.add_parser("simulate", parents=[common], help="seeded Monte Carlo check against the exact engine")
    add_model_args(p)
    p.add_argument("-n", "--n-plays", type=positive_int, default=100_000)
    p.add_argument("--seed", type=seed_int, help="defaults to $MONTY_SEED, then 0")
    p.add_argument("--shards", type=positive_int, default=1)

    p = sub.add_parser("sweep", parents=[common], help="conditional win probabilities over host bias q")
    p.add_argument("--q-from", type=float, default=0.0)
    p.add_argument("--q-to", type=float, default=1.0)
    p.add_argument("--steps", type=positive_int, default=11)
    p.add_argument("--car", help="car weights for doors 1,2,3 (default uniform)")

    sub.add_parser("presets", parents=[common], help="list model presets")

    p = sub.add_parser("play", parents=[common], help="play the classic game interactively")
    p.add_argument("--seed", type=seed_int, help="defaults to $MONTY_SEED, then 0")
    p.add_argument("--host-bias", type=unit_float, default=0.5)

    p = sub.add_parser("replay", help="re-run a recorded command and compare outputs")
    p.add_argument("record", type=Path)
    return parser


def _recordable_argv(argv: list[str], args) -> list[str]:
    """Drop ``--record`` and pin the resolved seed so a replay does not depend on the environment."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--record":
            skip = True
            continue
        if tok.startswith("--record="):
            continue
        out.append(tok)
    if args.command in ("simulate", "play") and args.seed is None:
        out += ["--seed", str(default_seed())]
    return out


def run(argv: list[str], stdout=None) -> tuple[int, object]:
    """Parse and execute ``argv``; returns the exit code and the JSON-ready payload."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None

    if args.command == "replay":
        return replay(args.record, stdout)

    started = datetime.now(timezone.utc).isoformat()
    try:
        recorded_argv = _recordable_argv(argv, args)
        payload, text, csv_rows, code = COMMANDS[args.command](args)
    except CommandError as exc:
        print(f"monty {args.command}: {exc}", file=sys.stderr)
        return exc.code, None

    if args.format == "json":
        stdout.write(json.dumps(payload, indent=2) + "\n")
    elif args.format == "csv":
        stdout.write(render_csv(csv_rows))
    else:
        stdout.write(text + "\n")

    if args.record:
        record = {
            "schema": "montygame/runrecord/v1",
            "command": args.command,
            "argv": recorded_argv,
            "params": {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
                       if k not in ("record", "format")},
            "outputs": json.loads(json.dumps(payload)),
            "exit_code": code,
            "started_at": started,
            "finished_at": datetime.now(timezone.utc).isoformat(),
            "version": __version__,
        }
        args.record.write_text(json.dumps(record, indent=2) + "\n")
    return code, payload


def replay(path: Path, stdout) -> tuple[int, object]:
    try:
        record = json.loads(Path(path).read_text())
        jsonschema.validate(record, load_schema("runrecord"))
    except (OSError, ValueError, jsonschema.ValidationError) as exc:
        print(f"monty replay: cannot read record {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    if record["command"] == "play":
        print("monty replay: interactive sessions cannot be replayed", file=sys.stderr)
        return EXIT_USAGE, None
    code, payload = run(record["argv"] + ["--format", "json"], stdout=io.StringIO())
    outputs = json.loads(json.dumps(payload))
    same = outputs == record["outputs"] and code == record["exit_code"]
    stdout.write(("replay matches record\n" if same else "replay DIFFERS from record\n"))
    return (EXIT_OK if same else 1), outputs


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))[0]


if __name__ == "__main__":
    sys.exit(main())
