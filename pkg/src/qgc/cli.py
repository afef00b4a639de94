"""Command-line front end: ``qgc <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 validation failure, 3 solver budget
exhausted without a schedule. ``QGC_SEED`` sets the default seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .bounds import TABLE2_SHAPES, bound_report
from .instances import (
    TABLE1_CONFIGS,
    InstanceError,
    InstanceSpec,
    build_graph,
    build_hardware,
    build_mixgraph,
    build_problem,
    instance_to_json,
    load_instance,
    qstate_set,
    random_placement,
)
from .model import GateDurations, RoutingProblem, time_to_json
from .pddl_io import (
    IllegalPlanError,
    PlanParseError,
    emit_final_placement,
    emit_qi_classical,
    emit_temporal,
    parse_classical_plan,
    parse_plan,
    render_plan,
)
from .qinit import QiProblem, solve_qi
from .solver import SolverConfig, SolverError, run_solver
from .validator import Schedule, validate

EXIT_OK, EXIT_INPUT, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3

# wall-clock presets matching the original experiments: 600 s up to 16 qubits, 1200 s above
WALLCLOCK_DEADLINES = ((16, 600.0), (None, 1200.0))
UNBOUNDED_ROLLOUTS = 10**9

log = logging.getLogger("qgc")


class CliError(Exception):
    """Bad input; reported on stderr with exit code 1."""


def default_seed() -> int:
    raw = os.environ.get("QGC_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"QGC_SEED must be an integer, got {raw!r}") from None


def wallclock_deadline(qubits: int) -> float:
    for limit, seconds in WALLCLOCK_DEADLINES:
        if limit is None or qubits <= limit:
            return seconds
    raise AssertionError("unreachable")


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc})") from None


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _durations(path: str | None) -> GateDurations | None:
    return None if path is None else GateDurations.from_json(_read_json(path))


def _load(path: str) -> RoutingProblem:
    if not Path(path).is_file():
        raise CliError(f"no such instance file: {path}")
    return load_instance(path)


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _solver_config(args, problem: RoutingProblem, seed: int) -> SolverConfig:
    if args.paper_budget:
        return SolverConfig(seed=seed, rollouts=UNBOUNDED_ROLLOUTS, deadline=wallclock_deadline(problem.hardware.qubit_count))
    return SolverConfig(seed=seed, rollouts=args.rollouts, deadline=args.deadline)


def _load_schedule(problem: RoutingProblem, path: str) -> Schedule:
    text = _read_text(path)
    if text.lstrip().startswith("{"):
        try:
            return Schedule.from_json(json.loads(text))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CliError(f"{path}: not a schedule ({exc})") from None
    return parse_plan(text, emit_temporal(problem).grounding)


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    graph_arg = args.graph
    graph = build_graph(_read_json(graph_arg) if graph_arg.endswith(".json") else graph_arg)
    edges = None
    if args.mix_edges:
        try:
            edges = [tuple(int(x) for x in e.split("-")) for e in args.mix_edges.split(",")]
        except ValueError:
            raise CliError(f"--mix-edges expects a list like 0-1,1-2, got {args.mix_edges!r}") from None
    mix = build_mixgraph(args.mix, args.k, edges)
    durations = _durations(args.durations)
    hw_arg = args.hw
    hardware = build_hardware(_read_json(hw_arg) if hw_arg.endswith(".json") else hw_arg, durations)
    seed = args.seed if args.seed is not None else default_seed()
    placement = random_placement(qstate_set(graph.vertex_count, mix.color_count), hardware.qubit_count, seed)
    tag = f"{Path(graph_arg).stem if graph_arg.endswith('.json') else graph_arg}{args.mix[0].upper()}{args.k}"
    problem = RoutingProblem.build(graph, mix, hardware, placement, args.label or f"{hardware.name}/{tag}")
    if args.placement == "qinit":
        sol = solve_qi(QiProblem.from_routing(problem), seed=seed, budget=args.qi_budget)
        problem = problem.with_placement(sol.final_placement)
    _emit(json.dumps(instance_to_json(problem), indent=1, ensure_ascii=False) + "\n", args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = _load(args.instance)
    seed = args.seed if args.seed is not None else default_seed()
    config = _solver_config(args, problem, seed)
    if args.incumbent:
        config.incumbent = _load_schedule(problem, args.incumbent)
    try:
        result = run_solver(problem, config)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(json.dumps(result.schedule.to_json(), indent=1) + "\n", args.output)
    if args.plan_out:
        Path(args.plan_out).write_text(render_plan(problem, result.schedule, done_ps=True))
    summary = {
        "label": problem.label,
        "makespan": time_to_json(result.makespan),
        "lower_bound": time_to_json(result.lower_bound),
        "rollouts": result.rollouts,
        "completed": result.completed,
        "moves": result.moves,
        "seed": seed,
    }
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    problem = _load(args.instance)
    schedule = _load_schedule(problem, args.plan)
    report = validate(
        problem,
        schedule,
        strict_adjacency=args.strict_adjacency,
        relaxed_swap_mix_as_swap=args.relaxed_swap_mix_as_swap,
    )
    if args.json:
        print(json.dumps(report.to_json(), indent=1))
    else:
        status = "ok" if report.ok else f"{len(report.violations)} violation(s)"
        print(f"{status}; makespan {time_to_json(report.makespan)}")
        for v in report.violations:
            where = "-" if v.gate is None else v.gate
            print(f"  {v.code} gate={where}: {v.message}")
    return EXIT_OK if report.ok else EXIT_INVALID


def bounds_rows(layouts, shapes, durations: GateDurations | None) -> list[dict]:
    rows = []
    for layout in layouts:
        for n, k in shapes:
            r = bound_report(layout, n, k, durations)
            rows.append(
                {
                    "layout": layout,
                    "n": n,
                    "k": k,
                    "label": r.label,
                    "formula": time_to_json(r.formula_value),
                    "published": "" if r.published is None else r.published,
                    "constructive": time_to_json(r.constructive_makespan),
                    "note": r.note,
                }
            )
    return rows


def cmd_bounds(args) -> int:
    layouts = ("grid", "line") if args.layout == "both" else (args.layout,)
    if (args.n is None) != (args.k is None):
        raise CliError("--n and --k go together")
    shapes = TABLE2_SHAPES if args.n is None else ((args.n, args.k),)
    rows = bounds_rows(layouts, shapes, _durations(args.durations))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_qinit(args) -> int:
    problem = _load(args.instance)
    seed = args.seed if args.seed is not None else default_seed()
    qi = QiProblem.from_routing(problem)
    sol = solve_qi(qi, seed=seed, budget=args.budget)
    improved = problem.with_placement(sol.final_placement)
    _emit(json.dumps(instance_to_json(improved), indent=1, ensure_ascii=False) + "\n", args.output)
    summary = {
        "start_objective": sol.start_objective,
        "objective": sol.objective,
        "relaxed_plan_cost": time_to_json(sol.relaxed_plan_cost),
        "iterations": sol.iterations,
    }
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def cmd_emit_pddl(args) -> int:
    problem = _load(args.instance)
    name = args.name or Path(args.instance).stem
    written = list(emit_temporal(problem, name).write(args.out_dir))
    if args.qi:
        written += emit_qi_classical(QiProblem.from_routing(problem), name).write(args.out_dir)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_parse_plan(args) -> int:
    problem = _load(args.instance)
    text = _read_text(args.plan)
    if args.classical:
        qi = emit_qi_classical(QiProblem.from_routing(problem))
        steps = parse_classical_plan(text, qi.grounding)
        final = emit_final_placement(steps, problem.initial_placement, qi.grounding)
        _emit(json.dumps(instance_to_json(problem.with_placement(final)), indent=1, ensure_ascii=False) + "\n", args.output)
        return EXIT_OK
    schedule = parse_plan(text, emit_temporal(problem).grounding)
    _emit(json.dumps(schedule.to_json(), indent=1) + "\n", args.output)
    if args.validate:
        report = validate(problem, schedule)
        if not report.ok:
            for v in report.violations:
                print(f"  {v.code}: {v.message}", file=sys.stderr)
            return EXIT_INVALID
    return EXIT_OK


# ---------------------------------------------------------------- bench


@dataclass
class BenchRow:
    hardware_id: str
    tag: str
    mode: str
    seed: int
    makespan: int | str | None
    lower_bound: int | str | None
    rollouts: int
    runtime: float
    status: str = "ok"
    moves: int = 0


def _bench_task(task: tuple) -> BenchRow:
    spec, mode, seed, rollouts, qi_budget, deadline = task
    began = time.perf_counter()
    try:
        problem = build_problem(spec, mode, seed=seed, qi_budget=qi_budget)
        result = run_solver(problem, SolverConfig(seed=seed, rollouts=rollouts, deadline=deadline))
        return BenchRow(
            spec.hardware_id,
            spec.tag,
            mode,
            seed,
            time_to_json(result.makespan),
            time_to_json(result.lower_bound),
            result.rollouts,
            time.perf_counter() - began,
            moves=result.moves,
        )
    except (SolverError, InstanceError, ValueError) as exc:
        return BenchRow(spec.hardware_id, spec.tag, mode, seed, None, None, 0, time.perf_counter() - began, f"failed: {exc}")


def run_bench(specs, seeds, rollouts: int, qi_budget: int, workers: int, paper_budget: bool = False) -> list[BenchRow]:
    tasks = []
    for spec in specs:
        deadline = wallclock_deadline(build_hardware(spec.hardware_id).qubit_count) if paper_budget else None
        budget = UNBOUNDED_ROLLOUTS if paper_budget else rollouts
        for mode in ("random", "qinit"):
            tasks += [(spec, mode, s, budget, qi_budget, deadline) for s in seeds]
    if workers <= 1:
        return [_bench_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_bench_task, tasks))


def _pct(x: float) -> str:
    return f"{x:.1f}%"


def summarize_bench(rows: list[BenchRow]) -> list[dict]:
    """Per configuration: averages, bests, solved counts and both improvement figures.

    ``improvement_of_avg`` compares the two averages over seeds solved in both
    modes; ``improvement_paired`` averages the per-seed relative improvements.
    """
    out = []
    keys = list(dict.fromkeys((r.hardware_id, r.tag) for r in rows))
    for hw, tag in keys:
        mine = [r for r in rows if (r.hardware_id, r.tag) == (hw, tag)]
        by_mode = {m: {r.seed: r for r in mine if r.mode == m} for m in ("random", "qinit")}
        seeds = sorted(by_mode["random"])
        solved = {m: [s for s in seeds if by_mode[m].get(s) and by_mode[m][s].status == "ok"] for m in by_mode}
        both = [s for s in seeds if s in solved["random"] and s in solved["qinit"]]
        entry = {"hardware": hw, "config": tag}
        for m in ("random", "qinit"):
            spans = [float(by_mode[m][s].makespan) for s in solved[m]]
            entry[f"{m}_avg"] = round(statistics.fmean(spans), 2) if spans else None
            entry[f"{m}_best"] = min(spans) if spans else None
            entry[f"{m}_solved"] = f"({len(solved[m])}/{len(seeds)})"
        if both:
            r_avg = statistics.fmean(float(by_mode["random"][s].makespan) for s in both)
            q_avg = statistics.fmean(float(by_mode["qinit"][s].makespan) for s in both)
            paired = statistics.fmean(
                (float(by_mode["random"][s].makespan) - float(by_mode["qinit"][s].makespan))
                / float(by_mode["random"][s].makespan)
                for s in both
            )
            entry["improvement_of_avg"] = f"{_pct(100 * (r_avg - q_avg) / r_avg)}({len(both)}/{len(seeds)})"
            entry["improvement_paired"] = f"{_pct(100 * paired)}({len(both)}/{len(seeds)})"
        else:
            entry["improvement_of_avg"] = entry["improvement_paired"] = f"-(0/{len(seeds)})"
        out.append(entry)
    return out


def bench_markdown(summary: list[dict]) -> str:
    head = [
        "hardware",
        "config",
        "random avg",
        "random best",
        "qinit avg",
        "qinit best",
        "improvement (of averages)",
        "improvement (paired)",
    ]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for e in summary:
        cells = [
            e["hardware"],
            e["config"],
            f"{e['random_avg']} {e['random_solved']}",
            str(e["random_best"]),
            f"{e['qinit_avg']} {e['qinit_solved']}",
            str(e["qinit_best"]),
            e["improvement_of_avg"],
            e["improvement_paired"],
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _parse_config(text: str) -> InstanceSpec:
    parts = text.split(":")
    if len(parts) != 4:
        raise CliError(f"config {text!r} should look like rigetti-12:G1:ring:3")
    try:
        return InstanceSpec(parts[1], parts[2], int(parts[3]), parts[0])
    except ValueError:
        raise CliError(f"bad color count in {text!r}") from None


def cmd_bench(args) -> int:
    if args.config:
        specs = [_parse_config(c) for c in args.config]
    else:
        specs = [InstanceSpec(g, m, k, hw) for hw, g, m, k in TABLE1_CONFIGS]
        if args.qubits:
            specs = [s for s in specs if build_hardware(s.hardware_id).qubit_count in args.qubits]
    for s in specs:
        build_problem(s, "random", seed=0)  # fail fast on bad ids
    base = args.seed if args.seed is not None else default_seed()
    seeds = list(range(base + 1, base + args.seeds + 1))
    rows = run_bench(specs, seeds, args.rollouts, args.qi_budget, args.workers, args.paper_budget)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fields = [f for f in asdict(rows[0]) if args.timing or f != "runtime"]
    with open(out.with_suffix(".csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(asdict(r))
    summary = summarize_bench(rows)
    out.with_suffix(".md").write_text(bench_markdown(summary))
    sys.stdout.write(bench_markdown(summary))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rollouts", type=int, default=200, help="rollout budget (default 200)")
    p.add_argument("--deadline", type=float, default=None, help="optional wall-clock cap in seconds")
    p.add_argument("--paper-budget", action="store_true", help="use 600 s / 1200 s wall-clock presets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgc", description="Routing QAOA graph-coloring circuits on qubit chips.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an instance JSON file")
    p.add_argument("--graph", required=True, help="G1..G4 or a graph JSON file")
    p.add_argument("--mix", default="ring", help="line, ring or custom")
    p.add_argument("--mix-edges", help="custom mix edges, e.g. 0-1,1-2")
    p.add_argument("--k", type=int, required=True, help="number of colors")
    p.add_argument("--hw", required=True, help="hardware id or hardware JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--placement", choices=("random", "qinit"), default="random")
    p.add_argument("--qi-budget", type=int, default=2000)
    p.add_argument("--durations", help="gate durations JSON")
    p.add_argument("--label")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="route an instance")
    p.add_argument("instance")
    p.add_argument("--seed", type=int)
    _add_budget(p)
    p.add_argument("--incumbent", help="schedule to start from")
    p.add_argument("--plan-out", help="also write the schedule as plan text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a schedule (JSON or plan text)")
    p.add_argument("instance")
    p.add_argument("plan")
    p.add_argument("--strict-adjacency", action="store_true")
    p.add_argument("--relaxed-swap-mix-as-swap", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bounds", help="analytic bounds and constructive makespans")
    p.add_argument("--layout", choices=("grid", "line", "both"), default="both")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--durations", help="gate durations JSON")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("qinit", help="improve an instance's initial placement")
    p.add_argument("instance")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_qinit)

    p = sub.add_parser("emit-pddl", help="write PDDL files for external planners")
    p.add_argument("instance")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name")
    p.add_argument("--qi", action="store_true", help="also write the classical initialization pair")
    p.set_defaults(func=cmd_emit_pddl)

    p = sub.add_parser("parse-plan", help="turn a planner's plan file into a schedule")
    p.add_argument("instance")
    p.add_argument("plan")
    p.add_argument("--classical", action="store_true", help="plan solves the initialization pair; writes an instance")
    p.add_argument("--validate", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_parse_plan)

    p = sub.add_parser("bench", help="random vs qinit placements across configurations")
    p.add_argument("--config", action="append", help="hw:graph:mix:k, repeatable (default: all fifteen)")
    p.add_argument("--qubits", type=int, nargs="*", help="restrict default configs to these chip sizes")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, help="seeds run from seed+1 to seed+SEEDS")
    p.add_argument("--rollouts", type=int, default=200)
    p.add_argument("--qi-budget", type=int, default=2000)
    p.add_argument("--paper-budget", action="store_true")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--timing", action="store_true", help="add wall-clock runtime to the CSV")
    p.add_argument("-o", "--output", default="bench/report")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CliError, InstanceError, PlanParseError, IllegalPlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
