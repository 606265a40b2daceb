"""Command line front end.

    decafsa solve --instance oliver30 --variant de-cafsa --seed 42 --out run/
    decafsa mtsp  --scenario watersheds.json --groups 2,3,4,5 --out plans/
    decafsa bench --instance eil101 --runs 10 --out bench/
    decafsa report --from bench/

Files never contain wall-clock times, so repeating a command with the same
seed reproduces them byte for byte; timings go to stdout and ``timing.csv``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
from pathlib import Path

from .afsa import SwarmConfig
from .de import DeConfig
from .hybrid import VARIANTS, HybridConfig, RunResult, VariantStats, run, run_variant_matrix
from .instances import REAL, ROUNDED, TsplibParseError, resolve_instance, distance_matrix
from .mtsp import PlanError, PlanSpace, load_scenario, validate_plan
from .space import TourSpace

METRIC_FLAGS = {"real": REAL, "rounded": ROUNDED}


def f4(x: float) -> str:
    return f"{x:.4f}"


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _ints(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _add_common(p: argparse.ArgumentParser, iters: int = 200) -> None:
    g = p.add_argument_group("swarm")
    g.add_argument("--iters", type=int, default=iters, help="maximum iterations")
    g.add_argument("--fish", type=int, default=20, help="population size")
    g.add_argument("--trynum", type=int, default=20)
    g.add_argument("--visual", type=float, default=10.0)
    g.add_argument("--step", type=float, default=6.0)
    g.add_argument("--delta", type=float, default=0.8, help="crowding factor")
    g.add_argument("--beta", type=float, default=0.2, help="schedule lower-limit factor")
    g.add_argument("--chaos-budget", type=int, default=20)
    g.add_argument("--max-time", type=int, default=10, help="stagnation threshold")
    g = p.add_argument_group("differential evolution")
    g.add_argument("--f", type=float, default=0.5, help="scaling factor F")
    g.add_argument("--cr", type=float, default=0.5, help="crossover probability")
    g.add_argument("--k-de", type=float, default=0.5, help="pull toward best (rand-to-best)")
    g.add_argument("--lambda", dest="lambdas", type=_floats, default=(1 / 3, 1 / 3, 1 / 3),
                   help="sub-population proportions a,b,c")
    g = p.add_argument_group("run")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--seeds", type=_ints, help="explicit seed list, e.g. 1,2,3 or 0..9")
    g.add_argument("--runs", type=int, help="number of seeds starting at --seed")
    g.add_argument("--metric", choices=sorted(METRIC_FLAGS), default="real")
    g.add_argument("--out", type=Path, default=Path("decafsa-out"))
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--jobs", type=int, default=1, help="parallel runs (never within a run)")


def build_config(args, variant: str, seed: int) -> HybridConfig:
    swarm = SwarmConfig(n_fish=args.fish, max_iter=args.iters, trynum=args.trynum,
                        visual0=args.visual, step0=args.step, delta=args.delta,
                        beta=args.beta, chaos_budget=args.chaos_budget)
    de = DeConfig(F=args.f, K_de=args.k_de, CR=args.cr, lambdas=tuple(args.lambdas))
    return HybridConfig(swarm=swarm, de=de, max_time=args.max_time, variant=variant,
                        seed=seed)


def seed_list(args) -> list[int]:
    if args.seeds is not None:
        if args.runs is not None and args.runs != len(args.seeds):
            raise ValueError(f"--runs {args.runs} disagrees with {len(args.seeds)} --seeds")
        return list(args.seeds)
    return list(range(args.seed, args.seed + (args.runs or 1)))


def write_history(path: Path, history) -> None:
    lines = ["iteration,best_fitness"]
    lines += [f"{k},{f4(v)}" for k, v in enumerate(history, start=1)]
    path.write_text("\n".join(lines) + "\n")


def read_history(path: Path) -> list[float]:
    with open(path, newline="") as fh:
        return [float(row["best_fitness"]) for row in csv.DictReader(fh)]


def _write_table(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


# ---------------------------------------------------------------- solve


def cmd_solve(args) -> int:
    inst = resolve_instance(args.instance, METRIC_FLAGS[args.metric])
    space = TourSpace(distance_matrix(inst))
    cfg = build_config(args, args.variant, args.seed)
    res = run(cfg, space)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_history(out / "history.csv", res.history)
    record = {
        "instance": inst.name,
        "n": inst.n,
        "metric": args.metric,
        "variant": args.variant,
        "seed": args.seed,
        "iterations": res.iterations_run,
        "best_fitness": round(res.best_fitness, 4),
        "best_tour": list(res.best_state),
        "de_epochs": [m for m, _ in res.events],
    }
    if args.format == "json":
        (out / "result.json").write_text(json.dumps(record, indent=2) + "\n")
    else:
        _write_table(out / "result.csv", ["key", "value"], [
            ["instance", inst.name], ["variant", args.variant], ["seed", args.seed],
            ["best_fitness", f4(res.best_fitness)],
            ["best_tour", " ".join(map(str, res.best_state))],
        ])
    print(f"{inst.name} {args.variant} seed={args.seed}: best {f4(res.best_fitness)} "
          f"in {res.wall_time:.2f}s ({len(res.events)} DE epochs) -> {out}")
    return 0


# ---------------------------------------------------------------- mtsp


def cmd_mtsp(args) -> int:
    sc = load_scenario(args.scenario)
    groups = _ints(args.groups) if args.groups else sc.groups
    if args.iters is None:
        args.iters = sc.iters or 300
    d = sc.distance_matrix()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for K in groups:
        space = PlanSpace(d, sc.params, K)
        cfg = build_config(args, args.variant, args.seed)
        res = run(cfg, space)
        plan = res.best_state
        problems = validate_plan(plan, K, sc.N)
        if problems:
            raise PlanError(f"K={K}: invalid plan: {problems}")
        cost = space.breakdown(plan)
        _write_table(out / f"plan_K{K}.csv", ["group", "sequence"],
                     [[g + 1, r] for g, r in enumerate(sc.route_labels(plan))])
        (out / f"cost_K{K}.csv").write_text(cost.to_csv())
        if args.format == "json":
            doc = {"K": K, "routes": sc.route_labels(plan), "cost": _rounded(cost.to_dict())}
            (out / f"cost_K{K}.json").write_text(json.dumps(doc, indent=2) + "\n")
        write_history(out / f"history_K{K}.csv", res.history)
        summary.append([K, f4(cost.total), f4(cost.D), cost.T, f4(max(cost.group_hours))])
        print(f"K={K}: total cost {f4(cost.total)}  D={f4(cost.D)} km  T={cost.T} days  "
              f"max group hours {f4(max(cost.group_hours))}  ({res.wall_time:.1f}s)")
    _write_table(out / "schemes.csv", ["K", "total_cost", "total_km", "person_days",
                                       "max_group_hours"], summary)
    return 0


def _rounded(obj):
    if isinstance(obj, float):
        return round(obj, 4)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_rounded(v) for v in obj]
    return obj


# ---------------------------------------------------------------- bench

REPORT_HEADER = ["variant", "optimal", "worst", "average", "runs"]


def report_rows(stats: list[VariantStats]) -> list[list]:
    return [[s.variant, f4(s.optimal), f4(s.worst), f4(s.average), len(s.runs)] for s in stats]


def write_report(out: Path, instance: str, stats: list[VariantStats], fmt: str) -> None:
    _write_table(out / "report.csv", REPORT_HEADER, report_rows(stats))
    if fmt == "json":
        doc = {
            "instance": instance,
            "rows": [{"variant": s.variant, "optimal": round(s.optimal, 4),
                      "worst": round(s.worst, 4), "average": round(s.average, 4),
                      "seeds": s.seeds} for s in stats],
        }
        (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n")


def cmd_bench(args) -> int:
    inst = resolve_instance(args.instance, METRIC_FLAGS[args.metric])
    space = TourSpace(distance_matrix(inst))
    variants = args.variant.split(",") if args.variant else list(VARIANTS)
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    seeds = seed_list(args)
    base = build_config(args, variants[0], seeds[0])
    stats = run_variant_matrix(space, variants, seeds, base, jobs=args.jobs)

    out = args.out
    hist_dir = out / "histories"
    hist_dir.mkdir(parents=True, exist_ok=True)
    for s in stats:
        for seed, r in zip(s.seeds, s.runs):
            write_history(hist_dir / f"{s.variant}_seed{seed}.csv", r.history)
    write_report(out, inst.name, stats, args.format)
    _write_table(out / "timing.csv", ["variant", "average_time_s"],
                 [[s.variant, f4(s.average_time)] for s in stats])

    print(f"{inst.name}: {len(variants)} variants x {len(seeds)} seeds, {args.iters} iterations")
    print(f"{'Algorithm':<10}{'Optimal':>12}{'Worst':>12}{'Average':>12}{'Avg time(s)':>13}")
    for s in stats:
        print(f"{s.variant:<10}{f4(s.optimal):>12}{f4(s.worst):>12}{f4(s.average):>12}"
              f"{f4(s.average_time):>13}")
    return 0


def stats_from_histories(hist_dir: Path) -> list[VariantStats]:
    """Rebuild the per-variant rows from stored history files."""
    runs: dict[str, list[tuple[int, float]]] = {}
    for path in sorted(hist_dir.glob("*_seed*.csv")):
        variant, _, seed = path.stem.rpartition("_seed")
        runs.setdefault(variant, []).append((int(seed), read_history(path)[-1]))
    order = [v for v in VARIANTS if v in runs] + sorted(set(runs) - set(VARIANTS))
    out = []
    for v in order:
        pairs = sorted(runs[v])
        best = [b for _, b in pairs]
        fake = [RunResult(None, b, [b], 0.0, 0) for b in best]
        out.append(VariantStats(v, min(best), max(best), statistics.fmean(best), 0.0, fake,
                                [s for s, _ in pairs]))
    return out


def cmd_report(args) -> int:
    stats = stats_from_histories(Path(args.src) / "histories")
    if not stats:
        raise ValueError(f"no histories under {args.src}")
    if args.out:
        _write_table(args.out, REPORT_HEADER, report_rows(stats))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    w.writerows(report_rows(stats))
    return 0


# ---------------------------------------------------------------- entry


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decafsa", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one TSP instance with one variant")
    p.add_argument("--instance", required=True, help="TSPLIB file or bundled name")
    p.add_argument("--variant", choices=VARIANTS, default="de-cafsa")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("mtsp", help="optimise investigation routes for several group counts")
    p.add_argument("--scenario", required=True, type=Path)
    p.add_argument("--groups", help="comma list of group counts (default: from scenario)")
    p.add_argument("--variant", choices=VARIANTS, default="de-cafsa")
    _add_common(p)
    p.set_defaults(func=cmd_mtsp, iters=None)

    p = sub.add_parser("bench", help="variant x seed matrix with a summary table")
    p.add_argument("--instance", required=True)
    p.add_argument("--variant", help="comma list of variants (default: all five)")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="rebuild a bench report from stored histories")
    p.add_argument("--from", dest="src", required=True, help="bench output directory")
    p.add_argument("--out", type=Path, help="also write the report CSV here")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TsplibParseError, PlanError, ValueError, OSError, KeyError) as exc:
        print(f"decafsa: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
