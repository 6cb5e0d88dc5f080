"""Command line entry point: ``bmatch <command> ...``.

Peers are 1-based on the command line and in files. Failures print one JSON
object ``{"error": <category>, "message": ...}`` on stderr and exit with the
category's code.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fileio
from .classify import (
    GlobalConflict,
    find_preference_cycle,
    is_global_representable,
    symmetrize_acyclic,
)
from .dynamics import ActivationPolicy, run_dynamics
from .errors import BMatchError, StructuralError
from .experiment import (
    ExperimentConfig,
    build_acceptance,
    family_name,
    format_csv,
    run_experiment,
)
from .generators import Family, GeneratorSpec, generate, ingest_latency, restrict
from .graphmetrics import metrics_report, to_dot
from .prefcore import INF, PreferenceInstance, QuotaVector, preferences_from_marks, validate_marks
from .solver import stable_configuration

EXIT_CODES = {
    "error": 1,
    "structural": 3,
    "validation": 4,
    "contract": 5,
    "cyclic": 6,
    "parse": 7,
    "missing-file": 8,
}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_instance(path: str) -> tuple[PreferenceInstance, object]:
    """Instance from a marks or preference file; also returns the marks when given."""
    text = Path(path).read_text(encoding="utf-8")
    if fileio.sniff(text) == "marks":
        m = fileio.parse_marks(text, path=path)
        return preferences_from_marks(m), m
    return fileio.parse_instance(text, path=path), None


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}")


def _quotas(text: str, n: int) -> QuotaVector:
    if text.strip().lower() in ("inf", "infinity"):
        return QuotaVector.uniform(n, INF)
    vals = _csv_ints(text)
    if len(vals) == 1:
        return QuotaVector.uniform(n, vals[0])
    return QuotaVector(tuple(vals))


def _bool(x: bool) -> str:
    return "true" if x else "false"


def cmd_gen(args) -> int:
    family = family_name(args.family)
    if family == "latency":
        if not args.latency:
            raise StructuralError("--family latency needs --latency <file>")
        m = ingest_latency(args.latency, args.rule, args.seed).marks
    else:
        m = generate(GeneratorSpec(Family.parse(family), args.n, args.seed, dim=args.dim))
    G = build_acceptance(args.acceptance, family, m.n, args.seed + 1)
    if G is not None:
        m = restrict(m, G)
    _emit(fileio.format_marks(m), args.out)
    return 0


def cmd_check(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    facts: dict[str, object] = {}
    if fileio.sniff(text) == "marks":
        m = fileio.parse_marks(text, path=args.input)
        report = validate_marks(m)
        facts["valid"] = report.ok
        facts["symmetric"] = report.symmetric
        if not report.ok:
            facts["problems"] = report.describe()
            _print_facts(facts, args.json)
            return EXIT_CODES["validation"]
        L = preferences_from_marks(m)
    else:
        L = fileio.parse_instance(text, path=args.input)
    cycle = find_preference_cycle(L)
    facts["acyclic"] = cycle is None
    if cycle is not None:
        facts["cycle"] = [p + 1 for p in cycle.peers]
    g = is_global_representable(L)
    facts["global"] = not isinstance(g, GlobalConflict)
    if isinstance(g, GlobalConflict):
        facts["witness"] = [
            {"ranker": r + 1, "prefers": x + 1, "over": y + 1} for r, x, y in g.constraints
        ]
    else:
        facts["global_marks"] = [int(v) for v in g.values]
    _print_facts(facts, args.json)
    return 0


def _print_facts(facts: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(facts, sort_keys=True))
        return
    for k, v in facts.items():
        if isinstance(v, bool):
            v = _bool(v)
        elif k == "witness":
            v = "; ".join(f"{w['ranker']} prefers {w['prefers']} over {w['over']}" for w in v)
        elif isinstance(v, list):
            v = " ".join(str(x) for x in v)
        print(f"{k}={v}")


def cmd_symmetrize(args) -> int:
    L, _ = _load_instance(args.input)
    _emit(fileio.format_marks(symmetrize_acyclic(L)), args.out)
    return 0


def cmd_solve(args) -> int:
    L, _ = _load_instance(args.input)
    C = stable_configuration(L, _quotas(args.b, L.n))
    _emit(fileio.format_configuration(C), args.out)
    return 0


def cmd_simulate(args) -> int:
    L, _ = _load_instance(args.input)
    C0 = fileio.read_configuration(args.start, n=L.n) if args.start else None
    res = run_dynamics(
        L, _quotas(args.b, L.n), C0, ActivationPolicy(args.policy, args.seed), args.step_limit
    )
    header = [
        f"policy={res.policy.kind.value} seed={args.seed} steps={res.steps} "
        f"converged={_bool(res.converged)}"
    ]
    _emit(fileio.format_configuration(res.configuration, header), args.out)
    if args.trace:
        lines = [json.dumps({"policy": res.policy.kind.value, "seed": args.seed,
                             "step_limit": res.step_limit})]
        for rec in res.trace:
            lines.append(json.dumps({
                "step": rec.step,
                "pair": [rec.pair[0] + 1, rec.pair[1] + 1],
                "dropped": [None if d is None else [d[0] + 1, d[1] + 1] for d in rec.dropped],
                "blocking_before": rec.blocking_before,
            }))
        Path(args.trace).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_metrics(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    C = fileio.parse_configuration(text, path=args.input, n=args.n)
    n = args.n if args.n is not None else max((q + 1 for _, q in C), default=0)
    report = metrics_report(C, n)
    print(json.dumps(report.as_dict(), sort_keys=True))
    if args.dot:
        Path(args.dot).write_text(to_dot(C, n), encoding="utf-8")
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig(
        families=tuple(f for f in args.family.split(",") if f),
        n=args.n,
        b_values=tuple(args.b),
        reps=args.reps,
        seed=args.seed,
        mode=args.mode,
        policy=args.policy,
        step_limit=args.step_limit,
        acceptance=args.acceptance,
        dim=args.dim,
        latency_file=args.latency,
        latency_rule=args.rule,
    )
    rows = run_experiment(cfg, args.threads)
    _emit(format_csv(cfg, rows, timing=args.timing), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bmatch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="emit a marks file")
    g.add_argument("--family", default="random-symmetric",
                   help="global, random-symmetric, metric, complementary or latency")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--acceptance", default="complete")
    g.add_argument("--latency", help="RTT matrix file for --family latency")
    g.add_argument("--rule", default="mean", choices=("mean", "min", "max"))
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="validate marks, test acyclicity and global representability")
    c.add_argument("input")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("symmetrize", help="symmetric marks reproducing an acyclic instance")
    s.add_argument("input")
    s.add_argument("--out")
    s.set_defaults(func=cmd_symmetrize)

    for name, func, helptext in (
        ("solve", cmd_solve, "stable configuration of an acyclic instance"),
        ("simulate", cmd_simulate, "run blocking-pair dynamics"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input")
        p.add_argument("--b", default="1", help="uniform quota, per-peer comma list, or inf")
        p.add_argument("--out")
        if name == "simulate":
            p.add_argument("--policy", default="uniform")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--step-limit", type=int, default=None)
            p.add_argument("--start", help="initial configuration file")
            p.add_argument("--trace", help="write the step trace as JSON lines")
        p.set_defaults(func=func)

    mt = sub.add_parser("metrics", help="diameter, clustering, components of a configuration")
    mt.add_argument("input")
    mt.add_argument("--n", type=int)
    mt.add_argument("--dot")
    mt.set_defaults(func=cmd_metrics)

    e = sub.add_parser("experiment", help="quota sweep to CSV")
    e.add_argument("--family", default="global,random-symmetric,metric")
    e.add_argument("--n", type=int, default=500)
    e.add_argument("--b", type=_csv_ints, default=[2, 4, 6, 8, 10, 12, 14, 16, 18, 20])
    e.add_argument("--reps", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--mode", default="solve", choices=("solve", "simulate"))
    e.add_argument("--policy", default="uniform")
    e.add_argument("--step-limit", type=int, default=None)
    e.add_argument("--acceptance", default="auto")
    e.add_argument("--dim", type=int, default=2)
    e.add_argument("--latency", help="RTT matrix file for the latency family")
    e.add_argument("--rule", default="mean", choices=("mean", "min", "max"))
    e.add_argument("--threads", type=int, default=None, help="overrides BMATCH_THREADS")
    e.add_argument("--timing", action="store_true", help="add a wall_time column")
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BMatchError as exc:
        cat, msg = exc.category, str(exc)
    except FileNotFoundError as exc:
        cat, msg = "missing-file", str(exc)
    except ValueError as exc:
        cat, msg = "error", str(exc)
    print(json.dumps({"error": cat, "message": msg}), file=sys.stderr)
    return EXIT_CODES[cat]


if __name__ == "__main__":
    sys.exit(main())
