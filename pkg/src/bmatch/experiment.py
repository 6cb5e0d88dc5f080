"""Quota sweeps over mark families, emitting one CSV row per cell.

A cell is ``(family, b, repetition)``. Marks and acceptance graphs depend on
``(family, repetition)`` only, so every quota in the sweep sees the same
instance. All seeds derive from the config seed through
:class:`numpy.random.SeedSequence`, and rows are written in sorted order,
so reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import ActivationPolicy, PolicyKind, run_dynamics
from .errors import StructuralError
from .generators import Family, GeneratorSpec, er_acceptance, generate, ingest_latency, restrict
from .graphmetrics import metrics_report
from .prefcore import AcceptanceGraph, MarkMatrix, QuotaVector, preferences_from_marks
from .solver import stable_configuration

log = logging.getLogger(__name__)

FAMILIES = ("global", "random-symmetric", "metric", "complementary", "latency")

# per-purpose stream tags for seed derivation
_MARKS, _ACCEPT, _POLICY = 1, 2, 3


def derive_seed(root: int, *keys: int) -> int:
    state = np.random.SeedSequence([root, *keys]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def family_name(text: str) -> str:
    if text.strip().lower() == "latency":
        return "latency"
    return Family.parse(text).value


@dataclass(frozen=True)
class ExperimentConfig:
    families: tuple[str, ...] = ("global", "random-symmetric", "metric")
    n: int = 500
    b_values: tuple[int, ...] = (2, 4, 6, 8, 10, 12, 14, 16, 18, 20)
    reps: int = 5
    seed: int = 0
    mode: str = "solve"
    policy: str = "uniform"
    step_limit: int | None = None
    acceptance: str = "auto"
    dim: int = 2
    latency_file: str | None = None
    latency_rule: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(family_name(f) for f in self.families))
        object.__setattr__(self, "b_values", tuple(int(b) for b in self.b_values))
        if self.mode not in ("solve", "simulate"):
            raise StructuralError(f"mode must be solve or simulate, got {self.mode!r}")
        PolicyKind.parse(self.policy)
        if "latency" in self.families and not self.latency_file:
            raise StructuralError("family 'latency' needs a latency matrix file")
        if self.reps < 1 or any(b < 1 for b in self.b_values):
            raise StructuralError("reps and quotas must be >= 1")
        parse_acceptance(self.acceptance)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def parse_acceptance(text: str) -> tuple[str, object]:
    """``auto`` | ``complete`` | ``er:<p>`` | ``file:<path>``."""
    t = text.strip()
    if t in ("auto", "complete"):
        return t, None
    kind, sep, arg = t.partition(":")
    if sep and kind == "er":
        try:
            p = float(arg)
        except ValueError:
            raise StructuralError(f"bad edge probability in {text!r}") from None
        if not 0 <= p <= 1:
            raise StructuralError(f"edge probability {p} outside [0, 1]")
        return "er", p
    if sep and kind == "file":
        return "file", arg
    raise StructuralError(f"acceptance must be auto, complete, er:<p> or file:<path>, got {text!r}")


def build_acceptance(text: str, family: str, n: int, seed: int) -> AcceptanceGraph | None:
    """Acceptance graph for a cell, ``None`` meaning complete.

    ``auto`` gives an Erdos-Renyi G(n, 0.5)
    acceptance graph under global marks and complete acceptance otherwise.
    """
    kind, arg = parse_acceptance(text)
    if kind == "auto":
        return er_acceptance(n, 0.5, seed) if family == "global" else None
    if kind == "complete":
        return None
    if kind == "er":
        return er_acceptance(n, arg, seed)
    from .fileio import read_configuration

    C = read_configuration(arg, n=n)
    return AcceptanceGraph(n, C.links)


@dataclass(frozen=True)
class ResultRow:
    family: str
    n: int
    b: int
    repetition: int
    seed: int
    diameter: float
    lcc_diameter: int
    clustering: float | None
    components: int
    edges: int
    max_degree: int
    steps: int | None = None
    converged: bool | None = None
    wall_time: float = field(default=0.0, compare=False)

    def sort_key(self):
        return (FAMILIES.index(self.family), self.b, self.repetition)


COLUMNS = (
    "family", "n", "b", "repetition", "seed", "diameter", "lcc_diameter",
    "clustering", "components", "edges", "max_degree", "steps", "converged",
)


def _cell_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    return str(v)


def build_marks(cfg: ExperimentConfig, family: str, rep: int) -> tuple[MarkMatrix, int]:
    fam_idx = FAMILIES.index(family)
    mseed = derive_seed(cfg.seed, _MARKS, fam_idx, rep)
    if family == "latency":
        marks = ingest_latency(cfg.latency_file, cfg.latency_rule, mseed).marks
    else:
        marks = generate(GeneratorSpec(Family.parse(family), cfg.n, mseed, dim=cfg.dim))
    G = build_acceptance(cfg.acceptance, family, marks.n, derive_seed(cfg.seed, _ACCEPT, fam_idx, rep))
    if G is not None:
        marks = restrict(marks, G)
    return marks, mseed


def run_group(cfg: ExperimentConfig, family: str, rep: int) -> list[ResultRow]:
    """All quota cells of one ``(family, repetition)`` instance."""
    marks, mseed = build_marks(cfg, family, rep)
    L = preferences_from_marks(marks)
    n = L.n
    rows = []
    for b in cfg.b_values:
        t0 = time.perf_counter()
        quotas = QuotaVector.uniform(n, b)
        steps = converged = None
        if cfg.mode == "solve":
            C = stable_configuration(L, quotas)
        else:
            pseed = derive_seed(cfg.seed, _POLICY, FAMILIES.index(family), rep, b)
            res = run_dynamics(L, quotas, None, ActivationPolicy(cfg.policy, pseed), cfg.step_limit)
            C, steps, converged = res.configuration, res.steps, res.converged
        rep_ = metrics_report(C, n)
        if rep_.max_degree > b:
            raise AssertionError(f"degree {rep_.max_degree} exceeds quota {b}")
        rows.append(
            ResultRow(
                family=family, n=n, b=b, repetition=rep, seed=mseed,
                diameter=rep_.diameter, lcc_diameter=rep_.largest_component_diameter,
                clustering=rep_.clustering, components=rep_.component_count,
                edges=rep_.edges, max_degree=rep_.max_degree,
                steps=steps, converged=converged,
                wall_time=time.perf_counter() - t0,
            )
        )
    return rows


def _threads() -> int:
    env = os.environ.get("BMATCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer BMATCH_THREADS=%r", env)
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> list[ResultRow]:
    groups = [(f, r) for f in cfg.families for r in range(cfg.reps)]
    threads = min(threads or _threads(), len(groups))
    rows: list[ResultRow] = []
    if threads <= 1:
        for f, r in groups:
            rows.extend(run_group(cfg, f, r))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run_group, cfg, f, r) for f, r in groups]
            for fut in futures:
                rows.extend(fut.result())
    return sorted(rows, key=ResultRow.sort_key)


def format_csv(cfg: ExperimentConfig, rows: Sequence[ResultRow], timing: bool = False) -> str:
    buf = io.StringIO()
    buf.write(f"# config={cfg.to_json()}\n")
    buf.write(f"# config_sha256={cfg.digest()} seed={cfg.seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = COLUMNS + (("wall_time",) if timing else ())
    w.writerow(cols)
    for row in rows:
        d = asdict(row)
        w.writerow([_cell_value(d[c]) for c in cols])
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, str]]:
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(body))


__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "COLUMNS",
    "derive_seed",
    "parse_acceptance",
    "build_acceptance",
    "build_marks",
    "run_group",
    "run_experiment",
    "format_csv",
    "read_csv",
]
