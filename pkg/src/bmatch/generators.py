"""Seeded mark families, acceptance graphs, and latency-matrix ingestion.

Every generator draws from ``numpy.random.Generator(PCG64(seed))`` and is a
pure function of its arguments.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import complementary_marks
from .errors import FormatError, StructuralError
from .prefcore import (
    INF,
    AcceptanceGraph,
    GlobalMarkVector,
    MarkMatrix,
    Orientation,
    validate_marks,
)

_MAX_RESAMPLES = 100


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class Family(str, enum.Enum):
    GLOBAL = "global"
    SYMMETRIC = "random-symmetric"
    METRIC = "metric"
    COMPLEMENTARY = "complementary"

    @classmethod
    def parse(cls, text: str | Family) -> Family:
        if isinstance(text, Family):
            return text
        aliases = {
            "global": cls.GLOBAL,
            "random-symmetric": cls.SYMMETRIC,
            "symmetric": cls.SYMMETRIC,
            "random": cls.SYMMETRIC,
            "metric": cls.METRIC,
            "metric-space": cls.METRIC,
            "complementary": cls.COMPLEMENTARY,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise StructuralError(f"unknown mark family {text!r}") from None


@dataclass(frozen=True)
class GeneratorSpec:
    family: Family
    n: int
    seed: int = 0
    dim: int = 2
    value_range: tuple[float, float] = (0.0, 1.0)
    common_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.n < 2:
            raise StructuralError("generators need n >= 2")

    def as_dict(self) -> dict[str, object]:
        d = {"family": self.family.value, "n": self.n, "seed": self.seed}
        if self.family is Family.METRIC:
            d["dim"] = self.dim
        if self.family is Family.COMPLEMENTARY:
            d["value_range"] = list(self.value_range)
            d["common_range"] = list(self.common_range)
        return d


def _check_n(n: int) -> None:
    if n < 2:
        raise StructuralError("generators need n >= 2")


def global_marks(n: int, seed: int) -> tuple[GlobalMarkVector, MarkMatrix]:
    """Uniform draws replaced by their ranks: a random permutation of 0..n-1.

    Lower is better, so the peer with value 0 is everybody's favourite.
    """
    _check_n(n)
    draws = _rng(seed).random(n)
    ranks = np.empty(n, dtype=np.int64)
    ranks[np.argsort(draws, kind="stable")] = np.arange(n)
    vec = GlobalMarkVector(tuple(float(r) for r in ranks), Orientation.LOWER)
    m = vec.to_matrix()
    m.meta.update(family="global", n=n, seed=seed)
    return vec, m


def _upper_to_symmetric(n: int, upper: np.ndarray) -> np.ndarray:
    m = np.full((n, n), INF)
    iu = np.triu_indices(n, 1)
    m[iu] = upper
    m.T[iu] = upper
    return m


def random_symmetric_marks(n: int, seed: int) -> MarkMatrix:
    """I.i.d. uniform marks on each unordered pair, resampled on a row tie."""
    _check_n(n)
    rng = _rng(seed)
    for _ in range(_MAX_RESAMPLES):
        upper = rng.random(n * (n - 1) // 2)
        m = MarkMatrix(_upper_to_symmetric(n, upper), Orientation.LOWER,
                       {"family": "random-symmetric", "n": n, "seed": seed})
        if validate_marks(m).ok:
            return m
    raise RuntimeError("could not draw a tie-free symmetric matrix")


def marks_from_points(points) -> MarkMatrix:
    """Pairwise Euclidean distances, lower is better."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    diff = pts[:, None, :] - pts[None, :, :]
    return MarkMatrix(np.sqrt((diff**2).sum(axis=-1)), Orientation.LOWER)


def metric_marks(n: int, dim: int, seed: int) -> MarkMatrix:
    """Distances between ``n`` uniform points of the unit cube ``[0, 1]**dim``.

    A synthetic stand-in for measured round-trip times: symmetric and
    satisfying the triangle inequality.
    """
    _check_n(n)
    if dim not in (2, 3):
        raise StructuralError(f"metric marks support dim 2 or 3, got {dim}")
    rng = _rng(seed)
    for _ in range(_MAX_RESAMPLES):
        m = marks_from_points(rng.random((n, dim)))
        if validate_marks(m).ok:
            m.meta.update(family="metric", n=n, dim=dim, seed=seed)
            return m
    raise RuntimeError("could not draw tie-free metric marks")


def complementary_family(
    n: int,
    seed: int,
    value_range: tuple[float, float] = (0.0, 1.0),
    common_range: tuple[float, float] = (0.0, 1.0),
) -> MarkMatrix:
    """Random worth ``v`` and symmetric commonality ``c``, combined as ``v(j) - c(i, j)``."""
    _check_n(n)
    rng = _rng(seed)
    for _ in range(_MAX_RESAMPLES):
        v = rng.uniform(*value_range, size=n)
        c = rng.uniform(*common_range, size=n * (n - 1) // 2)
        if len(set(v.tolist())) < n:
            continue
        cm = MarkMatrix(_upper_to_symmetric(n, c))
        m = complementary_marks(GlobalMarkVector(tuple(v), Orientation.HIGHER), cm)
        if validate_marks(m).ok:
            m.meta.update(family="complementary", n=n, seed=seed)
            return m
    raise RuntimeError("could not draw tie-free complementary marks")


def generate(spec: GeneratorSpec) -> MarkMatrix:
    if spec.family is Family.GLOBAL:
        return global_marks(spec.n, spec.seed)[1]
    if spec.family is Family.SYMMETRIC:
        return random_symmetric_marks(spec.n, spec.seed)
    if spec.family is Family.METRIC:
        return metric_marks(spec.n, spec.dim, spec.seed)
    return complementary_family(spec.n, spec.seed, spec.value_range, spec.common_range)


def er_acceptance(n: int, p: float, seed: int) -> AcceptanceGraph:
    """Erdos-Renyi G(n, p): every unordered pair kept independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise StructuralError(f"edge probability {p} outside [0, 1]")
    keep = _rng(seed).random(n * (n - 1) // 2) < p
    iu, ju = np.triu_indices(n, 1)
    return AcceptanceGraph(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))


def restrict(m: MarkMatrix, G: AcceptanceGraph) -> MarkMatrix:
    """Set marks of non-edges of ``G`` to ``inf``."""
    if G.n != m.n:
        raise StructuralError(f"graph has {G.n} vertices, matrix has {m.n}")
    out = np.where(G.adjacency(), m.entries, INF)
    meta = dict(m.meta)
    meta["restricted_edges"] = len(G)
    return MarkMatrix(out, m.orientation, meta)


# -- latency ingestion ------------------------------------------------------

_MISSING = {"", "inf", "+inf", "infinity", "nan", "na", "-", "?", "x"}

RECONCILE = {
    "mean": lambda a, b: (a + b) / 2.0,
    "min": np.minimum,
    "max": np.maximum,
}


def parse_latency_text(text: str, path=None) -> np.ndarray:
    """Plain-text RTT matrix: one row per line, whitespace separated.

    ``inf`` (and ``nan``, ``-``, ``?``) marks a missing entry; tab-separated
    rows may also leave a field empty. An optional first line ``n=<count>``
    fixes the expected size. Lines starting with ``#`` are ignored.
    """
    rows = []
    expected = None
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if expected is None and not rows and line.strip().lower().startswith("n="):
            try:
                expected = int(line.strip()[2:].split()[0])
            except ValueError:
                raise FormatError(f"bad header {line.strip()!r}", lineno, path) from None
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        row = []
        for tok in fields:
            t = tok.strip().lower()
            if t in _MISSING:
                row.append(INF)
                continue
            try:
                row.append(float(t))
            except ValueError:
                raise FormatError(f"not a number: {tok.strip()!r}", lineno, path) from None
        rows.append((lineno, row))
    n = len(rows)
    if expected is not None and expected != n:
        raise FormatError(f"header says n={expected} but found {n} rows", None, path)
    for lineno, row in rows:
        if len(row) != n:
            raise FormatError(f"row has {len(row)} entries, expected {n}", lineno, path)
    return np.array([r for _, r in rows], dtype=np.float64).reshape(n, n)


def _dither_ties(m: np.ndarray, rng: np.random.Generator) -> int:
    """Break in-row ties of symmetric ``m`` in place; returns the number of pairs moved.

    Every pair involved in a tie is shifted by a distinct random amount
    below half of the smallest nonzero gap in any row, so entries that were
    already ordered keep their order.
    """
    n = m.shape[0]
    fin = np.isfinite(m)
    np.fill_diagonal(fin, False)
    gaps = []
    tied = set()
    for p in range(n):
        qs = np.flatnonzero(fin[p])
        if len(qs) < 2:
            continue
        vals = m[p, qs]
        order = np.argsort(vals, kind="stable")
        d = np.diff(vals[order])
        nz = d[d > 0]
        if nz.size:
            gaps.append(nz.min())
        for k in np.flatnonzero(d == 0):
            for q in (qs[order[k]], qs[order[k + 1]]):
                tied.add((min(p, int(q)), max(p, int(q))))
    if not tied:
        return 0
    scale = max(float(np.abs(m[fin]).max()), 1.0)
    gap = min(gaps) if gaps else scale * 1e-6
    eps = gap / 2.0
    pairs = sorted(tied)
    offsets = rng.random(len(pairs)) * eps
    for (p, q), off in zip(pairs, offsets):
        m[p, q] += off
        m[q, p] = m[p, q]
    return len(pairs)


@dataclass
class LatencyIngest:
    marks: MarkMatrix
    rule: str
    seed: int
    dithered_pairs: int
    missing_pairs: int
    notes: list[str] = field(default_factory=list)


def ingest_latency_matrix(source, rule: str = "mean", seed: int = 0) -> MarkMatrix:
    """Turn a measured RTT matrix into validated, symmetric, tie-free marks.

    ``source`` is a path, the text of a matrix file, or an ``n x n`` array.
    Zero and missing off-diagonal entries become non-acceptance. When only
    one direction was measured it is used for both; when both were, ``rule``
    (``mean``, ``min`` or ``max``) reconciles them. Remaining in-row ties are
    dithered with a PCG64 stream seeded by ``seed``. The choices made are
    recorded in the result's ``meta``.
    """
    return ingest_latency(source, rule, seed).marks


def ingest_latency(source, rule: str = "mean", seed: int = 0) -> LatencyIngest:
    if rule not in RECONCILE:
        raise StructuralError(f"unknown reconciliation rule {rule!r}; use mean, min or max")
    label = None
    if isinstance(source, (str, os.PathLike)) and not _looks_like_matrix_text(source):
        label = str(source)
        raw = parse_latency_text(Path(source).read_text(encoding="utf-8"), path=label)
    elif isinstance(source, str):
        raw = parse_latency_text(source)
    else:
        raw = np.array(source, dtype=np.float64)
        raw = np.where(np.isnan(raw), INF, raw)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise StructuralError(f"latency matrix must be square, got shape {raw.shape}")
    n = raw.shape[0]
    off = ~np.eye(n, dtype=bool)
    if (raw[off] < 0).any():
        p, q = map(int, np.argwhere((raw < 0) & off)[0])
        raise StructuralError(f"negative latency at ({p}, {q})")
    a = np.where((raw > 0) & np.isfinite(raw) & off, raw, np.nan)
    b = a.T
    both = ~np.isnan(a) & ~np.isnan(b)
    combined = np.full((n, n), INF)
    combined[both] = RECONCILE[rule](a[both], b[both])
    only_a = ~np.isnan(a) & np.isnan(b)
    only_b = np.isnan(a) & ~np.isnan(b)
    combined[only_a] = a[only_a]
    combined[only_b] = b[only_b]
    missing = int(np.count_nonzero(np.triu(~np.isfinite(combined), 1)))
    moved = _dither_ties(combined, _rng(seed))
    meta = {
        "source": label or "inline",
        "rule": rule,
        "dither_seed": seed,
        "dithered_pairs": moved,
        "missing_pairs": missing,
        "one_sided_pairs": int(np.count_nonzero(np.triu(only_a | only_b, 1))),
    }
    marks = MarkMatrix(combined, Orientation.LOWER, meta)
    report = validate_marks(marks)
    if not report.ok:
        raise RuntimeError(f"latency ingestion left invalid marks: {report.describe()}")
    return LatencyIngest(marks, rule, seed, moved, missing)


def _looks_like_matrix_text(s) -> bool:
    return isinstance(s, str) and ("\n" in s or s.strip().lower().startswith("n="))


__all__ = [
    "Family",
    "GeneratorSpec",
    "global_marks",
    "random_symmetric_marks",
    "metric_marks",
    "marks_from_points",
    "complementary_family",
    "generate",
    "er_acceptance",
    "restrict",
    "parse_latency_text",
    "ingest_latency_matrix",
    "ingest_latency",
    "LatencyIngest",
]
