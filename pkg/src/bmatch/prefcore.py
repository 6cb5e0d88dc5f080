"""Marks, preference lists, acceptance graphs, quotas and configurations.

Peers are dense integer indices ``0..n-1``. Non-acceptance is encoded by IEEE
``inf`` inside a float64 array; all arithmetic on marks goes through helpers
that mask infinite entries first, so ``inf`` never takes part in a sum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ContractError, StructuralError, ValidationError

INF = math.inf

Pair = tuple[int, int]


def edge(p: int, q: int) -> Pair:
    """Canonical unordered pair ``(min, max)``."""
    if p == q:
        raise StructuralError(f"self-loop on peer {p}")
    return (p, q) if p < q else (q, p)


class Orientation(str, enum.Enum):
    LOWER = "lo"
    HIGHER = "hi"

    @classmethod
    def parse(cls, text: str | Orientation) -> Orientation:
        if isinstance(text, Orientation):
            return text
        t = text.strip().lower()
        if t in ("lo", "lower", "lower-is-better", "low"):
            return cls.LOWER
        if t in ("hi", "higher", "higher-is-better", "high"):
            return cls.HIGHER
        raise StructuralError(f"unknown orientation {text!r}")

    def flipped(self) -> Orientation:
        return Orientation.HIGHER if self is Orientation.LOWER else Orientation.LOWER


class MarkMatrix:
    """Immutable ``n x n`` matrix of marks.

    ``entries[p, q]`` is the mark peer ``p`` gives to ``q``; ``inf`` means
    ``q`` is not acceptable to ``p``. The diagonal is stored as ``inf`` and is
    never consulted. ``meta`` carries provenance (seed, generator, rules) and
    does not take part in equality.
    """

    __slots__ = ("entries", "orientation", "meta")

    def __init__(
        self,
        entries,
        orientation: Orientation | str = Orientation.LOWER,
        meta: Mapping[str, object] | None = None,
    ):
        arr = np.array(entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise StructuralError(f"mark matrix must be square, got shape {arr.shape}")
        if np.isnan(arr).any():
            raise StructuralError("mark matrix contains NaN")
        if np.isneginf(arr).any():
            raise StructuralError("mark matrix contains -inf")
        np.fill_diagonal(arr, INF)
        arr.flags.writeable = False
        self.entries = arr
        self.orientation = Orientation.parse(orientation)
        self.meta = dict(meta or {})

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, key):
        return self.entries[key]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MarkMatrix):
            return NotImplemented
        return self.orientation is other.orientation and np.array_equal(
            self.entries, other.entries
        )

    def __hash__(self):
        return hash((self.orientation, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"MarkMatrix(n={self.n}, orientation={self.orientation.value})"

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.entries)

    def with_orientation(self, orientation: Orientation | str) -> MarkMatrix:
        """Same preferences expressed in ``orientation`` (finite entries negated if needed)."""
        orientation = Orientation.parse(orientation)
        if orientation is self.orientation:
            return self
        out = np.where(self.finite_mask(), -self.entries, INF)
        return MarkMatrix(out, orientation, self.meta)

    def tolist(self) -> list[list[float]]:
        return self.entries.tolist()


@dataclass(frozen=True)
class GlobalMarkVector:
    """One mark per peer; every peer grades ``q`` with ``values[q]``."""

    values: tuple[float, ...]
    orientation: Orientation = Orientation.LOWER

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(set(vals)) != len(vals):
            raise ValidationError("global marks must be pairwise distinct")
        if any(not math.isfinite(v) for v in vals):
            raise ValidationError("global marks must be finite")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "orientation", Orientation.parse(self.orientation))

    @property
    def n(self) -> int:
        return len(self.values)

    def to_matrix(self, acceptance: AcceptanceGraph | None = None) -> MarkMatrix:
        n = self.n
        m = np.tile(np.asarray(self.values, dtype=np.float64), (n, 1))
        if acceptance is not None:
            if acceptance.n != n:
                raise StructuralError("acceptance graph size differs from vector length")
            m = np.where(acceptance.adjacency(), m, INF)
        return MarkMatrix(m, self.orientation)


@dataclass(frozen=True)
class AcceptanceGraph:
    n: int
    edges: frozenset[Pair]

    def __post_init__(self):
        norm = frozenset(edge(p, q) for p, q in self.edges)
        for p, q in norm:
            if not (0 <= p < self.n and 0 <= q < self.n):
                raise StructuralError(f"edge ({p}, {q}) outside 0..{self.n - 1}")
        object.__setattr__(self, "edges", norm)

    @classmethod
    def complete(cls, n: int) -> AcceptanceGraph:
        return cls(n, frozenset((p, q) for p in range(n) for q in range(p + 1, n)))

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> AcceptanceGraph:
        iu, ju = np.nonzero(np.triu(adj, 1))
        return cls(adj.shape[0], frozenset(zip(iu.tolist(), ju.tolist())))

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        if self.edges:
            e = np.array(sorted(self.edges))
            adj[e[:, 0], e[:, 1]] = True
            adj[e[:, 1], e[:, 0]] = True
        return adj

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class QuotaVector:
    quotas: tuple[float, ...]

    def __post_init__(self):
        qs = []
        for b in self.quotas:
            if b != INF:
                if int(b) != b:
                    raise StructuralError(f"quota {b} is not an integer")
                b = int(b)
            if b < 1:
                raise StructuralError(f"quota {b} < 1")
            qs.append(b)
        object.__setattr__(self, "quotas", tuple(qs))

    @classmethod
    def uniform(cls, n: int, b: float) -> QuotaVector:
        return cls((b,) * n)

    def __getitem__(self, p: int):
        return self.quotas[p]

    def __len__(self) -> int:
        return len(self.quotas)

    def as_array(self) -> np.ndarray:
        return np.array(self.quotas, dtype=np.float64)


@dataclass(frozen=True)
class Configuration:
    """A set of links; a b-matching when every degree respects its quota."""

    links: frozenset[Pair] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "links", frozenset(edge(p, q) for p, q in self.links))

    @classmethod
    def of(cls, pairs: Iterable[Sequence[int]]) -> Configuration:
        return cls(frozenset((int(p), int(q)) for p, q in pairs))

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.links))

    def __len__(self) -> int:
        return len(self.links)

    def __contains__(self, pair) -> bool:
        p, q = pair
        return edge(p, q) in self.links

    def degrees(self, n: int) -> list[int]:
        deg = [0] * n
        for p, q in self.links:
            deg[p] += 1
            deg[q] += 1
        return deg

    def neighbors(self, n: int) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(n)]
        for p, q in self.links:
            adj[p].add(q)
            adj[q].add(p)
        return adj

    def is_b_matching(self, b: QuotaVector) -> bool:
        return all(d <= b[p] for p, d in enumerate(self.degrees(len(b))))

    def sorted_links(self) -> list[Pair]:
        return sorted(self.links)


class PreferenceInstance:
    """Strict preference lists, best first, with symmetric acceptance."""

    __slots__ = ("lists", "rank")

    def __init__(self, lists: Iterable[Iterable[int]]):
        lists = tuple(tuple(int(q) for q in lst) for lst in lists)
        n = len(lists)
        rank = np.full((n, n), -1, dtype=np.int64)
        for p, lst in enumerate(lists):
            if len(set(lst)) != len(lst):
                raise StructuralError(f"duplicate entry in list of peer {p}")
            if p in lst:
                raise StructuralError(f"peer {p} lists itself")
            if lst:
                idx = np.asarray(lst, dtype=np.int64)
                if idx.min() < 0 or idx.max() >= n:
                    raise StructuralError(f"list of peer {p} names a peer outside 0..{n - 1}")
                rank[p, idx] = np.arange(len(lst))
        acc = rank >= 0
        if not np.array_equal(acc, acc.T):
            p, q = map(int, np.argwhere(acc != acc.T)[0])
            raise StructuralError(f"acceptance is not mutual between peers {p} and {q}")
        rank.flags.writeable = False
        self.lists = lists
        self.rank = rank

    @property
    def n(self) -> int:
        return len(self.lists)

    def __len__(self) -> int:
        return len(self.lists)

    def __getitem__(self, p: int) -> tuple[int, ...]:
        return self.lists[p]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PreferenceInstance):
            return NotImplemented
        return self.lists == other.lists

    def __hash__(self):
        return hash(self.lists)

    def __repr__(self) -> str:
        return f"PreferenceInstance({[list(lst) for lst in self.lists]})"

    def accepts(self, p: int, q: int) -> bool:
        return p != q and self.rank[p, q] >= 0

    def is_trivial(self) -> bool:
        return not any(self.lists)

    def num_edges(self) -> int:
        return sum(len(lst) for lst in self.lists) // 2

    def acceptance(self) -> AcceptanceGraph:
        return AcceptanceGraph(
            self.n, frozenset((p, q) for p, lst in enumerate(self.lists) for q in lst if p < q)
        )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_marks`.

    ``ties`` holds ``(peer, value, tied_neighbors)`` groups; ``one_sided``
    holds ordered pairs ``(p, q)`` with ``m(p, q)`` finite but ``m(q, p)``
    infinite.
    """

    ties: tuple[tuple[int, float, tuple[int, ...]], ...]
    one_sided: tuple[Pair, ...]
    symmetric: bool

    @property
    def ok(self) -> bool:
        return not self.ties and not self.one_sided

    def describe(self) -> str:
        parts = []
        for p, v, qs in self.ties[:5]:
            parts.append(f"peer {p} gives mark {v:g} to {list(qs)}")
        for p, q in self.one_sided[:5]:
            parts.append(f"peer {p} accepts {q} but not conversely")
        extra = len(self.ties) + len(self.one_sided) - len(parts)
        if extra > 0:
            parts.append(f"... and {extra} more")
        return "; ".join(parts) or "ok"


def validate_marks(m: MarkMatrix) -> ValidationReport:
    """Check tie-freeness, mutual acceptance and symmetry of ``m``."""
    e = m.entries
    fin = np.isfinite(e)
    ties = []
    for p in range(m.n):
        qs = np.flatnonzero(fin[p])
        if len(qs) < 2:
            continue
        vals = e[p, qs]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        dup = np.flatnonzero(sv[1:] == sv[:-1])
        if len(dup) == 0:
            continue
        for v in np.unique(sv[dup]):
            group = qs[vals == v]
            ties.append((p, float(v), tuple(int(q) for q in sorted(group))))
    one = np.argwhere(fin & ~fin.T)
    one_sided = tuple((int(p), int(q)) for p, q in one)
    both = fin & fin.T
    symmetric = not one_sided and bool(np.array_equal(e[both], e.T[both]))
    return ValidationReport(tuple(ties), one_sided, symmetric)


def require_valid(m: MarkMatrix) -> ValidationReport:
    report = validate_marks(m)
    if not report.ok:
        raise ValidationError(f"invalid marks: {report.describe()}", report)
    return report


def preferences_from_marks(m: MarkMatrix) -> PreferenceInstance:
    """Rank every peer's acceptable neighbors best first."""
    require_valid(m)
    e = m.entries
    sign = 1.0 if m.orientation is Orientation.LOWER else -1.0
    lists = []
    for p in range(m.n):
        qs = np.flatnonzero(np.isfinite(e[p]))
        order = np.argsort(sign * e[p, qs], kind="stable")
        lists.append(qs[order].tolist())
    return PreferenceInstance(lists)


def prefers(L: PreferenceInstance, p: int, q1: int, q2: int) -> bool:
    """True iff ``p`` ranks ``q1`` strictly before ``q2``."""
    if not (L.accepts(p, q1) and L.accepts(p, q2)):
        raise ContractError(f"peers {q1}, {q2} are not both acceptable to {p}")
    return bool(L.rank[p, q1] < L.rank[p, q2])


def acceptance_from_marks(m: MarkMatrix) -> AcceptanceGraph:
    require_valid(m)
    return AcceptanceGraph.from_adjacency(m.finite_mask())
