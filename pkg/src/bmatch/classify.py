"""Cycle detection, loving pairs, symmetric re-encoding and mark combinations."""

from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError, CyclicInstanceError, StructuralError
from .prefcore import (
    INF,
    GlobalMarkVector,
    MarkMatrix,
    Orientation,
    Pair,
    PreferenceInstance,
    edge,
    prefers,
    validate_marks,
)

log = logging.getLogger(__name__)

# float64 holds every integer below this exactly
_EXACT_INT_LIMIT = 2**53


@dataclass(frozen=True)
class PreferenceCycle:
    peers: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.peers)

    def holds_in(self, L: PreferenceInstance) -> bool:
        """Every peer strictly prefers its successor to its predecessor."""
        k = len(self.peers)
        if k < 3 or len(set(self.peers)) != k:
            return False
        for i, p in enumerate(self.peers):
            succ, pred = self.peers[(i + 1) % k], self.peers[i - 1]
            if not (L.accepts(p, succ) and L.accepts(p, pred)):
                return False
            if not prefers(L, p, succ, pred):
                return False
        return True


@dataclass(frozen=True, order=True)
class LovingPair:
    a: int
    b: int

    def __post_init__(self):
        a, b = edge(self.a, self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass
class PeelStats:
    """Work counters filled in by :func:`symmetrize_acyclic`."""

    iterations: int = 0
    probes: int = 0
    head_moves: int = 0


class _Residual:
    """Preference lists under pair removals and peer deletions.

    ``first(p)`` advances a per-peer head past removed entries, so the total
    cost of all ``first`` calls is bounded by the summed list lengths plus one
    per call.
    """

    def __init__(self, L: PreferenceInstance, stats: PeelStats | None = None):
        self.lists = L.lists
        self.head = [0] * L.n
        self.cut: list[set[int]] = [set() for _ in range(L.n)]
        self.dead = [False] * L.n
        self.stats = stats if stats is not None else PeelStats()

    def first(self, p: int) -> int | None:
        if self.dead[p]:
            return None
        lst, h, cut, dead = self.lists[p], self.head[p], self.cut[p], self.dead
        while h < len(lst) and (lst[h] in cut or dead[lst[h]]):
            h += 1
            self.stats.head_moves += 1
        self.head[p] = h
        return lst[h] if h < len(lst) else None

    def loving_partner(self, p: int) -> int | None:
        self.stats.probes += 1
        q = self.first(p)
        if q is not None and self.first(q) == p:
            return q
        return None

    def remove_pair(self, a: int, b: int) -> None:
        self.cut[a].add(b)
        self.cut[b].add(a)

    def remaining(self, p: int) -> list[int]:
        if self.dead[p]:
            return []
        lst, cut, dead = self.lists[p], self.cut[p], self.dead
        return [q for q in lst[self.head[p]:] if q not in cut and not dead[q]]

    def chase_cycle(self) -> PreferenceCycle | None:
        """Follow first choices from a peer with a nonempty residual list."""
        start = next((p for p in range(len(self.lists)) if self.first(p) is not None), None)
        if start is None:
            return None
        seen: dict[int, int] = {}
        path = []
        p = start
        while p not in seen:
            seen[p] = len(path)
            path.append(p)
            p = self.first(p)
        cyc = path[seen[p]:]
        if len(cyc) < 3:
            # a 2-cycle of first choices is a loving pair; callers peel those first
            return None
        i = cyc.index(min(cyc))
        return PreferenceCycle(tuple(cyc[i:] + cyc[:i]))


class _Worklist:
    """Candidate loving pairs; lexicographic (heap) or seeded random order."""

    def __init__(self, rng: random.Random | None = None):
        self.rng = rng
        self.items: list[Pair] = []

    def push(self, pair: Pair) -> None:
        if self.rng is None:
            heapq.heappush(self.items, pair)
        else:
            self.items.append(pair)

    def pop(self) -> Pair:
        if self.rng is None:
            return heapq.heappop(self.items)
        i = self.rng.randrange(len(self.items))
        self.items[i], self.items[-1] = self.items[-1], self.items[i]
        return self.items.pop()

    def __bool__(self) -> bool:
        return bool(self.items)


def _peel(L: PreferenceInstance, res: _Residual, on_pair, rng=None) -> None:
    """Remove loving pairs until none is left, calling ``on_pair(a, b)`` for each."""
    work = _Worklist(rng)
    for p in range(L.n):
        q = res.loving_partner(p)
        if q is not None and p < q:
            work.push((p, q))
    while work:
        a, b = work.pop()
        if res.first(a) != b or res.first(b) != a:
            continue
        res.stats.iterations += 1
        on_pair(a, b)
        res.remove_pair(a, b)
        for x in (a, b):
            y = res.loving_partner(x)
            if y is not None:
                work.push(edge(x, y))


def find_preference_cycle(L: PreferenceInstance) -> PreferenceCycle | None:
    """Return a preference cycle of ``L`` or ``None`` if ``L`` is acyclic.

    Loving pairs can never sit on a preference cycle, so they are peeled off
    first; whatever survives has no loving pair and the chain of first
    choices closes into a cycle of length at least three.
    """
    res = _Residual(L)
    _peel(L, res, lambda a, b: None)
    cycle = res.chase_cycle()
    if cycle is not None:
        assert cycle.holds_in(L), cycle
    return cycle


def is_acyclic(L: PreferenceInstance) -> bool:
    return find_preference_cycle(L) is None


def loving_pairs(L: PreferenceInstance) -> set[LovingPair]:
    out = set()
    for p, lst in enumerate(L.lists):
        if lst:
            q = lst[0]
            if L.lists[q][0] == p and p < q:
                out.add(LovingPair(p, q))
    return out


def symmetrize_acyclic(
    L: PreferenceInstance,
    *,
    rng: random.Random | None = None,
    stats: PeelStats | None = None,
) -> MarkMatrix:
    """Symmetric integer marks reproducing ``L`` exactly.

    Loving pairs are extracted one at a time and labelled 0, 1, 2, ... in
    extraction order. Without ``rng`` the lexicographically smallest
    available pair goes first; with ``rng`` the order is random, which only
    changes the labels. Raises :class:`CyclicInstanceError` on cyclic input.
    """
    n = L.n
    marks = np.full((n, n), INF)
    counter = 0

    def label(a: int, b: int) -> None:
        nonlocal counter
        marks[a, b] = marks[b, a] = counter
        counter += 1

    res = _Residual(L, stats)
    _peel(L, res, label, rng)
    cycle = res.chase_cycle()
    if cycle is not None:
        raise CyclicInstanceError(cycle)
    return MarkMatrix(marks, Orientation.LOWER, {"source": "symmetrize_acyclic"})


@dataclass(frozen=True)
class GlobalConflict:
    """Why an instance has no global marks.

    ``constraints`` is a cycle of ``(ranker, better, worse)`` facts. In the
    common case it has length two: two rankers order the same two peers in
    opposite ways.
    """

    constraints: tuple[tuple[int, int, int], ...]

    @property
    def peers(self) -> tuple[int, ...]:
        return tuple(c[1] for c in self.constraints)

    @property
    def rankers(self) -> tuple[int, ...]:
        return tuple(c[0] for c in self.constraints)

    def holds_in(self, L: PreferenceInstance) -> bool:
        k = len(self.constraints)
        for i, (r, better, worse) in enumerate(self.constraints):
            if not prefers(L, r, better, worse):
                return False
            if self.constraints[(i + 1) % k][1] != worse:
                return False
        return k >= 2


def is_global_representable(L: PreferenceInstance) -> GlobalMarkVector | GlobalConflict:
    """Global marks reproducing ``L``, or a conflict proving none exist.

    Every list contributes "better before worse" constraints between
    consecutive entries; global marks exist iff that relation is acyclic,
    and then any topological order (ranked 0 = best) works.
    """
    n = L.n
    succ: list[dict[int, int]] = [dict() for _ in range(n)]
    indeg = [0] * n
    for r, lst in enumerate(L.lists):
        for x, y in zip(lst, lst[1:]):
            if y not in succ[x]:
                succ[x][y] = r
                indeg[y] += 1
    heap = [p for p in range(n) if indeg[p] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        x = heapq.heappop(heap)
        order.append(x)
        for y in succ[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                heapq.heappush(heap, y)
    if len(order) == n:
        values = [0] * n
        for pos, p in enumerate(order):
            values[p] = pos
        return GlobalMarkVector(tuple(values), Orientation.LOWER)
    return _global_conflict(L, succ, [p for p in range(n) if indeg[p] > 0])


def _global_conflict(L, succ, stuck) -> GlobalConflict:
    # every stuck node keeps a stuck predecessor, so walking backwards closes a cycle
    stuck_set = set(stuck)
    pred: dict[int, int] = {}
    for x in stuck:
        for y in succ[x]:
            if y in stuck_set and y not in pred:
                pred[y] = x
    seen: dict[int, int] = {}
    walk = []
    y = stuck[0]
    while y not in seen:
        seen[y] = len(walk)
        walk.append(y)
        y = pred[y]
    loop = walk[seen[y]:][::-1]
    facts = []
    for i, x in enumerate(loop):
        y = loop[(i + 1) % len(loop)]
        facts.append((succ[x][y], x, y))
    rank = L.rank
    for r, x, y in facts:
        rx, ry = rank[:, x], rank[:, y]
        rivals = np.flatnonzero((rx >= 0) & (ry >= 0) & (ry < rx))
        if len(rivals):
            return GlobalConflict(((r, x, y), (int(rivals[0]), y, x)))
    return GlobalConflict(tuple(facts))


def is_global_matrix(m: MarkMatrix) -> bool:
    """Each column's finite entries coincide (one mark per graded peer)."""
    e = m.entries
    fin = np.isfinite(e)
    for q in range(m.n):
        col = e[fin[:, q], q]
        if len(col) and not np.all(col == col[0]):
            return False
    return True


def is_symmetric_matrix(m: MarkMatrix) -> bool:
    return validate_marks(m).symmetric


def _check_same_pattern(m1: MarkMatrix, m2: MarkMatrix) -> np.ndarray:
    if m1.n != m2.n:
        raise StructuralError(f"size mismatch: {m1.n} vs {m2.n}")
    f1, f2 = m1.finite_mask(), m2.finite_mask()
    if not np.array_equal(f1, f2):
        p, q = map(int, np.argwhere(f1 != f2)[0])
        raise StructuralError(f"acceptance patterns differ at ({p}, {q})")
    return f1


def _warn_ties(m: MarkMatrix, what: str) -> None:
    report = validate_marks(m)
    if report.ties:
        log.warning("%s produced in-row ties: %s", what, report.describe())


def linear_combine(m1: MarkMatrix, m2: MarkMatrix, lam: float, mu: float) -> MarkMatrix:
    """Entrywise ``lam * m1 + mu * m2`` over the shared finite pattern.

    ``m2`` is first rewritten in ``m1``'s orientation; the result keeps that
    orientation. Acyclicity is only guaranteed when each operand is global
    or symmetric. In-row ties are logged, not raised; check with
    :func:`validate_marks`.
    """
    fin = _check_same_pattern(m1, m2)
    m2 = m2.with_orientation(m1.orientation)
    out = np.full(m1.entries.shape, INF)
    out[fin] = lam * m1.entries[fin] + mu * m2.entries[fin]
    res = MarkMatrix(out, m1.orientation, {"source": "linear_combine", "lambda": lam, "mu": mu})
    _warn_ties(res, "linear_combine")
    return res


def complementary_marks(v: GlobalMarkVector, c: MarkMatrix) -> MarkMatrix:
    """Marks ``m(i, j) = v(j) - c(i, j)``, higher preferred.

    ``v`` holds each peer's resource worth (raw values, whatever its
    orientation flag); ``c`` is the symmetric commonality matrix and its
    finite pattern fixes acceptance.
    """
    if v.n != c.n:
        raise StructuralError(f"size mismatch: vector {v.n} vs matrix {c.n}")
    if not validate_marks(c).symmetric:
        raise StructuralError("commonality matrix must be symmetric")
    fin = c.finite_mask()
    vals = np.asarray(v.values)
    out = np.where(fin, vals[None, :] - np.where(fin, c.entries, 0.0), INF)
    res = MarkMatrix(out, Orientation.HIGHER, {"source": "complementary_marks"})
    _warn_ties(res, "complementary_marks")
    return res


def _integer_entries(m: MarkMatrix, name: str) -> None:
    fin = m.entries[m.finite_mask()]
    if not np.all(fin == np.round(fin)):
        raise StructuralError(f"{name} has non-integer finite entries")


def tieless_combine(m1: MarkMatrix, m2: MarkMatrix, k: int | None = None) -> MarkMatrix:
    """Exact-integer combination ``k * m1 + m2`` ordering rows by ``(m1, m2)``.

    ``k`` defaults to one more than the spread of ``m2``'s finite entries, the
    smallest factor for which no ``m2`` difference can overturn an ``m1``
    difference. Ties of ``m1`` are thus broken by ``m2``; the result is
    tie-free whenever ``m2`` is.
    """
    fin = _check_same_pattern(m1, m2)
    _integer_entries(m1, "m1")
    _integer_entries(m2, "m2")
    for name, m in (("m1", m1), ("m2", m2)):
        if not (is_global_matrix(m) or is_symmetric_matrix(m)):
            raise ContractError(f"{name} is neither global nor symmetric")
    m2 = m2.with_orientation(m1.orientation)
    if validate_marks(m2).ties:
        raise ContractError("m2 has in-row ties; it cannot break ties of m1")
    f2 = m2.entries[fin]
    spread = int(f2.max() - f2.min()) if f2.size else 0
    if k is None:
        k = spread + 1
    elif k <= spread:
        raise ContractError(f"factor {k} does not exceed the spread {spread} of m2")
    out = np.full(m1.entries.shape, INF)
    out[fin] = k * m1.entries[fin] + m2.entries[fin]
    if out[fin].size and np.abs(out[fin]).max() >= _EXACT_INT_LIMIT:
        raise ContractError("combined marks exceed exact float64 integer range")
    res = MarkMatrix(out, m1.orientation, {"source": "tieless_combine", "k": k})
    report = validate_marks(res)
    if report.ties:
        raise ContractError(f"tieless_combine left ties: {report.describe()}")
    return res


__all__: Sequence[str] = (
    "PreferenceCycle",
    "LovingPair",
    "PeelStats",
    "GlobalConflict",
    "find_preference_cycle",
    "is_acyclic",
    "loving_pairs",
    "symmetrize_acyclic",
    "is_global_representable",
    "is_global_matrix",
    "is_symmetric_matrix",
    "linear_combine",
    "complementary_marks",
    "tieless_combine",
)
