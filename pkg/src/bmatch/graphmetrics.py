"""Diameter, clustering, components and degrees of a configuration graph."""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from itertools import combinations

from .prefcore import INF, Configuration


def _adjacency(C: Configuration, n: int) -> list[set[int]]:
    return C.neighbors(n)


def clustering_coefficient(C: Configuration, n: int) -> float | None:
    """Fraction of vertex pairs with a common neighbor that are linked.

    This is the pairwise definition (probability that ``x`` and ``y`` are
    adjacent given that they share a neighbor), not the average of local
    coefficients. ``None`` when no pair shares a neighbor.
    """
    adj = _adjacency(C, n)
    pairs = set()
    for nbrs in adj:
        if len(nbrs) > 1:
            pairs.update(combinations(sorted(nbrs), 2))
    if not pairs:
        return None
    linked = sum(1 for x, y in pairs if y in adj[x])
    return linked / len(pairs)


def watts_clustering(C: Configuration, n: int) -> float | None:
    """Average local clustering over vertices of degree >= 2 (Watts-Strogatz style)."""
    adj = _adjacency(C, n)
    local = []
    for nbrs in adj:
        k = len(nbrs)
        if k < 2:
            continue
        tri = sum(1 for x, y in combinations(nbrs, 2) if y in adj[x])
        local.append(tri / (k * (k - 1) / 2))
    return sum(local) / len(local) if local else None


def _bfs(adj: list[set[int]], s: int) -> dict[int, int]:
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if v not in dist:
                dist[v] = du
                queue.append(v)
    return dist


def components(C: Configuration, n: int) -> list[list[int]]:
    """Connected components, each sorted, ordered by smallest member."""
    adj = _adjacency(C, n)
    seen = [False] * n
    parts = []
    for s in range(n):
        if seen[s]:
            continue
        part = sorted(_bfs(adj, s))
        for v in part:
            seen[v] = True
        parts.append(part)
    return parts


def _eccentricity_max(adj: list[set[int]], vertices) -> int:
    best = 0
    for s in vertices:
        best = max(best, max(_bfs(adj, s).values()))
    return best


def diameter(C: Configuration, n: int) -> float:
    """Longest shortest path; ``inf`` when the graph is disconnected."""
    if n <= 1:
        return 0
    adj = _adjacency(C, n)
    if len(_bfs(adj, 0)) < n:
        return INF
    return _eccentricity_max(adj, range(n))


def largest_component_diameter(C: Configuration, n: int) -> int:
    """Diameter of the largest component (ties: the larger diameter)."""
    if n == 0:
        return 0
    adj = _adjacency(C, n)
    parts = components(C, n)
    size = max(len(p) for p in parts)
    return max(_eccentricity_max(adj, p) for p in parts if len(p) == size)


def degree_histogram(C: Configuration, n: int) -> dict[int, int]:
    return dict(sorted(Counter(C.degrees(n)).items()))


@dataclass(frozen=True)
class MetricsReport:
    n: int
    edges: int
    diameter: float
    largest_component_diameter: int
    clustering: float | None
    watts_clustering: float | None
    component_sizes: tuple[int, ...]
    degree_histogram: dict[int, int]

    @property
    def component_count(self) -> int:
        return len(self.component_sizes)

    @property
    def max_degree(self) -> int:
        return max(self.degree_histogram) if self.degree_histogram else 0

    def as_dict(self) -> dict[str, object]:
        return {
            "n": self.n,
            "edges": self.edges,
            "diameter": _fmt(self.diameter),
            "largest_component_diameter": self.largest_component_diameter,
            "clustering": _fmt(self.clustering),
            "watts_clustering": _fmt(self.watts_clustering),
            "components": self.component_count,
            "component_sizes": list(self.component_sizes),
            "degree_histogram": {str(k): v for k, v in self.degree_histogram.items()},
        }


def _fmt(x):
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def metrics_report(C: Configuration, n: int) -> MetricsReport:
    adj = _adjacency(C, n)
    parts = components(C, n)
    if n <= 1:
        diam = 0
    elif len(parts) > 1:
        diam = INF
    else:
        diam = _eccentricity_max(adj, range(n))
    if n:
        size = max(len(p) for p in parts)
        lcd = diam if len(parts) == 1 else max(
            _eccentricity_max(adj, p) for p in parts if len(p) == size
        )
    else:
        lcd = 0
    return MetricsReport(
        n=n,
        edges=len(C),
        diameter=diam,
        largest_component_diameter=int(lcd),
        clustering=clustering_coefficient(C, n),
        watts_clustering=watts_clustering(C, n),
        component_sizes=tuple(sorted((len(p) for p in parts), reverse=True)),
        degree_histogram=degree_histogram(C, n),
    )


def to_dot(C: Configuration, n: int, labels=None) -> str:
    """Undirected DOT text; vertices are written 1-based unless ``labels`` given."""
    name = (lambda v: labels[v]) if labels else (lambda v: str(v + 1))
    lines = ["graph configuration {"]
    lines += [f"  {name(v)};" for v in range(n)]
    lines += [f"  {name(p)} -- {name(q)};" for p, q in C]
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "MetricsReport",
    "clustering_coefficient",
    "watts_clustering",
    "diameter",
    "largest_component_diameter",
    "components",
    "degree_histogram",
    "metrics_report",
    "to_dot",
]
