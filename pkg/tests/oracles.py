"""Brute-force reference computations, deliberately independent of the library.

Nothing here imports algorithmic code from ``bmatch``; only plain lists,
sets and itertools.
"""

from __future__ import annotations

import itertools
import math


def rank_of(lists):
    return [{q: i for i, q in enumerate(lst)} for lst in lists]


def has_preference_cycle(lists) -> bool:
    """Try every ordered tuple of k >= 3 distinct peers as a cycle."""
    n = len(lists)
    rank = rank_of(lists)
    for k in range(3, n + 1):
        for combo in itertools.combinations(range(n), k):
            first = combo[0]
            for rest in itertools.permutations(combo[1:]):
                cyc = (first,) + rest
                ok = True
                for i, p in enumerate(cyc):
                    s, pr = cyc[(i + 1) % k], cyc[i - 1]
                    if s not in rank[p] or pr not in rank[p] or rank[p][s] >= rank[p][pr]:
                        ok = False
                        break
                if ok:
                    return True
    return False


def is_cycle(lists, cyc) -> bool:
    rank = rank_of(lists)
    k = len(cyc)
    if k < 3 or len(set(cyc)) != k:
        return False
    for i, p in enumerate(cyc):
        s, pr = cyc[(i + 1) % k], cyc[i - 1]
        if s not in rank[p] or pr not in rank[p] or rank[p][s] >= rank[p][pr]:
            return False
    return True


def blocking_pairs(lists, quotas, links):
    """Definition-level blocking-pair enumeration."""
    rank = rank_of(lists)
    n = len(lists)
    nbrs = [set() for _ in range(n)]
    for p, q in links:
        nbrs[p].add(q)
        nbrs[q].add(p)

    def wants(p, q):
        if len(nbrs[p]) < quotas[p]:
            return True
        worst = max(rank[p][x] for x in nbrs[p])
        return rank[p][q] < worst

    out = set()
    for p in range(n):
        for q in lists[p]:
            if p < q and q not in nbrs[p] and wants(p, q) and wants(q, p):
                out.add((p, q))
    return out


def stable_b_matchings(lists, quotas):
    """Every stable b-matching, by enumerating all edge subsets (tiny inputs only)."""
    n = len(lists)
    edges = sorted({(min(p, q), max(p, q)) for p in range(n) for q in lists[p]})
    found = []
    for r in range(len(edges) + 1):
        for subset in itertools.combinations(edges, r):
            deg = [0] * n
            for p, q in subset:
                deg[p] += 1
                deg[q] += 1
            if any(deg[p] > quotas[p] for p in range(n)):
                continue
            if not blocking_pairs(lists, quotas, subset):
                found.append(frozenset(subset))
    return found


def all_pairs_distances(n, links):
    """Floyd-Warshall hop distances."""
    d = [[0 if i == j else math.inf for j in range(n)] for i in range(n)]
    for p, q in links:
        d[p][q] = d[q][p] = 1
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == math.inf:
                continue
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def diameter(n, links):
    if n <= 1:
        return 0
    d = all_pairs_distances(n, links)
    return max(max(row) for row in d)


def pairwise_clustering(n, links):
    """P(x ~ y | x and y share a neighbor) over all unordered pairs."""
    adj = [[False] * n for _ in range(n)]
    for p, q in links:
        adj[p][q] = adj[q][p] = True
    shared = linked = 0
    for x in range(n):
        for y in range(x + 1, n):
            if any(adj[x][z] and adj[y][z] for z in range(n)):
                shared += 1
                linked += adj[x][y]
    return None if shared == 0 else linked / shared
