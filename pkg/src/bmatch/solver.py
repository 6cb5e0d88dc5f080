"""Direct computation of the stable b-matching of an acyclic instance."""

from __future__ import annotations

import heapq

from .classify import _Residual, find_preference_cycle
from .dynamics import is_stable
from .errors import ContractError, CyclicInstanceError, StructuralError
from .prefcore import INF, Configuration, PreferenceInstance, QuotaVector, edge


def stable_configuration(L: PreferenceInstance, b: QuotaVector) -> Configuration:
    """The unique stable b-matching of acyclic ``L``.

    Repeatedly links a residual loving pair (mutual first choices among
    neighbors that still have quota and are not yet linked to each other).
    A peer whose residual quota reaches zero disappears from every list.
    When no loving pair is left the residual lists are empty, because an
    acyclic residual instance always has one.
    """
    if len(b) != L.n:
        raise StructuralError(f"quota vector has {len(b)} entries for {L.n} peers")
    cycle = find_preference_cycle(L)
    if cycle is not None:
        raise CyclicInstanceError(cycle)

    res = _Residual(L)
    left = [b[p] for p in range(L.n)]
    links = set()
    work: list[tuple[int, int]] = []

    def probe(x: int) -> None:
        y = res.loving_partner(x)
        if y is not None:
            heapq.heappush(work, edge(x, y))

    for p in range(L.n):
        probe(p)
    while work:
        a, c = heapq.heappop(work)
        if res.first(a) != c or res.first(c) != a:
            continue
        links.add((a, c))
        res.remove_pair(a, c)
        for x in (a, c):
            if left[x] != INF:
                left[x] -= 1
            if left[x] == 0:
                # everyone whose head pointed at x needs a fresh first choice
                watchers = res.remaining(x)
                res.dead[x] = True
                for w in watchers:
                    probe(w)
            else:
                probe(x)

    result = Configuration(frozenset(links))
    if any(res.first(p) is not None for p in range(L.n)):
        raise ContractError("residual lists left without a loving pair")
    if not is_stable(L, b, result):
        raise ContractError("solver produced an unstable configuration")
    return result


__all__ = ["stable_configuration"]
