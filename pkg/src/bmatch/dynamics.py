"""Blocking pairs and the step-by-step evolution of configurations under quotas.

One step links a blocking pair ``{p, q}``; an endpoint already at quota
drops its single worst current link to make room. Which blocking pair fires
is decided by an :class:`ActivationPolicy`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classify import is_acyclic
from .errors import ContractError, StructuralError
from .prefcore import Configuration, Pair, PreferenceInstance, QuotaVector, edge


class PolicyKind(str, enum.Enum):
    UNIFORM = "uniform"
    ROUND_ROBIN = "round-robin"
    SCHEDULE = "schedule"

    @classmethod
    def parse(cls, text: str | PolicyKind) -> PolicyKind:
        if isinstance(text, PolicyKind):
            return text
        aliases = {
            "uniform": cls.UNIFORM,
            "uniform-random": cls.UNIFORM,
            "uniform-random-blocking-pair": cls.UNIFORM,
            "random": cls.UNIFORM,
            "round-robin": cls.ROUND_ROBIN,
            "round-robin-peer": cls.ROUND_ROBIN,
            "rr": cls.ROUND_ROBIN,
            "schedule": cls.SCHEDULE,
            "fixed-schedule": cls.SCHEDULE,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise StructuralError(f"unknown activation policy {text!r}") from None


@dataclass(frozen=True)
class ActivationPolicy:
    """How the next blocking pair is picked.

    * ``uniform``: uniformly among all current blocking pairs (PCG64 seeded
      with ``seed``).
    * ``round-robin``: peers take turns in a seeded random order; the peer
      on turn links with its favourite blocking partner. Peers with no
      blocking partner are skipped.
    * ``schedule``: cycle through ``schedule`` (default: a seeded shuffle
      of all acceptable pairs) and fire the next entry that is blocking. The
      run stops when a full pass finds nothing to fire.
    """

    kind: PolicyKind = PolicyKind.UNIFORM
    seed: int = 0
    schedule: tuple[Pair, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind.parse(self.kind))
        if self.schedule is not None:
            object.__setattr__(self, "schedule", tuple(edge(p, q) for p, q in self.schedule))


@dataclass(frozen=True)
class StepRecord:
    step: int
    pair: Pair
    dropped: tuple[Pair | None, Pair | None]
    blocking_before: int


@dataclass
class DynamicsResult:
    configuration: Configuration
    trace: list[StepRecord]
    converged: bool
    policy: ActivationPolicy
    step_limit: int

    @property
    def steps(self) -> int:
        return len(self.trace)


class _State:
    """Mutable configuration with vectorised blocking-pair evaluation."""

    def __init__(self, L: PreferenceInstance, b: QuotaVector, C: Configuration):
        n = L.n
        if len(b) != n:
            raise StructuralError(f"quota vector has {len(b)} entries for {n} peers")
        self.L = L
        self.rank = np.asarray(L.rank)
        self.acc = self.rank >= 0
        self.quota = b.as_array()
        self.links = np.zeros((n, n), dtype=bool)
        for p, q in C.links:
            if not L.accepts(p, q):
                raise StructuralError(f"link ({p}, {q}) is not in the acceptance graph")
            self.links[p, q] = self.links[q, p] = True
        self.deg = self.links.sum(axis=1)
        over = np.flatnonzero(self.deg > self.quota)
        if len(over):
            p = int(over[0])
            raise ContractError(f"configuration exceeds quota of peer {p} ({self.deg[p]} > {b[p]})")
        self.worst = np.where(self.links, self.rank, -1).max(axis=1) if n else np.zeros(0, int)

    def _refresh(self, p: int) -> None:
        row = self.links[p]
        self.worst[p] = self.rank[p, row].max() if row.any() else -1

    def blocking_matrix(self) -> np.ndarray:
        """Symmetric boolean matrix of blocking pairs."""
        free = self.deg < self.quota
        willing = self.acc & (free[:, None] | (self.rank < self.worst[:, None]))
        return willing & willing.T & ~self.links

    def blocking_list(self) -> list[Pair]:
        ii, jj = np.nonzero(np.triu(self.blocking_matrix(), 1))
        return list(zip(ii.tolist(), jj.tolist()))

    def is_blocking(self, p: int, q: int) -> bool:
        if p == q or not self.acc[p, q] or self.links[p, q]:
            return False
        return self._wants(p, q) and self._wants(q, p)

    def _wants(self, p: int, q: int) -> bool:
        return bool(self.deg[p] < self.quota[p] or self.rank[p, q] < self.worst[p])

    def _drop_worst(self, p: int) -> Pair | None:
        if self.deg[p] < self.quota[p]:
            return None
        w = int(np.flatnonzero(self.links[p] & (self.rank[p] == self.worst[p]))[0])
        self.links[p, w] = self.links[w, p] = False
        self.deg[p] -= 1
        self.deg[w] -= 1
        self._refresh(p)
        self._refresh(w)
        return edge(p, w)

    def apply(self, p: int, q: int) -> tuple[Pair | None, Pair | None]:
        p, q = edge(p, q)
        if not self.is_blocking(p, q):
            raise ContractError(f"pair ({p}, {q}) is not blocking")
        dp = self._drop_worst(p)
        dq = self._drop_worst(q)
        self.links[p, q] = self.links[q, p] = True
        self.deg[p] += 1
        self.deg[q] += 1
        self._refresh(p)
        self._refresh(q)
        return dp, dq

    def configuration(self) -> Configuration:
        ii, jj = np.nonzero(np.triu(self.links, 1))
        return Configuration(frozenset(zip(ii.tolist(), jj.tolist())))


def blocking_pairs(L: PreferenceInstance, b: QuotaVector, C: Configuration) -> set[Pair]:
    """Unlinked acceptable pairs where both sides gain by linking.

    A side gains if it has spare quota or ranks the other above its worst
    current link.
    """
    return set(_State(L, b, C).blocking_list())


def is_stable(L: PreferenceInstance, b: QuotaVector, C: Configuration) -> bool:
    return not _State(L, b, C).blocking_matrix().any()


def apply_pair(
    L: PreferenceInstance, b: QuotaVector, C: Configuration, pair: Sequence[int]
) -> tuple[Configuration, StepRecord]:
    state = _State(L, b, C)
    count = int(np.triu(state.blocking_matrix(), 1).sum())
    p, q = edge(*pair)
    dropped = state.apply(p, q)
    return state.configuration(), StepRecord(0, (p, q), dropped, count)


class _Selector:
    def __init__(self, policy: ActivationPolicy, L: PreferenceInstance):
        self.policy = policy
        self.rng = np.random.Generator(np.random.PCG64(policy.seed))
        self.cursor = 0
        if policy.kind is PolicyKind.ROUND_ROBIN:
            self.order = self.rng.permutation(L.n).tolist()
        elif policy.kind is PolicyKind.SCHEDULE:
            if policy.schedule is not None:
                self.order = list(policy.schedule)
            else:
                pairs = sorted(L.acceptance().edges)
                perm = self.rng.permutation(len(pairs))
                self.order = [pairs[i] for i in perm]

    def choose(self, state: _State, B: np.ndarray) -> Pair | None:
        kind = self.policy.kind
        if kind is PolicyKind.UNIFORM:
            ii, jj = np.nonzero(np.triu(B, 1))
            if len(ii) == 0:
                return None
            k = int(self.rng.integers(len(ii)))
            return int(ii[k]), int(jj[k])
        if kind is PolicyKind.ROUND_ROBIN:
            m = len(self.order)
            for off in range(m):
                p = self.order[(self.cursor + off) % m]
                row = B[p]
                if row.any():
                    cands = np.flatnonzero(row)
                    q = int(cands[np.argmin(state.rank[p, cands])])
                    self.cursor = (self.cursor + off + 1) % m
                    return edge(p, q)
            return None
        m = len(self.order)
        for off in range(m):
            p, q = self.order[(self.cursor + off) % m]
            if B[p, q]:
                self.cursor = (self.cursor + off + 1) % m
                return p, q
        return None


def default_step_limit(n: int) -> int:
    return 50 * n * n


def run_dynamics(
    L: PreferenceInstance,
    b: QuotaVector,
    C0: Configuration | None = None,
    policy: ActivationPolicy | None = None,
    step_limit: int | None = None,
) -> DynamicsResult:
    """Fire blocking pairs chosen by ``policy`` until none is left.

    ``step_limit=0`` means unbounded and is only accepted for acyclic
    instances. ``None`` picks unbounded for acyclic instances and
    ``50 * n**2`` otherwise. Hitting the limit is not an error; the result
    then has ``converged=False``.
    """
    policy = policy or ActivationPolicy()
    C0 = C0 if C0 is not None else Configuration()
    if step_limit is None:
        step_limit = 0 if is_acyclic(L) else default_step_limit(L.n)
    elif step_limit < 0:
        raise ContractError("step_limit must be >= 0")
    elif step_limit == 0 and not is_acyclic(L):
        raise ContractError("unbounded dynamics requested on a cyclic instance")
    state = _State(L, b, C0)
    selector = _Selector(policy, L)
    trace: list[StepRecord] = []
    converged = False
    while True:
        B = state.blocking_matrix()
        count = int(np.count_nonzero(B)) // 2
        if count == 0:
            converged = True
            break
        if step_limit and len(trace) >= step_limit:
            break
        pair = selector.choose(state, B)
        if pair is None:
            break
        dropped = state.apply(*pair)
        trace.append(StepRecord(len(trace), edge(*pair), dropped, count))
    return DynamicsResult(state.configuration(), trace, converged, policy, step_limit)


def replay_trace(
    L: PreferenceInstance,
    b: QuotaVector,
    C0: Configuration,
    trace: Sequence[StepRecord],
) -> Configuration:
    """Re-execute ``trace`` from ``C0``, checking every record; returns the end state.

    Raises :class:`ContractError` if a recorded pair was not blocking, a drop
    differs from the worst-link rule, or the blocking count disagrees.
    """
    state = _State(L, b, C0)
    for rec in trace:
        count = int(np.count_nonzero(state.blocking_matrix())) // 2
        if count != rec.blocking_before:
            raise ContractError(f"step {rec.step}: blocking count {count} != {rec.blocking_before}")
        dropped = state.apply(*rec.pair)
        if dropped != tuple(rec.dropped):
            raise ContractError(f"step {rec.step}: dropped {dropped}, trace says {rec.dropped}")
    return state.configuration()


__all__ = [
    "PolicyKind",
    "ActivationPolicy",
    "StepRecord",
    "DynamicsResult",
    "blocking_pairs",
    "is_stable",
    "apply_pair",
    "run_dynamics",
    "replay_trace",
    "default_step_limit",
]
