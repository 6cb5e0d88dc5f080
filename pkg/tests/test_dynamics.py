import numpy as np
import pytest

from bmatch import (
    INF,
    ActivationPolicy,
    Configuration,
    ContractError,
    PreferenceInstance,
    QuotaVector,
    apply_pair,
    blocking_pairs,
    is_stable,
    preferences_from_marks,
    run_dynamics,
    stable_configuration,
)
from bmatch.dynamics import PolicyKind, replay_trace
from bmatch.generators import random_symmetric_marks

from . import oracles
from .test_classify import random_instance

POLICIES = [PolicyKind.UNIFORM, PolicyKind.ROUND_ROBIN, PolicyKind.SCHEDULE]


class TestBlockingPairs:
    def test_empty_configuration_blocks_everywhere(self, four_peer_instance):
        got = blocking_pairs(four_peer_instance, QuotaVector.uniform(4, 1), Configuration())
        assert got == set(four_peer_instance.acceptance().edges)

    def test_hand_example(self, global_k4, b1_k4):
        C = Configuration.of([(0, 2), (1, 3)])
        assert blocking_pairs(global_k4, b1_k4, C) == {(0, 1)}

    def test_stable_has_none(self, global_k4, b1_k4):
        C = Configuration.of([(0, 1), (2, 3)])
        assert blocking_pairs(global_k4, b1_k4, C) == set()

    def test_quota_violation_rejected(self, global_k4, b1_k4):
        with pytest.raises(ContractError):
            blocking_pairs(global_k4, b1_k4, Configuration.of([(0, 1), (0, 2)]))

    @pytest.mark.parametrize("seed", range(60))
    def test_matches_definition(self, seed):
        rng = np.random.default_rng(seed)
        n = 4 + seed % 5
        L = random_instance(n, seed)
        b = QuotaVector(tuple(int(x) for x in rng.integers(1, 3, size=n)))
        # random b-matching by greedy insertion of shuffled edges
        edges = sorted(L.acceptance().edges)
        rng.shuffle(edges)
        deg = [0] * n
        links = []
        for p, q in edges:
            if deg[p] < b[p] and deg[q] < b[q] and rng.random() < 0.6:
                links.append((p, q))
                deg[p] += 1
                deg[q] += 1
        C = Configuration.of(links)
        assert blocking_pairs(L, b, C) == oracles.blocking_pairs(L.lists, b.quotas, links)


class TestIsStable:
    def test_cases(self, global_k4, b1_k4):
        assert is_stable(global_k4, b1_k4, Configuration.of([(0, 1), (2, 3)]))
        assert not is_stable(global_k4, b1_k4, Configuration.of([(0, 2), (1, 3)]))
        assert is_stable(PreferenceInstance([]), QuotaVector(()), Configuration())


class TestApplyPair:
    def test_free_quota_drops_nothing(self, global_k4):
        C, rec = apply_pair(global_k4, QuotaVector.uniform(4, 2), Configuration(), (0, 1))
        assert rec.dropped == (None, None)
        assert C.links == {(0, 1)}

    def test_hand_simulation(self, global_k4, b1_k4):
        C0 = Configuration.of([(0, 2), (1, 3)])
        C, rec = apply_pair(global_k4, b1_k4, C0, (1, 0))
        assert rec.pair == (0, 1)
        assert rec.dropped == ((0, 2), (1, 3))
        assert rec.blocking_before == 1
        assert C.links == {(0, 1)}
        assert blocking_pairs(global_k4, b1_k4, C) == {(2, 3)}

    def test_non_blocking_rejected(self, global_k4, b1_k4):
        with pytest.raises(ContractError):
            apply_pair(global_k4, b1_k4, Configuration.of([(0, 1), (2, 3)]), (0, 2))

    def test_infinite_quota_only_adds(self):
        L = preferences_from_marks(random_symmetric_marks(7, 2))
        b = QuotaVector.uniform(7, INF)
        res = run_dynamics(L, b, policy=ActivationPolicy("uniform", 5))
        assert all(rec.dropped == (None, None) for rec in res.trace)
        assert res.configuration.links == L.acceptance().edges


class TestRunDynamics:
    def test_already_stable(self, global_k4, b1_k4):
        C0 = Configuration.of([(0, 1), (2, 3)])
        res = run_dynamics(global_k4, b1_k4, C0)
        assert res.steps == 0 and res.converged

    @pytest.mark.parametrize("kind", POLICIES)
    def test_k4_converges(self, global_k4, b1_k4, kind):
        res = run_dynamics(global_k4, b1_k4, None, ActivationPolicy(kind, 3))
        assert res.converged
        assert res.configuration.links == {(0, 1), (2, 3)}

    def test_seed_independence(self, global_k4, b1_k4):
        finals = {
            run_dynamics(global_k4, b1_k4, None, ActivationPolicy("uniform", s)).configuration
            for s in range(20)
        }
        assert finals == {stable_configuration(global_k4, b1_k4)}
        assert finals == {Configuration.of(c) for c in oracles.stable_b_matchings(
            global_k4.lists, b1_k4.quotas)}

    @pytest.mark.parametrize("seed", range(15))
    def test_trace_is_replayable(self, seed):
        rng = np.random.default_rng(seed)
        L = preferences_from_marks(random_symmetric_marks(12, seed))
        b = QuotaVector(tuple(int(x) for x in rng.integers(1, 4, size=12)))
        kind = POLICIES[seed % 3]
        res = run_dynamics(L, b, None, ActivationPolicy(kind, seed))
        assert replay_trace(L, b, Configuration(), res.trace) == res.configuration
        C = Configuration()
        for rec in res.trace:
            before = blocking_pairs(L, b, C)
            assert rec.pair in before
            C, _ = apply_pair(L, b, C, rec.pair)
            assert C.is_b_matching(b)
            p, q = rec.pair
            # each endpoint drops only links it likes less than the new partner
            for end, other, drop in ((p, q, rec.dropped[0]), (q, p, rec.dropped[1])):
                if drop is not None:
                    lost = drop[0] if drop[1] == end else drop[1]
                    assert L.rank[end, other] < L.rank[end, lost]

    def test_tampered_trace_detected(self, global_k4, b1_k4):
        res = run_dynamics(global_k4, b1_k4, None, ActivationPolicy("uniform", 0))
        bad = list(res.trace)
        bad[0] = type(bad[0])(0, bad[0].pair, bad[0].dropped, bad[0].blocking_before + 1)
        with pytest.raises(ContractError):
            replay_trace(global_k4, b1_k4, Configuration(), bad)

    def test_cyclic_needs_step_limit(self):
        L = preferences_from_marks(
            __import__("bmatch").MarkMatrix([[0, 4, 3], [3, 0, 4], [4, 3, 0]], "hi")
        )
        with pytest.raises(ContractError):
            run_dynamics(L, QuotaVector.uniform(3, 1), step_limit=0)
        res = run_dynamics(L, QuotaVector.uniform(3, 1), step_limit=30)
        # the 3-cycle with unit quotas never settles: some pair always blocks
        assert not res.converged and res.steps == 30
        assert res.step_limit == 30

    def test_default_limit_for_cyclic(self):
        L = preferences_from_marks(
            __import__("bmatch").MarkMatrix([[0, 4, 3], [3, 0, 4], [4, 3, 0]], "hi")
        )
        res = run_dynamics(L, QuotaVector.uniform(3, 1))
        assert res.step_limit == 50 * 9 and not res.converged

    def test_explicit_schedule(self, global_k4, b1_k4):
        policy = ActivationPolicy("schedule", schedule=((2, 3),))
        res = run_dynamics(global_k4, b1_k4, None, policy)
        # the schedule only knows one pair; the run stops unconverged after using it
        assert [r.pair for r in res.trace] == [(2, 3)]
        assert not res.converged

    def test_policy_aliases(self):
        assert ActivationPolicy("uniform-random-blocking-pair").kind is PolicyKind.UNIFORM
        assert ActivationPolicy("round-robin-peer").kind is PolicyKind.ROUND_ROBIN
        assert ActivationPolicy("fixed-schedule").kind is PolicyKind.SCHEDULE
