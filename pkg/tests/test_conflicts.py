"""Conflict management: coherency, lifecycle, brokering, detection, arbitration."""

import pytest

from helpers import BRONZE, GOLD, SILVER, node, pod, rv, state_with
from loopsim.agents import (
    ActionIntent,
    ActionKind,
    AgentRole,
    LifecycleState,
    LoopAgent,
    PodSpec,
    classify_size,
)
from loopsim.conflicts import (
    E2E,
    CoherencyBaseline,
    ConflictKind,
    ConflictManager,
    Denial,
    ExchangeRequest,
    Grant,
    ManagerConfig,
    Verdict,
    regional,
)
from loopsim.cluster import PriorityLevel
from loopsim.errors import NoGrant, UnknownRegion

REGIONS = {
    "edge-calgary": "calgary",
    "edge-waterloo": "waterloo",
    "core-toronto": "toronto",
}


def make_agent(aid, value=10, scope=("waterloo",), role=AgentRole.SCALER):
    scope = frozenset(scope)
    return LoopAgent(
        id=aid,
        role=role,
        scope=scope,
        size=classify_size(scope, REGIONS),
        priority=PriorityLevel(f"lvl-{aid}", value),
    )


def make_manager(*agents, **config):
    cfg = ManagerConfig(**config)
    byid = {a.id: a for a in agents}
    return ConflictManager(cfg, byid, sorted(set(REGIONS.values())))


def make_intent(acl, tick, kind, target="svc", iid=None, specs=(), pods=(),
                node_id=None, magnitude=1.0, vetted=False):
    return ActionIntent(
        intent_id=iid or f"{acl}-t{tick}-0",
        acl_id=acl,
        tick=tick,
        kind=kind,
        target=target,
        magnitude=magnitude,
        pod_specs=tuple(specs),
        pod_ids=tuple(pods),
        node_id=node_id,
        vetted=vetted,
    )


class TestCoherencyBaseline:
    def test_flat_history_flags_a_spike(self):
        baseline = CoherencyBaseline(window=50, min_history=10, epsilon=1e-6)
        for _ in range(20):
            assert baseline.check(2.0, 3.0) is Verdict.NORMAL
        assert baseline.check(10.0, 3.0) is Verdict.ANOMALOUS

    def test_magnitude_at_mean_is_normal(self):
        baseline = CoherencyBaseline(window=50, min_history=10, epsilon=1e-6)
        for value in (1.0, 2.0, 3.0) * 5:
            baseline.check(value, 3.0)
        assert baseline.check(2.0, 3.0) is Verdict.NORMAL

    def test_warm_up_is_always_normal(self):
        baseline = CoherencyBaseline(window=50, min_history=10, epsilon=1e-6)
        for value in (1.0, 500.0, -3.0, 9000.0):
            assert baseline.check(value, 3.0) is Verdict.NORMAL

    def test_verdict_sample_still_enters_history(self):
        baseline = CoherencyBaseline(window=50, min_history=1, epsilon=1e-6)
        baseline.check(2.0, 3.0)
        baseline.check(100.0, 3.0)
        assert baseline.history == [2.0, 100.0]

    def test_window_is_bounded(self):
        baseline = CoherencyBaseline(window=5, min_history=1, epsilon=1e-6)
        for i in range(9):
            baseline.check(float(i), 3.0)
        assert baseline.history == [4.0, 5.0, 6.0, 7.0, 8.0]


class TestLifecycle:
    def test_first_anomaly_puts_under_observation(self):
        agent = make_agent("a")
        mgr = make_manager(agent)
        change = mgr.update_lifecycle(agent, Verdict.ANOMALOUS)
        assert change == ("Active", "UnderObservation")
        assert agent.lifecycle is LifecycleState.UNDER_OBSERVATION

    def test_three_consecutive_anomalies_suspend(self):
        agent = make_agent("a")
        mgr = make_manager(agent)
        mgr.update_lifecycle(agent, Verdict.ANOMALOUS)
        assert mgr.update_lifecycle(agent, Verdict.ANOMALOUS) is None
        change = mgr.update_lifecycle(agent, Verdict.ANOMALOUS)
        assert change == ("UnderObservation", "Suspended")

    def test_normal_streak_reinstates(self):
        agent = make_agent("a")
        mgr = make_manager(agent, reinstate_after=5)
        mgr.update_lifecycle(agent, Verdict.ANOMALOUS)
        for _ in range(5):
            assert agent.lifecycle is LifecycleState.UNDER_OBSERVATION
            mgr.update_lifecycle(agent, Verdict.NORMAL)
        assert agent.lifecycle is LifecycleState.ACTIVE

    def test_anomaly_resets_the_normal_streak(self):
        agent = make_agent("a")
        mgr = make_manager(agent, reinstate_after=3)
        mgr.update_lifecycle(agent, Verdict.ANOMALOUS)
        mgr.update_lifecycle(agent, Verdict.NORMAL)
        mgr.update_lifecycle(agent, Verdict.NORMAL)
        mgr.update_lifecycle(agent, Verdict.ANOMALOUS)  # streak back to zero
        mgr.update_lifecycle(agent, Verdict.NORMAL)
        mgr.update_lifecycle(agent, Verdict.NORMAL)
        assert agent.lifecycle is LifecycleState.UNDER_OBSERVATION

    def test_suspension_is_absorbing_until_release(self):
        agent = make_agent("a")
        mgr = make_manager(agent)
        for _ in range(3):
            mgr.update_lifecycle(agent, Verdict.ANOMALOUS)
        assert agent.lifecycle is LifecycleState.SUSPENDED
        assert mgr.update_lifecycle(agent, Verdict.NORMAL) is None
        assert agent.lifecycle is LifecycleState.SUSPENDED
        assert mgr.release("a")
        assert agent.lifecycle is LifecycleState.ACTIVE
        assert not mgr.release("a")  # only suspended agents can be released

    def test_active_plus_normal_is_a_noop(self):
        agent = make_agent("a")
        mgr = make_manager(agent)
        assert mgr.update_lifecycle(agent, Verdict.NORMAL) is None
        assert agent.lifecycle is LifecycleState.ACTIVE


class TestBroker:
    def test_trusted_request_is_granted(self):
        ran, core = make_agent("ran"), make_agent("core", scope=("toronto",))
        mgr = make_manager(ran, core)
        mgr.trust = {"ran": {("core", "Model")}}
        result = mgr.broker_exchange(ExchangeRequest("ran", "core", "Model", 2))
        assert isinstance(result, Grant)
        assert result.accuracy_bonus == mgr.config.model_bonus
        assert mgr.consume_grant(result.artifact_id) is result

    def test_grants_are_single_use(self):
        ran, core = make_agent("ran"), make_agent("core", scope=("toronto",))
        mgr = make_manager(ran, core)
        mgr.trust = {"ran": {("core", "Model")}}
        grant = mgr.broker_exchange(ExchangeRequest("ran", "core", "Model", 2))
        mgr.consume_grant(grant.artifact_id)
        with pytest.raises(NoGrant):
            mgr.consume_grant(grant.artifact_id)

    def test_untrusted_target_is_denied(self):
        ran, core = make_agent("ran"), make_agent("core", scope=("toronto",))
        mgr = make_manager(ran, core)
        result = mgr.broker_exchange(ExchangeRequest("ran", "core", "Model", 2))
        assert result == Denial("ran", "core", "Model", "NotTrusted")

    def test_kind_mismatch_is_denied(self):
        ran, core = make_agent("ran"), make_agent("core", scope=("toronto",))
        mgr = make_manager(ran, core)
        mgr.trust = {"ran": {("core", "Dataset")}}
        result = mgr.broker_exchange(ExchangeRequest("ran", "core", "Model", 2))
        assert isinstance(result, Denial) and result.reason == "NotTrusted"

    def test_suspended_source_is_denied(self):
        ran, core = make_agent("ran"), make_agent("core", scope=("toronto",))
        ran.lifecycle = LifecycleState.SUSPENDED
        mgr = make_manager(ran, core)
        mgr.trust = {"ran": {("core", "Model")}}
        result = mgr.broker_exchange(ExchangeRequest("ran", "core", "Model", 2))
        assert isinstance(result, Denial) and result.reason == "SourceSuspended"

    def test_unknown_agent_is_denied(self):
        mgr = make_manager(make_agent("ran"))
        result = mgr.broker_exchange(ExchangeRequest("ran", "ghost", "Model", 2))
        assert isinstance(result, Denial) and result.reason == "UnknownAgent"

    def test_dataset_grant_carries_sample_count(self):
        ran = make_agent("ran", scope=("waterloo",))
        ran.span_ticks = 12
        core = make_agent("core", scope=("toronto",))
        mgr = make_manager(ran, core)
        mgr.trust = {"ran": {("core", "Dataset")}}
        grant = mgr.broker_exchange(ExchangeRequest("ran", "core", "Dataset", 2))
        assert grant.sample_count == 12
        assert grant.accuracy_bonus == 0.0


class TestRouting:
    def test_single_region_scopes_stay_regional(self):
        a, b = make_agent("a"), make_agent("b")
        mgr = make_manager(a, b)
        assert mgr.route(["a", "b"], REGIONS) == regional("waterloo")

    def test_mega_participant_escalates(self):
        a = make_agent("a")
        mega = make_agent("slice", scope=("e2e",))
        mgr = make_manager(a, mega)
        assert mgr.route(["a", "slice"], REGIONS) == E2E

    def test_cross_region_scopes_escalate(self):
        a = make_agent("a", scope=("waterloo",))
        b = make_agent("b", scope=("toronto",))
        mgr = make_manager(a, b)
        assert mgr.route(["a", "b"], REGIONS) == E2E

    def test_unknown_region_raises(self):
        a = make_agent("a")
        mgr = make_manager(a)
        mgr.regions = ["toronto"]  # waterloo no longer managed
        with pytest.raises(UnknownRegion):
            mgr.route(["a"], REGIONS)

    def test_e2e_tick_arithmetic(self):
        mgr = make_manager(make_agent("a"), e2e_period=5)
        assert mgr.next_e2e_tick(7) == 10
        assert mgr.next_e2e_tick(10) == 10
        assert mgr.is_e2e_tick(0) and mgr.is_e2e_tick(5)
        assert not mgr.is_e2e_tick(3)

    def test_submit_returns_check_tick(self):
        reg = make_agent("a")
        mega = make_agent("slice", scope=("e2e",))
        mgr = make_manager(reg, mega, e2e_period=5)
        regional_intent = make_intent("a", 7, ActionKind.SCALE_UP,
                                      specs=[PodSpec(rv(1, 1))])
        mega_intent = make_intent("slice", 7, ActionKind.INSTANTIATE,
                                  specs=[PodSpec(rv(1, 1))])
        assert mgr.submit(regional_intent, REGIONS) == 7
        assert mgr.submit(mega_intent, REGIONS) == 10


class TestDetection:
    def waterloo_state(self, *pods_with_binds):
        """One-node cluster so every placement claim lands on edge-waterloo."""
        pods = [p for p, _ in pods_with_binds]
        bound = [(p.id, n) for p, n in pods_with_binds if n]
        return state_with(
            [node("edge-waterloo", 2000, 4096, region="waterloo")], pods, bound
        )

    def test_two_claims_over_free_capacity_collide(self):
        a, b = make_agent("a"), make_agent("b", value=5)
        mgr = make_manager(a, b)
        state = self.waterloo_state()
        intents = [
            make_intent("a", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(1500, 3072))]),
            make_intent("b", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(1500, 3072))]),
        ]
        found = mgr.detect_resource_conflicts(0, intents, state, REGIONS)
        assert len(found) == 1
        record, implicated = found[0]
        assert record.kind is ConflictKind.RESOURCE_CONTENTION
        assert record.participants == ("a", "b")
        assert record.targets == ("edge-waterloo",)
        assert implicated == {i.intent_id for i in intents}

    def test_claims_that_fit_together_are_not_a_conflict(self):
        a, b = make_agent("a"), make_agent("b", value=5)
        mgr = make_manager(a, b)
        state = self.waterloo_state()
        intents = [
            make_intent("a", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(500, 1024))]),
            make_intent("b", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(500, 1024))]),
        ]
        assert mgr.detect_resource_conflicts(0, intents, state, REGIONS) == []

    def test_single_intent_is_never_a_conflict(self):
        a = make_agent("a")
        mgr = make_manager(a)
        state = self.waterloo_state()
        intents = [
            make_intent("a", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(1900, 4000))])
        ]
        assert mgr.detect_resource_conflicts(0, intents, state, REGIONS) == []

    def test_opposite_directions_on_one_node_collide(self):
        a, b = make_agent("a"), make_agent("b", value=5)
        mgr = make_manager(a, b)
        resident = pod("b-pod", 500, 1024, owner="b")
        state = self.waterloo_state((resident, "edge-waterloo"))
        intents = [
            make_intent("a", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(100, 128))]),
            make_intent("b", 0, ActionKind.SCALE_DOWN, pods=["b-pod"]),
        ]
        found = mgr.detect_resource_conflicts(0, intents, state, REGIONS)
        assert len(found) == 1
        assert found[0][0].participants == ("a", "b")

    def test_interference_needs_enough_toggles(self):
        a, b = make_agent("a", value=3), make_agent("b", value=7)
        mgr = make_manager(a, b, interference_window=10, toggle_threshold=3)
        # off(1), on(2): two toggles so far (node starts powered-on)
        mgr.note_execution(1, "a", "edge-waterloo", -1)
        mgr.note_execution(2, "b", "edge-waterloo", +1)
        assert mgr.detect_interference(2, [], REGIONS) == []
        pending = [
            make_intent("a", 3, ActionKind.POWER_OFF, target="edge-waterloo",
                        node_id="edge-waterloo")
        ]
        records = mgr.detect_interference(3, pending, REGIONS)
        assert len(records) == 1
        assert records[0].kind is ConflictKind.INTERFERENCE
        assert records[0].participants == ("a", "b")

    def test_monotone_actions_never_interfere(self):
        a, b = make_agent("a"), make_agent("b", value=5)
        mgr = make_manager(a, b, toggle_threshold=3)
        for t in range(6):
            mgr.note_execution(t, "a" if t % 2 else "b", "svc", +1)
        assert mgr.detect_interference(6, [], REGIONS) == []

    def test_single_actor_oscillation_is_not_interference(self):
        a = make_agent("a")
        mgr = make_manager(a, toggle_threshold=3)
        for t, direction in enumerate((+1, -1, +1, -1, +1, -1)):
            mgr.note_execution(t, "a", "svc", direction)
        assert mgr.detect_interference(6, [], REGIONS) == []

    def test_old_history_falls_out_of_the_window(self):
        a, b = make_agent("a", value=3), make_agent("b", value=7)
        mgr = make_manager(a, b, interference_window=3, toggle_threshold=3)
        mgr.note_execution(0, "a", "edge-waterloo", -1)
        mgr.note_execution(1, "b", "edge-waterloo", +1)
        mgr.note_execution(2, "a", "edge-waterloo", -1)
        # at tick 9 all of that is stale
        assert mgr.detect_interference(9, [], REGIONS) == []


class TestResolve:
    def test_contention_goes_to_highest_priority(self):
        a, b = make_agent("acl1", value=10), make_agent("acl2", value=5)
        mgr = make_manager(a, b)
        record = mgr._record(0, ConflictKind.RESOURCE_CONTENTION,
                             ["acl1", "acl2"], ["edge-waterloo"], REGIONS)
        resolved = mgr.resolve(record, 0)
        assert resolved.resolution.kind == "arbitrated"
        assert resolved.resolution.winner == "acl1"
        assert resolved.resolution.losers == ("acl2",)

    def test_equal_priorities_tie_break_lexicographically(self):
        a, b = make_agent("beta", value=5), make_agent("alfa", value=5)
        mgr = make_manager(a, b)
        record = mgr._record(0, ConflictKind.RESOURCE_CONTENTION,
                             ["alfa", "beta"], ["edge-waterloo"], REGIONS)
        assert mgr.resolve(record, 0).resolution.winner == "alfa"

    def test_interference_freezes_the_lowest_priority(self):
        energy = make_agent("energy", value=3, scope=("calgary",))
        balancer = make_agent("balancer", value=7, scope=("calgary",))
        mgr = make_manager(energy, balancer, freeze_cooldown=10)
        record = mgr._record(4, ConflictKind.INTERFERENCE,
                             ["balancer", "energy"], ["edge-calgary"], REGIONS)
        resolved = mgr.resolve(record, 4)
        assert resolved.resolution.kind == "frozen"
        assert resolved.resolution.frozen_acl == "energy"
        assert resolved.resolution.until_tick == 14
        assert mgr._frozen("energy", "edge-calgary", 13)
        assert not mgr._frozen("energy", "edge-calgary", 14)
        assert not mgr._frozen("balancer", "edge-calgary", 5)

    def test_scaling_priorities_preserves_the_winner(self):
        for factor in (1, 3, 100):
            a = make_agent("a", value=4 * factor)
            b = make_agent("b", value=9 * factor)
            mgr = make_manager(a, b)
            record = mgr._record(0, ConflictKind.RESOURCE_CONTENTION,
                                 ["a", "b"], ["edge-waterloo"], REGIONS)
            assert mgr.resolve(record, 0).resolution.winner == "b"


class TestProcessTick:
    def test_regional_contention_resolves_same_tick(self):
        a, b = make_agent("acl1", value=10), make_agent("acl2", value=5)
        mgr = make_manager(a, b)
        state = state_with([node("edge-waterloo", 2000, 4096, region="waterloo")])
        intents = [
            make_intent("acl1", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(1500, 3072))]),
            make_intent("acl2", 0, ActionKind.SCALE_UP, specs=[PodSpec(rv(1500, 3072))]),
        ]
        out = mgr.process_tick(0, intents, state, REGIONS)
        assert [r.kind for r in out.detected] == [ConflictKind.RESOURCE_CONTENTION]
        assert [r.resolution.winner for r in out.resolved] == ["acl1"]
        assert [i.acl_id for i in out.survivors] == ["acl1"]
        assert [i.acl_id for i in out.requeued] == ["acl2"]
        assert out.requeued[0].vetted  # skips re-vetting when it comes back

    def test_anomalous_magnitude_drops_the_intent(self):
        a = make_agent("acl1")
        mgr = make_manager(a, coherency_min_history=3)
        state = state_with([node("edge-waterloo", region="waterloo")])
        for t in range(4):
            out = mgr.process_tick(
                t, [make_intent("acl1", t, ActionKind.SCALE_UP, iid=f"i{t}",
                                specs=[PodSpec(rv(10, 10))], magnitude=5.0)],
                state, REGIONS,
            )
            assert not out.dropped
        out = mgr.process_tick(
            4, [make_intent("acl1", 4, ActionKind.SCALE_UP, iid="spike",
                            specs=[PodSpec(rv(10, 10))], magnitude=500.0)],
            state, REGIONS,
        )
        assert [(i.intent_id, reason) for i, reason in out.dropped] == [
            ("spike", "anomalous")
        ]
        assert a.lifecycle is LifecycleState.UNDER_OBSERVATION

    def test_vetted_intents_skip_coherency(self):
        a = make_agent("acl1")
        mgr = make_manager(a)
        state = state_with([node("edge-waterloo", region="waterloo")])
        intent = make_intent("acl1", 1, ActionKind.SCALE_UP, vetted=True,
                             specs=[PodSpec(rv(10, 10))], magnitude=9e9)
        out = mgr.process_tick(1, [intent], state, REGIONS)
        assert out.verdicts == []
        assert [i.intent_id for i in out.survivors] == [intent.intent_id]

    def test_frozen_agent_intents_are_dropped(self):
        energy = make_agent("energy", value=3, scope=("calgary",))
        balancer = make_agent("balancer", value=7, scope=("calgary",))
        mgr = make_manager(energy, balancer, freeze_cooldown=10)
        mgr.freezes[("energy", "edge-calgary")] = 12
        state = state_with([node("edge-calgary", region="calgary")])
        intent = make_intent("energy", 5, ActionKind.POWER_OFF,
                             target="edge-calgary", node_id="edge-calgary")
        out = mgr.process_tick(5, [intent], state, REGIONS)
        assert [(i.intent_id, r) for i, r in out.dropped] == [
            (intent.intent_id, "frozen")
        ]
        assert out.survivors == []

    def test_mega_conflicts_wait_for_the_e2e_tick(self):
        ran = make_agent("ran", value=10, scope=("waterloo",))
        slice_acl = make_agent("slice", value=20, scope=("e2e",),
                               role=AgentRole.SLICE)
        mgr = make_manager(ran, slice_acl, e2e_period=5)
        state = state_with([node("edge-waterloo", 2000, 4096, region="waterloo")])
        intents = [
            make_intent("ran", 7, ActionKind.SCALE_UP, specs=[PodSpec(rv(1500, 3072))]),
            make_intent("slice", 7, ActionKind.INSTANTIATE,
                        specs=[PodSpec(rv(1500, 3072))], vetted=True),
        ]
        out7 = mgr.process_tick(7, intents, state, REGIONS)
        assert [r.instance for r in out7.detected] == [E2E]
        assert out7.resolved == []          # buffered, not settled
        assert out7.survivors == []
        out8 = mgr.process_tick(8, [], state, REGIONS)
        assert out8.resolved == []
        out10 = mgr.process_tick(10, [], state, REGIONS)
        assert [r.resolution.winner for r in out10.resolved] == ["slice"]
        assert [i.acl_id for i in out10.survivors] == ["slice"]
        assert [i.acl_id for i in out10.requeued] == ["ran"]

    def test_unconflicted_mega_intents_are_buffered_to_period(self):
        slice_acl = make_agent("slice", value=20, scope=("e2e",), role=AgentRole.SLICE)
        mgr = make_manager(slice_acl, e2e_period=5)
        state = state_with([node("edge-waterloo", region="waterloo")])
        intent = make_intent("slice", 7, ActionKind.INSTANTIATE,
                             specs=[PodSpec(rv(10, 10))], vetted=True)
        out7 = mgr.process_tick(7, [intent], state, REGIONS)
        assert [i.intent_id for i in out7.buffered] == [intent.intent_id]
        assert out7.survivors == []
        out10 = mgr.process_tick(10, [], state, REGIONS)
        assert [i.intent_id for i in out10.survivors] == [intent.intent_id]
