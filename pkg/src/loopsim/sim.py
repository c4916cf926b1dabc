"""Simulation loop: wires traffic, agents, the conflict manager, and the
scheduler into a deterministic tick.

Tick phases, in order:

1. sample demand per region, apply injected events,
2. each agent (sorted by id, skipping suspended ones and off-period ticks)
   monitors, analyzes, and plans,
3. intents are submitted to the conflict manager,
4. the manager runs its pipeline (coherency, freezes, interference,
   contention, routing/buffering),
5. surviving intents materialize (pods enqueue, terminations, power taints),
6. one scheduling round runs (NoExecute enforcement, binds, preemptions),
7. bookkeeping: utilization, idle streaks, conservation checks.

Running the same scenario twice yields byte-identical traces.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from . import agents as agents_mod
from . import cluster, scenario as scenario_mod, scheduler
from .agents import (
    ActionIntent,
    ActionKind,
    LifecycleState,
    PlanContext,
    SliceRequest,
)
from .cluster import POWERED_OFF_KEY, Pod, PodPhase, Taint, TaintEffect
from .conflicts import ConflictManager, ExchangeRequest, Grant
from .errors import HashMismatch, ValidationError
from .scenario import Scenario
from .trace import TRACE_FORMAT, Trace


@dataclass
class Metrics:
    ticks: int = 0
    pods_created: int = 0
    pods_terminated: int = 0
    bindings: int = 0
    reschedules: int = 0
    preemptions: int = 0
    evictions: Counter = field(default_factory=Counter)       # cause -> n
    intents_submitted: int = 0
    intents_applied: int = 0
    intents_requeued: int = 0
    intents_dropped: Counter = field(default_factory=Counter)  # reason -> n
    conflicts: Counter = field(default_factory=Counter)        # kind -> n
    grants: int = 0
    denials: Counter = field(default_factory=Counter)          # reason -> n
    verdicts: Counter = field(default_factory=Counter)         # verdict -> n
    pending_decisions: Counter = field(default_factory=Counter)  # pod -> n
    utilization: dict[str, list[float]] = field(default_factory=dict)
    predictions: dict[str, list[tuple[int, float, float]]] = field(default_factory=dict)

    def mae(self, acl: str) -> float:
        points = self.predictions.get(acl, [])
        if not points:
            return 0.0
        return sum(abs(p - t) for _, p, t in points) / len(points)


class World:
    def __init__(self, scn: Scenario, extra_events: list[dict] | None = None):
        norm = scn.data
        self.scenario = scn
        self.state, self.node_regions = scenario_mod.build_state(norm)
        self.agents = scenario_mod.build_agents(norm)
        self.units = scenario_mod.build_units(norm, self.agents)
        self.manager = ConflictManager(
            scenario_mod.build_manager_config(norm),
            self.agents,
            cluster.regions(self.state),
        )
        self.manager.trust = scenario_mod.build_trust(norm)
        self.traffic = scenario_mod.build_traffic(norm)
        self.extra_events = list(extra_events or [])
        if self.extra_events:
            roles = {a.id: a.role.value for a in self.agents.values()}
            self.extra_events = scenario_mod.normalize_events(
                self.extra_events, set(self.state.nodes), roles, label="events"
            )
        self.injected: dict[int, list[dict]] = {}
        for event in list(norm["injected"]) + self.extra_events:
            self.injected.setdefault(event["tick"], []).append(event)
        header = {
            "format": TRACE_FORMAT,
            "scenario": scn.name,
            "scenario_hash": scn.hash,
            "seed": scn.seed,
            "ticks": scn.ticks,
            "extra_events": self.extra_events,
            "initial": [
                {"pod": p["id"], "node": p["node"]} for p in norm["initial_pods"]
            ],
        }
        self.trace = Trace(header)
        self.metrics = Metrics()
        self.tick = 0
        self._seq = 0
        self.idle_streaks: dict[str, int] = {n: 0 for n in self.state.nodes}
        self.pending_slices: list[SliceRequest] = []
        self._slice_seq = 0
        self.requeued: dict[int, list[ActionIntent]] = {}
        self._ever_evicted: set[str] = set()

    # -- helpers ---------------------------------------------------------

    def emit(self, kind: str, **payload) -> None:
        event = {"seq": self._seq, "tick": self.tick, "kind": kind}
        event.update(payload)
        self.trace.events.append(event)
        self._seq += 1

    def powered_off(self) -> frozenset[str]:
        return frozenset(
            n.id
            for n in self.state.nodes.values()
            if any(t.key == POWERED_OFF_KEY for t in n.taints)
        )

    def _set_receipt(self, intent: ActionIntent, status: str) -> None:
        receipt = self.agents[intent.acl_id].receipts.get(intent.intent_id)
        if receipt is not None:
            receipt.status = status

    # -- tick phases ------------------------------------------------------

    def _phase_traffic_and_events(self) -> None:
        t = self.tick
        for region in sorted(self.traffic.profiles):
            value = self.traffic.sample(region, t)
            self.emit("traffic", region=region, value=value)
        for event in self.injected.get(t, []):
            kind = event["kind"]
            if kind == "taint":
                taint = Taint(event["key"], TaintEffect(event["effect"]))
                self.state = cluster.apply_taint(self.state, event["node"], taint)
                self.emit("taint-applied", node=event["node"], key=taint.key,
                          effect=taint.effect.value)
            elif kind == "remove-taint":
                effect = TaintEffect(event["effect"]) if event.get("effect") else None
                self.state = cluster.remove_taint(self.state, event["node"], event["key"], effect)
                self.emit("taint-removed", node=event["node"], key=event["key"])
            elif kind == "slice-request":
                request = SliceRequest(
                    id=f"slice-req-{self._slice_seq}",
                    agent_id=event["agent"],
                    tick=t,
                    chain=scenario_mod.chain_specs(event),
                )
                self._slice_seq += 1
                self.pending_slices.append(request)
                self.emit("slice-requested", id=request.id, agent=request.agent_id,
                          links=len(request.chain))
            elif kind == "exchange-request":
                request = ExchangeRequest(event["source"], event["target"],
                                          event["artifact"], t)
                result = self.manager.broker_exchange(request)
                if isinstance(result, Grant):
                    self.metrics.grants += 1
                    self.emit("exchange-granted", artifact=result.artifact_id,
                              source=result.source, target=result.target,
                              artifact_kind=result.kind)
                    grant = self.manager.consume_grant(result.artifact_id)
                    agents_mod.absorb_knowledge(self.agents[grant.target], grant)
                    self.emit("knowledge-absorbed", acl=grant.target,
                              artifact=grant.artifact_id, artifact_kind=grant.kind)
                else:
                    self.metrics.denials[result.reason] += 1
                    self.emit("exchange-denied", source=result.source,
                              target=result.target, artifact_kind=result.kind,
                              reason=result.reason)
            else:  # release
                if self.manager.release(event["acl"]):
                    self.emit("agent-released", acl=event["acl"])

    def _phase_agents(self) -> list[tuple[str, list[ActionIntent]]]:
        t = self.tick
        planned: list[tuple[str, list[ActionIntent]]] = []
        for acl in sorted(self.agents):
            agent = self.agents[acl]
            if agent.lifecycle is LifecycleState.SUSPENDED:
                continue
            if t % agent.period != 0:
                continue
            regions = agents_mod.scope_regions(agent.scope, self.node_regions)

            def demand(tt: int, rs=tuple(regions)) -> float:
                return sum(self.traffic.sample(r, tt) for r in rs)

            window = agents_mod.monitor(agent, demand, t)
            truth = sum(self.traffic.truth(r, t) for r in regions)
            prediction, agent.predictor = agents_mod.analyze(
                window, agent.predictor, ground_truth=truth
            )
            self.emit("prediction", acl=acl, value=prediction, truth=truth)
            self.metrics.predictions.setdefault(acl, []).append((t, prediction, truth))

            scope_nodes = tuple(
                n for r in regions for n in cluster.nodes_in_region(self.state, r)
            )
            my_slices = tuple(
                s for s in self.pending_slices if s.agent_id == acl and s.tick <= t
            )
            ctx = PlanContext(
                tick=t,
                state=self.state,
                scope_nodes=scope_nodes,
                idle_streaks=self.idle_streaks,
                powered_off=self.powered_off(),
                outstanding_targets=agents_mod.outstanding_targets(agent),
                slice_requests=my_slices,
            )
            intents = agents_mod.plan(agent, prediction, ctx)
            if my_slices and intents:
                consumed = {s.id for s in my_slices}
                self.pending_slices = [
                    s for s in self.pending_slices if s.id not in consumed
                ]
            for intent in intents:
                if intent.kind in (ActionKind.SCALE_UP, ActionKind.SCALE_DOWN):
                    agent.last_scale_tick = t
                    agent.last_scale_direction = intent.direction
            if intents:
                planned.append((acl, intents))
        return planned

    def _phase_submit(self, planned: list[tuple[str, list[ActionIntent]]]) -> list[ActionIntent]:
        submitted: list[ActionIntent] = []
        for acl, intents in planned:
            receipts = agents_mod.execute(
                self.agents[acl], intents,
                lambda i: self.manager.submit(i, self.node_regions),
            )
            for intent, receipt in zip(intents, receipts):
                self.metrics.intents_submitted += 1
                self.emit("intent-submitted", id=intent.intent_id, acl=acl,
                          action=intent.kind.value, target=intent.target,
                          magnitude=intent.magnitude, check_tick=receipt.check_tick)
            submitted.extend(intents)
        return submitted

    def _phase_manager(self, submitted: list[ActionIntent]):
        t = self.tick
        pool = self.requeued.pop(t, []) + submitted
        outcome = self.manager.process_tick(t, pool, self.state, self.node_regions)
        for acl, magnitude, verdict in outcome.verdicts:
            self.metrics.verdicts[verdict.value] += 1
            self.emit("coherency", acl=acl, magnitude=magnitude, verdict=verdict.value)
        for acl, old, new in outcome.lifecycle_changes:
            self.emit("lifecycle", acl=acl, before=old, after=new)
        for record in outcome.detected:
            self.metrics.conflicts[record.kind.value] += 1
            self.emit("conflict-detected", id=record.conflict_id,
                      conflict=record.kind.value,
                      participants=list(record.participants),
                      targets=list(record.targets), instance=record.instance)
        for record in outcome.resolved:
            res = record.resolution
            payload = {"id": record.conflict_id, "conflict": record.kind.value,
                       "instance": record.instance, "detected_tick": record.tick,
                       "outcome": res.kind}
            if res.kind == "arbitrated":
                payload["winner"] = res.winner
                payload["losers"] = list(res.losers)
            else:
                payload["frozen"] = res.frozen_acl
                payload["until"] = res.until_tick
            self.emit("conflict-resolved", **payload)
        for intent, reason in outcome.dropped:
            self._set_receipt(intent, "dropped")
            self.metrics.intents_dropped[reason] += 1
            self.emit("intent-dropped", id=intent.intent_id, acl=intent.acl_id,
                      reason=reason)
        for intent in outcome.requeued:
            self._set_receipt(intent, "requeued")
            self.metrics.intents_requeued += 1
            self.requeued.setdefault(t + 1, []).append(intent)
            self.emit("intent-requeued", id=intent.intent_id, acl=intent.acl_id,
                      next_tick=t + 1)
        for intent in outcome.buffered:
            self.emit("intent-buffered", id=intent.intent_id, acl=intent.acl_id,
                      until=self.manager.next_e2e_tick(t))
        return outcome

    def _phase_materialize(self, survivors: list[ActionIntent]) -> None:
        t = self.tick
        for intent in sorted(survivors, key=lambda i: (i.acl_id, i.intent_id)):
            agent = self.agents[intent.acl_id]
            if intent.kind in (ActionKind.SCALE_UP, ActionKind.INSTANTIATE):
                for spec in intent.pod_specs:
                    pod_id = f"{agent.id}-pod-{agent.pod_seq}"
                    agent.pod_seq += 1
                    pod = Pod(
                        id=pod_id,
                        owner=agent.id,
                        request=spec.request,
                        tolerations=spec.tolerations,
                        priority=agent.priority,
                    )
                    self.state = cluster.add_pod(self.state, pod)
                    self.units[agent.id].queue.append(pod_id)
                    self.metrics.pods_created += 1
                    self.emit("pod-created", pod=pod_id, acl=agent.id,
                              cpu=spec.request.cpu_millicores,
                              memory=spec.request.memory_mib,
                              priority=agent.priority.value)
            elif intent.kind in (ActionKind.SCALE_DOWN, ActionKind.TERMINATE):
                for pod_id in intent.pod_ids:
                    pod = self.state.pods.get(pod_id)
                    if pod is None or pod.phase is PodPhase.TERMINATED:
                        continue
                    self.state = cluster.terminate(self.state, pod_id)
                    self.metrics.pods_terminated += 1
                    self.emit("pod-terminated", pod=pod_id, acl=intent.acl_id)
            elif intent.kind is ActionKind.POWER_OFF:
                taint = Taint(POWERED_OFF_KEY, TaintEffect.NO_SCHEDULE)
                self.state = cluster.apply_taint(self.state, intent.node_id, taint)
                self.emit("power-off", node=intent.node_id, acl=intent.acl_id)
            else:  # POWER_ON
                self.state = cluster.remove_taint(self.state, intent.node_id, POWERED_OFF_KEY)
                self.emit("power-on", node=intent.node_id, acl=intent.acl_id)
            self.manager.note_execution(t, intent.acl_id, intent.target, intent.direction)
            self._set_receipt(intent, "materialized")
            self.metrics.intents_applied += 1
            self.emit("intent-applied", id=intent.intent_id, acl=intent.acl_id)

    def _phase_schedule(self) -> None:
        ordered = [self.units[a] for a in sorted(self.units)]
        result = scheduler.coordinate(self.state, ordered)
        self.state = result.state
        for node_id, pod_id in result.taint_evictions:
            self._ever_evicted.add(pod_id)
            self.metrics.evictions["no-execute"] += 1
            self.emit("pod-evicted", pod=pod_id, node=node_id, cause="no-execute")
        for decision in result.decisions:
            if decision.kind is scheduler.DecisionKind.BOUND:
                self.metrics.bindings += 1
                if decision.pod_id in self._ever_evicted:
                    self.metrics.reschedules += 1
                self.emit("pod-bound", pod=decision.pod_id, node=decision.node_id)
            elif decision.kind is scheduler.DecisionKind.PREEMPT:
                for victim in decision.victims:
                    self._ever_evicted.add(victim)
                    self.metrics.evictions["preempted"] += 1
                    self.emit("pod-evicted", pod=victim, node=decision.node_id,
                              cause="preempted")
                self.metrics.bindings += 1
                self.metrics.preemptions += 1
                if decision.pod_id in self._ever_evicted:
                    self.metrics.reschedules += 1
                self.emit("pod-bound", pod=decision.pod_id, node=decision.node_id,
                          preempted=list(decision.victims))
            else:
                self.metrics.pending_decisions[decision.pod_id] += 1
                self.emit("pod-pending", pod=decision.pod_id, reason=decision.reason)
        self.units = {u.acl_id: u for u in result.units}

    def _phase_bookkeeping(self) -> None:
        counts = Counter(p.phase for p in self.state.pods.values())
        assert counts[PodPhase.EVICTED] == 0, "evicted pod left undecided"
        assert len(self.state.pods) == (
            counts[PodPhase.PENDING] + counts[PodPhase.BOUND] + counts[PodPhase.TERMINATED]
        )
        off = self.powered_off()
        for node_id in sorted(self.state.nodes):
            used = cluster.used_capacity(self.state, node_id)
            capacity = self.state.nodes[node_id].capacity
            assert capacity.covers(used), f"over-committed node {node_id}"
            self.metrics.utilization.setdefault(node_id, []).append(
                used.cpu_millicores / capacity.cpu_millicores
            )
            if node_id not in off and not cluster.pods_on(self.state, node_id):
                self.idle_streaks[node_id] = self.idle_streaks.get(node_id, 0) + 1
            else:
                self.idle_streaks[node_id] = 0
        self.emit("tick-end",
                  bound=counts[PodPhase.BOUND],
                  pending=counts[PodPhase.PENDING],
                  terminated=counts[PodPhase.TERMINATED],
                  pods=len(self.state.pods))
        self.metrics.ticks += 1

    def step(self) -> None:
        self._phase_traffic_and_events()
        planned = self._phase_agents()
        submitted = self._phase_submit(planned)
        outcome = self._phase_manager(submitted)
        self._phase_materialize(outcome.survivors)
        self._phase_schedule()
        self._phase_bookkeeping()
        self.tick += 1


def run(scn: Scenario, extra_events: list[dict] | None = None) -> tuple[Trace, Metrics, World]:
    world = World(scn, extra_events)
    for _ in range(scn.ticks):
        world.step()
    return world.trace, world.metrics, world


# -- verification ---------------------------------------------------------------

# event kinds by tick phase; within one tick the phase may never go backwards
_PHASE_RANK = {
    "traffic": 1, "taint-applied": 1, "taint-removed": 1, "slice-requested": 1,
    "exchange-granted": 1, "exchange-denied": 1, "knowledge-absorbed": 1,
    "agent-released": 1,
    "prediction": 2,
    "intent-submitted": 3,
    "coherency": 4, "lifecycle": 4, "conflict-detected": 4, "conflict-resolved": 4,
    "intent-dropped": 4, "intent-requeued": 4, "intent-buffered": 4,
    "pod-created": 5, "pod-terminated": 5, "power-off": 5, "power-on": 5,
    "intent-applied": 5,
    "pod-evicted": 6, "pod-bound": 6, "pod-pending": 6,
    "tick-end": 7,
}


@dataclass
class Report:
    hash_ok: bool = True
    divergences: list[dict] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.hash_ok and not self.divergences and not self.violations

    def describe(self) -> str:
        if self.ok:
            return "trace verified: replay identical, all invariants hold"
        parts = []
        if not self.hash_ok:
            parts.append("scenario hash mismatch")
        if self.divergences:
            parts.append(f"{len(self.divergences)} diverging line(s)")
            for d in self.divergences[:5]:
                parts.append(f"  line {d['line']}: expected {d['expected']!r}")
                parts.append(f"  line {d['line']}:      got {d['actual']!r}")
        for v in self.violations:
            parts.append(f"invariant violated: {v}")
        return "\n".join(parts)


def check_invariants(norm: dict, events: list[dict]) -> list[str]:
    """Re-derive safety properties from scenario config and the event stream.

    Independent of the engine: placements, priorities, and capacities are
    reconstructed from events alone and checked against the declared topology.
    """
    violations: list[str] = []
    capacity = {n["id"]: (n["cpu"], n["memory"]) for n in norm["nodes"]}
    level_values = {l["name"]: l["value"] for l in norm["priority_levels"]}
    requests: dict[str, tuple[int, int]] = {}
    priority: dict[str, int] = {}
    bound: dict[str, str] = {}
    terminated: set[str] = set()
    for pod in norm["initial_pods"]:
        requests[pod["id"]] = (pod["cpu"], pod["memory"])
        priority[pod["id"]] = level_values[pod["priority"]]
        bound[pod["id"]] = pod["node"]

    def node_usage(node_id: str) -> tuple[int, int]:
        cpu = sum(requests[p][0] for p, n in bound.items() if n == node_id)
        mem = sum(requests[p][1] for p, n in bound.items() if n == node_id)
        return cpu, mem

    last_tick = -1
    last_rank = 0
    evicted_this_tick: dict[str, int] = {}
    for event in events:
        tick, kind, seq = event["tick"], event["kind"], event["seq"]
        rank = _PHASE_RANK.get(kind)
        if rank is None:
            violations.append(f"seq {seq}: unknown event kind {kind!r}")
            continue
        if tick != last_tick:
            if tick < last_tick:
                violations.append(f"seq {seq}: tick went backwards")
            for pod_id, at in evicted_this_tick.items():
                violations.append(
                    f"tick {at}: evicted pod {pod_id!r} got no follow-up decision"
                )
            evicted_this_tick = {}
            last_tick, last_rank = tick, 0
        if rank < last_rank:
            violations.append(
                f"seq {seq}: {kind} out of phase order (rank {rank} after {last_rank})"
            )
        last_rank = max(last_rank, rank)

        if kind == "pod-created":
            requests[event["pod"]] = (event["cpu"], event["memory"])
            priority[event["pod"]] = event["priority"]
        elif kind == "pod-bound":
            pod_id = event["pod"]
            if pod_id not in requests:
                violations.append(f"seq {seq}: bound unknown pod {pod_id!r}")
                continue
            for victim in event.get("preempted", []):
                if priority.get(victim, 0) >= priority.get(pod_id, 0):
                    violations.append(
                        f"seq {seq}: preemption victim {victim!r} does not have "
                        f"lower priority than {pod_id!r}"
                    )
            bound[pod_id] = event["node"]
            evicted_this_tick.pop(pod_id, None)
            cpu, mem = node_usage(event["node"])
            cap = capacity[event["node"]]
            if cpu > cap[0] or mem > cap[1]:
                violations.append(
                    f"seq {seq}: node {event['node']!r} over capacity after binding "
                    f"{pod_id!r} ({cpu}/{cap[0]} cpu, {mem}/{cap[1]} memory)"
                )
        elif kind == "pod-evicted":
            pod_id = event["pod"]
            if bound.pop(pod_id, None) is None:
                violations.append(f"seq {seq}: evicted pod {pod_id!r} was not bound")
            evicted_this_tick[pod_id] = tick
        elif kind == "pod-pending":
            evicted_this_tick.pop(event["pod"], None)
        elif kind == "pod-terminated":
            pod_id = event["pod"]
            bound.pop(pod_id, None)
            terminated.add(pod_id)
            evicted_this_tick.pop(pod_id, None)
        elif kind == "tick-end":
            known = set(requests)
            expect_bound = len(bound)
            expect_terminated = len(terminated)
            expect_pending = len(known) - expect_bound - expect_terminated
            if event["bound"] != expect_bound or event["terminated"] != expect_terminated \
                    or event["pending"] != expect_pending or event["pods"] != len(known):
                violations.append(
                    f"seq {seq}: conservation mismatch at tick {tick} "
                    f"(trace says bound={event['bound']} pending={event['pending']} "
                    f"terminated={event['terminated']}, replayed "
                    f"bound={expect_bound} pending={expect_pending} "
                    f"terminated={expect_terminated})"
                )
    for pod_id, at in evicted_this_tick.items():
        violations.append(f"tick {at}: evicted pod {pod_id!r} got no follow-up decision")
    return violations


def verify_trace(trace: Trace, scn: Scenario) -> Report:
    """Replay the scenario named by the trace header and compare byte-for-byte,
    then re-check invariants from the recorded events alone."""
    header = trace.header
    if header.get("scenario_hash") != scn.hash:
        effective = scenario_mod.from_dict(
            scn.data, seed=header.get("seed"), ticks=header.get("ticks")
        )
        if header.get("scenario_hash") != effective.hash:
            raise HashMismatch(effective.hash, header.get("scenario_hash", ""))
        scn = effective
    replay, _, _ = run(scn, extra_events=header.get("extra_events") or [])
    report = Report()
    original = trace.lines()
    replayed = replay.lines()
    for i in range(max(len(original), len(replayed))):
        left = original[i] if i < len(original) else "<missing>"
        right = replayed[i] if i < len(replayed) else "<missing>"
        if left != right:
            report.divergences.append({"line": i + 1, "actual": left, "expected": right})
    report.violations = check_invariants(scn.data, trace.events)
    return report


def summarize(trace: Trace) -> str:
    """Human-readable digest of a finished run."""
    header = trace.header
    bound: dict[str, str] = {
        entry["pod"]: entry["node"] for entry in header.get("initial", [])
    }
    phases: dict[str, str] = {pod: "Bound" for pod in bound}
    conflicts: Counter = Counter()
    resolutions: list[str] = []
    drops: Counter = Counter()
    submitted = applied = 0
    granted = denied = 0
    suspended: set[str] = set()
    errors: dict[str, list[float]] = {}
    for event in trace.events:
        kind = event["kind"]
        if kind == "pod-created":
            phases[event["pod"]] = "Pending"
        elif kind == "pod-bound":
            bound[event["pod"]] = event["node"]
            phases[event["pod"]] = "Bound"
        elif kind == "pod-evicted":
            bound.pop(event["pod"], None)
            phases[event["pod"]] = "Evicted"
        elif kind == "pod-pending":
            phases[event["pod"]] = "Pending"
        elif kind == "pod-terminated":
            bound.pop(event["pod"], None)
            phases[event["pod"]] = "Terminated"
        elif kind == "conflict-detected":
            conflicts[event["conflict"]] += 1
        elif kind == "conflict-resolved":
            if event["outcome"] == "arbitrated":
                resolutions.append(
                    f"t{event['tick']} {event['conflict']} on {event['instance']}: "
                    f"won by {event['winner']}"
                )
            else:
                resolutions.append(
                    f"t{event['tick']} {event['conflict']} on {event['instance']}: "
                    f"froze {event['frozen']} until t{event['until']}"
                )
        elif kind == "intent-submitted":
            submitted += 1
        elif kind == "intent-applied":
            applied += 1
        elif kind == "intent-dropped":
            drops[event["reason"]] += 1
        elif kind == "exchange-granted":
            granted += 1
        elif kind == "exchange-denied":
            denied += 1
        elif kind == "lifecycle":
            if event["after"] == "Suspended":
                suspended.add(event["acl"])
            elif event["acl"] in suspended:
                suspended.discard(event["acl"])
        elif kind == "agent-released":
            suspended.discard(event["acl"])
        elif kind == "prediction":
            errors.setdefault(event["acl"], []).append(
                abs(event["value"] - event["truth"])
            )
    lines = [
        f"scenario {header.get('scenario')} (seed {header.get('seed')}, "
        f"{header.get('ticks')} ticks)"
    ]
    by_node: dict[str, list[str]] = {}
    for pod_id, node_id in sorted(bound.items()):
        by_node.setdefault(node_id, []).append(pod_id)
    lines.append("placements:")
    if by_node:
        for node_id in sorted(by_node):
            lines.append(f"  {node_id}: {', '.join(by_node[node_id])}")
    else:
        lines.append("  (nothing bound)")
    leftover = sorted(p for p, ph in phases.items() if ph == "Pending")
    if leftover:
        lines.append(f"still pending: {', '.join(leftover)}")
    lines.append(
        "conflicts: "
        + (", ".join(f"{k}={v}" for k, v in sorted(conflicts.items())) or "none")
    )
    for entry in resolutions:
        lines.append(f"  {entry}")
    drop_text = ", ".join(f"{k}={v}" for k, v in sorted(drops.items())) or "0"
    lines.append(f"intents: submitted={submitted} applied={applied} dropped={drop_text}")
    lines.append(f"knowledge exchanges: granted={granted} denied={denied}")
    if suspended:
        lines.append(f"suspended agents: {', '.join(sorted(suspended))}")
    if errors:
        parts = []
        for acl in sorted(errors):
            mae = sum(errors[acl]) / len(errors[acl])
            parts.append(f"{acl}={mae:.3f}")
        lines.append("prediction mae: " + " ".join(parts))
    return "\n".join(lines)


def load_events_file(path: str) -> list[dict]:
    """Read a JSON-lines events file (as written by the ``release`` command)."""
    events = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{i}: bad event line: {exc}") from None
    return events
