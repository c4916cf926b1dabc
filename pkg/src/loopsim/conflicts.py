"""Conflict manager: vets every intent before it may touch the cluster.

Responsibilities, in pipeline order per tick:

1. buffered end-to-end work due this tick is resolved/released,
2. each incoming intent gets a coherency verdict (rolling z-score) and the
   issuing agent's lifecycle advances,
3. intents on frozen (loop, target) pairs are dropped,
4. interference (back-and-forth toggling of one target by several loops) is
   detected and the lowest-priority participant frozen,
5. resource contention (combined claims exceeding a node, or opposite-direction
   actions on one node) is detected, routed to a regional or the end-to-end
   instance, and arbitrated by priority,
6. surviving intents pass to the simulator for materialization.

Regional instances act on their own tick; the end-to-end instance only acts on
ticks that are multiples of its period, buffering work in between.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace
from enum import Enum

from . import cluster, scheduler
from .agents import ActionIntent, ActionKind, LifecycleState, LoopAgent, SizeClass, scope_regions
from .cluster import ClusterState, Pod, PriorityLevel
from .errors import NoGrant, UnknownRegion


class ConflictKind(str, Enum):
    RESOURCE_CONTENTION = "ResourceContention"
    INTERFERENCE = "Interference"


class Verdict(str, Enum):
    NORMAL = "Normal"
    ANOMALOUS = "Anomalous"


E2E = "e2e"


def regional(region: str) -> str:
    return f"regional:{region}"


@dataclass(frozen=True)
class Resolution:
    kind: str                        # "arbitrated" | "frozen"
    winner: str | None = None
    losers: tuple[str, ...] = ()
    frozen_acl: str | None = None
    until_tick: int | None = None


@dataclass(frozen=True)
class ConflictRecord:
    conflict_id: str
    tick: int
    kind: ConflictKind
    participants: tuple[str, ...]
    targets: tuple[str, ...]
    instance: str
    resolution: Resolution | None = None
    resolved_tick: int | None = None


@dataclass
class CoherencyBaseline:
    """Rolling window of action magnitudes for one loop."""

    window: int
    min_history: int
    epsilon: float
    history: list[float] = field(default_factory=list)

    def check(self, magnitude: float, k_sigma: float) -> Verdict:
        verdict = Verdict.NORMAL
        if len(self.history) >= self.min_history:
            mean = statistics.fmean(self.history)
            spread = max(statistics.pstdev(self.history), self.epsilon)
            if abs(magnitude - mean) > k_sigma * spread:
                verdict = Verdict.ANOMALOUS
        self.history.append(magnitude)
        if len(self.history) > self.window:
            del self.history[0]
        return verdict


@dataclass(frozen=True)
class Grant:
    artifact_id: str
    source: str
    target: str
    kind: str                        # "Model" | "Dataset"
    accuracy_bonus: float = 0.0
    sample_count: int = 0
    tick: int = 0


@dataclass(frozen=True)
class Denial:
    source: str
    target: str
    kind: str
    reason: str                      # "NotTrusted" | "SourceSuspended" | "UnknownAgent"


@dataclass(frozen=True)
class ExchangeRequest:
    source: str
    target: str
    kind: str
    tick: int


@dataclass
class ManagerConfig:
    e2e_period: int = 5
    coherency_window: int = 50
    coherency_min_history: int = 10
    coherency_k_sigma: float = 3.0
    coherency_epsilon: float = 1e-6
    suspend_after: int = 3
    reinstate_after: int = 5
    interference_window: int = 10
    toggle_threshold: int = 3
    freeze_cooldown: int = 10
    model_bonus: float = 0.2


@dataclass
class TickOutcome:
    survivors: list[ActionIntent] = field(default_factory=list)
    requeued: list[ActionIntent] = field(default_factory=list)
    dropped: list[tuple[ActionIntent, str]] = field(default_factory=list)
    detected: list[ConflictRecord] = field(default_factory=list)
    resolved: list[ConflictRecord] = field(default_factory=list)
    verdicts: list[tuple[str, float, Verdict]] = field(default_factory=list)
    lifecycle_changes: list[tuple[str, str, str]] = field(default_factory=list)
    buffered: list[ActionIntent] = field(default_factory=list)


TOGGLE_KINDS = frozenset(
    {ActionKind.POWER_OFF, ActionKind.POWER_ON, ActionKind.SCALE_UP, ActionKind.SCALE_DOWN}
)


class ConflictManager:
    def __init__(self, config: ManagerConfig, agents: dict[str, LoopAgent],
                 regions: list[str]):
        self.config = config
        self.agents = agents
        self.regions = list(regions)
        self.baselines: dict[str, CoherencyBaseline] = {}
        self.freezes: dict[tuple[str, str], int] = {}
        self.action_history: list[tuple[int, str, str, int]] = []  # tick, acl, target, direction
        self._held_conflicts: list[tuple[ConflictRecord, list[ActionIntent]]] = []
        self._held_intents: list[ActionIntent] = []
        self.trust: dict[str, set[tuple[str, str]]] = {}
        self.grants: dict[str, Grant] = {}
        self._consumed: set[str] = set()
        self._grant_seq = 0
        self._conflict_seq = 0

    # -- routing ------------------------------------------------------------

    def is_e2e_tick(self, tick: int) -> bool:
        return tick % self.config.e2e_period == 0

    def next_e2e_tick(self, tick: int) -> int:
        period = self.config.e2e_period
        return tick if tick % period == 0 else (tick // period + 1) * period

    def route(self, participant_ids: list[str], node_regions: dict[str, str]) -> str:
        """Pick the instance responsible for a set of participants.

        Any Mega participant, or scopes straddling regions, escalates to the
        end-to-end instance; otherwise the single shared region handles it.
        """
        touched: set[str] = set()
        for acl in participant_ids:
            agent = self.agents[acl]
            if agent.size is SizeClass.MEGA:
                return E2E
            touched.update(scope_regions(agent.scope, node_regions))
        if len(touched) != 1:
            return E2E
        region = touched.pop()
        if region not in self.regions:
            raise UnknownRegion(region)
        return regional(region)

    def submit(self, intent: ActionIntent, node_regions: dict[str, str]) -> int:
        """Return the tick at which the owning instance will look at this intent."""
        instance = self.route([intent.acl_id], node_regions)
        return intent.tick if instance != E2E else self.next_e2e_tick(intent.tick)

    # -- coherency / lifecycle ----------------------------------------------

    def coherency_check(self, acl: str, magnitude: float) -> Verdict:
        cfg = self.config
        baseline = self.baselines.get(acl)
        if baseline is None:
            baseline = CoherencyBaseline(
                cfg.coherency_window, cfg.coherency_min_history, cfg.coherency_epsilon
            )
            self.baselines[acl] = baseline
        return baseline.check(magnitude, cfg.coherency_k_sigma)

    def update_lifecycle(self, agent: LoopAgent, verdict: Verdict) -> tuple[str, str] | None:
        """Advance the agent's lifecycle; return (old, new) on a transition."""
        old = agent.lifecycle
        if agent.lifecycle is LifecycleState.SUSPENDED:
            return None  # absorbing until an operator releases it
        if verdict is Verdict.ANOMALOUS:
            agent.anomaly_streak += 1
            agent.normal_streak = 0
            if agent.anomaly_streak >= self.config.suspend_after:
                agent.lifecycle = LifecycleState.SUSPENDED
            else:
                agent.lifecycle = LifecycleState.UNDER_OBSERVATION
        else:
            agent.normal_streak += 1
            agent.anomaly_streak = 0
            if (
                agent.lifecycle is LifecycleState.UNDER_OBSERVATION
                and agent.normal_streak >= self.config.reinstate_after
            ):
                agent.lifecycle = LifecycleState.ACTIVE
        if agent.lifecycle is not old:
            return (old.value, agent.lifecycle.value)
        return None

    def release(self, acl: str) -> bool:
        agent = self.agents.get(acl)
        if agent is None or agent.lifecycle is not LifecycleState.SUSPENDED:
            return False
        agent.lifecycle = LifecycleState.ACTIVE
        agent.anomaly_streak = 0
        agent.normal_streak = 0
        return True

    # -- knowledge exchange ---------------------------------------------------

    def broker_exchange(self, request: ExchangeRequest) -> Grant | Denial:
        source = self.agents.get(request.source)
        target = self.agents.get(request.target)
        if source is None or target is None:
            return Denial(request.source, request.target, request.kind, "UnknownAgent")
        if source.lifecycle is LifecycleState.SUSPENDED:
            return Denial(request.source, request.target, request.kind, "SourceSuspended")
        if (request.target, request.kind) not in self.trust.get(request.source, set()):
            return Denial(request.source, request.target, request.kind, "NotTrusted")
        self._grant_seq += 1
        grant = Grant(
            artifact_id=f"{request.source}-{request.kind.lower()}-{self._grant_seq}",
            source=request.source,
            target=request.target,
            kind=request.kind,
            accuracy_bonus=self.config.model_bonus if request.kind == "Model" else 0.0,
            sample_count=source.span_ticks if request.kind == "Dataset" else 0,
            tick=request.tick,
        )
        self.grants[grant.artifact_id] = grant
        return grant

    def consume_grant(self, artifact_id: str) -> Grant:
        if artifact_id not in self.grants or artifact_id in self._consumed:
            raise NoGrant(f"no unconsumed grant {artifact_id!r}")
        self._consumed.add(artifact_id)
        return self.grants[artifact_id]

    # -- detection -------------------------------------------------------------

    def note_execution(self, tick: int, acl: str, target: str, direction: int) -> None:
        self.action_history.append((tick, acl, target, direction))

    def _frozen(self, acl: str, target: str, tick: int) -> bool:
        until = self.freezes.get((acl, target))
        return until is not None and tick < until

    def _target_frozen(self, target: str, tick: int) -> bool:
        return any(
            key[1] == target and tick < until for key, until in self.freezes.items()
        )

    def detect_interference(
        self, tick: int, pending: list[ActionIntent], node_regions: dict[str, str]
    ) -> list[ConflictRecord]:
        """Flag targets toggled back and forth by several loops recently.

        Looks at executed actions inside the sliding window plus this tick's
        pending toggle intents.  A node target starts from powered-on; other
        targets take their first observed direction as the starting state, so
        monotone runs (everyone scaling up) never count as toggles.
        """
        cfg = self.config
        entries: dict[str, list[tuple[int, str, int]]] = {}
        for t, acl, target, direction in self.action_history:
            if tick - cfg.interference_window < t <= tick:
                entries.setdefault(target, []).append((t, acl, direction))
        for intent in pending:
            if intent.kind in TOGGLE_KINDS:
                entries.setdefault(intent.target, []).append(
                    (tick, intent.acl_id, intent.direction)
                )
        records = []
        for target in sorted(entries):
            if self._target_frozen(target, tick):
                continue  # already resolved; do not re-flag during cooldown
            seq = sorted(entries[target])
            prev = 1 if target in node_regions else seq[0][2]
            toggles = 0
            actors = set()
            for _, acl, direction in seq:
                actors.add(acl)
                if direction != prev:
                    toggles += 1
                prev = direction
            if toggles >= cfg.toggle_threshold and len(actors) >= 2:
                records.append(
                    self._record(tick, ConflictKind.INTERFERENCE, sorted(actors), [target],
                                 node_regions)
                )
        return records

    def detect_resource_conflicts(
        self, tick: int, intents: list[ActionIntent], state: ClusterState,
        node_regions: dict[str, str],
    ) -> list[tuple[ConflictRecord, set[str]]]:
        """Group this tick's intents by the node they would act on.

        Returns (record, implicated intent ids) pairs.  Two triggers: combined
        placement claims from several loops exceeding a node's free room, and
        opposite-direction actions from several loops on one node.
        """
        up_claims: dict[str, list[tuple[str, str, cluster.ResourceVector]]] = {}
        directions: dict[str, list[tuple[str, str, int]]] = {}

        for intent in intents:
            for node_id, request in self._claims(intent, state):
                if request is not None:
                    up_claims.setdefault(node_id, []).append(
                        (intent.acl_id, intent.intent_id, request)
                    )
                directions.setdefault(node_id, []).append(
                    (intent.acl_id, intent.intent_id, intent.direction)
                )

        results = []
        for node_id in sorted(set(up_claims) | set(directions)):
            participants: set[str] = set()
            implicated: set[str] = set()
            claims = up_claims.get(node_id, [])
            claim_acls = {acl for acl, _, _ in claims}
            if len(claim_acls) >= 2:
                total = cluster.ZERO
                for _, _, request in claims:
                    total = total + request
                if not cluster.free_capacity(state, node_id).covers(total):
                    participants.update(claim_acls)
                    implicated.update(iid for _, iid, _ in claims)
            dirs = directions.get(node_id, [])
            ups = {(acl, iid) for acl, iid, d in dirs if d > 0}
            downs = {(acl, iid) for acl, iid, d in dirs if d < 0}
            if ups and downs and {a for a, _ in ups} != {a for a, _ in downs}:
                acls = {a for a, _ in ups} | {a for a, _ in downs}
                if len(acls) >= 2:
                    participants.update(acls)
                    implicated.update(i for _, i in ups | downs)
            if participants:
                results.append(
                    (
                        self._record(
                            tick, ConflictKind.RESOURCE_CONTENTION,
                            sorted(participants), [node_id], node_regions,
                        ),
                        implicated,
                    )
                )
        return results

    def _claims(self, intent: ActionIntent, state: ClusterState):
        """(node, request|None) pairs the intent lays claim to."""
        out = []
        if intent.kind in (ActionKind.SCALE_UP, ActionKind.INSTANTIATE):
            owner = self.agents[intent.acl_id]
            for i, spec in enumerate(intent.pod_specs):
                probe = Pod(
                    id=f"__probe-{intent.intent_id}-{i}",
                    owner=intent.acl_id,
                    request=spec.request,
                    tolerations=spec.tolerations,
                    priority=owner.priority,
                )
                feasible = scheduler.filter_nodes(state, probe)
                if not feasible:
                    continue
                ranked = scheduler.score_nodes(state, probe, feasible)
                out.append((ranked[0], spec.request))
        elif intent.kind in (ActionKind.SCALE_DOWN, ActionKind.TERMINATE):
            for pod_id in intent.pod_ids:
                node_id = state.bindings.get(pod_id)
                if node_id is not None:
                    out.append((node_id, None))
        elif intent.node_id is not None:
            out.append((intent.node_id, None))
        return out

    def _record(self, tick: int, kind: ConflictKind, participants: list[str],
                targets: list[str], node_regions: dict[str, str]) -> ConflictRecord:
        instance = self.route(participants, node_regions)
        record = ConflictRecord(
            conflict_id=f"c{self._conflict_seq}",
            tick=tick,
            kind=kind,
            participants=tuple(participants),
            targets=tuple(sorted(targets)),
            instance=instance,
        )
        self._conflict_seq += 1
        return record

    # -- resolution -------------------------------------------------------------

    def resolve(self, record: ConflictRecord, tick: int) -> ConflictRecord:
        """Arbitration: contention goes to the highest priority level (ties to
        the lexicographically first loop); interference freezes the lowest."""
        def value(acl: str) -> int:
            return self.agents[acl].priority.value

        if record.kind is ConflictKind.RESOURCE_CONTENTION:
            winner = min(record.participants, key=lambda a: (-value(a), a))
            losers = tuple(a for a in record.participants if a != winner)
            resolution = Resolution("arbitrated", winner=winner, losers=losers)
        else:
            frozen = min(record.participants, key=lambda a: (value(a), a))
            until = tick + self.config.freeze_cooldown
            for target in record.targets:
                self.freezes[(frozen, target)] = until
            resolution = Resolution("frozen", frozen_acl=frozen, until_tick=until)
        return replace(record, resolution=resolution, resolved_tick=tick)

    # -- the per-tick pipeline ----------------------------------------------------

    def process_tick(
        self,
        tick: int,
        intents: list[ActionIntent],
        state: ClusterState,
        node_regions: dict[str, str],
    ) -> TickOutcome:
        out = TickOutcome()
        pool: list[ActionIntent] = []

        # 0. end-to-end instance wakes up: settle buffered conflicts and intents
        if self.is_e2e_tick(tick):
            held_conflicts, self._held_conflicts = self._held_conflicts, []
            for record, held in held_conflicts:
                resolved = self.resolve(record, tick)
                out.resolved.append(resolved)
                winner = resolved.resolution.winner
                for intent in held:
                    if intent.acl_id == winner:
                        pool.append(replace(intent, vetted=True))
                    else:
                        out.requeued.append(replace(intent, vetted=True))
            flushed, self._held_intents = self._held_intents, []
            pool.extend(replace(i, vetted=True) for i in flushed)

        # 1. coherency + lifecycle on fresh intents, in stable order
        for intent in sorted(intents, key=lambda i: (i.acl_id, i.intent_id)):
            if intent.vetted:
                pool.append(intent)
                continue
            agent = self.agents[intent.acl_id]
            verdict = self.coherency_check(intent.acl_id, intent.magnitude)
            out.verdicts.append((intent.acl_id, intent.magnitude, verdict))
            change = self.update_lifecycle(agent, verdict)
            if change is not None:
                out.lifecycle_changes.append((intent.acl_id, change[0], change[1]))
            if verdict is Verdict.ANOMALOUS:
                out.dropped.append((intent, "anomalous"))
            else:
                pool.append(intent)

        # 2. freezes from earlier interference rulings
        kept = []
        for intent in pool:
            if self._frozen(intent.acl_id, intent.target, tick):
                out.dropped.append((intent, "frozen"))
            else:
                kept.append(intent)
        pool = kept

        # 3. interference detection on recent executions plus this tick's intents
        for record in self.detect_interference(tick, pool, node_regions):
            out.detected.append(record)
            resolved = self.resolve(record, tick)
            out.resolved.append(resolved)
            kept = []
            for intent in pool:
                if (
                    intent.acl_id == resolved.resolution.frozen_acl
                    and intent.target in resolved.targets
                ):
                    out.dropped.append((intent, "frozen"))
                else:
                    kept.append(intent)
            pool = kept

        # 4. resource contention: arbitrate now (regional) or buffer (e2e)
        for record, implicated in self.detect_resource_conflicts(
            tick, pool, state, node_regions
        ):
            out.detected.append(record)
            if record.instance == E2E and not self.is_e2e_tick(tick):
                held = [i for i in pool if i.intent_id in implicated]
                pool = [i for i in pool if i.intent_id not in implicated]
                self._held_conflicts.append((record, held))
                continue
            resolved = self.resolve(record, tick)
            out.resolved.append(resolved)
            winner = resolved.resolution.winner
            kept = []
            for intent in pool:
                if intent.intent_id in implicated and intent.acl_id != winner:
                    out.requeued.append(replace(intent, vetted=True))
                else:
                    kept.append(intent)
            pool = kept

        # 5. uninvolved intents from end-to-end scoped loops wait for their instance
        for intent in pool:
            instance = self.route([intent.acl_id], node_regions)
            if instance == E2E and not self.is_e2e_tick(tick):
                self._held_intents.append(intent)
                out.buffered.append(intent)
            else:
                out.survivors.append(intent)
        return out
