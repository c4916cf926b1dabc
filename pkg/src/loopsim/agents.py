"""Control-loop agents: monitor -> analyze -> plan -> execute.

An agent watches the demand signal over its scope, predicts the next value,
and turns watermark breaches into action intents (scale, instantiate, power).
Intents do not touch the cluster directly — they go through the conflict
manager and only survivors are materialized by the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

from .cluster import ClusterState, PodPhase, PriorityLevel, ResourceVector, Toleration
from .errors import EmptyScope, SuspendedAgent


class SizeClass(str, Enum):
    FEMTO = "Femto"    # one container
    MICRO = "Micro"    # one node
    MACRO = "Macro"    # several nodes / a region
    MEGA = "Mega"      # spans regions or the whole system


class AgentRole(str, Enum):
    SCALER = "scaler"
    SLICE = "slice"
    ENERGY = "energy"
    BALANCER = "balancer"


class LifecycleState(str, Enum):
    ACTIVE = "Active"
    UNDER_OBSERVATION = "UnderObservation"
    SUSPENDED = "Suspended"


class PredictorKind(str, Enum):
    EWMA = "ewma"
    SHARED_MODEL = "shared-model"


@dataclass(frozen=True)
class PredictorState:
    kind: PredictorKind = PredictorKind.EWMA
    alpha: float = 0.3
    level: float = 0.0
    last_seen: int = -1
    accuracy_bonus: float = 0.0
    source: str | None = None


@dataclass(frozen=True)
class MetricWindow:
    target: str
    samples: tuple[tuple[int, float], ...]
    span_ticks: int


class ActionKind(str, Enum):
    SCALE_UP = "scale-up"
    SCALE_DOWN = "scale-down"
    INSTANTIATE = "instantiate"
    TERMINATE = "terminate"
    POWER_OFF = "power-off"
    POWER_ON = "power-on"


# +1 adds capacity / turns things on, -1 removes capacity / turns things off
DIRECTION = {
    ActionKind.SCALE_UP: 1,
    ActionKind.INSTANTIATE: 1,
    ActionKind.POWER_ON: 1,
    ActionKind.SCALE_DOWN: -1,
    ActionKind.TERMINATE: -1,
    ActionKind.POWER_OFF: -1,
}


@dataclass(frozen=True)
class PodSpec:
    request: ResourceVector
    tolerations: frozenset[Toleration] = frozenset()


@dataclass(frozen=True)
class SliceRequest:
    id: str
    agent_id: str
    tick: int
    chain: tuple[PodSpec, ...]


@dataclass(frozen=True)
class ActionIntent:
    intent_id: str
    acl_id: str
    tick: int
    kind: ActionKind
    target: str                      # what the action toggles/moves (service, node, slice)
    magnitude: float                 # predicted demand that motivated the action
    pod_specs: tuple[PodSpec, ...] = ()
    pod_ids: tuple[str, ...] = ()
    node_id: str | None = None
    vetted: bool = False             # already passed a coherency check once

    @property
    def direction(self) -> int:
        return DIRECTION[self.kind]


@dataclass
class Receipt:
    intent_id: str
    target: str
    submitted: int
    check_tick: int
    status: str = "submitted"        # submitted | requeued | materialized | dropped

    @property
    def outstanding(self) -> bool:
        return self.status in ("submitted", "requeued")


@dataclass
class LoopAgent:
    id: str
    role: AgentRole
    scope: frozenset[str]
    size: SizeClass
    priority: PriorityLevel
    predictor: PredictorState = field(default_factory=PredictorState)
    pod_template: PodSpec | None = None
    pod_capacity_units: float = 1000.0
    node_capacity_units: float = 1000.0
    watermark_high: float = 0.8
    watermark_low: float = 0.3
    hysteresis_ticks: int = 3
    idle_ticks: int = 5
    period: int = 1
    span_ticks: int = 10
    target: str = ""
    trust_list: frozenset[str] = frozenset()
    lifecycle: LifecycleState = LifecycleState.ACTIVE
    knowledge: set[str] = field(default_factory=set)
    anomaly_streak: int = 0
    normal_streak: int = 0
    last_scale_tick: int | None = None
    last_scale_direction: int = 0
    receipts: dict[str, Receipt] = field(default_factory=dict)
    intent_seq: int = 0
    pod_seq: int = 0

    def __post_init__(self):
        if not self.target:
            self.target = f"svc-{self.id}"


def classify_size(scope: frozenset[str], node_regions: dict[str, str]) -> SizeClass:
    """Size class from what the scope touches.

    Scope entries may be ``e2e``, a region name, a node id, or a container
    written ``<node-id>/<name>``.  Spanning several regions (or naming e2e)
    makes an agent Mega; a whole region or several nodes Macro; one node
    Micro; one container Femto.
    """
    if not scope:
        raise EmptyScope("agent scope is empty")
    region_names = set(node_regions.values())
    touched_regions: set[str] = set()
    touched_nodes: set[str] = set()
    container_count = 0
    region_entry = False
    for entry in sorted(scope):
        if entry == "e2e":
            return SizeClass.MEGA
        if entry in region_names:
            region_entry = True
            touched_regions.add(entry)
        elif entry in node_regions:
            touched_nodes.add(entry)
            touched_regions.add(node_regions[entry])
        elif "/" in entry and entry.split("/", 1)[0] in node_regions:
            node_id = entry.split("/", 1)[0]
            container_count += 1
            touched_nodes.add(node_id)
            touched_regions.add(node_regions[node_id])
        else:
            raise ValueError(f"scope entry {entry!r} matches no region, node, or container")
    if len(touched_regions) > 1:
        return SizeClass.MEGA
    if region_entry or len(touched_nodes) > 1:
        return SizeClass.MACRO
    if container_count == len(scope) and len(scope) == 1:
        return SizeClass.FEMTO
    return SizeClass.MICRO


def scope_regions(scope: frozenset[str], node_regions: dict[str, str]) -> list[str]:
    """Regions an agent's scope resolves to; ``e2e`` means all of them."""
    region_names = set(node_regions.values())
    out: set[str] = set()
    for entry in scope:
        if entry == "e2e":
            return sorted(region_names)
        if entry in region_names:
            out.add(entry)
        elif entry in node_regions:
            out.add(node_regions[entry])
        elif "/" in entry:
            out.add(node_regions[entry.split("/", 1)[0]])
    return sorted(out)


def monitor(agent: LoopAgent, demand: Callable[[int], float], tick: int) -> MetricWindow:
    """Collect the last ``span_ticks`` demand samples over the agent's scope."""
    if agent.lifecycle is LifecycleState.SUSPENDED:
        raise SuspendedAgent(agent.id)
    start = max(0, tick - agent.span_ticks + 1)
    samples = tuple((t, demand(t)) for t in range(start, tick + 1))
    return MetricWindow(agent.target, samples, agent.span_ticks)


def analyze(
    window: MetricWindow,
    predictor: PredictorState,
    ground_truth: float | None = None,
) -> tuple[float, PredictorState]:
    """Fold unseen samples into the smoothed level; return the next-demand
    prediction.  A shared model additionally pulls the estimate toward the
    upstream signal, scaling its error down by the accuracy bonus."""
    level = predictor.level
    last = predictor.last_seen
    for t, value in window.samples:
        if t <= last:
            continue
        level = predictor.alpha * value + (1.0 - predictor.alpha) * level
        last = t
    prediction = level
    if (
        predictor.kind is PredictorKind.SHARED_MODEL
        and ground_truth is not None
        and predictor.accuracy_bonus > 0.0
    ):
        prediction = level + predictor.accuracy_bonus * (ground_truth - level)
    return prediction, replace(predictor, level=level, last_seen=last)


@dataclass(frozen=True)
class PlanContext:
    """Everything plan() may look at besides the agent itself."""

    tick: int
    state: ClusterState
    scope_nodes: tuple[str, ...]
    idle_streaks: dict[str, int]
    powered_off: frozenset[str]
    outstanding_targets: frozenset[str]
    slice_requests: tuple[SliceRequest, ...] = ()


def _owned_pods(agent: LoopAgent, state: ClusterState) -> list[str]:
    return sorted(
        p.id
        for p in state.pods.values()
        if p.owner == agent.id and p.phase in (PodPhase.PENDING, PodPhase.BOUND)
    )


def _next_intent(agent: LoopAgent, tick: int, kind: ActionKind, target: str,
                 magnitude: float, **extra) -> ActionIntent:
    intent = ActionIntent(
        intent_id=f"{agent.id}-t{tick}-{agent.intent_seq}",
        acl_id=agent.id,
        tick=tick,
        kind=kind,
        target=target,
        magnitude=magnitude,
        **extra,
    )
    agent.intent_seq += 1
    return intent


def plan(agent: LoopAgent, prediction: float, ctx: PlanContext) -> list[ActionIntent]:
    """Turn a prediction into intents according to the agent's role."""
    if agent.lifecycle is LifecycleState.SUSPENDED:
        raise SuspendedAgent(agent.id)
    if agent.role is AgentRole.SCALER:
        return _plan_scaler(agent, prediction, ctx)
    if agent.role is AgentRole.SLICE:
        return _plan_slice(agent, prediction, ctx)
    if agent.role is AgentRole.ENERGY:
        return _plan_energy(agent, prediction, ctx)
    return _plan_balancer(agent, prediction, ctx)


def _plan_scaler(agent: LoopAgent, prediction: float, ctx: PlanContext) -> list[ActionIntent]:
    if agent.target in ctx.outstanding_targets:
        return []  # an earlier scale action is still in flight
    pods = _owned_pods(agent, ctx.state)
    replicas = len(pods)
    direction = 0
    if replicas == 0:
        if prediction > agent.watermark_low * agent.pod_capacity_units:
            direction = 1
    else:
        utilization = prediction / (replicas * agent.pod_capacity_units)
        if utilization > agent.watermark_high:
            direction = 1
        elif utilization < agent.watermark_low:
            direction = -1
    if direction == 0:
        return []
    if (
        agent.last_scale_tick is not None
        and direction == agent.last_scale_direction
        and ctx.tick - agent.last_scale_tick < agent.hysteresis_ticks
    ):
        return []
    if direction > 0:
        if agent.pod_template is None:
            return []
        return [
            _next_intent(
                agent, ctx.tick, ActionKind.SCALE_UP, agent.target, prediction,
                pod_specs=(agent.pod_template,),
            )
        ]
    bound = [p for p in pods if ctx.state.pods[p].phase is PodPhase.BOUND]
    if not bound:
        return []
    return [
        _next_intent(
            agent, ctx.tick, ActionKind.SCALE_DOWN, agent.target, prediction,
            pod_ids=(max(bound),),
        )
    ]


def _plan_slice(agent: LoopAgent, prediction: float, ctx: PlanContext) -> list[ActionIntent]:
    intents = []
    for request in ctx.slice_requests:
        intents.append(
            _next_intent(
                agent, ctx.tick, ActionKind.INSTANTIATE, agent.target, prediction,
                pod_specs=request.chain,
            )
        )
    return intents


def _plan_energy(agent: LoopAgent, prediction: float, ctx: PlanContext) -> list[ActionIntent]:
    intents = []
    for node_id in ctx.scope_nodes:
        if node_id in ctx.powered_off or node_id in ctx.outstanding_targets:
            continue
        if ctx.idle_streaks.get(node_id, 0) >= agent.idle_ticks:
            intents.append(
                _next_intent(
                    agent, ctx.tick, ActionKind.POWER_OFF, node_id, prediction,
                    node_id=node_id,
                )
            )
    return intents


def _plan_balancer(agent: LoopAgent, prediction: float, ctx: PlanContext) -> list[ActionIntent]:
    powered_on = [n for n in ctx.scope_nodes if n not in ctx.powered_off]
    supply = len(powered_on) * agent.node_capacity_units
    if prediction <= agent.watermark_high * supply:
        return []
    intents = []
    for node_id in ctx.scope_nodes:
        if node_id not in ctx.powered_off or node_id in ctx.outstanding_targets:
            continue
        intents.append(
            _next_intent(
                agent, ctx.tick, ActionKind.POWER_ON, node_id, prediction,
                node_id=node_id,
            )
        )
    return intents


def execute(agent: LoopAgent, intents: list[ActionIntent], submit) -> list[Receipt]:
    """Hand intents to the conflict manager; remember a receipt for each."""
    if agent.lifecycle is LifecycleState.SUSPENDED:
        raise SuspendedAgent(agent.id)
    receipts = []
    for intent in intents:
        check_tick = submit(intent)
        receipt = Receipt(intent.intent_id, intent.target, intent.tick, check_tick)
        agent.receipts[intent.intent_id] = receipt
        receipts.append(receipt)
    return receipts


def outstanding_targets(agent: LoopAgent) -> frozenset[str]:
    return frozenset(r.target for r in agent.receipts.values() if r.outstanding)


def absorb_knowledge(agent: LoopAgent, grant) -> bool:
    """Fold a granted artifact into the agent.  Idempotent per artifact id.

    A model grant upgrades the predictor in place (same level, same alpha) and
    records where it came from; a dataset grant widens the sampling window.
    """
    if grant.artifact_id in agent.knowledge:
        return False
    agent.knowledge.add(grant.artifact_id)
    if grant.kind == "Model":
        agent.predictor = replace(
            agent.predictor,
            kind=PredictorKind.SHARED_MODEL,
            accuracy_bonus=grant.accuracy_bonus,
            source=grant.source,
        )
    else:
        agent.span_ticks = agent.span_ticks + grant.sample_count
    return True
