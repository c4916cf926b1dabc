"""Cluster model: nodes, pods, taints, and pure state transitions.

All state lives in immutable dataclasses; every operation returns a new
``ClusterState`` and raises instead of silently clamping.  Capacity is a
two-component vector (cpu millicores, memory MiB) compared component-wise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import (
    CapacityExceeded,
    InvalidPhase,
    TaintViolation,
    UnknownNode,
    UnknownPod,
)


@dataclass(frozen=True, order=True)
class ResourceVector:
    cpu_millicores: int
    memory_mib: int

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(
            self.cpu_millicores + other.cpu_millicores,
            self.memory_mib + other.memory_mib,
        )

    def __sub__(self, other: "ResourceVector") -> "ResourceVector":
        cpu = self.cpu_millicores - other.cpu_millicores
        mem = self.memory_mib - other.memory_mib
        if cpu < 0 or mem < 0:
            raise ValueError(f"resource subtraction went negative: {self} - {other}")
        return ResourceVector(cpu, mem)

    def covers(self, other: "ResourceVector") -> bool:
        """Component-wise >=; used for both fit checks and validation."""
        return (
            self.cpu_millicores >= other.cpu_millicores
            and self.memory_mib >= other.memory_mib
        )


ZERO = ResourceVector(0, 0)


class TaintEffect(str, Enum):
    NO_SCHEDULE = "NoSchedule"
    PREFER_NO_SCHEDULE = "PreferNoSchedule"
    NO_EXECUTE = "NoExecute"


# Effects that make a taint *hard*: an intolerant pod may not be (or remain) placed.
HARD_EFFECTS = frozenset({TaintEffect.NO_SCHEDULE, TaintEffect.NO_EXECUTE})

# Reserved taint key marking a node that has been powered down.  No pod
# tolerates it, so a powered-off node never attracts new work; running pods
# stay put (the effect is NoSchedule, not NoExecute).
POWERED_OFF_KEY = "powered-off"


@dataclass(frozen=True)
class Taint:
    key: str
    effect: TaintEffect


@dataclass(frozen=True)
class Toleration:
    key: str
    effects_tolerated: frozenset[TaintEffect]

    def matches(self, taint: Taint) -> bool:
        return self.key == taint.key and taint.effect in self.effects_tolerated


@dataclass(frozen=True)
class PriorityLevel:
    name: str
    value: int
    preemption_enabled: bool = True
    global_default: bool = False


class PodPhase(str, Enum):
    PENDING = "Pending"
    BOUND = "Bound"
    EVICTED = "Evicted"
    TERMINATED = "Terminated"


@dataclass(frozen=True)
class Pod:
    id: str
    owner: str
    request: ResourceVector
    tolerations: frozenset[Toleration] = frozenset()
    priority: PriorityLevel = PriorityLevel("default", 0, False, True)
    phase: PodPhase = PodPhase.PENDING


@dataclass(frozen=True)
class Node:
    id: str
    region: str
    capacity: ResourceVector
    taints: frozenset[Taint] = frozenset()


@dataclass(frozen=True)
class ClusterState:
    nodes: dict[str, Node] = field(default_factory=dict)
    pods: dict[str, Pod] = field(default_factory=dict)
    # pod id -> node id, defined exactly for pods in phase Bound
    bindings: dict[str, str] = field(default_factory=dict)


def tolerates(pod: Pod, node: Node) -> bool:
    """True when every hard taint on the node is matched by some toleration.

    ``PreferNoSchedule`` taints never block placement; they only demote the
    node during scoring.  A node with no hard taints is tolerated by any pod.
    """
    for taint in node.taints:
        if taint.effect not in HARD_EFFECTS:
            continue
        if not any(tol.matches(taint) for tol in pod.tolerations):
            return False
    return True


def _node(state: ClusterState, node_id: str) -> Node:
    try:
        return state.nodes[node_id]
    except KeyError:
        raise UnknownNode(node_id) from None


def _pod(state: ClusterState, pod_id: str) -> Pod:
    try:
        return state.pods[pod_id]
    except KeyError:
        raise UnknownPod(pod_id) from None


def pods_on(state: ClusterState, node_id: str) -> list[str]:
    """Ids of pods currently bound to *node_id*, sorted for determinism."""
    _node(state, node_id)
    return sorted(p for p, n in state.bindings.items() if n == node_id)


def used_capacity(state: ClusterState, node_id: str) -> ResourceVector:
    total = ZERO
    for pod_id in pods_on(state, node_id):
        total = total + state.pods[pod_id].request
    return total


def free_capacity(state: ClusterState, node_id: str) -> ResourceVector:
    node = _node(state, node_id)
    return node.capacity - used_capacity(state, node_id)


def fits(state: ClusterState, pod: Pod, node_id: str) -> bool:
    """Request fits in what is currently free on the node (taints ignored)."""
    return free_capacity(state, node_id).covers(pod.request)


def add_pod(state: ClusterState, pod: Pod) -> ClusterState:
    if pod.id in state.pods:
        raise ValueError(f"duplicate pod id {pod.id!r}")
    pods = dict(state.pods)
    pods[pod.id] = pod
    return replace(state, pods=pods)


def apply_taint(state: ClusterState, node_id: str, taint: Taint) -> ClusterState:
    """Add a taint. Never evicts by itself; NoExecute enforcement is a
    separate scheduler pass so that evictions land in the trace in order."""
    node = _node(state, node_id)
    nodes = dict(state.nodes)
    nodes[node_id] = replace(node, taints=node.taints | {taint})
    return replace(state, nodes=nodes)


def remove_taint(
    state: ClusterState, node_id: str, key: str, effect: TaintEffect | None = None
) -> ClusterState:
    node = _node(state, node_id)
    keep = frozenset(
        t
        for t in node.taints
        if not (t.key == key and (effect is None or t.effect == effect))
    )
    nodes = dict(state.nodes)
    nodes[node_id] = replace(node, taints=keep)
    return replace(state, nodes=nodes)


def _set_phase(state: ClusterState, pod: Pod, phase: PodPhase) -> ClusterState:
    pods = dict(state.pods)
    pods[pod.id] = replace(pod, phase=phase)
    return replace(state, pods=pods)


def bind(state: ClusterState, pod_id: str, node_id: str) -> ClusterState:
    pod = _pod(state, pod_id)
    node = _node(state, node_id)
    if pod.phase is not PodPhase.PENDING:
        raise InvalidPhase(pod_id, pod.phase.value, PodPhase.BOUND.value)
    if not tolerates(pod, node):
        raise TaintViolation(pod_id, node_id)
    if not fits(state, pod, node_id):
        raise CapacityExceeded(
            node_id, f"{pod.request} > free {free_capacity(state, node_id)}"
        )
    state = _set_phase(state, pod, PodPhase.BOUND)
    bindings = dict(state.bindings)
    bindings[pod_id] = node_id
    return replace(state, bindings=bindings)


def evict(state: ClusterState, pod_id: str) -> ClusterState:
    pod = _pod(state, pod_id)
    if pod.phase is not PodPhase.BOUND:
        raise InvalidPhase(pod_id, pod.phase.value, PodPhase.EVICTED.value)
    state = _set_phase(state, pod, PodPhase.EVICTED)
    bindings = dict(state.bindings)
    del bindings[pod_id]
    return replace(state, bindings=bindings)


def requeue(state: ClusterState, pod_id: str) -> ClusterState:
    pod = _pod(state, pod_id)
    if pod.phase is not PodPhase.EVICTED:
        raise InvalidPhase(pod_id, pod.phase.value, PodPhase.PENDING.value)
    return _set_phase(state, pod, PodPhase.PENDING)


def terminate(state: ClusterState, pod_id: str) -> ClusterState:
    pod = _pod(state, pod_id)
    if pod.phase is PodPhase.TERMINATED:
        raise InvalidPhase(pod_id, pod.phase.value, PodPhase.TERMINATED.value)
    state = _set_phase(state, pod, PodPhase.TERMINATED)
    if pod_id in state.bindings:
        bindings = dict(state.bindings)
        del bindings[pod_id]
        state = replace(state, bindings=bindings)
    return state


def regions(state: ClusterState) -> list[str]:
    return sorted({n.region for n in state.nodes.values()})


def nodes_in_region(state: ClusterState, region: str) -> list[str]:
    return sorted(n.id for n in state.nodes.values() if n.region == region)
