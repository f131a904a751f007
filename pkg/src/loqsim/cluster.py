"""Cluster-state (measurement-based) computation at the qubit level.

A cluster is |+>-initialized nodes (overridable per node) with a CZ bond
per edge.  Computation is a schedule of single-qubit measurements:
equatorial measurements at angle a project onto (|0> +/- e^{-ia}|1>);
outcome-dependent sign flips of later angles are declared per
instruction, which is what makes the net rotation branch-independent.

Byproduct bookkeeping (the exact rules, since they are convention):

  * measuring node i in the equatorial plane teleports its logical
    content to a flow successor; the logical outcome is the raw outcome
    XOR the node's accumulated Z flip, and it lands as an X flip on the
    successor and a Z flip on the successor's other unmeasured neighbors
    (an X byproduct propagates through the implicit Hadamard to Z type);
  * an accumulated X flip on a node means later equatorial measurements
    of it need their angle sign flipped, which standard patterns declare
    via `adapt`;
  * measuring in the computational basis removes the node and leaves a Z
    flip on each unmeasured neighbor when the (X-corrected) outcome is 1.

The successor defaults to the unique unmeasured neighbor and otherwise
to the smallest-id one; patterns with branching flow declare it.  After
a full pattern the remaining frame is applied to the residual state, so
the returned output is branch-independent for properly adapted patterns.

Simulation is dense over at most NODE_CAP qubits.  The random number
stream is consumed once per measurement in schedule order, so a grown
run and a monolithic run with the same seed see identical outcomes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .detection import rng_from_seed
from .encoding import LogicalState

NODE_CAP = 20

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_PLUS = (complex(_SQRT_HALF), complex(_SQRT_HALF))


@dataclass(frozen=True)
class ClusterGraph:
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    init_states: tuple[tuple[int, tuple[complex, complex]], ...] = ()

    def __post_init__(self):
        nodes = tuple(sorted(set(int(n) for n in self.nodes)))
        if len(nodes) != len(self.nodes):
            raise ValueError("cluster nodes must be distinct")
        object.__setattr__(self, "nodes", nodes)
        node_set = set(nodes)
        seen = set()
        norm_edges = []
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-edge on node {a}")
            if a not in node_set or b not in node_set:
                raise ValueError(f"edge ({a}, {b}) uses an undeclared node")
            e = (min(a, b), max(a, b))
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            norm_edges.append(e)
        object.__setattr__(self, "edges", tuple(sorted(norm_edges)))
        for n, amps in self.init_states:
            if n not in node_set:
                raise ValueError(f"init state for undeclared node {n}")
            if abs(abs(amps[0]) ** 2 + abs(amps[1]) ** 2 - 1.0) > 1e-9:
                raise ValueError(f"init state for node {n} is not normalized")

    def neighbors(self, node: int) -> tuple[int, ...]:
        out = []
        for a, b in self.edges:
            if a == node:
                out.append(b)
            elif b == node:
                out.append(a)
        return tuple(sorted(out))

    def init_of(self, node: int) -> tuple[complex, complex]:
        for n, amps in self.init_states:
            if n == node:
                return amps
        return _PLUS


@dataclass(frozen=True)
class MeasurementInstruction:
    """One measurement: equatorial at `angle`, or basis="z" (computational).

    `adapt` lists earlier nodes whose outcome XOR flips the angle sign;
    `successor` names the flow node inheriting the X byproduct.
    """

    node: int
    angle: float = 0.0
    basis: str = "xy"
    adapt: tuple[int, ...] = ()
    successor: int | None = None

    def __post_init__(self):
        if self.basis not in ("xy", "z"):
            raise ValueError(f"unknown measurement basis {self.basis!r}")
        if not math.isfinite(self.angle):
            raise ValueError("measurement angle must be finite")


class PauliFrame:
    """Per-node deferred (x_flip, z_flip) pair; composition is XOR."""

    __slots__ = ("_flips",)

    def __init__(self, flips: Mapping[int, tuple[bool, bool]] | None = None):
        clean = {}
        for node, (x, z) in (flips or {}).items():
            if x or z:
                clean[int(node)] = (bool(x), bool(z))
        self._flips = clean

    def x(self, node: int) -> bool:
        return self._flips.get(node, (False, False))[0]

    def z(self, node: int) -> bool:
        return self._flips.get(node, (False, False))[1]

    def items(self) -> list[tuple[int, tuple[bool, bool]]]:
        return sorted(self._flips.items())

    def is_identity(self) -> bool:
        return not self._flips

    def toggled(self, node: int, x: bool = False, z: bool = False) -> "PauliFrame":
        cur_x, cur_z = self._flips.get(node, (False, False))
        out = dict(self._flips)
        out[node] = (cur_x ^ x, cur_z ^ z)
        return PauliFrame(out)

    def without(self, node: int) -> "PauliFrame":
        out = dict(self._flips)
        out.pop(node, None)
        return PauliFrame(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliFrame):
            return NotImplemented
        return self._flips == other._flips

    def __repr__(self) -> str:
        return f"PauliFrame({self._flips!r})"


class ClusterState:
    """Dense state over the currently active (added, unmeasured) nodes."""

    __slots__ = ("graph", "nodes", "amps")

    def __init__(self, graph: ClusterGraph, nodes: tuple[int, ...], amps: np.ndarray):
        self.graph = graph
        self.nodes = nodes
        self.amps = amps

    @staticmethod
    def empty(graph: ClusterGraph) -> "ClusterState":
        return ClusterState(graph, (), np.ones(1, dtype=complex))

    def axis(self, node: int) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise ValueError(f"node {node} is not active") from None

    def with_node(self, node: int) -> "ClusterState":
        if node in self.nodes:
            raise ValueError(f"node {node} already added")
        if node not in self.graph.nodes:
            raise ValueError(f"node {node} is not declared in the graph")
        if len(self.nodes) + 1 > NODE_CAP:
            raise ValueError(f"simulator cap of {NODE_CAP} nodes exceeded")
        init = np.array(self.graph.init_of(node), dtype=complex)
        return ClusterState(self.graph, self.nodes + (node,), np.kron(self.amps, init))

    def with_bond(self, a: int, b: int) -> "ClusterState":
        ia, ib = self.axis(a), self.axis(b)
        n = len(self.nodes)
        t = self.amps.reshape([2] * n).copy()
        idx: list = [slice(None)] * n
        idx[ia] = 1
        idx[ib] = 1
        t[tuple(idx)] *= -1.0
        return ClusterState(self.graph, self.nodes, t.reshape(-1))

    def with_pauli(self, node: int, x: bool, z: bool) -> "ClusterState":
        i = self.axis(node)
        n = len(self.nodes)
        t = self.amps.reshape([2] * n).copy()
        idx: list = [slice(None)] * n
        if x:
            t = np.flip(t, axis=i)
        if z:
            idx[i] = 1
            t[tuple(idx)] *= -1.0
        return ClusterState(self.graph, self.nodes, t.reshape(-1))

    def sorted_logical(self) -> LogicalState:
        """State on the active nodes in ascending node-id order."""
        order = np.argsort(self.nodes)
        t = self.amps.reshape([2] * len(self.nodes))
        t = np.transpose(t, order)
        return LogicalState(t.reshape(-1))


def build_cluster(graph: ClusterGraph) -> LogicalState:
    """All declared nodes initialized and bonded; qubit order = sorted ids."""
    if len(graph.nodes) > NODE_CAP:
        raise ValueError(
            f"cluster has {len(graph.nodes)} nodes, cap is {NODE_CAP}"
        )
    state = ClusterState.empty(graph)
    for node in graph.nodes:
        state = state.with_node(node)
    for a, b in graph.edges:
        state = state.with_bond(a, b)
    return state.sorted_logical()


def initial_cluster_state(graph: ClusterGraph) -> ClusterState:
    """Fully built, unmeasured cluster as a ClusterState (for measure_node)."""
    state = ClusterState.empty(graph)
    for node in graph.nodes:
        state = state.with_node(node)
    for a, b in graph.edges:
        state = state.with_bond(a, b)
    return state


class MeasureResult(NamedTuple):
    outcome: int
    state: ClusterState
    frame: PauliFrame
    effective_angle: float


def _resolve_successor(
    state: ClusterState, instr: MeasurementInstruction, measured: set[int]
) -> int | None:
    if instr.successor is not None:
        if instr.successor == instr.node:
            raise ValueError("a node cannot be its own flow successor")
        if instr.successor in measured or instr.successor not in state.graph.nodes:
            raise ValueError(f"invalid flow successor {instr.successor}")
        return instr.successor
    candidates = [
        k for k in state.graph.neighbors(instr.node) if k not in measured
    ]
    if not candidates:
        return None
    return min(candidates)


def measure_node(
    state: ClusterState,
    instr: MeasurementInstruction,
    outcomes: Mapping[int, int],
    frame: PauliFrame,
    seed,
    force: int | None = None,
) -> MeasureResult:
    """Projectively measure one node and update the byproduct frame."""
    node = instr.node
    i = state.axis(node)
    if node in outcomes:
        raise ValueError(f"node {node} was already measured")
    for ref in instr.adapt:
        if ref not in outcomes:
            raise ValueError(
                f"adaptive sign for node {node} references unmeasured node {ref}"
            )

    if instr.basis == "xy":
        flip = 0
        for ref in instr.adapt:
            flip ^= outcomes[ref]
        eff = -instr.angle if flip else instr.angle
        e = cmath.exp(-1j * eff)
        basis0 = np.array([1.0, e]) * _SQRT_HALF
        basis1 = np.array([1.0, -e]) * _SQRT_HALF
    else:
        eff = 0.0
        basis0 = np.array([1.0, 0.0], dtype=complex)
        basis1 = np.array([0.0, 1.0], dtype=complex)

    n = len(state.nodes)
    t = np.moveaxis(state.amps.reshape([2] * n), i, 0).reshape(2, -1)
    branch0 = basis0.conj() @ t
    branch1 = basis1.conj() @ t
    p0 = float(np.linalg.norm(branch0) ** 2)
    p1 = float(np.linalg.norm(branch1) ** 2)
    total = p0 + p1

    if force is not None:
        outcome = int(force)
        if (p0 if outcome == 0 else p1) < 1e-12:
            raise ValueError(
                f"forced outcome {outcome} on node {node} has probability 0"
            )
    else:
        u = rng_from_seed(seed).random() * total
        outcome = 0 if u < p0 else 1

    raw = branch0 if outcome == 0 else branch1
    prob = p0 if outcome == 0 else p1
    amps = raw / math.sqrt(prob)
    rest_nodes = state.nodes[:i] + state.nodes[i + 1 :]
    new_state = ClusterState(state.graph, rest_nodes, amps.reshape(-1))

    measured = set(outcomes) | {node}
    if instr.basis == "xy":
        s_log = outcome ^ int(frame.z(node))
        new_frame = frame.without(node)
        successor = _resolve_successor(state, instr, measured)
        if successor is not None and s_log:
            new_frame = new_frame.toggled(successor, x=True)
            for k in state.graph.neighbors(successor):
                if k != node and k not in measured:
                    new_frame = new_frame.toggled(k, z=True)
    else:
        s_log = outcome ^ int(frame.x(node))
        new_frame = frame.without(node)
        if s_log:
            for k in state.graph.neighbors(node):
                if k not in measured:
                    new_frame = new_frame.toggled(k, z=True)

    return MeasureResult(outcome, new_state, new_frame, eff)


class PatternResult(NamedTuple):
    output: LogicalState
    transcript: tuple[tuple[int, str, int], ...]
    frame: PauliFrame


def _basis_label(instr: MeasurementInstruction, eff: float) -> str:
    if instr.basis == "z":
        return "z"
    return f"xy:{eff:.12g}"


def _finish(
    state: ClusterState,
    transcript: list[tuple[int, str, int]],
    frame: PauliFrame,
) -> PatternResult:
    corrected = state
    for node, (x, z) in frame.items():
        corrected = corrected.with_pauli(node, x, z)
    return PatternResult(corrected.sorted_logical(), tuple(transcript), frame)


def run_pattern(
    graph: ClusterGraph,
    schedule: Sequence[MeasurementInstruction],
    seed,
    force: Mapping[int, int] | None = None,
) -> PatternResult:
    """Build the whole cluster, run the schedule, apply final corrections.

    `force` pins chosen nodes' outcomes (for exploring all branches);
    unforced nodes sample from the Born rule with the given seed.
    """
    if len(graph.nodes) > NODE_CAP:
        raise ValueError(f"cluster has {len(graph.nodes)} nodes, cap is {NODE_CAP}")
    rng = rng_from_seed(seed)
    state = initial_cluster_state(graph)
    frame = PauliFrame()
    outcomes: dict[int, int] = {}
    transcript: list[tuple[int, str, int]] = []
    for instr in schedule:
        forced = None if force is None else force.get(instr.node)
        result = measure_node(state, instr, outcomes, frame, rng, forced)
        state, frame = result.state, result.frame
        outcomes[instr.node] = result.outcome
        transcript.append((instr.node, _basis_label(instr, result.effective_angle), result.outcome))
    return _finish(state, transcript, frame)


GrowEvent = tuple


def grow_while_measuring(
    graph: ClusterGraph,
    events: Sequence[GrowEvent],
    seed,
    force: Mapping[int, int] | None = None,
) -> PatternResult:
    """Interleave node additions, bonding, and measurement.

    Events: ("add", node), ("bond", a, b), ("measure", instruction).
    Measuring a node whose declared bonds are not all applied yet is an
    ordering error.  With the same seed and measurement order the result
    matches running the schedule on the fully built cluster.
    """
    rng = rng_from_seed(seed)
    state = ClusterState.empty(graph)
    frame = PauliFrame()
    outcomes: dict[int, int] = {}
    transcript: list[tuple[int, str, int]] = []
    bonded: set[tuple[int, int]] = set()

    for event in events:
        tag = event[0]
        if tag == "add":
            state = state.with_node(event[1])
        elif tag == "bond":
            a, b = event[1], event[2]
            e = (min(a, b), max(a, b))
            if e not in graph.edges:
                raise ValueError(f"bond {e} is not a declared edge")
            if e in bonded:
                raise ValueError(f"bond {e} applied twice")
            state = state.with_bond(a, b)
            bonded.add(e)
        elif tag == "measure":
            instr: MeasurementInstruction = event[1]
            pending = [
                e
                for e in graph.edges
                if instr.node in e and e not in bonded
            ]
            if pending:
                raise ValueError(
                    f"node {instr.node} measured before bond(s) {pending} applied"
                )
            forced = None if force is None else force.get(instr.node)
            result = measure_node(state, instr, outcomes, frame, rng, forced)
            state, frame = result.state, result.frame
            outcomes[instr.node] = result.outcome
            transcript.append(
                (instr.node, _basis_label(instr, result.effective_angle), result.outcome)
            )
        else:
            raise ValueError(f"unknown grow event {tag!r}")

    missing_nodes = set(graph.nodes) - set(state.nodes) - set(outcomes)
    if missing_nodes:
        raise ValueError(f"declared nodes never added: {sorted(missing_nodes)}")
    missing_bonds = set(graph.edges) - bonded
    if missing_bonds:
        raise ValueError(f"declared edges never bonded: {sorted(missing_bonds)}")
    return _finish(state, transcript, frame)


def transcript_json(transcript: Sequence[tuple[int, str, int]]) -> list:
    return [[node, basis, outcome] for node, basis, outcome in transcript]


def linear_rotation_pattern(
    alpha: float, beta: float, gamma: float, nodes: Sequence[int] = (0, 1, 2, 3, 4)
) -> tuple[ClusterGraph, list[MeasurementInstruction]]:
    """5-node chain implementing the standard single-qubit rotation.

    Measurement angles are (-alpha, -beta, -gamma, 0) with the standard
    adaptive signs; the corrected output on the last node is the Euler
    composition H Z(0) H Z(-gamma) H Z(-beta) H Z(-alpha) |+> regardless
    of outcomes.
    """
    n0, n1, n2, n3, n4 = nodes
    graph = ClusterGraph(
        nodes=tuple(nodes),
        edges=((n0, n1), (n1, n2), (n2, n3), (n3, n4)),
    )
    schedule = [
        MeasurementInstruction(n0, -alpha, successor=n1),
        MeasurementInstruction(n1, -beta, adapt=(n0,), successor=n2),
        MeasurementInstruction(n2, -gamma, adapt=(n1,), successor=n3),
        MeasurementInstruction(n3, 0.0, adapt=(n0, n2), successor=n4),
    ]
    return graph, schedule
