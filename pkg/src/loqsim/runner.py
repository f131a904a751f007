"""Execute experiment specs and emit deterministic reports.

A report is a column/row table plus an ordered aggregate section; both
the JSON and CSV encodings carry the same values, the seed, and the
artifact version.  CSV uses RFC-4180 quoting, '.' decimals, and 17
significant digits so doubles round-trip losslessly; identical spec and
seed give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .cluster import ClusterGraph, MeasurementInstruction, run_pattern
from .detection import (
    DetectorModel,
    HeraldPattern,
    derive_rng,
    herald,
    measure_all,
)
from .dsl import ElementSpec, ExperimentSpec, SpecError
from .encoding import QubitEncoding, decode
from .fock import PhotonicState, make_basis_state
from .heralded import HeraldedGate, klm_cnot, run_photonic
from .interferometer import (
    apply,
    beamsplitter,
    compose,
    hom_coincidence,
    hwp,
    pbs,
    phase,
    qwp,
    swap,
)
from .teleport import cnot_matrix, teleported_cnot
from .encoding import LogicalState


@dataclass
class Report:
    mode: str
    columns: list[str]
    rows: list[list]
    aggregate: list[tuple[str, object]]
    seed: int

    def to_json_text(self) -> str:
        payload = {
            "version": __version__,
            "seed": self.seed,
            "mode": self.mode,
            "columns": self.columns,
            "rows": [[_json_value(v) for v in row] for row in self.rows],
            "aggregate": {k: _json_value(v) for k, v in self.iter_aggregate()},
        }
        return json.dumps(payload, indent=2) + "\n"

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_csv_value(v) for v in row])
        writer.writerow([])
        writer.writerow(["metric", "value"])
        for key, value in self.iter_aggregate():
            writer.writerow([key, _csv_value(value)])
        return buf.getvalue()

    def iter_aggregate(self):
        yield "version", __version__
        yield "seed", self.seed
        yield "mode", self.mode
        yield from self.aggregate


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _csv_value(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def format_report(report: Report, fmt: str) -> str:
    if fmt == "csv":
        return report.to_csv_text()
    return report.to_json_text()


# ---------------------------------------------------------------------------
# lowering
# ---------------------------------------------------------------------------

def lower_elements(specs: tuple[ElementSpec, ...]):
    elements = []
    for e in specs:
        if e.kind == "bs":
            a, b, r = e.params
            elements.append(beamsplitter(a, b, r))
        elif e.kind == "phase":
            m, deg = e.params
            elements.append(phase(m, math.radians(deg)))
        elif e.kind == "hwp":
            p, deg = e.params
            elements.append(hwp(p, math.radians(deg)))
        elif e.kind == "qwp":
            p, deg = e.params
            elements.append(qwp(p, math.radians(deg)))
        elif e.kind == "pbs":
            p, q = e.params
            elements.append(pbs(p, q))
        else:
            raise SpecError(f"unknown element kind {e.kind!r}", e.line, e.col)
    return elements


def _cluster_parts(spec: ExperimentSpec):
    c = spec.cluster
    graph = ClusterGraph(tuple(range(c.node_count)), c.edges)
    schedule = [
        MeasurementInstruction(
            m.node,
            math.radians(m.angle_deg),
            basis=m.basis,
            adapt=m.adapt,
            successor=m.successor,
        )
        for m in c.measures
    ]
    return graph, schedule


def _gate_for(spec: ExperimentSpec) -> HeraldedGate:
    gate = klm_cnot()
    if spec.gate.control == 0:
        return gate
    # reversed roles: conjugate the network by a dual-rail qubit swap
    swaps = (swap(0, 2), swap(1, 3))
    return HeraldedGate(
        name="klm_cnot_reversed",
        total_modes=gate.total_modes,
        io_modes=gate.io_modes,
        network=swaps + gate.network + swaps,
        ancilla_occupations=gate.ancilla_occupations,
        herald=gate.herald,
        logical_io=gate.logical_io,
    )


def _logical_json(state: LogicalState | None) -> str:
    if state is None:
        return ""
    return json.dumps(state.to_json_dict())


# ---------------------------------------------------------------------------
# run modes
# ---------------------------------------------------------------------------

def run(
    spec: ExperimentSpec,
    seed: int | None = None,
    trials: int | None = None,
) -> Report:
    """Dispatch a parsed spec; overrides replace the spec's own values."""
    eff_seed = spec.seed if seed is None else int(seed)
    eff_trials = spec.trials if trials is None else int(trials)

    if spec.sweep is not None:
        return _run_sweep(spec, eff_seed)
    if eff_trials is not None:
        return _run_monte_carlo(spec, eff_seed, eff_trials)
    return _run_single(spec, eff_seed)


def _evolved(spec: ExperimentSpec) -> PhotonicState:
    state = make_basis_state(spec.input_occupations)
    u = compose(lower_elements(spec.elements), spec.modes)
    return apply(u, state)


def _run_single(spec: ExperimentSpec, seed: int) -> Report:
    if spec.cluster is not None:
        graph, schedule = _cluster_parts(spec)
        result = run_pattern(graph, schedule, seed)
        rows = [[node, basis, outcome] for node, basis, outcome in result.transcript]
        agg = [
            ("output_state", _logical_json(result.output)),
            ("frame", json.dumps(
                {str(n): [int(x), int(z)] for n, (x, z) in result.frame.items()}
            )),
        ]
        return Report("single", ["node", "basis", "outcome"], rows, agg, seed)

    if spec.gate is not None:
        io_state = _evolved(spec)
        gate = _gate_for(spec)
        record = run_photonic(gate, io_state, DetectorModel())
        logical_in, leak_in = decode(io_state, QubitEncoding.dual_rail(2))
        if logical_in is None or leak_in > 1e-9:
            raise ValueError(
                "gate input is not a dual-rail state (one photon per rail pair)"
            )
        logical_out, leakage = decode(record.residual_state, gate.logical_io)
        rows = [[
            "".join(str(b) for b in _basis_bits(logical_in)),
            record.probability,
            leakage,
            _logical_json(logical_out),
        ]]
        agg = [("herald_probability", record.probability)]
        return Report(
            "single",
            ["input", "success_probability", "leakage", "logical_output"],
            rows,
            agg,
            seed,
        )

    out = _evolved(spec)
    if spec.herald is not None:
        record = herald(out, HeraldPattern(spec.herald))
        rows = [[record.probability]]
        agg = [
            ("outcome", json.dumps({str(m): c for m, c in record.outcome})),
            ("residual", record.residual_state.to_json()),
        ]
        return Report("single", ["probability"], rows, agg, seed)

    rows = []
    for occ, amp in out.items():
        rows.append([
            " ".join(str(n) for n in occ),
            amp.real,
            amp.imag,
            abs(amp) ** 2,
        ])
    return Report(
        "single",
        ["occupation", "re", "im", "probability"],
        rows,
        [("norm_squared", out.norm_squared())],
        seed,
    )


def _basis_bits(state: LogicalState) -> list[int]:
    idx = int(np.argmax(np.abs(state.amps)))
    return [(idx >> (state.n - 1 - q)) & 1 for q in range(state.n)]


def _run_sweep(spec: ExperimentSpec, seed: int) -> Report:
    sw = spec.sweep
    values = np.linspace(sw.start, sw.stop, sw.steps)
    rows = []
    if sw.param == "overlap":
        bs_spec = next(e for e in spec.elements if e.kind == "bs")
        reflectivity = bs_spec.params[2]
        for x in values:
            rows.append([float(x), hom_coincidence(reflectivity, float(x))])
        columns = ["overlap", "coincidence_probability"]
    elif sw.param == "eta":
        out = _evolved(spec)
        pattern = HeraldPattern(spec.herald)
        for eta in values:
            record = herald(out, pattern, DetectorModel(efficiency=float(eta)))
            rows.append([float(eta), record.probability])
        columns = ["eta", "herald_probability"]
    else:
        k = int(sw.param[1:])
        pattern = HeraldPattern(spec.herald)
        for r in values:
            elements = []
            bs_index = 0
            for e in spec.elements:
                if e.kind == "bs":
                    if bs_index == k:
                        e = ElementSpec("bs", (e.params[0], e.params[1], float(r)))
                    bs_index += 1
                elements.append(e)
            state = make_basis_state(spec.input_occupations)
            u = compose(lower_elements(tuple(elements)), spec.modes)
            record = herald(apply(u, state), pattern)
            rows.append([float(r), record.probability])
        columns = ["reflectivity", "herald_probability"]
    return Report("sweep", columns, rows, [("steps", sw.steps)], seed)


def _run_monte_carlo(spec: ExperimentSpec, seed: int, trials: int) -> Report:
    if spec.cluster is not None:
        graph, schedule = _cluster_parts(spec)
        rows = []
        for i in range(trials):
            result = run_pattern(graph, schedule, derive_rng(seed, i))
            bits = "".join(str(o) for _n, _b, o in result.transcript)
            rows.append([i, bits])
        return Report(
            "monte-carlo", ["trial", "outcomes"], rows, [("trials", trials)], seed
        )

    if spec.gate is not None:
        io_state = _evolved(spec)
        record = run_photonic(_gate_for(spec), io_state, DetectorModel())
        p = record.probability
        rows = []
        successes = 0
        for i in range(trials):
            hit = int(derive_rng(seed, i).random() < p)
            successes += hit
            rows.append([i, hit])
        agg = [
            ("herald_probability", p),
            ("success_rate", successes / trials),
            ("trials", trials),
        ]
        return Report("monte-carlo", ["trial", "success"], rows, agg, seed)

    out = _evolved(spec)
    norm2 = out.norm_squared()
    if abs(norm2 - 1.0) > 1e-9:
        raise ValueError("monte-carlo sampling needs a normalized pipeline output")
    pattern = HeraldPattern(spec.herald) if spec.herald is not None else None
    rows = []
    matches = 0
    for i in range(trials):
        occ, _p = measure_all(out, derive_rng(seed, i))
        row = [i, " ".join(str(n) for n in occ)]
        if pattern is not None:
            ok = int(all(occ[m] == c for m, c in pattern.counts))
            matches += ok
            row.append(ok)
        rows.append(row)
    columns = ["trial", "outcome"] + (["matched"] if pattern else [])
    agg = [("trials", trials)]
    if pattern is not None:
        agg.append(("match_rate", matches / trials))
    return Report("monte-carlo", columns, rows, agg, seed)


# ---------------------------------------------------------------------------
# canned experiments (CLI convenience subcommands)
# ---------------------------------------------------------------------------

def hom_report(steps: int = 11, seed: int = 0) -> Report:
    """Coincidence vs wavepacket overlap at R = 1/2, plus the exact null."""
    rows = [
        [float(x), hom_coincidence(0.5, float(x))]
        for x in np.linspace(0.0, 1.0, steps)
    ]
    out = apply(compose([beamsplitter(0, 1, 0.5)], 2), make_basis_state([1, 1]))
    record = herald(out, HeraldPattern.from_dict({0: 1, 1: 1}))
    agg = [("photonic_null_probability", record.probability)]
    return Report("sweep", ["overlap", "coincidence_probability"], rows, agg, seed)


def cnot_herald_report(seed: int = 0) -> Report:
    """Herald probability and logical action for the four basis inputs."""
    from .heralded import run_heralded

    gate = klm_cnot()
    cnot = cnot_matrix()
    rows = []
    for index in range(4):
        bits = format(index, "02b")
        result = run_heralded(gate, LogicalState.from_bits(bits))
        expected = LogicalState(cnot @ LogicalState.from_bits(bits).amps)
        overlap = (
            result.logical_action.overlap(expected)
            if result.logical_action is not None
            else 0.0
        )
        rows.append([bits, result.probability, result.leakage, overlap])
    probs = [r[1] for r in rows]
    agg = [
        ("min_probability", min(probs)),
        ("max_probability", max(probs)),
        ("failure_probability", 1.0 - probs[0]),
    ]
    return Report(
        "single",
        ["input", "success_probability", "leakage", "overlap_with_cnot"],
        rows,
        agg,
        seed,
    )


def teleport_cnot_report(trials: int, seed: int) -> Report:
    """Monte Carlo of the teleported CNOT on random product inputs."""
    rows = []
    total_pairs = 0
    min_overlap = 1.0
    cnot = cnot_matrix()
    for i in range(trials):
        rng = derive_rng(seed, i)
        c = _random_qubit(rng)
        t = _random_qubit(rng)
        output, tally = teleported_cnot(c, t, rng)
        expected = LogicalState(cnot @ c.tensor(t).amps)
        overlap = output.overlap(expected)
        total_pairs += tally.entangled_pairs_consumed
        min_overlap = min(min_overlap, overlap)
        rows.append([i, tally.attempts, tally.entangled_pairs_consumed, overlap])
    agg = [
        ("trials", trials),
        ("mean_pairs", total_pairs / trials),
        ("mean_attempts", total_pairs / trials / 2.0),
        ("min_overlap", min_overlap),
    ]
    return Report(
        "monte-carlo", ["trial", "attempts", "pairs", "overlap"], rows, agg, seed
    )


def _random_qubit(rng) -> LogicalState:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return LogicalState(v / np.linalg.norm(v))


def cluster_demo_report(
    alpha_deg: float = 50.0,
    beta_deg: float = -35.0,
    gamma_deg: float = 20.0,
    seed: int = 0,
) -> Report:
    """Run the 5-node linear-cluster rotation and check it against the
    circuit-model product of the same angles."""
    from .cluster import linear_rotation_pattern

    a, b, g = (math.radians(x) for x in (alpha_deg, beta_deg, gamma_deg))
    graph, schedule = linear_rotation_pattern(a, b, g)
    result = run_pattern(graph, schedule, seed)

    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

    def hz(angle):
        return hadamard @ np.diag([1.0, np.exp(1j * angle)])

    oracle = hz(0.0) @ hz(-g) @ hz(-b) @ hz(-a) @ np.array([1, 1]) / math.sqrt(2)
    oracle_state = LogicalState(oracle / np.linalg.norm(oracle))
    rows = [[node, basis, outcome] for node, basis, outcome in result.transcript]
    agg = [
        ("alpha_deg", float(alpha_deg)),
        ("beta_deg", float(beta_deg)),
        ("gamma_deg", float(gamma_deg)),
        ("output_state", _logical_json(result.output)),
        ("oracle_overlap", result.output.overlap(oracle_state)),
    ]
    return Report("single", ["node", "basis", "outcome"], rows, agg, seed)
