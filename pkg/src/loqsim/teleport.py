"""Qubit-level teleportation and the teleported-CNOT resource count.

Teleporting through a pre-gated pair turns the gate's nondeterminism
into a repeat-until-success loop on ancilla pairs: the CNOT is attempted
on one half of two fresh entangled pairs, and only after the herald
fires are the input qubits teleported in.  Each attempt consumes both
pairs, the herald fires with probability 1/16, so the expected cost is
2 * 16 = 32 pairs.

Because the CNOT was applied before the teleportation byproducts, the
corrections must be commuted through it: an X on the control side
propagates to X on both outputs, and a Z on the target side propagates
to Z on both outputs; the other two corrections stay where they are.

The teleportation steps here use ideal Bell measurements; only the CNOT
attempt is nondeterministic.  That is exactly the accounting that gives
32.  A bare linear-optics Bell analyzer is also provided: it identifies
the Psi pair and degrades to a computational-basis measurement on the
Phi subspace, succeeding half the time on Bell-uniform inputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .detection import rng_from_seed
from .encoding import LogicalState
from .heralded import conditional_logical_map, klm_cnot

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class BellLabel(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


_BELL_VECTORS = {
    BellLabel.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * _SQRT_HALF,
    BellLabel.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * _SQRT_HALF,
    BellLabel.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * _SQRT_HALF,
    BellLabel.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * _SQRT_HALF,
}

# X and/or Z needed on the receiving qubit after each Bell outcome
_CORRECTION_FOR = {
    BellLabel.PHI_PLUS: (False, False),
    BellLabel.PHI_MINUS: (False, True),
    BellLabel.PSI_PLUS: (True, False),
    BellLabel.PSI_MINUS: (True, True),
}


@dataclass(frozen=True)
class PauliCorrection:
    """Deferred X/Z byproduct on one qubit; composition is exclusive-or."""

    x_flip: bool
    z_flip: bool

    def compose(self, other: "PauliCorrection") -> "PauliCorrection":
        return PauliCorrection(
            self.x_flip ^ other.x_flip, self.z_flip ^ other.z_flip
        )

    def apply(self, state: LogicalState, qubit: int = 0) -> LogicalState:
        out = state
        if self.x_flip:
            out = out.apply(_X, (qubit,))
        if self.z_flip:
            out = out.apply(_Z, (qubit,))
        return out


@dataclass(frozen=True)
class FailureRecord:
    """Failed Bell analysis: the pair was measured in the 0/1 basis."""

    bits: tuple[int, int]


@dataclass(frozen=True)
class ResourceTally:
    attempts: int
    entangled_pairs_consumed: int

    def __post_init__(self):
        if self.entangled_pairs_consumed != 2 * self.attempts:
            raise ValueError("the CNOT protocol consumes 2 pairs per attempt")


def bell_pair() -> LogicalState:
    """(|00> + |11>) / sqrt(2)."""
    return LogicalState(_BELL_VECTORS[BellLabel.PHI_PLUS])


def _pair_coefficients(
    state: LogicalState, qubits: tuple[int, int]
) -> np.ndarray:
    """Amplitudes reshaped to (4, rest) with the measured pair in front."""
    i, j = qubits
    if i == j or not (0 <= i < state.n and 0 <= j < state.n):
        raise ValueError(f"invalid qubit pair {qubits} for {state.n} qubits")
    t = state.amps.reshape([2] * state.n)
    t = np.moveaxis(t, (i, j), (0, 1))
    return t.reshape(4, -1)


def _project_outcomes(
    state: LogicalState,
    qubits: tuple[int, int],
    projectors: list[tuple[object, np.ndarray]],
    seed,
    force=None,
) -> tuple[object, LogicalState, float]:
    coeffs = _pair_coefficients(state, qubits)
    residuals = [(label, vec.conj() @ coeffs) for label, vec in projectors]
    probs = [float(np.linalg.norm(r) ** 2) for _, r in residuals]

    if force is not None:
        for (label, r), p in zip(residuals, probs):
            if label == force:
                if p < 1e-12:
                    raise ValueError(f"forced outcome {force} has probability 0")
                return label, _residual_state(r, p), p
        raise ValueError(f"unknown forced outcome {force!r}")

    rng = rng_from_seed(seed)
    u = rng.random() * sum(probs)
    acc = 0.0
    for (label, r), p in zip(residuals, probs):
        acc += p
        if u < acc and p > 0.0:
            return label, _residual_state(r, p), p
    for (label, r), p in reversed(list(zip(residuals, probs))):
        if p > 0.0:
            return label, _residual_state(r, p), p
    raise ValueError("state has no support on the measurement outcomes")


def _residual_state(raw: np.ndarray, prob: float) -> LogicalState:
    return LogicalState(raw / math.sqrt(prob))


def bell_measure_ideal(
    state: LogicalState,
    qubits: tuple[int, int],
    seed,
    force: BellLabel | None = None,
) -> tuple[BellLabel, LogicalState]:
    """Projective Bell measurement; returns the remaining qubits' state."""
    projectors = [(label, vec) for label, vec in _BELL_VECTORS.items()]
    label, residual, _ = _project_outcomes(state, qubits, projectors, seed, force)
    return label, residual


def bell_measure_linear_optics(
    state: LogicalState,
    qubits: tuple[int, int],
    seed,
    force=None,
) -> tuple[BellLabel | FailureRecord, LogicalState]:
    """Bell analysis with linear-optics failure semantics.

    Psi+ and Psi- are identified deterministically; the Phi subspace is
    indistinguishable and collapses to a computational-basis readout,
    reported as a FailureRecord with bits (0,0) or (1,1).
    """
    e00 = np.array([1, 0, 0, 0], dtype=complex)
    e11 = np.array([0, 0, 0, 1], dtype=complex)
    projectors = [
        (BellLabel.PSI_PLUS, _BELL_VECTORS[BellLabel.PSI_PLUS]),
        (BellLabel.PSI_MINUS, _BELL_VECTORS[BellLabel.PSI_MINUS]),
        (FailureRecord((0, 0)), e00),
        (FailureRecord((1, 1)), e11),
    ]
    label, residual, _ = _project_outcomes(state, qubits, projectors, seed, force)
    return label, residual


def teleport_qubit(
    state: LogicalState,
    seed,
    force: BellLabel | None = None,
) -> tuple[LogicalState, PauliCorrection]:
    """Teleport one qubit through a fresh Bell pair and correct it.

    The corrected output equals the input up to global phase for every
    Bell outcome; the returned correction is the one that was applied.
    """
    if state.n != 1:
        raise ValueError("teleport_qubit takes a single-qubit state")
    joint = state.tensor(bell_pair())
    label, residual = bell_measure_ideal(joint, (0, 1), seed, force)
    x, z = _CORRECTION_FOR[label]
    correction = PauliCorrection(x, z)
    return correction.apply(residual), correction


# ---------------------------------------------------------------------------
# teleported CNOT
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _cnot_resource() -> tuple[float, np.ndarray]:
    """Herald probability and unit logical action of the photonic CNOT.

    The full 8-mode/4-photon network is simulated once; the conditional
    map is proportional to a unitary, so sampling the herald and applying
    the extracted action is exact for any input, entangled ones included.
    """
    m = conditional_logical_map(klm_cnot())
    norms = np.linalg.norm(m, axis=0)
    p = float(np.mean(norms**2))
    return p, m / math.sqrt(p)


def teleported_cnot(
    control: LogicalState,
    target: LogicalState,
    seed,
    force_attempts: int | None = None,
    force_bells: tuple[BellLabel, BellLabel] | None = None,
) -> tuple[LogicalState, ResourceTally]:
    """Repeat-until-success CNOT via gate teleportation.

    Per attempt two fresh Bell pairs are drawn and the photonic CNOT is
    attempted on one half of each (herald sampled at its simulated
    probability).  After success the inputs are teleported through the
    pre-gated pairs with ideal Bell measurements and the commuted
    correction set is applied.
    """
    if control.n != 1 or target.n != 1:
        raise ValueError("teleported_cnot takes two single-qubit states")
    p_success, gate_action = _cnot_resource()
    rng = rng_from_seed(seed)

    if force_attempts is not None:
        attempts = int(force_attempts)
    else:
        attempts = 1
        while rng.random() >= p_success:
            attempts += 1

    # qubits: 0 = control in, (1, 2) = pair A, 3 = target in, (4, 5) = pair B
    state = control.tensor(bell_pair()).tensor(target).tensor(bell_pair())
    state = state.apply(gate_action, (2, 5))

    force_c = force_bells[0] if force_bells else None
    force_t = force_bells[1] if force_bells else None
    label_c, state = bell_measure_ideal(state, (0, 1), rng, force_c)
    # remaining qubit order: (a2, target in, b1, b2)
    label_t, state = bell_measure_ideal(state, (1, 2), rng, force_t)
    # remaining qubit order: (a2, b2) = (control out, target out)

    xc, zc = _CORRECTION_FOR[label_c]
    xt, zt = _CORRECTION_FOR[label_t]
    control_fix = PauliCorrection(xc, zc ^ zt)
    target_fix = PauliCorrection(xc ^ xt, zt)
    state = control_fix.apply(state, 0)
    state = target_fix.apply(state, 1)

    return state, ResourceTally(attempts, 2 * attempts)


def cnot_matrix() -> np.ndarray:
    """Reference CNOT (control = qubit 0) for output checks."""
    return np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        dtype=complex,
    )
