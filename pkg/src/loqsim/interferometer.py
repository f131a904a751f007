"""Linear-optical elements, mode unitaries, and multi-photon evolution.

Mode-matrix conventions (fixed for the whole package):

  * beamsplitter(a, b, R): with t = sqrt(1-R), r = sqrt(R), the block on
    (a, b) is [[t, i*r], [i*r, t]].  The i on reflection makes r*r = -t*t
    at R = 1/2, which is exactly the two-photon cancellation of the
    Hong-Ou-Mandel effect.
  * phase(m, phi): multiplies mode m by exp(i*phi) per photon.
  * hwp(pair, theta): half-wave plate on polarization pair k, i.e. modes
    (2k, 2k+1) = (H, V); block [[cos2t, sin2t], [sin2t, -cos2t]].
    theta = 22.5 deg gives the Hadamard matrix, 45 deg gives H<->V.
  * qwp(pair, theta): quarter-wave retarder diag(1, i) rotated by theta.
  * pbs(pair_a, pair_b): transmits H (identity on modes 2a, 2b), reflects
    V (swaps modes 2a+1 and 2b+1).
  * swap(a, b): mode permutation.

A photon in mode i is sent to sum_j U[j, i] |j>, so single-photon
amplitudes transform as an ordinary matrix-vector product.  Multi-photon
transition amplitudes are matrix permanents:

    <T|U|S> = perm(U[S, T]) / sqrt(prod_i S_i! * prod_j T_j!)

where U[S, T] repeats column i S_i times and row j T_j times.  `apply`
enumerates output occupations within each photon-number sector, in
lexicographic order, so evolution is deterministic and exactly
number-conserving.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .fock import Occupation, PhotonicState

UNITARITY_TOL = 1e-10


# ---------------------------------------------------------------------------
# optical elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OpticalElement:
    """One passive linear element; `modes` are the raw mode indices touched."""

    kind: str
    modes: tuple[int, ...]
    value: float = 0.0

    def __post_init__(self):
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"element modes must be distinct, got {self.modes}")
        if any(m < 0 for m in self.modes):
            raise ValueError(f"element modes must be >= 0, got {self.modes}")
        if not math.isfinite(self.value):
            raise ValueError("element parameter must be finite")
        if self.kind == "bs" and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"reflectivity must lie in [0, 1], got {self.value}")


def beamsplitter(mode_a: int, mode_b: int, reflectivity: float) -> OpticalElement:
    return OpticalElement("bs", (mode_a, mode_b), float(reflectivity))


def phase(mode: int, phi: float) -> OpticalElement:
    return OpticalElement("phase", (mode,), float(phi))


def hwp(pair: int, theta: float) -> OpticalElement:
    """Half-wave plate at angle theta (radians) on polarization pair `pair`."""
    return OpticalElement("hwp", (2 * pair, 2 * pair + 1), float(theta))


def qwp(pair: int, theta: float) -> OpticalElement:
    return OpticalElement("qwp", (2 * pair, 2 * pair + 1), float(theta))


def pbs(pair_a: int, pair_b: int) -> OpticalElement:
    if pair_a == pair_b:
        raise ValueError("pbs needs two distinct polarization pairs")
    return OpticalElement(
        "pbs", (2 * pair_a, 2 * pair_a + 1, 2 * pair_b, 2 * pair_b + 1)
    )


def swap(mode_a: int, mode_b: int) -> OpticalElement:
    return OpticalElement("swap", (mode_a, mode_b))


# ---------------------------------------------------------------------------
# mode unitaries
# ---------------------------------------------------------------------------

class ModeUnitary:
    """Complex matrix over optical modes, validated unitary on construction."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("mode unitary must be a square matrix")
        dev = np.abs(m @ m.conj().T - np.eye(m.shape[0]))
        if dev.size and dev.max() > UNITARITY_TOL:
            raise ValueError(
                f"matrix is not unitary (max deviation {dev.max():.3g})"
            )
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "ModeUnitary") -> "ModeUnitary":
        return ModeUnitary(self.matrix @ other.matrix)

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.matrix.conj().T)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "matrix": [
                [[z.real, z.imag] for z in row] for row in self.matrix
            ],
        }

    @staticmethod
    def from_json_dict(data: dict) -> "ModeUnitary":
        m = np.array(
            [[complex(re, im) for re, im in row] for row in data["matrix"]]
        )
        return ModeUnitary(m)


def _two_mode_block(kind: str, value: float) -> np.ndarray:
    if kind == "bs":
        t = math.sqrt(1.0 - value)
        r = math.sqrt(value)
        return np.array([[t, 1j * r], [1j * r, t]])
    if kind == "hwp":
        c, s = math.cos(2 * value), math.sin(2 * value)
        return np.array([[c, s], [s, -c]], dtype=complex)
    if kind == "qwp":
        c, s = math.cos(value), math.sin(value)
        rot = np.array([[c, -s], [s, c]], dtype=complex)
        return rot @ np.diag([1.0, 1j]) @ rot.T
    if kind == "swap":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    raise ValueError(f"unknown two-mode element kind {kind!r}")


def element_unitary(element: OpticalElement, total_modes: int) -> ModeUnitary:
    """Embed one element into the identity on `total_modes` modes."""
    if any(m >= total_modes for m in element.modes):
        raise ValueError(
            f"element touches mode {max(element.modes)} but only "
            f"{total_modes} modes are declared"
        )
    u = np.eye(total_modes, dtype=complex)
    if element.kind == "phase":
        u[element.modes[0], element.modes[0]] = cmath.exp(1j * element.value)
    elif element.kind == "pbs":
        ha, va, hb, vb = element.modes
        # H transmits, V reflects across the two spatial ports
        u[va, va] = u[vb, vb] = 0.0
        u[va, vb] = u[vb, va] = 1.0
    else:
        block = _two_mode_block(element.kind, element.value)
        a, b = element.modes
        u[a, a], u[a, b] = block[0, 0], block[0, 1]
        u[b, a], u[b, b] = block[1, 0], block[1, 1]
    return ModeUnitary(u)


def compose(elements: Sequence[OpticalElement], total_modes: int) -> ModeUnitary:
    """Product unitary of an element list, leftmost element applied first."""
    u = np.eye(total_modes, dtype=complex)
    for e in elements:
        u = element_unitary(e, total_modes).matrix @ u
    return ModeUnitary(u)


def rotation_elements(
    mode_a: int, mode_b: int, theta: float
) -> list[OpticalElement]:
    """Elements composing to the real rotation [[c, -s], [s, c]] on (a, b).

    The symmetric beamsplitter convention has an i on reflection; a phase
    sandwich turns it into a real rotation, and pi phases absorb the sign
    for angles outside [0, pi/2].  Used by gate constructions whose known
    parameter sets are quoted in the rotation convention.
    """
    th = math.fmod(theta, 2 * math.pi)
    if th < 0:
        th += 2 * math.pi
    flip = False
    if th >= math.pi:
        th -= math.pi
        flip = not flip
    if th <= math.pi / 2:
        elems = [
            phase(mode_b, math.pi / 2),
            beamsplitter(mode_a, mode_b, math.sin(th) ** 2),
            phase(mode_b, -math.pi / 2),
        ]
    else:
        th = math.pi - th
        flip = not flip
        elems = [
            phase(mode_b, -math.pi / 2),
            beamsplitter(mode_a, mode_b, math.sin(th) ** 2),
            phase(mode_b, math.pi / 2),
        ]
    if flip:
        elems += [phase(mode_a, math.pi), phase(mode_b, math.pi)]
    return elems


# ---------------------------------------------------------------------------
# permanents
# ---------------------------------------------------------------------------

def permanent(matrix) -> complex:
    """Matrix permanent via Ryser's formula with Gray-code subset iteration.

    Cost O(2^n * n); exact to rounding for the desk-scale n used here.
    perm of the empty 0x0 matrix is 1 (vacuum amplitude).
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("permanent needs a square matrix")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])
    cols = [[complex(a[i, j]) for i in range(n)] for j in range(n)]
    row_sums = [0j] * n
    total = 0j
    sign = 1
    old_gray = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        diff = gray ^ old_gray
        j = diff.bit_length() - 1
        col = cols[j]
        if gray & diff:
            for i in range(n):
                row_sums[i] += col[i]
        else:
            for i in range(n):
                row_sums[i] -= col[i]
        sign = -sign
        prod = 1.0 + 0j
        for v in row_sums:
            prod *= v
        total += sign * prod
        old_gray = gray
    if n % 2:
        total = -total
    return total


# ---------------------------------------------------------------------------
# multi-photon evolution
# ---------------------------------------------------------------------------

def compositions(n: int, m: int) -> Iterator[Occupation]:
    """All occupation vectors of n photons over m modes, lexicographic."""
    if m == 0:
        if n == 0:
            yield ()
        return
    if m == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, m - 1):
            yield (first,) + rest


def _repeat_indices(occ: Occupation) -> list[int]:
    out: list[int] = []
    for idx, count in enumerate(occ):
        out.extend([idx] * count)
    return out


def _sqrt_factorial_product(occ: Occupation) -> float:
    prod = 1
    for c in occ:
        prod *= math.factorial(c)
    return math.sqrt(prod)


def apply(u: ModeUnitary, state: PhotonicState) -> PhotonicState:
    """Evolve a Fock-space state through a mode unitary.

    Each photon-number sector evolves independently; the total photon
    number of every term is preserved exactly.
    """
    if u.dim != state.mode_count:
        raise ValueError(
            f"unitary acts on {u.dim} modes, state has {state.mode_count}"
        )
    m = state.mode_count
    sectors: dict[int, list[tuple[Occupation, complex]]] = {}
    for occ, amp in state.terms.items():
        sectors.setdefault(sum(occ), []).append((occ, amp))

    out: dict[Occupation, complex] = {}
    for n, terms in sorted(sectors.items()):
        targets = list(compositions(n, m))
        target_rows = [_repeat_indices(t) for t in targets]
        target_norms = [_sqrt_factorial_product(t) for t in targets]
        for occ, amp in terms:
            cols = _repeat_indices(occ)
            u_cols = u.matrix[:, cols]
            scale = amp / _sqrt_factorial_product(occ)
            for t_occ, rows, t_norm in zip(targets, target_rows, target_norms):
                sub = u_cols[rows, :]
                contrib = scale * permanent(sub) / t_norm
                if contrib != 0j:
                    out[t_occ] = out.get(t_occ, 0j) + contrib
    return PhotonicState(m, out)


# ---------------------------------------------------------------------------
# two-photon interference
# ---------------------------------------------------------------------------

def hom_coincidence(reflectivity: float, overlap: float) -> float:
    """Coincidence probability for one photon per input of a beamsplitter.

    Wavepacket overlap x interpolates between fully indistinguishable
    photons (weight x^2, amplitudes interfere, coincidence |t*t + (ir)^2|^2)
    and fully distinguishable ones (weight 1 - x^2, probabilities add,
    coincidence t^4 + r^4).  At R = 1/2 this is (1 - x^2) / 2.
    """
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must lie in [0, 1], got {reflectivity}")
    if not 0.0 <= overlap <= 1.0:
        raise ValueError(f"overlap must lie in [0, 1], got {overlap}")
    r2 = reflectivity
    t2 = 1.0 - reflectivity
    quantum = (t2 - r2) ** 2
    classical = t2 * t2 + r2 * r2
    x2 = overlap * overlap
    return x2 * quantum + (1.0 - x2) * classical
