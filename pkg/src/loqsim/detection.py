"""Photon counting, heralding/post-selection, and detector imperfections.

Detector loss is modeled as binomial thinning at measurement time: each
photon arriving at a measured mode registers independently with
probability eta, and the herald probability sums over all loss patterns
consistent with the observed counts.  No loss modes are added to the
interferometer, so the pre-detection state stays pure.

The residual state of a record is the dominant loss-free detection branch
(for ideal number-resolving detectors this is exact: the observed counts
identify a unique branch).  Terms whose measured-mode counts differ are
distinguishable once the detectors fire, so they never re-interfere.

Monte Carlo sampling uses numpy's seedable PCG64 generator; parallel
trials derive independent streams from (seed, trial_index) so results do
not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .fock import Occupation, PhotonicState

PROB_TOL = 1e-12


@dataclass(frozen=True)
class DetectorModel:
    """efficiency in [0, 1]; number_resolving=False gives threshold clicks."""

    efficiency: float = 1.0
    number_resolving: bool = True

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(
                f"detector efficiency must lie in [0, 1], got {self.efficiency}"
            )


IDEAL_DETECTOR = DetectorModel()


@dataclass(frozen=True)
class HeraldPattern:
    """Required counts per measured mode.

    With threshold detectors a required count of 0 means "no click" and
    any required count >= 1 means "click".
    """

    counts: tuple[tuple[int, int], ...]

    def __post_init__(self):
        modes = [m for m, _ in self.counts]
        if not modes:
            raise ValueError("herald pattern must measure at least one mode")
        if len(set(modes)) != len(modes):
            raise ValueError("herald pattern modes must be distinct")
        if any(c < 0 for _, c in self.counts):
            raise ValueError("herald pattern counts must be >= 0")
        object.__setattr__(self, "counts", tuple(sorted(self.counts)))

    @staticmethod
    def from_dict(assignments: Mapping[int, int]) -> "HeraldPattern":
        return HeraldPattern(tuple((int(m), int(c)) for m, c in assignments.items()))

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.counts)

    def as_dict(self) -> dict[int, int]:
        return dict(self.counts)


@dataclass(frozen=True)
class DetectionRecord:
    outcome: tuple[tuple[int, int], ...]
    probability: float
    residual_state: PhotonicState

    def outcome_dict(self) -> dict[int, int]:
        return dict(self.outcome)

    def to_json_dict(self) -> dict:
        return {
            "outcome": {str(m): c for m, c in self.outcome},
            "prob": self.probability,
            "residual": self.residual_state.to_json_dict(),
        }


def _detect_prob(required: int, true_count: int, d: DetectorModel) -> float:
    eta = d.efficiency
    if d.number_resolving:
        if required > true_count:
            return 0.0
        return (
            math.comb(true_count, required)
            * eta**required
            * (1.0 - eta) ** (true_count - required)
        )
    if required == 0:
        return (1.0 - eta) ** true_count
    return 1.0 - (1.0 - eta) ** true_count


def _split_groups(
    state: PhotonicState, modes: tuple[int, ...]
) -> dict[tuple[int, ...], dict[Occupation, complex]]:
    """Group terms by their counts on the measured modes."""
    mode_set = set(modes)
    groups: dict[tuple[int, ...], dict[Occupation, complex]] = {}
    for occ, amp in state.terms.items():
        measured = tuple(occ[m] for m in modes)
        rest = tuple(n for i, n in enumerate(occ) if i not in mode_set)
        groups.setdefault(measured, {})[rest] = amp
    return groups


def _loss_free_match(
    measured: tuple[int, ...], required: tuple[int, ...], d: DetectorModel
) -> bool:
    if d.number_resolving:
        return measured == required
    return all(
        (t == 0) == (r == 0) for t, r in zip(measured, required)
    )


def herald(
    state: PhotonicState, pattern: HeraldPattern, detector: DetectorModel = IDEAL_DETECTOR
) -> DetectionRecord:
    """Project onto a detection pattern; keep the unmeasured modes.

    The probability is the squared norm of the selected component before
    renormalization (so sub-normalized post-selected inputs compose).  A
    zero-probability herald is a valid record with an empty residual, not
    an error: parameter sweeps legitimately cross zeros.
    """
    modes = pattern.modes
    if any(m >= state.mode_count for m in modes):
        raise ValueError(
            f"herald pattern measures mode {max(modes)} but the state has "
            f"{state.mode_count} modes"
        )
    required = tuple(c for _, c in pattern.counts)
    groups = _split_groups(state, modes)

    probability = 0.0
    best_group: dict[Occupation, complex] | None = None
    best_weight = -1.0
    best_counts: tuple[int, ...] | None = None
    for measured, terms in sorted(groups.items()):
        weight = sum(abs(a) ** 2 for a in terms.values())
        factor = 1.0
        for req, true in zip(required, measured):
            factor *= _detect_prob(req, true, detector)
            if factor == 0.0:
                break
        probability += weight * factor
        if _loss_free_match(measured, required, detector) and weight > best_weight:
            best_group, best_weight, best_counts = terms, weight, measured

    rest_modes = state.mode_count - len(modes)
    if probability <= PROB_TOL or best_group is None:
        residual = PhotonicState(rest_modes, {})
        probability = max(probability, 0.0)
    else:
        norm = math.sqrt(sum(abs(a) ** 2 for a in best_group.values()))
        residual = PhotonicState(
            rest_modes, {occ: a / norm for occ, a in best_group.items()}
        )

    if detector.number_resolving:
        outcome = pattern.counts
    else:
        clicks = best_counts if best_counts is not None else required
        outcome = tuple(
            (m, 1 if c > 0 else 0) for m, c in zip(modes, clicks)
        )
    return DetectionRecord(outcome, probability, residual)


def herald_completeness(
    state: PhotonicState, modes: Iterable[int], detector: DetectorModel = IDEAL_DETECTOR
) -> dict[tuple[int, ...], float]:
    """Probability of every count pattern on `modes` (diagnostic helper)."""
    modes = tuple(sorted(set(int(m) for m in modes)))
    groups = _split_groups(state, modes)
    out: dict[tuple[int, ...], float] = {}
    for measured, terms in sorted(groups.items()):
        weight = sum(abs(a) ** 2 for a in terms.values())
        out[measured] = out.get(measured, 0.0) + weight
    if detector.efficiency >= 1.0 and detector.number_resolving:
        return out
    # fold loss: redistribute each true pattern over observable ones
    folded: dict[tuple[int, ...], float] = {}
    for true_counts, weight in out.items():
        _fold(true_counts, weight, detector, (), folded)
    return folded


def _fold(true_counts, weight, d, prefix, acc):
    if not true_counts:
        acc[prefix] = acc.get(prefix, 0.0) + weight
        return
    n = true_counts[0]
    if d.number_resolving:
        observable = range(n + 1)
    else:
        observable = (0, 1) if n else (0,)
    for k in observable:
        p = _detect_prob(k, n, d)
        if p > 0.0:
            _fold(true_counts[1:], weight * p, d, prefix + (k,), acc)


# ---------------------------------------------------------------------------
# seeded sampling
# ---------------------------------------------------------------------------

def rng_from_seed(seed) -> np.random.Generator:
    """Accept an int seed or pass an existing Generator through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial stream; results are scheduling-independent."""
    return np.random.default_rng([int(seed), int(trial_index)])


def measure_all(state: PhotonicState, seed) -> tuple[Occupation, float]:
    """Sample one occupation vector with probability |amplitude|^2."""
    norm2 = state.norm_squared()
    if abs(norm2 - 1.0) > 1e-9:
        raise ValueError(
            f"measure_all needs a normalized state (norm^2 = {norm2:.6g})"
        )
    rng = rng_from_seed(seed)
    u = rng.random() * norm2
    acc = 0.0
    last: tuple[Occupation, float] | None = None
    for occ, amp in state.items():
        p = abs(amp) ** 2
        acc += p
        last = (occ, p)
        if u < acc:
            return occ, p
    assert last is not None
    return last
