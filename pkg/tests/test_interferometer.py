import math

import numpy as np
import pytest
import scipy.linalg

from loqsim.fock import make_basis_state, superpose, total_photon_number
from loqsim.interferometer import (
    ModeUnitary,
    apply,
    beamsplitter,
    compose,
    compositions,
    element_unitary,
    hom_coincidence,
    hwp,
    pbs,
    permanent,
    phase,
    qwp,
    rotation_elements,
    swap,
)

from conftest import brute_force_apply, naive_permanent, random_unitary

SQRT_HALF = 1.0 / math.sqrt(2.0)
HADAMARD = np.array([[1, 1], [1, -1]]) * SQRT_HALF


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

def test_hwp_hadamard():
    u = element_unitary(hwp(0, math.radians(22.5)), 2)
    assert np.abs(u.matrix - HADAMARD).max() < 1e-12


def test_hwp_45_swaps_h_and_v():
    u = element_unitary(hwp(0, math.radians(45.0)), 2)
    assert np.abs(u.matrix - np.array([[0, 1], [1, 0]])).max() < 1e-12


def test_bs_zero_reflectivity_is_identity():
    u = element_unitary(beamsplitter(0, 1, 0.0), 2)
    assert np.abs(u.matrix - np.eye(2)).max() < 1e-12


def test_bs_convention():
    u = element_unitary(beamsplitter(0, 1, 0.5), 2)
    expected = SQRT_HALF * np.array([[1, 1j], [1j, 1]])
    assert np.abs(u.matrix - expected).max() < 1e-12


def test_pbs_transmits_h_reflects_v():
    u = element_unitary(pbs(0, 1), 4).matrix
    assert u[0, 0] == 1 and u[2, 2] == 1  # H rails transmitted
    assert u[3, 1] == 1 and u[1, 3] == 1  # V rails swapped
    assert u[1, 1] == 0 and u[3, 3] == 0


def test_swap_element():
    u = element_unitary(swap(0, 2), 3).matrix
    assert u[2, 0] == 1 and u[0, 2] == 1 and u[1, 1] == 1


def test_element_mode_out_of_range():
    with pytest.raises(ValueError):
        element_unitary(beamsplitter(0, 5, 0.5), 2)


def test_bad_reflectivity():
    with pytest.raises(ValueError):
        beamsplitter(0, 1, 1.5)


def test_rotation_elements(rng):
    for theta in rng.uniform(-7.0, 7.0, size=12):
        u = compose(rotation_elements(0, 1, theta), 2).matrix
        c, s = math.cos(theta), math.sin(theta)
        assert np.abs(u - np.array([[c, -s], [s, c]])).max() < 1e-12


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def test_compose_two_balanced_bs():
    # 2x2 product oracle: B.B = [[t^2-r^2, 2irt], [2irt, t^2-r^2]] = [[0,i],[i,0]]
    u = compose([beamsplitter(0, 1, 0.5), beamsplitter(0, 1, 0.5)], 2).matrix
    b = SQRT_HALF * np.array([[1, 1j], [1j, 1]])
    assert np.abs(u - b @ b).max() < 1e-12
    assert np.allclose(np.abs(u), [[0, 1], [1, 0]], atol=1e-12)


def test_compose_empty_is_identity():
    assert np.abs(compose([], 3).matrix - np.eye(3)).max() == 0.0


def test_compose_two_pi_phases():
    u = compose([phase(0, math.pi), phase(0, math.pi)], 2).matrix
    assert np.abs(u - np.eye(2)).max() < 1e-12


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        ModeUnitary(np.array([[1.0, 0.0], [1.0, 1.0]]))


# ---------------------------------------------------------------------------
# permanents
# ---------------------------------------------------------------------------

def test_permanent_identity():
    assert abs(permanent(np.eye(3)) - 1.0) < 1e-15
    assert permanent(np.zeros((0, 0))) == 1.0


def test_permanent_two_by_two():
    a, b, c, d = 1.2, 3.4j, -0.5, 2.0
    assert abs(permanent([[a, b], [c, d]]) - (a * d + b * c)) < 1e-12
    # the two-photon coincidence amplitude t*t + (ir)*(ir) at R = 1/2
    t, r = SQRT_HALF, SQRT_HALF
    m = [[t, 1j * r], [1j * r, t]]
    assert abs(permanent(m)) < 1e-15


def test_permanent_matches_naive(rng):
    for n in range(1, 7):
        for _ in range(5):
            m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            fast = permanent(m)
            slow = naive_permanent(m)
            assert abs(fast - slow) <= 1e-10 * max(1.0, abs(slow))


def test_permanent_non_square():
    with pytest.raises(ValueError):
        permanent(np.ones((2, 3)))


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

def test_hom_two_photon_output():
    u = compose([beamsplitter(0, 1, 0.5)], 2)
    out = apply(u, make_basis_state([1, 1]))
    assert abs(out.amplitude([1, 1])) < 1e-12
    assert abs(out.amplitude([2, 0]) - 1j * SQRT_HALF) < 1e-12
    assert abs(out.amplitude([0, 2]) - 1j * SQRT_HALF) < 1e-12


def test_identity_is_noop(rng):
    state = superpose(
        make_basis_state([2, 0, 1]), 0.6, make_basis_state([0, 2, 1]), 0.8j
    )
    out = apply(ModeUnitary(np.eye(3)), state)
    for occ, amp in state.items():
        assert abs(out.amplitude(occ) - amp) < 1e-12


def test_two_photon_sector_against_expm_oracle():
    # second-quantized BS generator on the {|2,0>,|1,1>,|0,2>} sector:
    # H = theta (a^dag b + b^dag a); U_sector = expm(iH)
    reflectivity = 0.5
    theta = math.asin(math.sqrt(reflectivity))
    h = theta * np.array(
        [[0, math.sqrt(2), 0], [math.sqrt(2), 0, math.sqrt(2)], [0, math.sqrt(2), 0]]
    )
    sector = scipy.linalg.expm(1j * h)
    expected = sector @ np.array([1.0, 0.0, 0.0])  # evolve |2,0>

    out = apply(compose([beamsplitter(0, 1, reflectivity)], 2), make_basis_state([2, 0]))
    got = np.array([out.amplitude(o) for o in [(2, 0), (1, 1), (0, 2)]])
    assert np.abs(got - expected).max() < 1e-12
    probs = np.abs(got) ** 2
    assert np.abs(probs - [0.25, 0.5, 0.25]).max() < 1e-12


def test_apply_matches_brute_force(rng):
    u = random_unitary(rng, 4)
    state = superpose(
        make_basis_state([2, 1, 0, 0]), 0.6, make_basis_state([0, 1, 1, 1]), 0.8j
    )
    fast = apply(ModeUnitary(u), state)
    slow = brute_force_apply(u, state)
    for occ in compositions(3, 4):
        assert abs(fast.amplitude(occ) - slow.amplitude(occ)) < 1e-10


def test_norm_preservation_random_networks(rng):
    for _ in range(4):
        elements = []
        for _ in range(6):
            a, b = rng.choice(8, size=2, replace=False)
            elements.append(beamsplitter(int(a), int(b), float(rng.uniform())))
            elements.append(phase(int(rng.integers(8)), float(rng.uniform(0, 2 * math.pi))))
        u = compose(elements, 8)
        terms = {}
        for _ in range(20):
            occ = tuple(np.bincount(rng.integers(0, 8, size=4), minlength=8))
            terms[occ] = complex(rng.normal(), rng.normal())
        from loqsim.fock import PhotonicState

        state = PhotonicState(8, terms).normalized()
        out = apply(u, state)
        assert abs(out.norm_squared() - 1.0) < 1e-10
        assert total_photon_number(out) == 4


def test_single_photon_sector_is_matrix_action(rng):
    u = random_unitary(rng, 5)
    amps = rng.normal(size=5) + 1j * rng.normal(size=5)
    amps /= np.linalg.norm(amps)
    from loqsim.fock import PhotonicState

    state = PhotonicState(
        5, {tuple(np.eye(5, dtype=int)[k]): amps[k] for k in range(5)}
    )
    out = apply(ModeUnitary(u), state)
    expected = u @ amps
    for k in range(5):
        occ = tuple(np.eye(5, dtype=int)[k])
        assert abs(out.amplitude(occ) - expected[k]) < 1e-12


def test_composition_homomorphism(rng):
    a = beamsplitter(0, 1, 0.3)
    b = beamsplitter(1, 2, 0.7)
    state = make_basis_state([1, 1, 0]).normalized()
    combined = apply(compose([a, b], 3), state)
    stepwise = apply(element_unitary(b, 3), apply(element_unitary(a, 3), state))
    for occ in compositions(2, 3):
        assert abs(combined.amplitude(occ) - stepwise.amplitude(occ)) < 1e-10


def test_mixed_sector_evolution():
    state = superpose(make_basis_state([0, 0]), SQRT_HALF, make_basis_state([1, 1]), SQRT_HALF)
    out = apply(compose([beamsplitter(0, 1, 0.5)], 2), state)
    assert abs(out.amplitude([0, 0]) - SQRT_HALF) < 1e-12
    assert abs(out.norm_squared() - 1.0) < 1e-10


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(ModeUnitary(np.eye(3)), make_basis_state([1, 0]))


# ---------------------------------------------------------------------------
# two-photon interference with partial distinguishability
# ---------------------------------------------------------------------------

def test_hom_coincidence_endpoints():
    assert hom_coincidence(0.5, 1.0) == 0.0
    assert hom_coincidence(0.5, 0.0) == 0.5


def test_hom_coincidence_partial_against_label_mode_oracle():
    # photon 1 carries internal state x|a> + sqrt(1-x^2)|b>, photon 2 is |a>;
    # modes (0a, 0b, 1a, 1b); the BS acts on the spatial index only
    x = SQRT_HALF
    state = superpose(
        make_basis_state([1, 0, 1, 0]), x,
        make_basis_state([0, 1, 1, 0]), math.sqrt(1 - x * x),
    )
    u = compose([beamsplitter(0, 2, 0.5), beamsplitter(1, 3, 0.5)], 4)
    out = apply(u, state)
    coincidence = 0.0
    for occ, amp in out.items():
        if occ[0] + occ[1] == 1 and occ[2] + occ[3] == 1:
            coincidence += abs(amp) ** 2
    assert abs(coincidence - 0.25) < 1e-12
    assert abs(hom_coincidence(0.5, x) - coincidence) < 1e-12


def test_hom_dip_monotone():
    xs = np.linspace(0.0, 1.0, 21)
    values = [hom_coincidence(0.5, float(x)) for x in xs]
    assert values[0] == 0.5 and values[-1] == 0.0
    assert all(b < a for a, b in zip(values, values[1:]))


def test_hom_coincidence_range_errors():
    with pytest.raises(ValueError):
        hom_coincidence(1.5, 0.5)
    with pytest.raises(ValueError):
        hom_coincidence(0.5, -0.1)


def test_mode_unitary_json_round_trip(rng):
    u = ModeUnitary(random_unitary(rng, 3))
    data = u.to_json_dict()
    assert data["dim"] == 3
    back = ModeUnitary.from_json_dict(data)
    assert np.array_equal(back.matrix, u.matrix)
