import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gate_teleport.core import CNOT, DensityMatrix, PureState, ket, random_density, random_state, state_fidelity, trace_distance
from gate_teleport.io import CoincidenceRow, CoincidenceTable
from gate_teleport.tomography import (
    PAULI_2Q,
    QPT_INPUTS,
    TOMO_SETTINGS,
    ChiMatrix,
    TomographyError,
    average_gate_fidelity,
    chi_of_kraus,
    chi_of_unitary,
    consistency,
    entanglement_witness,
    exact_frequencies,
    linear_inversion,
    process_fidelity,
    process_tomo,
    project_to_physical,
    sample_frequencies,
    state_tomo,
)

from oracles import CNOT as CNOT_MATRIX
from oracles import depolarized_kraus, haar_average_fidelity, rr_output_state


def channel_outputs(kraus):
    return {k: sum(K @ ket(k).to_density().elements @ K.conj().T for K in kraus) for k in QPT_INPUTS}


# --- state tomography ---------------------------------------------------------


def test_exact_round_trip_basis_state():
    rho = ket("HH").to_density()
    assert np.allclose(state_tomo(exact_frequencies(rho)).elements, rho.elements, atol=1e-9)


def test_exact_round_trip_entangled_output():
    target = PureState(rr_output_state())
    rec = state_tomo(exact_frequencies(target.to_density()))
    assert state_fidelity(rec, target) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_exact_round_trip_random_states(seed, rank):
    rho = random_density(2, np.random.default_rng(seed), rank=rank)
    assert trace_distance(state_tomo(exact_frequencies(rho)), rho) < 1e-9


def test_sampled_pure_states_reach_high_fidelity():
    rng = np.random.default_rng(7)
    fids = []
    for _ in range(100):
        psi = random_state(2, rng)
        counts = sample_frequencies(psi.to_density(), 1e4, rng)
        fids.append(state_fidelity(state_tomo(counts), psi))
    assert np.mean(np.array(fids) >= 0.98) >= 0.95


def test_state_tomo_reads_coincidence_tables():
    probs = exact_frequencies(ket("RD").to_density())
    rows = [CoincidenceRow(a, b, "D1D4", int(round(1e6 * probs[(a, b)]))) for a, b in TOMO_SETTINGS]
    rec = state_tomo(CoincidenceTable(tuple(rows)))
    assert state_fidelity(rec, ket("RD")) > 0.999


def test_state_tomo_errors():
    probs = exact_frequencies(ket("HH").to_density())
    del probs[("R", "R")]
    with pytest.raises(TomographyError):
        state_tomo(probs)
    with pytest.raises(TomographyError):
        state_tomo({s: 0 for s in TOMO_SETTINGS})


def test_projection_is_nearest_on_diagonal_example():
    # eigenvalues (1.1, -0.1) -> (1, 0)
    out = project_to_physical(np.diag([1.1, -0.1]))
    assert np.allclose(out, np.diag([1.0, 0.0]))
    # (0.6, 0.5, -0.1) -> shift by 0 after dropping the negative: (0.55, 0.45, 0)
    out = project_to_physical(np.diag([0.6, 0.5, -0.1, 0.0]))
    assert np.allclose(np.diag(out).real, [0.55, 0.45, 0.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_projection_properties(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(2, rng)
    # already physical: moved by at most round-off
    assert np.max(np.abs(project_to_physical(rho.elements) - rho.elements)) < 1e-12
    # noisy Hermitian unit-trace input
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    noisy = rho.elements + 0.3 * (g + g.conj().T)
    noisy += (1 - np.trace(noisy)) * np.eye(4) / 4
    once = project_to_physical(noisy)
    assert np.linalg.eigvalsh(once).min() > -1e-12
    assert np.trace(once).real == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(project_to_physical(once), once, atol=1e-12)
    psi = random_state(2, rng)
    assert state_fidelity(DensityMatrix(once), psi) <= 1 + 1e-12


def test_linear_inversion_can_be_unphysical():
    probs = exact_frequencies(ket("HH").to_density())
    probs[("D", "D")] += 0.2
    raw = linear_inversion(probs)
    assert np.linalg.eigvalsh(raw).min() < -1e-3
    assert np.linalg.eigvalsh(project_to_physical(raw)).min() > -1e-12


# --- process tomography -------------------------------------------------------


def test_ideal_cnot_process():
    outs = channel_outputs([CNOT_MATRIX])
    chi = process_tomo(outs)
    assert process_fidelity(chi, chi_of_unitary(CNOT)) == pytest.approx(1.0, abs=1e-9)
    assert consistency(chi, outs) < 1e-8


def test_identity_channel_chi():
    chi = process_tomo(channel_outputs([np.eye(4)]))
    expected = np.zeros((16, 16))
    expected[0, 0] = 1.0
    assert np.allclose(chi.elements, expected, atol=1e-12)


def test_fully_depolarizing_overlap():
    outs = {k: np.eye(4) / 4 for k in QPT_INPUTS}
    chi = process_tomo(outs)
    assert np.allclose(chi.elements, np.eye(16) / 16, atol=1e-12)
    assert process_fidelity(chi, chi_of_unitary(CNOT)) == pytest.approx(1 / 16, abs=1e-12)


def test_chi_reproduces_kraus_definition():
    rng = np.random.default_rng(3)
    kraus = depolarized_kraus(CNOT_MATRIX, 0.3)
    chi = process_tomo(channel_outputs(kraus))
    assert np.allclose(chi.elements, chi_of_kraus(kraus).elements, atol=1e-12)
    rho = random_density(2, rng).elements
    direct = sum(K @ rho @ K.conj().T for K in kraus)
    assert np.allclose(chi.apply(rho), direct, atol=1e-12)


def test_process_tomo_errors():
    outs = channel_outputs([CNOT_MATRIX])
    partial = dict(outs)
    del partial["RR"]
    with pytest.raises(TomographyError):
        process_tomo(partial)
    bad = dict(outs)
    bad["HH"] = np.diag([1.2, -0.2, 0, 0])
    with pytest.raises(TomographyError):
        process_tomo(bad)


def test_sampled_process_is_consistent():
    rng = np.random.default_rng(11)
    kraus = depolarized_kraus(CNOT_MATRIX, 0.1)
    exact = channel_outputs(kraus)
    outs = {k: state_tomo(sample_frequencies(v, 1e4, rng)) for k, v in exact.items()}
    chi = process_tomo(outs)
    assert consistency(chi, outs) <= 0.05
    assert np.linalg.eigvalsh(chi.elements).min() > -1e-12


def test_chi_validation():
    with pytest.raises(ValueError):
        ChiMatrix(np.eye(16))
    with pytest.raises(ValueError):
        ChiMatrix(np.eye(4))


def test_pauli_basis_is_orthogonal():
    gram = np.array([[np.trace(a.conj().T @ b) for b in PAULI_2Q] for a in PAULI_2Q])
    assert np.allclose(gram, 4 * np.eye(16))


# --- fidelities ---------------------------------------------------------------


def test_average_gate_fidelity_values():
    assert average_gate_fidelity(0.80, 4) == pytest.approx(0.84)
    assert average_gate_fidelity(1.0, 4) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        average_gate_fidelity(1.5, 4)
    with pytest.raises(ValueError):
        average_gate_fidelity(0.5, 1)


@pytest.mark.parametrize("p", [0.0, 0.2, 0.5])
def test_average_gate_fidelity_matches_haar_average(p):
    kraus = depolarized_kraus(CNOT_MATRIX, p)
    f_p = process_fidelity(process_tomo(channel_outputs(kraus)), chi_of_unitary(CNOT))
    mc = haar_average_fidelity(kraus, CNOT_MATRIX, 10_000, np.random.default_rng(int(100 * p)))
    assert abs(average_gate_fidelity(f_p, 4) - mc) < 0.005


def test_average_gate_fidelity_matches_haar_for_pauli_noise():
    # nonuniform Pauli errors after the gate: per-sample fidelity varies
    z1 = np.kron(np.diag([1, -1]), np.eye(2))
    x4 = np.kron(np.eye(2), np.array([[0, 1], [1, 0]]))
    weights = {0: 0.8, 1: 0.12, 2: 0.05, 3: 0.03}
    errs = [np.eye(4), z1, x4, z1 @ x4]
    kraus = [np.sqrt(weights[i]) * e @ CNOT_MATRIX for i, e in enumerate(errs)]
    f_p = process_fidelity(process_tomo(channel_outputs(kraus)), chi_of_unitary(CNOT))
    assert f_p == pytest.approx(0.8, abs=1e-12)
    mc = haar_average_fidelity(kraus, CNOT_MATRIX, 10_000, np.random.default_rng(9))
    assert abs(average_gate_fidelity(f_p, 4) - mc) < 0.005


def test_entanglement_witness():
    target = PureState(rr_output_state())
    assert entanglement_witness(target.to_density(), target) == (pytest.approx(1.0), True)
    f, ent = entanglement_witness(DensityMatrix.maximally_mixed(2), target)
    assert f == pytest.approx(0.25) and not ent
    with pytest.raises(ValueError):
        entanglement_witness(DensityMatrix.maximally_mixed(2), ket("HH"))
