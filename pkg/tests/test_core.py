import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gate_teleport.core import (
    CNOT,
    X,
    Z,
    DensityMatrix,
    Operator,
    PureState,
    apply,
    bell_phi_plus,
    embed,
    ket,
    partial_trace,
    project_measure,
    random_density,
    random_state,
    state_fidelity,
    tensor,
)
from gate_teleport.protocol import run_local_gates

from oracles import partial_trace_loops, teleport_hh_by_hand

finite = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


@st.composite
def states(draw, n=None):
    n = draw(st.integers(1, 4)) if n is None else n
    re = draw(st.lists(finite, min_size=2**n, max_size=2**n))
    im = draw(st.lists(finite, min_size=2**n, max_size=2**n))
    v = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(v) < 1e-3:
        v[0] = 1.0
    return PureState.from_unnormalized(v)


def test_pure_state_validates_norm():
    with pytest.raises(ValueError):
        PureState([1, 1])
    assert PureState([0, 1]).num_qubits == 1


def test_density_matrix_validates():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.0, 1.0]))
    with pytest.raises(ValueError):
        DensityMatrix([[0.5, 0.1], [0.3, 0.5]])
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.1, -0.1]))


def test_values_are_immutable():
    s = ket("H")
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_tensor_basis_composition():
    assert np.allclose(tensor(ket("0"), ket("1")).amplitudes, [0, 1, 0, 0])


def test_tensor_builds_path_entangled_state():
    state = tensor(tensor(ket("H"), bell_phi_plus()), ket("H"))
    expected = np.zeros(16)
    expected[0b0000] = expected[0b0110] = 1 / np.sqrt(2)
    assert np.allclose(state.amplitudes, expected)


def test_tensor_operator_action():
    op = tensor(Operator(np.eye(2)), X)
    assert np.allclose(op.elements @ ket("00").amplitudes, ket("01").amplitudes)


def test_tensor_rejects_mixed_kinds():
    with pytest.raises(TypeError):
        tensor(ket("0"), X)


def test_apply_cnot_truth_table():
    out = apply(CNOT, ket("1000"), [0, 1])
    assert np.allclose(out.amplitudes, ket("1100").amplitudes)


def test_apply_pauli_z():
    out = apply(Z, ket("+0"), [0])
    assert np.allclose(out.amplitudes, ket("-0").amplitudes)


def test_apply_target_order_matters():
    # control on qubit 1, target qubit 0
    out = apply(CNOT, ket("01"), [1, 0])
    assert np.allclose(out.amplitudes, ket("11").amplitudes)


def test_local_gates_match_hand_expansion():
    joint = PureState(tensor(tensor(ket("H"), bell_phi_plus()), ket("H")).amplitudes)
    out = run_local_gates(joint)
    assert np.max(np.abs(out.amplitudes - teleport_hh_by_hand())) < 1e-12


@pytest.mark.parametrize("targets", [[0, 0], [5], [0, 1, 2]])
def test_apply_errors(targets):
    with pytest.raises(ValueError):
        apply(CNOT, ket("000"), targets)


def test_partial_trace_bell_marginal():
    red = partial_trace(bell_phi_plus().to_density(), [0])
    assert np.allclose(red.elements, np.eye(2) / 2)


def test_partial_trace_keep_all_is_identity():
    rho = random_density(3, np.random.default_rng(0))
    assert np.allclose(partial_trace(rho, [0, 1, 2]).elements, rho.elements)


def test_partial_trace_against_loops():
    rng = np.random.default_rng(1)
    rho = random_density(4, rng)
    for keep in ([0, 3], [1], [0, 2, 3]):
        assert np.allclose(partial_trace(rho, keep).elements, partial_trace_loops(rho.elements, 4, keep), atol=1e-12)


def test_partial_trace_errors():
    rho = random_density(2, np.random.default_rng(2))
    with pytest.raises(ValueError):
        partial_trace(rho, [])
    with pytest.raises(ValueError):
        partial_trace(rho, [3])


def test_measure_plus_in_diagonal_basis():
    outcome, p, post = project_measure(ket("+"), 0, "diagonal", rng=np.random.default_rng(0))
    assert outcome == 0 and p == pytest.approx(1.0, abs=1e-12)
    assert state_fidelity(post, ket("+")) == pytest.approx(1.0)


def test_measure_zero_in_computational_basis():
    outcome, p, _ = project_measure(ket("0"), 0, rng=np.random.default_rng(0))
    assert (outcome, p) == (0, pytest.approx(1.0))


def test_forced_impossible_branch_raises():
    with pytest.raises(ValueError):
        project_measure(ket("0"), 0, outcome=1)


def test_measurement_is_idempotent():
    rng = np.random.default_rng(3)
    psi = random_state(3, rng)
    o, _, post = project_measure(psi, 1, "diagonal", rng=rng)
    o2, p2, post2 = project_measure(post, 1, "diagonal", outcome=o)
    assert p2 == pytest.approx(1.0, abs=1e-12)
    assert state_fidelity(post2, post) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_examples():
    psi = ket("RD")
    assert state_fidelity(psi.to_density(), psi) == pytest.approx(1.0)
    assert state_fidelity(DensityMatrix.maximally_mixed(2), psi) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        state_fidelity(DensityMatrix.maximally_mixed(1), psi)


# --- properties --------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(states(n=3), st.permutations([0, 1, 2]))
def test_unitary_application_preserves_norm(psi, order):
    out = apply(CNOT, psi, order[:2])
    assert abs(np.sum(np.abs(out.amplitudes) ** 2) - 1) < 1e-12
    # embedding route agrees with the tensor-contraction route
    full = embed(CNOT, order[:2], 3).elements @ psi.amplitudes
    assert np.allclose(full, out.amplitudes, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sets(st.integers(0, 3), min_size=1))
def test_partial_trace_hermitian_and_trace_preserving(seed, keep):
    rho = random_density(4, np.random.default_rng(seed))
    red = partial_trace(rho, sorted(keep)).elements
    assert np.max(np.abs(red - red.conj().T)) < 1e-10
    assert abs(np.trace(red) - 1) < 1e-10


@settings(max_examples=80, deadline=None)
@given(states(n=2), states(n=2))
def test_fidelity_code_paths_agree(psi, phi):
    via_density = state_fidelity(psi.to_density(), phi)
    via_vectors = state_fidelity(psi, phi)
    assert abs(via_density - abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2) < 1e-12
    assert abs(via_density - via_vectors) < 1e-12
    assert 0 <= via_density <= 1 + 1e-10


@settings(max_examples=60, deadline=None)
@given(states(n=3), st.integers(0, 2), st.sampled_from(["computational", "diagonal"]))
def test_branch_probabilities_sum_to_one(psi, qubit, basis):
    total = 0.0
    for outcome in (0, 1):
        try:
            total += project_measure(psi, qubit, basis, outcome=outcome)[1]
        except ValueError:
            pass
    assert abs(total - 1) < 1e-12
