"""Teleportation of a CNOT gate from local qubits (1, 2) to remote qubits (1, 4).

Alice holds qubits 1 and 2, Bob holds qubits 3 and 4, and qubits 2 and 3
share an EPR pair. After the local gates C12 and C34, Alice measures qubit 2
in the computational basis and Bob measures qubit 3 in the {|+>, |->} basis.
Each party sends its bit to the other and the Pauli correction for the
outcome pair leaves qubits (1, 4) in ``CNOT14 |psi>``.

Qubit labels 1..4 map onto positions 0..3 of the joint state.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    CNOT,
    I2,
    X,
    Z,
    DensityMatrix,
    Operator,
    PureState,
    apply,
    bell_phi_plus,
    ket,
    partial_trace,
    permute,
    project_measure,
    state_fidelity,
    tensor,
)

Q1, Q2, Q3, Q4 = 0, 1, 2, 3

# (m2, m3) -> correction on qubits (1, 4)
CORRECTIONS: dict[tuple[int, str], Operator] = {
    (0, "+"): tensor(I2, I2),
    (0, "-"): tensor(Z, I2),
    (1, "+"): tensor(I2, X),
    (1, "-"): -tensor(Z, X),
}

BRANCHES: tuple[tuple[int, str], ...] = tuple(CORRECTIONS)

_SIGN_INDEX = {"+": 0, "-": 1}

# ebits consumed and classical bits exchanged per protocol run
EBITS_PER_RUN = 1


@dataclass(frozen=True)
class CorrectionRule:
    outcome: tuple[int, str]
    operator: Operator


def correction_rules() -> list[CorrectionRule]:
    return [CorrectionRule(k, v) for k, v in CORRECTIONS.items()]


@dataclass(frozen=True)
class BranchOutcome:
    """One measurement branch after its correction has been applied.

    ``output`` is the corrected two-qubit state of qubits (1, 4). With a pure
    resource it is pure and ``corrected_output`` returns its state vector.
    """

    m2: int
    m3: str
    probability: float
    output: DensityMatrix

    @property
    def corrected_output(self) -> PureState:
        return self.output.dominant_state()

    @property
    def messages(self) -> tuple[tuple[str, str, object], ...]:
        # Alice -> Bob carries m2 (drives X on qubit 4);
        # Bob -> Alice carries m3 (drives Z on qubit 1).
        return (("alice", "bob", self.m2), ("bob", "alice", self.m3))


def ideal_resource() -> DensityMatrix:
    return bell_phi_plus().to_density()


def werner_resource(visibility: float) -> DensityMatrix:
    """``v |Phi+><Phi+| + (1 - v) I/4``."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    phi = ideal_resource().elements
    return DensityMatrix(visibility * phi + (1 - visibility) * np.eye(4) / 4)


def ideal_output(input14: PureState) -> PureState:
    """``CNOT14 |psi>`` with qubit 1 as control."""
    return apply(CNOT, input14, [0, 1])


def _as_density(state) -> DensityMatrix:
    return state.to_density() if isinstance(state, PureState) else state


def prepare_joint(input14: PureState, resource: DensityMatrix | PureState) -> DensityMatrix:
    """Joint state of qubits (1, 2, 3, 4): input on (1, 4), resource on (2, 3)."""
    resource = _as_density(resource)
    if input14.num_qubits != 2 or resource.num_qubits != 2:
        raise ValueError("input and resource must both be two-qubit states")
    # kron order is (1, 4, 2, 3)
    joint = tensor(input14.to_density(), resource)
    return permute(joint, [0, 2, 3, 1])


def run_local_gates(joint):
    """Apply C12 then C34 to a four-qubit state."""
    if joint.num_qubits != 4:
        raise ValueError("local gates act on a four-qubit state")
    out = apply(CNOT, joint, [Q1, Q2])
    return apply(CNOT, out, [Q3, Q4])


def _branch(gated: DensityMatrix, m2: int, m3: str) -> BranchOutcome | None:
    try:
        _, p2, after2 = project_measure(gated, Q2, "computational", outcome=m2)
        _, p3, after3 = project_measure(after2, Q3, "diagonal", outcome=_SIGN_INDEX[m3])
    except ValueError:
        return None
    reduced = partial_trace(after3, [Q1, Q4])
    corrected = apply(CORRECTIONS[(m2, m3)], reduced, [0, 1])
    return BranchOutcome(m2, m3, p2 * p3, corrected)


def teleport(
    input14: PureState,
    resource: DensityMatrix | PureState | None = None,
    mode: str = "enumerate",
    seed: int | None = None,
):
    """Run the protocol at the density-matrix level.

    ``mode="enumerate"`` returns all four branches (impossible ones carry
    probability 0 and the ideal output). ``mode="sample"`` draws a single
    branch with ``numpy.random.default_rng(seed)``; identical seeds give
    identical draws.
    """
    if mode not in ("enumerate", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sample" and seed is None:
        raise ValueError("sample mode requires a seed")
    resource = ideal_resource() if resource is None else _as_density(resource)
    gated = run_local_gates(prepare_joint(input14, resource))

    outcomes = []
    for m2, m3 in BRANCHES:
        branch = _branch(gated, m2, m3)
        if branch is None:
            branch = BranchOutcome(m2, m3, 0.0, ideal_output(input14).to_density())
        outcomes.append(branch)
    if mode == "enumerate":
        return outcomes

    probs = np.array([b.probability for b in outcomes])
    rng = np.random.default_rng(seed)
    return outcomes[int(rng.choice(len(outcomes), p=probs / probs.sum()))]


def average_output_fidelity(outcomes: Sequence[BranchOutcome], input14: PureState) -> float:
    target = ideal_output(input14)
    return float(sum(b.probability * state_fidelity(b.output, target) for b in outcomes))


@dataclass(frozen=True)
class IdentityReport:
    max_deviation: float
    branch_probabilities: dict
    output_fidelity: float


def verify_identity(input14: PureState) -> IdentityReport:
    """Compare both sides of the teleportation identity amplitude by amplitude.

    Left side: ``C34 C12 (|psi>_14 (x) |Phi>_23)``.
    Right side: ``1/2 sum_b |b>_23 (x) K_b C14 |psi>_14`` with ``K_b`` the
    correction for branch ``b``. The 1/2 normalizes the four orthogonal
    branches. The report also checks that undoing each branch with its
    correction recovers ``C14 |psi>`` including the sign.
    """
    if input14.num_qubits != 2:
        raise ValueError("input must be a two-qubit state")
    joint = permute(tensor(input14, bell_phi_plus()), [0, 2, 3, 1])
    lhs = run_local_gates(joint).amplitudes

    target = ideal_output(input14)
    rhs = np.zeros(16, dtype=complex)
    deviations = []
    probs = {}
    fids = []
    lhs_t = lhs.reshape(2, 2, 2, 2)
    for (m2, m3), corr in CORRECTIONS.items():
        pair = tensor(ket(str(m2)), ket(m3))
        branch_state = apply(corr, target, [0, 1])
        # kron order (2, 3, 1, 4)
        term = permute(tensor(pair, branch_state), [2, 0, 1, 3]).amplitudes
        rhs += 0.5 * term

        # project qubits 2, 3 of the left side onto |m2, m3>
        sign = ket(m3).amplitudes
        block = np.einsum("acd,c->ad", lhs_t[:, m2, :, :], sign.conj()).reshape(-1)
        probs[(m2, m3)] = float(np.vdot(block, block).real)
        recovered = corr.elements @ (2 * block)
        deviations.append(np.max(np.abs(recovered - target.amplitudes)))
        fids.append(abs(np.vdot(target.amplitudes, recovered)) ** 2)

    deviations.append(np.max(np.abs(lhs - rhs)))
    return IdentityReport(float(max(deviations)), probs, float(min(fids)))


def communication_cost(run) -> tuple[int, int]:
    """(ebits, cbits) used by a completed ``teleport`` run."""
    if run is None:
        raise ValueError("no teleport run supplied")
    outcomes = [run] if isinstance(run, BranchOutcome) else list(run)
    if not outcomes:
        raise ValueError("teleport run has no outcomes")
    cbits = {len(b.messages) for b in outcomes}
    if len(cbits) != 1:
        raise ValueError("inconsistent message records across branches")
    return EBITS_PER_RUN, cbits.pop()
