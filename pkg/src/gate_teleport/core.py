"""Dense linear algebra for small multi-qubit systems.

Conventions
-----------
* Qubits are addressed by 0-based position. Position 0 is the most
  significant bit of the basis index, so ``|10>`` has qubit 0 in state 1.
* Polarization is encoded H -> 0, V -> 1.
* States and operators are immutable; every operation returns a new value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8
IMPOSSIBLE_BRANCH = 1e-14

SQRT2 = np.sqrt(2.0)


def _frozen(array, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _num_qubits(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PureState:
    """Normalized state vector of ``num_qubits`` qubits."""

    amplitudes: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum |a|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", _num_qubits(amps.size))

    @classmethod
    def from_unnormalized(cls, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("zero vector cannot be normalized")
        return cls(amps / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"PureState(num_qubits={self.num_qubits}, amplitudes={np.round(self.amplitudes, 6)})"


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix of ``num_qubits`` qubits.

    Positivity is only checked against ``PSD_TOL`` so that raw tomographic
    reconstructions can be held before projection.
    """

    elements: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self):
        rho = _frozen(self.elements)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lowest = np.linalg.eigvalsh(rho).min()
        if lowest < -PSD_TOL:
            raise ValueError(f"density matrix has eigenvalue {lowest!r} < -{PSD_TOL}")
        object.__setattr__(self, "elements", rho)
        object.__setattr__(self, "num_qubits", _num_qubits(rho.shape[0]))

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 2**num_qubits
        return cls(np.eye(d) / d)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.elements)

    def purity(self) -> float:
        return float(np.real(np.trace(self.elements @ self.elements)))

    def dominant_state(self, tol: float = 1e-9) -> PureState:
        """Return the state vector of a (numerically) pure density matrix."""
        vals, vecs = np.linalg.eigh(self.elements)
        if abs(vals[-1] - 1.0) > tol:
            raise ValueError(f"density matrix is mixed (largest eigenvalue {vals[-1]:.3g})")
        vec = vecs[:, -1]
        # fix global phase so the largest amplitude is real positive
        k = np.argmax(np.abs(vec))
        vec = vec * np.exp(-1j * np.angle(vec[k]))
        return PureState.from_unnormalized(vec)

    def __repr__(self):
        return f"DensityMatrix(num_qubits={self.num_qubits})"


@dataclass(frozen=True)
class Operator:
    """Square matrix acting on ``num_qubits`` qubits."""

    elements: np.ndarray
    is_unitary: bool = field(init=False)
    num_qubits: int = field(init=False)

    def __post_init__(self):
        mat = _frozen(self.elements)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be square, got shape {mat.shape}")
        unitary = np.allclose(mat.conj().T @ mat, np.eye(mat.shape[0]), atol=HERMITIAN_TOL, rtol=0)
        object.__setattr__(self, "elements", mat)
        object.__setattr__(self, "is_unitary", bool(unitary))
        object.__setattr__(self, "num_qubits", _num_qubits(mat.shape[0]))

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def dag(self) -> "Operator":
        return Operator(self.elements.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.elements @ other.elements)

    def __neg__(self) -> "Operator":
        return Operator(-self.elements)

    def __repr__(self):
        return f"Operator(num_qubits={self.num_qubits}, is_unitary={self.is_unitary})"


State = Union[PureState, DensityMatrix]

# --- standard objects ------------------------------------------------------

I2 = Operator(np.eye(2))
X = Operator([[0, 1], [1, 0]])
Y = Operator([[0, -1j], [1j, 0]])
Z = Operator([[1, 0], [0, -1]])
HADAMARD = Operator(np.array([[1, 1], [1, -1]]) / SQRT2)
CNOT = Operator([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])

PAULIS = (I2, X, Y, Z)

_KETS = {
    "0": [1, 0],
    "1": [0, 1],
    "H": [1, 0],
    "V": [0, 1],
    "+": [1 / SQRT2, 1 / SQRT2],
    "-": [1 / SQRT2, -1 / SQRT2],
    "D": [1 / SQRT2, 1 / SQRT2],
    "A": [1 / SQRT2, -1 / SQRT2],
    "R": [1 / SQRT2, 1j / SQRT2],
    "L": [1 / SQRT2, -1j / SQRT2],
}


def ket(label: str) -> PureState:
    """Product state from single-character labels, e.g. ``ket("RR")``.

    Recognised labels: ``0 1 + - H V D A R L`` with D/A = (H +- V)/sqrt2 and
    R/L = (H +- iV)/sqrt2.
    """
    if not label:
        raise ValueError("empty label")
    try:
        vecs = [np.array(_KETS[c], dtype=complex) for c in label]
    except KeyError as err:
        raise ValueError(f"unknown single-qubit label {err.args[0]!r}") from None
    amps = vecs[0]
    for v in vecs[1:]:
        amps = np.kron(amps, v)
    return PureState(amps)


def bell_phi_plus() -> PureState:
    return PureState(np.array([1, 0, 0, 1]) / SQRT2)


def random_state(num_qubits: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    d = 2**num_qubits
    return PureState.from_unnormalized(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_density(num_qubits: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random density matrix from the induced (Ginibre) measure."""
    d = 2**num_qubits
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def projector(state: PureState) -> np.ndarray:
    return np.outer(state.amplitudes, state.amplitudes.conj())


# --- composition -----------------------------------------------------------


def tensor(a, b):
    """Kronecker product; ``a`` occupies the more significant qubits."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix):
        return DensityMatrix(np.kron(a.elements, b.elements))
    if isinstance(a, Operator):
        return Operator(np.kron(a.elements, b.elements))
    raise TypeError(f"unsupported operand {type(a).__name__}")


def _check_targets(targets: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < num_qubits:
            raise ValueError(f"qubit {t} out of range for {num_qubits} qubits")
    return targets


def _apply_to_axes(op: np.ndarray, tensor_: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor_, axes=(list(range(k, 2 * k)), list(axes)))
    # tensordot puts the new axes first; move them back in place
    return np.moveaxis(out, list(range(k)), list(axes))


def embed(op: Operator, targets: Sequence[int], num_qubits: int) -> Operator:
    """Full ``2**num_qubits`` matrix of ``op`` acting on ``targets``."""
    targets = _check_targets(targets, num_qubits)
    if op.dim != 2 ** len(targets):
        raise ValueError(f"operator of dim {op.dim} does not fit {len(targets)} targets")
    d = 2**num_qubits
    eye = np.eye(d, dtype=complex).reshape((2,) * num_qubits + (d,))
    full = _apply_to_axes(op.elements, eye, targets)
    return Operator(full.reshape(d, d))


def apply(op: Operator, state: State, targets: Sequence[int]) -> State:
    """Apply ``op`` to the listed qubits of ``state``.

    The i-th factor of ``op`` acts on ``targets[i]``. Pure states are
    renormalized (guarding round-off only), density matrices are conjugated
    and must be acted on by a unitary.
    """
    n = state.num_qubits
    targets = _check_targets(targets, n)
    if op.dim != 2 ** len(targets):
        raise ValueError(f"operator of dim {op.dim} does not fit {len(targets)} targets")
    if isinstance(state, PureState):
        psi = state.amplitudes.reshape((2,) * n)
        out = _apply_to_axes(op.elements, psi, targets).reshape(-1)
        return PureState.from_unnormalized(out)
    if isinstance(state, DensityMatrix):
        if not op.is_unitary:
            raise ValueError("density matrices only accept unitary conjugation")
        return conjugate(state, embed(op, targets, n))
    raise TypeError(f"unsupported state {type(state).__name__}")


def conjugate(rho: DensityMatrix, full_op: Operator) -> DensityMatrix:
    """``U rho U^dagger`` for an operator already on the full space."""
    u = full_op.elements
    out = u @ rho.elements @ u.conj().T
    return DensityMatrix((out + out.conj().T) / 2)


def permute(rho: State, order: Sequence[int]) -> State:
    """Reorder qubits: new qubit ``i`` is old qubit ``order[i]``."""
    n = rho.num_qubits
    order = _check_targets(order, n)
    if len(order) != n:
        raise ValueError("order must list every qubit once")
    if isinstance(rho, PureState):
        t = np.transpose(rho.amplitudes.reshape((2,) * n), order)
        return PureState(t.reshape(-1))
    t = rho.elements.reshape((2,) * (2 * n))
    t = np.transpose(t, list(order) + [n + o for o in order])
    return DensityMatrix(t.reshape(rho.dim, rho.dim))


def partial_trace(rho: State, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on ``keep`` (returned in ascending qubit order)."""
    if isinstance(rho, PureState):
        rho = rho.to_density()
    n = rho.num_qubits
    keep = _check_targets(keep, n)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    keep = tuple(sorted(keep))
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for q in range(n):
        if q not in keep:
            cols[q] = rows[q]
    out = "".join(rows[q] for q in keep) + "".join(cols[q] for q in keep)
    t = rho.elements.reshape((2,) * (2 * n))
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    d = 2 ** len(keep)
    red = red.reshape(d, d)
    return DensityMatrix((red + red.conj().T) / 2)


# --- measurement -----------------------------------------------------------

MEASUREMENT_BASES = {
    "computational": (ket("0"), ket("1")),
    "diagonal": (ket("+"), ket("-")),
}


def project_measure(
    state: State,
    qubit: int,
    basis: str = "computational",
    outcome: int | None = None,
    rng: np.random.Generator | None = None,
):
    """Projective measurement of one qubit.

    Outcome ``0`` is ``|0>`` (computational) or ``|+>`` (diagonal), outcome
    ``1`` is ``|1>`` or ``|->``. Pass ``outcome`` to force a branch, or ``rng``
    to sample one.

    Returns
    -------
    (outcome, probability, collapsed_state)
    """
    try:
        vectors = MEASUREMENT_BASES[basis]
    except KeyError:
        raise ValueError(f"unknown basis {basis!r}") from None
    n = state.num_qubits
    _check_targets([qubit], n)

    probs = []
    collapsed = []
    for vec in vectors:
        proj = Operator(projector(vec))
        p_full = embed(proj, [qubit], n).elements
        if isinstance(state, PureState):
            post = p_full @ state.amplitudes
            prob = float(np.real(np.vdot(post, post)))
        else:
            post = p_full @ state.elements @ p_full
            prob = float(np.real(np.trace(post)))
        probs.append(prob)
        collapsed.append(post)

    if outcome is None:
        if rng is None:
            raise ValueError("either outcome or rng is required")
        p = np.clip(np.array(probs), 0.0, None)
        outcome = int(rng.choice(2, p=p / p.sum()))
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    prob = probs[outcome]
    if prob < IMPOSSIBLE_BRANCH:
        raise ValueError(f"outcome {outcome} has probability {prob:.3g}; branch impossible")
    post = collapsed[outcome]
    if isinstance(state, PureState):
        out = PureState.from_unnormalized(post)
    else:
        post = post / prob
        out = DensityMatrix((post + post.conj().T) / 2)
    return outcome, min(prob, 1.0), out


# --- metrics ---------------------------------------------------------------


def state_fidelity(rho: State, target: PureState) -> float:
    """Overlap ``<target| rho |target>``; pure ``rho`` gives ``|<target|rho>|^2``."""
    if rho.dim != target.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {target.dim}")
    t = target.amplitudes
    if isinstance(rho, PureState):
        return float(abs(np.vdot(t, rho.amplitudes)) ** 2)
    return float(np.real(np.vdot(t, rho.elements @ t)))


def trace_distance(a: np.ndarray | DensityMatrix, b: np.ndarray | DensityMatrix) -> float:
    a = a.elements if isinstance(a, DensityMatrix) else np.asarray(a)
    b = b.elements if isinstance(b, DensityMatrix) else np.asarray(b)
    diff = a - b
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))
