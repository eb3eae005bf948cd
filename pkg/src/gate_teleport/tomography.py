"""State and process tomography of two-qubit systems.

State tomography uses the 16 analyzer settings {H, V, D, R} x {H, V, D, R}
and linear inversion in the Pauli basis, followed by projection onto the
nearest unit-trace positive matrix. Process tomography feeds the 16 product
inputs of the same labels through linear inversion of the channel and
returns the chi matrix in the basis {I, X, Y, Z} x {I, X, Y, Z}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

import numpy as np

from .core import (
    HERMITIAN_TOL,
    PAULIS,
    PSD_TOL,
    TRACE_TOL,
    DensityMatrix,
    Operator,
    PureState,
    ket,
    state_fidelity,
    trace_distance,
)
from .io import CoincidenceTable

TOMO_LABELS = ("H", "V", "D", "R")
TOMO_SETTINGS = tuple((a, b) for a, b in product(TOMO_LABELS, repeat=2))
QPT_INPUTS = tuple(a + b for a, b in TOMO_SETTINGS)

# settings whose frequencies add up to the trace (complete H/V sub-basis)
_NORMALIZING = (("H", "H"), ("H", "V"), ("V", "H"), ("V", "V"))

PAULI_2Q = tuple(np.kron(a.elements, b.elements) for a, b in product(PAULIS, repeat=2))
PAULI_2Q_LABELS = tuple(a + b for a, b in product("IXYZ", repeat=2))


class TomographyError(ValueError):
    """Raised when data cannot support a reconstruction."""


def _bloch(label: str) -> np.ndarray:
    """(1, <X>, <Y>, <Z>) of a single-qubit basis state."""
    v = ket(label).amplitudes
    return np.array([np.real(np.vdot(v, p.elements @ v)) for p in PAULIS])


# p(a, b) = sum_ij r_ij s_a,i s_b,j / 4  with  rho = sum_ij r_ij P_i x P_j / 4
_DESIGN = np.array([np.kron(_bloch(a), _bloch(b)) / 4 for a, b in TOMO_SETTINGS])


def project_to_physical(matrix: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) unit-trace positive semidefinite matrix.

    Eigenvalues are projected onto the probability simplex: negative weight
    is truncated and the deficit redistributed evenly over the surviving
    eigenvalues. Already-physical input is returned unchanged up to
    round-off.
    """
    m = np.asarray(matrix, dtype=complex)
    m = (m + m.conj().T) / 2
    vals, vecs = np.linalg.eigh(m)
    u = np.sort(vals)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    k = np.nonzero(u - (css - 1) / j > 0)[0][-1]
    theta = (css[k] - 1) / (k + 1)
    new = np.clip(vals - theta, 0.0, None)
    out = (vecs * new) @ vecs.conj().T
    return (out + out.conj().T) / 2


def _frequencies(data, pair) -> dict[tuple[str, str], float]:
    if isinstance(data, CoincidenceTable):
        sel = None if pair == "all" else pair
        return {k: float(v) for k, v in data.counts(sel).items()}
    if not data:
        return {}
    first = next(iter(data))
    if len(first) == 3:  # keyed by (l1, l4, pair)
        out: dict[tuple[str, str], float] = {}
        for (l1, l4, p), v in data.items():
            if pair == "all" or p == pair:
                out[(l1, l4)] = out.get((l1, l4), 0.0) + float(v)
        return out
    return {k: float(v) for k, v in data.items()}


def linear_inversion(frequencies: Mapping[tuple[str, str], float]) -> np.ndarray:
    """Raw (possibly unphysical) two-qubit matrix from the 16 setting frequencies."""
    missing = [s for s in TOMO_SETTINGS if s not in frequencies]
    if missing:
        raise TomographyError(f"missing analyzer settings: {missing}")
    n = np.array([frequencies[s] for s in TOMO_SETTINGS], dtype=float)
    if np.any(n < -1e-12):
        raise TomographyError("negative frequencies")
    n = np.clip(n, 0.0, None)
    if n.sum() <= 0:
        raise TomographyError("all-zero counts")
    norm = sum(frequencies[s] for s in _NORMALIZING)
    if norm <= 0:
        raise TomographyError("no counts in the H/V settings; cannot normalize")
    r = np.linalg.solve(_DESIGN, n / norm)
    rho = sum(c * p for c, p in zip(r, PAULI_2Q)) / 4
    return (rho + rho.conj().T) / 2


def state_tomo(data, pair: str = "D1D4") -> DensityMatrix:
    """Reconstruct the two-qubit state behind a coincidence table.

    ``data`` is a ``CoincidenceTable``, a mapping ``(l1, l4, pair) -> value``
    or a mapping ``(l1, l4) -> value`` (counts or exact probabilities).
    ``pair="all"`` pools every detector pair.
    """
    raw = linear_inversion(_frequencies(data, pair))
    return DensityMatrix(project_to_physical(raw))


def exact_frequencies(rho: DensityMatrix | np.ndarray) -> dict[tuple[str, str], float]:
    """Infinite-statistics analyzer probabilities of a two-qubit state."""
    m = np.asarray(getattr(rho, "elements", rho))
    out = {}
    for a, b in TOMO_SETTINGS:
        v = ket(a + b).amplitudes
        out[(a, b)] = float(np.real(np.vdot(v, m @ v)))
    return out


def sample_frequencies(rho, mean_counts: float, rng: np.random.Generator) -> dict[tuple[str, str], int]:
    """Poisson counts averaging ``mean_counts`` per analyzer setting.

    Each setting's mean is proportional to its Born probability, scaled so
    that the 16 means average to ``mean_counts``.
    """
    probs = exact_frequencies(rho)
    p = np.clip(np.array(list(probs.values())), 0, None)
    lam = p * mean_counts * p.size / p.sum()
    return dict(zip(probs, (int(c) for c in rng.poisson(lam))))


# --- process tomography -----------------------------------------------------


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix with ``E(rho) = sum_mn chi_mn P_m rho P_n``.

    ``raw`` keeps the linear-inversion estimate before the positivity
    projection when the matrix came out of ``process_tomo``.
    """

    elements: np.ndarray
    raw: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        chi = np.array(self.elements, dtype=complex)
        if chi.shape != (16, 16):
            raise ValueError(f"chi matrix must be 16x16, got {chi.shape}")
        if np.max(np.abs(chi - chi.conj().T)) > HERMITIAN_TOL:
            raise ValueError("chi matrix is not Hermitian")
        if abs(np.trace(chi).real - 1) > TRACE_TOL:
            raise ValueError(f"chi matrix trace is {np.trace(chi).real!r}")
        if np.linalg.eigvalsh(chi).min() < -PSD_TOL:
            raise ValueError("chi matrix is not positive semidefinite")
        chi.setflags(write=False)
        object.__setattr__(self, "elements", chi)

    def apply(self, rho) -> np.ndarray:
        m = np.asarray(getattr(rho, "elements", rho))
        out = np.zeros((4, 4), dtype=complex)
        for i, pi in enumerate(PAULI_2Q):
            for j, pj in enumerate(PAULI_2Q):
                if self.elements[i, j] != 0:
                    out += self.elements[i, j] * pi @ m @ pj
        return out


def _choi_basis() -> np.ndarray:
    # column m is (I x P_m)|Omega>, |Omega> = sum_j |jj>
    return np.stack([p.T.reshape(-1) for p in PAULI_2Q], axis=1)


_CHOI_BASIS = _choi_basis()


def chi_from_choi(choi: np.ndarray) -> np.ndarray:
    """Chi matrix of the channel with Choi matrix ``sum_jk |j><k| x E(|j><k|)``."""
    return _CHOI_BASIS.conj().T @ choi @ _CHOI_BASIS / 16


def chi_of_unitary(unitary: Operator | np.ndarray) -> ChiMatrix:
    u = np.asarray(getattr(unitary, "elements", unitary))
    c = np.array([np.trace(p @ u) / 4 for p in PAULI_2Q])
    return ChiMatrix(np.outer(c, c.conj()))


def chi_of_kraus(kraus) -> ChiMatrix:
    chi = np.zeros((16, 16), dtype=complex)
    for k in kraus:
        k = np.asarray(getattr(k, "elements", k))
        c = np.array([np.trace(p @ k) / 4 for p in PAULI_2Q])
        chi += np.outer(c, c.conj())
    return ChiMatrix(chi)


def _input_matrices() -> dict[str, np.ndarray]:
    return {label: ket(label).to_density().elements for label in QPT_INPUTS}


def process_tomo(outputs: Mapping[str, DensityMatrix | np.ndarray]) -> ChiMatrix:
    """Chi matrix from the output states of the 16 product inputs.

    Outputs are keyed by input label (``"HH"``, ``"HV"``, ... ``"RR"``).
    """
    missing = [k for k in QPT_INPUTS if k not in outputs]
    if missing:
        raise TomographyError(f"missing process-tomography inputs: {missing}")
    outs = {}
    for k in QPT_INPUTS:
        try:
            rho = outputs[k] if isinstance(outputs[k], DensityMatrix) else DensityMatrix(outputs[k])
        except ValueError as err:
            raise TomographyError(f"output for input {k} is unphysical: {err}") from None
        outs[k] = rho.elements

    inputs = _input_matrices()
    basis = np.stack([inputs[k].reshape(-1) for k in QPT_INPUTS], axis=1)  # 16 x 16
    out_stack = np.stack([outs[k].reshape(-1) for k in QPT_INPUTS], axis=1)
    # E(|j><k|) for each matrix unit, by expanding the unit over the inputs
    coeffs = np.linalg.solve(basis, np.eye(16))
    unit_images = out_stack @ coeffs  # column jk -> vec E(|j><k|)

    choi = np.zeros((16, 16), dtype=complex)
    for idx in range(16):
        j, k = divmod(idx, 4)
        unit = np.zeros((4, 4))
        unit[j, k] = 1.0
        choi += np.kron(unit, unit_images[:, idx].reshape(4, 4))

    raw = chi_from_choi(choi)
    raw = (raw + raw.conj().T) / 2
    return ChiMatrix(project_to_physical(raw), raw=raw)


def predicted_outputs(chi: ChiMatrix) -> dict[str, np.ndarray]:
    """Normalized outputs the chi matrix predicts for the 16 inputs."""
    out = {}
    for label, rho in _input_matrices().items():
        m = chi.apply(rho)
        out[label] = m / np.trace(m).real
    return out


def consistency(chi: ChiMatrix, outputs: Mapping[str, DensityMatrix | np.ndarray]) -> float:
    """Largest trace distance between predicted and measured outputs."""
    pred = predicted_outputs(chi)
    return max(trace_distance(pred[k], outputs[k]) for k in QPT_INPUTS)


def process_fidelity(chi_meas: ChiMatrix, chi_ideal: ChiMatrix) -> float:
    """Overlap ``Tr(chi_meas chi_ideal)``; the process fidelity when ``chi_ideal`` is rank one."""
    return float(np.real(np.trace(chi_meas.elements @ chi_ideal.elements)))


def average_gate_fidelity(f_p: float, d: int = 4) -> float:
    """``(d F_P + 1) / (d + 1)``."""
    if not -1e-10 <= f_p <= 1 + 1e-10:
        raise ValueError(f"process fidelity must lie in [0, 1], got {f_p}")
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    return (d * f_p + 1) / (d + 1)


def entanglement_witness(rho: DensityMatrix, target: PureState) -> tuple[float, bool]:
    """Fidelity with a maximally entangled target and whether it exceeds 1/2."""
    if target.num_qubits != 2:
        raise ValueError("witness target must be a two-qubit state")
    schmidt = np.linalg.svd(target.amplitudes.reshape(2, 2), compute_uv=False)
    if np.max(np.abs(schmidt - 1 / np.sqrt(2))) > 1e-10:
        raise ValueError(f"target is not maximally entangled (Schmidt coefficients {schmidt})")
    f_s = state_fidelity(rho, target)
    return f_s, f_s > 0.5
