"""Linear-optics model of the gate-teleportation apparatus.

Each photon carries two qubits, a polarization qubit and a path qubit. The
joint register is ordered like the protocol: position 0 is the polarization
of the upper photon (qubit 1), position 1 its path (qubit 2), position 2 the
path of the lower photon (qubit 3) and position 3 its polarization (qubit 4).

Jones-matrix conventions
------------------------
* Basis (H, V) = (0, 1). Rotation ``R(t) = [[cos t, sin t], [-sin t, cos t]]``.
* A wave plate with fast axis at angle ``t`` from H is
  ``R(-t) diag(1, exp(i*retardance)) R(t)``; global phases are dropped.
  So ``HWP(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]`` and
  ``QWP(0) = diag(1, i)``.
* A preparation element (A1-A4) is a QWP followed by a HWP along the beam:
  the prepared state is ``HWP(h) @ QWP(q) @ |H>``. Anchor states:
  H = (0, 0), D = (pi/8, 0), R = (0, pi/4).
* An analyzer (P1-P4) is a QWP followed by a HWP and a polarizer that
  transmits H. ``ANALYZER_ANGLES`` tabulates the plate angles for each
  basis label.
* A PBS transmits H (path unchanged) and reflects V (path flipped): a CNOT
  from polarization to path. The 50/50 BS uses the real symmetric
  convention ``[[1, 1], [1, -1]] / sqrt2`` so that output port 0 detects
  path ``|+>`` and port 1 detects ``|->``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import (
    DensityMatrix,
    Operator,
    PureState,
    apply,
    bell_phi_plus,
    ket,
    permute,
    tensor,
)
from .io import CoincidenceRow, CoincidenceTable
from .tomography import TOMO_SETTINGS

POL_A, PATH_A, PATH_B, POL_B = 0, 1, 2, 3
PHOTON_A = (POL_A, PATH_A)  # (polarization, path) factor order
PHOTON_B = (POL_B, PATH_B)

ANALYZER_LABELS = ("H", "V", "D", "A", "R", "L")

# detector pair -> (output path of the upper photon at PBS3, output port of the BS)
DETECTOR_PAIRS = {
    "D1D4": (0, 0),
    "D1D3": (0, 1),
    "D2D4": (1, 0),
    "D2D3": (1, 1),
}

# analyzer (hwp, qwp) angles selecting each basis element
ANALYZER_ANGLES = {
    "H": (0.0, 0.0),
    "V": (np.pi / 4, 0.0),
    "D": (np.pi / 8, np.pi / 4),
    "A": (-np.pi / 8, np.pi / 4),
    "R": (0.0, np.pi / 4),
    "L": (0.0, -np.pi / 4),
}

# preparation (hwp, qwp) angles for the input labels
PREP_ANGLES = {
    "H": (0.0, 0.0),
    "V": (np.pi / 4, 0.0),
    "D": (np.pi / 8, 0.0),
    "A": (-np.pi / 8, 0.0),
    "R": (0.0, np.pi / 4),
    "L": (0.0, -np.pi / 4),
}

# feed-forward corrections expressed as analyzer relabelings
_FLIP_X = {"H": "V", "V": "H", "D": "D", "A": "A", "R": "L", "L": "R"}
_FLIP_Z = {"H": "H", "V": "V", "D": "A", "A": "D", "R": "L", "L": "R"}


@dataclass(frozen=True)
class NoiseModel:
    """Imperfections of the source and the two Mach-Zehnder interferometers."""

    epr_visibility: float = 1.0
    mz_visibility_12: float = 1.0
    mz_visibility_3: float = 1.0
    mean_counts_per_setting: float = 1e4

    def __post_init__(self):
        for name in ("epr_visibility", "mz_visibility_12", "mz_visibility_3"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not self.mean_counts_per_setting > 0:
            raise ValueError("mean_counts_per_setting must be positive")

    @classmethod
    def ideal(cls, mean_counts_per_setting: float = 1e4) -> "NoiseModel":
        return cls(1.0, 1.0, 1.0, mean_counts_per_setting)

    @classmethod
    def reported(cls, mean_counts_per_setting: float = 1e4) -> "NoiseModel":
        """Visibilities quoted for the experiment: source 0.982, interferometers 0.85."""
        return cls(0.982, 0.85, 0.85, mean_counts_per_setting)


@dataclass(frozen=True)
class WavePlates:
    hwp: float = 0.0
    qwp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hwp", float(np.mod(self.hwp, np.pi)))
        object.__setattr__(self, "qwp", float(np.mod(self.qwp, np.pi)))

    def jones(self) -> Operator:
        return element_operator("hwp", self.hwp) @ element_operator("qwp", self.qwp)


@dataclass(frozen=True)
class PrepSetting:
    """Wave plates A1, A2 (upper photon, paths 0 and 1) and A3, A4 (lower photon)."""

    a1: WavePlates = field(default_factory=WavePlates)
    a2: WavePlates = field(default_factory=WavePlates)
    a3: WavePlates = field(default_factory=WavePlates)
    a4: WavePlates = field(default_factory=WavePlates)

    @classmethod
    def for_input(cls, label: str) -> "PrepSetting":
        """Settings preparing the product input ``label`` (e.g. ``"RR"``) on qubits 1, 4."""
        if len(label) != 2:
            raise ValueError(f"input label must name two qubits, got {label!r}")
        try:
            up = WavePlates(*PREP_ANGLES[label[0]])
            down = WavePlates(*PREP_ANGLES[label[1]])
        except KeyError as err:
            raise ValueError(f"unknown polarization label {err.args[0]!r}") from None
        return cls(up, up, down, down)

    @classmethod
    def for_states(cls, qubit1: PureState, qubit4: PureState) -> "PrepSetting":
        up = WavePlates(*angles_for_state(qubit1))
        down = WavePlates(*angles_for_state(qubit4))
        return cls(up, up, down, down)


# --- optical elements --------------------------------------------------------


def _rotation(t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [-s, c]])


def _retarder(angle: float, retardance: float) -> np.ndarray:
    return _rotation(-angle) @ np.diag([1.0, np.exp(1j * retardance)]) @ _rotation(angle)


def element_operator(kind: str, angle: float = 0.0) -> Operator:
    """Unitary of one optical element.

    ``hwp``/``qwp`` act on polarization (2x2), ``pbs`` on (polarization, path)
    (4x4) and ``bs_5050`` on path (2x2).
    """
    if kind == "hwp":
        return Operator(_retarder(angle, np.pi))
    if kind == "qwp":
        return Operator(_retarder(angle, np.pi / 2))
    if kind == "pbs":
        # H keeps its path, V swaps paths
        return Operator([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    if kind == "bs_5050":
        return Operator(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    raise ValueError(f"unknown optical element {kind!r}")


def in_path(jones: Operator, path: int) -> Operator:
    """Polarization element placed in one arm: acts on (polarization, path)."""
    sel = np.zeros((2, 2))
    sel[path, path] = 1.0
    rest = np.eye(2) - sel
    return Operator(np.kron(jones.elements, sel) + np.kron(np.eye(2), rest))


def prep_to_state(hwp: float, qwp: float) -> PureState:
    """Polarization prepared from ``|H>`` by a QWP followed by a HWP."""
    return PureState.from_unnormalized(WavePlates(hwp, qwp).jones().elements @ [1.0, 0.0])


def angles_for_state(target: PureState) -> tuple[float, float]:
    """Solve for (hwp, qwp) angles preparing ``target`` up to global phase.

    The QWP sets the ellipticity and the HWP the azimuth of the polarization
    ellipse; sign conventions are settled by checking the candidate pairs.
    """
    t = target.amplitudes
    s1 = abs(t[0]) ** 2 - abs(t[1]) ** 2
    s2 = 2 * np.real(np.conj(t[0]) * t[1])
    s3 = 2 * np.imag(np.conj(t[0]) * t[1])
    chi = 0.5 * np.arcsin(np.clip(s3, -1, 1))
    psi = 0.5 * np.arctan2(s2, s1)

    def loss(x):
        return 1.0 - abs(np.vdot(t, prep_to_state(*x).amplitudes)) ** 2

    candidates = [((psi + q) / 2 + k * np.pi / 2, q) for q in (chi, -chi) for k in (0, 1)]
    candidates += [((q - psi) / 2 + k * np.pi / 2, q) for q in (chi, -chi) for k in (0, 1)]
    best = min(candidates, key=loss)
    if loss(best) > 1e-12:
        best = minimize(loss, best, method="Nelder-Mead",
                        options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000}).x
    if loss(best) > 1e-10:
        raise RuntimeError(f"wave-plate decomposition failed (residual {loss(best):.2e})")
    h, q = best
    return float(np.mod(h, np.pi)), float(np.mod(q, np.pi))


@lru_cache(maxsize=None)
def analyzer_projector(label: str) -> np.ndarray:
    """Projector implemented by the analyzer plates plus an H polarizer (read-only)."""
    try:
        hwp, qwp = ANALYZER_ANGLES[label]
    except KeyError:
        raise ValueError(f"unknown analyzer label {label!r}") from None
    w = WavePlates(hwp, qwp).jones().elements
    h = np.array([[1.0, 0.0], [0.0, 0.0]])
    p = w.conj().T @ h @ w
    p.flags.writeable = False
    return p


def spdc_source(visibility: float) -> DensityMatrix:
    """Polarization state of the photon pair: Werner mixture around (HH + VV)/sqrt2."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    epr = bell_phi_plus().to_density().elements
    return DensityMatrix(visibility * epr + (1 - visibility) * np.eye(4) / 4)


def mz_dephase(state: DensityMatrix, path_qubit: int, visibility: float) -> DensityMatrix:
    """Scale the coherences of one path qubit by the interferometer visibility."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    n = state.num_qubits
    idx = np.arange(state.dim)
    bit = (idx >> (n - 1 - path_qubit)) & 1
    mask = np.where(bit[:, None] != bit[None, :], visibility, 1.0)
    return DensityMatrix(state.elements * mask)


# --- apparatus ---------------------------------------------------------------


@lru_cache(maxsize=256)
def evolve(prep: PrepSetting, noise: NoiseModel) -> DensityMatrix:
    """Four-qubit state arriving at the analyzers."""
    source = spdc_source(noise.epr_visibility)
    vacuum_paths = ket("00").to_density()
    # kron order (pol A, pol B, path A, path B)
    rho = permute(tensor(source, vacuum_paths), [0, 2, 3, 1])

    pbs = element_operator("pbs")
    flip = in_path(element_operator("hwp", np.pi / 4), 1)

    # PBS1/PBS2 split by polarization; HWP1/HWP2 in path 1 restore H
    rho = apply(pbs, rho, PHOTON_A)
    rho = apply(pbs, rho, PHOTON_B)
    rho = apply(flip, rho, PHOTON_A)
    rho = apply(flip, rho, PHOTON_B)

    # A1..A4 set the input polarizations arm by arm
    rho = apply(in_path(prep.a1.jones(), 0) @ in_path(prep.a2.jones(), 1), rho, PHOTON_A)
    rho = apply(in_path(prep.a3.jones(), 0) @ in_path(prep.a4.jones(), 1), rho, PHOTON_B)

    rho = mz_dephase(rho, PATH_A, noise.mz_visibility_12)
    rho = mz_dephase(rho, PATH_B, noise.mz_visibility_3)

    # PBS3 closes the upper interferometer (C12); HWP3 in path 1 of the lower photon (C34)
    rho = apply(pbs, rho, PHOTON_A)
    rho = apply(flip, rho, PHOTON_B)
    # the BS closes the lower interferometer
    return apply(element_operator("bs_5050"), rho, [PATH_B])


def physical_analyzers(setting: tuple[str, str], pair: str, feed_forward: bool = True) -> tuple[str, str]:
    """Analyzer labels actually used behind ``pair`` for a logical ``setting``.

    With feed-forward, the Pauli correction heralded by the detector pair is
    absorbed into the analyzers: a click in D2 (qubit 2 = 1) flips qubit 4
    in X, a click in D3 (qubit 3 = -) flips qubit 1 in Z.
    """
    l1, l4 = setting
    if not feed_forward:
        return l1, l4
    m2, m3 = DETECTOR_PAIRS[pair]
    if m3:
        l1 = _FLIP_Z[l1]
    if m2:
        l4 = _FLIP_X[l4]
    return l1, l4


def detection_probabilities(
    prep: PrepSetting,
    noise: NoiseModel,
    settings: Iterable[tuple[str, str]] = TOMO_SETTINGS,
    pairs: Sequence[str] = tuple(DETECTOR_PAIRS),
    feed_forward: bool = True,
) -> dict[tuple[str, str, str], float]:
    """Born-rule coincidence probabilities keyed by ``(setting_q1, setting_q4, pair)``.

    Each value is the probability that a photon pair fires ``pair`` and both
    photons pass their analyzers.
    """
    rho = evolve(prep, noise).elements.reshape((2,) * 8)
    probs = {}
    for setting in settings:
        for pair in pairs:
            m2, m3 = DETECTOR_PAIRS[pair]
            l1, l4 = physical_analyzers(setting, pair, feed_forward)
            p1 = analyzer_projector(l1)
            p4 = analyzer_projector(l4)
            # Tr[rho (P1 x |m2><m2| x |m3><m3| x P4)]
            block = rho[:, m2, m3, :, :, m2, m3, :]
            val = np.einsum("adbe,ba,ed->", block, p1, p4)
            probs[(setting[0], setting[1], pair)] = float(np.real(val))
    return probs


def simulate_run(
    prep: PrepSetting,
    noise: NoiseModel,
    settings: Iterable[tuple[str, str]] = TOMO_SETTINGS,
    seed=0,
    mean_counts: float | None = None,
    pairs: Sequence[str] = tuple(DETECTOR_PAIRS),
    feed_forward: bool = True,
) -> CoincidenceTable:
    """Poisson-sampled coincidence counts for each analyzer setting and detector pair.

    The mean count of a cell is its Born-rule probability times
    ``mean_counts`` (defaults to ``noise.mean_counts_per_setting``).
    ``seed`` is anything accepted by ``numpy.random.default_rng``.
    """
    mean = noise.mean_counts_per_setting if mean_counts is None else mean_counts
    if mean < 0:
        raise ValueError("mean counts must be non-negative")
    probs = detection_probabilities(prep, noise, settings, pairs, feed_forward)
    rng = np.random.default_rng(seed)
    lam = np.clip(np.array(list(probs.values())), 0.0, None) * mean
    counts = rng.poisson(lam)
    rows = [CoincidenceRow(l1, l4, pair, int(c)) for (l1, l4, pair), c in zip(probs, counts)]
    return CoincidenceTable(tuple(rows))
