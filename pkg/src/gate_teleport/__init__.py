"""Simulation and tomography of CNOT gate teleportation with linear optics."""
from .core import DensityMatrix, Operator, PureState, ket, state_fidelity
from .optics import NoiseModel, PrepSetting, simulate_run
from .protocol import teleport, verify_identity
from .tomography import ChiMatrix, average_gate_fidelity, process_fidelity, process_tomo, state_tomo

__all__ = [
    "ChiMatrix",
    "DensityMatrix",
    "NoiseModel",
    "Operator",
    "PrepSetting",
    "PureState",
    "average_gate_fidelity",
    "ket",
    "process_fidelity",
    "process_tomo",
    "simulate_run",
    "state_fidelity",
    "state_tomo",
    "teleport",
    "verify_identity",
]
