"""
Teleporting a CNOT through a shared pair
========================================

Qubits 1 and 4 carry the input; qubits 2 and 3 hold the shared resource.
After two local CNOTs and two single-qubit measurements, a Pauli correction
leaves CNOT applied to qubits (1, 4).
"""

import numpy as np

from gate_teleport.core import PureState, ket, random_state, state_fidelity
from gate_teleport.protocol import ideal_output, teleport, verify_identity, werner_resource

# the four measurement outcomes and what each one asks us to undo
corrections = {(0, "+"): "I", (0, "-"): "Z on qubit 1", (1, "+"): "X on qubit 4", (1, "-"): "-Z1 X4"}
for outcome, name in corrections.items():
    print(outcome, name)

# right-circular input on both qubits; the output is entangled
target = PureState.from_unnormalized(ket("HR").amplitudes - ket("VL").amplitudes)
for b in teleport(ket("RR")):
    print(f"m2={b.m2} m3={b.m3}  p={b.probability:.3f}  F={state_fidelity(b.corrected_output, target):.12f}")

# the identity on random inputs
rng = np.random.default_rng(0)
worst = max(verify_identity(random_state(2, rng)).max_deviation for _ in range(100))
print("largest amplitude deviation over 100 random inputs:", worst)

# a noisy resource degrades every branch alike
psi = random_state(2, rng)
for v in (1.0, 0.9, 0.7, 0.5):
    outs = teleport(psi, werner_resource(v))
    f = sum(b.probability * state_fidelity(b.output, ideal_output(psi)) for b in outs)
    print(f"resource visibility {v:.1f}: mean output fidelity {f:.4f}")
