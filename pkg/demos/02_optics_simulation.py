"""
The linear-optics apparatus
===========================

Each photon carries two qubits: polarization and path. A polarizing beam
splitter acts as a CNOT from polarization to path, a 50/50 splitter measures
the path in the diagonal basis, and wave plates prepare and analyze
polarization.
"""

import numpy as np

from gate_teleport.optics import (
    DETECTOR_PAIRS,
    NoiseModel,
    PrepSetting,
    angles_for_state,
    detection_probabilities,
    prep_to_state,
    simulate_run,
)
from gate_teleport.core import random_state, state_fidelity

# wave-plate angles for the 16 canonical inputs, and for an arbitrary state
prep = PrepSetting.for_input("RR")
print("RR preparation (hwp, qwp) in degrees:",
      [np.degrees([w.hwp, w.qwp]).round(2).tolist() for w in (prep.a1, prep.a4)])
psi = random_state(1, np.random.default_rng(3))
h, q = angles_for_state(psi)
print("arbitrary state reached with fidelity", state_fidelity(prep_to_state(h, q), psi))

# exact coincidence probabilities, ideal and with the quoted visibilities
for noise in (NoiseModel.ideal(), NoiseModel.reported()):
    p = detection_probabilities(prep, noise, [("H", "R"), ("V", "L"), ("H", "L")])
    print(noise.epr_visibility, {k: round(v, 4) for k, v in p.items() if k[2] == "D1D4"})

# one simulated run: Poisson counts for every setting and detector pair
table = simulate_run(prep, NoiseModel.reported(), seed=1)
print(table.to_csv().splitlines()[:6])
for pair in DETECTOR_PAIRS:
    print(pair, sum(table.counts(pair).values()))
