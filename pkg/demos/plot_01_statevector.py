"""
Statevector basics
==================

Qubit 0 is the most significant bit of the basis index. Gates act in place.
"""

import numpy as np

from qmae import statevec as sv

# %%
# A Bell pair: H on qubit 0, then CNOT 0 -> 1.
s = sv.zero_state(2)
sv.apply_h(s, 0)
sv.apply_cnot(s, 0, 1)
print("amplitudes", np.round(s.amps, 4))
print("<Z0> =", sv.expectation_z(s, 0))

# %%
# Tracing out either half leaves the maximally mixed state.
rho = sv.reduced_density(s, [0])
print("reduced state of qubit 0\n", np.round(rho.entries.real, 4))

# %%
# Shot estimates of <Z> are seeded, so repeated calls agree.
print("500-shot <Z1>:", sv.sample_z(s, 1, 500, seed=7), sv.sample_z(s, 1, 500, seed=7))
