"""
The pair-block ansatz
=====================

Each unordered qubit pair gets one 15-angle block. With every angle at zero a
block is a plain SWAP, and the decoder undoes the encoder exactly.
"""

import numpy as np

from qmae import statevec as sv
from qmae.ansatz import apply_decoder, apply_encoder, block_unitary, build_encoder

# %%
# Parameter count grows with the number of pairs.
for n in range(2, 9):
    print(f"n={n}: {build_encoder(n).n_params} angles")

# %%
# Zero angles give the SWAP matrix.
print(np.round(block_unitary(np.zeros(15)).real, 12))

# %%
# Round trip on a random 4-qubit state.
rng = np.random.default_rng(0)
c = build_encoder(4)
theta = rng.uniform(-np.pi, np.pi, c.n_params)
psi = rng.normal(size=16) + 1j * rng.normal(size=16)
psi /= np.linalg.norm(psi)
s = apply_decoder(apply_encoder(sv.from_amplitudes(psi), c, theta), c, theta)
print("max round-trip error", np.max(np.abs(s.amps - psi)))

# %%
# The first gates, in the dump format used by the command line.
print("\n".join(build_encoder(2).dump().splitlines()[:8]))
