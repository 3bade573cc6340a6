"""
Masking, embedding and the SWAP-test loss
=========================================

A 4x4 image is split into four 2x2 patches. One patch is replaced by the mask
token, the result is amplitude-embedded and compressed from 4 to 3 qubits.
The SWAP test against the clean image gives the fidelity the loss is built on.
"""

import numpy as np

from qmae.masking import insert_mask_token, make_grid, mask_spec
from qmae.metrics import fidelity
from qmae.model import QAE, ModelConfig, forward, init_params, reconstruct

image = np.linspace(0.1, 1.0, 16).reshape(4, 4)
grid = make_grid(4, 4, 2, 2)
spec = mask_spec(grid, [3])

# %%
# Zero filling versus a token of 0.5 in the lower-right patch.
print(insert_mask_token(image, grid, spec))
print(insert_mask_token(image, grid, spec, np.full(4, 0.5)))

# %%
# One forward pass on the full 10-qubit circuit: ancilla, 4 data, 4 reference, 1 reset.
cfg = ModelConfig(4, 3, grid)
params = init_params(cfg, np.random.default_rng(1))
out = forward(cfg, params, image, spec)
print(f"{cfg.n_total} qubits, <Z> = {out.sigma_z:.6f}, loss = {out.loss:.6f}")

# %%
# The SWAP test agrees with the fidelity of the reconstructed state.
pixels, rho = reconstruct(cfg, params, image, spec, return_rho=True)
ref = image.ravel() / np.linalg.norm(image)
print(f"direct fidelity {fidelity(rho, ref):.6f}")

# %%
# The baseline sees zeros where QMAE sees the token.
print(f"QAE <Z> = {forward(ModelConfig(4, 3, grid, variant=QAE), params, image, spec).sigma_z:.6f}")
