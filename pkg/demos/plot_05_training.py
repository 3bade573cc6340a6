"""
Training QMAE against the zero-filled baseline
==============================================

Synthetic 4x4 bar images, 4 data qubits compressed to 3, one masked quadrant.
Both variants start from the same seed and see the same masks.
"""

import tempfile
from pathlib import Path

import numpy as np

from qmae.dataio import write_pgm
from qmae.masking import make_grid
from qmae.metrics import evaluation_masks
from qmae.model import QAE, QMAE, ModelConfig, fast_forward, masked_input, reconstruct
from qmae.optim import train

rng = np.random.default_rng(0)


def bars(n):
    out = []
    for _ in range(n):
        img = np.full((4, 4), 0.1)
        if rng.random() < 0.5:
            img[:, rng.integers(4)] = 1.0
        else:
            img[rng.integers(4), :] = 1.0
        out.append(np.clip(img + rng.normal(0, 0.05, (4, 4)), 0, 1))
    return out


train_set, test_set = bars(24), bars(16)
grid = make_grid(4, 4, 2, 2)

# %%
# Same seed, same masks, only the token differs.
results = {}
for variant in (QMAE, QAE):
    cfg = ModelConfig(4, 3, grid, variant=variant)
    params, log = train(cfg, train_set, epochs=10, seed=0, lr=0.05)
    masks = evaluation_masks(cfg, len(test_set), seed=1)
    fid = np.mean([fast_forward(cfg, params, x, m) for x, m in zip(test_set, masks)])
    results[variant] = (cfg, params)
    print(f"{variant}: loss {log.epoch_means[0]:.3f} -> {log.epoch_means[-1]:.3f}, test fidelity {fid:.4f}")

# %%
# Write one original / masked / reconstructed strip per variant.
out = Path(tempfile.mkdtemp())
mask = evaluation_masks(results[QMAE][0], 1, seed=1)[0]
for variant, (cfg, params) in results.items():
    x = test_set[0]
    strip = np.hstack([x, masked_input(cfg, params, x, mask), reconstruct(cfg, params, x, mask)])
    write_pgm(strip, out / f"{variant}.pgm")
print("wrote", sorted(p.name for p in out.iterdir()), "to", out)
