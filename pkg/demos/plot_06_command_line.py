"""
The command line, end to end
============================

Builds a small IDX dataset of noisy digit-like glyphs and drives the
``train``, ``eval`` and ``reconstruct`` commands. The same calls work on the
real MNIST files via ``--images`` and ``--labels``.
"""

import tempfile
from pathlib import Path

import numpy as np

from qmae import cli
from qmae.dataio import idx_images_bytes, idx_labels_bytes

rng = np.random.default_rng(0)
root = Path(tempfile.mkdtemp())

# %%
# Three glyph classes on an 8x8 canvas: vertical bar, horizontal bar, box.
shapes = np.zeros((3, 8, 8))
shapes[0, 1:7, 3:5] = 1
shapes[1, 3:5, 1:7] = 1
shapes[2, 1:7, 1:7] = 1
shapes[2, 2:6, 2:6] = 0
labels = rng.integers(0, 3, 60).astype(np.uint8)
images = np.clip(shapes[labels] + rng.normal(0, 0.1, (60, 8, 8)), 0, 1)
(root / "img").write_bytes(idx_images_bytes(np.round(images * 255)))
(root / "lab").write_bytes(idx_labels_bytes(labels))

data = ["--images", str(root / "img"), "--labels", str(root / "lab")]

# %%
# Train briefly, then evaluate on a held-out slice and render two samples.
cli.main(["train", *data, "--limit", "40", "--epochs", "2", "--out", str(root / "run")])
ck = str(root / "run" / "checkpoint.txt")
cli.main(["eval", *data, "--offset", "40", "--checkpoint", ck, "--out", str(root / "eval")])
cli.main(["reconstruct", *data, "--checkpoint", ck, "--indices", "0,1", "--out", str(root / "pgm")])

# %%
# Every run leaves a run.cfg that reproduces it with --config.
print((root / "run" / "run.cfg").read_text())
