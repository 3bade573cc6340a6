import numpy as np
import pytest

from qmae.dataio import idx_images_bytes, idx_labels_bytes
from qmae.masking import make_grid
from qmae.model import ModelConfig


def digits_bytes():
    """scikit-learn's bundled 8x8 handwritten digits as uint8 images (0..16 -> 0..255)."""
    from sklearn.datasets import load_digits

    d = load_digits()
    images = np.round(d.images * (255 / 16)).astype(np.uint8)
    return images, d.target.astype(np.uint8)


@pytest.fixture(scope="session")
def digits_idx(tmp_path_factory):
    images, labels = digits_bytes()
    root = tmp_path_factory.mktemp("digits")
    img_path, lab_path = root / "digits-images-idx3-ubyte", root / "digits-labels-idx1-ubyte"
    img_path.write_bytes(idx_images_bytes(images))
    lab_path.write_bytes(idx_labels_bytes(labels))
    return img_path, lab_path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tiny_config(n=2, k=1, variant="qmae", shape=None, patch=None, n_masked=1):
    """Small model: 2x2 image for n=2, 2x4 image for n=3."""
    shape = shape or {2: (2, 2), 3: (2, 4)}[n]
    patch = patch or {2: (1, 1), 3: (1, 2)}[n]
    grid = make_grid(shape[0], shape[1], patch[0], patch[1])
    return ModelConfig(n, k, grid, n_masked=n_masked, variant=variant)


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_image(rng, shape):
    return rng.uniform(0.05, 1.0, size=shape)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
