"""Amplitude embedding of pixel vectors and pixel recovery from density matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import statevec as sv
from .errors import DegenerateInputError, NumericalError, StateError


@dataclass(frozen=True)
class EmbeddedInput:
    norm: float
    n_qubits: int
    source_len: int


def normalized(x, width: int) -> tuple[np.ndarray, float]:
    """Zero-pad ``x`` to 2**width entries and scale to unit Euclidean norm."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size > 2**width:
        raise ValueError(f"{x.size} values do not fit in a {width}-qubit register")
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise DegenerateInputError("cannot embed an all-zero vector")
    out = np.zeros(2**width)
    out[: x.size] = x / norm
    return out, norm


def amplitude_embed(x, s: sv.StateVector, base: int, width: int) -> EmbeddedInput:
    """Load x/||x|| onto qubits [base, base+width); the register must hold |0...0>."""
    if base < 0 or base + width > s.n_qubits or width < 1:
        raise IndexError(f"register [{base}, {base + width}) outside {s.n_qubits}-qubit state")
    vec, norm = normalized(x, width)
    v = s.amps.reshape(2**base, 2**width, -1)
    if np.any(np.abs(v[:, 1:, :]) > 1e-12):
        raise StateError(f"register [{base}, {base + width}) is not in |0...0>")
    v[...] = v[:, :1, :] * vec[None, :, None]
    return EmbeddedInput(norm, width, int(np.asarray(x).size))


def extract_image(rho: sv.DensityMatrix, norm: float, out_len: int) -> np.ndarray:
    """Pixels from magnitudes only: sqrt(diag(rho)) * norm, clamped to [0, 1].

    Phases are discarded, which is lossless for nonnegative inputs.
    """
    diag = np.real(np.diagonal(rho.entries))
    if out_len > diag.size:
        raise ValueError(f"out_len {out_len} exceeds matrix side {diag.size}")
    if diag.min() < -1e-9:
        raise NumericalError(f"density diagonal has negative entry {diag.min():.3e}")
    pix = np.sqrt(np.clip(diag[:out_len], 0.0, None)) * norm
    return np.clip(pix, 0.0, 1.0)
