"""
Dense statevector simulator.

Bit ordering: qubit 0 is the most significant bit of the basis index, so for
three qubits ``|100>`` is index 4.

Gate functions mutate the ``StateVector`` in place and return it, so calls can
be chained. The underscore-prefixed kernels work on raw amplitude arrays with
any number of leading batch axes (shape ``(..., 2**n)``); the batched model
path uses them directly to push many parameter settings through one circuit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceError

MAX_QUBITS = 24
MAX_REDUCED_QUBITS = 12

_SQRT2_INV = 1.0 / np.sqrt(2.0)


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amps.shape}"
            )

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def trace(self) -> complex:
        return complex(np.trace(self.entries))


def zero_state(n: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    if n < 1 or n > max_qubits:
        raise ValueError(f"invalid qubit count {n} (allowed 1..{max_qubits})")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def from_amplitudes(amps) -> StateVector:
    amps = np.asarray(amps, dtype=complex)
    n = int(round(np.log2(amps.size)))
    if 2**n != amps.size or amps.ndim != 1:
        raise ValueError(f"amplitude vector length {amps.size} is not a power of two")
    return StateVector(n, amps.copy())


# -- raw kernels ---------------------------------------------------------------

def _split(amps: np.ndarray, n: int, q: int) -> np.ndarray:
    return amps.reshape(amps.shape[:-1] + (2**q, 2, 2 ** (n - q - 1)))


def _tensor(amps: np.ndarray, n: int) -> np.ndarray:
    return amps.reshape(amps.shape[:-1] + (2,) * n)


def _angle(theta) -> np.ndarray:
    # per-batch angles broadcast against (..., 2**q, 2**(n-q-1))
    theta = np.asarray(theta, dtype=float)
    return theta.reshape(theta.shape + (1, 1)) if theta.ndim else theta


def _ry(amps, n, q, theta):
    v = _split(amps, n, q)
    half = _angle(theta) / 2
    c, s = np.cos(half), np.sin(half)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = c * a0 - s * a1
    v[..., 1, :] = s * a0 + c * a1
    return amps


def _rz(amps, n, q, theta):
    v = _split(amps, n, q)
    half = _angle(theta) / 2
    v[..., 0, :] *= np.exp(-1j * half)
    v[..., 1, :] *= np.exp(1j * half)
    return amps


def _h(amps, n, q):
    v = _split(amps, n, q)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = (a0 + a1) * _SQRT2_INV
    v[..., 1, :] = (a0 - a1) * _SQRT2_INV
    return amps


def _controlled_view(t: np.ndarray, n: int, control: int):
    lead = t.ndim - n
    idx = (slice(None),) * (lead + control) + (1,)
    return t[idx], lead


def _cnot(amps, n, control, target):
    t = _tensor(amps, n)
    sub, lead = _controlled_view(t, n, control)
    axis = lead + (target - 1 if target > control else target)
    sub[...] = np.flip(sub, axis=axis).copy()
    return amps


def _swap(amps, n, a, b):
    t = _tensor(amps, n)
    lead = t.ndim - n
    t[...] = np.swapaxes(t, lead + a, lead + b).copy()
    return amps


def _cswap(amps, n, control, a, b):
    t = _tensor(amps, n)
    sub, lead = _controlled_view(t, n, control)
    ax_a = lead + (a - 1 if a > control else a)
    ax_b = lead + (b - 1 if b > control else b)
    sub[...] = np.swapaxes(sub, ax_a, ax_b).copy()
    return amps


# -- checked public gate API ---------------------------------------------------

def _check_qubits(s: StateVector, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < s.n_qubits:
            raise IndexError(f"qubit {q} out of range for {s.n_qubits}-qubit state")
    if len(set(qubits)) != len(qubits):
        raise IndexError(f"qubit indices must be distinct, got {qubits}")


def apply_ry(s: StateVector, q: int, theta: float) -> StateVector:
    """RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]] on qubit ``q``."""
    _check_qubits(s, q)
    _ry(s.amps, s.n_qubits, q, theta)
    return s


def apply_rz(s: StateVector, q: int, theta: float) -> StateVector:
    """RZ(theta) = diag(exp(-i t/2), exp(+i t/2)) on qubit ``q``."""
    _check_qubits(s, q)
    _rz(s.amps, s.n_qubits, q, theta)
    return s


def apply_h(s: StateVector, q: int) -> StateVector:
    _check_qubits(s, q)
    _h(s.amps, s.n_qubits, q)
    return s


def apply_cnot(s: StateVector, control: int, target: int) -> StateVector:
    _check_qubits(s, control, target)
    _cnot(s.amps, s.n_qubits, control, target)
    return s


def apply_swap(s: StateVector, a: int, b: int) -> StateVector:
    _check_qubits(s, a, b)
    _swap(s.amps, s.n_qubits, a, b)
    return s


def apply_cswap(s: StateVector, control: int, a: int, b: int) -> StateVector:
    """Exchange qubits ``a`` and ``b`` on the branch where ``control`` is 1."""
    _check_qubits(s, control, a, b)
    _cswap(s.amps, s.n_qubits, control, a, b)
    return s


# -- measurement-like quantities -------------------------------------------------

def _prob_zero(amps, n, q):
    v = _split(amps, n, q)
    return np.sum(np.abs(v[..., 0, :]) ** 2, axis=(-2, -1))


def expectation_z(s: StateVector, q: int) -> float:
    _check_qubits(s, q)
    p0 = _prob_zero(s.amps, s.n_qubits, q)
    p1 = np.sum(np.abs(s.amps) ** 2) - p0
    return float(p0 - p1)


def sample_z(s: StateVector, q: int, shots: int, seed: int) -> float:
    """Shot estimate of <Z_q>: mean of +/-1 outcomes drawn from |amps|^2."""
    _check_qubits(s, q)
    if shots < 1:
        raise ValueError("shots must be positive")
    probs = np.abs(s.amps) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(probs.size, size=shots, p=probs)
    bit = (outcomes >> (s.n_qubits - 1 - q)) & 1
    return float(np.mean(1 - 2 * bit))


def reduced_density(s: StateVector, keep) -> DensityMatrix:
    """Partial trace over every qubit not listed in ``keep`` (kept in the given order)."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    _check_qubits(s, *keep)
    if len(keep) > MAX_REDUCED_QUBITS:
        raise ResourceError(
            f"reduced density over {len(keep)} qubits exceeds the {MAX_REDUCED_QUBITS}-qubit guard"
        )
    n = s.n_qubits
    rest = [q for q in range(n) if q not in keep]
    m = np.transpose(_tensor(s.amps, n), keep + rest).reshape(2 ** len(keep), -1)
    return DensityMatrix(len(keep), m @ m.conj().T)
