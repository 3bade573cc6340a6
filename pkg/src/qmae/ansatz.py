"""
Pairwise-entangling encoder circuit and its adjoint decoder.

Every unordered qubit pair (i, j), i < j, visited in lexicographic order, gets
one 18-gate / 15-parameter block. Inside a block the order is fixed:

    RZ RY RZ on q_i, RZ RY RZ on q_j          params 0..5
    CNOT(q_j -> q_i), RZ(q_i), RY(q_j)        params 6, 7
    CNOT(q_i -> q_j), RY(q_j)                 param 8
    CNOT(q_j -> q_i)
    RZ RY RZ on q_i, RZ RY RZ on q_j          params 9..14

With every angle at zero the three alternating CNOTs compose to SWAP(q_i, q_j).
Qubit indices are local to the circuit; ``base`` shifts them onto a contiguous
window of a larger register (qubit 0 = most significant bit, as in ``statevec``).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import statevec as sv
from .errors import ParamError

RY, RZ, CNOT = "RY", "RZ", "CNOT"
PARAMS_PER_BLOCK = 15
GATES_PER_BLOCK = 18


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple
    param_index: int | None = None

    def __post_init__(self):
        if self.kind in (RY, RZ):
            if self.param_index is None or len(self.qubits) != 1:
                raise ValueError(f"{self.kind} needs one qubit and one parameter index")
        elif self.kind == CNOT:
            if self.param_index is not None or len(self.qubits) != 2:
                raise ValueError("CNOT takes two qubits and no parameter")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")


@dataclass(frozen=True)
class AnsatzCircuit:
    n_qubits: int
    gates: tuple
    n_params: int

    def dump(self) -> str:
        """One line per gate: kind, qubits, parameter index (``-`` for none)."""
        lines = []
        for g in self.gates:
            qs = ",".join(str(q) for q in g.qubits)
            p = "-" if g.param_index is None else str(g.param_index)
            lines.append(f"{g.kind} {qs} {p}")
        return "\n".join(lines) + "\n"


def n_params(n: int) -> int:
    return n * (n - 1) // 2 * PARAMS_PER_BLOCK


def _euler(q, offset):
    return [GateOp(RZ, (q,), offset), GateOp(RY, (q,), offset + 1), GateOp(RZ, (q,), offset + 2)]


def build_pair_block(q_i: int, q_j: int, param_offset: int = 0) -> list:
    if q_i == q_j:
        raise IndexError(f"pair block needs two distinct qubits, got {q_i} twice")
    p = param_offset
    return [
        *_euler(q_i, p),
        *_euler(q_j, p + 3),
        GateOp(CNOT, (q_j, q_i)),
        GateOp(RZ, (q_i,), p + 6),
        GateOp(RY, (q_j,), p + 7),
        GateOp(CNOT, (q_i, q_j)),
        GateOp(RY, (q_j,), p + 8),
        GateOp(CNOT, (q_j, q_i)),
        *_euler(q_i, p + 9),
        *_euler(q_j, p + 12),
    ]


@lru_cache(maxsize=None)
def build_encoder(n: int) -> AnsatzCircuit:
    if n < 2:
        raise ValueError(f"encoder needs at least 2 qubits, got {n}")
    gates = []
    for b, (i, j) in enumerate(combinations(range(n), 2)):
        gates.extend(build_pair_block(i, j, b * PARAMS_PER_BLOCK))
    return AnsatzCircuit(n, tuple(gates), n_params(n))


def init_theta(c: AnsatzCircuit, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=c.n_params)


def _check(s_qubits, c: AnsatzCircuit, theta, base):
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1:] != (c.n_params,):
        raise ParamError(f"theta has {theta.shape[-1:]} entries, circuit needs {c.n_params}")
    if base < 0 or base + c.n_qubits > s_qubits:
        raise ParamError(
            f"circuit window [{base}, {base + c.n_qubits}) does not fit in {s_qubits} qubits"
        )
    return theta


def _run(amps, n_total, c, theta, base, sign, reverse):
    # theta is (..., n_params); the leading axes batch over amps' leading axes
    gates = reversed(c.gates) if reverse else c.gates
    for g in gates:
        if g.kind == CNOT:
            sv._cnot(amps, n_total, g.qubits[0] + base, g.qubits[1] + base)
        elif g.kind == RY:
            sv._ry(amps, n_total, g.qubits[0] + base, sign * theta[..., g.param_index])
        else:
            sv._rz(amps, n_total, g.qubits[0] + base, sign * theta[..., g.param_index])
    return amps


def apply_encoder(s: sv.StateVector, c: AnsatzCircuit, theta, base: int = 0) -> sv.StateVector:
    theta = _check(s.n_qubits, c, theta, base)
    _run(s.amps, s.n_qubits, c, theta, base, 1.0, False)
    return s


def apply_decoder(s: sv.StateVector, c: AnsatzCircuit, theta, base: int = 0) -> sv.StateVector:
    """Exact adjoint of ``apply_encoder``: reversed gate order, negated angles."""
    theta = _check(s.n_qubits, c, theta, base)
    _run(s.amps, s.n_qubits, c, theta, base, -1.0, True)
    return s


# -- fused route: each pair block collapsed to one 4x4 unitary -----------------------

_CNOT_JI = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
_CNOT_IJ = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _rot(kind, theta):
    half = np.asarray(theta, dtype=float) / 2
    m = np.zeros(half.shape + (2, 2), dtype=complex)
    if kind == RY:
        c, s = np.cos(half), np.sin(half)
        m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1] = c, -s, s, c
    else:
        m[..., 0, 0], m[..., 1, 1] = np.exp(-1j * half), np.exp(1j * half)
    return m


_I2 = np.eye(2)


def _on_first(m):
    # m (x) I in the |q_i q_j> basis
    return np.einsum("...ac,bd->...abcd", m, _I2).reshape(m.shape[:-2] + (4, 4))


def _on_second(m):
    return np.einsum("ac,...bd->...abcd", _I2, m).reshape(m.shape[:-2] + (4, 4))


def block_unitary(theta_block) -> np.ndarray:
    """4x4 matrix of one pair block, basis |q_i q_j> with q_i most significant.

    ``theta_block`` has shape (..., 15); the result has shape (..., 4, 4).
    """
    theta_block = np.asarray(theta_block, dtype=float)
    u = np.broadcast_to(np.eye(4, dtype=complex), theta_block.shape[:-1] + (4, 4)).copy()
    for g in build_pair_block(0, 1, 0):
        if g.kind == CNOT:
            gate = _CNOT_IJ if g.qubits == (0, 1) else _CNOT_JI
        else:
            m = _rot(g.kind, theta_block[..., g.param_index])
            gate = _on_first(m) if g.qubits[0] == 0 else _on_second(m)
        u = gate @ u
    return u


def _apply_two(amps, n, i, j, u):
    lead = amps.shape[:-1]
    nl = len(lead)
    t = amps.reshape(lead + (2**i, 2, 2 ** (j - i - 1), 2, 2 ** (n - j - 1)))
    # pair axes last: (..., x, y, z, a, b) -> (..., xyz, 4)
    t = t.transpose(tuple(range(nl)) + (nl, nl + 2, nl + 4, nl + 1, nl + 3))
    out = t.reshape(lead + (2 ** (n - 2), 4)) @ np.swapaxes(u, -1, -2)
    out = out.reshape(out.shape[:-2] + (2**i, 2 ** (j - i - 1), 2 ** (n - j - 1), 2, 2))
    nl = out.ndim - 5
    out = out.transpose(tuple(range(nl)) + (nl, nl + 3, nl + 1, nl + 4, nl + 2))
    return out.reshape(out.shape[:nl] + (2**n,))


def encode_batch(amps: np.ndarray, c: AnsatzCircuit, theta: np.ndarray) -> np.ndarray:
    """U(theta) applied to ``amps`` (..., 2**n) with theta (..., n_params); returns a new array.

    Numerically equivalent to ``apply_encoder`` but applies one fused 4x4
    unitary per pair block.
    """
    n = c.n_qubits
    theta = np.asarray(theta, dtype=float)
    out = np.asarray(amps, dtype=complex)
    for b, (i, j) in enumerate(combinations(range(n), 2)):
        u = block_unitary(theta[..., b * PARAMS_PER_BLOCK:(b + 1) * PARAMS_PER_BLOCK])
        out = _apply_two(out, n, i, j, u)
    return out


def encode_shifted(amps: np.ndarray, c: AnsatzCircuit, theta: np.ndarray, shifts) -> np.ndarray:
    """U(theta + s e_j) amps for every shift s in ``shifts`` and every parameter j.

    ``amps`` is a single state (2**n,), ``theta`` a single vector. Returns an
    array of shape (len(shifts), n_params, 2**n). Each pair block only sees its
    own 15 shifted rows, so the batch grows block by block instead of pushing
    all rows through every block.
    """
    n = c.n_qubits
    theta = np.asarray(theta, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    pairs = list(combinations(range(n), 2))
    nb, ns = len(pairs), shifts.size

    base = block_unitary(theta.reshape(nb, PARAMS_PER_BLOCK))
    rows = np.broadcast_to(theta.reshape(nb, 1, 1, PARAMS_PER_BLOCK),
                           (nb, ns, PARAMS_PER_BLOCK, PARAMS_PER_BLOCK)).copy()
    eye = np.eye(PARAMS_PER_BLOCK)
    rows += shifts.reshape(1, ns, 1, 1) * eye
    shifted = block_unitary(rows).reshape(nb, ns * PARAMS_PER_BLOCK, 4, 4)

    prefix = np.asarray(amps, dtype=complex)
    active = np.zeros((0, 2**n), dtype=complex)
    for b, (i, j) in enumerate(pairs):
        fresh = _apply_two(prefix, n, i, j, shifted[b])
        active = np.concatenate([_apply_two(active, n, i, j, base[b]), fresh])
        prefix = _apply_two(prefix, n, i, j, base[b])
    # active rows are ordered (block, shift, param-in-block)
    out = active.reshape(nb, ns, PARAMS_PER_BLOCK, 2**n).transpose(1, 0, 2, 3)
    return out.reshape(ns, nb * PARAMS_PER_BLOCK, 2**n)
