from collections import Counter

import numpy as np
import pytest

from qmae import statevec as sv
from qmae.ansatz import (
    AnsatzCircuit,
    GateOp,
    apply_decoder,
    apply_encoder,
    block_unitary,
    build_encoder,
    build_pair_block,
    encode_batch,
    encode_shifted,
)
from qmae.errors import ParamError

from . import oracles
from .conftest import random_state


def block_matrix_oracle(theta):
    """Multiply the 18 gate matrices of a (0, 1) block as 4x4 dense matrices."""
    return oracles.circuit_unitary(build_pair_block(0, 1, 0), theta, 2)


def test_block_histogram():
    counts = Counter(g.kind for g in build_pair_block(0, 1, 0))
    assert counts == {"RZ": 9, "RY": 6, "CNOT": 3}
    assert len(build_pair_block(2, 5, 30)) == 18


def test_block_param_indices():
    idx = [g.param_index for g in build_pair_block(0, 1, 0) if g.param_index is not None]
    assert idx == list(range(15))
    idx = [g.param_index for g in build_pair_block(3, 1, 45) if g.param_index is not None]
    assert idx == list(range(45, 60))


def test_block_equal_qubits():
    with pytest.raises(IndexError):
        build_pair_block(1, 1, 0)


def test_zero_angle_block_is_swap():
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(block_matrix_oracle(np.zeros(15)), swap, atol=1e-15)


@pytest.mark.parametrize("n,params,gates", [(2, 15, 18), (4, 90, 108), (8, 420, 504)])
def test_encoder_sizes(n, params, gates):
    c = build_encoder(n)
    assert c.n_params == params
    assert len(c.gates) == gates


@pytest.mark.parametrize("n", range(2, 9))
def test_parameter_count_law(n):
    c = build_encoder(n)
    assert c.n_params == n * (n - 1) // 2 * 15
    counts = Counter(g.kind for g in c.gates)
    blocks = n * (n - 1) // 2
    assert counts == {"RZ": 9 * blocks, "RY": 6 * blocks, "CNOT": 3 * blocks}


def test_pair_order_lexicographic():
    c = build_encoder(4)
    firsts = [c.gates[18 * b].qubits[0] for b in range(6)]
    seconds = [c.gates[18 * b + 3].qubits[0] for b in range(6)]
    assert list(zip(firsts, seconds)) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_gateop_validation():
    with pytest.raises(ValueError):
        GateOp("RY", (0,))
    with pytest.raises(ValueError):
        GateOp("CNOT", (0, 1), 3)
    with pytest.raises(ValueError):
        GateOp("RX", (0,), 0)


def test_encoder_zero_angles_swaps_01_to_10():
    s = sv.zero_state(2)
    s.amps[:] = [0, 1, 0, 0]
    apply_encoder(s, build_encoder(2), np.zeros(15))
    assert np.allclose(s.amps, [0, 0, 1, 0])


def test_decoder_zero_angles_is_swap(rng):
    psi = random_state(rng, 2)
    s = apply_decoder(sv.from_amplitudes(psi), build_encoder(2), np.zeros(15))
    assert np.allclose(s.amps, np.eye(4)[[0, 2, 1, 3]] @ psi)


def test_encoder_length_mismatch():
    with pytest.raises(ParamError):
        apply_encoder(sv.zero_state(2), build_encoder(2), np.zeros(14))


def test_encoder_window_must_fit():
    with pytest.raises(ParamError):
        apply_encoder(sv.zero_state(3), build_encoder(2), np.zeros(15), base=2)


def test_single_gate_decoder_negates():
    c = AnsatzCircuit(1, (GateOp("RY", (0,), 0),), 1)
    s = apply_decoder(sv.zero_state(1), c, [0.8])
    assert np.allclose(s.amps, sv.apply_ry(sv.zero_state(1), 0, -0.8).amps)


def test_encoder_matches_dense(rng):
    c = build_encoder(3)
    theta = rng.uniform(-np.pi, np.pi, c.n_params)
    psi = random_state(rng, 5)
    got = apply_encoder(sv.from_amplitudes(psi), c, theta, base=1).amps
    want = oracles.circuit_unitary(c.gates, theta, 3, base=1, n_total=5) @ psi
    assert np.allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_round_trip_identity(rng, n):
    c = build_encoder(n)
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, c.n_params)
        psi = random_state(rng, n)
        s = apply_encoder(sv.from_amplitudes(psi), c, theta)
        assert abs(s.norm() - 1) < 1e-10
        apply_decoder(s, c, theta)
        assert np.max(np.abs(s.amps - psi)) < 1e-10


def test_block_touches_only_its_pair(rng):
    n = 4
    factors = [random_state(rng, 1) for _ in range(n)]
    psi = factors[0]
    for f in factors[1:]:
        psi = np.kron(psi, f)
    gates = tuple(build_pair_block(1, 3, 0))
    c = AnsatzCircuit(n, gates, 15)
    s = apply_encoder(sv.from_amplitudes(psi), c, rng.uniform(-3, 3, 15))
    for q in (0, 2):
        assert np.allclose(sv.reduced_density(s, [q]).entries, np.outer(factors[q], factors[q].conj()))


def test_block_unitary_matches_gate_product(rng):
    theta = rng.uniform(-np.pi, np.pi, (3, 15))
    fused = block_unitary(theta)
    for t, u in zip(theta, fused):
        assert np.allclose(u, block_matrix_oracle(t), atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_fused_encoder_matches_gatewise(rng, n):
    c = build_encoder(n)
    theta = rng.uniform(-np.pi, np.pi, (4, c.n_params))
    psi = np.stack([random_state(rng, n) for _ in range(4)])
    fused = encode_batch(psi, c, theta)
    for row, p, t in zip(fused, psi, theta):
        assert np.allclose(row, apply_encoder(sv.from_amplitudes(p), c, t).amps, atol=1e-12)


def test_encode_shifted_matches_explicit(rng):
    c = build_encoder(3)
    theta = rng.uniform(-np.pi, np.pi, c.n_params)
    psi = random_state(rng, 3)
    shifts = [0.3, -1.2]
    got = encode_shifted(psi, c, theta, shifts)
    assert got.shape == (2, c.n_params, 8)
    for a, s in enumerate(shifts):
        for j in range(c.n_params):
            th = theta.copy()
            th[j] += s
            assert np.allclose(got[a, j], apply_encoder(sv.from_amplitudes(psi), c, th).amps, atol=1e-12)


def test_dump_format():
    text = build_encoder(2).dump().splitlines()
    assert len(text) == 18
    assert text[0] == "RZ 0 0"
    assert text[6] == "CNOT 1,0 -"
