"""
Masked quantum autoencoder circuit: forward pass, reconstruction and loss.

Full-circuit qubit layout (qubit 0 = most significant bit)::

    [0]                 SWAP-test ancilla
    [1, n]              data register; latent = first k, trash = last t
    [n+1, 2n]           reference register (original, unmasked image)
    [2n+1, 2n+t]        fresh |0> ancillas that the trash qubits are swapped into

Swapping each trash qubit with a fresh ancilla resets it to |0> while keeping
the global state pure, so the decoder acts on exactly the traced-and-reset
density matrix.

Besides the full statevector route (``forward``), ``sigma_z_batch`` evaluates the
same SWAP-test expectation directly from the n-qubit encoder outputs:

    phi = U psi,  chi = U a,  sigma_z = sum_b |<chi_(:,0) | phi_(:,b)>|^2

where the (latent, trash) split reshapes each vector to 2**k x 2**t. The two
occurrences of theta (encoder acting on psi, decoder acting on the reference
through U^dagger) are carried separately so shift rules can address either one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import statevec as sv
from .ansatz import (
    apply_decoder,
    apply_encoder,
    build_encoder,
    encode_batch,
    init_theta,
)
from .embedding import amplitude_embed, extract_image, normalized
from .errors import ConfigError, DegenerateInputError, FormatError
from .masking import TOKEN_INIT, MaskSpec, PatchGrid, insert_mask_token

QMAE, QAE = "qmae", "qae"
CHECKPOINT_MAGIC = "qmae-params"
CHECKPOINT_VERSION = "v1"


@dataclass(frozen=True)
class ModelConfig:
    n_data: int
    n_latent: int
    grid: PatchGrid
    n_masked: int = 1
    variant: str = QMAE
    shots: int | None = None  # None -> analytic expectation
    shot_seed: int = 0

    def __post_init__(self):
        if self.variant not in (QMAE, QAE):
            raise ConfigError(f"variant must be {QMAE!r} or {QAE!r}, got {self.variant!r}")
        if self.n_data < 2:
            raise ConfigError(f"need at least 2 data qubits, got {self.n_data}")
        if not 1 <= self.n_latent < self.n_data:
            raise ConfigError(
                f"latent qubits must satisfy 1 <= k < n (k={self.n_latent}, n={self.n_data})"
            )
        pixels = self.grid.image_h * self.grid.image_w
        if pixels > 2**self.n_data:
            raise ConfigError(f"{pixels} pixels do not fit in {self.n_data} data qubits")
        if not 0 <= self.n_masked <= self.grid.n_patches:
            raise ConfigError(f"n_masked={self.n_masked} outside 0..{self.grid.n_patches}")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be positive")

    @property
    def n_trash(self) -> int:
        return self.n_data - self.n_latent

    @property
    def n_total(self) -> int:
        return 2 * self.n_data + self.n_trash + 1

    @property
    def data_qubits(self) -> list:
        return list(range(1, self.n_data + 1))

    @property
    def reference_qubits(self) -> list:
        return list(range(self.n_data + 1, 2 * self.n_data + 1))

    @property
    def reset_ancillas(self) -> list:
        return list(range(2 * self.n_data + 1, self.n_total))

    @property
    def circuit(self):
        return build_encoder(self.n_data)

    @property
    def n_theta(self) -> int:
        return self.circuit.n_params

    @property
    def n_token(self) -> int:
        return self.grid.patch_area

    @property
    def n_params(self) -> int:
        return self.n_theta + self.n_token

    @property
    def image_shape(self) -> tuple:
        return (self.grid.image_h, self.grid.image_w)


@dataclass
class ParamSet:
    theta: np.ndarray
    token: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.theta, self.token])

    @classmethod
    def from_flat(cls, flat, n_theta: int) -> ParamSet:
        flat = np.asarray(flat, dtype=float)
        return cls(flat[:n_theta].copy(), flat[n_theta:].copy())

    def copy(self) -> ParamSet:
        return ParamSet(self.theta.copy(), self.token.copy())


@dataclass
class ForwardResult:
    sigma_z: float
    loss: float
    reconstruction: np.ndarray
    input_norm: float
    extras: dict = field(default_factory=dict)


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> ParamSet:
    theta = init_theta(cfg.circuit, rng)
    return ParamSet(theta, np.full(cfg.n_token, TOKEN_INIT))


def check_params(cfg: ModelConfig, params: ParamSet) -> None:
    if params.theta.shape != (cfg.n_theta,) or params.token.shape != (cfg.n_token,):
        raise ConfigError(
            f"parameter shapes {params.theta.shape}/{params.token.shape} do not match "
            f"config ({cfg.n_theta},)/({cfg.n_token},)"
        )


def loss(sigma_z: float) -> float:
    return 1.0 - sigma_z


def _check_image(cfg: ModelConfig, image) -> np.ndarray:
    image = np.asarray(image, dtype=float)
    if image.shape != cfg.image_shape:
        raise ConfigError(f"image shape {image.shape} does not match {cfg.image_shape}")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ConfigError("pixels must lie in [0, 1]")
    if not image.any():
        raise DegenerateInputError("all-zero image cannot be amplitude-embedded")
    return image


def masked_input(cfg: ModelConfig, params: ParamSet, image, spec: MaskSpec) -> np.ndarray:
    """Encoder input: the learnable token for QMAE, zeros for the plain QAE."""
    token = params.token if cfg.variant == QMAE else None
    return insert_mask_token(image, cfg.grid, spec, token)


def swap_test(s: sv.StateVector, ancilla: int, reg_a, reg_b, shots=None, seed=0) -> float:
    """H, pairwise controlled swaps, H; returns <Z> on the ancilla."""
    sv.apply_h(s, ancilla)
    for qa, qb in zip(reg_a, reg_b):
        sv.apply_cswap(s, ancilla, qa, qb)
    sv.apply_h(s, ancilla)
    if shots is None:
        return sv.expectation_z(s, ancilla)
    return sv.sample_z(s, ancilla, shots, seed)


def forward(cfg: ModelConfig, params: ParamSet, image, spec: MaskSpec) -> ForwardResult:
    """Simulate the complete circuit on 2n + t + 1 qubits."""
    check_params(cfg, params)
    image = _check_image(cfg, image)
    n, k = cfg.n_data, cfg.n_latent
    data, ref = cfg.data_qubits, cfg.reference_qubits
    c = cfg.circuit

    s = sv.zero_state(cfg.n_total)
    emb = amplitude_embed(masked_input(cfg, params, image, spec).ravel(), s, data[0], n)
    apply_encoder(s, c, params.theta, base=data[0])
    for trash, fresh in zip(data[k:], cfg.reset_ancillas):
        sv.apply_swap(s, trash, fresh)
    apply_decoder(s, c, params.theta, base=data[0])

    rho = sv.reduced_density(s, data)
    recon = extract_image(rho, emb.norm, image.size).reshape(image.shape)

    amplitude_embed(image.ravel(), s, ref[0], n)
    sigma = swap_test(s, 0, data, ref, cfg.shots, cfg.shot_seed)
    return ForwardResult(sigma, loss(sigma), recon, emb.norm, {"rho": rho})


def reconstruct(cfg: ModelConfig, params: ParamSet, image, spec: MaskSpec, return_rho=False):
    """Encoder, trash reset and decoder on n + t qubits (no reference, no SWAP test)."""
    check_params(cfg, params)
    image = _check_image(cfg, image)
    n, k, t = cfg.n_data, cfg.n_latent, cfg.n_trash
    c = cfg.circuit

    s = sv.zero_state(n + t)
    emb = amplitude_embed(masked_input(cfg, params, image, spec).ravel(), s, 0, n)
    apply_encoder(s, c, params.theta, base=0)
    for j in range(t):
        sv.apply_swap(s, k + j, n + j)
    apply_decoder(s, c, params.theta, base=0)
    rho = sv.reduced_density(s, range(n))
    recon = extract_image(rho, emb.norm, image.size).reshape(image.shape)
    return (recon, rho) if return_rho else recon


# -- compact batched route --------------------------------------------------------

def sigma_z_batch(cfg: ModelConfig, psi, ref, theta_enc, theta_dec) -> np.ndarray:
    """Analytic SWAP-test expectation from n-qubit states.

    ``psi`` (..., 2**n) is the normalized encoder input, ``ref`` (..., 2**n) the
    normalized reference; ``theta_enc``/``theta_dec`` (..., n_theta) are the
    angles seen by the encoder and by the decoder. Leading axes broadcast.
    """
    n = cfg.n_data
    c = cfg.circuit
    lead_phi = np.broadcast_shapes(np.shape(psi)[:-1], np.shape(theta_enc)[:-1])
    lead_chi = np.broadcast_shapes(np.shape(ref)[:-1], np.shape(theta_dec)[:-1])
    phi = np.array(np.broadcast_to(psi, lead_phi + (2**n,)), dtype=complex)
    chi = np.array(np.broadcast_to(ref, lead_chi + (2**n,)), dtype=complex)
    return sigma_from_encoded(cfg, encode_batch(phi, c, theta_enc), encode_batch(chi, c, theta_dec))


def sigma_from_encoded(cfg: ModelConfig, phi, chi) -> np.ndarray:
    """SWAP-test expectation given encoder outputs phi = U psi and chi = U a."""
    n, k = cfg.n_data, cfg.n_latent
    phi = np.asarray(phi).reshape(np.shape(phi)[:-1] + (2**k, 2 ** (n - k)))
    chi0 = np.asarray(chi).reshape(np.shape(chi)[:-1] + (2**k, 2 ** (n - k)))[..., 0]
    amp = np.einsum("...l,...lb->...b", chi0.conj(), phi)
    return np.sum(np.abs(amp) ** 2, axis=-1)


def embed_vectors(cfg: ModelConfig, params: ParamSet, image, spec: MaskSpec):
    """Normalized (masked input, reference) vectors plus the masked-input norm."""
    image = _check_image(cfg, image)
    psi, norm = normalized(masked_input(cfg, params, image, spec), cfg.n_data)
    ref, _ = normalized(image, cfg.n_data)
    return psi, ref, norm


def estimate(cfg: ModelConfig, sigma, rng: np.random.Generator | None = None):
    """Pass analytic values through unchanged, or draw shot estimates of them."""
    if cfg.shots is None:
        return sigma
    rng = rng if rng is not None else np.random.default_rng(cfg.shot_seed)
    p0 = np.clip((1.0 + np.asarray(sigma)) / 2.0, 0.0, 1.0)
    hits = rng.binomial(cfg.shots, p0)
    return (2.0 * hits - cfg.shots) / cfg.shots


def fast_forward(cfg: ModelConfig, params: ParamSet, image, spec: MaskSpec) -> float:
    """SWAP-test expectation via the compact route (analytic or shot-sampled)."""
    check_params(cfg, params)
    psi, ref, _ = embed_vectors(cfg, params, image, spec)
    sigma = float(sigma_z_batch(cfg, psi, ref, params.theta, params.theta))
    return float(estimate(cfg, sigma))


# -- checkpoint ---------------------------------------------------------------------

def save_checkpoint(path, cfg: ModelConfig, params: ParamSet) -> None:
    """Header line then one float per line (theta first, then token), 17 significant digits."""
    check_params(cfg, params)
    header = (
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION} n={cfg.n_data} k={cfg.n_latent} "
        f"ph={cfg.grid.patch_h} pw={cfg.grid.patch_w}"
    )
    if cfg.variant == QAE:
        header += " frozen"
    lines = [header] + [f"{x:.17g}" for x in params.flat()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path) -> tuple[dict, ParamSet]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty checkpoint")
    head = lines[0].split()
    if head[:2] != [CHECKPOINT_MAGIC, CHECKPOINT_VERSION]:
        raise FormatError(f"{path}: bad checkpoint header {lines[0]!r}")
    meta = {"frozen": False}
    for tok in head[2:]:
        if tok == "frozen":
            meta["frozen"] = True
            continue
        key, sep, val = tok.partition("=")
        if not sep:
            raise FormatError(f"{path}: cannot parse header field {tok!r}")
        meta[key] = int(val)
    for key in ("n", "k", "ph", "pw"):
        if key not in meta:
            raise FormatError(f"{path}: header lacks {key}=")
    n_theta = meta["n"] * (meta["n"] - 1) // 2 * 15
    try:
        values = [float(x) for x in lines[1:] if x.strip()]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    expected = n_theta + meta["ph"] * meta["pw"]
    if len(values) != expected:
        raise FormatError(f"{path}: expected {expected} values, found {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise FormatError(f"{path}: non-finite parameter value")
    return meta, ParamSet.from_flat(values, n_theta)
