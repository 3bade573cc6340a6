"""
Gradients, Adam and the per-sample training loop.

Circuit angles use the two-term shift rule. Each angle occurs twice in the
circuit (once in the encoder, once negated in the decoder), so the rule is
applied to each occurrence separately and the two partials are summed; a
single joint shift of both occurrences is not exact. The mask token reaches
the loss through the embedding normalization and gets central differences.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .ansatz import encode_batch, encode_shifted
from .embedding import normalized
from .errors import ConfigError
from .masking import insert_mask_token, sample_mask
from .model import (
    QAE,
    ModelConfig,
    ParamSet,
    check_params,
    embed_vectors,
    estimate,
    init_params,
    sigma_from_encoded,
)

SHIFT = np.pi / 2
TOKEN_STEP = 1e-4


@dataclass
class GradVector:
    d_theta: np.ndarray
    d_token: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.d_theta, self.d_token])


def shift_gradient(f, x, shift: float = SHIFT) -> np.ndarray:
    """Two-term shift rule [f(x + s e_j) - f(x - s e_j)] / 2 for every coordinate.

    Exact when each x_j enters ``f`` through a single rotation exp(-i x_j G / 2)
    with G^2 = 1.
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = shift
        grad[j] = 0.5 * (f(x + e) - f(x - e))
    return grad


def _theta_grad(cfg, params, psi, ref, rng=None):
    c = cfg.circuit
    phi0 = encode_batch(psi, c, params.theta)
    chi0 = encode_batch(ref, c, params.theta)
    phi_s = encode_shifted(psi, c, params.theta, [SHIFT, -SHIFT])
    chi_s = encode_shifted(ref, c, params.theta, [SHIFT, -SHIFT])
    sig = estimate(cfg, np.stack([
        sigma_from_encoded(cfg, phi_s, chi0),
        sigma_from_encoded(cfg, phi0, chi_s),
    ]), rng)
    d_sigma = 0.5 * (sig[0, 0] - sig[0, 1]) + 0.5 * (sig[1, 0] - sig[1, 1])
    sigma = float(estimate(cfg, sigma_from_encoded(cfg, phi0, chi0), rng))
    return -d_sigma, sigma, chi0


def grad_theta_shift(cfg: ModelConfig, params: ParamSet, image, spec) -> np.ndarray:
    """dL/dtheta by parameter shift, L = 1 - sigma_z."""
    check_params(cfg, params)
    psi, ref, _ = embed_vectors(cfg, params, image, spec)
    return _theta_grad(cfg, params, psi, ref)[0]


def _token_grad(cfg, params, image, spec, chi0, h, rng=None):
    m = cfg.n_token
    if cfg.variant == QAE or not spec.masked_patch_indices:
        return np.zeros(m)
    tokens = params.token + np.concatenate([h * np.eye(m), -h * np.eye(m)])
    psis = np.stack([
        normalized(insert_mask_token(image, cfg.grid, spec, tok), cfg.n_data)[0] for tok in tokens
    ])
    sig = estimate(cfg, sigma_from_encoded(cfg, encode_batch(psis, cfg.circuit, params.theta), chi0), rng)
    return -(sig[:m] - sig[m:]) / (2 * h)


def grad_token_fd(cfg: ModelConfig, params: ParamSet, image, spec, h: float = TOKEN_STEP) -> np.ndarray:
    """dL/dtoken by central differences with step ``h``."""
    check_params(cfg, params)
    _, ref, _ = embed_vectors(cfg, params, image, spec)
    chi0 = encode_batch(ref, cfg.circuit, params.theta)
    return _token_grad(cfg, params, np.asarray(image, dtype=float), spec, chi0, h)


def loss_and_grad(cfg, params, image, spec, h=TOKEN_STEP, rng=None):
    """Loss at ``params`` plus the full gradient, sharing the unshifted evaluations."""
    check_params(cfg, params)
    image = np.asarray(image, dtype=float)
    psi, ref, _ = embed_vectors(cfg, params, image, spec)
    d_theta, sigma, chi0 = _theta_grad(cfg, params, psi, ref, rng)
    d_token = _token_grad(cfg, params, image, spec, chi0, h, rng)
    return 1.0 - sigma, GradVector(d_theta, d_token)


# -- Adam -----------------------------------------------------------------------------

@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, size: int, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8) -> AdamState:
        return cls(np.zeros(size), np.zeros(size), 0, lr, beta1, beta2, eps)


def adam_step(state: AdamState, params: ParamSet, grad: GradVector) -> tuple[AdamState, ParamSet]:
    """One bias-corrected Adam update on the joint vector theta || token."""
    g = grad.flat()
    step = state.step + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g * g
    m_hat = m / (1 - state.beta1**step)
    v_hat = v / (1 - state.beta2**step)
    flat = params.flat() - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(m, v, step, state.lr, state.beta1, state.beta2, state.eps)
    return new_state, ParamSet.from_flat(flat, params.theta.size)


# -- training -------------------------------------------------------------------------

@dataclass
class StepRecord:
    epoch: int
    sample: int
    mask: tuple
    loss: float


@dataclass
class TrainLog:
    steps: list = field(default_factory=list)
    epoch_means: list = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["epoch", "sample", "loss"])
            for r in self.steps:
                w.writerow([r.epoch, r.sample, repr(r.loss)])

    def write_epoch_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["epoch", "mean_loss"])
            for e, loss in enumerate(self.epoch_means):
                w.writerow([e, repr(loss)])


def _streams(seed: int):
    init_seq, mask_seq, shot_seq = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(init_seq), np.random.default_rng(mask_seq),
            np.random.default_rng(shot_seq))


def train(cfg: ModelConfig, dataset, epochs: int = 20, seed: int = 0, lr: float = 0.01,
          beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
          init: ParamSet | None = None, progress=None) -> tuple[ParamSet, TrainLog]:
    """Per-sample Adam training; a fresh mask is drawn for every (epoch, sample).

    ``dataset`` is any sequence of objects with a ``pixels`` attribute (or of
    raw pixel arrays). Identical arguments give bit-identical results.
    """
    images = [np.asarray(getattr(d, "pixels", d), dtype=float) for d in dataset]
    if not images:
        raise ConfigError("training dataset is empty")
    init_rng, mask_rng, shot_rng = _streams(seed)
    params = init.copy() if init is not None else init_params(cfg, init_rng)
    check_params(cfg, params)
    opt = AdamState.init(cfg.n_params, lr, beta1, beta2, eps)
    log = TrainLog()
    if cfg.n_masked < 1:
        raise ConfigError("training needs at least one masked patch")

    for epoch in range(epochs):
        losses = []
        for i, image in enumerate(images):
            spec = sample_mask(cfg.grid, cfg.n_masked, mask_rng)
            loss, grad = loss_and_grad(cfg, params, image, spec, rng=shot_rng)
            if cfg.variant == QAE:
                grad.d_token[:] = 0.0
            opt, params = adam_step(opt, params, grad)
            log.steps.append(StepRecord(epoch, i, spec.masked_patch_indices, float(loss)))
            losses.append(loss)
        log.epoch_means.append(float(np.mean(losses)))
        if progress is not None:
            progress(epoch, log.epoch_means[-1])
    return params, log
