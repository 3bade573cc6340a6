"""Reconstruction quality metrics and evaluation reports."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import statevec as sv
from .embedding import normalized
from .errors import ConfigError
from .masking import sample_mask
from .model import ModelConfig, ParamSet, reconstruct

SSIM_WINDOW = 7
SSIM_K1, SSIM_K2 = 0.01, 0.03


def fidelity(rho: sv.DensityMatrix, reference) -> float:
    """<a|rho|a> for a pure reference state (StateVector or amplitude array)."""
    a = np.asarray(getattr(reference, "amps", reference), dtype=complex)
    return float(np.real(a.conj() @ rho.entries @ a))


def cosine_similarity(x, y) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(x @ y / (nx * ny))


def ssim(x, y, win: int = SSIM_WINDOW, data_range: float = 1.0) -> float:
    """Mean SSIM over all fully contained ``win`` x ``win`` uniform windows.

    Local variances and covariance use the unbiased (N-1) normalization.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ConfigError(f"shape mismatch {x.shape} vs {y.shape}")
    if x.ndim != 2 or min(x.shape) < win:
        raise ConfigError(f"image {x.shape} is smaller than the {win}x{win} window")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    npix = win * win
    wx = sliding_window_view(x, (win, win))
    wy = sliding_window_view(y, (win, win))
    mx = wx.mean(axis=(-2, -1))
    my = wy.mean(axis=(-2, -1))
    dx = wx - mx[..., None, None]
    dy = wy - my[..., None, None]
    norm = npix - 1
    vx = (dx * dx).sum(axis=(-2, -1)) / norm
    vy = (dy * dy).sum(axis=(-2, -1)) / norm
    cxy = (dx * dy).sum(axis=(-2, -1)) / norm
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx**2 + my**2 + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


class NearestCentroid:
    """Proxy classifier: label of the closest per-class mean image."""

    def __init__(self, images, labels):
        images = np.asarray(images, dtype=float).reshape(len(images), -1)
        labels = np.asarray(labels, dtype=int)
        if images.size == 0:
            raise ConfigError("classifier needs at least one training image")
        self.classes = np.unique(labels)
        self.centroids = np.stack([images[labels == c].mean(axis=0) for c in self.classes])

    def predict(self, probe) -> int:
        d = np.sum((self.centroids - np.asarray(probe, dtype=float).ravel()) ** 2, axis=1)
        # classes are sorted, argmin returns the first minimum -> smaller label on ties
        return int(self.classes[int(np.argmin(d))])


def nearest_centroid_classify(train, probe) -> int:
    return NearestCentroid(train.images(), train.labels).predict(probe)


@dataclass
class EvalRow:
    idx: int
    label: int
    pred: int
    fidelity: float
    cosine: float
    ssim: float
    mask: tuple = ()


@dataclass
class EvalReport:
    rows: list = field(default_factory=list)

    @property
    def mean_fidelity(self) -> float:
        return float(np.mean([r.fidelity for r in self.rows]))

    @property
    def mean_cosine(self) -> float:
        return float(np.mean([r.cosine for r in self.rows]))

    @property
    def mean_ssim(self) -> float:
        return float(np.mean([r.ssim for r in self.rows]))

    @property
    def accuracy(self) -> float:
        return float(np.mean([r.pred == r.label for r in self.rows]))

    @property
    def masks(self) -> list:
        return [r.mask for r in self.rows]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["idx", "label", "pred", "fidelity", "cosine", "ssim"])
            for r in self.rows:
                w.writerow([r.idx, r.label, r.pred, repr(r.fidelity), repr(r.cosine), repr(r.ssim)])
            f.write(
                f"#agg,fidelity={self.mean_fidelity!r},cosine={self.mean_cosine!r},"
                f"ssim={self.mean_ssim!r},accuracy={self.accuracy!r}\n"
            )


def evaluation_masks(cfg: ModelConfig, count: int, seed: int) -> list:
    """Masks depend only on (grid, n_masked, count, seed), so every variant gets the same ones."""
    rng = np.random.default_rng(seed)
    return [sample_mask(cfg.grid, cfg.n_masked, rng) for _ in range(count)]


def evaluate(cfg: ModelConfig, params: ParamSet, test, seed: int = 0, classifier=None,
             reconstructor=None) -> EvalReport:
    """Reconstruct every test sample under a seeded mask and score it.

    ``classifier`` defaults to nearest-centroid on the clean test images.
    ``reconstructor(cfg, params, image, spec) -> (pixels, rho)`` replaces the
    model (used for stubs); it defaults to ``reconstruct``.
    """
    if classifier is None:
        classifier = NearestCentroid(test.images(), test.labels)
    if reconstructor is None:
        def reconstructor(c, p, image, spec):
            return reconstruct(c, p, image, spec, return_rho=True)
    report = EvalReport()
    for i, (sample, spec) in enumerate(zip(test, evaluation_masks(cfg, len(test), seed))):
        image = sample.pixels
        recon, rho = reconstructor(cfg, params, image, spec)
        ref, _ = normalized(image, cfg.n_data)
        report.rows.append(EvalRow(
            idx=i,
            label=sample.label,
            pred=classifier.predict(recon),
            fidelity=fidelity(rho, ref),
            cosine=cosine_similarity(recon, image),
            ssim=ssim(recon, image),
            mask=spec.masked_patch_indices,
        ))
    return report
