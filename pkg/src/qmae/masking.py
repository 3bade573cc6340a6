"""Patch grids, random mask sampling and mask-token insertion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GeometryError

TOKEN_INIT = 0.5

# ratio (percent) -> (patch height divisor, patch width divisor, patches masked)
PRESETS = {
    12.5: (2, 4, 1),
    25.0: (2, 2, 1),
    50.0: (2, 2, 2),
}


@dataclass(frozen=True)
class PatchGrid:
    image_h: int
    image_w: int
    patch_h: int
    patch_w: int

    @property
    def rows(self) -> int:
        return self.image_h // self.patch_h

    @property
    def cols(self) -> int:
        return self.image_w // self.patch_w

    @property
    def n_patches(self) -> int:
        return self.rows * self.cols

    @property
    def patch_area(self) -> int:
        return self.patch_h * self.patch_w

    def patch_slice(self, idx: int) -> tuple[slice, slice]:
        """Row-major patch numbering."""
        r, c = divmod(idx, self.cols)
        return (
            slice(r * self.patch_h, (r + 1) * self.patch_h),
            slice(c * self.patch_w, (c + 1) * self.patch_w),
        )


@dataclass(frozen=True)
class MaskSpec:
    masked_patch_indices: tuple
    ratio: float


def make_grid(image_h: int, image_w: int, patch_h: int, patch_w: int) -> PatchGrid:
    if min(image_h, image_w, patch_h, patch_w) < 1:
        raise GeometryError("image and patch dimensions must be positive")
    if image_h % patch_h or image_w % patch_w:
        raise GeometryError(
            f"{patch_h}x{patch_w} patches do not tile a {image_h}x{image_w} image"
        )
    return PatchGrid(image_h, image_w, patch_h, patch_w)


def preset(image_size: int, ratio: float) -> tuple[PatchGrid, int]:
    """Grid and masked-patch count realizing a mask percentage on a square image."""
    try:
        dh, dw, n_masked = PRESETS[float(ratio)]
    except KeyError:
        raise ConfigError(f"no mask preset for {ratio}% (choose from {sorted(PRESETS)})") from None
    return make_grid(image_size, image_size, image_size // dh, image_size // dw), n_masked


def mask_spec(grid: PatchGrid, indices) -> MaskSpec:
    indices = tuple(sorted(int(i) for i in indices))
    if any(not 0 <= i < grid.n_patches for i in indices) or len(set(indices)) != len(indices):
        raise ConfigError(f"invalid patch indices {indices} for {grid.n_patches} patches")
    ratio = len(indices) * grid.patch_area / (grid.image_h * grid.image_w)
    return MaskSpec(indices, ratio)


def sample_mask(grid: PatchGrid, n_masked: int, rng: np.random.Generator) -> MaskSpec:
    if not 1 <= n_masked <= grid.n_patches:
        raise ConfigError(f"n_masked={n_masked} outside 1..{grid.n_patches}")
    picked = rng.choice(grid.n_patches, size=n_masked, replace=False)
    return mask_spec(grid, picked)


def insert_mask_token(image, grid: PatchGrid, spec: MaskSpec, token=None) -> np.ndarray:
    """Copy of ``image`` with every masked patch replaced by ``token``.

    ``token=None`` fills masked patches with zeros (the plain autoencoder input).
    The same token is written into every masked patch.
    """
    out = np.array(image, dtype=float, copy=True)
    if out.shape != (grid.image_h, grid.image_w):
        raise GeometryError(f"image shape {out.shape} does not match grid")
    if token is None:
        fill = 0.0
    else:
        fill = np.asarray(token, dtype=float).reshape(grid.patch_h, grid.patch_w)
    for idx in spec.masked_patch_indices:
        out[grid.patch_slice(idx)] = fill
    return out
