"""
MNIST IDX ingestion, bilinear resizing, datasets and PGM image files.

IDX layout (all integers big-endian)::

    [0]  uint32 magic   0x00000803 images / 0x00000801 labels
    [4]  uint32 count
    [8]  uint32 rows    (images only)
    [12] uint32 cols    (images only)
    ...  uint8 payload, row-major
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, FormatError

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class ImageSample:
    pixels: np.ndarray
    label: int

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2 or p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("pixels must be a 2-D array with values in [0, 1]")
        size = p.size
        if size & (size - 1):
            raise ValueError(f"{p.shape[0]}x{p.shape[1]} image is not a power-of-two pixel count")
        if not 0 <= self.label <= 9:
            raise ValueError(f"label {self.label} outside 0..9")


@dataclass
class Dataset:
    samples: list
    source: str = ""

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def __iter__(self):
        return iter(self.samples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=int)

    def images(self) -> np.ndarray:
        return np.stack([s.pixels for s in self.samples])


# -- IDX ------------------------------------------------------------------------------

def _header(data: bytes, magic: int, n_dims: int, what: str) -> tuple:
    size = 4 + 4 * n_dims
    if len(data) < size:
        raise FormatError(f"{what}: header needs {size} bytes, got {len(data)}", offset=len(data))
    found = struct.unpack_from(">I", data, 0)[0]
    if found != magic:
        raise FormatError(f"{what}: magic 0x{found:08x}, expected 0x{magic:08x}", offset=0)
    dims = struct.unpack_from(">" + "I" * n_dims, data, 4)
    need = size + int(np.prod(dims))
    if len(data) != need:
        raise FormatError(
            f"{what}: expected {need} bytes for dims {dims}, got {len(data)}",
            offset=min(len(data), need),
        )
    return dims, size


def parse_idx_images(data: bytes) -> np.ndarray:
    """Raw uint8 tensor of shape (count, rows, cols)."""
    (count, rows, cols), off = _header(data, IMAGES_MAGIC, 3, "IDX images")
    return np.frombuffer(data, dtype=np.uint8, offset=off).reshape(count, rows, cols).copy()


def parse_idx_labels(data: bytes) -> np.ndarray:
    (count,), off = _header(data, LABELS_MAGIC, 1, "IDX labels")
    if count == 0:
        raise FormatError("IDX labels: empty payload", offset=off)
    labels = np.frombuffer(data, dtype=np.uint8, offset=off).copy()
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        raise FormatError(f"IDX labels: label {labels[bad[0]]} > 9", offset=off + int(bad[0]))
    return labels


def idx_images_bytes(images) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    return struct.pack(">IIII", IMAGES_MAGIC, count, rows, cols) + images.tobytes()


def idx_labels_bytes(labels) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">II", LABELS_MAGIC, labels.size) + labels.tobytes()


# -- pixels ----------------------------------------------------------------------------

def normalize(byte_pixels) -> np.ndarray:
    return np.asarray(byte_pixels, dtype=float) / 255.0


def resize(img, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling on a corner-aligned grid.

    Output pixel (r, c) samples source position (r*(H-1)/(out_h-1), c*(W-1)/(out_w-1));
    a single output row/column samples the source center.
    """
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    if (h, w) == (out_h, out_w):
        return img.copy()

    def coords(n_in, n_out):
        if n_out == 1:
            pos = np.array([(n_in - 1) / 2.0])
        else:
            pos = np.arange(n_out) * ((n_in - 1) / (n_out - 1))
        lo = np.clip(np.floor(pos).astype(int), 0, n_in - 1)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, pos - lo

    r0, r1, fr = coords(h, out_h)
    c0, c1, fc = coords(w, out_w)
    fr, fc = fr[:, None], fc[None, :]
    top = img[r0][:, c0] * (1 - fc) + img[r0][:, c1] * fc
    bottom = img[r1][:, c0] * (1 - fc) + img[r1][:, c1] * fc
    return top * (1 - fr) + bottom * fr


def load_idx_dataset(images_path, labels_path, size=None, digits=None, limit=None,
                     offset=0) -> Dataset:
    """Read an IDX image/label pair into a ``Dataset``.

    Samples are filtered to ``digits`` (if given), then ``offset``/``limit``
    select a contiguous slice in file order. All-black images are skipped since
    they cannot be amplitude-embedded.
    """
    images = parse_idx_images(Path(images_path).read_bytes())
    labels = parse_idx_labels(Path(labels_path).read_bytes())
    if len(images) != len(labels):
        raise FormatError(f"{len(images)} images but {len(labels)} labels")
    keep = np.arange(len(labels))
    if digits is not None:
        keep = keep[np.isin(labels, list(digits))]
    keep = keep[images[keep].reshape(len(keep), -1).max(axis=1) > 0]
    keep = keep[offset:]
    if limit is not None:
        keep = keep[:limit]
    samples = []
    for i in keep:
        px = normalize(images[i])
        if size is not None:
            px = np.clip(resize(px, size, size), 0.0, 1.0)
        samples.append(ImageSample(px, int(labels[i])))
    if not samples:
        raise ConfigError(f"no samples selected from {images_path}")
    return Dataset(samples, f"{images_path}")


# -- PGM -------------------------------------------------------------------------------

def to_bytes(img) -> np.ndarray:
    return np.round(np.clip(np.asarray(img, dtype=float), 0.0, 1.0) * 255).astype(np.uint8)


def write_pgm(img, path) -> None:
    """Binary P5 graymap, maxval 255."""
    px = to_bytes(img)
    h, w = px.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header", offset=pos)
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {fields[0]!r})", offset=0)
    w, h, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    pos += 1
    payload = data[pos:pos + w * h]
    if len(payload) != w * h:
        raise FormatError(f"{path}: expected {w * h} pixel bytes, got {len(payload)}", offset=pos)
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w) / 255.0
