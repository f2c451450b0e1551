"""Loading, normalization and on-disk formats for windowed candidate images.

Images are 2D float64 numpy arrays (row-major, shape (height, width)).
Two container formats are supported:

* single-image 8/16-bit grayscale PNG or PGM files,
* a float32 little-endian stack format: magic ``PPK1``, u32 count,
  u32 width, u32 height, then count*width*height float32 values,
  row-major, image-major.

Dataset manifests are JSON Lines files; each line is
``{"path": ..., "label": ..., "source": ...}``.  A stack member is
addressed as ``<stackfile>#<index>``.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image

STACK_MAGIC = b"PPK1"
MIN_SIDE = 8

LABELS = ("particle", "non_particle", "unlabeled")
SOURCES = ("hand", "simulator", "prediction")


class ImageFormatError(ValueError):
    """File is not in a supported/readable image format."""


class ImageSizeError(ValueError):
    """Image dimensions below the supported minimum."""


class ImageDataError(ValueError):
    """Payload is inconsistent or contains non-finite values."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    source: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"bad label {self.label!r}")
        if self.source not in SOURCES:
            raise ValueError(f"bad source {self.source!r}")


def _check_image(arr: np.ndarray) -> np.ndarray:
    if arr.ndim != 2:
        raise ImageFormatError("expected a single-channel 2D image")
    h, w = arr.shape
    if h < MIN_SIDE or w < MIN_SIDE:
        raise ImageSizeError(f"image {w}x{h} below minimum {MIN_SIDE}x{MIN_SIDE}")
    if not np.all(np.isfinite(arr)):
        raise ImageDataError("image contains NaN/Inf values")
    return arr


def load_image(locator: str | os.PathLike) -> np.ndarray:
    """Load one windowed image from a PNG/PGM file or a ``stack#index`` locator.

    Integer pixel formats are mapped to float without rescaling.
    """
    locator = os.fspath(locator)
    if "#" in locator:
        path, _, idx = locator.rpartition("#")
        try:
            index = int(idx)
        except ValueError:
            raise ImageFormatError(f"bad stack index in {locator!r}") from None
        return read_stack_member(path, index)
    try:
        with Image.open(locator) as im:
            if im.mode not in ("L", "I", "I;16", "F"):
                im = im.convert("F")
            arr = np.asarray(im, dtype=np.float64)
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"cannot read {locator!r}: {exc}") from exc
    return _check_image(arr)


def normalize(img: np.ndarray) -> np.ndarray:
    """Z-score an image: mean 0, std 1.  Constant images map to all zeros."""
    img = np.asarray(img, dtype=np.float64)
    std = img.std()
    if std == 0.0:
        return np.zeros_like(img)
    return (img - img.mean()) / std


def _read_stack_header(fh) -> tuple[int, int, int]:
    head = fh.read(16)
    if len(head) < 16 or head[:4] != STACK_MAGIC:
        raise ImageFormatError("not a PPK1 stack file")
    count, width, height = struct.unpack("<III", head[4:])
    return count, width, height


def read_stack(path: str | os.PathLike) -> np.ndarray:
    """Read a whole PPK1 stack as an array of shape (count, height, width)."""
    with open(path, "rb") as fh:
        count, width, height = _read_stack_header(fh)
        payload = fh.read()
    expected = count * width * height * 4
    if len(payload) < expected:
        raise ImageDataError(
            f"stack payload truncated: need {expected} bytes, have {len(payload)}"
        )
    data = np.frombuffer(payload[:expected], dtype="<f4").astype(np.float64)
    data = data.reshape(count, height, width)
    for i in range(count):
        _check_image(data[i])
    return data


def read_stack_member(path: str | os.PathLike, index: int) -> np.ndarray:
    with open(path, "rb") as fh:
        count, width, height = _read_stack_header(fh)
        if not 0 <= index < count:
            raise ImageDataError(f"stack index {index} out of range [0, {count})")
        nbytes = width * height * 4
        fh.seek(16 + index * nbytes)
        payload = fh.read(nbytes)
    if len(payload) < nbytes:
        raise ImageDataError("stack payload truncated")
    arr = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return _check_image(arr.reshape(height, width))


def write_stack(path: str | os.PathLike, images: np.ndarray) -> None:
    """Write images of shape (count, height, width) as a PPK1 stack."""
    images = np.asarray(images)
    if images.ndim != 3:
        raise ValueError("expected an array of shape (count, height, width)")
    count, height, width = images.shape
    with open(path, "wb") as fh:
        fh.write(STACK_MAGIC)
        fh.write(struct.pack("<III", count, width, height))
        fh.write(np.ascontiguousarray(images, dtype="<f4").tobytes())


def read_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    entries = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            entry = ManifestEntry(rec["path"], rec["label"], rec["source"])
            if entry.path in seen:
                raise ValueError(f"duplicate manifest path {entry.path!r}")
            seen.add(entry.path)
            entries.append(entry)
    return entries


def write_manifest(path: str | os.PathLike, entries: list[ManifestEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps({"path": e.path, "label": e.label, "source": e.source}))
            fh.write("\n")
