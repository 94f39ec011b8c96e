"""Frame ingestion: decode an extracted image sequence, convert to grayscale,
and keep two copies of every frame (original resolution and downsampled).

The engine does not demux video containers; it consumes directories of
``frame_%06d.png`` / ``.pgm`` files produced by an external extractor at the
desired effective frame rate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    EmptySequence,
    FrameDecodeError,
    InputNotFound,
    InvalidResizeError,
    SequenceOrderError,
)

# BT.601 luma weights.
_LUMA_R = 0.299
_LUMA_G = 0.587
_LUMA_B = 0.114

_FRAME_FILE_RE = re.compile(r"^(?:.*?)(\d+)\.(png|pgm)$", re.IGNORECASE)


@dataclass(frozen=True)
class IngestConfig:
    frames_dir: str = ""
    effective_fps: float = 1.0
    downsample_long_side: int = 320


@dataclass(frozen=True)
class GrayFrame:
    """One grayscale frame: ordinal index, timestamp, and 8-bit pixels."""

    index: int
    timestamp_s: float
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be a 2-D uint8 array")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class FramePair:
    """Original-resolution and downsampled copies of the same frame."""

    full: GrayFrame
    small: GrayFrame

    def __post_init__(self):
        if self.full.index != self.small.index:
            raise ValueError("full/small index mismatch")

    @property
    def index(self) -> int:
        return self.full.index

    @property
    def timestamp_s(self) -> float:
        return self.full.timestamp_s


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma of an (H, W, 3) uint8 image, rounded and clamped."""
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) image")
    r = rgb[:, :, 0].astype(np.float64)
    g = rgb[:, :, 1].astype(np.float64)
    b = rgb[:, :, 2].astype(np.float64)
    luma = _LUMA_R * r + _LUMA_G * g + _LUMA_B * b
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def _overlap_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) area-overlap weights for 1-D box resampling; rows sum to 1."""
    scale = n_in / n_out
    starts = np.arange(n_out, dtype=np.float64) * scale
    ends = starts + scale
    j = np.arange(n_in, dtype=np.float64)
    overlap = np.minimum(ends[:, None], j[None, :] + 1.0) - np.maximum(
        starts[:, None], j[None, :]
    )
    return np.clip(overlap, 0.0, None) / scale


def downsample(frame: GrayFrame, out_w: int, out_h: int) -> GrayFrame:
    """Area-averaging (box filter) resample to exactly (out_w, out_h)."""
    if out_w < 1 or out_h < 1:
        raise InvalidResizeError("output dimensions must be positive")
    if out_w > frame.width or out_h > frame.height:
        raise InvalidResizeError(
            f"cannot upsample {frame.width}x{frame.height} to {out_w}x{out_h}"
        )
    if out_w == frame.width and out_h == frame.height:
        return GrayFrame(frame.index, frame.timestamp_s, frame.pixels.copy())
    w_rows = _overlap_weights(frame.height, out_h)
    w_cols = _overlap_weights(frame.width, out_w)
    averaged = w_rows @ frame.pixels.astype(np.float64) @ w_cols.T
    pixels = np.clip(np.rint(averaged), 0, 255).astype(np.uint8)
    return GrayFrame(frame.index, frame.timestamp_s, pixels)


def small_dims(width: int, height: int, long_side: int) -> tuple[int, int]:
    """Downsample dims with the longer side scaled to ``long_side``.

    Never upsamples: images already at or below the limit keep their size.
    """
    longer = max(width, height)
    if longer <= long_side:
        return width, height
    scale = long_side / longer
    out_w = max(1, int(round(width * scale)))
    out_h = max(1, int(round(height * scale)))
    if width >= height:
        out_w = long_side
    else:
        out_h = long_side
    return out_w, out_h


def decode_image(path: str | Path) -> np.ndarray:
    """Decode a PNG/PGM file to (H, W) uint8 grayscale via BT.601."""
    p = Path(path)
    try:
        with Image.open(p) as img:
            img.load()
            if img.mode == "P":
                img = img.convert("RGB")
            if img.mode == "L":
                return np.asarray(img, dtype=np.uint8)
            if img.mode == "RGB":
                return to_grayscale(np.asarray(img, dtype=np.uint8))
            raise FrameDecodeError(str(p), f"unsupported mode {img.mode!r}")
    except FrameDecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise FrameDecodeError(str(p), str(exc)) from exc


def list_frame_files(dir_path: str | Path) -> list[tuple[int, Path]]:
    """Frame files in a directory, sorted by their numeric stem."""
    d = Path(dir_path)
    if not d.is_dir():
        raise InputNotFound(f"frame directory not found: {d}")
    numbered: list[tuple[int, Path]] = []
    for entry in sorted(d.iterdir()):
        if not entry.is_file():
            continue
        m = _FRAME_FILE_RE.match(entry.name)
        if m:
            numbered.append((int(m.group(1)), entry))
    if not numbered:
        raise EmptySequence(f"no frame files (frame_NNN.png/.pgm) in {d}")
    numbered.sort(key=lambda t: (t[0], t[1].name))
    seen: dict[int, Path] = {}
    for num, path in numbered:
        if num in seen:
            raise SequenceOrderError(
                f"duplicate frame number {num}: {seen[num].name} and {path.name}"
            )
        seen[num] = path
    return numbered


def load_sequence(dir_path: str | Path, config: IngestConfig) -> list[FramePair]:
    """Load, grayscale, and downsample every frame in ascending order.

    Frame indices are ordinal (0-based position in the sorted sequence);
    timestamps are index / effective_fps.
    """
    files = list_frame_files(dir_path)
    frames: list[FramePair] = []
    for ordinal, (_, path) in enumerate(files):
        pixels = decode_image(path)
        ts = ordinal / config.effective_fps
        full = GrayFrame(ordinal, ts, pixels)
        out_w, out_h = small_dims(full.width, full.height, config.downsample_long_side)
        small = downsample(full, out_w, out_h)
        frames.append(FramePair(full=full, small=small))
    return frames
