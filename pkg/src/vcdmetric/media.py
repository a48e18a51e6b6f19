"""Frame and video loading in bit-exact formats.

Supported on disk:
  * PPM (P6) / PGM (P5), binary, maxval 255: lossless 8-bit interchange.
  * VCDF: a raw little-endian float32 raster for exact numeric fixtures:
    magic "VCDF" | version u32=1 | H u32 | W u32 | C u32 | H*W*C float32,
    row-major, channel-last.

In memory every frame is float64 in [0, 1], shape (H, W, C) with C in {1, 3}.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptFileError, FormatError, ShapeError, ValueRangeError

VCDF_MAGIC = b"VCDF"
VCDF_VERSION = 1


@dataclass(frozen=True, eq=False)
class Frame:
    """One raster image: (H, W, C) float64 values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 3:
            raise ShapeError(f"frame data must be (H, W, C), got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ShapeError(f"frame dimensions must be positive, got {h}x{w}")
        if c not in (1, 3):
            raise ShapeError(f"frame must have 1 or 3 channels, got {c}")
        if not np.all(np.isfinite(arr)):
            raise ValueRangeError("frame contains non-finite samples")
        if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
            raise ValueRangeError("frame samples must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, eq=False)
class Video:
    """An ordered frame sequence. Frames are 1-indexed; cond_index names x_cnd."""

    frames: tuple
    cond_index: int = 1

    def __post_init__(self):
        frames = tuple(self.frames)
        if len(frames) < 2:
            raise ShapeError(f"a video needs at least 2 frames (N >= 2), got {len(frames)}")
        first = frames[0]
        for k, frame in enumerate(frames[1:], start=2):
            if frame.data.shape != first.data.shape:
                raise ShapeError(
                    f"frame {k} has shape {frame.data.shape}, expected {first.data.shape}"
                )
        if not 1 <= self.cond_index <= len(frames):
            raise ShapeError(f"cond_index {self.cond_index} outside [1, {len(frames)}]")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def cond_frame(self) -> Frame:
        return self.frames[self.cond_index - 1]


def _read_pnm_header(blob: bytes, start: int, want: int) -> tuple:
    """Read `want` whitespace-separated decimal tokens, honoring # comments."""
    values, pos = [], start
    while len(values) < want:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            eol = blob.find(b"\n", pos)
            if eol < 0:
                raise CorruptFileError("unterminated comment in PNM header")
            pos = eol + 1
            continue
        tok = b""
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            tok += blob[pos : pos + 1]
            pos += 1
        if not tok:
            raise CorruptFileError("truncated PNM header")
        if not tok.isdigit():
            raise CorruptFileError(f"bad PNM header token {tok!r}")
        values.append(int(tok))
    return values, pos + 1  # skip single whitespace after maxval


def _load_pnm(blob: bytes, channels: int) -> Frame:
    (width, height, maxval), pos = _read_pnm_header(blob, 0, 3)
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxval}")
    need = width * height * channels
    payload = blob[pos : pos + need]
    if len(payload) < need:
        raise CorruptFileError(f"PNM payload truncated: need {need} bytes, have {len(payload)}")
    samples = np.frombuffer(payload, dtype=np.uint8, count=need).astype(np.float64)
    return Frame((samples / 255.0).reshape(height, width, channels))


def _load_vcdf(blob: bytes) -> Frame:
    header = struct.calcsize("<4sIIII")
    if len(blob) < header:
        raise CorruptFileError("VCDF header truncated")
    magic, version, height, width, channels = struct.unpack("<4sIIII", blob[:header])
    if version != VCDF_VERSION:
        raise FormatError(f"unsupported VCDF version {version}")
    need = height * width * channels * 4
    if len(blob) != header + need:
        raise CorruptFileError(
            f"VCDF payload length {len(blob) - header} does not match header ({need} bytes)"
        )
    samples = np.frombuffer(blob, dtype="<f4", count=height * width * channels, offset=header)
    if not np.all(np.isfinite(samples)):
        raise ValueRangeError("VCDF payload contains non-finite floats")
    return Frame(samples.astype(np.float64).reshape(height, width, channels))


def load_frame(path, expected_channels: int | None = None) -> Frame:
    """Load one frame from a PPM/PGM/VCDF file.

    Raises FormatError on unknown magic bytes, CorruptFileError on truncation,
    ValueRangeError on non-finite VCDF floats, ShapeError when
    expected_channels is given and does not match.
    """
    blob = Path(path).read_bytes()
    if blob[:2] == b"P6":
        frame = _load_pnm(blob[2:], channels=3)
    elif blob[:2] == b"P5":
        frame = _load_pnm(blob[2:], channels=1)
    elif blob[:4] == VCDF_MAGIC:
        frame = _load_vcdf(blob)
    else:
        raise FormatError(f"unknown image magic {blob[:4]!r} in {path}")
    if expected_channels is not None and frame.channels != expected_channels:
        raise ShapeError(
            f"{path}: expected {expected_channels} channels, file has {frame.channels}"
        )
    return frame


def save_frame(frame: Frame, path) -> None:
    """Write a frame; the format comes from the extension (.ppm/.pgm/.vcdf).

    VCDF is float32 and round-trips bit-exactly whenever the frame's samples
    are float32-representable; PPM/PGM quantize to 8 bits.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".vcdf":
        head = struct.pack(
            "<4sIIII", VCDF_MAGIC, VCDF_VERSION, frame.height, frame.width, frame.channels
        )
        path.write_bytes(head + frame.data.astype("<f4").tobytes())
    elif suffix in (".ppm", ".pgm"):
        want = 3 if suffix == ".ppm" else 1
        if frame.channels != want:
            raise ShapeError(f"{suffix} requires {want} channels, frame has {frame.channels}")
        magic = b"P6" if suffix == ".ppm" else b"P5"
        head = magic + f"\n{frame.width} {frame.height}\n255\n".encode("ascii")
        samples = np.rint(frame.data * 255.0).astype(np.uint8)
        path.write_bytes(head + samples.tobytes())
    else:
        raise FormatError(f"unsupported output extension {suffix!r}")


def load_video(manifest, cond_index: int = 1) -> Video:
    """Load frames in manifest order into a Video.

    `manifest` is an ordered list of file paths; all frames must share
    dimensions and at least two are required.
    """
    paths = list(manifest)
    if len(paths) < 2:
        raise ShapeError(f"a video needs at least 2 frames (N >= 2), manifest has {len(paths)}")
    return Video(tuple(load_frame(p) for p in paths), cond_index=cond_index)


def resample_bilinear(frame: Frame, height: int, width: int) -> Frame:
    """Bilinear resample to (height, width), half-pixel centers, clamped edges."""
    if height < 1 or width < 1:
        raise ShapeError("target dimensions must be positive")
    if (height, width) == (frame.height, frame.width):
        return frame
    src = frame.data
    ys = (np.arange(height, dtype=np.float64) + 0.5) * frame.height / height - 0.5
    xs = (np.arange(width, dtype=np.float64) + 0.5) * frame.width / width - 0.5
    y0 = np.clip(np.floor(ys), 0, frame.height - 1).astype(np.int64)
    x0 = np.clip(np.floor(xs), 0, frame.width - 1).astype(np.int64)
    y1 = np.minimum(y0 + 1, frame.height - 1)
    x1 = np.minimum(x0 + 1, frame.width - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :, None]
    top = src[y0][:, x0] * (1 - wx) + src[y0][:, x1] * wx
    bottom = src[y1][:, x0] * (1 - wx) + src[y1][:, x1] * wx
    out = top * (1 - wy) + bottom * wy
    # interpolation of in-range samples can drift an ulp past the bounds
    return Frame(np.clip(out, 0.0, 1.0))
