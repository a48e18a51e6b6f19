"""Frame encoders with named tap points.

Three kinds:
  * identity     - pass-through, one tap; makes the downstream pipeline a pure
                   function of raw pixels (exactness tests rely on this).
  * random_conv  - two conv/relu/pool blocks with seed-derived weights, so every
                   frequency/transport property is testable without weight files.
  * vgg_shallow  - the standard 19-layer conv stack, tapped after the first
                   convolution of each block (relu1_1 .. relu5_1), weights
                   loaded from a VCDW file produced by an offline conversion.

VCDW format, little-endian: magic "VCDW" | version u32=1 | layer_count u32 |
per layer: name_len u32, name bytes, out u32, in u32, kh u32, kw u32,
out*in*kh*kw float32 kernels, out float32 biases.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    CorruptFileError,
    FormatError,
    IncompatibleWeightsError,
    ShapeError,
    ValueRangeError,
)
from .media import Frame
from .rng import Stream, derive_seed

VCDW_MAGIC = b"VCDW"
VCDW_VERSION = 1

VGG_TAPS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1")
RANDOM_CONV_TAPS = ("relu1", "relu2")

# (name, out_channels, in_channels); every kernel is 3x3
VGG_CONV_TABLE = (
    ("conv1_1", 64, 3),
    ("conv1_2", 64, 64),
    ("conv2_1", 128, 64),
    ("conv2_2", 128, 128),
    ("conv3_1", 256, 128),
    ("conv3_2", 256, 256),
    ("conv3_3", 256, 256),
    ("conv3_4", 256, 256),
    ("conv4_1", 512, 256),
    ("conv4_2", 512, 512),
    ("conv4_3", 512, 512),
    ("conv4_4", 512, 512),
    ("conv5_1", 512, 512),
    ("conv5_2", 512, 512),
    ("conv5_3", 512, 512),
    ("conv5_4", 512, 512),
)
_VGG_BLOCK_OF = {name: int(name[4]) for name, _, _ in VGG_CONV_TABLE}

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

_CHUNK_BYTES = 128 * 1024 * 1024  # im2col working-set bound


@dataclass(frozen=True, eq=False)
class EncoderSpec:
    """Which encoder to build and which taps to emit."""

    kind: str
    taps: tuple
    seed: int | None = None
    weights_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("identity", "random_conv", "vgg_shallow"):
            raise ConfigurationError(f"unknown encoder kind {self.kind!r}")
        taps = tuple(self.taps)
        if not taps:
            raise ConfigurationError("taps must be non-empty")
        if len(set(taps)) != len(taps):
            raise ConfigurationError(f"duplicate taps in {taps}")
        if self.kind == "vgg_shallow":
            bad = [t for t in taps if t not in VGG_TAPS]
            if bad:
                raise ConfigurationError(f"vgg_shallow taps must be in {VGG_TAPS}, got {bad}")
        if self.kind == "random_conv":
            bad = [t for t in taps if t not in RANDOM_CONV_TAPS]
            if bad:
                raise ConfigurationError(f"random_conv taps must be in {RANDOM_CONV_TAPS}, got {bad}")
        object.__setattr__(self, "taps", taps)


def default_taps(kind: str) -> tuple:
    if kind == "identity":
        return ("identity",)
    if kind == "random_conv":
        return RANDOM_CONV_TAPS
    return VGG_TAPS


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """One tap's activations, channel-major (C, H, W) float64."""

    tap: str
    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 3:
            raise ShapeError(f"feature map must be (C, H, W), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueRangeError(f"tap {self.tap!r} produced non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, eq=False)
class ConvLayer:
    name: str
    kernels: np.ndarray  # (out, in, kh, kw) float64
    biases: np.ndarray  # (out,) float64


@dataclass(frozen=True, eq=False)
class WeightBundle:
    """Validated, ordered conv layers loaded from a VCDW file."""

    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        for prev, cur in zip(layers, layers[1:]):
            if cur.kernels.shape[1] != prev.kernels.shape[0]:
                raise IncompatibleWeightsError(
                    f"layer {cur.name!r} expects {cur.kernels.shape[1]} input channels, "
                    f"{prev.name!r} emits {prev.kernels.shape[0]}"
                )
        object.__setattr__(self, "layers", layers)


def _take(blob: bytes, pos: int, count: int, what: str) -> tuple:
    if pos + count > len(blob):
        raise CorruptFileError(f"VCDW truncated while reading {what}")
    return blob[pos : pos + count], pos + count


def load_weights(path, spec: EncoderSpec) -> WeightBundle:
    """Parse and validate a VCDW file against `spec`.

    Generic checks always run (magic, version, finite coefficients, channel
    chaining); vgg_shallow additionally pins names and shapes to the standard
    architecture table.
    """
    blob = Path(path).read_bytes()
    if blob[:4] != VCDW_MAGIC:
        raise FormatError(f"bad VCDW magic {blob[:4]!r}")
    raw, pos = _take(blob, 4, 8, "header")
    version, layer_count = struct.unpack("<II", raw)
    if version != VCDW_VERSION:
        raise FormatError(f"unsupported VCDW version {version}")
    layers = []
    for index in range(layer_count):
        raw, pos = _take(blob, pos, 4, f"layer {index} name length")
        (name_len,) = struct.unpack("<I", raw)
        raw, pos = _take(blob, pos, name_len, f"layer {index} name")
        name = raw.decode("utf-8")
        raw, pos = _take(blob, pos, 16, f"layer {name!r} shape")
        out_c, in_c, kh, kw = struct.unpack("<IIII", raw)
        if min(out_c, in_c, kh, kw) < 1:
            raise FormatError(f"layer {name!r} declares a zero dimension")
        kern_n = out_c * in_c * kh * kw
        raw, pos = _take(blob, pos, 4 * kern_n, f"layer {name!r} kernels")
        kernels = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(out_c, in_c, kh, kw)
        raw, pos = _take(blob, pos, 4 * out_c, f"layer {name!r} biases")
        biases = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        if not (np.all(np.isfinite(kernels)) and np.all(np.isfinite(biases))):
            raise ValueRangeError(f"layer {name!r} contains non-finite coefficients")
        layers.append(ConvLayer(name, kernels, biases))
    if pos != len(blob):
        raise CorruptFileError(f"{len(blob) - pos} trailing bytes after last layer")
    bundle = WeightBundle(tuple(layers))
    if spec.kind == "vgg_shallow":
        _check_vgg_table(bundle)
    return bundle


def _check_vgg_table(bundle: WeightBundle) -> None:
    if len(bundle.layers) > len(VGG_CONV_TABLE):
        raise IncompatibleWeightsError(
            f"{len(bundle.layers)} layers exceed the {len(VGG_CONV_TABLE)}-conv table"
        )
    for layer, (name, out_c, in_c) in zip(bundle.layers, VGG_CONV_TABLE):
        if layer.name != name:
            raise IncompatibleWeightsError(f"expected layer {name!r}, file has {layer.name!r}")
        if layer.kernels.shape != (out_c, in_c, 3, 3):
            raise IncompatibleWeightsError(
                f"layer {name!r} must be {(out_c, in_c, 3, 3)}, file has {layer.kernels.shape}"
            )


def save_weights(bundle: WeightBundle, path) -> None:
    """Write a bundle in VCDW format (float32 on disk)."""
    parts = [VCDW_MAGIC, struct.pack("<II", VCDW_VERSION, len(bundle.layers))]
    for layer in bundle.layers:
        name = layer.name.encode("utf-8")
        out_c, in_c, kh, kw = layer.kernels.shape
        parts.append(struct.pack("<I", len(name)))
        parts.append(name)
        parts.append(struct.pack("<IIII", out_c, in_c, kh, kw))
        parts.append(layer.kernels.astype("<f4").tobytes())
        parts.append(layer.biases.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def conv2d_same(x: np.ndarray, kernels: np.ndarray, biases: np.ndarray) -> np.ndarray:
    """Zero-padded cross-correlation preserving spatial size.

    x: (C_in, H, W); kernels: (C_out, C_in, kh, kw); biases: (C_out,).
    Evaluated as row-chunked im2col + GEMM to bound the working set.
    """
    c_in, height, width = x.shape
    c_out, kc, kh, kw = kernels.shape
    if kc != c_in:
        raise ShapeError(f"kernel expects {kc} input channels, map has {c_in}")
    pad_t, pad_b = (kh - 1) // 2, kh // 2
    pad_l, pad_r = (kw - 1) // 2, kw // 2
    padded = np.pad(x, ((0, 0), (pad_t, pad_b), (pad_l, pad_r)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, (kh, kw), axis=(1, 2))
    kmat = kernels.reshape(c_out, -1)
    out = np.empty((c_out, height, width), dtype=np.float64)
    row_bytes = width * c_in * kh * kw * 8
    chunk = max(1, _CHUNK_BYTES // max(1, row_bytes))
    for r0 in range(0, height, chunk):
        r1 = min(height, r0 + chunk)
        patches = windows[:, r0:r1].transpose(1, 2, 0, 3, 4).reshape((r1 - r0) * width, -1)
        result = patches @ kmat.T + biases
        out[:, r0:r1] = result.T.reshape(c_out, r1 - r0, width)
    return out


def maxpool_2x2_ceil(x: np.ndarray) -> np.ndarray:
    """2x2 max pool, stride 2; odd edges keep a 1-wide window (ceil semantics)."""
    c, height, width = x.shape
    if height % 2 or width % 2:
        x = np.pad(
            x,
            ((0, 0), (0, height % 2), (0, width % 2)),
            constant_values=-np.inf,
        )
    _, ph, pw = x.shape
    return x.reshape(c, ph // 2, 2, pw // 2, 2).max(axis=(2, 4))


def _run_stack(x: np.ndarray, blocks, wanted: tuple) -> dict:
    """Run conv blocks until every wanted tap is captured.

    blocks: per block, a list of (tap_name_or_None, kernels, biases); pooling
    happens between blocks. Returns {tap: (C, H, W) array}.
    """
    captured = {}
    remaining = set(wanted)
    for b, block in enumerate(blocks):
        if not remaining:
            break
        if b > 0:
            x = maxpool_2x2_ceil(x)
        for tap, kernels, biases in block:
            x = np.maximum(conv2d_same(x, kernels, biases), 0.0)
            if tap in remaining:
                captured[tap] = x
                remaining.discard(tap)
                if not remaining:
                    break
    return captured


class IdentityEncoder:
    """Single tap returning the frame unchanged (channel-major)."""

    def __init__(self, spec: EncoderSpec):
        self.spec = spec

    def encode(self, frame: Frame):
        data = frame.data.transpose(2, 0, 1)
        return [FeatureMap(self.spec.taps[0], data)]


class ConvStackEncoder:
    """Conv/relu/pool stack with taps; immutable after construction."""

    def __init__(self, spec: EncoderSpec, blocks_by_channels: dict, standardize: bool):
        self.spec = spec
        self._blocks_by_channels = blocks_by_channels
        self._standardize = standardize

    def encode(self, frame: Frame):
        blocks = self._blocks_by_channels.get(frame.channels)
        if blocks is None:
            raise ShapeError(
                f"{self.spec.kind} encoder accepts {sorted(self._blocks_by_channels)}-channel "
                f"frames, got {frame.channels}"
            )
        x = frame.data.transpose(2, 0, 1)
        if self._standardize:
            mean = np.asarray(IMAGENET_MEAN, dtype=np.float64)[:, None, None]
            std = np.asarray(IMAGENET_STD, dtype=np.float64)[:, None, None]
            x = (x - mean) / std
        captured = _run_stack(x, blocks, self.spec.taps)
        return [FeatureMap(tap, captured[tap]) for tap in self.spec.taps]


def _random_conv_blocks(seed: int, in_channels: int):
    widths = (8, 16)
    blocks = []
    prev = in_channels
    for b, out_c in enumerate(widths, start=1):
        stream = Stream(derive_seed(seed, f"random-conv/block{b}/in{in_channels}"))
        scale = np.sqrt(2.0 / (prev * 9))
        kernels = stream.normals(out_c * prev * 9).reshape(out_c, prev, 3, 3) * scale
        biases = np.zeros(out_c)
        blocks.append([(f"relu{b}", kernels, biases)])
        prev = out_c
    return blocks


def _vgg_blocks(bundle: WeightBundle, taps: tuple):
    deepest = max(int(t[4]) for t in taps)
    needed = [
        name
        for name, _, _ in VGG_CONV_TABLE
        if _VGG_BLOCK_OF[name] < deepest or name == f"conv{deepest}_1"
    ]
    have = {layer.name: layer for layer in bundle.layers}
    missing = [n for n in needed if n not in have]
    if missing:
        raise IncompatibleWeightsError(f"weights lack layers {missing} required by taps {taps}")
    blocks = []
    for b in range(1, deepest + 1):
        block = []
        for name in needed:
            if _VGG_BLOCK_OF[name] == b:
                tap = f"relu{b}_1" if name.endswith("_1") else None
                layer = have[name]
                block.append((tap, layer.kernels, layer.biases))
        blocks.append(block)
    return blocks


def build_encoder(spec: EncoderSpec, weights: WeightBundle | None = None):
    """Construct the encoder named by `spec`.

    random_conv requires spec.seed; vgg_shallow requires a weight bundle.
    """
    if spec.kind == "identity":
        if len(spec.taps) != 1:
            raise ConfigurationError("identity encoder has exactly one tap")
        return IdentityEncoder(spec)
    if spec.kind == "random_conv":
        if spec.seed is None:
            raise ConfigurationError("random_conv encoder requires a seed")
        blocks = {c: _random_conv_blocks(spec.seed, c) for c in (1, 3)}
        return ConvStackEncoder(spec, blocks, standardize=False)
    if weights is None:
        raise ConfigurationError("vgg_shallow encoder requires a weight bundle")
    return ConvStackEncoder(spec, {3: _vgg_blocks(weights, spec.taps)}, standardize=True)


def encode(encoder, frame: Frame):
    """Feature maps for every tap, in spec order."""
    return encoder.encode(frame)
