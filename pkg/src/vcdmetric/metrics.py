"""The video-consistency metric and its variants, assembled into reports.

Per-frame score: each encoder tap of the conditioning image and of frame i is
transformed to amplitude and phase point clouds; the Wasserstein distances
between corresponding clouds are combined across taps and weighted by
(N - i + 1)/N, so early frames are held closest to the conditioning image and
a frozen copy of it stays penalized late in the clip.

Variants swap the middle of that pipeline: vcd_l2 replaces the transport
distance with an L2 between sorted coefficient multisets, vcd_feat compares
raw feature values without the spectral transform, and amp_only / phase_only
zero one of the two terms.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .encoder import EncoderSpec, build_encoder, load_weights
from .errors import ConfigurationError, DomainError, ShapeError
from .media import Frame, Video
from .rng import Stream, derive_seed
from .spectra import (
    DEFAULT_EPS_REL,
    MODES,
    PointCloud,
    amplitude_points,
    dft2,
    feature_points,
    phase_points,
)
from .transport import (
    SwdConfig,
    presorted_w1d,
    project_sorted,
    swd_from_projections,
    unit_directions,
)

VARIANTS = ("vcd", "vcd_l2", "vcd_feat", "amp_only", "phase_only")
TAP_COMBINES = ("sum", "mean")


@dataclass(frozen=True, eq=False)
class MetricConfig:
    """Everything that parameterizes a scoring run."""

    encoder: EncoderSpec
    mode: str = "channel_vector"
    swd: SwdConfig = SwdConfig()
    alpha: float = 1.0
    eps_rel: float = DEFAULT_EPS_REL
    use_temporal_weight: bool = True
    frame_sample_count: int | None = None
    tap_combine: str = "sum"
    sample_seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.tap_combine not in TAP_COMBINES:
            raise ConfigurationError(
                f"tap_combine must be one of {TAP_COMBINES}, got {self.tap_combine!r}"
            )
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if self.eps_rel < 0:
            raise ConfigurationError(f"eps_rel must be >= 0, got {self.eps_rel}")
        if self.frame_sample_count is not None and self.frame_sample_count < 1:
            raise ConfigurationError(
                f"frame_sample_count must be >= 1, got {self.frame_sample_count}"
            )


@dataclass(frozen=True)
class FrameScore:
    """One evaluated frame: unweighted terms, the weight, and the weighted total."""

    index: int
    amplitude: float
    phase: float
    weight: float
    total: float


@dataclass(frozen=True, eq=False)
class VcdReport:
    variant: str
    frames: tuple
    indices: tuple
    total_sum: float
    total_mean: float
    config: dict


def temporal_weight(index: int, frame_count: int) -> float:
    """(N - i + 1)/N for frame i of N."""
    if not 1 <= index <= frame_count:
        raise DomainError(f"frame index {index} outside [1, {frame_count}]")
    return (frame_count - index + 1) / frame_count


def build_metric_encoder(spec: EncoderSpec):
    """Build the configured encoder, loading weights when the kind needs them."""
    if spec.kind == "vgg_shallow":
        if not spec.weights_path:
            raise ConfigurationError("vgg_shallow encoder requires a weights file path")
        return build_encoder(spec, load_weights(spec.weights_path, spec))
    return build_encoder(spec)


class _CloudDistance:
    """One fixed cloud, prepared once, measured against many others.

    Bit-identical to sliced_wd on the same pair: same direction set, same
    sorted-projection arithmetic, only the fixed side's sort is reused.
    """

    def __init__(self, cloud: PointCloud, swd: SwdConfig):
        self._kind = cloud.kind
        self._shape = cloud.points.shape
        self._order = swd.order
        if cloud.dim == 1:
            self._directions = None
            self._prepared = np.sort(cloud.points.ravel())[:, None]
        else:
            self._directions = unit_directions(cloud.dim, swd)
            self._prepared = project_sorted(cloud.points, self._directions)

    def to(self, other: PointCloud) -> float:
        if other.kind != self._kind:
            raise ConfigurationError(f"cloud kinds differ: {self._kind!r} vs {other.kind!r}")
        if other.points.shape != self._shape:
            raise ShapeError(f"cloud shapes differ: {self._shape} vs {other.points.shape}")
        if self._directions is None:
            return float(presorted_w1d(self._prepared, np.sort(other.points.ravel())[:, None], self._order)[0])
        return swd_from_projections(
            self._prepared, project_sorted(other.points, self._directions), self._order
        )


def _sorted_multiset(cloud: PointCloud) -> np.ndarray:
    return np.sort(cloud.points.ravel())


def _l2_to(prepared: np.ndarray, cloud: PointCloud) -> float:
    other = _sorted_multiset(cloud)
    if other.shape != prepared.shape:
        raise ShapeError(f"multiset sizes differ: {prepared.size} vs {other.size}")
    gaps = prepared - other
    return float(np.sqrt(np.mean(gaps * gaps)))


class _FrameScorer:
    """Scores frames against one conditioning image under one (cfg, variant).

    Everything derivable from the conditioning side alone (feature maps,
    spectra, sorted projections) is computed once here and reused per frame.
    """

    def __init__(self, cond: Frame, cfg: MetricConfig, variant: str, encoder):
        if variant not in VARIANTS:
            raise ConfigurationError(f"variant must be one of {VARIANTS}, got {variant!r}")
        self._cfg = cfg
        self._variant = variant
        self._encoder = encoder
        self._prepared = []
        for fmap in encoder.encode(cond):
            if variant == "vcd_feat":
                side = (_CloudDistance(feature_points(fmap, cfg.mode), cfg.swd), None)
            elif variant == "vcd_l2":
                spectrum = dft2(fmap)
                side = (
                    _sorted_multiset(amplitude_points(spectrum, "scalar")),
                    _sorted_multiset(phase_points(spectrum, "scalar", cfg.eps_rel)),
                )
            else:
                spectrum = dft2(fmap)
                amp = None
                if variant != "phase_only":
                    amp = _CloudDistance(amplitude_points(spectrum, cfg.mode), cfg.swd)
                phase = None
                if variant != "amp_only":
                    phase = _CloudDistance(phase_points(spectrum, cfg.mode, cfg.eps_rel), cfg.swd)
                side = (amp, phase)
            self._prepared.append(side)

    def terms(self, frame: Frame) -> tuple:
        """(amplitude term, phase term) combined across taps, unweighted."""
        cfg = self._cfg
        amp_terms = []
        phase_terms = []
        for (amp_side, phase_side), fmap in zip(self._prepared, self._encoder.encode(frame)):
            if self._variant == "vcd_feat":
                amp_terms.append(amp_side.to(feature_points(fmap, cfg.mode)))
                phase_terms.append(0.0)
            elif self._variant == "vcd_l2":
                spectrum = dft2(fmap)
                amp_terms.append(_l2_to(amp_side, amplitude_points(spectrum, "scalar")))
                phase_terms.append(
                    _l2_to(phase_side, phase_points(spectrum, "scalar", cfg.eps_rel))
                )
            else:
                spectrum = dft2(fmap)
                amp_terms.append(
                    0.0
                    if amp_side is None
                    else amp_side.to(amplitude_points(spectrum, cfg.mode))
                )
                phase_terms.append(
                    0.0
                    if phase_side is None
                    else phase_side.to(phase_points(spectrum, cfg.mode, cfg.eps_rel))
                )
        if cfg.tap_combine == "mean":
            return float(np.mean(amp_terms)), float(np.mean(phase_terms))
        return float(np.sum(amp_terms)), float(np.sum(phase_terms))


def _score(scorer: _FrameScorer, cfg: MetricConfig, frame: Frame, index: int, count: int) -> FrameScore:
    weight = temporal_weight(index, count)
    amp, phase = scorer.terms(frame)
    raw = amp + cfg.alpha * phase
    total = weight * raw if cfg.use_temporal_weight else raw
    return FrameScore(index, amp, phase, weight, float(total))


def fdl(u: Frame, v: Frame, cfg: MetricConfig) -> float:
    """Frequency-distribution distance between two frames: amp + alpha * phase."""
    encoder = build_metric_encoder(cfg.encoder)
    amp, phase = _FrameScorer(u, cfg, "vcd", encoder).terms(v)
    return float(amp + cfg.alpha * phase)


def vcd_frame(
    x_cnd: Frame, x_i: Frame, index: int, frame_count: int, cfg: MetricConfig, variant: str = "vcd"
) -> FrameScore:
    """Score one frame against the conditioning image."""
    encoder = build_metric_encoder(cfg.encoder)
    scorer = _FrameScorer(x_cnd, cfg, variant, encoder)
    return _score(scorer, cfg, x_i, index, frame_count)


def vcd_variant(
    x_cnd: Frame, x_i: Frame, index: int, frame_count: int, cfg: MetricConfig, variant: str
) -> FrameScore:
    """vcd_frame under an ablation variant (vcd_l2, vcd_feat, amp_only, phase_only)."""
    return vcd_frame(x_cnd, x_i, index, frame_count, cfg, variant)


def _evaluated_indices(video: Video, cfg: MetricConfig, external_cond: bool) -> list:
    if external_cond:
        candidates = list(range(1, video.frame_count + 1))
    else:
        candidates = [i for i in range(1, video.frame_count + 1) if i != video.cond_index]
    if cfg.frame_sample_count is None:
        return candidates
    if cfg.frame_sample_count > len(candidates):
        raise ConfigurationError(
            f"frame_sample_count {cfg.frame_sample_count} exceeds the "
            f"{len(candidates)} evaluable frames"
        )
    order = Stream(derive_seed(cfg.sample_seed, "frame-sample")).permutation(len(candidates))
    return sorted(candidates[j] for j in order[: cfg.frame_sample_count])


def config_snapshot(cfg: MetricConfig, cond_label: str) -> dict:
    """The config as a plain dict with fixed key order, for report embedding."""
    return {
        "encoder": {
            "kind": cfg.encoder.kind,
            "taps": list(cfg.encoder.taps),
            "seed": cfg.encoder.seed,
            "weights": cfg.encoder.weights_path,
        },
        "mode": cfg.mode,
        "projections": cfg.swd.num_projections,
        "swd_seed": cfg.swd.seed,
        "order": cfg.swd.order,
        "alpha": cfg.alpha,
        "eps_rel": cfg.eps_rel,
        "temporal_weight": cfg.use_temporal_weight,
        "sample_frames": cfg.frame_sample_count,
        "tap_combine": cfg.tap_combine,
        "sample_seed": cfg.sample_seed,
        "cond": cond_label,
    }


def vcd_video(
    video: Video,
    cfg: MetricConfig,
    variant: str = "vcd",
    cond: Frame | None = None,
    workers: int | None = None,
) -> VcdReport:
    """Score a video against its conditioning image.

    With `cond` unset, the conditioning image is the video's own cond frame and
    that frame is excluded from evaluation; an external `cond` (already sized
    to match) is scored against every frame. frame_sample_count draws a seeded
    without-replacement subset of the evaluable indices. Workers only fan out
    the per-frame computation; reduction is in frame-index order either way.
    """
    if cond is None:
        cond_frame = video.cond_frame
        cond_label = f"frame{video.cond_index}"
    else:
        cond_frame = cond
        cond_label = "external"
        if cond_frame.data.shape != video.frames[0].data.shape:
            raise ShapeError(
                f"cond shape {cond_frame.data.shape} does not match "
                f"frame shape {video.frames[0].data.shape}"
            )
    indices = _evaluated_indices(video, cfg, external_cond=cond is not None)
    encoder = build_metric_encoder(cfg.encoder)
    scorer = _FrameScorer(cond_frame, cfg, variant, encoder)
    count = video.frame_count

    def one(index: int) -> FrameScore:
        return _score(scorer, cfg, video.frames[index - 1], index, count)

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(one, indices))
    else:
        scores = [one(i) for i in indices]
    totals = [s.total for s in scores]
    total_sum = float(np.sum(totals)) if totals else 0.0
    total_mean = total_sum / len(totals) if totals else 0.0
    return VcdReport(
        variant=variant,
        frames=tuple(scores),
        indices=tuple(indices),
        total_sum=total_sum,
        total_mean=total_mean,
        config=config_snapshot(cfg, cond_label),
    )


def report_to_json(report: VcdReport) -> str:
    """Fixed-field-order JSON; identical reports serialize byte-identically."""
    payload = {
        "variant": report.variant,
        "config": report.config,
        "frames": [
            {
                "i": s.index,
                "amp": s.amplitude,
                "phase": s.phase,
                "weight": s.weight,
                "total": s.total,
            }
            for s in report.frames
        ],
        "sum": report.total_sum,
        "mean": report.total_mean,
    }
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def report_to_csv(report: VcdReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "amp", "phase", "weight", "total"])
    for s in report.frames:
        writer.writerow([s.index, s.amplitude, s.phase, s.weight, s.total])
    return buf.getvalue()
