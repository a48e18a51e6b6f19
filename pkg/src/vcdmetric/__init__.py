"""Frequency-domain video-consistency scoring.

The distance between a conditioning image and each video frame is measured in
the frequency domain: encoder features are transformed per channel with a 2D
DFT, amplitude and phase coefficients are pooled into empirical point clouds,
and the clouds are compared with (sliced) Wasserstein distances under a
temporal weight that keeps late frames cheaper to move than early ones.
"""

from .cli import metric_config_from_text
from .encoder import (
    EncoderSpec,
    FeatureMap,
    WeightBundle,
    build_encoder,
    default_taps,
    load_weights,
    save_weights,
)
from .errors import (
    ConfigurationError,
    CorruptFileError,
    DomainError,
    FormatError,
    IncompatibleWeightsError,
    ShapeError,
    ValueRangeError,
    VcdError,
)
from .media import Frame, Video, load_frame, load_video, resample_bilinear, save_frame
from .metrics import (
    VARIANTS,
    FrameScore,
    MetricConfig,
    VcdReport,
    build_metric_encoder,
    fdl,
    report_to_csv,
    report_to_json,
    temporal_weight,
    vcd_frame,
    vcd_variant,
    vcd_video,
)
from .reward import (
    FrameParams,
    OptTrace,
    ParamVideo,
    identity_params,
    objective,
    optimize,
    render_param_video,
    reward,
    textured_cond,
    trace_to_json,
)
from .rng import STREAM_NAME, Stream, derive_seed
from .spectra import (
    ComplexSpectrum,
    PointCloud,
    amplitude_points,
    dft2,
    feature_points,
    phase_points,
)
from .transport import SwdConfig, exact_w1d, sliced_wd, unit_directions

__version__ = "1.0.0"

__all__ = [
    "ComplexSpectrum",
    "ConfigurationError",
    "CorruptFileError",
    "DomainError",
    "EncoderSpec",
    "FeatureMap",
    "FormatError",
    "Frame",
    "FrameParams",
    "FrameScore",
    "IncompatibleWeightsError",
    "MetricConfig",
    "OptTrace",
    "ParamVideo",
    "PointCloud",
    "STREAM_NAME",
    "ShapeError",
    "Stream",
    "SwdConfig",
    "VARIANTS",
    "ValueRangeError",
    "VcdError",
    "VcdReport",
    "Video",
    "WeightBundle",
    "amplitude_points",
    "build_encoder",
    "build_metric_encoder",
    "default_taps",
    "derive_seed",
    "dft2",
    "exact_w1d",
    "fdl",
    "feature_points",
    "identity_params",
    "load_frame",
    "load_video",
    "load_weights",
    "metric_config_from_text",
    "objective",
    "optimize",
    "phase_points",
    "render_param_video",
    "report_to_csv",
    "report_to_json",
    "resample_bilinear",
    "reward",
    "save_frame",
    "save_weights",
    "sliced_wd",
    "temporal_weight",
    "textured_cond",
    "trace_to_json",
    "unit_directions",
    "vcd_frame",
    "vcd_variant",
    "vcd_video",
]
