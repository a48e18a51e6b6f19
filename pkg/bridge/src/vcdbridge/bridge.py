"""Flat-buffer boundary around the video-consistency scorer.

Training loops that hold frames as one contiguous float32 array can score
them without touching files or scorer types: data crosses the boundary
exactly twice, a flat buffer with declared dimensions in and a JSON report
text out. Configuration arrives as the same key=value text the CLI accepts
in --config files, so a bridge call and a CLI run with equal inputs produce
equal reports. Failures of any kind come back as a JSON object with an
"error" field; score_buffer never raises. The function keeps no state, so
concurrent calls on distinct buffers are safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from vcdmetric import (
    Frame,
    ShapeError,
    ValueRangeError,
    Video,
    metric_config_from_text,
    report_to_json,
    vcd_video,
)


@dataclass(frozen=True)
class FlatVideoBuffer:
    """A video as one contiguous float32 buffer plus its declared shape.

    Frames are packed frame-major (frame_count x height x width x channels,
    row-major, channel-last) with the conditioning image first. data may be
    any bytes-like object holding little-endian float32 values or any array
    convertible to float32. The record itself stays unvalidated; score_buffer
    checks it and reports problems as structured errors.
    """

    data: object
    frame_count: int
    height: int
    width: int
    channels: int


def _flat_values(data) -> np.ndarray:
    if isinstance(data, (bytes, bytearray, memoryview)):
        return np.frombuffer(data, dtype="<f4")
    return np.asarray(data, dtype=np.float32).reshape(-1)


def _to_video(buffer: FlatVideoBuffer) -> Video:
    dims = {
        "frame_count": buffer.frame_count,
        "height": buffer.height,
        "width": buffer.width,
        "channels": buffer.channels,
    }
    for name, value in dims.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ShapeError(f"{name} must be a positive integer, got {value!r}")
    values = _flat_values(buffer.data)
    expected = buffer.frame_count * buffer.height * buffer.width * buffer.channels
    if values.size != expected:
        raise ShapeError(
            f"buffer holds {values.size} values, declared shape "
            f"{buffer.frame_count}x{buffer.height}x{buffer.width}x{buffer.channels} "
            f"needs {expected}"
        )
    if not np.all(np.isfinite(values)):
        raise ValueRangeError("buffer contains non-finite values")
    stacked = values.astype(np.float64).reshape(
        buffer.frame_count, buffer.height, buffer.width, buffer.channels
    )
    return Video(tuple(Frame(stacked[i]) for i in range(buffer.frame_count)), cond_index=1)


def score_buffer(buffer: FlatVideoBuffer, config_text: str = "") -> str:
    """Score a flat video buffer; returns JSON text, never raises.

    On success the text is the scorer's report (identical to the CLI scoring
    the same frames with the same config); on any failure it is an object
    with a single "error" field describing the problem.
    """
    try:
        video = _to_video(buffer)
        cfg = metric_config_from_text(config_text)
        return report_to_json(vcd_video(video, cfg))
    except Exception as exc:
        message = str(exc) or type(exc).__name__
        return json.dumps({"error": message}) + "\n"
