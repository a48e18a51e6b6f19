"""Desk-scale reward optimization against the consistency metric.

A parametric toy generator renders a video from a conditioning image: frame 1
is the image itself, frame i is a gain/bias-adjusted circular shift of it. The
objective is the mean per-frame score of that rendering, the reward is its
negation, and a seeded derivative-free optimizer (random search with restarts
over the integer shifts, coordinate descent with halving steps over gain and
bias) drives the objective down. Integer shifts make the landscape
piecewise-constant, so a gradient-based optimizer has nothing to grab; the
derivative-free one demonstrates the same pull toward the conditioning image.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DomainError, ValueRangeError
from .media import Frame, Video
from .metrics import MetricConfig, vcd_video
from .rng import Stream, derive_seed

_STEP_FLOOR = 1e-4
_RESTART_PROB = 0.15
_NEIGHBOR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class FrameParams:
    """Per-frame generator parameters: circular shift, then gain and bias."""

    dx: int = 0
    dy: int = 0
    gain: float = 1.0
    bias: float = 0.0


@dataclass(frozen=True, eq=False)
class ParamVideo:
    """Parameters for frames 2..N; frame 1 is always the conditioning image."""

    frames: tuple

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise ConfigurationError("a parametric video needs at least one generated frame")
        for fp in frames:
            if not (math.isfinite(fp.gain) and math.isfinite(fp.bias)):
                raise ValueRangeError(f"non-finite gain/bias in {fp}")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return len(self.frames) + 1

    def with_frame(self, j: int, fp: FrameParams) -> "ParamVideo":
        return ParamVideo(self.frames[:j] + (fp,) + self.frames[j + 1 :])


def identity_params(frame_count: int) -> ParamVideo:
    """Parameters rendering every frame equal to the conditioning image."""
    return ParamVideo(tuple(FrameParams() for _ in range(frame_count - 1)))


def textured_cond(height: int = 16, width: int = 16, channels: int = 1, seed: int = 7) -> Frame:
    """A seeded noise texture in [0.05, 0.9] - headroom for gain/bias moves."""
    stream = Stream(derive_seed(seed, "texture"))
    values = stream.uniforms(height * width * channels).reshape(height, width, channels)
    return Frame(0.05 + 0.85 * values)


def render_param_video(
    cond: Frame, params: ParamVideo, noise_sigma: float = 0.0, noise_seed: int = 0
) -> Video:
    """Render the parametric video: frame i = clamp(g * circshift(cond) + b).

    Positive dx shifts content right, positive dy shifts it down, both
    circular. noise_sigma > 0 adds seeded per-frame Gaussian noise before the
    clamp, giving the objective a fixed-sample stochastic mode.
    """
    rendered = [cond]
    for j, fp in enumerate(params.frames):
        if abs(fp.dx) >= cond.width or abs(fp.dy) >= cond.height:
            raise DomainError(
                f"shift ({fp.dx}, {fp.dy}) out of range for a "
                f"{cond.height}x{cond.width} frame"
            )
        data = fp.gain * np.roll(cond.data, (fp.dy, fp.dx), axis=(0, 1)) + fp.bias
        if noise_sigma > 0.0:
            stream = Stream(derive_seed(noise_seed, f"render-noise/frame{j + 2}"))
            noise = stream.normals(data.size).reshape(data.shape)
            data = data + noise_sigma * noise
        rendered.append(Frame(np.clip(data, 0.0, 1.0)))
    return Video(tuple(rendered), cond_index=1)


def objective(
    cond: Frame,
    params: ParamVideo,
    cfg: MetricConfig,
    noise_sigma: float = 0.0,
    noise_seed: int = 0,
    noise_samples: int = 1,
) -> float:
    """Mean per-frame score of the rendered video; the reward is its negation.

    With noise_sigma > 0 the objective averages noise_samples seeded renders,
    a fixed-sample stand-in for the expectation over the generator.
    """
    if noise_samples < 1:
        raise ConfigurationError(f"noise_samples must be >= 1, got {noise_samples}")
    if noise_sigma == 0.0:
        return vcd_video(render_param_video(cond, params), cfg).total_mean
    values = [
        vcd_video(
            render_param_video(cond, params, noise_sigma, derive_seed(noise_seed, f"sample{s}")),
            cfg,
        ).total_mean
        for s in range(noise_samples)
    ]
    return float(np.mean(values))


def reward(cond: Frame, params: ParamVideo, cfg: MetricConfig) -> float:
    return -objective(cond, params, cfg)


@dataclass(frozen=True, eq=False)
class OptTrace:
    """Every evaluation of one optimization run, plus the accepted path."""

    seed: int
    budget: int
    objectives: tuple
    accepted: tuple
    best_params: ParamVideo
    best_objective: float

    @property
    def iterations(self) -> int:
        return len(self.objectives)


class _BudgetSpent(Exception):
    pass


def optimize(
    cond: Frame, init: ParamVideo, budget: int, seed: int, cfg: MetricConfig
) -> OptTrace:
    """Greedy seeded search; the returned best never exceeds the initial objective.

    Each sweep proposes one shift move per frame (neighbor step, or a uniform
    restart with probability 0.15), then one coordinate-descent pass over gain
    and bias; a sweep with no accepted move halves the continuous steps. Every
    objective evaluation counts against the budget and lands in the trace.
    """
    if budget < 1:
        raise ConfigurationError(f"budget must be >= 1, got {budget}")
    stream = Stream(derive_seed(seed, "optimize"))
    objectives = []

    def evaluate(candidate: ParamVideo) -> float:
        if len(objectives) >= budget:
            raise _BudgetSpent
        value = objective(cond, candidate, cfg)
        objectives.append(value)
        return value

    current = init
    current_value = evaluate(init)
    accepted = [current_value]
    width, height = cond.width, cond.height
    step_gain, step_bias = 0.5, 0.25

    def clamp(value: int, size: int) -> int:
        return max(-(size - 1), min(size - 1, value))

    try:
        while len(objectives) < budget:
            improved = False
            for j in range(len(current.frames)):
                fp = current.frames[j]
                if float(stream.uniforms(1)[0]) < _RESTART_PROB:
                    dx = int(stream.integers(1, -(width - 1), width)[0])
                    dy = int(stream.integers(1, -(height - 1), height)[0])
                else:
                    step = _NEIGHBOR_STEPS[int(stream.integers(1, 0, len(_NEIGHBOR_STEPS))[0])]
                    dx = clamp(fp.dx + step[0], width)
                    dy = clamp(fp.dy + step[1], height)
                candidate = current.with_frame(j, replace(fp, dx=dx, dy=dy))
                value = evaluate(candidate)
                if value < current_value:
                    current, current_value = candidate, value
                    accepted.append(value)
                    improved = True
            for j in range(len(current.frames)):
                for field, step in (("gain", step_gain), ("bias", step_bias)):
                    for sign in (1.0, -1.0):
                        fp = current.frames[j]
                        candidate = current.with_frame(
                            j, replace(fp, **{field: getattr(fp, field) + sign * step})
                        )
                        value = evaluate(candidate)
                        if value < current_value:
                            current, current_value = candidate, value
                            accepted.append(value)
                            improved = True
                            break
            if not improved:
                step_gain = max(step_gain / 2.0, _STEP_FLOOR)
                step_bias = max(step_bias / 2.0, _STEP_FLOOR)
    except _BudgetSpent:
        pass
    return OptTrace(
        seed=seed,
        budget=budget,
        objectives=tuple(objectives),
        accepted=tuple(accepted),
        best_params=current,
        best_objective=current_value,
    )


def trace_to_json(trace: OptTrace) -> str:
    payload = {
        "seed": trace.seed,
        "budget": trace.budget,
        "objectives": list(trace.objectives),
        "best": {
            "params": [
                {"dx": fp.dx, "dy": fp.dy, "gain": fp.gain, "bias": fp.bias}
                for fp in trace.best_params.frames
            ],
            "objective": trace.best_objective,
        },
    }
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"
