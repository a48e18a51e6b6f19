import json

import numpy as np
import pytest

from vcdmetric.encoder import EncoderSpec
from vcdmetric.errors import ConfigurationError, DomainError, ValueRangeError
from vcdmetric.metrics import MetricConfig, vcd_frame
from vcdmetric.reward import (
    FrameParams,
    ParamVideo,
    identity_params,
    objective,
    optimize,
    render_param_video,
    reward,
    textured_cond,
    trace_to_json,
)


def _cfg():
    return MetricConfig(encoder=EncoderSpec("identity", ("identity",)))


class TestParamVideo:
    def test_needs_one_frame(self):
        with pytest.raises(ConfigurationError):
            ParamVideo(())

    def test_rejects_non_finite_gain(self):
        with pytest.raises(ValueRangeError):
            ParamVideo((FrameParams(gain=float("nan")),))

    def test_frame_count_includes_cond(self):
        assert identity_params(4).frame_count == 4

    def test_with_frame_replaces_one(self):
        params = identity_params(3)
        swapped = params.with_frame(1, FrameParams(dx=2))
        assert swapped.frames[0] == FrameParams()
        assert swapped.frames[1].dx == 2


class TestTexturedCond:
    def test_shape_and_range(self):
        cond = textured_cond(12, 10, 3, seed=1)
        assert cond.data.shape == (12, 10, 3)
        assert cond.data.min() >= 0.05
        assert cond.data.max() <= 0.9

    def test_deterministic_in_seed(self):
        a = textured_cond(seed=4)
        b = textured_cond(seed=4)
        c = textured_cond(seed=5)
        assert np.array_equal(a.data, b.data)
        assert not np.array_equal(a.data, c.data)


class TestRender:
    def test_identity_params_copy_cond(self):
        cond = textured_cond(8, 8)
        video = render_param_video(cond, identity_params(3))
        assert video.frame_count == 3
        for frame in video.frames:
            assert np.array_equal(frame.data, cond.data)

    def test_gain_zero_bias_renders_constant(self):
        cond = textured_cond(8, 8)
        params = ParamVideo((FrameParams(gain=0.0, bias=0.5),))
        video = render_param_video(cond, params)
        assert np.all(video.frames[1].data == 0.5)

    def test_shift_is_circular(self):
        cond = textured_cond(8, 8)
        video = render_param_video(cond, ParamVideo((FrameParams(dx=1),)))
        assert np.array_equal(video.frames[1].data, np.roll(cond.data, 1, axis=1))

    def test_output_clamped(self):
        cond = textured_cond(8, 8)
        video = render_param_video(cond, ParamVideo((FrameParams(bias=0.8),)))
        assert video.frames[1].data.max() <= 1.0

    def test_shift_bounds_checked(self):
        cond = textured_cond(8, 8)
        with pytest.raises(DomainError):
            render_param_video(cond, ParamVideo((FrameParams(dx=8),)))

    def test_noise_is_seeded(self):
        cond = textured_cond(8, 8)
        params = identity_params(2)
        a = render_param_video(cond, params, noise_sigma=0.1, noise_seed=3)
        b = render_param_video(cond, params, noise_sigma=0.1, noise_seed=3)
        c = render_param_video(cond, params, noise_sigma=0.1, noise_seed=4)
        assert np.array_equal(a.frames[1].data, b.frames[1].data)
        assert not np.array_equal(a.frames[1].data, c.frames[1].data)


class TestObjective:
    def test_identity_scores_zero(self):
        cond = textured_cond()
        assert objective(cond, identity_params(4), _cfg()) == 0.0

    def test_reward_is_negation(self):
        cond = textured_cond()
        params = ParamVideo((FrameParams(dx=2), FrameParams(dx=1)))
        assert reward(cond, params, _cfg()) == -objective(cond, params, _cfg())

    def test_matches_frame_scores(self):
        cond = textured_cond()
        params = ParamVideo((FrameParams(dx=2), FrameParams(dy=1)))
        video = render_param_video(cond, params)
        cfg = _cfg()
        totals = [
            vcd_frame(cond, video.frames[i - 1], i, 3, cfg).total for i in (2, 3)
        ]
        assert objective(cond, params, cfg) == pytest.approx(np.mean(totals), rel=1e-12)

    def test_noise_samples_validated(self):
        with pytest.raises(ConfigurationError):
            objective(textured_cond(), identity_params(2), _cfg(), noise_samples=0)

    def test_noisy_objective_deterministic(self):
        cond = textured_cond()
        params = identity_params(3)
        a = objective(cond, params, _cfg(), noise_sigma=0.05, noise_seed=1, noise_samples=3)
        b = objective(cond, params, _cfg(), noise_sigma=0.05, noise_seed=1, noise_samples=3)
        assert a == b
        assert a > 0.0


class TestOptimize:
    def test_budget_validated(self):
        with pytest.raises(ConfigurationError):
            optimize(textured_cond(), identity_params(2), 0, 0, _cfg())

    def test_budget_one_is_init_only(self):
        cond = textured_cond()
        init = ParamVideo((FrameParams(dx=3),))
        trace = optimize(cond, init, 1, 0, _cfg())
        assert trace.iterations == 1
        assert trace.best_params is init
        assert trace.best_objective == trace.objectives[0]

    def test_budget_is_respected(self):
        trace = optimize(textured_cond(), ParamVideo((FrameParams(dx=2),)), 37, 0, _cfg())
        assert trace.iterations == 37

    def test_identity_init_cannot_be_improved(self):
        cond = textured_cond()
        trace = optimize(cond, identity_params(3), 40, 1, _cfg())
        assert trace.best_objective == 0.0
        assert trace.accepted == (0.0,)
        assert all(fp == FrameParams() for fp in trace.best_params.frames)

    def test_accepted_path_monotone(self):
        cond = textured_cond()
        init = ParamVideo((FrameParams(dx=2, dy=2), FrameParams(dx=2, dy=2)))
        trace = optimize(cond, init, 200, 0, _cfg())
        diffs = np.diff(trace.accepted)
        assert np.all(diffs < 0)
        assert trace.accepted[0] == trace.objectives[0]

    def test_best_bounded_by_every_evaluation(self):
        cond = textured_cond()
        init = ParamVideo((FrameParams(dx=2, dy=2),))
        trace = optimize(cond, init, 120, 3, _cfg())
        assert trace.best_objective == min(trace.objectives)
        assert trace.best_objective <= trace.objectives[0]

    def test_deterministic(self):
        cond = textured_cond()
        init = ParamVideo((FrameParams(dx=2), FrameParams(dy=2)))
        a = optimize(cond, init, 80, 5, _cfg())
        b = optimize(cond, init, 80, 5, _cfg())
        assert a.objectives == b.objectives
        assert a.best_params.frames == b.best_params.frames

    def test_seed_changes_proposals(self):
        cond = textured_cond()
        init = ParamVideo((FrameParams(dx=4, dy=4),))
        a = optimize(cond, init, 60, 0, _cfg())
        b = optimize(cond, init, 60, 1, _cfg())
        assert a.objectives != b.objectives


class TestTraceJson:
    def test_payload_shape(self):
        trace = optimize(textured_cond(), ParamVideo((FrameParams(dx=1),)), 10, 0, _cfg())
        payload = json.loads(trace_to_json(trace))
        assert list(payload) == ["seed", "budget", "objectives", "best"]
        assert payload["seed"] == 0
        assert payload["budget"] == 10
        assert len(payload["objectives"]) == 10
        assert list(payload["best"]) == ["params", "objective"]
        assert list(payload["best"]["params"][0]) == ["dx", "dy", "gain", "bias"]

    def test_serialization_deterministic(self):
        a = optimize(textured_cond(), ParamVideo((FrameParams(dx=1),)), 15, 2, _cfg())
        b = optimize(textured_cond(), ParamVideo((FrameParams(dx=1),)), 15, 2, _cfg())
        assert trace_to_json(a) == trace_to_json(b)
