import json

import numpy as np
import pytest

from vcdmetric.encoder import EncoderSpec
from vcdmetric.errors import ConfigurationError, DomainError, ShapeError
from vcdmetric.media import Frame, Video
from vcdmetric.metrics import (
    VARIANTS,
    MetricConfig,
    report_to_csv,
    report_to_json,
    temporal_weight,
    fdl,
    vcd_frame,
    vcd_variant,
    vcd_video,
)
from vcdmetric.rng import Stream
from vcdmetric.transport import SwdConfig, exact_w1d
from vcdmetric.spectra import amplitude_points, dft2, phase_points


def _cfg(**kw):
    enc = kw.pop("encoder", EncoderSpec("identity", ("identity",)))
    return MetricConfig(encoder=enc, **kw)


def _shifted(frame, dx):
    return Frame(np.roll(frame.data, dx, axis=1))


class TestTemporalWeight:
    def test_first_frame(self):
        assert temporal_weight(1, 10) == 1.0

    def test_last_frame(self):
        assert temporal_weight(10, 10) == pytest.approx(0.1)

    def test_long_video_spot_value(self):
        assert temporal_weight(2, 51) == 50 / 51

    @pytest.mark.parametrize("i", [0, 11])
    def test_out_of_range(self, i):
        with pytest.raises(DomainError):
            temporal_weight(i, 10)


class TestMetricConfig:
    def test_bad_mode(self):
        with pytest.raises(ConfigurationError):
            _cfg(mode="vectors")

    def test_bad_tap_combine(self):
        with pytest.raises(ConfigurationError):
            _cfg(tap_combine="max")

    def test_negative_alpha(self):
        with pytest.raises(ConfigurationError):
            _cfg(alpha=-1.0)

    def test_zero_sample_count(self):
        with pytest.raises(ConfigurationError):
            _cfg(frame_sample_count=0)


class TestFdl:
    def test_self_distance_zero(self, textured16):
        assert fdl(textured16, textured16, _cfg()) == 0.0

    def test_symmetry(self, textured16):
        other = _shifted(textured16, 3)
        cfg = _cfg()
        assert fdl(textured16, other, cfg) == pytest.approx(fdl(other, textured16, cfg), abs=1e-12)

    def test_hand_fixture_pi_over_sqrt2(self):
        u = np.zeros((2, 2, 1))
        u[0, 0, 0] = 1.0
        v = np.roll(u, 1, axis=1)
        cfg = _cfg(mode="scalar")
        value = fdl(Frame(u), Frame(v), cfg)
        assert value == pytest.approx(np.pi / np.sqrt(2.0), rel=1e-9)

    def test_alpha_scales_phase_term(self):
        u = np.zeros((2, 2, 1))
        u[0, 0, 0] = 1.0
        v = np.roll(u, 1, axis=1)
        base = fdl(Frame(u), Frame(v), _cfg(mode="scalar", alpha=1.0))
        doubled = fdl(Frame(u), Frame(v), _cfg(mode="scalar", alpha=2.0))
        assert doubled == pytest.approx(2.0 * base, rel=1e-12)


class TestVcdFrame:
    def test_identical_frames_zero(self, textured16):
        score = vcd_frame(textured16, textured16, 2, 4, _cfg())
        assert score.total <= 1e-12
        assert score.amplitude == 0.0
        assert score.phase == 0.0

    def test_weight_ratio_law(self, textured16):
        shifted = _shifted(textured16, 2)
        on = vcd_frame(textured16, shifted, 3, 7, _cfg(use_temporal_weight=True))
        off = vcd_frame(textured16, shifted, 3, 7, _cfg(use_temporal_weight=False))
        assert on.total == temporal_weight(3, 7) * off.total
        assert on.weight == (7 - 3 + 1) / 7

    def test_shift_dichotomy(self, textured16):
        score = vcd_frame(textured16, _shifted(textured16, 3), 2, 2, _cfg())
        assert score.amplitude <= 1e-9
        assert score.phase > 0.01

    def test_brightness_dichotomy(self, textured16):
        brighter = Frame(textured16.data + 0.1)
        score = vcd_frame(textured16, brighter, 2, 2, _cfg())
        assert score.phase <= 1e-9
        assert score.amplitude > 0.0

    def test_total_formula(self, textured16):
        score = vcd_frame(textured16, _shifted(textured16, 1), 2, 5, _cfg(alpha=0.5))
        assert score.total == pytest.approx(
            score.weight * (score.amplitude + 0.5 * score.phase), rel=1e-12
        )

    def test_index_validated(self, textured16):
        with pytest.raises(DomainError):
            vcd_frame(textured16, textured16, 9, 4, _cfg())


class TestVariants:
    def test_all_variants_zero_on_identical(self, textured16):
        for variant in VARIANTS:
            score = vcd_variant(textured16, textured16, 2, 3, _cfg(), variant)
            assert score.total <= 1e-12, variant

    def test_amp_only_and_phase_only_on_shift(self, textured16):
        shifted = _shifted(textured16, 3)
        amp = vcd_variant(textured16, shifted, 2, 2, _cfg(), "amp_only")
        phase = vcd_variant(textured16, shifted, 2, 2, _cfg(), "phase_only")
        assert amp.total <= 1e-9
        assert amp.phase == 0.0
        assert phase.total > 0.01
        assert phase.amplitude == 0.0

    def test_vcd_feat_blind_to_shift(self, textured16):
        shifted = _shifted(textured16, 3)
        feat = vcd_variant(textured16, shifted, 2, 2, _cfg(), "vcd_feat")
        full = vcd_frame(textured16, shifted, 2, 2, _cfg())
        assert feat.total == 0.0
        assert full.total > 0.0

    def test_vcd_feat_sees_brightness(self, textured16):
        brighter = Frame(textured16.data + 0.1)
        feat = vcd_variant(textured16, brighter, 2, 2, _cfg(), "vcd_feat")
        assert feat.total == pytest.approx(0.1 * temporal_weight(2, 2), rel=1e-9)

    def test_vcd_l2_scalar_equals_w2(self, textured16):
        shifted = _shifted(textured16, 3)
        cfg = _cfg(mode="scalar")
        score = vcd_variant(textured16, shifted, 2, 2, cfg, "vcd_l2")
        spec_a = dft2(textured16.data.transpose(2, 0, 1))
        spec_b = dft2(shifted.data.transpose(2, 0, 1))
        amp_w2 = exact_w1d(
            amplitude_points(spec_a, "scalar").points,
            amplitude_points(spec_b, "scalar").points,
            2,
        )
        phase_w2 = exact_w1d(
            phase_points(spec_a, "scalar", cfg.eps_rel).points,
            phase_points(spec_b, "scalar", cfg.eps_rel).points,
            2,
        )
        assert score.amplitude == pytest.approx(amp_w2, abs=1e-9)
        assert score.phase == pytest.approx(phase_w2, abs=1e-9)

    def test_unknown_variant(self, textured16):
        with pytest.raises(ConfigurationError):
            vcd_variant(textured16, textured16, 2, 2, _cfg(), "vcd_l3")


def _video(cond, count=4, step=1):
    frames = [cond] + [_shifted(cond, step * k) for k in range(1, count)]
    return Video(tuple(frames))


class TestVcdVideo:
    def test_still_video_all_zero(self, textured16):
        video = Video(tuple([textured16] * 4))
        report = vcd_video(video, _cfg())
        assert all(s.total == 0.0 for s in report.frames)
        assert report.total_mean == 0.0

    def test_full_evaluation_indices(self, textured16):
        report = vcd_video(_video(textured16, 3), _cfg())
        assert report.indices == (2, 3)

    def test_cond_index_excluded(self, textured16):
        video = Video(tuple([textured16, _shifted(textured16, 1), _shifted(textured16, 2)]), cond_index=2)
        report = vcd_video(video, _cfg())
        assert report.indices == (1, 3)

    def test_sum_and_mean(self, textured16):
        report = vcd_video(_video(textured16, 4), _cfg())
        totals = [s.total for s in report.frames]
        assert report.total_sum == pytest.approx(sum(totals), rel=1e-12)
        assert report.total_mean == pytest.approx(sum(totals) / 3, rel=1e-12)

    def test_seeded_frame_sampling(self, textured16):
        cfg = _cfg(frame_sample_count=2, sample_seed=5)
        report = vcd_video(_video(textured16, 6), cfg)
        assert len(report.indices) == 2
        assert set(report.indices) <= {2, 3, 4, 5, 6}
        assert report.indices == tuple(sorted(report.indices))
        again = vcd_video(_video(textured16, 6), cfg)
        assert again.indices == report.indices

    def test_sample_count_bound(self, textured16):
        with pytest.raises(ConfigurationError):
            vcd_video(_video(textured16, 4), _cfg(frame_sample_count=4))

    def test_external_cond_scores_all_frames(self, textured16):
        video = _video(textured16, 3)
        report = vcd_video(video, _cfg(), cond=_shifted(textured16, 1))
        assert report.indices == (1, 2, 3)
        assert report.config["cond"] == "external"

    def test_external_cond_shape_checked(self, textured16):
        video = _video(textured16, 3)
        small = Frame(textured16.data[:8, :8])
        with pytest.raises(ShapeError):
            vcd_video(video, _cfg(), cond=small)

    def test_workers_do_not_change_results(self, textured16):
        video = _video(textured16, 5)
        serial = vcd_video(video, _cfg())
        parallel = vcd_video(video, _cfg(), workers=3)
        assert report_to_json(serial) == report_to_json(parallel)

    def test_tap_combine_sum_vs_mean(self, textured16):
        enc = EncoderSpec("random_conv", ("relu1", "relu2"), seed=3)
        video = _video(textured16, 3)
        total_sum = vcd_video(video, _cfg(encoder=enc, tap_combine="sum")).total_sum
        total_mean = vcd_video(video, _cfg(encoder=enc, tap_combine="mean")).total_sum
        assert total_sum == pytest.approx(2.0 * total_mean, rel=1e-12)


class TestReports:
    def test_json_roundtrip_and_field_order(self, textured16):
        report = vcd_video(_video(textured16, 3), _cfg())
        payload = json.loads(report_to_json(report))
        assert list(payload) == ["variant", "config", "frames", "sum", "mean"]
        assert list(payload["frames"][0]) == ["i", "amp", "phase", "weight", "total"]
        assert payload["variant"] == "vcd"
        assert payload["mean"] == report.total_mean

    def test_json_deterministic(self, textured16):
        a = report_to_json(vcd_video(_video(textured16, 4), _cfg()))
        b = report_to_json(vcd_video(_video(textured16, 4), _cfg()))
        assert a == b

    def test_csv_layout(self, textured16):
        report = vcd_video(_video(textured16, 3), _cfg())
        lines = report_to_csv(report).splitlines()
        assert lines[0] == "i,amp,phase,weight,total"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "2"
        assert float(first[3]) == pytest.approx(2 / 3)

    def test_config_snapshot_keys(self, textured16):
        report = vcd_video(_video(textured16, 3), _cfg())
        assert list(report.config) == [
            "encoder",
            "mode",
            "projections",
            "swd_seed",
            "order",
            "alpha",
            "eps_rel",
            "temporal_weight",
            "sample_frames",
            "tap_combine",
            "sample_seed",
            "cond",
        ]
        assert report.config["cond"] == "frame1"


class TestEncoderIntegration:
    def test_random_conv_zero_on_identical(self, textured16):
        enc = EncoderSpec("random_conv", ("relu1", "relu2"), seed=2)
        score = vcd_frame(textured16, textured16, 2, 2, _cfg(encoder=enc))
        assert score.total <= 1e-12

    def test_vgg_zero_on_identical(self, vgg_prefix_weights):
        enc = EncoderSpec(
            "vgg_shallow", ("relu1_1", "relu2_1"), weights_path=str(vgg_prefix_weights)
        )
        rgb = Frame(Stream(12).uniforms(12 * 12 * 3).reshape(12, 12, 3))
        score = vcd_frame(rgb, rgb, 2, 2, _cfg(encoder=enc))
        assert score.total <= 1e-12

    def test_swd_seed_changes_cvec_scores(self, textured16):
        rgb = Frame(Stream(13).uniforms(16 * 16 * 3).reshape(16, 16, 3))
        moved = Frame(np.roll(rgb.data, 2, axis=0))
        a = vcd_frame(rgb, moved, 2, 2, _cfg(swd=SwdConfig(seed=1, num_projections=8)))
        b = vcd_frame(rgb, moved, 2, 2, _cfg(swd=SwdConfig(seed=2, num_projections=8)))
        assert a.total != b.total
