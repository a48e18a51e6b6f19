"""Batch front-end: score videos, compare runs, ablate variants, demo the optimizer.

Configuration precedence is defaults < config file (--config, key=value lines)
< explicit flags. One master --seed feeds the projection, encoder, and frame
sampling streams through labeled derivation, so a single integer pins every
random choice in a run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .encoder import EncoderSpec, default_taps
from .errors import ConfigurationError, FormatError, ShapeError, VcdError
from .media import Frame, Video, load_frame, load_video, resample_bilinear
from .metrics import (
    VARIANTS,
    MetricConfig,
    VcdReport,
    build_metric_encoder,
    report_to_csv,
    report_to_json,
    vcd_video,
)
from .reward import FrameParams, ParamVideo, optimize, textured_cond, trace_to_json
from .rng import derive_seed
from .spectra import amplitude_points, dft2, phase_points
from .svgplot import line_chart
from .transport import SwdConfig

_FRAME_SUFFIXES = (".vcdf", ".ppm", ".pgm")
_ENCODER_NAMES = {
    "identity": "identity",
    "random": "random_conv",
    "random_conv": "random_conv",
    "vgg": "vgg_shallow",
    "vgg_shallow": "vgg_shallow",
}
_MODE_NAMES = {"scalar": "scalar", "cvec": "channel_vector", "channel_vector": "channel_vector"}
_BOOL_NAMES = {
    "true": True,
    "1": True,
    "yes": True,
    "false": False,
    "0": False,
    "no": False,
}

_DEFAULT_SETTINGS = {
    "encoder": "identity",
    "weights": None,
    "taps": None,
    "mode": "channel_vector",
    "projections": 64,
    "seed": 0,
    "order": 2,
    "alpha": 1.0,
    "eps_rel": 1e-8,
    "temporal_weight": True,
    "sample_frames": None,
    "tap_combine": "sum",
}


def _to_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{key} expects an integer, got {value!r}") from None


def _to_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(f"{key} expects a number, got {value!r}") from None


def _to_bool(key, value):
    flag = _BOOL_NAMES.get(str(value).strip().lower())
    if flag is None:
        raise ConfigurationError(f"{key} expects true/false, got {value!r}")
    return flag


_CONFIG_PARSERS = {
    "encoder": lambda v: _named(v, _ENCODER_NAMES, "encoder"),
    "weights": lambda v: str(v),
    "taps": lambda v: str(v),
    "mode": lambda v: _named(v, _MODE_NAMES, "mode"),
    "projections": lambda v: _to_int("projections", v),
    "seed": lambda v: _to_int("seed", v),
    "order": lambda v: _to_int("order", v),
    "alpha": lambda v: _to_float("alpha", v),
    "eps_rel": lambda v: _to_float("eps_rel", v),
    "temporal_weight": lambda v: _to_bool("temporal_weight", v),
    "sample_frames": lambda v: _to_int("sample_frames", v),
    "tap_combine": lambda v: str(v),
}


def _named(value, table, key):
    name = table.get(str(value).strip().lower())
    if name is None:
        raise ConfigurationError(f"{key} must be one of {sorted(set(table))}, got {value!r}")
    return name


def _parse_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"config file {path} is not text") from None
    return _parse_config_lines(text, str(path))


def _parse_config_lines(text: str, source: str) -> dict:
    """Line-oriented key=value settings; # starts a comment."""
    settings = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{number}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        parse = _CONFIG_PARSERS.get(key)
        if parse is None:
            raise ConfigurationError(f"{source}:{number}: unknown key {key!r}")
        settings[key] = parse(value.strip())
    return settings


def metric_config_from_text(text: str, source: str = "config") -> MetricConfig:
    """Build a MetricConfig from key=value text, applying the CLI defaults.

    Same format and precedence as --config files, minus the flag layer, so
    text-configured callers score exactly like an equivalent CLI run.
    """
    settings = dict(_DEFAULT_SETTINGS)
    settings.update(_parse_config_lines(text, source))
    return _metric_config(settings)


def _settings_from(args) -> dict:
    settings = dict(_DEFAULT_SETTINGS)
    if getattr(args, "config", None):
        settings.update(_parse_config_file(args.config))
    overrides = {
        "encoder": _named(args.encoder, _ENCODER_NAMES, "encoder") if args.encoder else None,
        "weights": getattr(args, "weights", None),
        "taps": getattr(args, "taps", None),
        "mode": _named(args.mode, _MODE_NAMES, "mode") if getattr(args, "mode", None) else None,
        "projections": getattr(args, "projections", None),
        "seed": getattr(args, "seed", None),
        "order": getattr(args, "order", None),
        "alpha": getattr(args, "alpha", None),
        "sample_frames": getattr(args, "sample_frames", None),
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "no_temporal_weight", False):
        settings["temporal_weight"] = False
    return settings


def _metric_config(settings: dict) -> MetricConfig:
    kind = settings["encoder"]
    if settings["taps"]:
        taps = tuple(t.strip() for t in str(settings["taps"]).split(",") if t.strip())
    else:
        taps = default_taps(kind)
    master = settings["seed"]
    spec = EncoderSpec(
        kind=kind,
        taps=taps,
        seed=derive_seed(master, "encoder") if kind == "random_conv" else None,
        weights_path=settings["weights"],
    )
    swd = SwdConfig(
        num_projections=settings["projections"],
        seed=derive_seed(master, "swd"),
        order=settings["order"],
    )
    return MetricConfig(
        encoder=spec,
        mode=settings["mode"],
        swd=swd,
        alpha=settings["alpha"],
        eps_rel=settings["eps_rel"],
        use_temporal_weight=settings["temporal_weight"],
        frame_sample_count=settings["sample_frames"],
        tap_combine=settings["tap_combine"],
        sample_seed=derive_seed(master, "sample"),
    )


def _workers() -> int | None:
    raw = os.environ.get("VCD_NUM_WORKERS")
    if raw is None:
        return None
    count = _to_int("VCD_NUM_WORKERS", raw)
    if count < 1:
        raise ConfigurationError(f"VCD_NUM_WORKERS must be >= 1, got {count}")
    return count


def _frame_paths(video_arg) -> list:
    path = Path(video_arg)
    if path.is_dir():
        paths = sorted(p for p in path.iterdir() if p.suffix.lower() in _FRAME_SUFFIXES)
        if not paths:
            raise FormatError(f"no frame files (*.vcdf, *.ppm, *.pgm) in {path}")
        return paths
    if path.is_file():
        if path.suffix.lower() in _FRAME_SUFFIXES:
            return [path]
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except UnicodeDecodeError:
            raise FormatError(f"manifest {path} is not a text file") from None
        paths = [path.parent / line.strip() for line in lines if line.strip() and not line.strip().startswith("#")]
        if not paths:
            raise FormatError(f"manifest {path} lists no frames")
        return paths
    raise FormatError(f"video path {path} is neither a directory nor a file")


def _load_video(video_arg) -> Video:
    return load_video(_frame_paths(video_arg))


def _external_cond(args, video: Video) -> Frame | None:
    if not getattr(args, "cond", None):
        return None
    cond = load_frame(args.cond)
    first = video.frames[0]
    if cond.channels != first.channels:
        raise ShapeError(
            f"cond has {cond.channels} channels, video frames have {first.channels}"
        )
    if (cond.height, cond.width) != (first.height, first.width):
        cond = resample_bilinear(cond, first.height, first.width)
    return cond


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", ".") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def _report_series(report: VcdReport):
    return [s.index for s in report.frames], [s.total for s in report.frames]


def _write_report(report: VcdReport, out: Path, stem: str, fmt: str, plot: bool) -> None:
    if fmt in ("json", "both"):
        _write(out / f"{stem}.json", report_to_json(report))
    if fmt in ("csv", "both"):
        _write(out / f"{stem}.csv", report_to_csv(report))
    if plot:
        xs, ys = _report_series(report)
        chart = line_chart(
            [(report.variant, xs, ys)],
            title=f"per-frame total ({report.variant})",
            x_label="frame index i",
            y_label="total",
        )
        _write(out / f"{stem}.svg", chart)


def _cmd_score(args) -> int:
    video = _load_video(args.video)
    cond = _external_cond(args, video)
    cfg = _metric_config(_settings_from(args))
    report = vcd_video(video, cfg, "vcd", cond=cond, workers=_workers())
    _write_report(report, _out_dir(args), "report", args.format, args.plot)
    print(f"vcd mean={report.total_mean!r} sum={report.total_sum!r} frames={len(report.frames)}")
    return 0


def _cmd_compare(args) -> int:
    video_a = _load_video(args.video)
    video_b = _load_video(args.video_b)
    cfg = _metric_config(_settings_from(args))
    workers = _workers()
    report_a = vcd_video(video_a, cfg, "vcd", cond=_external_cond(args, video_a), workers=workers)
    report_b = vcd_video(video_b, cfg, "vcd", cond=_external_cond(args, video_b), workers=workers)
    out = _out_dir(args)
    _write_report(report_a, out, "report_a", args.format, plot=False)
    _write_report(report_b, out, "report_b", args.format, plot=False)
    totals_a = {s.index: s.total for s in report_a.frames}
    totals_b = {s.index: s.total for s in report_b.frames}
    shared = sorted(set(totals_a) & set(totals_b))
    payload = {
        "a": {"video": str(args.video), "sum": report_a.total_sum, "mean": report_a.total_mean},
        "b": {"video": str(args.video_b), "sum": report_b.total_sum, "mean": report_b.total_mean},
        "delta_mean": report_b.total_mean - report_a.total_mean,
        "frames": [
            {
                "i": i,
                "total_a": totals_a[i],
                "total_b": totals_b[i],
                "delta": totals_b[i] - totals_a[i],
            }
            for i in shared
        ],
    }
    _write(out / "compare.json", json.dumps(payload, indent=2, allow_nan=False) + "\n")
    if args.plot:
        xa, ya = _report_series(report_a)
        xb, yb = _report_series(report_b)
        chart = line_chart(
            [("a", xa, ya), ("b", xb, yb)],
            title="per-frame total, a vs b",
            x_label="frame index i",
            y_label="total",
        )
        _write(out / "compare.svg", chart)
    print(f"mean a={report_a.total_mean!r} b={report_b.total_mean!r}")
    return 0


def _cmd_ablate(args) -> int:
    video = _load_video(args.video)
    cond = _external_cond(args, video)
    cfg = _metric_config(_settings_from(args))
    workers = _workers()
    out = _out_dir(args)
    series = []
    for variant in VARIANTS:
        report = vcd_video(video, cfg, variant, cond=cond, workers=workers)
        _write_report(report, out, f"report_{variant}", args.format, plot=False)
        series.append((variant, *_report_series(report)))
        print(f"{variant} mean={report.total_mean!r}")
    if args.plot:
        chart = line_chart(
            series,
            title="per-frame total by variant",
            x_label="frame index i",
            y_label="total",
        )
        _write(out / "ablate.svg", chart)
    return 0


def _parse_shift(raw: str) -> tuple:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"--init-shift expects dx,dy, got {raw!r}")
    return _to_int("init-shift dx", parts[0]), _to_int("init-shift dy", parts[1])


def _cmd_optimize_demo(args) -> int:
    settings = _settings_from(args)
    cfg = _metric_config(settings)
    if args.cond:
        cond = load_frame(args.cond)
    else:
        cond = textured_cond(16, 16, 1, seed=7)
    if args.frames < 2:
        raise ConfigurationError(f"--frames must be >= 2, got {args.frames}")
    dx, dy = _parse_shift(args.init_shift)
    init = ParamVideo(tuple(FrameParams(dx=dx, dy=dy) for _ in range(args.frames - 1)))
    trace = optimize(cond, init, args.budget, settings["seed"], cfg)
    out = _out_dir(args)
    _write(out / "trace.json", trace_to_json(trace))
    if args.plot:
        evals = list(range(1, trace.iterations + 1))
        running = np.minimum.accumulate(trace.objectives).tolist()
        chart = line_chart(
            [("evaluation", evals, list(trace.objectives)), ("best so far", evals, running)],
            title="objective vs evaluation",
            x_label="evaluation",
            y_label="objective",
        )
        _write(out / "trace.svg", chart)
    print(
        f"initial={trace.objectives[0]!r} final={trace.best_objective!r} "
        f"evaluations={trace.iterations}"
    )
    return 0


def _cmd_inspect_spectrum(args) -> int:
    frame = load_frame(args.frame)
    cfg = _metric_config(_settings_from(args))
    encoder = build_metric_encoder(cfg.encoder)
    taps = []
    for fmap in encoder.encode(frame):
        spectrum = dft2(fmap)
        taps.append(
            {
                "tap": fmap.tap,
                "amplitude": amplitude_points(spectrum, cfg.mode).points.tolist(),
                "phase": phase_points(spectrum, cfg.mode, cfg.eps_rel).points.tolist(),
            }
        )
    payload = {"frame": str(args.frame), "mode": cfg.mode, "taps": taps}
    _write(_out_dir(args) / "spectrum.json", json.dumps(payload, indent=2, allow_nan=False) + "\n")
    return 0


def _add_metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--encoder", choices=("identity", "random", "vgg"), help="feature encoder")
    p.add_argument("--weights", help="VCDW weights file (vgg encoder)")
    p.add_argument("--taps", help="comma-separated tap names (default: all for the encoder)")
    p.add_argument("--mode", choices=("scalar", "cvec"), help="point-cloud layout")
    p.add_argument("--projections", type=int, help="sliced-distance projection count L")
    p.add_argument("--seed", type=int, help="master seed for all random streams")
    p.add_argument("--order", type=int, choices=(1, 2), help="Wasserstein order p")
    p.add_argument("--alpha", type=float, help="phase-term weight")
    p.add_argument("--no-temporal-weight", action="store_true", help="drop the (N-i+1)/N weight")
    p.add_argument("--sample-frames", type=int, help="evaluate a seeded sample of K frames")
    p.add_argument("--config", help="key=value config file; flags override it")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("--plot", action="store_true", help="also write an SVG chart")
    p.add_argument("--out", default=".", help="output directory (default: current)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcd",
        description="Frequency-domain video-consistency scoring and ablation.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("score", help="score a video against its conditioning image")
    p.add_argument("--video", required=True, help="frame directory or manifest file")
    p.add_argument("--cond", help="conditioning image (default: the video's first frame)")
    _add_metric_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("compare", help="score two videos under one configuration")
    p.add_argument("--video", required=True, help="first video: frame directory or manifest")
    p.add_argument("--video-b", required=True, help="second video: frame directory or manifest")
    p.add_argument("--cond", help="shared conditioning image")
    _add_metric_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("ablate", help="score every metric variant")
    p.add_argument("--video", required=True, help="frame directory or manifest file")
    p.add_argument("--cond", help="conditioning image (default: the video's first frame)")
    _add_metric_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("optimize-demo", help="derivative-free reward optimization demo")
    p.add_argument("--cond", help="conditioning image (default: built-in 16x16 texture)")
    p.add_argument("--frames", type=int, default=4, help="total frame count N (default 4)")
    p.add_argument("--budget", type=int, default=500, help="objective evaluations (default 500)")
    p.add_argument("--init-shift", default="2,2", help="initial dx,dy for every frame")
    _add_metric_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_optimize_demo)

    p = sub.add_parser("inspect-spectrum", help="dump amplitude/phase clouds for one frame")
    p.add_argument("--frame", required=True, help="frame file to transform")
    _add_metric_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_inspect_spectrum)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VcdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
