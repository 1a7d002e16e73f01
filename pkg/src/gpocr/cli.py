"""Command-line interface: ``gpocr {upsample,pipeline,degrade,eval,demo1d}``.

Option values are resolved as command-line flag, then ``--config`` file
(``key=value`` lines, keys named like the long options), then built-in
default.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .baseline_resample import ImageTooSmall
from .gp_kernel import KernelConfig, NotPositiveDefinite, default_length_scale, demo_1d_fit, precompute_weights
from .image_core import MalformedImage, load_image, save_image
from .ocr_eval import (
    PIPELINES,
    BenchmarkFailed,
    OcrEngine,
    PsnrProxyEngine,
    degrade,
    emit_report,
    format_summary_table,
    load_manifest,
    run_benchmark,
)
from .pipeline import METHODS, PipelineParams, run_pipeline, upsample
from .post_filters import BilateralParams, NoiseParams, ThresholdParams

ENGINE_ENV = "GPOCR_ENGINE"
DEFAULT_ENGINE = "tesseract {input} {output_base}"

log = logging.getLogger("gpocr")


def ratio_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratio {text!r}") from None
    if not 2 <= value <= 8:
        raise argparse.ArgumentTypeError(f"ratio must be in [2, 8], got {value}")
    return value


def pipelines_arg(text: str) -> tuple[str, ...]:
    names = tuple(s.strip().lower() for s in text.split(",") if s.strip())
    bad = [n for n in names if n not in PIPELINES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"pipelines must be a comma list drawn from {','.join(PIPELINES)}")
    return names


def read_config(path) -> dict[str, str]:
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _add_filter_options(p):
    g = p.add_argument_group("enhancement filters")
    g.add_argument("--bilateral-radius", type=int, default=BilateralParams.radius)
    g.add_argument("--sigma-space", type=float, default=BilateralParams.sigma_space)
    g.add_argument("--sigma-intensity", type=float, default=BilateralParams.sigma_intensity)
    g.add_argument("--block-radius", type=int, default=ThresholdParams.block_radius,
                   help="adaptive threshold half-window; Gaussian sigma is half of it")
    g.add_argument("--offset-c", type=float, default=ThresholdParams.offset_c,
                   help="subtracted from the local Gaussian mean")
    g.add_argument("--near-binary-delta", type=int, default=20)
    g.add_argument("--near-binary-fraction", type=float, default=0.9)
    mode = g.add_mutually_exclusive_group()
    mode.add_argument("--force-threshold", dest="threshold_mode", action="store_const", const="force",
                      help="threshold even when the filtered image is near-binary")
    mode.add_argument("--no-threshold", dest="threshold_mode", action="store_const", const="off",
                      help="never threshold")
    p.set_defaults(threshold_mode="auto")


def _pipeline_params(args) -> PipelineParams:
    return PipelineParams(
        bilateral=BilateralParams(args.bilateral_radius, args.sigma_space, args.sigma_intensity),
        threshold=ThresholdParams(args.block_radius, args.offset_c),
        near_binary_delta=args.near_binary_delta,
        near_binary_fraction=args.near_binary_fraction,
        threshold_mode=args.threshold_mode,
    )


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="gpocr", description="GP document-image upsampling for OCR",
                                     formatter_class=fmt)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", type=Path, help="key=value file supplying option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("upsample", help="upsample one image", formatter_class=fmt)
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--method", choices=METHODS, default="gp")
    p.add_argument("--ratio", type=ratio_arg, default=4)
    p.add_argument("--ell", type=float, default=None,
                   help="GP length scale in low-res pixels (default: 20 min(1/h,1/w) in pixel units)")
    p.set_defaults(func=cmd_upsample)

    p = sub.add_parser("pipeline", help="upsample, bilateral filter, adaptive threshold", formatter_class=fmt)
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--method", choices=METHODS, default="gp")
    p.add_argument("--ratio", type=ratio_arg, default=4)
    p.add_argument("--ell", type=float, default=None)
    _add_filter_options(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("degrade", help="box-downsample and add Gaussian noise", formatter_class=fmt)
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--ratio", type=int, default=4)
    p.add_argument("--noise-sigma", type=float, default=NoiseParams.sigma)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("eval", help="OCR accuracy benchmark over a corpus", formatter_class=fmt)
    p.add_argument("--manifest", type=Path, required=True,
                   help="tab-separated image and transcript paths, one page per line")
    p.add_argument("--out", type=Path, required=True, help="report directory")
    p.add_argument("--engine", default=os.environ.get(ENGINE_ENV, DEFAULT_ENGINE),
                   help=f"OCR command template with {{input}} and {{output}}/{{output_base}} "
                        f"placeholders (env {ENGINE_ENV})")
    p.add_argument("--mock-engine", action="store_true",
                   help="use the deterministic PSNR-proxy engine instead of an external command")
    p.add_argument("--timeout", type=float, default=120.0, help="seconds per OCR call")
    p.add_argument("--ratio", type=ratio_arg, default=4)
    p.add_argument("--noise-sigma", type=float, default=NoiseParams.sigma)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pipelines", type=pipelines_arg, default=PIPELINES,
                   help="comma list of gp,bicubic,lowres")
    p.add_argument("--workers", type=int, default=1, help="pages processed concurrently")
    _add_filter_options(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo1d", help="1-D SE vs Matérn-3/2 regression demo", formatter_class=fmt)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("demo1d.csv"), help="CSV path; an SVG is written alongside")
    p.set_defaults(func=cmd_demo1d)
    return parser


def cmd_upsample(args) -> int:
    img = load_image(args.input)
    if args.method == "gp":
        ell = args.ell if args.ell is not None else default_length_scale(img.height, img.width)
        weights = precompute_weights(args.ratio, KernelConfig(ell))
        print(f"ell={ell:g} jitter_used={weights.jitter_used:g}", file=sys.stderr)
        out = upsample(img, "gp", args.ratio, ell)
    else:
        out = upsample(img, args.method, args.ratio)
    save_image(out, args.output)
    return 0


def cmd_pipeline(args) -> int:
    img = load_image(args.input)
    out, stages = run_pipeline(img, args.method, args.ratio, _pipeline_params(args), args.ell)
    save_image(out, args.output)
    for line in stages:
        print(line, file=sys.stderr)
    return 0


def cmd_degrade(args) -> int:
    img = load_image(args.input)
    save_image(degrade(img, args.ratio, NoiseParams(args.noise_sigma, args.seed)), args.output)
    return 0


def cmd_eval(args) -> int:
    corpus = load_manifest(args.manifest)
    engine = PsnrProxyEngine(corpus) if args.mock_engine else OcrEngine(args.engine, args.timeout)
    report = run_benchmark(corpus, engine, args.ratio, NoiseParams(args.noise_sigma, args.seed),
                           args.pipelines, _pipeline_params(args), workers=args.workers)
    report.config.update({
        "manifest": args.manifest, "engine": "mock-psnr" if args.mock_engine else args.engine,
        "workers": args.workers,
    })
    emit_report(report, args.out)
    print(format_summary_table(report))
    for s in report.errors:
        print(f"warning: {s.entry_id}/{s.method}: {s.error}", file=sys.stderr)
    return 0


def cmd_demo1d(args) -> int:
    fit = demo_1d_fit(args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(fit.columns())
        for row in fit.rows():
            cells = ["" if v != v else repr(float(v)) for v in row]
            cells[1] = str(int(row[1]))
            wr.writerow(cells)
    from .plots import plot_demo

    plot_demo(fit, args.out.with_suffix(".svg"))
    print(f"total variation: se={fit.grid_total_variation('se'):.6f} "
          f"m32={fit.grid_total_variation('m32'):.6f}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre, _ = parser.parse_known_args(argv) if any(a.startswith("--config") for a in argv) else (None, None)
    if pre is not None and pre.config is not None:
        try:
            cfg = read_config(pre.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                known = {a.dest: a for a in sp._actions}
                sp.set_defaults(**{
                    k: (known[k].type(v) if known[k].type else v)
                    for k, v in cfg.items() if k in known
                })
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FileNotFoundError, MalformedImage, ImageTooSmall, NotPositiveDefinite,
            BenchmarkFailed, ValueError, OSError) as exc:
        print(f"gpocr {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
