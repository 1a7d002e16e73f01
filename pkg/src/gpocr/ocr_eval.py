"""OCR accuracy benchmark: degrade a corpus, run each upsampling pipeline, score words.

Accuracy for one page is the number of ground-truth words found in the OCR
output (multiset intersection) divided by the number of ground-truth words.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import shlex
import shutil
import string
import subprocess
import tempfile
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .baseline_resample import box_downsample, nearest_upsample
from .image_core import GrayImage, load_image, save_image
from .pipeline import PipelineParams, run_pipeline
from .post_filters import NoiseParams, add_gaussian_noise

log = logging.getLogger(__name__)

PIPELINES = ("gp", "bicubic", "lowres")
METHOD_LABELS = {"gp": "GP", "bicubic": "Bicubic", "lowres": "Low Resolution"}
PUNCT = string.punctuation + "«»“”‘’…–—"


class EngineError(RuntimeError):
    pass


class EngineNotFound(EngineError):
    pass


class EngineTimeout(EngineError):
    pass


class EngineFailure(EngineError):
    pass


class EmptyGroundTruth(ValueError):
    pass


class BenchmarkFailed(RuntimeError):
    """Every page/pipeline combination failed."""


def tokenize(text: str) -> list[str]:
    """Whitespace split, strip surrounding punctuation, keep case."""
    tokens = (t.strip(PUNCT) for t in text.split())
    return [t for t in tokens if t]


@dataclass(frozen=True)
class OcrResult:
    raw_text: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, text: str) -> "OcrResult":
        return cls(text, tuple(tokenize(text)))


def word_accuracy(predicted: OcrResult, truth) -> float:
    truth = list(truth)
    if not truth:
        raise EmptyGroundTruth("ground truth has no tokens")
    matched = sum((Counter(predicted.tokens) & Counter(truth)).values())
    return matched / len(truth)


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    id: str
    image_path: Path
    ground_truth_path: Path

    def truth_tokens(self) -> list[str]:
        return tokenize(self.ground_truth_path.read_text(encoding="utf-8"))


def load_manifest(path) -> list[CorpusEntry]:
    """Parse a manifest of ``image<TAB>transcript`` lines.

    Relative paths resolve against the manifest's directory. Entry ids are the
    image file stems with dots replaced, made unique by suffixing.
    """
    path = Path(path)
    base = path.parent
    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 tab-separated fields")
        img, gt = (base / p.strip() for p in parts)
        for p in (img, gt):
            if not p.is_file():
                raise FileNotFoundError(f"{path}:{lineno}: {p}")
        eid = img.stem.replace(".", "_")
        candidate, k = eid, 1
        while candidate in seen:
            candidate = f"{eid}_{k}"
            k += 1
        seen.add(candidate)
        entries.append(CorpusEntry(candidate, img, gt))
    if not entries:
        raise ValueError(f"{path}: manifest is empty")
    return entries


# ---------------------------------------------------------------------------
# Engines
# ---------------------------------------------------------------------------

class Engine(Protocol):
    def recognize(self, image_path: Path) -> str: ...


@dataclass(frozen=True)
class OcrEngine:
    """External OCR command.

    ``command_template`` must contain ``{input}`` once. The recognised text is
    read from ``{output}`` (exact file path), from ``{output_base}.txt`` (the
    tesseract convention), or from standard output when neither appears.
    """

    command_template: str
    timeout: float = 120.0

    def __post_init__(self):
        tpl = self.command_template
        if tpl.count("{input}") != 1:
            raise ValueError("engine template needs exactly one {input} placeholder")
        n_out = tpl.count("{output}") + tpl.count("{output_base}")
        if n_out > 1:
            raise ValueError("engine template may contain at most one output placeholder")

    @property
    def output_mode(self) -> str:
        if "{output_base}" in self.command_template:
            return "base"
        if "{output}" in self.command_template:
            return "file"
        return "stdout"

    def recognize(self, image_path: Path) -> str:
        with tempfile.TemporaryDirectory(prefix="gpocr-ocr-") as tmp:
            out_base = Path(tmp) / "ocr"
            out_file = out_base.with_suffix(".txt")
            subs = {"{input}": str(image_path), "{output_base}": str(out_base), "{output}": str(out_file)}
            argv = []
            for tok in shlex.split(self.command_template):
                for key, val in subs.items():
                    tok = tok.replace(key, val)
                argv.append(tok)
            if shutil.which(argv[0]) is None:
                raise EngineNotFound(f"OCR engine {argv[0]!r} not found")
            try:
                proc = subprocess.run(argv, capture_output=True, timeout=self.timeout)
            except FileNotFoundError as exc:
                raise EngineNotFound(str(exc)) from exc
            except subprocess.TimeoutExpired as exc:
                raise EngineTimeout(f"{argv[0]} exceeded {self.timeout}s") from exc
            if proc.returncode != 0:
                err = proc.stderr.decode(errors="replace").strip()
                raise EngineFailure(f"{argv[0]} exited with {proc.returncode}: {err[-500:]}")
            if self.output_mode == "stdout":
                return proc.stdout.decode("utf-8", errors="replace")
            if not out_file.is_file():
                raise EngineFailure(f"{argv[0]} produced no output file")
            return out_file.read_text(encoding="utf-8", errors="replace")


def run_ocr(engine: Engine, img) -> OcrResult:
    return OcrResult.from_text(engine.recognize(Path(img)))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    return math.inf if mse == 0 else 10.0 * math.log10(255.0**2 / mse)


def _unit_hash(*parts) -> float:
    digest = hashlib.blake2b("\x1f".join(map(str, parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2.0**64


class PsnrProxyEngine:
    """Deterministic stand-in for an OCR engine.

    The engine knows each page's clean original and transcript. It binarizes
    the submitted image at 128, rescales it to the original's size by pixel
    replication, and measures PSNR against the original. The PSNR maps
    linearly onto a quality ``q`` in [0, 1] between ``psnr_floor`` and
    ``psnr_ceil``. Word ``i`` of the transcript is emitted intact when a fixed
    per-word hash is below ``q`` and garbled (prefixed with ``zq``) otherwise. A higher-PSNR image
    therefore always recovers a superset of the words.

    Images are matched to pages by file name: everything before the first
    dot must be the entry id.
    """

    def __init__(self, corpus: list[CorpusEntry], psnr_floor: float = 8.0, psnr_ceil: float = 20.0):
        self.entries = {e.id: e for e in corpus}
        self.psnr_floor = psnr_floor
        self.psnr_ceil = psnr_ceil
        self._originals: dict[str, GrayImage] = {}

    def _original(self, eid: str) -> GrayImage:
        if eid not in self._originals:
            self._originals[eid] = load_image(self.entries[eid].image_path)
        return self._originals[eid]

    def quality(self, image: GrayImage, eid: str) -> float:
        ref = self._original(eid).pixels
        px = image.pixels
        factor = max(1, round(ref.shape[0] / px.shape[0]))
        if factor > 1:
            px = nearest_upsample(image, factor).pixels
        canvas = np.full(ref.shape, 255, dtype=np.uint8)
        h, w = min(ref.shape[0], px.shape[0]), min(ref.shape[1], px.shape[1])
        canvas[:h, :w] = px[:h, :w]
        binary = np.where(canvas < 128, 0, 255)
        q = (psnr(binary, ref) - self.psnr_floor) / (self.psnr_ceil - self.psnr_floor)
        return float(np.clip(q, 0.0, 1.0))

    def recognize(self, image_path: Path) -> str:
        image_path = Path(image_path)
        eid = image_path.name.split(".", 1)[0]
        if eid not in self.entries:
            raise EngineFailure(f"mock engine has no reference for {image_path.name}")
        q = self.quality(load_image(image_path), eid)
        words = self.entries[eid].truth_tokens()
        out = [w if _unit_hash(eid, i, w) < q else "zq" + w for i, w in enumerate(words)]
        return " ".join(out) + "\n"


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImageScore:
    entry_id: str
    method: str
    accuracy: float
    error: str | None = None


@dataclass(frozen=True)
class MethodSummary:
    average: float
    variance: float
    max: float
    min: float


@dataclass
class AccuracyReport:
    per_image: list[ImageScore]
    methods: tuple[str, ...]
    config: dict = field(default_factory=dict)

    @property
    def summary(self) -> dict[str, MethodSummary]:
        return summarize((s.entry_id, s.method, s.accuracy) for s in self.per_image)

    @property
    def relative_gain(self) -> dict[str, float | None]:
        return relative_gains(self.summary)

    @property
    def errors(self) -> list[ImageScore]:
        return [s for s in self.per_image if s.error]


def summarize(rows) -> dict[str, MethodSummary]:
    """Per-method average, population variance, max and min of accuracies."""
    by_method: dict[str, list[float]] = {}
    for _, method, acc in rows:
        by_method.setdefault(method, []).append(float(acc))
    out = {}
    for method, vals in by_method.items():
        arr = np.asarray(vals)
        out[method] = MethodSummary(float(arr.mean()), float(arr.var()), float(arr.max()), float(arr.min()))
    return out


def relative_gain(avg_gp: float, avg_other: float) -> float | None:
    if avg_other == 0:
        return None
    return (avg_gp - avg_other) / avg_other


def relative_gains(summary: dict[str, MethodSummary]) -> dict[str, float | None]:
    gp = summary.get("gp")
    return {
        m: None if (m == "gp" or gp is None) else relative_gain(gp.average, s.average)
        for m, s in summary.items()
    }


def _fmt(x: float | None) -> str:
    return "N/A" if x is None else repr(float(x))


def emit_report(report: AccuracyReport, out_dir) -> None:
    """Write per_image.csv, summary.csv, accuracy.svg and gain.svg into ``out_dir``."""
    if not report.methods or not report.per_image:
        raise ValueError("report has no methods to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "per_image.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["id", "method", "accuracy"])
        for s in report.per_image:
            wr.writerow([s.entry_id, s.method, _fmt(s.accuracy)])
    summary, gains = report.summary, report.relative_gain
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["method", "average", "variance", "max", "min", "gp_relative_increase"])
        for m in report.methods:
            s = summary[m]
            wr.writerow([m, _fmt(s.average), _fmt(s.variance), _fmt(s.max), _fmt(s.min), _fmt(gains[m])])
    if report.errors:
        with open(out_dir / "errors.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["id", "method", "error"])
            for s in report.errors:
                wr.writerow([s.entry_id, s.method, s.error])
    if report.config:
        (out_dir / "config.txt").write_text(
            "".join(f"{k}={v}\n" for k, v in sorted(report.config.items())), encoding="utf-8")
    from .plots import plot_accuracy, plot_gain

    plot_accuracy(report, out_dir / "accuracy.svg")
    plot_gain(report, out_dir / "gain.svg")


def read_per_image(path) -> list[tuple[str, str, float]]:
    with open(path, newline="") as fh:
        return [(r["id"], r["method"], float(r["accuracy"])) for r in csv.DictReader(fh)]


def format_summary_table(report: AccuracyReport) -> str:
    summary, gains = report.summary, report.relative_gain
    lines = [f"{'':16}{'Average':>10}{'Variance':>10}{'Max':>10}{'Min':>10}  GP Relative Increase"]
    for m in report.methods:
        s, g = summary[m], gains[m]
        gain = "N/A" if g is None else f"{100 * g:.2f}%"
        lines.append(f"{METHOD_LABELS.get(m, m):16}{s.average:10.6f}{s.variance:10.6f}"
                     f"{s.max:10.6f}{s.min:10.6f}  {gain}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------

def entry_seed(seed: int, entry_id: str) -> int:
    """Noise seed for one page, independent of corpus order."""
    digest = hashlib.blake2b(f"{seed}:{entry_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def degrade(img: GrayImage, ratio: int, noise: NoiseParams) -> GrayImage:
    return add_gaussian_noise(box_downsample(img, ratio), noise)


def _score_entry(entry: CorpusEntry, engine: Engine, ratio: int, noise: NoiseParams,
                 pipelines: tuple[str, ...], params: PipelineParams, work_dir: Path) -> list[ImageScore]:
    truth = entry.truth_tokens()
    if not truth:
        raise EmptyGroundTruth(f"{entry.ground_truth_path} has no words")
    low = degrade(load_image(entry.image_path), ratio,
                  NoiseParams(noise.sigma, entry_seed(noise.seed, entry.id)))
    scores = []
    for method in pipelines:
        if method == "lowres":
            img = low
        else:
            img, _ = run_pipeline(low, method, ratio, params)
        path = work_dir / f"{entry.id}.{method}.pgm"
        save_image(img, path)
        try:
            acc = word_accuracy(run_ocr(engine, path), truth)
            scores.append(ImageScore(entry.id, method, acc))
        except EngineError as exc:
            log.warning("%s/%s: %s", entry.id, method, exc)
            scores.append(ImageScore(entry.id, method, 0.0, f"{type(exc).__name__}: {exc}"))
    return scores


def run_benchmark(corpus: list[CorpusEntry], engine: Engine, ratio: int = 4,
                  noise: NoiseParams = NoiseParams(), pipelines=PIPELINES,
                  params: PipelineParams = PipelineParams(), workers: int = 1,
                  work_dir=None) -> AccuracyReport:
    """Degrade every page, run the requested pipelines and score OCR output.

    Engine errors score the page 0 and are recorded; the run fails only when
    every page/pipeline pair errored.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    requested = set(pipelines)
    pipelines = tuple(m for m in PIPELINES if m in requested)
    if requested - set(PIPELINES) or not pipelines:
        raise ValueError(f"pipelines must be a non-empty subset of {PIPELINES}")
    with tempfile.TemporaryDirectory(prefix="gpocr-bench-") as tmp:
        wd = Path(work_dir) if work_dir is not None else Path(tmp)
        wd.mkdir(parents=True, exist_ok=True)

        def job(entry):
            return _score_entry(entry, engine, ratio, noise, pipelines, params, wd)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(job, corpus))
        else:
            results = [job(e) for e in corpus]
    per_image = [s for scores in results for s in scores]
    if all(s.error for s in per_image):
        raise BenchmarkFailed("OCR failed for every image")
    config = {
        "ratio": ratio, "noise_sigma": noise.sigma, "noise_seed": noise.seed,
        "pipelines": ",".join(pipelines),
        "bilateral": params.bilateral, "threshold": params.threshold,
        "near_binary_delta": params.near_binary_delta,
        "near_binary_fraction": params.near_binary_fraction,
        "threshold_mode": params.threshold_mode,
    }
    return AccuracyReport(per_image, pipelines, config)
