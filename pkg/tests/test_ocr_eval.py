import shlex
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gpocr.image_core import GrayImage, save_image
from gpocr.ocr_eval import (
    AccuracyReport,
    BenchmarkFailed,
    EmptyGroundTruth,
    EngineFailure,
    EngineNotFound,
    EngineTimeout,
    ImageScore,
    OcrEngine,
    OcrResult,
    PsnrProxyEngine,
    emit_report,
    entry_seed,
    format_summary_table,
    load_manifest,
    read_per_image,
    relative_gain,
    run_benchmark,
    run_ocr,
    summarize,
    tokenize,
    word_accuracy,
)
from gpocr.post_filters import NoiseParams

PY = shlex.quote(sys.executable)


def py_engine(code, tail="{input}", **kw):
    return OcrEngine(f"{PY} -c {shlex.quote(code)} {tail}", **kw)


class EchoTruth:
    """Engine that returns the ground truth of whichever page it is shown."""

    def __init__(self, corpus):
        self.truth = {e.id: e.ground_truth_path.read_text(encoding="utf-8") for e in corpus}

    def recognize(self, image_path):
        return self.truth[Path(image_path).name.split(".")[0]]


class AlwaysFails:
    def recognize(self, image_path):
        raise EngineFailure("boom")


@pytest.fixture
def blank(tmp_path):
    p = tmp_path / "x.pgm"
    save_image(GrayImage.constant(4, 4, 255), p)
    return p


@pytest.fixture(scope="module")
def corpus():
    from gpocr.synthetic import bundled_manifest

    return load_manifest(bundled_manifest())


class TestAccuracy:
    def test_tokenize(self):
        assert tokenize("  Hello, world!\n(foo) -- bar... ") == ["Hello", "world", "foo", "bar"]
        assert tokenize("«quoted» “text”") == ["quoted", "text"]

    def test_exact_match(self):
        assert word_accuracy(OcrResult.from_text("the cat sat"), ["the", "cat", "sat"]) == 1.0

    def test_multiset(self):
        assert word_accuracy(OcrResult.from_text("b b x"), ["a", "b", "b", "c"]) == 0.5

    def test_duplicates_capped(self):
        assert word_accuracy(OcrResult.from_text("a a a a"), ["a", "b"]) == 0.5

    def test_empty_prediction(self):
        assert word_accuracy(OcrResult.from_text(""), ["a"]) == 0.0

    def test_empty_truth(self):
        with pytest.raises(EmptyGroundTruth):
            word_accuracy(OcrResult.from_text("a"), [])

    @given(st.lists(st.sampled_from("abcde"), min_size=1), st.lists(st.sampled_from("abcxyz")))
    def test_bounds(self, truth, pred):
        acc = word_accuracy(OcrResult.from_text(" ".join(pred)), truth)
        assert 0.0 <= acc <= 1.0


class TestEngine:
    def test_stdout(self, blank):
        eng = py_engine("print('hello world')")
        assert eng.output_mode == "stdout"
        assert run_ocr(eng, blank).tokens == ("hello", "world")

    def test_output_base(self, blank):
        code = "import sys; open(sys.argv[2] + '.txt', 'w').write('from base')"
        eng = py_engine(code, "{input} {output_base}")
        assert eng.recognize(blank) == "from base"

    def test_output_file(self, blank):
        code = "import sys; open(sys.argv[2], 'w').write('exact file')"
        assert py_engine(code, "{input} {output}").recognize(blank) == "exact file"

    def test_not_found(self, blank):
        with pytest.raises(EngineNotFound):
            OcrEngine("definitely-not-an-ocr-binary-xyz {input}").recognize(blank)

    def test_timeout(self, blank):
        with pytest.raises(EngineTimeout):
            py_engine("import time; time.sleep(5)", timeout=0.001).recognize(blank)

    def test_nonzero_exit(self, blank):
        with pytest.raises(EngineFailure, match="exited with 3"):
            py_engine("import sys; sys.exit(3)").recognize(blank)

    def test_missing_output_file(self, blank):
        with pytest.raises(EngineFailure, match="no output"):
            py_engine("pass", "{input} {output}").recognize(blank)

    @pytest.mark.parametrize("tpl", ["tesseract", "t {input} {input}", "t {input} {output} {output_base}"])
    def test_template_validated(self, tpl):
        with pytest.raises(ValueError):
            OcrEngine(tpl)


class TestManifest:
    def test_bundled(self, corpus):
        assert len(corpus) >= 10
        assert len({e.id for e in corpus}) == len(corpus)
        assert all(e.truth_tokens() for e in corpus)

    def test_relative_paths_and_ids(self, tmp_path):
        (tmp_path / "d").mkdir()
        for name in ("a.b.png", "a.b.txt", "d/a_b.png", "d/a_b.txt"):
            (tmp_path / name).write_text("x")
        m = tmp_path / "m.tsv"
        m.write_text("# comment\na.b.png\ta.b.txt\n\nd/a_b.png\td/a_b.txt\n")
        entries = load_manifest(m)
        assert [e.id for e in entries] == ["a_b", "a_b_1"]
        assert entries[1].image_path == tmp_path / "d" / "a_b.png"

    def test_missing_file(self, tmp_path):
        m = tmp_path / "m.tsv"
        m.write_text("nope.png\tnope.txt\n")
        with pytest.raises(FileNotFoundError):
            load_manifest(m)

    def test_bad_line(self, tmp_path):
        m = tmp_path / "m.tsv"
        m.write_text("only-one-field\n")
        with pytest.raises(ValueError):
            load_manifest(m)


class TestStatistics:
    def test_relative_gain(self):
        assert relative_gain(0.6, 0.5) == pytest.approx(0.2)
        assert relative_gain(0.5, 0.0) is None

    def test_summarize_population_variance(self):
        s = summarize([("a", "gp", 0.2), ("b", "gp", 0.4)])["gp"]
        assert (s.average, s.max, s.min) == pytest.approx((0.3, 0.4, 0.2))
        assert s.variance == pytest.approx(0.01)

    def test_single_method_report(self, tmp_path):
        report = AccuracyReport([ImageScore("p", "bicubic", 0.5)], ("bicubic",))
        emit_report(report, tmp_path)
        rows = (tmp_path / "summary.csv").read_text().splitlines()
        assert rows[1].endswith(",N/A")
        assert "N/A" in format_summary_table(report)
        assert (tmp_path / "accuracy.svg").is_file() and (tmp_path / "gain.svg").is_file()

    def test_empty_report_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(AccuracyReport([], ()), tmp_path)

    def test_entry_seed_independent_of_order(self):
        assert entry_seed(0, "page00") == entry_seed(0, "page00")
        assert entry_seed(0, "page00") != entry_seed(1, "page00")
        assert entry_seed(0, "page00") != entry_seed(0, "page01")


class TestBenchmark:
    def test_echo_truth(self, corpus, tmp_path):
        report = run_benchmark(corpus[:3], EchoTruth(corpus), noise=NoiseParams(10, 0))
        assert all(s.accuracy == 1.0 for s in report.per_image)
        assert report.relative_gain["bicubic"] == 0.0 and report.relative_gain["lowres"] == 0.0
        emit_report(report, tmp_path)
        recomputed = summarize(read_per_image(tmp_path / "per_image.csv"))
        assert recomputed["gp"].average == pytest.approx(1.0, abs=1e-9)
        assert "ratio=4" in (tmp_path / "config.txt").read_text()

    @pytest.mark.parametrize("bad", [(), ("gp", "wavelet")])
    def test_pipelines_validated(self, corpus, bad):
        with pytest.raises(ValueError):
            run_benchmark(corpus[:1], EchoTruth(corpus), pipelines=bad)

    def test_subset_order(self, corpus):
        report = run_benchmark(corpus[:1], EchoTruth(corpus), pipelines=("lowres", "gp"))
        assert report.methods == ("gp", "lowres")

    def test_all_fail(self, corpus):
        with pytest.raises(BenchmarkFailed):
            run_benchmark(corpus[:2], AlwaysFails(), pipelines=("lowres",))

    def test_partial_failure_recorded(self, corpus, tmp_path):
        class FailsOnGp(EchoTruth):
            def recognize(self, image_path):
                if ".gp." in Path(image_path).name:
                    raise EngineTimeout("slow")
                return super().recognize(image_path)

        report = run_benchmark(corpus[:2], FailsOnGp(corpus), pipelines=("gp", "lowres"))
        assert {s.method for s in report.errors} == {"gp"}
        assert report.summary["gp"].average == 0.0
        emit_report(report, tmp_path)
        assert "EngineTimeout" in (tmp_path / "errors.csv").read_text()

    def test_deterministic_across_workers(self, corpus, tmp_path):
        engine = PsnrProxyEngine(corpus)
        outs = []
        for workers in (1, 4):
            report = run_benchmark(corpus[:4], engine, noise=NoiseParams(10, 3), workers=workers)
            emit_report(report, tmp_path / str(workers))
            outs.append((tmp_path / str(workers) / "per_image.csv").read_bytes())
        assert outs[0] == outs[1]


class TestMockEngine:
    def test_clean_page_is_read_back(self, corpus):
        engine = PsnrProxyEngine(corpus)
        e = corpus[0]
        text = engine.recognize(e.image_path)
        assert word_accuracy(OcrResult.from_text(text), e.truth_tokens()) == 1.0

    def test_quality_increases_with_fidelity(self, corpus):
        from gpocr.image_core import load_image

        engine = PsnrProxyEngine(corpus)
        e = corpus[0]
        clean = load_image(e.image_path)
        noisy = GrayImage(255 - clean.pixels)
        assert engine.quality(clean, e.id) > engine.quality(noisy, e.id)

    def test_unknown_page(self, corpus, tmp_path):
        p = tmp_path / "stranger.pgm"
        save_image(GrayImage.constant(3, 3, 0), p)
        with pytest.raises(EngineFailure):
            PsnrProxyEngine(corpus).recognize(p)

    def test_as_subprocess(self, corpus, manifest, tmp_path):
        e = corpus[1]
        from gpocr.image_core import load_image

        p = tmp_path / f"{e.id}.gp.pgm"
        save_image(load_image(e.image_path), p)
        tpl = f"{PY} -m gpocr.mock_engine --manifest {shlex.quote(str(manifest))} {{input}} {{output}}"
        text = OcrEngine(tpl).recognize(p)
        assert text == PsnrProxyEngine(corpus).recognize(p)
        assert np.isclose(word_accuracy(OcrResult.from_text(text), e.truth_tokens()), 1.0)
