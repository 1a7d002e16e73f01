import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gpocr.image_core import GrayImage  # noqa: E402
from gpocr.synthetic import bundled_manifest  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_image(rng):
    def make(h, w):
        return GrayImage(rng.integers(0, 256, size=(h, w)))

    return make


@pytest.fixture(scope="session")
def manifest():
    return bundled_manifest()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
