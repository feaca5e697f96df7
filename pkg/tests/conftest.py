import os
from pathlib import Path

import numpy as np
import pytest

from masr.imgcore import read_pgm

# collected by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def synthetic(name: str, size: int = 32) -> np.ndarray:
    y, x = np.mgrid[0:size, 0:size]
    if name == "constant":
        return np.full((size, size), 137.0)
    if name == "ramp":
        return np.round(x * 255.0 / (size - 1))
    if name == "checker":
        return np.where(((y // 4) + (x // 4)) % 2 == 0, 40.0, 210.0)
    if name == "step":
        return np.where(x < size // 2, 30.0, 220.0)
    if name == "noise":
        return np.random.default_rng(7).integers(0, 256, (size, size)).astype(float)
    raise KeyError(name)


@pytest.fixture(params=["constant", "ramp", "checker", "step", "noise"])
def fixture_image(request):
    return synthetic(request.param)


def _gray(rgb):
    from skimage.color import rgb2gray

    return np.round(rgb2gray(rgb) * 255.0)


def desk_corpus():
    """Natural images bundled with scikit-image, plus PGMs from $MASR_CORPUS."""
    import skimage.data as data

    corpus = [
        ("astronaut", _gray(data.astronaut())),
        ("brick", data.brick().astype(float)),
        ("camera", data.camera().astype(float)),
        ("chelsea", _gray(data.chelsea())),
        ("coffee", _gray(data.coffee())),
        ("grass", data.grass().astype(float)),
        ("gravel", data.gravel().astype(float)),
        ("moon", data.moon().astype(float)),
        ("rocket", _gray(data.rocket())),
    ]
    extra = os.environ.get("MASR_CORPUS")
    if extra:
        corpus += [(f"user-{p.stem}", read_pgm(p)) for p in sorted(Path(extra).glob("*.pgm"))]
    return corpus
