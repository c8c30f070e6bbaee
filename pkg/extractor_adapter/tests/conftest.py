"""Shared fixtures: seeded image directories and the acceptance scorecard."""

import numpy as np
import pytest
from PIL import Image

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance scorecard")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def write_image(path, seed: int, size=(40, 56), mode: str = "RGB") -> None:
    g = np.random.default_rng(seed)
    h, w = size
    if mode == "L":
        array = g.integers(0, 256, size=(h, w), dtype=np.uint8)
    elif mode == "RGBA":
        array = g.integers(0, 256, size=(h, w, 4), dtype=np.uint8)
    else:
        array = g.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    Image.fromarray(array, mode).save(path)


@pytest.fixture
def image_dir(tmp_path):
    """A directory factory: make(count) -> path with seeded PNG files."""

    def make(count: int, prefix: str = "img"):
        directory = tmp_path / f"{prefix}_{count}"
        directory.mkdir()
        for i in range(count):
            write_image(directory / f"{prefix}_{i:02d}.png", seed=i)
        return directory

    return make
