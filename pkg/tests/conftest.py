"""Shared fixtures: golden constants and calibrated descriptors."""

import pathlib

import pytest

from fpl import space as sp
from fpl import spectral as spec

_GOLDEN_PATH = pathlib.Path(__file__).parent / "golden_constants.txt"


def _load_golden() -> dict[str, float]:
    out = {}
    for line in _GOLDEN_PATH.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, _, value = line.partition("=")
        out[name.strip()] = float(value)
    return out


@pytest.fixture(scope="session")
def golden() -> dict[str, float]:
    return _load_golden()


@pytest.fixture(scope="session")
def h3():
    """Calibrated 3-d descriptor (module-level cache makes this cheap)."""
    return spec.calibrate(sp.preset("H3"))


@pytest.fixture(scope="session")
def h2():
    return spec.calibrate(sp.preset("H2"))
