from pathlib import Path

import numpy as np
import pytest

from ringsqueeze import pipeline
from ringsqueeze.model import ProcessToggles, baseline_config

ROOT = Path(__file__).resolve().parents[1]
BASELINE_TOML = ROOT / "configs" / "baseline.toml"
MHZ = 2 * np.pi * 1e6


@pytest.fixture(scope="session")
def cfg():
    return baseline_config()


@pytest.fixture(scope="session")
def op15(cfg):
    """All processes on, 15 dBm, both pumps on the hot resonances."""
    return pipeline.operating_point(cfg)


@pytest.fixture(scope="session")
def dp_only():
    return ProcessToggles.parse("spm+xpm+dp")
