"""Shared fixtures; the calculator modules live at the repository root."""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from chern import VirtualBundle  # noqa: E402


@pytest.fixture
def line_x():
    return VirtualBundle.line("x")


@pytest.fixture
def worked_examples():
    return ROOT / "worked_examples"


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep every test away from the real ~/.torscalc"""
    monkeypatch.setenv("TORSCALC_CONFIG_DIR", str(tmp_path / "config"))
    for name in ("TORSCALC_SEED", "TORSCALC_DEPTH", "TORSCALC_SAMPLES",
                 "TORSCALC_K", "TORSCALC_THEORIES", "TORSCALC_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
