from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
MUMBAI = ROOT / "fixtures" / "mumbai"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write


@pytest.fixture
def tiny_sample():
    from popsynth.ingest import load_seed_sample

    return load_seed_sample(DATA / "tiny_seed.csv")


@pytest.fixture(scope="session")
def mumbai_out(tmp_path_factory):
    """One CLI generate run on the district fixture, shared across tests."""
    from popsynth.cli import main

    out = tmp_path_factory.mktemp("mumbai")
    assert main(["-q", "generate", "--config", str(MUMBAI / "config.json"), "--out", str(out)]) == 0
    return out


ACCEPTANCE = []  # (criterion, passed, detail) filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
