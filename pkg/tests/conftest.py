import numpy as np
import pytest

from overlay_crn.harness.presets import CAPTIONS
from overlay_crn.harness.scenario import build_params


def make_params(base: str = "fig3", **overrides):
    """SystemParams from a preset's caption values plus overrides (P_T_dB defaults to 10)."""
    flat = {"P_T_dB": 10.0, **CAPTIONS[base]}
    flat.update(overrides)
    return build_params(flat)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance verdicts, printed as one line per criterion at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
