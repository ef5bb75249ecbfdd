"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, settings

from noiseflow import plaquette

# Derandomized so repeated runs explore the same examples.
settings.register_profile(
    "noiseflow",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("noiseflow")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fig3_model():
    """Equal couplings G = 0.1, Phi = pi, m1 = m2 = 1e3."""
    return plaquette(0.1, phase=math.pi)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
