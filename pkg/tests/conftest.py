"""Shared fixtures: small panels with known break structure."""
import numpy as np
import pytest

from panelbreak import PanelData, detect_change_point


@pytest.fixture
def step_panel():
    """Piecewise-constant 20 x 2 panel with a clean break after row 10."""
    values = np.zeros((20, 2))
    values[10:] += [3.0, -2.0]
    return PanelData(values)


@pytest.fixture
def noisy_break_panel():
    rng = np.random.default_rng(1723)
    values = 0.5 * rng.standard_normal((60, 3))
    values[30:] += [2.0, 2.0, -2.0]
    return PanelData(values)


@pytest.fixture
def noisy_fit(noisy_break_panel):
    return detect_change_point(noisy_break_panel, trim=0.05)
