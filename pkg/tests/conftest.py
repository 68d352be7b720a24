import numpy as np
import pytest

from buoylink.sea_state import SeaStateParams, SpectrumGrid, WaveRealization

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_realization(omegas, wavenumbers, amplitudes, phases, h_s=1.0, t_p=10.0):
    """Hand-built realization that bypasses the spectrum (for analytic surfaces)."""
    omegas = np.asarray(omegas, dtype=float)
    grid = SpectrumGrid(
        omegas=omegas,
        wavenumbers=np.asarray(wavenumbers, dtype=float),
        expected_amplitudes=np.zeros_like(omegas),
        densities=np.zeros_like(omegas),
        delta_omega=1.0,
        params=SeaStateParams(h_s, t_p),
    )
    return WaveRealization(grid, np.asarray(amplitudes, float), np.asarray(phases, float), seed=0)


@pytest.fixture
def monochrome():
    """Frozen wave 0.5 cos(2 pi x / 100 + pi): trough at the buoy, crest at x = 50 m."""
    return make_realization([1.0], [2 * np.pi / 100], [0.5], [np.pi])
