"""Line-of-sight availability of buoy-to-shore cellular links in ocean waves."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, RefinementError  # noqa: E402
from .los_engine import LinkGeometry, LosStatistics, run_monte_carlo  # noqa: E402
from .sea_state import AmplitudeConvention, SeaStateParams  # noqa: E402

__all__ = [
    "AmplitudeConvention",
    "ConfigError",
    "DomainError",
    "LinkGeometry",
    "LosStatistics",
    "RefinementError",
    "SeaStateParams",
    "run_monte_carlo",
]
