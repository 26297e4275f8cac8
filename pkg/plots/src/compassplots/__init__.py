"""Figure rendering for compass-code simulation CSVs."""

from .render import (
    PlotSpec,
    RenderError,
    fit_through_origin,
    load_csv,
    render_crossing,
    render_density_scaling,
    render_rate_comparison,
)

__version__ = "0.1.0"

__all__ = [
    "PlotSpec",
    "RenderError",
    "fit_through_origin",
    "load_csv",
    "render_crossing",
    "render_density_scaling",
    "render_rate_comparison",
]
