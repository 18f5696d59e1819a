"""Locate 2-D Helmholtz sources by direct sampling, then refine them with pCN-MCMC."""

from .bayes import PcnConfig, PosteriorSummary, run_chain, summarize
from .dsm import SamplingGrid, find_peaks, indicator
from .errors import ConfigError, DomainError, HelmsourceError, LayoutError, NumericalError, SingularityError
from .experiment import ExperimentConfig, load_bundled, load_config, run_pipeline
from .forward import ForwardOperator, triangulate_square
from .measure import MeasurementGeometry, MeasurementSet, add_noise, aperture_geometry, synthesize, wavenumber_grid
from .sources import (
    ParameterLayout,
    Rectangle,
    SourceConfiguration,
    layout_for,
    make_gaussian_config,
    make_point_config,
    pack,
    unpack,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "ExperimentConfig", "ForwardOperator", "HelmsourceError", "LayoutError",
    "MeasurementGeometry", "MeasurementSet", "NumericalError", "ParameterLayout", "PcnConfig", "PosteriorSummary",
    "Rectangle", "SamplingGrid", "SingularityError", "SourceConfiguration", "add_noise", "aperture_geometry",
    "find_peaks", "indicator", "layout_for", "load_bundled", "load_config", "make_gaussian_config",
    "make_point_config", "pack", "run_chain", "run_pipeline", "summarize", "synthesize", "triangulate_square",
    "unpack", "wavenumber_grid",
]
