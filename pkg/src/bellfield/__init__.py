"""Bell-operator expectation values for a Gaussian scalar field smeared over
two spherical patches, in flat and de Sitter backgrounds."""

__version__ = "0.1.0"

from .gkmr import CorrelatorSet, bell
from .larsson import LarssonConfig, bell_larsson
from .model import CovarianceMatrix, ReducedA, SceneParams, build_covariance, purity, reduced_a
from .window import IntegralParams, WindowSpec, integral_K, integral_L

__all__ = ["CorrelatorSet", "CovarianceMatrix", "IntegralParams", "LarssonConfig", "ReducedA", "SceneParams",
           "WindowSpec", "bell", "bell_larsson", "build_covariance", "integral_K", "integral_L", "purity",
           "reduced_a"]
