"""
Measure, Radon, CDT and normalized R-CDT transforms.

Modules:
  - measures.py: 1-D / 2-D discrete measures, reference grid, CDF and quantiles
  - radon.py: restricted slices, binned sinograms, back projection
  - cdt.py: CDT of slices, R-CDT quantile fields, sliced W2
  - nrcdt.py: normalization, max/mean profiles, perturbation radii
"""

from .cdt import QuantileField, cdt_1d, exact_rcdt, rcdt, sliced_w2
from .measures import (
    DiscreteMeasure1D,
    DiscreteMeasure2D,
    ReferenceMeasure,
    cdf,
    diameter,
    image_to_measure,
    quantile,
    rho_moments,
    uniform_atoms,
)
from .nrcdt import (
    FeatureTag,
    FeatureVector,
    NormalizedField,
    RobustnessBudget,
    max_nrcdt,
    mean_nrcdt,
    min_std,
    normalize_field,
    w2_radius,
    winf_radius,
)
from .radon import AngleGrid, Sinogram, affine_pushforward_slice, back_project, restricted_slice, sinogram

__all__ = [
    "AngleGrid",
    "DiscreteMeasure1D",
    "DiscreteMeasure2D",
    "FeatureTag",
    "FeatureVector",
    "NormalizedField",
    "QuantileField",
    "ReferenceMeasure",
    "RobustnessBudget",
    "Sinogram",
    "affine_pushforward_slice",
    "back_project",
    "cdf",
    "cdt_1d",
    "diameter",
    "exact_rcdt",
    "image_to_measure",
    "max_nrcdt",
    "mean_nrcdt",
    "min_std",
    "normalize_field",
    "quantile",
    "rcdt",
    "restricted_slice",
    "rho_moments",
    "sinogram",
    "sliced_w2",
    "uniform_atoms",
    "w2_radius",
    "winf_radius",
]
