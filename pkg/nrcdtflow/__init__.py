"""
nrcdtflow: affine-invariant features from the normalized Radon cumulative
distribution transform, with synthetic datasets and classification runs.

Packages:
  - transforms: measures, Radon transform, R-CDT and its normalized aggregates
  - datagen: template glyphs, affine / non-affine warps, salt noise, IDX files
  - classify: feature registry, nearest template, k-NN, linear probe
  - experiments: YAML configs, batch runner, self-test suites
  - io: CSV, PGM and binary dump codecs
"""

from .exceptions import NrcdtFlowError
from .transforms.nrcdt import DegenerateDirection, FeatureTag

__version__ = "0.1.0"

__all__ = ["DegenerateDirection", "FeatureTag", "NrcdtFlowError", "__version__"]
