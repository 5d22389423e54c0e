"""
Runtime defaults

Values are read from the environment once at import time. A `.env` file in the
working directory is honoured (python-dotenv), existing variables win.

Environment variables:
- NRCDT_THREADS: worker count for generation / feature extraction (default 1)
- NRCDT_MNIST_DIR: directory holding MNIST-style IDX files (default data/mnist)
- NRCDT_AFFINE_TOLERANCE: sup-norm tolerance of affine-invariance checks (default 0.15)
- NRCDT_OUTPUT_DIR: default output directory for the CLI (default results)
"""

import os

from dotenv import load_dotenv

load_dotenv(override=False)

THREADS = max(1, int(os.getenv("NRCDT_THREADS", "1")))
MNIST_DIR = os.getenv("NRCDT_MNIST_DIR", "data/mnist")
AFFINE_TOLERANCE = float(os.getenv("NRCDT_AFFINE_TOLERANCE", "0.15"))
OUTPUT_DIR = os.getenv("NRCDT_OUTPUT_DIR", "results")

# Discretization defaults for academic datasets (N=256) and IDX-derived runs.
DEFAULT_ANGLES = 128
DEFAULT_RADII = 850
DEFAULT_POINTS = 64
DEFAULT_IMAGE_SIZE = 256
IDX_RADII = 300
IDX_CANVAS = 128
