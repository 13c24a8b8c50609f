"""Kernel contrastive and autoencoder representations.

All matrices hold one sample per column (d x n).
"""

from ._core import *  # noqa: F401,F403
from ._core import Error, KernelSpec, run_experiment  # noqa: F401

__version__ = "0.1.0"
