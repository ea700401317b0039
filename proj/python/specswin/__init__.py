"""Band sequences, cascade planning, quality metrics and spectral indices for hyperspectral reconstruction."""

from ._core import *  # noqa: F401,F403
