"""Cone square functions of arbitrary aperture, A_p weights and sparse domination on grids."""
from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
