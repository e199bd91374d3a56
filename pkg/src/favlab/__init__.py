"""favlab: quantitative projection geometry of planar self-similar sets.

Exact interval unions, Favard-length quadrature, radial visibility,
delta-discretized incidence counts, set-class certifiers, and the
experiment CLI.
"""

from ._kernels import NUMBA_ENABLED

__version__ = "0.1.0"

__all__ = ["NUMBA_ENABLED", "__version__"]
