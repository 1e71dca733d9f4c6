"""Bernstein functions of the Laplacian: kernels, square functions and SPDE solvers.

Set ``BERNSTEIN_LP_THREADS`` before import to cap the BLAS/OpenMP thread pools.
"""

import os as _os

_threads = _os.environ.get("BERNSTEIN_LP_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .catalog import BernsteinFunction, LogLattice, catalog_entry, check_scaling_conditions, make  # noqa: E402
from .reports import BoundReport  # noqa: E402
from .spectral import GridField, SpaceTimeField, TorusGrid  # noqa: E402

__all__ = ["BernsteinFunction", "BoundReport", "GridField", "LogLattice", "SpaceTimeField",
           "TorusGrid", "catalog_entry", "check_scaling_conditions", "make", "__version__"]
