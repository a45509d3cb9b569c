"""Hot loops of transductive KNN scoring.

Two interchangeable backends: numba-compiled loops (default when numba
imports) and a vectorised numpy version.  Set ``CPEFF_DISABLE_NUMBA=1``
to force the numpy one.
"""

import os

from . import _numpy

BACKEND = "numpy"
count_pvalues = _numpy.count_pvalues
ratio_pvalues = _numpy.ratio_pvalues

if os.environ.get("CPEFF_DISABLE_NUMBA", "") not in ("1", "true", "yes"):
    try:
        from . import _numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass
    else:
        BACKEND = "numba"
        count_pvalues = _numba.count_pvalues
        ratio_pvalues = _numba.ratio_pvalues

__all__ = ["BACKEND", "count_pvalues", "ratio_pvalues"]
