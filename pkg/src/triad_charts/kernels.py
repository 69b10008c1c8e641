"""Kernel selection: the compiled extension when it imports, else numpy.

Set TRIAD_CHARTS_PURE=1 to force the fallback."""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("TRIAD_CHARTS_PURE", "") in ("", "0"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _c(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype)


def pair_average(x1, y1, x2, y2, kd, ki, impl=None):
    """Per-sample mean of the direct and indirect terms over a product grid.

    x1, y1: (S, N1, 3); x2, y2: (S, N2, 3). Returns (S, 2): columns are
    the averaged -kd/|x1 - x2| and ki y1.y2. Complex inputs select the
    analytic continuation."""
    impl = impl or _impl
    if any(np.iscomplexobj(a) for a in (x1, y1, x2, y2)):
        return impl.pair_average_complex(*(_c(a, complex) for a in (x1, y1, x2, y2)),
                                         float(kd), float(ki))
    return impl.pair_average(*(_c(a, float) for a in (x1, y1, x2, y2)), float(kd), float(ki))


def wh_run(z0, mbar1, mbar2, M1, M2, mu, m0, dt, nsteps, every=1, weights=(1.0,), impl=None):
    impl = impl or _impl
    return impl.wh_run(_c(z0, float), float(mbar1), float(mbar2), float(M1), float(M2),
                       float(mu), float(m0), float(dt), int(nsteps), int(every),
                       _c(weights, float))
