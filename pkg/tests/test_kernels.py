import os
import subprocess
import sys

import numpy as np
import pytest

from triad_charts import _kernels_py, kernels
from triad_charts.dynamics import integrate
from triad_charts.kepler import CartesianState
from triad_charts.jrd import jrd_to_cartesian, sample_jrd

cython = pytest.importorskip("triad_charts._kernels")


def tables(rng, S=5, N1=7, N2=9, cplx=False):
    def arr(n):
        a = rng.normal(size=(S, n, 3))
        return a + 1e-2j * rng.normal(size=a.shape) if cplx else a
    x1, y1 = arr(N1), arr(N1)
    x2, y2 = 5 + arr(N2), arr(N2)
    return x1, y1, x2, y2


@pytest.mark.parametrize("cplx", [False, True])
def test_pair_average_backends_agree(cplx):
    t = tables(np.random.default_rng(1), cplx=cplx)
    a = kernels.pair_average(*t, 0.3, 0.7, impl=cython)
    b = kernels.pair_average(*t, 0.3, 0.7, impl=_kernels_py)
    assert np.iscomplexobj(a) == cplx
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


def test_pair_average_brute_force():
    x1, y1, x2, y2 = tables(np.random.default_rng(2), S=1, N1=3, N2=4)
    d = [-0.3 / np.linalg.norm(x1[0, i] - x2[0, j]) for i in range(3) for j in range(4)]
    k = [0.7 * y1[0, i] @ y2[0, j] for i in range(3) for j in range(4)]
    np.testing.assert_allclose(kernels.pair_average(x1, y1, x2, y2, 0.3, 0.7)[0],
                               [np.mean(d), np.mean(k)], rtol=1e-13)


@pytest.mark.parametrize("weights", [(1.0,), (1.35, -1.7, 1.35)])
def test_wh_backends_agree(masses, weights):
    z0 = jrd_to_cartesian(sample_jrd(1, np.random.default_rng(3)), masses).as_array()[0]
    args = (z0, masses.mbar1, masses.mbar2, masses.M1, masses.M2, masses.mu, masses.m0,
            0.01, 400, 7, weights)
    a, sa = kernels.wh_run(*args, impl=cython)
    b, sb = kernels.wh_run(*args, impl=_kernels_py)
    assert sa == sb == 0 and a.shape == b.shape == (58, 12)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


def test_pure_env_selects_fallback():
    code = "from triad_charts import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, TRIAD_CHARTS_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
    env["TRIAD_CHARTS_PURE"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "cython"


def test_integrate_uses_selected_backend(masses, monkeypatch):
    z0 = CartesianState.from_array(
        jrd_to_cartesian(sample_jrd(1, np.random.default_rng(3)), masses).as_array()[0])
    a = integrate(z0, masses, 0.01, 2.0, "wh")
    monkeypatch.setattr(kernels, "_impl", _kernels_py)
    b = integrate(z0, masses, 0.01, 2.0, "wh")
    np.testing.assert_allclose(a.states, b.states, rtol=1e-10, atol=1e-12)
