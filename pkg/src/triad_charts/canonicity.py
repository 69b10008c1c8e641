"""Numerical canonicity checks: finite-difference symplectic defect,
round-trip defect, Poisson brackets and closed-loop 1-form integrals."""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SingularityError
from .jrd import JrdCoords, cartesian_to_jrd, jrd_forward_array, jrd_singularities
from .kepler import CartesianState, angle_diff
from .perihelia import PCoords, cartesian_to_p, p_forward_array, p_singularities
from .rpspi import RpsPiCoords, rpspi_forward_array, rpspi_inverse_array


@dataclass(frozen=True)
class ChartHandle:
    """A chart as a pair of batched array maps.

    Coordinates are ordered (6 momenta, 6 conjugate positions), the same
    pairing as the Cartesian (y1, y2, x1, x2)."""
    name: str
    coords: type
    forward: Callable
    inverse: Callable
    singular: Callable = None

    @property
    def angle_mask(self):
        return np.array([k in self.coords.angles for k in self.coords.fields])


def _jrd_inverse(w, masses):
    return cartesian_to_jrd(CartesianState.from_array(w), masses).as_array()


def _p_inverse(w, masses):
    return cartesian_to_p(CartesianState.from_array(w), masses).as_array()


CHARTS = {
    "jrd": ChartHandle("jrd", JrdCoords, jrd_forward_array, _jrd_inverse,
                       lambda z: jrd_singularities(JrdCoords.from_array(z))),
    "rps_pi": ChartHandle("rps_pi", RpsPiCoords, rpspi_forward_array, rpspi_inverse_array),
    "p": ChartHandle("p", PCoords, p_forward_array, _p_inverse,
                     lambda z: p_singularities(PCoords.from_array(z))),
}


def get_chart(chart):
    return CHARTS[chart] if isinstance(chart, str) else chart


def symplectic_matrix(n=6):
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def step_sizes(z, h):
    return h * (1 + np.abs(z))


def jacobian(f, z, h):
    """Central-difference Jacobian of f at a batch of points z: (n, 12) ->
    (n, 12, 12), steps h*(1 + |z_k|)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n, d = z.shape
    hs = step_sizes(z, h)
    E = np.eye(d)
    zp = z[:, None, :] + hs[:, :, None] * E[None]
    zm = z[:, None, :] - hs[:, :, None] * E[None]
    fp = f(zp.reshape(-1, d)).reshape(n, d, -1)
    fm = f(zm.reshape(-1, d)).reshape(n, d, -1)
    return np.swapaxes((fp - fm) / (2 * hs[:, :, None]), 1, 2)


def jacobian_richardson(f, z, h):
    return (4 * jacobian(f, z, h / 2) - jacobian(f, z, h)) / 3


def _defect(J, pairing=None):
    S = symplectic_matrix(J.shape[-1] // 2)
    if pairing is not None:
        J = J[..., :, pairing]
    D = np.swapaxes(J, -1, -2) @ S @ J - S
    return np.abs(D).max(axis=(-2, -1))


def symplectic_defect(chart, points, masses, h=1e-5, richardson=True, pairing=None,
                      check=True):
    """max |J^T S J - S| per point, J the chart -> Cartesian Jacobian.

    `pairing` permutes the chart coordinates before the comparison (a
    negative control: a wrong pairing gives an O(1) defect)."""
    ch = get_chart(chart)
    z = np.atleast_2d(np.asarray(points, dtype=float))
    if check and ch.singular is not None:
        bad = ch.singular(z)
        if bad:
            raise SingularityError(f"{ch.name}: points near singular set ({', '.join(bad)})")
    f = lambda u: ch.forward(u, masses)
    J = jacobian_richardson(f, z, h) if richardson else jacobian(f, z, h)
    return _defect(J, pairing)


def convergence_slope(chart, points, masses, hs=(4e-3, 2e-3, 1e-3)):
    """Observed order of the plain central-difference defect in h."""
    hs = np.asarray(hs)
    d = np.array([symplectic_defect(chart, points, masses, h, richardson=False).max()
                  for h in hs])
    slope = np.polyfit(np.log(hs), np.log(d), 1)[0]
    return float(slope), d


def roundtrip_defect(chart, points, masses):
    """max-norm of inverse(forward(z)) - z, angle differences mod 2 pi."""
    ch = get_chart(chart)
    z = np.atleast_2d(np.asarray(points, dtype=float))
    back = ch.inverse(ch.forward(z, masses), masses)
    d = back - z
    m = ch.angle_mask
    d[:, m] = angle_diff(back[:, m], z[:, m])
    return np.abs(d).max(axis=1)


def _grad(f, w, h):
    w = np.asarray(w, dtype=float)
    g = np.empty(12)
    for k in range(12):
        hk = h * (1 + abs(w[k]))
        e = np.zeros(12)
        e[k] = hk
        g[k] = (f(w + e) - f(w - e)) / (2 * hk)
    return g


def poisson_bracket(f, g, point, h=1e-5):
    """{f, g} = df/dx . dg/dy - df/dy . dg/dx for observables of the
    (12,) Cartesian array (y1, y2, x1, x2)."""
    w = point.as_array() if isinstance(point, CartesianState) else np.asarray(point, float)
    F = lambda u: float(f(u))
    Gf = lambda u: float(g(u))
    df = (4 * _grad(F, w, h / 2) - _grad(F, w, h)) / 3
    dg = (4 * _grad(Gf, w, h / 2) - _grad(Gf, w, h)) / 3
    return float(df[6:] @ dg[:6] - df[:6] @ dg[6:])


def angular_momentum(w):
    s = CartesianState.from_array(np.asarray(w))
    return s.C


def _spectral_derivative(v, winding):
    """d/ds on s in [0, 1) of samples v (K, d) with v(s + 1) = v(s) + winding."""
    K = v.shape[0]
    s = np.arange(K) / K
    per = v - s[:, None] * winding
    k = np.fft.rfftfreq(K, 1.0 / K)
    dper = np.fft.irfft(2j * np.pi * k[:, None] * np.fft.rfft(per, axis=0), n=K, axis=0)
    return dper + winding


def loop_integrals(chart, path, masses, K=256):
    """Integrals over a closed chart loop of y.dx (Cartesian) and of the
    chart's sum of action * d(angle).

    `path(s)` maps s in [0, 1] to (..., 12) chart coordinates; angles may
    wind by multiples of 2 pi."""
    ch = get_chart(chart)
    s = np.arange(K) / K
    z = np.asarray(path(s), dtype=float)
    winding = np.asarray(path(np.array([1.0])), dtype=float)[0] - np.asarray(path(np.array([0.0])), dtype=float)[0]
    w = ch.forward(z, masses)
    wwind = np.zeros(12)
    dx = _spectral_derivative(w[:, 6:], wwind[6:])
    lhs = np.mean(np.einsum("ki,ki->k", w[:, :6], dx))
    dq = _spectral_derivative(z[:, 6:], winding[6:])
    rhs = np.mean(np.einsum("ki,ki->k", z[:, :6], dq))
    length = np.mean(np.linalg.norm(_spectral_derivative(z, winding), axis=1))
    return float(lhs), float(rhs), float(length)


def oneform_check(chart, path, masses, K=256, tol=1e-13, Kmax=1 << 14):
    """|loop integral of y.dx - loop integral of sum p dq| and the loop
    length in chart coordinates; nodes doubled until both integrals settle."""
    prev = loop_integrals(chart, path, masses, K)
    while K < Kmax:
        K *= 2
        cur = loop_integrals(chart, path, masses, K)
        if abs(cur[0] - prev[0]) < tol * max(1.0, abs(cur[0])) and \
                abs(cur[1] - prev[1]) < tol * max(1.0, abs(cur[1])):
            break
        prev = cur
    lhs, rhs, length = cur
    return abs(lhs - rhs), length


def chart_loop_integral(chart, cartesian_loop, masses):
    """Sum p dq of a chart along a closed Cartesian loop (K, 12), with the
    angles lifted by unwrapping."""
    ch = get_chart(chart)
    z = ch.inverse(np.asarray(cartesian_loop, dtype=float), masses)
    m = np.where(ch.angle_mask)[0]
    z[:, m] = np.unwrap(z[:, m], axis=0)
    # closing the loop: windings are whole turns
    wind = np.zeros(12)
    step_last = z[0] - z[-1]
    step_last[m] = angle_diff(z[0, m], z[-1, m])
    wind[m] = (z[-1, m] + step_last[m]) - z[0, m]
    dq = _spectral_derivative(z[:, 6:], wind[6:])
    return float(np.mean(np.einsum("ki,ki->k", z[:, :6], dq)))
