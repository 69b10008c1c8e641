"""Taylor coefficients of the averaged perturbation in the complex rps_pi
variables and the selection rules they obey.

The coefficients come from Cauchy sampling: f^av is evaluated on the torus
|t_k| = rho (k over t1, t2, t3, t1*, t2*, t3*; T = T* = 0) and an N^6 FFT
returns c_a rho^|a| up to aliasing from degree >= N. With N even the
aliased terms obey the same parity and index-balance rules, so they cannot
fake a violation."""
from dataclasses import dataclass, field
import itertools

import numpy as np

from . import kernels
from .rpspi import DomainParams, RpsPiComplex, decomplexify
from .secular import body_tables

TWO_PI = 2 * np.pi
# order of the six Taylor variables in coefficient arrays
TVARS = ("t1", "t2", "t3", "t1s", "t2s", "t3s")


def averaged_complex(cpoints, masses, Nl=16, chunk=2048):
    """f^av (direct + indirect) at complex rps_pi points, (S, 12) in the
    RpsPiComplex layout, by an Nl x Nl trapezoid rule in (lambda1, lambda2)."""
    c = RpsPiComplex.from_array(np.atleast_2d(cpoints))
    z = decomplexify(c, real=False).as_array()
    out = np.empty(z.shape[0], dtype=complex)
    kd, ki = masses.mbar1 * masses.mbar2, 1.0 / masses.m0
    for k in range(0, z.shape[0], chunk):
        x1, y1, x2, y2 = body_tables("rps_pi", z[k:k + chunk], masses, Nl)
        r = kernels.pair_average(np.ascontiguousarray(x1), np.ascontiguousarray(y1),
                                 np.ascontiguousarray(x2), np.ascontiguousarray(y2), kd, ki)
        out[k:k + chunk] = r[:, 0] + r[:, 1]
    return out


def taylor_coefficients(Lambda1, Lambda2, masses, rho, N=6, Nl=32):
    """Array c[a1, a2, a3, a1*, a2*, a3*] of f^av coefficients, shape (N,)*6."""
    th = TWO_PI * np.arange(N) / N
    grid = np.stack(np.meshgrid(*([th] * 6), indexing="ij"), axis=-1).reshape(-1, 6)
    t = rho * np.exp(1j * grid)
    n = t.shape[0]
    pts = np.zeros((n, 12), dtype=complex)
    pts[:, 0] = Lambda1
    pts[:, 1] = Lambda2
    pts[:, 4:10] = t
    f = averaged_complex(pts, masses, Nl).reshape((N,) * 6)
    # remove the constant first: FFT roundoff scales with the array size
    f0 = f.mean()
    F = np.fft.fftn(f - f0) / N ** 6
    F[(0,) * 6] += f0
    deg = np.indices((N,) * 6).sum(axis=0)
    return F / rho ** deg


def monomials(N, m):
    """All exponent 6-tuples with entries < N and total degree <= m."""
    return [a for a in itertools.product(range(N), repeat=6) if sum(a) <= m]


def _swap_h(a):
    # (a1, a2, a1*, a2*) -> (a1*, a2*, a1, a2), (a3, a3*) kept
    return (a[3], a[4], a[2], a[0], a[1], a[5])


def _swap_all(a):
    # full exchange t <-> t*, including (a3, a3*)
    return (a[3], a[4], a[5], a[0], a[1], a[2])


def _conj_sign(a):
    tot = sum(a)
    return (-1) ** (tot // 2) * (-1) ** (a[1] + a[4] + a[2] + a[5])


@dataclass
class DalembertReport:
    Lambda: tuple
    rho: float
    N: int
    order: int
    scale: float
    s1: float
    s2: float
    s3: float
    s3_keep_t3: float
    s4: float
    s4_no_conj: float
    tol: float = 1e-9
    worst: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(max(self.s1, self.s2, self.s3, self.s4) < self.tol * self.scale)

    def as_dict(self):
        d = dict(self.__dict__)
        d["Lambda"] = list(d["Lambda"])
        d["passed"] = self.passed
        return d


def rule_residuals(c, m):
    """Residuals of the four rules on coefficients up to total degree m.

    s1: c = 0 unless sum(a) = sum(a*). s2: c = 0 unless a3 + a3* and
    a1 + a2 + a1* + a2* are even. s3: invariance under the exchange of
    starred and unstarred exponents. s4: the reality relation
    c_{a,a*} = (-1)^{|a,a*|/2} (-1)^{a2+a2*+a3+a3*} conj(c_{a*,a})."""
    N = c.shape[0]
    res = dict(s1=0.0, s2=0.0, s3=0.0, s3_keep_t3=0.0, s4=0.0, s4_no_conj=0.0)
    worst = {}
    scale = 0.0

    def bump(key, val, a):
        if val > res[key]:
            res[key] = float(val)
            worst[key] = a

    for a in monomials(N, m):
        v = c[a]
        bal = sum(a[:3]) == sum(a[3:])
        even = (a[2] + a[5]) % 2 == 0 and (a[0] + a[1] + a[3] + a[4]) % 2 == 0
        if not bal:
            bump("s1", abs(v), a)
        if not even:
            bump("s2", abs(v), a)
        if bal and even:
            scale = max(scale, abs(v))
            bump("s3", abs(v - c[_swap_all(a)]), a)
            bump("s3_keep_t3", abs(v - c[_swap_h(a)]), a)
            sg = _conj_sign(a)
            bump("s4", abs(v - sg * np.conj(c[_swap_all(a)])), a)
            bump("s4_no_conj", abs(v - sg * c[_swap_all(a)]), a)
    return scale, res, worst


def dalembert_verify(masses, Lambda, order=4, rho=None, N=6, Nl=32, domain=None, tol=1e-9):
    """Extract the coefficients at Lambda = (Lambda1, Lambda2) and measure
    the four selection rules (forbidden / largest allowed)."""
    if N % 2 or N <= order:
        raise ValueError("N must be even and exceed the order")
    d = DomainParams() if domain is None else domain
    rho = d.eps0() / 4 if rho is None else rho
    c = taylor_coefficients(Lambda[0], Lambda[1], masses, rho, N, Nl)
    scale, res, worst = rule_residuals(c, order)
    return DalembertReport(tuple(map(float, Lambda)), float(rho), N, order, float(scale),
                           worst=worst, tol=tol, **res)


def quadratic_part(c):
    """(sigma, varsigma, C0) read off c: f^av = C0 + i t_h.sigma t_h* + i varsigma t3 t3*."""
    e = np.eye(6, dtype=int)
    idx = lambda i, j: tuple(e[i] + e[3 + j])
    sigma = np.array([[-1j * c[idx(i, j)] for j in range(2)] for i in range(2)])
    return sigma, complex(-1j * c[idx(2, 2)]), complex(c[(0,) * 6])
