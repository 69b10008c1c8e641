"""First and second Birkhoff invariants of the retrograde problem: the
sigma / varsigma matrix and its diagonalizer, the leading-order torsion
matrices and the nondegeneracy scan of their determinant."""
from dataclasses import dataclass, field
import itertools

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .kepler import semi_major
from .laplace import d_value, expansion_table, laplace_coeff
from .rpspi import DomainParams

# t-polynomial of the leading torsion determinant, increasing powers
QUARTIC = np.array([12.0, -90.0, 8.0, 9.0, 17.0])


def quartic(t):
    t = np.asarray(t, dtype=float)
    return np.tensordot(QUARTIC, np.stack([t ** k for k in range(5)]), axes=1)


def semi_axes(Lambda1, Lambda2, masses):
    return (semi_major(Lambda1, masses.mbar1, masses.M1),
            semi_major(Lambda2, masses.mbar2, masses.M2))


def s_coefficients(Lambda1, Lambda2, masses):
    """(s, s~, alpha, a2): s = -k alpha/(2 a2) b_{3/2}^(1), s~ = k alpha/(2 a2) b_{3/2}^(2),
    with k = mbar1 mbar2 and b the exponential-Fourier Laplace coefficients."""
    a1, a2 = semi_axes(Lambda1, Lambda2, masses)
    alpha = a1 / a2
    if not 0 < alpha < 1:
        raise DomainError(f"semi-axes ratio {alpha:.6g} outside (0, 1)")
    k = masses.mbar1 * masses.mbar2 * alpha / (2 * a2)
    return -k * laplace_coeff(1.5, 1, alpha), k * laplace_coeff(1.5, 2, alpha), alpha, a2


@dataclass
class SigmaData:
    sigma: np.ndarray
    varsigma: float
    eigen1: float
    eigen2: float
    discriminant: float
    xLambda: float
    s_val: float
    stilde_val: float
    Lambda: tuple = ()
    alpha: float = float("nan")

    @property
    def Omega(self):
        """First-order invariants (sigma1, sigma2, varsigma) of the t-normal form."""
        return np.array([self.eigen1, self.eigen2, self.varsigma])

    @property
    def Omega_real(self):
        """The same invariants against the real actions
        ((eta1^2 + xi1^2)/2, (eta2^2 + xi2^2)/2, (p^2 + q^2)/2)."""
        return np.array([self.eigen1, -self.eigen2, -self.varsigma])


def _x_of(a, d, Y):
    # U(x)^T sigma U(x) diagonal  <=>  tanh 2x = 2 Y / (a - d), sigma12 = i Y
    r = 2 * Y / (a - d)
    if not abs(r) < 1:
        raise DomainError("no real diagonalizer: |tanh 2x| >= 1")
    return 0.5 * np.arctanh(r)


def sigma_matrix(Lambda1, Lambda2, masses, offdiag_sign=+1):
    """The quadratic part of the averaged perturbation in the complex
    variables t, t*: f^av = C0 + i t_h.sigma t_h* + i varsigma t3 t3* + O4.

    sigma = [[s/L1, i q s~/sqrt(L1 L2)], [i q s~/sqrt(L1 L2), -s/L2]] with
    q = offdiag_sign. q = +1 is the sign realized by the chart's phase
    convention for t2, t2* (the averaged potential carries
    +s~ e1 e2 cos(gamma1 + gamma2)); q = -1 is the other branch of
    sqrt(L1 L2) under L2 -> -L2 and is kept for comparison only.

    sigma1 is the eigenvalue continuing s/L1 (the (1,1) entry of the
    diagonalized matrix), sigma2 the one continuing -s/L2."""
    if Lambda1 == Lambda2:
        raise DomainError("Lambda1 = Lambda2 is outside the domain")
    s, st, alpha, _ = s_coefficients(Lambda1, Lambda2, masses)
    Y = offdiag_sign * st / np.sqrt(Lambda1 * Lambda2)
    a, d = s / Lambda1, -s / Lambda2
    sig = np.array([[a, 1j * Y], [1j * Y, d]])
    vs = -(1 / Lambda1 - 1 / Lambda2) * s
    disc = (1 / Lambda1 - 1 / Lambda2) ** 2 * s ** 2 + 4 / (Lambda1 * Lambda2) * (s ** 2 - st ** 2)
    x = _x_of(a, d, Y)
    c2, sh2 = np.cosh(x) ** 2, np.sinh(x) ** 2
    e1 = a * c2 - d * sh2 - Y * np.sinh(2 * x)
    e2 = d * c2 - a * sh2 + Y * np.sinh(2 * x)
    return SigmaData(sig, float(vs), float(e1), float(e2), float(disc), float(x), float(s),
                     float(st), (float(Lambda1), float(Lambda2)), float(alpha))


def discriminant_grid(masses, domain=None, n=100):
    """Delta and s^2 - s~^2 over an n x n grid of cell centers of L.

    Returns (min Delta, min (s^2 - s~^2), max |Im| of the eigenvalues of sigma)."""
    d = DomainParams() if domain is None else domain
    km, kp = d.k_pm(masses)
    L2 = d.Lambda_minus + (np.arange(n) + 0.5) / n * (d.Lambda_plus - d.Lambda_minus)
    r = km + (np.arange(n) + 0.5) / n * (kp - km)
    dmin = smin = np.inf
    imag = 0.0
    for l2 in L2:
        for rr in r:
            sd = sigma_matrix(rr * l2, l2, masses)
            dmin = min(dmin, sd.discriminant)
            smin = min(smin, sd.s_val ** 2 - sd.stilde_val ** 2)
            imag = max(imag, float(np.abs(np.linalg.eigvals(sd.sigma).imag).max()))
    return float(dmin), float(smin), imag


def eigenvalues_formula(sd):
    """tr/2 -/+ sqrt(disc)/2, ordered as (sigma1, sigma2) of SigmaData."""
    tr = np.trace(sd.sigma).real
    r = np.sqrt(sd.discriminant) / 2
    lo, hi = tr / 2 - r, tr / 2 + r
    return (lo, hi) if sd.eigen1 <= sd.eigen2 else (hi, lo)


def U_matrix(x):
    return np.array([[np.cosh(x), -1j * np.sinh(x)], [1j * np.sinh(x), np.cosh(x)]])


def W_matrix(x):
    return np.array([[np.cosh(x), np.sinh(x)], [np.sinh(x), np.cosh(x)]])


def diagonalizer(sd, masses=None, h=1e-6):
    """(U, V, dx/dLambda).

    U = [[cosh x, -i sinh x], [i sinh x, cosh x]] with U^-1 sigma U = diag;
    V = diag(W(x), W(-x)) acting on (eta1, eta2, xi1, xi2); the angle shift
    has generating coefficient dx/dLambda, returned as the gradient in
    (Lambda1, Lambda2) when masses are given (central differences)."""
    if not sd.discriminant > 0:
        raise DomainError("discriminant <= 0: sigma has no real eigenvalues")
    x = sd.xLambda
    U = U_matrix(x)
    V = np.zeros((4, 4))
    V[:2, :2] = W_matrix(x)
    V[2:, 2:] = W_matrix(-x)
    grad = None
    if masses is not None:
        L1, L2 = sd.Lambda
        grad = np.empty(2)
        for k, (d1, d2) in enumerate(((h * L1, 0), (0, h * L2))):
            xp = sigma_matrix(L1 + d1, L2 + d2, masses).xLambda
            xm = sigma_matrix(L1 - d1, L2 - d2, masses).xLambda
            grad[k] = (xp - xm) / (2 * (d1 + d2))
    return U, V, grad


def sigma_asymptotics(Lambda1, Lambda2, masses):
    """Leading small-alpha forms of (sigma1, sigma2, varsigma)."""
    a1, a2 = semi_axes(Lambda1, Lambda2, masses)
    K = 0.75 * masses.mbar1 * masses.mbar2 * a1 ** 2 / a2 ** 3
    return np.array([-K / Lambda1, K / Lambda2, K * (1 / Lambda1 - 1 / Lambda2)])


def prograde_eigenvalues(Lambda1, Lambda2, masses):
    """Eigenvalues and varsigma of the prograde closed form
    [[s/L1, s~/sqrt(L1 L2)], [s~/sqrt(L1 L2), s/L2]], varsigma = -(1/L1 + 1/L2) s,
    evaluated at signed Lambda2 (sqrt taken on the complex plane; the
    eigenvalues depend on the square of the off-diagonal only)."""
    a1 = semi_major(Lambda1, masses.mbar1, masses.M1)
    a2 = semi_major(abs(Lambda2), masses.mbar2, masses.M2)
    alpha = a1 / a2
    k = masses.mbar1 * masses.mbar2 * alpha / (2 * a2)
    s, st = -k * laplace_coeff(1.5, 1, alpha), k * laplace_coeff(1.5, 2, alpha)
    off2 = st ** 2 / (Lambda1 * Lambda2)
    a, d = s / Lambda1, s / Lambda2
    tr, det = a + d, a * d - off2
    r = np.sqrt(tr ** 2 - 4 * det)
    ev = np.array([tr / 2 - r / 2, tr / 2 + r / 2])
    ev = ev[np.argsort(np.abs(ev - a))]  # the one continuing s/L1 first
    return np.array([ev[0], ev[1], -(1 / Lambda1 + 1 / Lambda2) * s])


def first_order_invariants(Lambda1, Lambda2, masses):
    """Retrograde invariants and the signed prograde ones at (L1, -L2),
    the reduced pair (Omega_i - Omega_3) and its leading-order form."""
    sd = sigma_matrix(Lambda1, Lambda2, masses)
    Om = sd.Omega
    pro = prograde_eigenvalues(Lambda1, -Lambda2, masses)
    a1, a2 = semi_axes(Lambda1, Lambda2, masses)
    K = 0.75 * masses.mbar1 * masses.mbar2 * a1 ** 2 / a2 ** 3
    return dict(Omega=Om, Omega_real=sd.Omega_real,
                prograde_signed=np.array([1, -1, -1]) * pro,
                Omega_hat=np.array([Om[0] - Om[2], Om[1] - Om[2]]),
                Omega_hat_leading=np.array([-K * (2 / Lambda1 - 1 / Lambda2),
                                            -K * (1 / Lambda1 - 2 / Lambda2)]),
                herman_sum=float(Om.sum()))


# ----------------------------------------------------------------- torsion

@dataclass
class TorsionData:
    T_check: np.ndarray
    T_hat: np.ndarray
    T_dot: np.ndarray
    det_T_dot: float
    t_ratio: float
    poly_value: float
    scale: float
    det_formula: float
    eps2_bound: float = 0.0
    T13_expansion: float = float("nan")


def torsion_scale(Lambda1, Lambda2, masses):
    """mbar1 mbar2 alpha^2 / (a2 Lambda2^2)."""
    a1, a2 = semi_axes(Lambda1, Lambda2, masses)
    return masses.mbar1 * masses.mbar2 * (a1 / a2) ** 2 / (a2 * Lambda2 ** 2)


def T_check_leading(t):
    return np.array([
        [0.75 * t ** 2, -2.25 * t, 3 * t ** 2 - 2.25 * t],
        [-2.25 * t, -3.0, 2.25 * t + 3],
        [3 * t ** 2 - 2.25 * t, 2.25 * t + 3, -0.75 * (1 + t) ** 2 - 0.75 * t]])


def reduce_T(T):
    """T_ij - T_i3 - T_3j + T_33 for i, j in {1, 2}."""
    return T[:2, :2] - T[:2, 2:3] - T[2:3, :2] + T[2, 2]


def T13_from_expansion(t, d=0.0):
    """The (1,3) entry of the general second-order formula with the
    leading asymptotic r, s, C1 values, in units of the torsion scale
    (d -> 0 at leading order)."""
    # k [(1/L1)(1/L1 + 1/L2)(s1 + s1*) - (1/L1^2 + d^2/L2^2) C1 + d^2/L2 (1/L1 + 1/L2)(s1' + s1'*)]
    # with L2 = 1, L1 = 1/t, the alpha^2/a2 factor divided out
    s11, s11s, C1 = 3.0, -0.75, -0.75
    s12, s12s = 9 / 8, 9 / 8
    val = t * (t + 1) * (s11 + s11s) - (t ** 2 + d ** 2) * C1 + d ** 2 * (t + 1) * (s12 + s12s)
    return val / (1 + d ** 2)


def torsion_matrices(Lambda1, Lambda2, masses, G=None, eps2=0.0):
    """Leading-order torsion: T_check (3x3), the G-reduced T_hat (2x2) and
    T_dot = s_i s_j T_hat(L1, -L2) with s = (1, -1); det T_dot against the
    closed polynomial form. The O(eps2^2) correction is a bound only."""
    if not Lambda1 > Lambda2:
        raise DomainError("need Lambda1 > Lambda2 (t < 1)")
    if G is not None and not 0 < G < Lambda1 - Lambda2:
        raise DomainError("need 0 < G < Lambda1 - Lambda2")
    t = Lambda2 / Lambda1
    kap = torsion_scale(Lambda1, Lambda2, masses)
    Tc = kap * T_check_leading(t)
    Th = reduce_T(Tc)
    # Lambda2 -> -Lambda2 flips t and leaves the scale (Lambda2^2) unchanged
    Th_neg = reduce_T(kap * T_check_leading(-t))
    sgn = np.array([1.0, -1.0])
    Td = np.outer(sgn, sgn) * Th_neg
    det = float(np.linalg.det(Td))
    formula = -9 / 16 * kap ** 2 * float(quartic(t))
    return TorsionData(Tc, Th, Td, det, float(t), float(quartic(t)), float(kap), formula,
                       float(eps2 ** 2), float(kap * T13_from_expansion(t)))


def quartic_root():
    """The quartic's unique root in (0, 1), with the certificate: p(0) > 0,
    p(1) < 0 and p'' > 0 on [0, 1] (a convex function changes sign at most
    twice, an odd number of sign changes forces exactly one)."""
    p0, p1 = quartic(0.0), quartic(1.0)
    d2 = lambda t: 2 * 8 + 6 * 9 * t + 12 * 17 * t ** 2
    convex = bool(d2(0.0) > 0)   # d2 increasing on [0, 1] as all coefficients are > 0
    root = brentq(lambda t: float(quartic(t)), 0.0, 1.0, xtol=1e-15)
    return dict(root=root, p0=float(p0), p1=float(p1), convex=convex,
                unique=bool(p0 > 0 and p1 < 0 and convex))


@dataclass
class TorsionScan:
    Lambda1: np.ndarray
    Lambda2: np.ndarray
    det: np.ndarray
    valid: np.ndarray
    degenerate: np.ndarray
    t_root: float
    certified: dict = field(default_factory=dict)

    def as_dict(self):
        return dict(t_root=self.t_root, certified=self.certified,
                    n_valid=int(self.valid.sum()), n_degenerate=int(self.degenerate.sum()))


def torsion_scan(masses, G, n1=60, n2=60, domain=None, delta=0.01, t_range=None):
    """|det T_dot| on a grid over the slice {(L1, L2) in L : L1 > L2, G < L1 - L2}.

    A cell is flagged degenerate when the quartic changes sign across its
    t-range. t_range = (t_lo, t_hi) replaces the k_pm ratio bounds of L by
    1/t_hi < L1/L2 < 1/t_lo. The certified regions are t <= t0 - delta and
    t >= t0 + delta over the valid cells, each with its min |det|."""
    d = DomainParams() if domain is None else domain
    km, kp = d.k_pm(masses)
    if t_range is not None:
        if not 0 < t_range[0] < t_range[1] < 1:
            raise DomainError("t_range must satisfy 0 < t_lo < t_hi < 1")
        km, kp = 1 / t_range[1], 1 / t_range[0]
    L2 = np.linspace(d.Lambda_minus, d.Lambda_plus, n2 + 1)
    L2c = 0.5 * (L2[1:] + L2[:-1])
    r = np.linspace(km, kp, n1 + 1)
    rc = 0.5 * (r[1:] + r[:-1])
    RR, LL2 = np.meshgrid(rc, L2c, indexing="ij")
    LL1 = RR * LL2
    valid = (LL1 > LL2) & (G < LL1 - LL2)
    kap = torsion_scale(LL1, LL2, masses)
    tt = LL2 / LL1
    det = -9 / 16 * kap ** 2 * quartic(tt)
    # t-range per cell from its ratio edges
    t_hi = 1 / r[:-1]
    t_lo = 1 / r[1:]
    straddle = np.sign(quartic(t_hi)) != np.sign(quartic(t_lo))
    degenerate = valid & straddle[:, None]
    t0 = quartic_root()["root"]
    cert = {}
    for name, mask in (("below", tt <= t0 - delta), ("above", tt >= t0 + delta)):
        m = valid & mask
        if m.any():
            cert[name] = dict(t_range=[float(tt[m].min()), float(tt[m].max())],
                              min_abs_det=float(np.abs(det[m]).min()), cells=int(m.sum()))
    return TorsionScan(LL1, LL2, det, valid, degenerate, float(t0), cert)


def resonance_margin(Omega, s=2):
    """min |Omega.k| over integer k with 0 < |k|_1 <= 2s, k not a multiple of (1,1,1)."""
    if s < 2:
        raise DomainError("need s >= 2")
    Om = np.asarray(Omega, dtype=float)
    best, kbest = np.inf, None
    R = 2 * s
    for k in itertools.product(range(-R, R + 1), repeat=3):
        n = sum(map(abs, k))
        if n == 0 or n > R or k[0] == k[1] == k[2]:
            continue
        v = abs(float(np.dot(Om, k)))
        if v < best:
            best, kbest = v, k
    return float(best), kbest


# --------------------------------------------------------------- crosscheck

@dataclass
class SigmaCrosscheck:
    sigma_numeric: np.ndarray
    varsigma_numeric: complex
    C0_numeric: complex
    C0_average: float
    rel_err: dict
    closed: SigmaData
    condition: float

    @property
    def max_rel_err(self):
        return max(self.rel_err.values())


def sigma_crosscheck(Lambda, masses, radius=None, N=6, Nl=32, domain=None):
    """Quadratic coefficients of the numerically averaged perturbation
    (Cauchy sampling in the complex rps_pi variables) against sigma_matrix."""
    from .dalembert import quadratic_part, taylor_coefficients
    from .secular import secular_average

    d = DomainParams() if domain is None else domain
    rho = d.eps0() / 4 if radius is None else radius
    if rho > d.eps0() / 4 * (1 + 1e-12):
        raise DomainError("sampling radius beyond eps0/4")
    L1, L2 = Lambda
    c = taylor_coefficients(L1, L2, masses, rho, N, Nl)
    S, V, C0 = quadratic_part(c)
    sd = sigma_matrix(L1, L2, masses)
    rel = {}
    for (i, j), name in (((0, 0), "sigma11"), ((0, 1), "sigma12"), ((1, 0), "sigma21"),
                         ((1, 1), "sigma22")):
        rel[name] = float(abs(S[i, j] - sd.sigma[i, j]) / abs(sd.sigma[i, j]))
    rel["varsigma"] = float(abs(V - sd.varsigma) / abs(sd.varsigma))
    z = np.zeros((1, 12))
    z[0, 0], z[0, 1] = L1, L2
    av = float(secular_average("rps_pi", z, masses, tol=1e-13).total[0])
    rel["C0"] = float(abs(C0 - av) / abs(av))
    # quadratic coefficients are read off at rho^2 against a constant C0
    cond = float(abs(C0) / (np.abs(sd.sigma).max() * rho ** 2))
    return SigmaCrosscheck(S, V, C0, av, rel, sd, cond)


def expansion_leading(Lambda1, Lambda2, masses):
    a1, a2 = semi_axes(Lambda1, Lambda2, masses)
    return expansion_table(a1, a2), d_value(Lambda1, Lambda2, a1 / a2)
