"""Retrograde-regularized chart rps_pi, its complex version and symmetries.

Real chart ordering (momenta, then conjugate positions):
    (Lambda1, Lambda2, eta1, eta2, p, P, lambda1, lambda2, xi1, xi2, q, Q)
The public map fixes (P, Q) = (0, 0), i.e. the third axis along C.
"""
from dataclasses import dataclass

import numpy as np

from .coords import Coords
from .errors import DomainError, SingularityError
from .jrd import JrdCoords
from .kepler import TWO_PI, CartesianState, solve_kepler

SQ2 = np.sqrt(2.0)


class RpsPiCoords(Coords):
    fields = ("Lambda1", "Lambda2", "eta1", "eta2", "p", "P",
              "lambda1", "lambda2", "xi1", "xi2", "q", "Q")
    momenta = fields[:6]
    positions = fields[6:]
    angles = ("lambda1", "lambda2")


class RpsPiComplex(Coords):
    fields = ("Lambda1", "Lambda2", "lambda1", "lambda2",
              "t1", "t2", "t3", "t1s", "t2s", "t3s", "T", "Ts")
    angles = ("lambda1", "lambda2")


# ---------------------------------------------------------------- planar maps

def eccentric_longitude(lam, k, h, tol=1e-15, maxiter=60):
    """F solving F - k sin F + h cos F = lam (real or complex k, h)."""
    if not (np.iscomplexobj(k) or np.iscomplexobj(h) or np.iscomplexobj(lam)):
        e = np.hypot(k, h)
        w = np.arctan2(h, k)
        return solve_kepler(e, lam - w) + w
    F = lam + k * np.sin(lam) - h * np.cos(lam)
    for _ in range(maxiter):
        s, c = np.sin(F), np.cos(F)
        dF = (F - k * s + h * c - lam) / (1 - k * c - h * s)
        F = F - dF
        if np.max(np.abs(dF)) < tol:
            break
    return F


def planar_from_kh(Lam, lam, k, h, GoL, mbar, M):
    """Planar Kepler state from (k, h) = e(cos w, sin w) and G/Lambda.

    Lam may be negative (used by the prograde path at phi2^-); the momentum
    prefactor then changes sign together with Lam.
    """
    a = Lam ** 2 / (mbar ** 2 * M)
    beta = 1.0 / (1.0 + GoL)
    F = eccentric_longitude(lam, k, h)
    c, s = np.cos(F), np.sin(F)
    X = a * ((1 - beta * h * h) * c + h * k * beta * s - k)
    Y = a * ((1 - beta * k * k) * s + h * k * beta * c - h)
    ar = 1.0 / (1 - k * c - h * s)
    pref = mbar ** 2 * M / Lam * ar
    PX = pref * (h * k * beta * c - (1 - beta * h * h) * s)
    PY = pref * ((1 - beta * k * k) * c - h * k * beta * s)
    return X, Y, PX, PY


def planar_poincare(Lam, lam, eta, xi, mbar, M):
    """Standard planar Poincare map (eta, xi) = sqrt(2 rho)(cos w, -sin w)."""
    rho = 0.5 * (eta * eta + xi * xi)
    f = np.sqrt(2 * Lam - rho) / (SQ2 * Lam)
    return planar_from_kh(Lam, lam, eta * f, -xi * f, 1 - rho / Lam, mbar, M)


def planar_inverse(x, y, mbar, M):
    """Inverse of planar_poincare for states in the (1, 2) plane, G > 0."""
    X, Y = x[..., 0], x[..., 1]
    PX, PY = y[..., 0], y[..., 1]
    r = np.hypot(X, Y)
    energy = (PX * PX + PY * PY) / (2 * mbar) - mbar * M / r
    if np.any(energy >= 0):
        raise DomainError("orbit is not elliptic")
    a = -mbar * M / (2 * energy)
    Lam = mbar * np.sqrt(M * a)
    G = X * PY - Y * PX
    if np.any(G <= 0):
        raise DomainError("planar orbit has non-positive circulation")
    k = G * PY / (mbar ** 2 * M) - X / r
    h = -G * PX / (mbar ** 2 * M) - Y / r
    e2 = k * k + h * h
    if np.any(e2 >= 1):
        raise DomainError("eccentricity outside [0, 1)")
    beta = 1.0 / (1.0 + np.sqrt(1 - e2))
    u, v = X / a + k, Y / a + h
    m11, m12, m22 = 1 - beta * h * h, h * k * beta, 1 - beta * k * k
    det = m11 * m22 - m12 * m12
    cF = (m22 * u - m12 * v) / det
    sF = (m11 * v - m12 * u) / det
    F = np.arctan2(sF, cF)
    lam = np.mod(F - k * np.sin(F) + h * np.cos(F), TWO_PI)
    rho = Lam * e2 * beta
    f = SQ2 * Lam / np.sqrt(2 * Lam - rho)
    return Lam, lam, k * f, -h * f


# ------------------------------------------------------------ rotation blocks

def _r313(p, q, c, s):
    """R3(A)R1(b)R3(-A) written in (p, q) = -sqrt(2 rho)(cos A, sin A) with
    c = (1 - cos b)/(2 rho) and s = sin b / sqrt(2 rho)."""
    one = np.ones_like(p * c)
    rows = [[one - q * q * c, p * q * c, -q * s],
            [p * q * c, one - p * p * c, p * s],
            [q * s, -p * s, one - (p * p + q * q) * c]]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _r313_reflected(p, q, c, s):
    """R3(A)R1(-b)R3(A)Pi2 with c = (1 + cos b)/(2 rho), s = sin b/sqrt(2 rho)."""
    one = np.ones_like(p * c)
    rows = [[one - q * q * c, p * q * c, q * s],
            [p * q * c, one - p * p * c, -p * s],
            [q * s, -p * s, (p * p + q * q) * c - one]]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _r0(P, Q, G):
    """R3(zeta)R1(i)R3(-zeta) in (P, Q) = sqrt(2(G - Z))(cos zeta, -sin zeta)."""
    c0 = 0.5 / G
    s0 = np.sqrt(c0 * (2 - (P * P + Q * Q) * c0))
    one = np.ones_like(P * c0)
    rows = [[one - Q * Q * c0, -P * Q * c0, -Q * s0],
            [-P * Q * c0, one - P * P * c0, -P * s0],
            [Q * s0, P * s0, one - (P * P + Q * Q) * c0]]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _actions(L1, L2, eta1, eta2, p, xi1, xi2, q):
    r1 = 0.5 * (eta1 * eta1 + xi1 * xi1)
    r2 = 0.5 * (eta2 * eta2 + xi2 * xi2)
    r3 = 0.5 * (p * p + q * q)
    G1 = L1 - r1
    G2 = L2 - r2
    G = L1 - L2 - r1 + r2 + r3
    return r1, r2, r3, G1, G2, G


def rotation_coefficients(L1, L2, eta1, eta2, p, xi1, xi2, q):
    """(c1*, s1*, c2, s2, G, G1, G2) of the rps_pi rotation blocks.

    s1* is taken with the + root, which is what the composed rotations
    R3(A)R1(i1)R3(-A) require.
    """
    r1, r2, r3, G1, G2, G = _actions(L1, L2, eta1, eta2, p, xi1, xi2, q)
    c1 = (2 * G2 - r3) / (4 * G * G1)
    c2 = (2 * G1 + r3) / (4 * G * G2)
    s1 = np.sqrt(c1 * (2 - 2 * r3 * c1))
    s2 = np.sqrt(c2 * (2 - 2 * r3 * c2))
    return c1, s1, c2, s2, G, G1, G2


def _matvec(R, v):
    return np.einsum("...ij,...j->...i", R, v)


def rpspi_forward_array(z, masses):
    """Unchecked real map (..., 12) -> (..., 12) Cartesian (y1, y2, x1, x2).

    Accepts complex input (analytic continuation in eta, xi, p, q).
    """
    L1, L2, eta1, eta2, p, P, lam1, lam2, xi1, xi2, q, Q = np.moveaxis(np.asarray(z), -1, 0)
    c1, s1, c2, s2, G, G1, G2 = rotation_coefficients(L1, L2, eta1, eta2, p, xi1, xi2, q)
    R0 = _r0(P, Q, G)
    R1 = _r313(p, q, c1, s1)
    R2 = _r313_reflected(p, q, c2, s2)
    X1, Y1, PX1, PY1 = planar_poincare(L1, lam1, eta1, xi1, masses.mbar1, masses.M1)
    X2, Y2, PX2, PY2 = planar_poincare(L2, -lam2, -eta2, xi2, masses.mbar2, masses.M2)
    zero = np.zeros_like(X1)
    xp1 = np.stack([X1, Y1, zero], axis=-1)
    yp1 = np.stack([PX1, PY1, zero], axis=-1)
    xp2 = np.stack([X2, Y2, zero], axis=-1)
    yp2 = -np.stack([PX2, PY2, zero], axis=-1)
    A1 = R0 @ R1
    A2 = R0 @ R2
    return np.concatenate([_matvec(A1, yp1), _matvec(A2, yp2),
                           _matvec(A1, xp1), _matvec(A2, xp2)], axis=-1)


def rpspi_inverse_array(w, masses):
    """Regular inverse of rpspi_forward_array on real Cartesian data."""
    w = np.asarray(w, dtype=float)
    y1, y2, x1, x2 = (w[..., 3 * k:3 * k + 3] for k in range(4))
    C1 = np.cross(x1, y1)
    C2 = np.cross(x2, y2)
    C = C1 + C2
    G = np.linalg.norm(C, axis=-1)
    G1 = np.linalg.norm(C1, axis=-1)
    G2 = np.linalg.norm(C2, axis=-1)
    # (P, Q) from the direction of C
    Z = C[..., 2]
    rT = G - Z
    c0 = 0.5 / G
    s0 = np.sqrt(c0 * (2 - 2 * rT * c0))
    P = -C[..., 1] / (G * s0)
    Q = -C[..., 0] / (G * s0)
    R0 = _r0(P, Q, G)
    R0t = np.swapaxes(R0, -1, -2)
    y1, y2, x1, x2, C1 = (_matvec(R0t, v) for v in (y1, y2, x1, x2, C1))
    # (p, q) from the node C x C1 in the frame where C is vertical
    r3 = G - G1 + G2
    if np.any(r3 < -1e-12 * G):
        raise DomainError("outside the retrograde regime (G < G1 - G2)")
    r3 = np.maximum(r3, 0.0)
    c1 = (2 * G2 - r3) / (4 * G * G1)
    s1 = np.sqrt(c1 * (2 - 2 * r3 * c1))
    nux, nuy = -G * C1[..., 1], G * C1[..., 0]
    p = -nux / (G * G1 * s1)
    q = -nuy / (G * G1 * s1)
    c2 = (2 * G1 + r3) / (4 * G * G2)
    s2 = np.sqrt(c2 * (2 - 2 * r3 * c2))
    R1 = _r313(p, q, c1, s1)
    R2 = _r313_reflected(p, q, c2, s2)
    R1t = np.swapaxes(R1, -1, -2)
    xp1, yp1 = _matvec(R1t, x1), _matvec(R1t, y1)
    xp2, yp2 = _matvec(R2, x2), _matvec(R2, y2)   # R2 is a symmetric involution
    L1, lam1, eta1, xi1 = planar_inverse(xp1, yp1, masses.mbar1, masses.M1)
    L2, mlam2, meta2, xi2 = planar_inverse(xp2, -yp2, masses.mbar2, masses.M2)
    lam2 = np.mod(-mlam2, TWO_PI)
    return np.stack([L1, L2, eta1, -meta2, p, P, lam1, lam2, xi1, xi2, q, Q], axis=-1)


# --------------------------------------------------------------- public maps

def rpspi_to_cartesian(r, masses, denom_tol=1e-8):
    """Cartesian state of a real rps_pi point with (P, Q) = (0, 0)."""
    if np.any(np.asarray(r.P) != 0) or np.any(np.asarray(r.Q) != 0):
        raise DomainError("only (P, Q) = (0, 0) is supported: the third axis is taken along C")
    _, _, _, G1, G2, G = _actions(r.Lambda1, r.Lambda2, r.eta1, r.eta2, r.p, r.xi1, r.xi2, r.q)
    scale = np.maximum(np.abs(r.Lambda1), np.abs(r.Lambda2))
    for name, d in (("2G", G), ("2G1", G1), ("2G2", G2)):
        if np.any(np.abs(d) <= denom_tol * scale):
            raise DomainError(f"rotation denominator {name} vanishes")
    if np.any(np.asarray(r.Lambda1) <= 0) or np.any(np.asarray(r.Lambda2) <= 0):
        raise DomainError("Lambda1, Lambda2 must be positive")
    if np.any(G1 <= 0) or np.any(G2 <= 0):
        raise DomainError("eccentricity would exceed 1 (G_j <= 0)")
    w = rpspi_forward_array(r.as_array(), masses)
    return CartesianState.from_array(w)


def cartesian_to_rpspi(s, masses):
    return RpsPiCoords.from_array(rpspi_inverse_array(s.as_array(), masses))


# ------------------------------------------------------------ complex version

def _pair_from_real(a, b, kind):
    """(t, t*) from a real pair; kind 1 for (eta1, xi1) and (P, Q), kind 2 for
    (eta2, xi2) and (p, q)."""
    if kind == 1:
        return (a - 1j * b) / SQ2, (a + 1j * b) / (SQ2 * 1j)
    return (1j * a - b) / SQ2, (1j * a + b) / (SQ2 * 1j)


def _pair_to_real(t, ts, kind):
    if kind == 1:
        return (t + 1j * ts) / SQ2, (ts + 1j * t) / SQ2
    return (t + 1j * ts) / (SQ2 * 1j), (1j * ts - t) / SQ2


def complexify(r):
    t1, t1s = _pair_from_real(r.eta1, r.xi1, 1)
    t2, t2s = _pair_from_real(r.eta2, r.xi2, 2)
    t3, t3s = _pair_from_real(r.p, r.q, 2)
    T, Ts = _pair_from_real(r.P, r.Q, 1)
    return RpsPiComplex(Lambda1=r.Lambda1, Lambda2=r.Lambda2, lambda1=r.lambda1,
                        lambda2=r.lambda2, t1=t1, t2=t2, t3=t3, t1s=t1s, t2s=t2s,
                        t3s=t3s, T=T, Ts=Ts)


def decomplexify(c, real=True):
    """Inverse of complexify; real=True drops the imaginary parts, which
    vanish exactly on the reality structure."""
    eta1, xi1 = _pair_to_real(c.t1, c.t1s, 1)
    eta2, xi2 = _pair_to_real(c.t2, c.t2s, 2)
    p, q = _pair_to_real(c.t3, c.t3s, 2)
    P, Q = _pair_to_real(c.T, c.Ts, 1)
    vals = dict(eta1=eta1, xi1=xi1, eta2=eta2, xi2=xi2, p=p, q=q, P=P, Q=Q)
    if real:
        vals = {k: np.real(v) for k, v in vals.items()}
    return RpsPiCoords(Lambda1=c.Lambda1, Lambda2=c.Lambda2, lambda1=c.lambda1,
                       lambda2=c.lambda2, **vals)


def reality_defect(c):
    """Max violation of (t1, t1*)^cc = i(t1*, t1), (tj, tj*)^cc = -i(tj*, tj)."""
    d = [np.conj(c.t1) - 1j * c.t1s, np.conj(c.t1s) - 1j * c.t1]
    for t, ts in ((c.t2, c.t2s), (c.t3, c.t3s)):
        d += [np.conj(t) + 1j * ts, np.conj(ts) + 1j * t]
    return float(max(np.max(np.abs(v)) for v in d))


def invariant_G(c):
    """G = Lambda1 - Lambda2 - i t1 t1* - i t2 t2* - i t3 t3*."""
    return c.Lambda1 - c.Lambda2 - 1j * (c.t1 * c.t1s + c.t2 * c.t2s + c.t3 * c.t3s)


def rpspi_from_jrd(c):
    """Complex rps_pi variables of a jrd point."""
    r1 = c.Lambda1 - c.G1
    r2 = c.Lambda2 - c.G2
    r3 = c.G - c.G1 + c.G2
    rT = c.G - c.Z
    for name, v in (("Lambda1 - G1", r1), ("Lambda2 - G2", r2),
                    ("G - G1 + G2", r3), ("G - Z", rT)):
        if np.any(np.asarray(v) < 0):
            raise DomainError(f"outside the retrograde regime: {name} < 0")
    f1 = c.gamma1 + c.gamma + c.zeta
    f2 = -c.gamma2 + c.gamma + c.zeta
    A = c.gamma + c.zeta
    sq = np.sqrt
    return RpsPiComplex(
        Lambda1=c.Lambda1, Lambda2=c.Lambda2,
        lambda1=np.mod(c.ell1 + f1, TWO_PI),
        lambda2=np.mod(c.ell2 + c.gamma2 - c.gamma - c.zeta, TWO_PI),
        t1=sq(r1) * np.exp(1j * f1), t1s=-1j * sq(r1) * np.exp(-1j * f1),
        t2=-1j * sq(r2) * np.exp(1j * f2), t2s=-sq(r2) * np.exp(-1j * f2),
        t3=-1j * sq(r3) * np.exp(1j * A), t3s=-sq(r3) * np.exp(-1j * A),
        T=sq(rT) * np.exp(1j * c.zeta), Ts=-1j * sq(rT) * np.exp(-1j * c.zeta),
    )


def jrd_from_rpspi(c):
    """Inverse of rpspi_from_jrd where the jrd angles are defined."""
    r = [np.real(sg * 1j * a * b) for sg, a, b in ((1, c.t1, c.t1s), (-1, c.t2, c.t2s),
                                                   (-1, c.t3, c.t3s), (1, c.T, c.Ts))]
    if min(np.min(v) for v in r) <= 0:
        raise SingularityError("jrd angles undefined on the manifold t = 0")
    G1 = c.Lambda1 - r[0]
    G2 = c.Lambda2 - r[1]
    G = G1 - G2 + r[2]
    Z = G - r[3]
    zeta = np.angle(c.T)
    A = np.angle(1j * c.t3)
    f1 = np.angle(c.t1)
    f2 = np.angle(1j * c.t2)
    gamma = A - zeta
    gamma1 = f1 - A
    gamma2 = A - f2
    ell1 = c.lambda1 - f1
    ell2 = c.lambda2 - gamma2 + A
    w = lambda a: np.mod(a, TWO_PI)
    return JrdCoords(Lambda1=c.Lambda1, Lambda2=c.Lambda2, G1=G1, G2=G2, G=G, Z=Z,
                     ell1=w(ell1), ell2=w(ell2), gamma1=w(gamma1), gamma2=w(gamma2),
                     gamma=w(gamma), zeta=w(zeta))


def phi2_minus(c):
    """The involution (Lambda2, lambda2) -> (-Lambda2, -lambda2)."""
    return c.replace(Lambda2=-np.asarray(c.Lambda2), lambda2=-np.asarray(c.lambda2))


def _branch_sqrt(x, sign):
    """sqrt continued from the positive axis; on the negative real axis the
    value sign * i sqrt|x| is taken."""
    x = np.asarray(x, dtype=complex)
    neg = (np.real(x) < 0) & (np.abs(np.imag(x)) <= 1e-12 * np.abs(x))
    return np.where(neg, sign * 1j * np.sqrt(np.abs(x)), np.sqrt(x))


def prograde_complex_to_cartesian(c, masses, rot_branch=(1, -1), ecc_branch=(1, 1)):
    """Complexified prograde map in the variables (19), evaluated at any
    complex point.  At phi2^- several square-root arguments are negative
    reals; for body j the eccentricity factor uses ecc_branch[j-1] * i and
    the inclination factor rot_branch[j-1] * i times sqrt|x|.

    Built from the jrd rotations R3(A)R1(s_j i_j)R3(-A) with the orbital
    elements written through (t, t*) only.
    """
    L = (np.asarray(c.Lambda1, dtype=complex), np.asarray(c.Lambda2, dtype=complex))
    lam = (c.lambda1, c.lambda2)
    ts = ((c.t1, c.t1s), (c.t2, c.t2s))
    r = [1j * a * b for a, b in ts]
    r3 = 1j * c.t3 * c.t3s
    rT = 1j * c.T * c.Ts
    G1, G2 = L[0] - r[0], L[1] - r[1]
    G = G1 + G2 - r3
    # rotation about C: (sqrt(rT) cos zeta, sqrt(rT) sin zeta)
    uc, us = (c.T + 1j * c.Ts) / 2, (c.T - 1j * c.Ts) / (2j)
    c0 = 1.0 / G
    s0 = np.sqrt(c0 * (2 - rT * c0))
    one = np.ones_like(G)
    R0 = np.stack([np.stack(row, -1) for row in (
        [one - us * us * c0, us * uc * c0, us * s0],
        [us * uc * c0, one - uc * uc * c0, -uc * s0],
        [-us * s0, uc * s0, one - rT * c0])], -2)
    vc, vs = (c.t3 + 1j * c.t3s) / 2, (c.t3 - 1j * c.t3s) / (2j)
    cj = ((2 * G2 - r3) / (2 * G * G1), (2 * G1 - r3) / (2 * G * G2))
    sj = (1, -1)
    out_x, out_y = [], []
    for j in range(2):
        mbar, M = masses.body(j + 1)
        kap = _branch_sqrt(2 / L[j] - r[j] / L[j] ** 2, ecc_branch[j])
        Ep = ts[j][0] * kap
        Em = 1j * ts[j][1] * kap
        k, h = (Ep + Em) / 2, (Ep - Em) / (2j)
        X, Y, PX, PY = planar_from_kh(L[j], lam[j], k, h, (L[j] - r[j]) / L[j], mbar, M)
        sn = sj[j] * _branch_sqrt(cj[j] * (2 - r3 * cj[j]), rot_branch[j])
        Rj = np.stack([np.stack(row, -1) for row in (
            [one - vs * vs * cj[j], vs * vc * cj[j]],
            [vs * vc * cj[j], one - vc * vc * cj[j]],
            [-vs * sn, vc * sn])], -2)
        A = R0 @ Rj
        out_x.append(_matvec(A, np.stack([X, Y], -1)))
        out_y.append(_matvec(A, np.stack([PX, PY], -1)))
    return np.concatenate([out_y[0], out_y[1], out_x[0], out_x[1]], axis=-1)


# --------------------------------------------------------------- symmetries

def symmetry_transform(kind, c, g=0.0):
    """R_g (rotation about C), R3minus or Rswap acting on complex coordinates."""
    if kind == "Rg":
        ep, em = np.exp(1j * g), np.exp(-1j * g)
        return c.replace(lambda1=c.lambda1 + g, lambda2=c.lambda2 - g,
                         t1=c.t1 * ep, t2=c.t2 * ep, t3=c.t3 * ep,
                         t1s=c.t1s * em, t2s=c.t2s * em, t3s=c.t3s * em,
                         T=c.T * ep, Ts=c.Ts * em)
    if kind == "R3minus":
        return c.replace(t3=-c.t3, t3s=-c.t3s, T=-c.T, Ts=-c.Ts)
    if kind == "Rswap":
        return c.replace(lambda1=np.pi / 2 - c.lambda1, lambda2=-np.pi / 2 - c.lambda2,
                         t1=-c.t1s, t2=-c.t2s, t1s=-c.t1, t2s=-c.t2,
                         t3=c.t3s, t3s=c.t3)
    raise ValueError(f"unknown symmetry {kind!r}")


def cartesian_symmetry(kind, w):
    """Cartesian counterparts of R3minus and Rswap on (..., 12) arrays."""
    w = np.asarray(w)
    y1, y2, x1, x2 = (w[..., 3 * k:3 * k + 3] for k in range(4))
    if kind == "R3minus":
        f = lambda v: v * np.array([1, 1, -1])
        return np.concatenate([f(y1), f(y2), f(x1), f(x2)], axis=-1)
    if kind == "Rswap":
        fx = lambda v: v[..., [1, 0, 2]]
        fy = lambda v: -v[..., [1, 0, 2]]
        return np.concatenate([fy(y1), fy(y2), fx(x1), fx(x2)], axis=-1)
    raise ValueError(f"no Cartesian form for {kind!r}")


# ----------------------------------------------------------- domain params

@dataclass(frozen=True)
class DomainParams:
    chi: float = 2.0
    alpha_minus: float = 0.05
    alpha_plus: float = 0.2
    Lambda_minus: float = 0.02
    Lambda_plus: float = 0.1
    epsilon0: float = None

    def __post_init__(self):
        if not self.chi > 1:
            raise DomainError("need chi > 1")
        if not 0 < self.alpha_minus < self.alpha_plus < 1:
            raise DomainError("need 0 < alpha_minus < alpha_plus < 1")
        if not 0 < self.Lambda_minus < self.Lambda_plus:
            raise DomainError("need 0 < Lambda_minus < Lambda_plus")

    def k_pm(self, masses):
        """k_pm = (m1/m2) sqrt(M2/M1) sqrt(alpha_pm), from Lambda1/Lambda2 at
        semi-axes ratio alpha."""
        f = masses.m1 / masses.m2 * np.sqrt(masses.M2 / masses.M1)
        return f * np.sqrt(self.alpha_minus), f * np.sqrt(self.alpha_plus)

    def eps0(self):
        """Ball radius for the secular variables."""
        if self.epsilon0 is not None:
            return self.epsilon0
        analytic = 0.25 * np.sqrt(self.Lambda_minus * (self.chi - 1))
        # e_j ~ |eta_j| / sqrt(Lambda_j): keep a1(1 + e1) < a2(1 - e2) with margin
        ecap = 0.5 * (1 - self.alpha_plus) / (1 + self.alpha_plus)
        collision = ecap * np.sqrt(self.Lambda_minus)
        return float(min(analytic, collision))

    def mass_violations(self, masses):
        out = []
        bound = np.sqrt(self.alpha_minus) / (2 * self.chi) * masses.m1
        if not masses.m2 < bound:
            out.append(f"m2 < sqrt(alpha_minus)/(2 chi) m1 (= {bound:.6g}) violated by m2 = {masses.m2:.6g}")
        if masses.m1 > 4 * masses.m2:
            mu_max = 3 * masses.m0 / (masses.m1 - 4 * masses.m2)
            if not masses.mu < mu_max:
                out.append(f"mu < 3 m0/(m1 - 4 m2) (= {mu_max:.6g}) violated")
        return out

    def in_L(self, Lambda1, Lambda2, masses):
        km, kp = self.k_pm(masses)
        return ((self.Lambda_minus < Lambda2) & (Lambda2 < self.Lambda_plus)
                & (km * Lambda2 < Lambda1) & (Lambda1 < kp * Lambda2))

    def sample(self, masses, n, rng, radius=None, margin=0.05):
        """Random real rps_pi points in L x T^2 x ball, (P, Q) = 0."""
        km, kp = self.k_pm(masses)
        w = self.Lambda_plus - self.Lambda_minus
        L2 = rng.uniform(self.Lambda_minus + margin * w, self.Lambda_plus - margin * w, n)
        kw = kp - km
        L1 = L2 * rng.uniform(km + margin * kw, kp - margin * kw, n)
        eps = self.eps0() if radius is None else radius
        v = rng.normal(size=(n, 6))
        v *= (eps * rng.uniform(0, 1, n) ** (1 / 6) / np.linalg.norm(v, axis=1))[:, None]
        lam = rng.uniform(0, TWO_PI, (n, 2))
        zero = np.zeros(n)
        return RpsPiCoords(Lambda1=L1, Lambda2=L2, eta1=v[:, 0], eta2=v[:, 1], p=v[:, 2],
                           P=zero, lambda1=lam[:, 0], lambda2=lam[:, 1], xi1=v[:, 3],
                           xi2=v[:, 4], q=v[:, 5], Q=zero)
