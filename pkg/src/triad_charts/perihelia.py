"""Perihelia reduction chart: actions (Lambda1, Lambda2, G2, Theta, G, Z)
conjugate to (ell1, ell2, g2, theta, g, zeta), built on the perihelion
direction of the inner planet instead of node lines."""
from dataclasses import dataclass

import numpy as np

from .coords import Coords
from .errors import DomainError, SingularityError
from .kepler import (CartesianState, TWO_PI, angle_diff, eccentricity, matvec,
                     oriented_angle, osculating_elements, rotation, solve_kepler)
from .rpspi import DomainParams

SING_RTOL = 1e-6
ACOS_CLAMP = 1 - 1e-14

UP_UP, DOWN_UP, UP_DOWN, NONE = "(↑↑)", "(↓↑)", "(↑↓)", "none"


class PCoords(Coords):
    fields = ("Lambda1", "Lambda2", "G2", "Theta", "G", "Z",
              "ell1", "ell2", "g2", "theta", "g", "zeta")
    momenta = fields[:6]
    positions = fields[6:]
    angles = positions


def g1_of_p(G, G2, Theta, theta):
    """|C1| as a function of the p-actions and the angle theta."""
    G, G2, Theta, theta = (np.asarray(v, dtype=float) for v in (G, G2, Theta, theta))
    r = G ** 2 + G2 ** 2 - 2 * Theta ** 2 \
        + 2 * np.sqrt(G ** 2 - Theta ** 2) * np.sqrt(G2 ** 2 - Theta ** 2) * np.cos(theta)
    scale = np.maximum(G, G2) ** 2
    if np.any(r < -1e-12 * scale):
        raise DomainError("negative radicand in G1: inputs violate |Theta| < min(G, G2)")
    return np.sqrt(np.maximum(r, 0.0))


def p_singularities(c, rtol=SING_RTOL):
    """Names of the chart singularities the point is within rtol of."""
    L1, L2, G2, Th, G, Z = (np.asarray(getattr(c, k), dtype=float) for k in PCoords.momenta)
    th = np.asarray(c.theta, dtype=float)
    scale = np.maximum.reduce([np.abs(L1), np.abs(L2), np.abs(G)])
    eps = rtol * scale
    G1 = g1_of_p(G, G2, np.clip(Th, -np.minimum(G, G2), np.minimum(G, G2)), th)
    tests = [
        ("Z = G", Z >= G - eps),
        ("Z = -G", Z <= -G + eps),
        ("|Theta| = G", np.abs(Th) >= G - eps),
        ("|Theta| = G2", np.abs(Th) >= G2 - eps),
        ("G2 = Lambda2", G2 >= L2 - eps),
        ("G1 = Lambda1", G1 >= L1 - eps),
        ("G2 = 0", G2 <= eps),
        ("G = 0", G <= eps),
        ("G1 = 0 (G2 = G and theta = pi)", G1 <= eps),
    ]
    return [name for name, bad in tests if np.any(bad)]


def _acos(x):
    return np.arccos(np.clip(x, -ACOS_CLAMP, ACOS_CLAMP))


def p_frames(z):
    """Vectors C, C1, C2, P1, P2 and unit Q1, Q2 of a (..., 12) p-array."""
    L1, L2, G2, Th, G, Z, l1, l2, g2, th, g, zt = np.moveaxis(np.asarray(z, dtype=float), -1, 0)
    e1 = np.array([1.0, 0.0, 0.0])
    e3 = np.array([0.0, 0.0, 1.0])
    A = rotation(3, zt) @ rotation(1, _acos(Z / G))
    F = A @ rotation(3, g) @ rotation(1, _acos(Th / G))
    F2 = F @ rotation(3, th) @ rotation(1, _acos(Th / G2))
    C = G[..., None] * matvec(A, e3)
    P1 = matvec(F, e3)
    C2 = G2[..., None] * matvec(F2, e3)
    P2 = matvec(F2 @ rotation(3, g2 - np.pi / 2), e1)
    Q2 = matvec(F2 @ rotation(3, g2), e1)
    C1 = C - C2
    G1 = np.linalg.norm(C1, axis=-1)
    Q1 = np.cross(C1 / G1[..., None], P1)
    return dict(C=C, C1=C1, C2=C2, P1=P1, P2=P2, Q1=Q1, Q2=Q2, G1=G1)


def _kepler_xy(L, Gj, ell, P, Q, mbar, M):
    e = eccentricity(L, Gj)
    zt = solve_kepler(e, ell)
    c, s = np.cos(zt), np.sin(zt)
    a = L ** 2 / (mbar ** 2 * M)
    rho = (Gj / L)[..., None]
    x = a[..., None] * ((c - e)[..., None] * P + rho * s[..., None] * Q)
    v = (mbar ** 2 * M / L / (1 - e * c))[..., None]
    y = v * (-s[..., None] * P + rho * c[..., None] * Q)
    return x, y


def p_forward_array(z, masses):
    """Unchecked map (..., 12) p-array -> (..., 12) Cartesian (y1, y2, x1, x2)."""
    z = np.asarray(z, dtype=float)
    f = p_frames(z)
    L1, L2, G2 = z[..., 0], z[..., 1], z[..., 2]
    x1, y1 = _kepler_xy(L1, f["G1"], z[..., 6], f["P1"], f["Q1"], masses.mbar1, masses.M1)
    x2, y2 = _kepler_xy(L2, G2, z[..., 7], f["P2"], f["Q2"], masses.mbar2, masses.M2)
    return np.concatenate([y1, y2, x1, x2], axis=-1)


def p_to_cartesian(c, masses, rtol=SING_RTOL):
    bad = p_singularities(c, rtol)
    if bad:
        raise SingularityError("p chart singular: " + ", ".join(bad))
    return CartesianState.from_array(p_forward_array(c.as_array(), masses))


def cartesian_to_p(s, masses, node_tol=1e-12):
    """Inverse chart from the p-nodes k3 x C, C x P1, P1 x C2, C2 x P2."""
    el1 = osculating_elements(s.x1, s.y1, masses.mbar1, masses.M1)
    el2 = osculating_elements(s.x2, s.y2, masses.mbar2, masses.M2)
    C1, C2, P1, P2 = el1["C"], el2["C"], el1["P"], el2["P"]
    C = C1 + C2
    G = np.linalg.norm(C, axis=-1)
    G2 = el2["G"]
    k1 = np.broadcast_to([1.0, 0.0, 0.0], C.shape)
    k3 = np.broadcast_to([0.0, 0.0, 1.0], C.shape)
    nodes = {
        "nu1 = k3 x C": (np.cross(k3, C), G),
        "n1 = C x P1": (np.cross(C, P1), G),
        "nu2 = P1 x C2": (np.cross(P1, C2), G2),
        "n2 = C2 x P2": (np.cross(C2, P2), G2),
    }
    for name, (v, sc) in nodes.items():
        if np.any(np.linalg.norm(v, axis=-1) <= node_tol * sc):
            raise SingularityError(f"p-node {name} vanishes")
    nu1, n1, nu2, n2 = (v for v, _ in nodes.values())
    return PCoords(
        Lambda1=el1["Lambda"], Lambda2=el2["Lambda"], G2=G2,
        Theta=np.einsum("...i,...i->...", C, P1), G=G, Z=C[..., 2],
        ell1=el1["ell"], ell2=el2["ell"],
        g2=oriented_angle(C2, nu2, n2),
        theta=oriented_angle(P1, n1, nu2),
        g=oriented_angle(C, nu1, n1),
        zeta=oriented_angle(k3, k1, nu1),
    )


def reflect_R2minus(c):
    """(Theta, Z, theta, zeta) -> -(Theta, Z, theta, zeta); an involution."""
    return c.replace(Theta=-np.asarray(c.Theta), Z=-np.asarray(c.Z),
                     theta=np.mod(-np.asarray(c.theta), TWO_PI),
                     zeta=np.mod(-np.asarray(c.zeta), TWO_PI))


def reflect_R2minus_cartesian(s):
    """Cartesian counterpart: negate every second component."""
    flip = np.array([1.0, -1.0, 1.0])
    return CartesianState(s.y1 * flip, s.y2 * flip, s.x1 * flip, s.x2 * flip)


def classify_manifold(c, tol=1e-10, with_reason=False):
    """Which of the planar invariant manifolds the point lies on."""
    Th = float(c.Theta)
    th = float(angle_diff(c.theta, 0.0))
    G, G2 = float(c.G), float(c.G2)
    label, why = NONE, "(Theta, theta) not at (0, 0) or (0, pi)"
    if abs(Th) <= tol * max(1.0, G):
        if abs(th) <= tol:
            label, why = UP_DOWN, "(Theta, theta) = (0, 0)"
        elif abs(abs(th) - np.pi) <= tol:
            if G > G2 * (1 + tol):
                label, why = UP_UP, "(Theta, theta) = (0, pi), G > G2"
            elif G < G2 * (1 - tol):
                label, why = DOWN_UP, "(Theta, theta) = (0, pi), G < G2"
            else:
                why = "ambiguous: G = G2 on (0, pi), where G1 = 0"
    return (label, why) if with_reason else label


# ------------------------------------------------------------------ domain

def cubic_a(Lambda1, G2, G):
    """a(Lambda1, G2; G) = 5 Lambda1^2 G - (G + G2)^2 (4G + G2)."""
    return 5 * Lambda1 ** 2 * G - (G + G2) ** 2 * (4 * G + G2)


def gstar(Lambda1, G, tol=1e-15):
    """Unique positive root in G2 of cubic_a (safeguarded Newton)."""
    if not (Lambda1 > 0 and G > 0):
        raise DomainError("need Lambda1, G > 0")
    f = lambda x: cubic_a(Lambda1, x, G)
    lo, hi = 0.0, max(Lambda1, G)
    # f(0) = G(5 Lambda1^2 - 4 G^2) must be positive for a positive root
    if f(lo) <= 0:
        raise DomainError("cubic has no positive root (5 Lambda1^2 <= 4 G^2)")
    while f(hi) > 0:
        hi *= 2
    x = 0.5 * (lo + hi)
    for _ in range(200):
        fx = f(x)
        if fx > 0:
            lo = x
        else:
            hi = x
        d = -(2 * (G + x) * (4 * G + x) + (G + x) ** 2)
        xn = x - fx / d
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= tol * max(1.0, x):
            return xn
        x = xn
    return x


@dataclass(frozen=True)
class PDomain:
    """Regularity domain around the retrograde coplanar manifold, at fixed G.

    L carries the Lambda-box (chi, alpha bounds, Lambda bounds); c is the
    collision-clearance number in (0, 1)."""
    G: float
    c: float = 0.9
    L: DomainParams = DomainParams(chi=2.0, alpha_minus=0.02, alpha_plus=0.1,
                                   Lambda_minus=0.5, Lambda_plus=5.0)

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise DomainError("need 0 < c < 1")
        if not self.G > 0:
            raise DomainError("need G > 0")

    def kappa(self):
        return 2 / self.c * np.sqrt(self.L.alpha_plus)

    def G_bounds(self, Lambda1, Lambda2):
        return self.kappa() * Lambda2, min(Lambda1 - self.G, Lambda2)

    def in_L(self, Lambda1, Lambda2, masses):
        return bool(self.L.in_L(Lambda1, Lambda2, masses)
                    and Lambda1 > self.G + self.kappa() * Lambda2)

    def in_Lu(self, Lambda1, Lambda2, masses):
        G = self.G
        k = self.kappa()
        return bool(self.L.in_L(Lambda1, Lambda2, masses)
                    and cubic_a(Lambda1, k * Lambda2, G) > 0
                    and Lambda2 > G and Lambda1 > max(G + k * Lambda2, 2 * G))

    def Gu_bounds(self, Lambda1, Lambda2):
        """(G-bar minus, G-bar plus); the interval may be empty."""
        lo = max(self.kappa() * Lambda2, self.G)
        try:
            gs = gstar(Lambda1, self.G)
        except DomainError:
            return lo, -np.inf
        return lo, min(Lambda2, gs)


def p_domain_check(c, d, masses):
    """Membership of a p-point in the regularity domain, per condition."""
    L1, L2 = float(c.Lambda1), float(c.Lambda2)
    G2, Th, G = float(c.G2), float(c.Theta), float(c.G)
    th = float(angle_diff(c.theta, 0.0))
    Gm, Gp = d.G_bounds(L1, L2)
    conds = {
        "Lambda in L": bool(d.L.in_L(L1, L2, masses)),
        "Lambda1 > G + (2/c) sqrt(alpha_plus) Lambda2": L1 > d.G + d.kappa() * L2,
        "G2 > G_minus": G2 > Gm,
        "G2 < G_plus": G2 < Gp,
        "|Theta| < min(G, G2)/2": abs(Th) < 0.5 * min(G, G2),
        "|theta| < pi/2": abs(th) < np.pi / 2,
    }
    member = all(conds.values()) and abs(G - d.G) <= 1e-12 * max(1.0, d.G)
    info = {}
    try:
        G1 = float(g1_of_p(G, G2, Th, th))
    except DomainError:
        G1 = float("nan")
    info["G1"] = G1
    info["G1^2 >= 3/4 G^2"] = bool(G1 ** 2 >= 0.75 * G ** 2)
    if 0 < G1 < L1 and 0 < G2 < L2:
        e1 = float(eccentricity(L1, G1))
        e2 = float(eccentricity(L2, G2))
        a1 = L1 ** 2 / (masses.mbar1 ** 2 * masses.M1)
        a2 = L2 ** 2 / (masses.mbar2 ** 2 * masses.M2)
        chain = [a1 * (1 + e1), 2 * a1, a2 * G2 ** 2 * d.c ** 2 / (2 * L2 ** 2),
                 a2 * (1 - e2) * d.c ** 2]
        info["chain"] = chain
        info["chain holds"] = bool(all(x < y for x, y in zip(chain, chain[1:])))
        info["a1(1+e1) < c^2 a2(1-e2)"] = bool(chain[0] < chain[-1])
        info["e in (0, 1)"] = bool(0 < e1 < 1 and 0 < e2 < 1)
    else:
        info["e in (0, 1)"] = False
        member = False
    if member and not info["e in (0, 1)"]:
        member = False
    return dict(member=bool(member), conditions=conds, diagnostics=info)


def sample_p(n, rng, Lambda1=(1.2, 1.5), G=(0.3, 0.5), G2=(0.3, 0.5), margin=0.1,
             Theta_frac=0.4, theta=None, Z_frac=0.9):
    """Random regular p-points: G1 stays below Lambda1 and away from 0."""
    Gv = rng.uniform(*G, n)
    G2v = rng.uniform(*G2, n)
    L1 = rng.uniform(*Lambda1, n)
    L2 = G2v / rng.uniform(0.5, 1 - margin, n)
    Th = rng.uniform(-Theta_frac, Theta_frac, n) * np.minimum(Gv, G2v)
    Z = rng.uniform(-Z_frac, Z_frac, n) * Gv
    ang = rng.uniform(0, TWO_PI, (n, 6))
    if theta is not None:
        ang[:, 3] = rng.uniform(-theta, theta, n)
    return PCoords(Lambda1=L1, Lambda2=L2, G2=G2v, Theta=Th, G=Gv, Z=Z,
                   **{k: ang[:, i] for i, k in enumerate(PCoords.positions)})
