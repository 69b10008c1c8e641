"""Two-body primitives: masses, Kepler equation, orbital-plane states, rotations."""
from dataclasses import dataclass

import numpy as np

from .errors import CollisionError, DomainError, SingularityError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MassConfig:
    """Sun mass m0, planet masses m1, m2 (in units of mu) and the coupling mu.

    The gravitational constant is absorbed in the masses.
    """
    m0: float = 1.0
    m1: float = 1.0
    m2: float = 0.05
    mu: float = 1e-3

    def __post_init__(self):
        for name in ("m0", "m1", "m2", "mu"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise DomainError(f"{name} must be positive, got {v}")

    @property
    def mbar1(self):
        return self.m0 * self.m1 / (self.m0 + self.mu * self.m1)

    @property
    def mbar2(self):
        return self.m0 * self.m2 / (self.m0 + self.mu * self.m2)

    @property
    def M1(self):
        return self.m0 + self.mu * self.m1

    @property
    def M2(self):
        return self.m0 + self.mu * self.m2

    def decoupled(self):
        """The same masses at mu = 0 (two independent Kepler problems).

        mu = 0 lies outside the configuration domain; this copy exists for
        reference integrations of the uncoupled limit."""
        out = object.__new__(MassConfig)
        for k in ("m0", "m1", "m2"):
            object.__setattr__(out, k, getattr(self, k))
        object.__setattr__(out, "mu", 0.0)
        return out

    def body(self, j):
        """(mbar_j, M_j) for j in {1, 2}."""
        if j == 1:
            return self.mbar1, self.M1
        if j == 2:
            return self.mbar2, self.M2
        raise DomainError(f"body index must be 1 or 2, got {j}")


@dataclass
class CartesianState:
    """Heliocentric momenta and positions, each of shape (..., 3)."""
    y1: np.ndarray
    y2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray

    def as_array(self):
        return np.concatenate([self.y1, self.y2, self.x1, self.x2], axis=-1)

    @classmethod
    def from_array(cls, z):
        z = np.asarray(z)
        return cls(z[..., 0:3], z[..., 3:6], z[..., 6:9], z[..., 9:12])

    @property
    def C1(self):
        return np.cross(self.x1, self.y1)

    @property
    def C2(self):
        return np.cross(self.x2, self.y2)

    @property
    def C(self):
        return self.C1 + self.C2

    def check_collisions(self, tol=0.0):
        r1 = np.linalg.norm(self.x1, axis=-1)
        r2 = np.linalg.norm(self.x2, axis=-1)
        r12 = np.linalg.norm(self.x1 - self.x2, axis=-1)
        if np.any(r1 <= tol) or np.any(r2 <= tol) or np.any(r12 <= tol):
            raise CollisionError("state lies on the collision set")


def solve_kepler(e, ell, tol=1e-15, maxiter=100):
    """Eccentric anomaly solving zeta - e sin(zeta) = ell (vectorized).

    Newton seeded at ell + e sin(ell); a step leaving the bracket
    [ell - e, ell + e] is replaced by bisection.
    """
    e = np.asarray(e, dtype=float)
    ell = np.asarray(ell, dtype=float)
    if np.any(~(e >= 0)) or np.any(e >= 1):
        raise DomainError("eccentricity must lie in [0, 1)")
    e, ell = np.broadcast_arrays(e, ell)
    turns = np.floor((ell + np.pi) / TWO_PI)
    m = ell - TWO_PI * turns
    lo = m - e
    hi = m + e
    z = m + e * np.sin(m)
    for _ in range(maxiter):
        f = z - e * np.sin(z) - m
        lo = np.where(f < 0, z, lo)
        hi = np.where(f > 0, z, hi)
        zn = z - f / (1.0 - e * np.cos(z))
        outside = (zn < lo) | (zn > hi)
        zn = np.where(outside, 0.5 * (lo + hi), zn)
        step = np.max(np.abs(zn - z)) if zn.size else 0.0
        z = zn
        if step < tol:
            break
    return z + TWO_PI * turns


def eccentricity(Lambda, G):
    Lambda = np.asarray(Lambda, dtype=float)
    G = np.asarray(G, dtype=float)
    if np.any(G <= 0) or np.any(G > Lambda):
        raise DomainError("need 0 < G <= Lambda for a real eccentricity")
    return np.sqrt((Lambda - G) * (Lambda + G)) / Lambda


def semi_major(Lambda, mbar, M):
    return np.asarray(Lambda) ** 2 / (mbar ** 2 * M)


def lambda_of_a(a, mbar, M):
    return mbar * np.sqrt(M * np.asarray(a))


def kepler_energy(Lambda, mbar, M):
    return -mbar ** 3 * M ** 2 / (2.0 * np.asarray(Lambda) ** 2)


def mean_motion(Lambda, mbar, M):
    return mbar ** 3 * M ** 2 / np.asarray(Lambda) ** 3


def orbital_state(Lambda, G, ell, mbar, M):
    """Position and momentum in the orbital frame (perihelion along e1)."""
    Lambda = np.asarray(Lambda, dtype=float)
    G = np.asarray(G, dtype=float)
    e = eccentricity(Lambda, G)
    z = solve_kepler(e, ell)
    c, s = np.cos(z), np.sin(z)
    a = Lambda ** 2 / (mbar ** 2 * M)
    rho = G / Lambda
    zero = np.zeros_like(c)
    x = np.stack([a * (c - e), a * rho * s, zero], axis=-1)
    v = (mbar ** 2 * M / Lambda) / (1.0 - e * c)
    y = np.stack([-v * s, v * rho * c, zero], axis=-1)
    return x, y


def rotation(axis, alpha):
    """R1(alpha) (axis=1) or R3(alpha) (axis=3); shape (..., 3, 3)."""
    alpha = np.asarray(alpha, dtype=float)
    c, s = np.cos(alpha), np.sin(alpha)
    o, z = np.ones_like(c), np.zeros_like(c)
    if axis == 1:
        rows = [[o, z, z], [z, c, -s], [z, s, c]]
    elif axis == 3:
        rows = [[c, -s, z], [s, c, z], [z, z, o]]
    else:
        raise ValueError(f"rotation axis must be 1 or 3, got {axis}")
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def matvec(R, v):
    return np.einsum("...ij,...j->...i", R, v)


def oriented_angle(w, u, v):
    """Angle from u to v, positive about w (u, v orthogonal to w); in [0, 2pi)."""
    wn = w / np.linalg.norm(w, axis=-1, keepdims=True)
    s = np.einsum("...i,...i->...", np.cross(u, v), wn)
    c = np.einsum("...i,...i->...", u, v)
    return np.mod(np.arctan2(s, c), TWO_PI)


def wrap_angle(a):
    return np.mod(a, TWO_PI)


def angle_diff(a, b):
    """a - b reduced to (-pi, pi]."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi
    return np.where(d == -np.pi, np.pi, d)


def inclination_triple(Z, G, G1, G2, rtol=1e-6):
    """Convex angles (i, i1, i2) of the momentum triangle C = C1 + C2."""
    Z, G, G1, G2 = (np.asarray(v, dtype=float) for v in (Z, G, G1, G2))
    scale = np.maximum.reduce([np.abs(G), np.abs(G1), np.abs(G2)])
    eps = rtol * scale
    checks = [
        (G1 <= eps, "G1 > 0"),
        (G2 <= eps, "G2 > 0"),
        (G <= eps, "G > 0"),
        (Z >= G - eps, "Z < G"),
        (Z <= -G + eps, "Z > -G"),
        (G >= G1 + G2 - eps, "G < G1 + G2"),
        (G <= np.abs(G1 - G2) + eps, "G > |G1 - G2|"),
    ]
    for bad, name in checks:
        if np.any(bad):
            raise SingularityError(f"inclinations undefined: violates {name}")
    ci = Z / G
    ci1 = (G1 ** 2 + G ** 2 - G2 ** 2) / (2 * G * G1)
    ci2 = (G2 ** 2 + G ** 2 - G1 ** 2) / (2 * G * G2)
    return np.arccos(ci), np.arccos(ci1), np.arccos(ci2)


def osculating_elements(x, y, mbar, M, ecc_tol=1e-12):
    """Keplerian data of the orbit through (x, y) for the two-body term.

    Returns a dict with Lambda, G, ell, e, a, C (angular momentum vector)
    and P (unit perihelion direction). Eccentricities below ecc_tol (at
    roundoff level) leave P undefined and raise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    C = np.cross(x, y)
    G = np.linalg.norm(C, axis=-1)
    energy = np.einsum("...i,...i->...", y, y) / (2 * mbar) - mbar * M / r
    if np.any(energy >= 0):
        raise DomainError("orbit is not elliptic")
    a = -mbar * M / (2 * energy)
    Lambda = mbar * np.sqrt(M * a)
    evec = np.cross(y, C) / (mbar ** 2 * M) - x / r[..., None]
    e = np.linalg.norm(evec, axis=-1)
    if np.any(e <= ecc_tol):
        raise SingularityError("zero eccentricity: perihelion undefined")
    P = evec / e[..., None]
    ecos = 1.0 - r / a
    esin = np.einsum("...i,...i->...", x, y) / Lambda
    zeta = np.arctan2(esin, ecos)
    ell = np.mod(zeta - esin, TWO_PI)
    return dict(Lambda=Lambda, G=G, ell=ell, e=e, a=a, C=C, P=P)


def two_body_energy(x, y, mbar, M):
    r = np.linalg.norm(x, axis=-1)
    return np.einsum("...i,...i->...", y, y) / (2 * mbar) - mbar * M / r


def hamiltonian(state, masses):
    """The full three-body Hamiltonian in heliocentric coordinates."""
    m = masses
    h1 = two_body_energy(state.x1, state.y1, m.mbar1, m.M1)
    h2 = two_body_energy(state.x2, state.y2, m.mbar2, m.M2)
    d = np.linalg.norm(state.x1 - state.x2, axis=-1)
    f = -m.mbar1 * m.mbar2 / d + np.einsum("...i,...i->...", state.y1, state.y2) / m.m0
    return h1 + h2 + m.mu * f
