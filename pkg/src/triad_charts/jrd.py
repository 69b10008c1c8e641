"""Jacobi-Radau-Deprit action-angle chart for two planets."""
import numpy as np

from .coords import Coords
from .errors import DomainError, SingularityError
from .kepler import (CartesianState, inclination_triple, matvec,
                     orbital_state, oriented_angle, osculating_elements,
                     rotation)

SING_RTOL = 1e-6


class JrdCoords(Coords):
    fields = ("Lambda1", "Lambda2", "G1", "G2", "G", "Z",
              "ell1", "ell2", "gamma1", "gamma2", "gamma", "zeta")
    momenta = fields[:6]
    positions = fields[6:]
    angles = positions


def jrd_singularities(c, rtol=SING_RTOL):
    """Names of the singular-set equalities the point is within rtol of."""
    L1, L2, G1, G2, G, Z = (np.asarray(getattr(c, k), dtype=float)
                            for k in JrdCoords.momenta)
    scale = np.maximum.reduce([np.abs(L1), np.abs(L2), np.abs(G)])
    eps = rtol * scale
    tests = [
        ("G1 = Lambda1", G1 >= L1 - eps),
        ("G2 = Lambda2", G2 >= L2 - eps),
        ("G = G1 + G2", G >= G1 + G2 - eps),
        ("G = G1 - G2", G <= G1 - G2 + eps),
        ("G = G2 - G1", G <= G2 - G1 + eps),
        ("Z = G", Z >= G - eps),
        ("Z = -G", Z <= -G + eps),
        ("G1 = 0", G1 <= eps),
        ("G2 = 0", G2 <= eps),
        ("G = 0", G <= eps),
    ]
    return [name for name, bad in tests if np.any(bad)]


def _frame(frame):
    if frame is None:
        return np.eye(3)
    K = np.asarray(frame, dtype=float)
    if K.shape != (3, 3) or not np.allclose(K @ K.T, np.eye(3), atol=1e-12):
        raise DomainError("frame must be an orthonormal 3x3 matrix (rows k1, k2, k3)")
    if np.linalg.det(K) < 0:
        raise DomainError("frame must be right handed")
    return K


def jrd_forward_array(z, masses):
    """Unchecked forward map on a (..., 12) array -> (..., 12) Cartesian array."""
    z = np.asarray(z, dtype=float)
    L1, L2, G1, G2, G, Z, l1, l2, g1, g2, g, zt = np.moveaxis(z, -1, 0)
    i, i1, i2 = inclination_triple(Z, G, G1, G2, rtol=0.0)
    outer = rotation(3, zt) @ rotation(1, i) @ rotation(3, g)
    out = []
    for (L, Gj, lj, gj, ij, sj, j) in ((L1, G1, l1, g1, i1, 1, 1),
                                      (L2, G2, l2, g2, i2, -1, 2)):
        mbar, M = masses.body(j)
        xo, yo = orbital_state(L, Gj, lj, mbar, M)
        R = outer @ rotation(1, sj * ij) @ rotation(3, gj)
        out.append((matvec(R, xo), matvec(R, yo)))
    (x1, y1), (x2, y2) = out
    return np.concatenate([y1, y2, x1, x2], axis=-1)


def jrd_to_cartesian(c, masses, frame=None, rtol=SING_RTOL):
    """Cartesian state of a jrd point; refuses points near the singular set."""
    bad = jrd_singularities(c, rtol)
    if bad:
        raise SingularityError("jrd chart singular: " + ", ".join(bad))
    w = jrd_forward_array(c.as_array(), masses)
    K = _frame(frame)
    if frame is not None:
        w = np.concatenate([w[..., 3 * k:3 * k + 3] @ K for k in range(4)], axis=-1)
    return CartesianState.from_array(w)


def cartesian_to_jrd(s, masses, frame=None, node_tol=1e-12):
    """Inverse chart: nodes nu1 = k3 x C and nu = C x C1."""
    K = _frame(frame)
    y1, y2, x1, x2 = (np.asarray(v, dtype=float) @ K.T for v in (s.y1, s.y2, s.x1, s.x2))
    el = [osculating_elements(x1, y1, masses.mbar1, masses.M1),
          osculating_elements(x2, y2, masses.mbar2, masses.M2)]
    C1, C2 = el[0]["C"], el[1]["C"]
    C = C1 + C2
    G = np.linalg.norm(C, axis=-1)
    k1 = np.broadcast_to([1.0, 0.0, 0.0], C.shape)
    k3 = np.broadcast_to([0.0, 0.0, 1.0], C.shape)
    nu1 = np.cross(k3, C)
    nu = np.cross(C, C1)
    if np.any(np.linalg.norm(nu1, axis=-1) <= node_tol * G):
        raise SingularityError("node nu1 = k3 x C vanishes (C parallel to k3)")
    if np.any(np.linalg.norm(nu, axis=-1) <= node_tol * G * el[0]["G"]):
        raise SingularityError("node nu = C x C1 vanishes (C parallel to C1)")
    return JrdCoords(
        Lambda1=el[0]["Lambda"], Lambda2=el[1]["Lambda"],
        G1=el[0]["G"], G2=el[1]["G"], G=G, Z=C[..., 2],
        ell1=el[0]["ell"], ell2=el[1]["ell"],
        gamma1=oriented_angle(C1, nu, el[0]["P"]),
        gamma2=oriented_angle(C2, nu, el[1]["P"]),
        gamma=oriented_angle(C, nu1, nu),
        zeta=oriented_angle(k3, k1, nu1),
    )


def sample_jrd(n, rng, Lambda1=(1.2, 1.6), Lambda2=(0.8, 1.1), margin=0.1):
    """Random points well inside the jrd domain (all nodes non-vanishing)."""
    L1 = rng.uniform(*Lambda1, n)
    L2 = rng.uniform(*Lambda2, n)
    G1 = L1 * rng.uniform(0.6, 1 - margin, n)
    G2 = L2 * rng.uniform(0.6, 1 - margin, n)
    lo, hi = np.abs(G1 - G2), G1 + G2
    w = hi - lo
    G = rng.uniform(lo + margin * w, hi - margin * w)
    Z = G * rng.uniform(-1 + margin, 1 - margin, n)
    ang = rng.uniform(0, 2 * np.pi, (n, 6))
    return JrdCoords(Lambda1=L1, Lambda2=L2, G1=G1, G2=G2, G=G, Z=Z,
                     **{k: ang[:, i] for i, k in enumerate(JrdCoords.positions)})
