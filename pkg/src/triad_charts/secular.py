"""Averaged perturbation, multipole split, quadrupole closed forms, the
retrograde coplanar equilibrium, the truncated secular flow and its whiskers."""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .canonicity import get_chart
from .errors import CollisionError, DomainError
from .kepler import CartesianState, kepler_energy, semi_major
from .perihelia import PCoords, cubic_a, g1_of_p, gstar

TWO_PI = 2 * np.pi

# index of the two fast angles in each chart's array layout
FAST_ANGLES = {"jrd": (6, 7), "p": (6, 7), "rps_pi": (6, 7)}


def perturbation_value(s, masses, tol=0.0):
    """(direct, indirect, total) coefficient of mu in the Hamiltonian."""
    x1, x2 = np.asarray(s.x1), np.asarray(s.x2)
    d = np.linalg.norm(x1 - x2, axis=-1)
    if np.any(d <= tol) or np.any(np.linalg.norm(x1, axis=-1) <= tol) \
            or np.any(np.linalg.norm(x2, axis=-1) <= tol):
        raise CollisionError("state on the collision set")
    direct = -masses.mbar1 * masses.mbar2 / d
    indirect = np.einsum("...i,...i->...", s.y1, s.y2) / masses.m0
    return direct, indirect, direct + indirect


def body_tables(chart, points, masses, N):
    """Per-body samples over the fast angles.

    Body j depends on its own fast angle only, so one forward evaluation
    with both fast angles set to 2 pi k/N gives both tables. Returns
    (x1, y1, x2, y2), each (S, N, 3); complex points are supported by the
    rps_pi array map."""
    ch = get_chart(chart)
    z = np.atleast_2d(np.asarray(points))
    S = z.shape[0]
    i1, i2 = FAST_ANGLES[ch.name]
    th = TWO_PI * np.arange(N) / N
    zz = np.repeat(z[:, None, :], N, axis=1)
    zz[:, :, i1] = zz[:, :, i1] + th
    zz[:, :, i2] = zz[:, :, i2] + th
    w = ch.forward(zz.reshape(S * N, -1), masses).reshape(S, N, 12)
    return w[..., 6:9], w[..., 0:3], w[..., 9:12], w[..., 3:6]


def _average(chart, points, masses, N):
    x1, y1, x2, y2 = body_tables(chart, points, masses, N)
    return kernels.pair_average(x1, y1, x2, y2, masses.mbar1 * masses.mbar2, 1.0 / masses.m0)


@dataclass
class SecularAverage:
    direct: np.ndarray
    indirect: np.ndarray
    N: int
    change: float

    @property
    def total(self):
        return self.direct + self.indirect


def secular_average(chart, points, masses, N=64, tol=1e-10, Nmax=1024, chunk=4096):
    """Average of the perturbation over the two fast angles by an N x N
    periodic trapezoid rule, doubling N until the change is below tol
    (relative to the largest direct value)."""
    z = np.atleast_2d(np.asarray(points))
    def run(n):
        return np.concatenate([_average(chart, z[k:k + chunk], masses, n)
                               for k in range(0, z.shape[0], chunk)])
    prev = run(N)
    while True:
        cur = run(2 * N)
        scale = np.abs(cur[:, 0]).max()
        change = float(np.abs(cur - prev).max() / scale)
        N *= 2
        if change < tol or 2 * N > Nmax:
            break
        prev = cur
    if change >= tol:
        raise DomainError(f"average not converged at N={N} (change {change:.2e})")
    return SecularAverage(cur[:, 0], cur[:, 1], N, change)


def _multipole(chart, points, masses, N):
    x1, _, x2, _ = body_tables(chart, points, masses, N)
    x1 = np.real_if_close(x1)
    x2 = np.real_if_close(x2)
    L2 = np.atleast_2d(np.asarray(points))[:, 1]
    a2 = semi_major(L2, masses.mbar2, masses.M2)
    r2 = np.sqrt(np.einsum("snk,snk->sn", x2, x2))
    f0 = a2 * np.mean(1 / r2, axis=1)
    f1 = a2 * np.einsum("sk,sk->s", x1.mean(axis=1), (x2 / r2[..., None] ** 3).mean(axis=1))
    M1 = np.einsum("sni,snj->sij", x1, x1) / N
    N2 = np.einsum("sni,snj->sij", x2 / r2[..., None] ** 5, x2) / N
    f2 = a2 * 0.5 * (3 * np.einsum("sij,sij->s", M1, N2)
                     - np.trace(M1, axis1=1, axis2=2) * np.mean(1 / r2 ** 3, axis=1))
    return np.stack([f0, f1, f2])


def multipole_average(chart, points, masses, N=64, tol=1e-14, Nmax=1 << 14):
    """(f0, f1, f2) of the small-alpha expansion of the averaged Newtonian
    term, in units of -mbar1 mbar2 / a2.

    The expansion of 1/|x1 - x2| in |x1|/|x2| separates, so each term is a
    contraction of per-body moments. N doubles until f2 settles to tol
    relative."""
    prev = _multipole(chart, points, masses, N)
    while N < Nmax:
        N *= 2
        cur = _multipole(chart, points, masses, N)
        if np.all(np.abs(cur - prev) <= tol * np.maximum(np.abs(cur[2]), 1e-300) + 1e-15):
            break
        prev = cur
    return cur[0], cur[1], cur[2]


def quadrupole_closed_form(C1, C2, P1, Lambda1, Lambda2, alpha):
    """Quadrupole term of the averaged Newtonian part as a function of the
    two angular momenta and the inner perihelion direction."""
    C1, C2, P1 = (np.asarray(v, dtype=float) for v in (C1, C2, P1))
    g2 = np.linalg.norm(C2, axis=-1)
    if np.any(g2 == 0):
        raise DomainError("|C2| = 0")
    pc = np.einsum("...i,...i->...", P1, C2)
    g1sq = np.einsum("...i,...i->...", C1, C1)
    tri = np.einsum("...i,...i->...", np.cross(C1, C2), P1)
    br = 5 * (3 * pc ** 2 - g2 ** 2) * Lambda1 ** 2 - 3 * (4 * pc ** 2 - g2 ** 2) * g1sq + 3 * tri ** 2
    return -alpha ** 2 / 8 * Lambda2 ** 3 / (Lambda1 ** 2 * g2 ** 5) * br


def _K(L1, L2, G2, power):
    return -Lambda_ratio(L1, L2) / G2 ** power


def Lambda_ratio(L1, L2):
    return L2 ** 3 / (8 * L1 ** 2)


def quadrupole_p(Lambda1, Lambda2, G2, Theta, theta, G):
    """Split f_p^(2) = alpha^2 (P0 + P1), P1 vanishing at (Theta, theta) = 0."""
    L1, L2, G2, Th, th, G = (np.asarray(v, dtype=float) for v in
                             (Lambda1, Lambda2, G2, Theta, theta, G))
    if np.any(G2 == 0):
        raise DomainError("G2 = 0")
    P0 = _K(L1, L2, G2, 3) * (-5 * L1 ** 2 + 3 * (G + G2) ** 2)
    U = G2 ** 2 - Th ** 2
    V = G ** 2 - Th ** 2
    S = G ** 2 + G2 ** 2 - 2 * Th ** 2 + 2 * np.sqrt(U * V) * np.cos(th)
    P1 = _K(L1, L2, G2, 5) * (15 * L1 ** 2 * Th ** 2 - 3 * (4 * Th ** 2 - G2 ** 2) * S
                              - 3 * G2 ** 2 * (G + G2) ** 2 + 3 * U * V * np.sin(th) ** 2)
    return P0, P1


def quadrupole_p1_grad(Lambda1, Lambda2, G2, Theta, theta, G):
    """(dP1/dTheta, dP1/dtheta), analytic."""
    L1, L2, G2, Th, th, G = (np.asarray(v, dtype=float) for v in
                             (Lambda1, Lambda2, G2, Theta, theta, G))
    K = _K(L1, L2, G2, 5)
    U = G2 ** 2 - Th ** 2
    V = G ** 2 - Th ** 2
    W = np.sqrt(U * V)
    S = G ** 2 + G2 ** 2 - 2 * Th ** 2 + 2 * W * np.cos(th)
    dW = -Th * (U + V) / W
    dS = -4 * Th + 2 * np.cos(th) * dW
    dTh = K * (30 * L1 ** 2 * Th - 24 * Th * S - 3 * (4 * Th ** 2 - G2 ** 2) * dS
               - 6 * Th * (U + V) * np.sin(th) ** 2)
    dth = K * (6 * (4 * Th ** 2 - G2 ** 2) * W * np.sin(th) + 6 * U * V * np.sin(th) * np.cos(th))
    return dTh, dth


# ------------------------------------------------------------ equilibrium

@dataclass
class EquilibriumReport:
    a_coeff: float
    b_coeff: float
    classification: str
    Omega: float = float("nan")
    omega: float = float("nan")
    Gstar: float = float("nan")
    case: str = ""
    Gu: tuple = (float("nan"), float("nan"))
    Gu_empty: bool = True
    a_hat: float = float("nan")
    b_hat: float = float("nan")
    a_hat_bound: float = float("nan")
    aligned_admissible: bool = True
    aligned_classification: str = ""
    notes: list = field(default_factory=list)

    def as_dict(self):
        d = dict(self.__dict__)
        d["Gu"] = list(d["Gu"])
        return d


def omega_Omega(Lambda1, Lambda2, G2, G):
    """The hyperbolic constants of the retrograde equilibrium (a > 0, b < 0)."""
    a = cubic_a(Lambda1, G2, G)
    b = G - G2
    if not (a > 0 and b < 0):
        raise DomainError("omega, Omega defined only for a > 0, b < 0")
    Omega = -0.75 * Lambda2 ** 3 / (Lambda1 ** 2 * G2 ** 4) * np.sqrt(a * (G2 - G))
    omega = G * G2 * np.sqrt((G2 - G) / a)
    return float(Omega), float(omega)


def equilibrium_analysis(Lambda1, Lambda2, G2, G, c=0.9, alpha_plus=0.1, tol=1e-12):
    """Classify the retrograde coplanar equilibrium (Theta, theta) = (0, 0)
    and the aligned ones (0, pi) from the quadratic part of P1."""
    a = float(cubic_a(Lambda1, G2, G))
    b = float(G - G2)
    scale_a = 5 * Lambda1 ** 2 * G
    rep = EquilibriumReport(a, b, "degenerate")
    if abs(a) <= tol * scale_a or abs(b) <= tol * max(G, G2):
        rep.classification = "degenerate"
    elif a * b < 0:
        rep.classification = "hyperbolic"
    else:
        rep.classification = "elliptic"
    if a > 0 and b < 0:
        rep.Omega, rep.omega = omega_Omega(Lambda1, Lambda2, G2, G)
    try:
        rep.Gstar = gstar(Lambda1, G)
    except DomainError as e:
        rep.notes.append(str(e))
    kappa = 2 / c * np.sqrt(alpha_plus)
    Gm = kappa * Lambda2
    Gp = min(Lambda1 - G, Lambda2)
    if Lambda1 < 2 * G:
        # G* < G: the window (G*, G) cannot meet (G_-, G_+)
        rep.case = "a"
        lo, hi = max(rep.Gstar, Gm), min(G, Gp)
        rep.Gu = (float(lo), float(hi))
        rep.Gu_empty = bool(not lo < hi)
    else:
        rep.case = "b"
        lo, hi = max(Gm, G), min(Lambda2, rep.Gstar)
        rep.Gu = (float(lo), float(hi))
        rep.Gu_empty = bool(not lo < hi)
    rep.a_hat = float(5 * Lambda1 ** 2 * G - (G - G2) ** 2 * (4 * G - G2))
    rep.b_hat = float(G + G2)
    rep.a_hat_bound = float(Lambda1 ** 2 * (G + G2))
    # the aligned equilibria need |G - G2| = G1 < Lambda1
    rep.aligned_admissible = bool(abs(G - G2) < Lambda1)
    if not rep.aligned_admissible:
        rep.notes.append("aligned equilibria need |G - G2| < Lambda1")
    rep.aligned_classification = "elliptic" if rep.a_hat > 0 and rep.b_hat > 0 else \
        ("hyperbolic" if rep.a_hat * rep.b_hat < 0 else "degenerate")
    return rep


def p1_hessian(Lambda1, Lambda2, G2, G, theta0=0.0, h=2e-2):
    """Central-difference Hessian of P1 in (Theta, theta) at (0, theta0),
    two Richardson steps (error O(h^6), so a large h keeps roundoff small)."""
    def H(hh):
        hT = hh * G
        f = lambda T, t: float(quadrupole_p(Lambda1, Lambda2, G2, T, theta0 + t, G)[1])
        f00 = f(0, 0)
        dTT = (f(hT, 0) - 2 * f00 + f(-hT, 0)) / hT ** 2
        dtt = (f(0, hh) - 2 * f00 + f(0, -hh)) / hh ** 2
        dTt = (f(hT, hh) - f(hT, -hh) - f(-hT, hh) + f(-hT, -hh)) / (4 * hT * hh)
        return np.array([[dTT, dTt], [dTt, dtt]])
    H1, H2, H4 = H(h), H(h / 2), H(h / 4)
    R1 = (4 * H2 - H1) / 3
    R2 = (4 * H4 - H2) / 3
    return (16 * R2 - R1) / 15


def aligned_quadratic(Lambda1, Lambda2, G2, G):
    """Coefficients of Theta^2 and theta'^2 in P1 around (0, pi), theta' = theta - pi,
    from the aligned counterparts a-hat, b-hat."""
    K = _K(Lambda1, Lambda2, G2, 5)
    a_hat = 5 * Lambda1 ** 2 * G - (G - G2) ** 2 * (4 * G - G2)
    return K * 3 / G * a_hat, K * 3 * G * G2 ** 2 * (G + G2)


# --------------------------------------------------------- truncated flow

@dataclass(frozen=True)
class SecularPoint:
    Lambda1: float
    Lambda2: float
    G2: float
    G: float
    Theta: float = 0.0
    theta: float = 0.0
    g2: float = 0.0


def heff_scale(pt, masses):
    """mu-free factor k with h_eff = h_k - mu k (1 + alpha^2 (P0 + P1))."""
    a1 = semi_major(pt.Lambda1, masses.mbar1, masses.M1)
    a2 = semi_major(pt.Lambda2, masses.mbar2, masses.M2)
    return masses.mbar1 * masses.mbar2 / a2, a1 / a2


def heff(pt, masses, mu, Theta, theta):
    k, alpha = heff_scale(pt, masses)
    P0, P1 = quadrupole_p(pt.Lambda1, pt.Lambda2, pt.G2, Theta, theta, pt.G)
    hk = kepler_energy(pt.Lambda1, masses.mbar1, masses.M1) + \
        kepler_energy(pt.Lambda2, masses.mbar2, masses.M2)
    return hk - mu * k * (1 + alpha ** 2 * (P0 + P1))


def secular_rate(pt, masses, mu):
    """Linearized exponent mu k alpha^2 |Omega| of the retrograde equilibrium."""
    k, alpha = heff_scale(pt, masses)
    Omega, _ = omega_Omega(pt.Lambda1, pt.Lambda2, pt.G2, pt.G)
    return mu * k * alpha ** 2 * abs(Omega)


def to_pq(Theta, theta, omega):
    s = np.sqrt(2 * omega)
    return (Theta - omega * theta) / s, (Theta + omega * theta) / s


def from_pq(p0, q0, omega):
    s = np.sqrt(2 * omega)
    return s * (p0 + q0) / 2, s * (q0 - p0) / (2 * omega)


@dataclass
class Flow:
    t: np.ndarray
    Theta: np.ndarray
    theta: np.ndarray
    h: np.ndarray
    drift: float
    exited: bool


def heff_flow(pt, masses, mu, tspan, n_out=400, rtol=1e-12, atol=1e-15, bound=None):
    """Integrate the one-degree-of-freedom truncation in (Theta, theta) at
    fixed (Lambda1, Lambda2, G2, G) with an adaptive 8th-order scheme.

    Stops (exited=True) when the orbit leaves |Theta| < G/2, |theta| < pi/2."""
    k, alpha = heff_scale(pt, masses)
    c = mu * k * alpha ** 2
    args = (pt.Lambda1, pt.Lambda2, pt.G2)

    def rhs(t, u):
        dTh, dth = quadrupole_p1_grad(*args, u[0], u[1], pt.G)
        # H = -c P1: Theta' = -dH/dtheta, theta' = dH/dTheta
        return [c * dth, -c * dTh]

    lim = (pt.G / 2, np.pi / 2) if bound is None else bound

    def leave(t, u):
        return min(lim[0] - abs(u[0]), lim[1] - abs(u[1]))
    leave.terminal = True

    t_eval = np.linspace(tspan[0], tspan[1], n_out)
    sol = solve_ivp(rhs, tspan, [pt.Theta, pt.theta], method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol, events=leave)
    Th, th = sol.y
    h = heff(pt, masses, mu, Th, th)
    h0 = heff(pt, masses, mu, pt.Theta, pt.theta)
    # drift measured against the mu part, the only varying piece
    drift = float(np.abs(h - h0).max() / abs(mu * k)) if len(h) else 0.0
    return Flow(sol.t, Th, th, h, drift, bool(sol.status == 1))


def _p1_at_pq(pt, p0, q0, omega):
    Th, th = from_pq(p0, q0, omega)
    return float(quadrupole_p(pt.Lambda1, pt.Lambda2, pt.G2, Th, th, pt.G)[1])


def separatrix_point(pt, branch, s, omega, tol=1e-15):
    """Point of the stable (branch 's', given p0 = s) or unstable
    (branch 'u', given q0 = s) manifold: the level P1 = 0 through the
    equilibrium, solved by Newton for the other coordinate."""
    if branch == "s":
        f = lambda q: _p1_at_pq(pt, s, q, omega)
    else:
        f = lambda p: _p1_at_pq(pt, p, s, omega)
    x = 0.0
    for _ in range(60):
        h = 1e-7 * max(abs(s), 1e-12)
        d = (f(x + h) - f(x - h)) / (2 * h)
        dx = -f(x) / d
        x += dx
        if abs(dx) < tol * max(abs(s), 1e-300):
            break
    return (s, x) if branch == "s" else (x, s)


@dataclass
class WhiskerReport:
    rate: float
    fits: dict
    max_rel_error: float
    monotone: bool
    samples: dict


def whisker_local(pt, masses, mu, eps, n=4, efolds=2.0):
    """Sample both local whiskers at distance up to eps (in (p0, q0)),
    integrate them towards the torus (forward for the stable one, backward
    for the unstable one) over `efolds` e-foldings and fit the exponent."""
    rep = equilibrium_analysis(pt.Lambda1, pt.Lambda2, pt.G2, pt.G)
    if rep.classification != "hyperbolic" or not (rep.a_coeff > 0 and rep.b_coeff < 0):
        raise DomainError("whiskers need the hyperbolic regime (a > 0, b < 0)")
    omega = rep.omega
    lam = secular_rate(pt, masses, mu)
    T = efolds / lam
    fits, samples = {}, {}
    worst, mono = 0.0, True
    for branch, sign in (("s", 1.0), ("u", -1.0)):
        for j, s in enumerate(np.linspace(-eps, eps, 2 * n + 1)):
            if s == 0:
                continue
            p0, q0 = separatrix_point(pt, branch, s, omega)
            Th, th = from_pq(p0, q0, omega)
            start = SecularPoint(pt.Lambda1, pt.Lambda2, pt.G2, pt.G, Th, th)
            fl = heff_flow(start, masses, mu, (0.0, sign * T), n_out=200)
            P, Q = to_pq(fl.Theta, fl.theta, omega)
            dist = np.hypot(P, Q)
            mono = mono and bool(np.all(np.diff(dist) < 0))
            slope = np.polyfit(np.abs(fl.t), np.log(dist), 1)[0]
            err = abs(-slope - lam) / lam
            worst = max(worst, err)
            fits[(branch, float(s))] = float(-slope)
            samples[(branch, float(s))] = (fl.t, dist)
    return WhiskerReport(lam, fits, worst, mono, samples)


def torus_frequencies(pt, masses, mu, h=1e-6):
    """d h_eff / d(Lambda1, Lambda2, G2) at (Theta, theta) = (0, 0)."""
    out = []
    for k in ("Lambda1", "Lambda2", "G2"):
        v = getattr(pt, k)
        d = h * v
        up = SecularPoint(**{**pt.__dict__, k: v + d})
        dn = SecularPoint(**{**pt.__dict__, k: v - d})
        out.append((heff(up, masses, mu, 0.0, 0.0) - heff(dn, masses, mu, 0.0, 0.0)) / (2 * d))
    return np.array(out, dtype=float)


def p_point(pt, ell1=0.0, ell2=0.0, Z=None, g=0.0, zeta=0.0):
    """The p-chart array of a secular point (Z defaults to G/2)."""
    Z = pt.G / 2 if Z is None else Z
    return PCoords(Lambda1=pt.Lambda1, Lambda2=pt.Lambda2, G2=pt.G2, Theta=pt.Theta,
                   G=pt.G, Z=Z, ell1=ell1, ell2=ell2, g2=pt.g2, theta=pt.theta,
                   g=g, zeta=zeta).as_array()


def p_point_g1(pt):
    return float(g1_of_p(pt.G, pt.G2, pt.Theta, pt.theta))


def p_point_state(pt, masses, **kw):
    return CartesianState.from_array(get_chart("p").forward(p_point(pt, **kw), masses))
