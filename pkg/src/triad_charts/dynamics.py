"""Direct integration of the full three-body Hamiltonian in heliocentric
Cartesian variables, and the chart and secular cross-validations built on it."""
from dataclasses import dataclass, field, replace
import csv

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import CollisionError, DomainError
from .jrd import cartesian_to_jrd
from .kepler import CartesianState, hamiltonian, two_body_energy, wrap_angle
from .perihelia import cartesian_to_p, reflect_R2minus_cartesian

ENCOUNTER_FRAC = 1e-3
CSV_HEADER = ["t", "y1_1", "y1_2", "y1_3", "y2_1", "y2_2", "y2_3",
              "x1_1", "x1_2", "x1_3", "x2_1", "x2_2", "x2_3", "E", "C1", "C2", "C3"]
# fourth-order triple-jump weights for the symmetric second-order step
YOSHIDA4 = (1 / (2 - 2 ** (1 / 3)), -2 ** (1 / 3) / (2 - 2 ** (1 / 3)), 1 / (2 - 2 ** (1 / 3)))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 12): y1, y2, x1, x2
    energy: np.ndarray
    C: np.ndarray
    masses: object
    scheme: str
    flag: str = None
    info: dict = field(default_factory=dict)

    @property
    def cartesian(self):
        return CartesianState.from_array(self.states)

    @property
    def energy_drift(self):
        return float(np.abs(self.energy - self.energy[0]).max() / abs(self.energy[0]))

    @property
    def C_drift(self):
        return float(np.linalg.norm(self.C - self.C[0], axis=1).max() / np.linalg.norm(self.C[0]))

    def to_csv(self, path):
        rows = np.column_stack([self.times, self.states, self.energy, self.C])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([repr(float(v)) for v in r])


def diagnostics(states, masses):
    s = CartesianState.from_array(states)
    return np.asarray(hamiltonian(s, masses)), np.asarray(s.C)


def hamilton_rhs(z, masses):
    """(ydot, xdot) of the full Hamiltonian for states (..., 12)."""
    m = masses
    y1, y2, x1, x2 = z[..., 0:3], z[..., 3:6], z[..., 6:9], z[..., 9:12]
    r1 = np.linalg.norm(x1, axis=-1)[..., None]
    r2 = np.linalg.norm(x2, axis=-1)[..., None]
    d = x1 - x2
    dn = np.linalg.norm(d, axis=-1)[..., None]
    k = m.mu * m.mbar1 * m.mbar2 * d / dn ** 3
    out = np.empty_like(z)
    out[..., 0:3] = -m.mbar1 * m.M1 * x1 / r1 ** 3 - k
    out[..., 3:6] = -m.mbar2 * m.M2 * x2 / r2 ** 3 + k
    out[..., 6:9] = y1 / m.mbar1 + m.mu * y2 / m.m0
    out[..., 9:12] = y2 / m.mbar2 + m.mu * y1 / m.m0
    return out


def _inner_a(state, masses):
    E = float(two_body_energy(state.x1, state.y1, masses.mbar1, masses.M1))
    if not E < 0:
        raise DomainError("inner orbit is not elliptic")
    return -masses.mbar1 * masses.M1 / (2 * E)


def inner_period(state, masses):
    return float(2 * np.pi * np.sqrt(_inner_a(state, masses) ** 3 / masses.M1))


def encounter_threshold(state, masses):
    return ENCOUNTER_FRAC * _inner_a(state, masses)


def integrate(state0, masses, dt, T, scheme="dop853", mu=None, rtol=1e-13, atol=1e-15,
              every=1, steps_check=True):
    """Integrate from state0 over [0, T] (T < 0 integrates backwards).

    scheme: 'dop853' (adaptive, sampled every dt), 'wh' (second-order
    Wisdom-Holman splitting with exact Kepler drifts) or 'wh4' (its
    fourth-order triple-jump composition); for the splitting schemes dt is
    the step and `every` the sampling stride. A close encounter
    (|x1 - x2| < 1e-3 a1) truncates the trajectory with flag 'encounter'."""
    if mu is not None:
        masses = masses.decoupled() if mu == 0 else replace(masses, mu=mu)
    s0 = state0 if isinstance(state0, CartesianState) else CartesianState.from_array(state0)
    z0 = np.asarray(s0.as_array(), dtype=float).reshape(12)
    s0 = CartesianState.from_array(z0)
    s0.check_collisions()
    dmin = encounter_threshold(s0, masses)
    if np.linalg.norm(s0.x1 - s0.x2) < dmin:
        raise CollisionError("initial state inside the close-encounter threshold")
    if dt <= 0 or T == 0:
        raise DomainError("need dt > 0 and T != 0")
    P = inner_period(s0, masses)
    if steps_check and scheme != "dop853" and P / dt < 200 * (1 - 1e-9):
        raise DomainError(f"dt = {dt:.3g} gives {P / dt:.1f} < 200 steps per inner period")
    flag = None
    direction = np.sign(T)
    if scheme == "dop853":
        n = int(np.floor(abs(T) / dt + 1e-9))
        t_eval = direction * np.minimum(dt * np.arange(n + 1), abs(T))
        if abs(t_eval[-1]) < abs(T) * (1 - 1e-12):
            t_eval = np.append(t_eval, T)

        def enc(t, z):
            return np.linalg.norm(z[6:9] - z[9:12]) - dmin
        enc.terminal = True
        sol = solve_ivp(lambda t, z: hamilton_rhs(z, masses), (0.0, T), z0, method="DOP853",
                        t_eval=t_eval, rtol=rtol, atol=atol, events=enc)
        times, states = sol.t, sol.y.T
        if sol.status == 1:
            flag = "encounter"
        elif sol.status < 0:
            raise DomainError(f"integration failed: {sol.message}")
    elif scheme in ("wh", "wh4"):
        w = (1.0,) if scheme == "wh" else YOSHIDA4
        nsteps = int(round(abs(T) / dt))
        h = direction * dt
        states, status = kernels.wh_run(z0, masses.mbar1, masses.mbar2, masses.M1, masses.M2,
                                        masses.mu, masses.m0, h, nsteps, every, w)
        times = h * every * np.arange(states.shape[0])
        if status:
            flag = "non-elliptic drift"
        d = np.linalg.norm(states[:, 6:9] - states[:, 9:12], axis=1)
        close = np.nonzero(d < dmin)[0]
        if close.size:
            states, times, flag = states[:close[0]], times[:close[0]], "encounter"
    else:
        raise DomainError(f"unknown scheme {scheme!r}")
    E, C = diagnostics(states, masses)
    return Trajectory(np.asarray(times), np.asarray(states), E, C, masses, scheme, flag,
                      dict(inner_period=P, dt=dt))


def reflect_state(z):
    """The reflection y -> -y applied to every position and momentum vector."""
    return reflect_R2minus_cartesian(CartesianState.from_array(np.asarray(z))).as_array()


# ---------------------------------------------------------- chart validation

@dataclass
class CyclicReport:
    chart: str
    G_drift: float
    Z_drift: float
    angle_spread: dict
    segments: int
    values: dict

    @property
    def flat(self):
        return max(self.G_drift, self.Z_drift)


def _pullback(chart, states, masses):
    s = CartesianState.from_array(states)
    if chart == "jrd":
        return cartesian_to_jrd(s, masses)
    if chart == "p":
        return cartesian_to_p(s, masses)
    raise DomainError(f"no pullback for chart {chart!r}")


def cyclic_validation(traj, chart):
    """Pull every state back through the chart and report the relative drift
    of the cyclic actions G and Z along the trajectory; the conjugate angles
    (gamma or g) are reported as their spread, they are free to move."""
    c = _pullback(chart, traj.states, traj.masses)
    G, Z = np.asarray(c.G), np.asarray(c.Z)
    ref = abs(G[0])
    ang = {}
    for name in ("gamma1", "gamma2", "g2", "g", "theta", "Theta", "G1", "G2"):
        if name in c.fields:
            v = np.unwrap(np.asarray(getattr(c, name))) if name in c.angles else np.asarray(getattr(c, name))
            ang[name] = float(v.max() - v.min())
    fin = np.isfinite(G) & np.isfinite(Z)
    segs = 1 + int(np.count_nonzero(np.diff(fin.astype(int)) != 0))
    return CyclicReport(chart, float(np.nanmax(np.abs(G - G[0])) / ref),
                        float(np.nanmax(np.abs(Z - Z[0])) / ref), ang, segs,
                        dict(G=G, Z=Z))


def equivariance_defect(state0, masses, dt, T, scheme="dop853"):
    """max |reflect(traj(z0)) - traj(reflect(z0))| relative to the state scale."""
    z0 = np.asarray(state0.as_array() if isinstance(state0, CartesianState) else state0)
    a = integrate(z0, masses, dt, T, scheme)
    b = integrate(reflect_state(z0), masses, dt, T, scheme)
    n = min(len(a.times), len(b.times))
    diff = reflect_state(a.states[:n]) - b.states[:n]
    return float(np.abs(diff).max() / np.abs(a.states).max())


def reversibility_defect(state0, masses, dt, T, scheme="dop853"):
    z0 = np.asarray(state0.as_array() if isinstance(state0, CartesianState) else state0, float)
    a = integrate(z0, masses, dt, T, scheme)
    b = integrate(a.states[-1], masses, dt, -a.times[-1], scheme)
    return float(np.abs(b.states[-1] - z0).max() / np.abs(z0).max())


# -------------------------------------------------------- secular comparison

@dataclass
class SecularComparison:
    rate_full: float
    rate_secular: float
    rel_error: float
    t: np.ndarray
    dist: np.ndarray
    dist_secular: np.ndarray
    amplitude_error: float
    window: float
    info: dict = field(default_factory=dict)


def window_average(t, v, width):
    """Mean of v over consecutive windows of the given width; returns the
    window centers and means (used to strip short-period terms)."""
    idx = np.floor((t - t[0]) / width).astype(int)
    n = idx.max()
    keep = idx < n  # drop the incomplete last window
    cnt = np.bincount(idx[keep], minlength=n)
    tc = np.bincount(idx[keep], weights=t[keep], minlength=n) / cnt
    out = [np.bincount(idx[keep], weights=vv[keep], minlength=n) / cnt for vv in np.atleast_2d(v)]
    return tc, np.array(out)


def secular_comparison(traj, pt, omega, rate, window, efolds=1.0, flow=None):
    """Departure of the window-averaged (Theta, theta) from the equilibrium,
    measured in the normal coordinates (p0, q0), against the secular
    exponent `rate`: fitted log-slope over the first `efolds` e-foldings."""
    from .secular import to_pq

    c = cartesian_to_p(traj.cartesian, traj.masses)
    # (Theta, theta) about the coplanar equilibrium
    Th = np.asarray(c.Theta)
    th = np.asarray(wrap_angle(np.asarray(c.theta)))
    tc, (Ta, ta) = window_average(traj.times, np.vstack([Th, th]), window)
    P, Q = to_pq(Ta, ta, omega)
    dist = np.hypot(P, Q)
    T1 = efolds / rate
    m = tc <= tc[0] + T1
    slope = np.polyfit(tc[m], np.log(dist[m]), 1)[0]
    sec = dist[0] * np.exp(rate * (tc - tc[0]))
    amp = float(np.abs(dist[m] / sec[m] - 1).max())
    return SecularComparison(float(slope), float(rate), float(abs(slope - rate) / rate), tc,
                             dist, sec, amp, float(window), dict(n_windows=int(m.sum())))
