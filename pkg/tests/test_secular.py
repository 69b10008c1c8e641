import numpy as np
import pytest
from hypothesis import given, strategies as st

from triad_charts.config import RunConfig
from triad_charts.cli import secular_identities, secular_points
from triad_charts.errors import DomainError
from triad_charts.kepler import (CartesianState, MassConfig, hamiltonian, lambda_of_a, semi_major,
                                 two_body_energy)
from triad_charts.perihelia import cubic_a, p_frames
from triad_charts.secular import (SecularPoint, aligned_quadratic, equilibrium_analysis, from_pq,
                                  heff_flow, multipole_average, omega_Omega, p1_hessian,
                                  perturbation_value, quadrupole_closed_form, quadrupole_p,
                                  secular_average, secular_rate, to_pq, torus_frequencies,
                                  whisker_local)

M = MassConfig(1.0, 1.0, 0.05, 1e-3)


def test_perturbation_antipodal_circular():
    a1, a2 = 1.0, 3.0
    s = CartesianState(np.array([0, 0.3, 0]), np.array([0.4, 0, 0]),
                       np.array([a1, 0, 0]), np.array([-a2, 0, 0]))
    direct, indirect, total = perturbation_value(s, M)
    assert direct == pytest.approx(-M.mbar1 * M.mbar2 / (a1 + a2), rel=1e-15)
    assert indirect == 0
    assert total == direct


def test_perturbation_matches_hamiltonian_split(rng):
    w = rng.normal(size=12)
    w[6:] *= 3
    s = CartesianState.from_array(w)
    h = hamiltonian(s, M) - two_body_energy(s.x1, s.y1, M.mbar1, M.M1) \
        - two_body_energy(s.x2, s.y2, M.mbar2, M.M2)
    assert perturbation_value(s, M)[2] * M.mu == pytest.approx(h, rel=1e-10)


def points(alpha, n=4, seed=1):
    return secular_points(RunConfig(), alpha, n, np.random.default_rng(seed))


@pytest.fixture(scope="module")
def z05():
    return points(0.05)


def test_secular_identities_small_alpha(z05):
    r = secular_identities(RunConfig(), 0.05, 4, np.random.default_rng(2))
    assert r["indirect"] < 1e-10
    assert r["f1"] < 1e-9
    assert r["quadrupole_closed"] < 1e-8
    assert r["quadrupole_p"] < 1e-8
    assert r["dg2"] < 1e-8
    assert r["remainder_over_bound"] < 1


def test_f0_is_one(z05):
    f0, _, _ = multipole_average("p", z05, M)
    assert np.abs(f0 - 1).max() < 1e-12


def test_remainder_is_third_order():
    R = []
    for al in (0.02, 0.04, 0.08):
        z = points(al, n=3, seed=4)
        a2 = semi_major(z[:, 1], M.mbar2, M.M2)
        k = M.mbar1 * M.mbar2 / a2
        av = secular_average("p", z, M, tol=1e-13, Nmax=1 << 13)
        f2 = multipole_average("p", z, M)[2]
        R.append(np.abs(av.direct / (-k) - 1 - f2).max())
    slopes = np.diff(np.log(R)) / np.log(2)
    assert np.all(slopes > 2.5)


def test_quadrupole_closed_form_coplanar_orc():
    z = points(0.05, n=3, seed=6)
    z[:, 3] = 0.0
    z[:, 9] = 0.0
    fr = p_frames(z)
    al = semi_major(z[:, 0], M.mbar1, M.M1) / semi_major(z[:, 1], M.mbar2, M.M2)
    qc = quadrupole_closed_form(fr["C1"], fr["C2"], fr["P1"], z[:, 0], z[:, 1], al)
    P0, P1 = quadrupole_p(z[:, 0], z[:, 1], z[:, 2], 0.0, 0.0, z[:, 4])
    assert np.allclose(P1, 0, atol=1e-15)
    assert np.allclose(qc, al ** 2 * P0, rtol=1e-12)


@given(st.floats(0, 2 * np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_quadrupole_rotation_invariant(a, b, c):
    from triad_charts.kepler import rotation
    rng = np.random.default_rng(0)
    C1, C2 = rng.normal(size=3), rng.normal(size=3)
    P1 = np.cross(C1, rng.normal(size=3))
    P1 /= np.linalg.norm(P1)
    R = rotation(3, a) @ rotation(1, b) @ rotation(3, c)
    q0 = quadrupole_closed_form(C1, C2, P1, 3.0, 2.0, 0.05)
    q1 = quadrupole_closed_form(R @ C1, R @ C2, R @ P1, 3.0, 2.0, 0.05)
    assert q1 == pytest.approx(q0, rel=1e-12)


@given(st.floats(-0.4, 0.4), st.floats(-1.5, 1.5))
def test_P1_parity(Th, th):
    a = quadrupole_p(3.0, 2.0, 1.2, Th, th, 1.0)[1]
    b = quadrupole_p(3.0, 2.0, 1.2, -Th, -th, 1.0)[1]
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_P1_hessian_pattern():
    L1, L2, G2, G = 3.0, 2.0, 1.2, 1.0
    H = p1_hessian(L1, L2, G2, G)
    K = -L2 ** 3 / (8 * L1 ** 2 * G2 ** 5)
    a, b = cubic_a(L1, G2, G), G - G2
    assert H[0, 0] == pytest.approx(K * 6 / G * a, rel=1e-8)
    assert H[1, 1] == pytest.approx(K * 6 * G * G2 ** 2 * b, rel=1e-8)
    assert abs(H[0, 1]) < 1e-8 * abs(H).max()


def test_equilibrium_example():
    r = equilibrium_analysis(3.0, 2.0, 1.2, 1.0)
    assert r.a_coeff == pytest.approx(45 - 2.2 ** 2 * 5.2)
    assert r.b_coeff == pytest.approx(-0.2)
    assert r.classification == "hyperbolic"
    assert r.omega == pytest.approx(1.2 * np.sqrt(0.2 / r.a_coeff))
    assert r.omega > 0
    assert equilibrium_analysis(3.0, 2.0, 1.0, 1.0).classification == "degenerate"
    with pytest.raises(DomainError):
        omega_Omega(3.0, 2.0, 0.8, 1.0)


@given(st.floats(0.2, 1.0), st.floats(4.0, 8.0), st.floats(1.0, 3.0))
def test_aligned_elliptic_for_large_G2(G, f, L1f):
    G2 = f * G
    L1 = L1f * (G + G2)
    r = equilibrium_analysis(L1, 1.5 * G2, G2, G)
    assert r.a_hat > 0 and r.aligned_classification == "elliptic"


@given(st.floats(0.2, 1.0), st.floats(0.05, 3.99), st.floats(1.0, 3.0))
def test_a_hat_bound(G, f, L1f):
    G2 = f * G
    L1 = L1f * (G + G2)
    r = equilibrium_analysis(L1, 1.5 * G2, G2, G)
    assert r.a_hat >= r.a_hat_bound * (1 - 1e-12)


def test_aligned_hessian_matches():
    L1, L2, G2, G = 3.0, 2.0, 1.2, 1.0
    H = p1_hessian(L1, L2, G2, G, theta0=np.pi)
    qT, qt = aligned_quadratic(L1, L2, G2, G)
    assert H[0, 0] / 2 == pytest.approx(qT, rel=1e-8)
    assert H[1, 1] / 2 == pytest.approx(qt, rel=1e-8)


def test_case_a_empty_window():
    r = equilibrium_analysis(1.5, 1.0, 0.9, 1.0)
    assert r.case == "a" and r.Gu_empty


@pytest.fixture(scope="module")
def hyp():
    m = MassConfig(1.0, 100.0, 10.0, 1e-4)
    L1 = float(lambda_of_a(1.0, m.mbar1, m.M1))
    L2 = float(lambda_of_a(20.0, m.mbar2, m.M2))
    G2 = L2 * np.sqrt(1 - 0.6 ** 2)
    G = L1 * np.sqrt(1 - 0.85 ** 2) - G2
    return SecularPoint(L1, L2, G2, G), m


def test_flow_equilibrium_stays(hyp):
    pt, m = hyp
    lam = secular_rate(pt, m, m.mu)
    fl = heff_flow(pt, m, m.mu, (0, 2 / lam))
    assert np.abs(fl.Theta).max() < 1e-12 and np.abs(fl.theta).max() < 1e-12


def test_flow_unstable_growth_rate(hyp):
    pt, m = hyp
    lam = secular_rate(pt, m, m.mu)
    om = equilibrium_analysis(pt.Lambda1, pt.Lambda2, pt.G2, pt.G).omega
    for p0, q0 in ((0.0, 1e-6 * pt.G), (1e-6 * pt.G, 0.0)):
        Th, th = from_pq(p0, q0, om)
        fl = heff_flow(SecularPoint(pt.Lambda1, pt.Lambda2, pt.G2, pt.G, Th, th), m, m.mu,
                       (0, 1 / lam), n_out=100)
        P, Q = to_pq(fl.Theta, fl.theta, om)
        d = np.hypot(P, Q)
        rate = np.polyfit(fl.t, np.log(d), 1)[0]
        expect = lam if q0 else -lam
        assert abs(rate - expect) < 0.05 * lam
        assert fl.drift < 1e-10


def test_pq_roundtrip():
    Th, th = from_pq(*to_pq(0.3, -0.2, 0.7), 0.7)
    assert (Th, th) == pytest.approx((0.3, -0.2), abs=1e-15)


def test_elliptic_levels_closed():
    # around the aligned (up-up) equilibrium the orbit stays near it
    m = MassConfig(1.0, 1.0, 0.05, 1e-3)
    pt = SecularPoint(3.0, 2.0, 0.5, 1.0, 0.02, np.pi + 0.02)
    fl = heff_flow(pt, m, m.mu, (0, 1e7), n_out=400, bound=(1.0, 10.0))
    assert not fl.exited
    dev = np.hypot(fl.Theta, np.angle(np.exp(1j * (fl.theta - np.pi))))
    assert dev.max() < 10 * np.hypot(0.02, 0.02)


def test_whiskers(hyp):
    pt, m = hyp
    w = whisker_local(pt, m, m.mu, 1e-3 * pt.G)
    assert w.max_rel_error < 0.1 and w.monotone
    big = whisker_local(pt, m, m.mu, 0.2 * pt.G, n=2)
    assert big.monotone


def test_torus_frequencies(hyp):
    from triad_charts.kepler import mean_motion
    pt, m = hyp
    w = torus_frequencies(pt, m, m.mu)
    w0 = torus_frequencies(pt, m, 0.0)
    assert w0[0] == pytest.approx(mean_motion(pt.Lambda1, m.mbar1, m.M1), rel=1e-7)
    assert w0[1] == pytest.approx(mean_motion(pt.Lambda2, m.mbar2, m.M2), rel=1e-7)
    assert w0[2] == 0
    # the secular part shifts the frequencies at order mu m1 / m2
    shift = np.abs(w - w0) / w0[1]
    assert 0 < shift.max() < 50 * m.mu * m.m1 / m.m2
