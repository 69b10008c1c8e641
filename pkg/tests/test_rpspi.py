import numpy as np
import pytest
from hypothesis import given, strategies as st

from triad_charts.errors import DomainError
from triad_charts.jrd import JrdCoords, jrd_to_cartesian, sample_jrd
from triad_charts.kepler import MassConfig, angle_diff
from triad_charts.rpspi import (DomainParams, RpsPiCoords, cartesian_symmetry,
                                complexify, decomplexify, invariant_G, jrd_from_rpspi,
                                phi2_minus, prograde_complex_to_cartesian, reality_defect,
                                rpspi_forward_array, rpspi_from_jrd, rpspi_inverse_array,
                                rpspi_to_cartesian, symmetry_transform)
from triad_charts.secular import perturbation_value

finite = st.floats(-2, 2)


def retro_jrd(rng, n):
    # retrograde regime: G close to G1 - G2, orbits nearly anti-aligned
    c = sample_jrd(n, rng)
    G1 = np.maximum(c.G1, c.G2 * 1.05)
    c = c.replace(G1=np.minimum(G1, 0.95 * c.Lambda1))
    c = c.replace(G2=np.minimum(c.G2, 0.9 * c.G1))
    G = (c.G1 - c.G2) * 1.01
    return c.replace(G=G, Z=G * rng.uniform(-0.9, 0.9, n))


@pytest.fixture(scope="module")
def dom():
    return DomainParams()


def test_manifold_M_pi_maps_to_zero():
    c = JrdCoords(Lambda1=1.3, Lambda2=0.9, G1=1.3, G2=0.9, G=0.4, Z=0.4,
                  ell1=0.1, ell2=0.2, gamma1=0.3, gamma2=0.4, gamma=0.5, zeta=0.6)
    z = rpspi_from_jrd(c)
    for k in ("t1", "t2", "t3", "t1s", "t2s", "t3s", "T", "Ts"):
        assert abs(getattr(z, k)) == 0


def test_moduli_and_G_reconstruction(rng):
    c = retro_jrd(rng, 100)
    z = rpspi_from_jrd(c)
    assert np.allclose(np.abs(z.t1) ** 2, c.Lambda1 - c.G1, atol=1e-14)
    assert np.allclose(invariant_G(z), c.G, atol=1e-12)
    assert reality_defect(z) < 1e-14


def test_jrd_roundtrip_through_complex(rng):
    c = retro_jrd(rng, 50)
    b = jrd_from_rpspi(rpspi_from_jrd(c))
    d = b.as_array() - c.as_array()
    d[:, 6:] = angle_diff(b.as_array()[:, 6:], c.as_array()[:, 6:])
    assert np.abs(d).max() < 1e-10


def test_out_of_regime_rejected():
    c = JrdCoords(Lambda1=1.3, Lambda2=0.9, G1=1.4, G2=0.8, G=0.8, Z=0.4,
                  ell1=0, ell2=0, gamma1=0, gamma2=0, gamma=0, zeta=0)
    with pytest.raises(DomainError, match="Lambda1 - G1"):
        rpspi_from_jrd(c)


def real_point(v):
    return RpsPiCoords(Lambda1=0.3, Lambda2=0.05, eta1=v[0], eta2=v[1], p=v[2], P=v[3],
                       lambda1=v[4], lambda2=v[5], xi1=v[6], xi2=v[7], q=v[8], Q=v[9])


def test_complexify_zero_and_explicit_value():
    z = complexify(real_point(np.zeros(10)))
    assert all(getattr(z, k) == 0 for k in ("t1", "t2", "t3", "t1s", "t2s", "t3s", "T", "Ts"))
    v = np.zeros(10)
    v[0] = np.sqrt(2)
    z = complexify(real_point(v))
    assert z.t1 == pytest.approx(1.0)
    assert z.t1s == pytest.approx(-1j)


@given(st.lists(finite, min_size=10, max_size=10))
def test_complexify_bijective_and_real(v):
    r = real_point(np.array(v))
    z = complexify(r)
    back = decomplexify(z)
    assert np.array_equal(back.as_array(), r.as_array()) or \
        np.abs(back.as_array() - r.as_array()).max() < 1e-15
    assert reality_defect(z) < 1e-14
    assert (1j * z.t1 * z.t1s).real == pytest.approx((v[0] ** 2 + v[6] ** 2) / 2, abs=1e-14)
    assert abs((1j * z.t1 * z.t1s).imag) < 1e-14


@given(st.lists(finite, min_size=10, max_size=10))
def test_phi2_minus_involution(v):
    z = complexify(real_point(np.array(v)))
    assert np.array_equal(phi2_minus(phi2_minus(z)).as_array(), z.as_array())


def test_phi2_minus_fixed_points():
    z = complexify(real_point(np.zeros(10))).replace(Lambda2=0.0, lambda2=0.0)
    w = phi2_minus(z)
    assert w.Lambda2 == 0 and w.lambda2 == 0


def test_chart_equals_prograde_map_after_phi2_minus(masses, dom, rng):
    r = dom.sample(masses, 200, rng)
    w = rpspi_forward_array(r.as_array(), masses)
    v = prograde_complex_to_cartesian(phi2_minus(complexify(r)), masses)
    assert np.abs(v.imag).max() < 1e-12
    assert np.abs(v.real - w).max() < 1e-12


def test_planar_point_has_retrograde_orbits(masses):
    r = real_point(np.array([0, 0, 0, 0, 0.4, 2.1, 0, 0, 0, 0]))
    s = rpspi_to_cartesian(r, masses)
    C1, C2 = np.cross(s.x1, s.y1), np.cross(s.x2, s.y2)
    cos = C1 @ C2 / np.linalg.norm(C1) / np.linalg.norm(C2)
    assert np.arccos(np.clip(cos, -1, 1)) == pytest.approx(np.pi, abs=1e-7)
    assert cos == pytest.approx(-1.0, abs=1e-14)


def test_agrees_with_jrd_on_overlap(masses, rng):
    # with (P, Q) = 0 the jrd angles are undefined (Z = G); the overlap is
    # reached through the complex map, which also covers T != 0
    c = retro_jrd(rng, 100)
    w = jrd_to_cartesian(c, masses).as_array()
    v = prograde_complex_to_cartesian(phi2_minus(rpspi_from_jrd(c)), masses)
    assert np.abs(v - w).max() < 1e-9


def test_inverse_roundtrip(masses, dom, rng):
    r = dom.sample(masses, 200, rng)
    back = rpspi_inverse_array(rpspi_forward_array(r.as_array(), masses), masses)
    d = back - r.as_array()
    d[:, 6:8] = angle_diff(back[:, 6:8], r.as_array()[:, 6:8])
    assert np.abs(d).max() < 1e-9


def test_PQ_nonzero_unsupported(masses):
    v = np.zeros(10)
    v[3] = 1e-3
    with pytest.raises(DomainError, match="P, Q"):
        rpspi_to_cartesian(real_point(v), masses)


def test_Rg_identity_at_zero(masses, dom, rng):
    z = complexify(dom.sample(masses, 5, rng))
    assert np.array_equal(symmetry_transform("Rg", z, 0.0).as_array(), z.as_array())


def _f(masses, z):
    s = rpspi_to_cartesian(decomplexify(z), masses)
    return np.asarray(perturbation_value(s, masses))


@pytest.mark.parametrize("kind", ["Rg", "R3minus", "Rswap"])
def test_perturbation_invariant_under_symmetries(masses, dom, rng, kind):
    z = complexify(dom.sample(masses, 50, rng))
    w = symmetry_transform(kind, z, 0.83)
    assert reality_defect(w) < 1e-14
    a, b = _f(masses, z), _f(masses, w)
    assert np.abs(a - b).max() < 1e-10 * np.abs(a).max()


@pytest.mark.parametrize("kind", ["R3minus", "Rswap"])
def test_symmetries_in_cartesian_form(masses, dom, rng, kind):
    z = complexify(dom.sample(masses, 50, rng))
    w = symmetry_transform(kind, z)
    lhs = rpspi_forward_array(decomplexify(w).as_array(), masses)
    rhs = cartesian_symmetry(kind, rpspi_forward_array(decomplexify(z).as_array(), masses))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_sigma_entries_structure():
    from triad_charts.birkhoff import sigma_matrix
    m = MassConfig(1.0, 1.0, 0.02, 1e-3)
    sd = sigma_matrix(0.14, 0.03, m)
    assert abs(sd.sigma[0, 0].imag) == 0 and abs(sd.sigma[1, 1].imag) == 0
    assert sd.sigma[0, 1].real == 0 and sd.sigma[0, 1] == sd.sigma[1, 0]


def test_domain_params(masses):
    d = DomainParams()
    km, kp = d.k_pm(masses)
    assert d.chi < km < kp
    assert d.mass_violations(masses) == []
    bad = MassConfig(1.0, 1.0, 0.2, 1e-3)
    assert any("m2 < sqrt(alpha_minus)/(2 chi) m1" in v for v in d.mass_violations(bad))
    with pytest.raises(DomainError):
        DomainParams(chi=0.5)


def test_Lambda_box_gives_semi_axes_ratio(masses, rng):
    from triad_charts.kepler import semi_major
    d = DomainParams()
    r = d.sample(masses, 500, rng, margin=0.0)
    a = semi_major(r.Lambda1, masses.mbar1, masses.M1) / semi_major(r.Lambda2, masses.mbar2, masses.M2)
    assert np.all((d.alpha_minus < a) & (a < d.alpha_plus))
    assert np.all(d.in_L(r.Lambda1, r.Lambda2, masses))
