import numpy as np
import pytest
from hypothesis import given, strategies as st

from triad_charts.errors import DomainError, SingularityError
from triad_charts.kepler import (MassConfig, eccentricity, inclination_triple, kepler_energy,
                                 orbital_state, rotation, solve_kepler)


def bisect_kepler(e, ell):
    lo, hi = ell - 1.0, ell + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - e * np.sin(mid) - ell > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_mass_config_reduced_masses():
    m = MassConfig(1.0, 2.0, 0.5, 1e-2)
    assert m.mbar1 == 1.0 * 2.0 / (1.0 + 1e-2 * 2.0)
    assert m.M2 == 1.0 + 1e-2 * 0.5


@pytest.mark.parametrize("field", ["m0", "m1", "m2", "mu"])
def test_mass_config_rejects_nonpositive(field):
    kw = dict(m0=1.0, m1=1.0, m2=0.05, mu=1e-3)
    kw[field] = 0.0
    with pytest.raises(DomainError):
        MassConfig(**kw)


def test_kepler_trivial_cases():
    assert solve_kepler(0.0, 1.3) == pytest.approx(1.3, abs=1e-15)
    assert solve_kepler(0.5, np.pi) == pytest.approx(np.pi, abs=1e-15)


def test_kepler_against_bisection():
    z = solve_kepler(0.5, 1.0)
    assert z == pytest.approx(bisect_kepler(0.5, 1.0), abs=1e-14)


def test_kepler_residual_bulk():
    rng = np.random.default_rng(0)
    e = rng.uniform(0, 0.99, 100_000)
    ell = rng.uniform(-10, 10, 100_000)
    z = solve_kepler(e, ell)
    assert np.abs(z - e * np.sin(z) - ell).max() < 1e-13


def test_kepler_rejects_bad_eccentricity():
    with pytest.raises(DomainError):
        solve_kepler(1.0, 0.3)


def test_eccentricity_examples():
    assert eccentricity(2.0, 2.0) == 0.0
    assert eccentricity(2.0, 1.0) == pytest.approx(np.sqrt(3) / 2, rel=1e-15)
    with pytest.raises(DomainError):
        eccentricity(1.0, 1.1)


@given(st.floats(0.5, 3.0), st.floats(0.2, 1.0), st.floats(-10, 10))
def test_orbital_state_energy_and_momentum(L, rho, ell):
    m = MassConfig()
    G = rho * L
    x, y = orbital_state(L, G, ell, m.mbar1, m.M1)
    assert x[2] == 0 and y[2] == 0
    E = y @ y / (2 * m.mbar1) - m.mbar1 * m.M1 / np.linalg.norm(x)
    assert E == pytest.approx(kepler_energy(L, m.mbar1, m.M1), rel=1e-12)
    assert np.cross(x, y)[2] == pytest.approx(G, rel=1e-12)


def test_orbital_state_circular_perihelion(masses):
    x, y = orbital_state(1.0, 1.0, 0.0, masses.mbar1, masses.M1)
    a = 1.0 / (masses.mbar1 ** 2 * masses.M1)
    assert np.allclose(x, [a, 0, 0], atol=1e-15)
    assert np.allclose(y, [0, masses.mbar1 ** 2 * masses.M1, 0], atol=1e-15)


def test_rotation_basics():
    assert np.array_equal(rotation(3, 0.0), np.eye(3))
    assert np.allclose(rotation(1, np.pi / 2) @ [0, 1, 0], [0, 0, 1], atol=1e-16)
    with pytest.raises(ValueError):
        rotation(2, 0.1)


@given(st.floats(-7, 7), st.floats(-7, 7))
def test_rotation_group_law(a, b):
    for ax in (1, 3):
        R = rotation(ax, a)
        assert np.allclose(R @ rotation(ax, b), rotation(ax, a + b), atol=1e-14)
        assert np.allclose(R.T @ R, np.eye(3), atol=1e-15)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-14)


def test_inclination_equilateral():
    i, i1, i2 = inclination_triple(0.0, 1.0, 1.0, 1.0)
    assert i == pytest.approx(np.pi / 2)
    assert np.cos(i1) == pytest.approx(0.5) and np.cos(i2) == pytest.approx(0.5)


def test_inclination_coplanar_prograde_rejected():
    with pytest.raises(SingularityError, match="G < G1 \\+ G2"):
        inclination_triple(0.1, 2.0, 1.2, 0.8)


@given(st.floats(0.3, 2.0), st.floats(0.3, 2.0), st.floats(0.05, 0.95), st.floats(-0.9, 0.9))
def test_inclination_law_of_cosines(G1, G2, u, z):
    lo, hi = abs(G1 - G2), G1 + G2
    G = lo + u * (hi - lo)
    i, i1, i2 = inclination_triple(z * G, G, G1, G2)
    assert G1 ** 2 == pytest.approx(G ** 2 + G2 ** 2 - 2 * G * G2 * np.cos(i2), rel=1e-10, abs=1e-12)
    assert np.cos(i) == pytest.approx(z, abs=1e-14)
