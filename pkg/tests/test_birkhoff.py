import numpy as np
import pytest
from hypothesis import given, strategies as st

from triad_charts.birkhoff import (QUARTIC, T13_from_expansion, T_check_leading, U_matrix,
                                   W_matrix, diagonalizer, discriminant_grid,
                                   eigenvalues_formula, first_order_invariants, quartic,
                                   quartic_root, resonance_margin, s_coefficients,
                                   sigma_asymptotics, sigma_crosscheck, sigma_matrix,
                                   torsion_matrices, torsion_scale, torsion_scan)
from triad_charts.errors import DomainError
from triad_charts.kepler import MassConfig, lambda_of_a

M = MassConfig(1.0, 1.0, 0.02, 1e-3)


def Lam(alpha, a2=10.0, m=M):
    return float(lambda_of_a(alpha * a2, m.mbar1, m.M1)), float(lambda_of_a(a2, m.mbar2, m.M2))


@given(st.floats(1e-3, 0.6))
def test_s_squared_exceeds_stilde_squared(alpha):
    s, st_, al, _ = s_coefficients(*Lam(alpha), M)
    assert s ** 2 - st_ ** 2 > 0
    assert al == pytest.approx(alpha, rel=1e-12)


@given(st.floats(1e-3, 0.3))
def test_sigma_structure_and_real_eigenvalues(alpha):
    sd = sigma_matrix(*Lam(alpha), M)
    S = sd.sigma
    assert S[0, 0].imag == 0 and S[1, 1].imag == 0
    assert S[0, 1].real == 0 and S[0, 1] == S[1, 0]
    assert sd.discriminant > 0
    ev = np.linalg.eigvals(S)
    assert np.abs(ev.imag).max() < 1e-12 * np.abs(ev).max()
    e = eigenvalues_formula(sd)
    assert sorted(e) == pytest.approx(sorted(ev.real), rel=1e-10)
    assert (sd.eigen1, sd.eigen2) == pytest.approx(e, rel=1e-10)


def test_discriminant_grid():
    dmin, smin, imag = discriminant_grid(M, n=20)
    assert dmin > 0 and smin > 0 and imag < 1e-12


def test_diagonalizer():
    sd = sigma_matrix(*Lam(0.05), M)
    U, V, grad = diagonalizer(sd, M)
    D = np.linalg.inv(U) @ sd.sigma @ U
    assert abs(D[0, 1]) < 1e-12 * abs(D).max() and abs(D[1, 0]) < 1e-12 * abs(D).max()
    assert D[0, 0].real == pytest.approx(sd.eigen1, rel=1e-12)
    assert np.allclose(U.T, np.linalg.inv(U), atol=1e-14)
    assert np.linalg.det(U) == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.diag(U).imag == 0) and U[0, 1].real == 0 and U[1, 0].real == 0
    J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    assert np.allclose(V.T @ J @ V, J, atol=1e-14)
    assert not np.allclose(V.T @ V, np.eye(4))
    assert np.all(np.isfinite(grad))


def test_diagonalizer_trivial_when_stilde_vanishes():
    assert np.array_equal(U_matrix(0.0), np.eye(2))
    assert np.array_equal(W_matrix(0.0), np.eye(2))
    sd = sigma_matrix(*Lam(0.05), M, offdiag_sign=0)
    U, V, _ = diagonalizer(sd)
    assert sd.xLambda == 0
    assert np.array_equal(U, np.eye(2)) and np.array_equal(V, np.eye(4))


def test_asymptotics():
    err = []
    for al in (1e-2, 5e-3, 2.5e-3):
        sd = sigma_matrix(*Lam(al), M)
        asy = sigma_asymptotics(*sd.Lambda, M)
        err.append(np.abs(sd.Omega / asy - 1).max())
    # relative error at most O(alpha); observed O(alpha^2)
    assert err[0] < 0.05
    assert err[1] / err[0] < 0.6 and err[2] / err[1] < 0.6


def test_invariants_prograde_and_herman():
    inv = first_order_invariants(*Lam(0.05), M)
    assert np.allclose(inv["Omega_real"], inv["prograde_signed"], rtol=1e-12)
    assert abs(inv["herman_sum"]) < 1e-14 * np.abs(inv["Omega"]).max()
    lo = first_order_invariants(*Lam(1e-3), M)
    assert np.allclose(lo["Omega_hat"], lo["Omega_hat_leading"], rtol=1e-2)


def test_extraction_fixes_offdiagonal_sign():
    L = Lam(0.05)
    plus = sigma_matrix(*L, M).sigma[0, 1]
    minus = sigma_matrix(*L, M, offdiag_sign=-1).sigma[0, 1]
    assert minus == -plus
    assert np.allclose(np.linalg.eigvals(sigma_matrix(*L, M, offdiag_sign=-1).sigma),
                       np.linalg.eigvals(sigma_matrix(*L, M).sigma))


def test_resonance_margin():
    inv = first_order_invariants(*Lam(0.05), M)
    margin, k = resonance_margin(inv["Omega"])
    assert margin > 0 and not (k[0] == k[1] == k[2])
    # (1, 1, 1) would give the Herman sum, which is zero
    assert abs(np.dot(inv["Omega"], (1, 1, 1))) < margin
    with pytest.raises(DomainError):
        resonance_margin(inv["Omega"], s=1)


def test_quartic_root_certificate():
    r = quartic_root()
    assert r["p0"] == 12 and r["p1"] == -44
    assert r["unique"] and r["convex"]
    assert 0.13 < r["root"] < 0.15
    assert abs(quartic(r["root"])) < 1e-12
    t = np.linspace(0, 1, 10001)
    assert np.count_nonzero(np.diff(np.sign(quartic(t)))) == 1
    roots = np.roots(QUARTIC[::-1])
    real = roots[np.abs(roots.imag) < 1e-12].real
    assert np.count_nonzero((real > 0) & (real < 1)) == 1


def test_T_check_limit_and_symmetry():
    assert np.array_equal(T_check_leading(0.0),
                          np.array([[0, 0, 0], [0, -3, 3], [0, 3, -0.75]]))
    for t in (0.1, 0.5, 0.9):
        T = T_check_leading(t)
        assert np.array_equal(T, T.T)


def test_torsion_matrices():
    m = MassConfig()
    L1, L2 = Lam(0.1, m=m)
    td = torsion_matrices(L1, L2, m)
    assert td.T_hat[0, 1] == td.T_hat[1, 0] and td.T_dot[0, 1] == td.T_dot[1, 0]
    assert td.det_T_dot == pytest.approx(td.det_formula, rel=1e-12)
    assert td.scale == pytest.approx(torsion_scale(L1, L2, m))
    G1 = torsion_matrices(L1, L2, m, G=0.1 * (L1 - L2)).det_T_dot
    G2 = torsion_matrices(L1, L2, m, G=0.9 * (L1 - L2)).det_T_dot
    assert G1 == G2
    with pytest.raises(DomainError):
        torsion_matrices(L2, L1, m)
    with pytest.raises(DomainError):
        torsion_matrices(L1, L2, m, G=L1)


@given(st.floats(0.01, 0.99))
def test_det_formula_everywhere(t):
    m = MassConfig()
    td = torsion_matrices(1.0, t, m)
    assert td.det_T_dot == pytest.approx(td.det_formula, rel=1e-10, abs=1e-14 * td.scale ** 2)


def test_T13_expansion_differs_in_sign_of_linear_term():
    t = 0.3
    assert T13_from_expansion(t) == pytest.approx(3 * t ** 2 + 2.25 * t)
    assert T_check_leading(t)[0, 2] == pytest.approx(3 * t ** 2 - 2.25 * t)


def test_torsion_scan():
    m = MassConfig()
    sc = torsion_scan(m, G=0.01, n1=40, n2=10)
    assert sc.certified["below"]["min_abs_det"] > 0
    assert sc.certified["above"]["min_abs_det"] > 0
    assert sc.degenerate.any()
    cols = np.nonzero(sc.degenerate.any(axis=1))[0]
    t_cells = sc.Lambda2[cols, 0] / sc.Lambda1[cols, 0]
    assert np.abs(t_cells - sc.t_root).max() < 0.01
    sub = torsion_scan(m, G=0.01, t_range=(0.5, 0.9), n1=10, n2=5)
    assert not sub.degenerate.any() and "below" not in sub.certified
    with pytest.raises(DomainError):
        torsion_scan(m, G=0.01, t_range=(0.9, 0.5))


def test_sigma_crosscheck_small():
    # a cheaper extraction than the acceptance one with fewer nodes
    r = sigma_crosscheck((0.14, 0.03), M, N=6, Nl=16)
    assert r.max_rel_err < 1e-6
    assert r.sigma_numeric[0, 1] == pytest.approx(r.closed.sigma[0, 1], rel=1e-6)
