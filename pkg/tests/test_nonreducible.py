import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import random_density
from infocorr.errors import InvariantError, PoleError
from infocorr.nonreducible import (E_AB_min, char_coeffs, coeff_derivatives, eigenvalue_jacobian,
                                   h_matrix, h_matrix_exact, m_function, nonzero_column_sets,
                                   one_node_H, principal_minor_sums, reduced_h_matrix, removable)
from infocorr.scenario import ChainModel, example2, one_node, two_node
from infocorr.sun_param import su2_matrix


def test_char_coeffs_match_numpy_poly(rng):
    for n in (2, 3, 4):
        rho = random_density(n, rng)
        c = char_coeffs(rho)
        np.testing.assert_allclose(c.polynomial(), np.poly(np.linalg.eigvalsh(rho)).real, atol=1e-14)


def test_principal_minor_sums_are_elementary_symmetric(rng):
    rho = random_density(4, rng)
    w = np.linalg.eigvalsh(rho)
    s = principal_minor_sums(rho).real
    for k in range(5):
        ek = sum(np.prod(c) for c in itertools.combinations(w, k)) if k else 1.0
        assert s[k] == pytest.approx(ek, abs=1e-14)


def test_coeff_derivatives_match_fd(rng):
    r = random_density(4, rng)
    d = np.array([random_density(4, rng) - np.eye(4) / 4 for _ in range(3)])
    exact = coeff_derivatives(r, d)
    h = 1e-6
    fd = np.array([(char_coeffs(r + h * dk).a - char_coeffs(r - h * dk).a) / (2 * h) for dk in d]).T
    np.testing.assert_allclose(exact, fd, atol=1e-9)


def test_exact_H_matches_fd_in_model(rng):
    m = ChainModel(example2())
    phi = m.family.sample(rng, 1)[0]
    f = lambda p: m.rho_b(p, 4.0)
    np.testing.assert_allclose(h_matrix_exact(*m.drho_b(phi, 4.0), phi).matrix,
                               h_matrix(f, phi).matrix, atol=1e-9)


def test_one_node_H_closed_form():
    lam_c = (0.1, 0.15, 0.45)
    sc = one_node(lambda_c=lam_c)
    m = ChainModel(sc)
    for t in (0.5, 2.0, 6.0):
        for phi1 in (0.3, 0.9):
            phi = np.array([phi1, 0.7, 0.4])
            hm = h_matrix(lambda p: m.rho_b(p, t), phi)
            assert hm.shape == (1, 3)
            assert hm.matrix[0, 0] == pytest.approx(one_node_H(phi1, t, 0.75, 0.75, lam_c), abs=1e-9)


def test_m_function_zero_of_H():
    # H vanishes where cos(2 phi_1) = m(t)
    lam_c = (0.25, 0.25, 0.25)
    t = 3.5
    mv = m_function(t, 0.75, 0.75, lam_c)
    if abs(mv) < 1:
        phi1 = 0.5 * np.arccos(mv)
        assert abs(one_node_H(phi1, t, 0.75, 0.75, lam_c)) < 1e-14
    with pytest.raises(PoleError):
        m_function(t, 0.5, 0.75, lam_c)


def test_E_AB_min_one_node_before_critical_time():
    sc = one_node(lambda_c=(F(1, 4),) * 3)
    m = ChainModel(sc)
    for t in np.linspace(0.3, 2.7, 6):
        r = E_AB_min(lambda p: m.rho_b(p, t), np.array([0.6, 1.0, 0.5]), df=lambda p: m.drho_b(p, t))
        assert r.value == 1 and r.path == "direct"


def test_reduced_path_agrees_on_nondegenerate(rng):
    sc = two_node((F(2, 5), F(3, 10), F(1, 5), F(1, 10)), (F(2, 5), F(3, 10), F(17, 100), F(13, 100)))
    m = ChainModel(sc)
    for phi in m.family.sample(rng, 3):
        f = lambda p: m.rho_b(p, 3.0)
        a = E_AB_min(f, phi, path="direct")
        b = E_AB_min(f, phi, path="reduced")
        assert not a.degenerate
        assert a.value == b.value == 3


def test_reduced_path_on_degenerate_state():
    # rho_B = U diag(l, l, 1 - 2l) U^+ has one free eigenvalue
    def f(p):
        l = 0.2 + 0.05 * np.sin(p[0])
        u = np.eye(3, dtype=complex)
        u[:2, :2] = su2_matrix([p[1], 0.3, 0.2])
        return u @ np.diag([l, l, 1 - 2 * l]) @ u.conj().T
    r = E_AB_min(f, np.array([0.4, 0.5]))
    assert r.degenerate and r.path == "reduced" and r.value == 1
    hm = reduced_h_matrix(f, np.array([0.4, 0.5]))
    assert hm.shape == (1, 2)


def test_eigenvalue_jacobian_rank(rng):
    sc = two_node((F(2, 5), F(3, 10), F(1, 5), F(1, 10)), (F(2, 5), F(3, 10), F(17, 100), F(13, 100)))
    m = ChainModel(sc)
    phi = m.family.sample(rng, 1)[0]
    j = eigenvalue_jacobian(lambda p: m.rho_b(p, 3.0), phi)
    assert j.shape == (3, 12)
    assert np.linalg.matrix_rank(j, 1e-8 * np.abs(j).max()) == 3


def test_upper_bounds(rng):
    for sc in (one_node(), example2()):
        m = ChainModel(sc)
        phi = m.family.sample(rng, 1)[0]
        for t in (1.0, 4.0):
            r = E_AB_min(lambda p: m.rho_b(p, t), phi, df=lambda p: m.drho_b(p, t))
            assert r.value <= sc.partition.nb - 1


def test_removable():
    assert removable(6, 2, 12) == (4, F(1, 3))
    with pytest.raises(InvariantError):
        removable(1, 2)


def test_nonzero_column_sets():
    h = np.array([[1.0, 2.0, 1e-19], [0.5, 1.0 + 1e-3, 2e-19], [0.1, 0.3, 0.0]])
    assert nonzero_column_sets(h, 2) == {(1, 2)}
    assert nonzero_column_sets(np.eye(3), 2) == {(1, 2), (1, 3), (2, 3)}
