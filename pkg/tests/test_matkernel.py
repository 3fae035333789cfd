import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from conftest import random_density, random_hermitian
from infocorr.errors import DimensionError, NumericalError
from infocorr.matkernel import (RankPolicy, check_density, eig_hermitian, expm_i_hermitian,
                                is_density, kron, numerical_rank, partial_trace, singular_values)


def _ptrace_loops(rho, dims, keep):
    na, nc, nb = dims
    r = rho.reshape(na, nc, nb, na, nc, nb)
    if keep == "B":
        out = np.zeros((nb, nb), complex)
        for a in range(na):
            for c in range(nc):
                out += r[a, c, :, a, c, :]
        return out
    if keep == "A":
        out = np.zeros((na, na), complex)
        for c in range(nc):
            for b in range(nb):
                out += r[:, c, b, :, c, b]
        return out
    raise ValueError


def test_eig_descending_and_reconstructs(rng):
    h = random_hermitian(6, rng)
    s = eig_hermitian(h)
    assert np.all(np.diff(s.eigenvalues) <= 0)
    v = s.eigenvectors
    np.testing.assert_allclose(v @ np.diag(s.eigenvalues) @ v.conj().T, h, atol=1e-12)


def test_expm_matches_scipy(rng):
    h = random_hermitian(8, rng)
    for t in (0.0, 0.3, 2.5):
        np.testing.assert_allclose(expm_i_hermitian(h, t), scipy.linalg.expm(-1j * h * t), atol=1e-12)


def test_expm_unitary(rng):
    u = expm_i_hermitian(random_hermitian(16, rng), 7.3)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(16), atol=1e-12)


def test_kron_associative(rng):
    a, b, c = (rng.normal(size=(2, 2)) for _ in range(3))
    np.testing.assert_allclose(kron(a, b, c), np.kron(np.kron(a, b), c))


@pytest.mark.parametrize("dims", [(2, 4, 2), (4, 1, 4), (2, 2, 4)])
@pytest.mark.parametrize("keep", ["A", "B"])
def test_partial_trace_matches_loops(dims, keep, rng):
    rho = random_density(int(np.prod(dims)), rng)
    np.testing.assert_allclose(partial_trace(rho, dims, keep), _ptrace_loops(rho, dims, keep), atol=1e-14)


def test_partial_trace_of_product(rng):
    ra, rc, rb = random_density(2, rng), random_density(4, rng), random_density(2, rng)
    rho = kron(ra, rc, rb)
    np.testing.assert_allclose(partial_trace(rho, (2, 4, 2), "A"), ra, atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, (2, 4, 2), "B"), rb, atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, (2, 4, 2), "CB"), kron(rc, rb), atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, (2, 4, 2), "AB"), kron(ra, rb), atol=1e-14)


def test_partial_trace_rejects_bad_dims(rng):
    with pytest.raises(DimensionError):
        partial_trace(random_density(8, rng), (2, 2, 4), "A")


def test_rank_policy():
    m = np.diag([1.0, 1e-6, 1e-9, 1e-13])
    assert numerical_rank(m) == 2
    assert numerical_rank(m, RankPolicy(1e-14, 1e-10)) == 3
    assert numerical_rank(m, noise_floor=1e-5) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.zeros((0, 3))) == 0


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_rank_of_random_product(r, k, seed):
    rng = np.random.default_rng(seed)
    rank = min(r, k)
    m = rng.normal(size=(6, rank)) @ rng.normal(size=(rank, 7))
    assert numerical_rank(m) == rank


def test_singular_values_sorted(rng):
    s = singular_values(rng.normal(size=(5, 3)))
    assert s.shape == (3,) and np.all(np.diff(s) <= 0)


def test_density_checks(rng):
    rho = random_density(4, rng)
    check_density(rho)
    assert is_density(rho)
    assert not is_density(rho * 2)
    bad = rho.copy()
    bad[0, 1] += 0.1
    with pytest.raises(NumericalError):
        check_density(bad)
    with pytest.raises(NumericalError):
        check_density(np.diag([1.5, -0.5]))
    with pytest.raises(NumericalError):
        check_density(np.array([[np.nan, 0], [0, 1]]))
