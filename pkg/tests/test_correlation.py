import json
import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from infocorr.correlation import (CorrelationReport, DegeneracyWarning, E_AA, E_AB, E_AB_samples,
                                  E_A_full, jacobian_A, jacobian_A_exact, jacobian_fd,
                                  jacobian_rank, minor_survey, normalized, rank_That)
from infocorr.errors import DomainError, InvariantError
from infocorr.matkernel import kron
from infocorr.scenario import ChainModel, one_node, two_node
from infocorr.sun_param import su2_family, su4_family
from infocorr.transfer_map import vectorize


def test_jacobian_fd_linear_map(rng):
    a = rng.normal(size=(4, 3))
    j = jacobian_fd(lambda p: a @ p, np.array([0.1, 0.2, 0.3]))
    np.testing.assert_allclose(j.matrix, a, atol=1e-9)
    assert j.noise > 0


def test_jacobian_fd_stencil_check():
    fam = su2_family()
    with pytest.raises(DomainError):
        jacobian_fd(lambda p: p, np.array([1e-7, 1.0, 0.5]), 1e-6, fam)


@pytest.mark.parametrize("fam,lam", [
    (su2_family(), [0.75, 0.25]),
    (su4_family(12), [0.4, 0.3, 0.2, 0.1]),
    (su4_family(6), [5 / 16, 5 / 16, 5 / 16, 1 / 16]),
])
def test_exact_jacobian_matches_fd(fam, lam, rng):
    phi = fam.sample(rng, 1)[0]
    np.testing.assert_allclose(jacobian_A_exact(fam, lam, phi).matrix,
                               jacobian_A(fam, np.array(lam), phi).matrix, atol=1e-8)


def test_chain_rule(rng):
    # J_B = That J_A against differentiating X(rho_B) directly
    sc = two_node((F(2, 5), F(3, 10), F(1, 5), F(1, 10)), (F(2, 5), F(3, 10), F(17, 100), F(13, 100)))
    m = ChainModel(sc)
    phi = m.family.sample(rng, 1)[0]
    for t in (1.0, 4.0):
        ja = jacobian_A(m.family, sc.lam_a(), phi)
        jb = jacobian_fd(lambda p: m.xb(p, t), phi)
        np.testing.assert_allclose(m.affine(t).That @ ja.matrix, jb.matrix, atol=1e-7)


def test_E_AA_one_node(rng):
    fam = su2_family()
    s = fam.sample(rng, 5)
    assert E_AA([F(3, 4), F(1, 4)], fam, s) == 2
    assert E_AA([F(1, 2), F(1, 2)], fam, s) == 0
    assert E_AA([F(3, 4), F(1, 4)], fam, s, exact=False) == 2
    with pytest.raises(ValueError):
        E_AA([F(3, 4), F(1, 4)], fam, s[:4])


def test_E_AA_warns_on_mismatch(rng):
    # a lone diagonal factor commutes with the diagonal state
    fam = su4_family(12, active=(1,))
    with pytest.warns(DegeneracyWarning):
        assert E_AA([0.4, 0.3, 0.2, 0.1], fam, fam.sample(rng, 5)) == 0


def test_E_AB_bounds_and_t0(rng):
    for sc in (one_node(), two_node((F(2, 5), F(3, 10), F(1, 5), F(1, 10)), (F(1, 4),) * 4)):
        m = ChainModel(sc)
        s = m.family.sample(rng, 5)
        e_aa = E_AA(sc.lambda_a, m.family, s)
        for t in (0.0, 0.7, 3.3):
            at = m.affine(t)
            e_ab = E_AB_samples(at, m.family, sc.lambda_a, s)
            assert e_ab <= min(rank_That(at), e_aa)
            if t == 0.0:
                assert e_ab == 0


def test_E_AB_shape_check(rng):
    m = ChainModel(one_node())
    with pytest.raises(ValueError):
        E_AB(m.affine(1.0), jacobian_A(su4_family(12), np.array([0.4, 0.3, 0.2, 0.1]),
                                       su4_family(12).sample(rng, 1)[0]))


def test_E_A_full_encodes_all_parameters(rng):
    fam = su2_family()
    lam = np.diag([0.75, 0.25]).astype(complex)
    rest = kron(np.diag([0.1, 0.15, 0.45, 0.3]), np.diag([0.75, 0.25])).astype(complex)
    rho0 = kron(lam, rest)
    phi = fam.sample(rng, 1)[0]
    assert E_A_full(rho0, fam, phi, (2, 4, 2)) == 2


def test_identical_samples_do_not_warn():
    s = np.array([[0.3, 1.0, 0.4]] * 5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert E_AA([0.75, 0.25], su2_family(), s) == 2


def test_sample_disagreement_warns():
    # at phi_1 = 0 the SU(2) rotation no longer moves the state off the diagonal
    s = np.array([[0.3, 1.0, 0.4]] * 4 + [[0.0, 1.0, 0.4]])
    with pytest.warns(DegeneracyWarning) as rec:
        value = E_AA([0.75, 0.25], su2_family(), s)
    assert value == min(rec[0].message.ranks) < 2


def test_minor_survey():
    m = np.array([[1.0, 2.0, 0.0], [3.0, 4.0, 0.0]])
    out = minor_survey(m, 2)
    assert len(out) == 3
    d = {cs: v for _, cs, v in out}
    assert d[(0, 1)] == pytest.approx(-2.0)
    assert d[(0, 2)] == 0 and d[(1, 2)] == 0
    with pytest.raises(ValueError):
        minor_survey(m, 3)


def test_normalized():
    assert normalized(11, 12) == F(11, 12)
    with pytest.raises(ValueError):
        normalized(1, 0)


def test_report_invariant_and_json():
    r = CorrelationReport(2, 2, 3, 2, 1.0, E_AB_min=1, delta_E_AB=1)
    d = json.loads(r.to_json())
    assert d["E_AB_norm"] == "1" and d["E_AB_min_norm"] == "1/2"
    assert r.quartet == (2, 2, 1, 1)
    with pytest.raises(InvariantError):
        CorrelationReport(2, 3, 3, 2, 1.0)
