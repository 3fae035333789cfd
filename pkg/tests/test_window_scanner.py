import numpy as np
import pytest

from infocorr.scenario import ChainModel, example1
from infocorr.window_scanner import (HTarget, JBTarget, ParamRegion, ScanCurve, TimeWindow,
                                     detect_E_AB_general, find_roots, minor_abs_sum, region_for,
                                     scan_min_minor, threshold_windows)


def _curve(t, v):
    v = np.asarray(v, dtype=float)
    return ScanCurve(np.asarray(t, dtype=float), v, float(v.max()))


def test_region_grid_is_endpoint_inclusive():
    r = ParamRegion(np.zeros(2), np.full(2, np.pi / 2), np.pi / 160, 32)
    p = r.points()
    assert p.shape == (1024, 2)
    assert p.min() == pytest.approx(np.pi / 160) and p.max() == pytest.approx(np.pi / 2 - np.pi / 160)
    with pytest.raises(ValueError):
        ParamRegion(np.zeros(1), np.ones(1), 0.6)
    with pytest.raises(ValueError):
        ParamRegion(np.zeros(1), np.ones(1), 0.0)


def test_minor_abs_sum_full_rank_and_rank_one():
    m = np.array([[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]], [[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]])
    np.testing.assert_allclose(minor_abs_sum(m, 2), [2.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(minor_abs_sum(m, 1), [3.0, 18.0])
    with pytest.raises(ValueError):
        minor_abs_sum(m, 3)


def test_scan_min_minor_takes_region_minimum():
    target = lambda t: np.array([[[t]], [[2 * t]], [[t + 1]]])
    c = scan_min_minor(target, 1, [0.0, 1.0, 2.0])
    np.testing.assert_allclose(c.raw, [0.0, 1.0, 2.0])
    np.testing.assert_array_equal(c.argmin, [0, 0, 0])
    np.testing.assert_allclose(c.normalized, [0.0, 0.5, 1.0])


def test_threshold_windows_strict():
    t = np.linspace(0, 1, 11)
    v = np.array([0, 0.2, 0.6, 0.8, 1.0, 0.8, 0.3, 0.1, 0.7, 0.9, 0.4])
    res = threshold_windows(_curve(t, v))
    assert len(res.windows) == 2 and res.needles == []
    w0 = res.windows[0]
    assert w0.t_start == pytest.approx(0.1 + 0.1 * 0.3 / 0.4, abs=1e-6)
    assert w0.t_end == pytest.approx(0.5 + 0.1 * 0.3 / 0.5, abs=1e-6)


def test_threshold_windows_bridge():
    t = np.linspace(0, 1, 11)
    v = np.array([0, 0.9, 0.9, 0.1, 0.9, 0.9, 0.1, 0.1, 0.1, 0.9, 0])
    strict = threshold_windows(_curve(t, v))
    assert len(strict.windows) == 3
    bridged = threshold_windows(_curve(t, v), max_gap_samples=1)
    assert len(bridged.windows) == 2
    assert bridged.needles == [pytest.approx(0.3)]


def test_threshold_windows_flat_and_invalid():
    assert threshold_windows(_curve([0, 1], [0, 0])).windows == []
    with pytest.raises(ValueError):
        threshold_windows(_curve([0, 1], [0, 1]), threshold=1.5)


def test_time_window_validation():
    with pytest.raises(ValueError):
        TimeWindow(2.0, 1.0)
    assert TimeWindow(1.0, 3.0).midpoint == 2.0


def test_find_roots_sine():
    r = find_roots(np.sin, (0.5, 10.0))
    np.testing.assert_allclose(r, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-12)
    assert find_roots(np.sin, (0.5, 10.0), first_only=True) == [pytest.approx(np.pi)]
    assert find_roots(lambda x: x * x + 1, (0, 1)) == []


def test_htarget_matches_pointwise_exact():
    sc = example1(region_grid=3)
    m = ChainModel(sc)
    region = region_for(m.family, sc.epsilon, 3)
    tgt = HTarget(m, region)
    from infocorr.nonreducible import coeff_derivatives
    for t in (2.0, 4.5):
        batch = tgt(t)
        for p, hm in zip(region.points(), batch):
            np.testing.assert_allclose(hm, coeff_derivatives(*m.drho_b(p, t)), atol=1e-15)


def test_detect_general_example1():
    sc = example1()
    m = ChainModel(sc)
    region = region_for(m.family, sc.epsilon, 4)
    n, vals = detect_E_AB_general(JBTarget(m, region), 4.0, 1e-12)
    assert n == 2
    assert len(vals) == 2 and vals[-1] > 1e-12
    n0, _ = detect_E_AB_general(JBTarget(m, region), 0.0, 1e-12)
    assert n0 == 0
