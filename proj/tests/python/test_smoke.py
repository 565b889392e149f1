import math
from fractions import Fraction

import numpy as np
import pytest

import lowdeg


def test_ldlr_exact_value():
    r = lowdeg.ldlr_norm_sq(p=2, n=1, D=2, lambda_="1")
    assert r["mode"] == "exact"
    assert Fraction(r["exact_norm_sq"]) == Fraction(5, 2)
    assert r["norm_sq"] == pytest.approx(2.5, rel=1e-15)


def test_ldlr_matches_full_norm_for_small_n():
    full = lowdeg.lr_norm_sq(p=3, n=1, lambda_="1")
    assert full["value"] == pytest.approx(math.cosh(1.0), rel=1e-12)
    low = lowdeg.ldlr_norm_sq(p=3, n=1, D=60, lambda_="1")
    assert low["norm_sq"] == pytest.approx(math.cosh(1.0), rel=1e-12)


def test_ldlr_monotone_in_degree():
    logs = [lowdeg.ldlr_norm_sq(p=2, n=200, D=D, lambda_hat="0.8")["log_norm_sq"] for D in range(0, 12, 2)]
    assert all(b >= a for a, b in zip(logs, logs[1:]))


def test_bad_arguments_raise():
    with pytest.raises(ValueError):
        lowdeg.ldlr_norm_sq(p=3, n=4, D=2, lambda_hat="1")
    with pytest.raises(ValueError):
        lowdeg.ldlr_norm_sq(p=2, n=4, D=2)
    with pytest.raises(ValueError):
        lowdeg.ldlr_norm_sq(p=2, n=4, D=2, lambda_="1", prior="sparse_rademacher:2")


def test_hermite():
    assert lowdeg.hermite_coeffs(4) == [3, 0, -6, 0, 1]
    assert lowdeg.hermite_eval(3, 2.0) == pytest.approx(2.0)
    assert len(str(lowdeg.hermite_coeffs(60)[0])) > 20  # arbitrary precision survives


def test_samples_are_reproducible():
    a = lowdeg.sample_null(3, 6, seed=11)
    b = lowdeg.sample_null(3, 6, seed=11)
    assert a.shape == (6, 6, 6)
    assert np.array_equal(a, b)
    Y, x = lowdeg.sample_planted(3, 6, seed=11, lambda_="0")
    assert np.array_equal(Y, a)
    assert set(np.abs(x)) == {1.0}


def test_pca_detects_strong_spike():
    Y, _ = lowdeg.sample_planted(2, 300, seed=5, lambda_hat="3")
    planted, lam = lowdeg.pca_test(Y, 3.0)
    assert planted
    assert lam == pytest.approx(3 + 1 / 3, abs=0.2)
    assert lowdeg.pca_threshold(3.0) > 2.0


def test_symmetrize_is_symmetric():
    M = lowdeg.symmetrize(lowdeg.sample_null(2, 20, seed=1))
    assert np.allclose(M, M.T)


def test_scan_classifies():
    r = lowdeg.scan(2, [100, 1000, 10000], ["0.5", "1.5"], schedule="log")
    assert r["failures"] == 0
    assert r["classification"] == {"0.5": "bounded", "1.5": "diverging"}
    assert "p,n,D,lambda,lambda_hat,log_norm_sq,mode,classification" in r["csv"]


def test_threshold_bounds_ordered():
    lo, hi = lowdeg.tensor_threshold_bounds(3, 1000, 8)
    assert 0 < lo < hi


def test_oracles_pass():
    assert lowdeg.oracle_suite_passes()
