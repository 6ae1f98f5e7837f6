import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpslice.symfunc import (
    ConeError,
    cone_level,
    maclaurin_margins,
    margin_scale,
    newton_tensor_diag,
    sample_cone,
    sigma,
    sigma_all,
    sigma_truncated,
    sym_report,
    write_sym_csv,
)


def brute_sigma(k, kappa):
    """Oracle: sum over k-subsets."""
    return math.fsum(math.prod(c) for c in itertools.combinations(kappa, k)) if k else 1.0


vectors = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=6)


# --- sigma ------------------------------------------------------------------

def test_sigma_example():
    kap = [1.0, 2.0, 3.0]
    assert [sigma(k, kap) for k in range(5)] == [1.0, 6.0, 11.0, 6.0, 0.0]


def test_sigma_negative_k():
    with pytest.raises(ValueError):
        sigma(-1, [1.0, 2.0])


@pytest.mark.parametrize("d", [2, 3, 5])
def test_sigma_constant_vector(d):
    c = 0.7
    for k in range(d + 1):
        assert sigma(k, [c] * d) == pytest.approx(math.comb(d, k) * c ** k, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(kap=vectors)
def test_sigma_matches_subset_sum(kap):
    s = sigma_all(kap)
    for k in range(len(kap) + 1):
        assert s[k] == pytest.approx(brute_sigma(k, kap), rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(kap=vectors, t=st.floats(0.1, 10))
def test_sigma_homogeneous(kap, t):
    kap = np.array(kap)
    for k in range(1, kap.size + 1):
        assert sigma(k, t * kap) == pytest.approx(t ** k * sigma(k, kap), rel=1e-12, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(kap=vectors, seed=st.integers(0, 1000))
def test_permutation_invariance(kap, seed):
    kap = np.array(kap)
    perm = np.random.default_rng(seed).permutation(kap.size)
    s = sigma_all(kap)
    assert np.allclose(sigma_all(kap[perm]), s, rtol=1e-12, atol=1e-10)
    if np.all(np.abs(s[1:]) > 1e-9):  # away from rounding ties at the cone boundary
        assert cone_level(kap[perm]) == cone_level(kap)


def test_sigma_vectorized():
    kap = np.array([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
    assert np.array_equal(sigma(2, kap), [11.0, 3.0])
    assert np.array_equal(sigma(4, kap), [0.0, 0.0])


# --- truncated / Newton tensor ----------------------------------------------

def test_truncated_example():
    kap = [1.0, 2.0, 3.0]
    assert sigma_truncated(2, 1, kap) == 3.0
    assert sigma(2, kap) == sigma_truncated(2, 1, kap) + 2.0 * sigma_truncated(1, 1, kap)


def test_truncated_constant():
    assert sigma_truncated(2, 0, [0.5] * 4) == pytest.approx(math.comb(3, 2) * 0.25)


def test_truncated_index_error():
    with pytest.raises(IndexError):
        sigma_truncated(1, 3, [1.0, 2.0, 3.0])


def test_newton_tensor_examples():
    kap = np.array([1.0, 2.0, 3.0])
    t = newton_tensor_diag(2, kap)
    assert list(t) == [5.0, 4.0, 3.0]
    assert t.sum() == 12.0 == (4 - 2) * sigma(1, kap)
    assert (t * kap).sum() == 22.0 == 2 * sigma(2, kap)
    assert list(newton_tensor_diag(1, kap)) == [1.0, 1.0, 1.0]


@settings(max_examples=200, deadline=None)
@given(kap=vectors, data=st.data())
def test_newton_identities(kap, data):
    kap = np.array(kap)
    d = kap.size
    n = d + 1
    p = data.draw(st.integers(1, d))
    t = newton_tensor_diag(p, kap)
    scale = max(1.0, np.abs(kap).max()) ** p * math.comb(d, p)
    assert abs(t.sum() - (n - p) * sigma(p - 1, kap)) <= 1e-12 * scale
    assert abs((t * kap).sum() - p * sigma(p, kap)) <= 1e-12 * scale
    for i in range(d):
        split = sigma_truncated(p, i, kap) + kap[i] * sigma_truncated(p - 1, i, kap)
        assert abs(split - sigma(p, kap)) <= 1e-12 * scale


# --- cones ------------------------------------------------------------------

@pytest.mark.parametrize("kap, level", [
    ([1.0, 2.0, 3.0], 3),
    ([3.0, 1.0, -1.0], 1),
    ([2.0, 2.0, -1.0], 1),  # sigma_2 = 0 exactly: boundary counts as outside
    ([-1.0, -2.0, 0.5], 0),
    ([1.0, 1.0, -0.4], 2),
])
def test_cone_level_examples(kap, level):
    assert cone_level(kap) == level


def test_cone_level_vectorized():
    assert list(cone_level(np.array([[1.0, 1.0], [1.0, -2.0]]))) == [2, 0]


# --- Maclaurin --------------------------------------------------------------

def test_maclaurin_example():
    m = maclaurin_margins([1.0, 2.0, 3.0], 2)
    assert m[0] == 0.0
    assert m[1] == pytest.approx(0.25543735346197134, rel=1e-14)  # 6 - sqrt(33)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_maclaurin_equality_on_umbilic(d):
    m = maclaurin_margins([1.3] * d, d)
    assert np.allclose(m, 0.0, atol=1e-13)


def test_maclaurin_outside_cone():
    with pytest.raises(ConeError):
        maclaurin_margins([3.0, 1.0, -1.0], 2)
    with pytest.raises(ValueError):
        maclaurin_margins([1.0, 1.0], 3)


def test_sampled_vectors_lie_in_cone(rng):
    kap = sample_cone(rng, 5, 3, 500)
    assert kap.shape == (500, 4)
    assert np.all(np.atleast_1d(cone_level(kap)) >= 3)
    assert np.any(kap < 0)  # not just the positive orthant


def test_maclaurin_property_batch(rng):
    for n in (3, 4, 5, 6):
        for k in range(1, n):
            kap = sample_cone(rng, n, k, 200)
            m = maclaurin_margins(kap, k)
            assert np.all(m >= -1e-12 * margin_scale(kap, k))
            assert np.all(newton_tensor_diag(k, kap) > 0)


# --- report -----------------------------------------------------------------

def test_sym_report_and_csv():
    reps = [sym_report([1.0, 2.0, 3.0]), sym_report([3.0, 1.0, -1.0]), sym_report([-1.0, -1.0, 0.0])]
    assert [r.level for r in reps] == [3, 1, 0]
    assert reps[0].n == 4
    buf = io.StringIO()
    write_sym_csv(reps, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("kappa_1,kappa_2,kappa_3,sigma_0")
    assert lines[2].split(",")[-3:] == ["0", "", ""]  # only M_1 defined at level 1
    assert len(lines) == 4
