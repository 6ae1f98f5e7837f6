import io
import math

import numpy as np
import pytest

from warpslice.fiber import axisym_grid, full_s2_grid
from warpslice.inequalities import (
    HypothesisError,
    divergence_identity_residual,
    full_report,
    heintze_karcher,
    minkowski,
    ricci_term,
    write_report_csv,
)
from warpslice.surface import graph_surface, make_perturbed, make_slice, second_fundamental_form

# N = 2048 reference run on r = 5 + 0.15 cos(theta), Schwarzschild n = 3, m = 1
HK_GAP_REF = 0.18622920073846672
MK2_GAP_REF = 0.016095034826534516


def curvature(profile, grid, r):
    return second_fundamental_form(graph_surface(profile, grid, r))


def bump(profile, N, r0=5.0, amp=0.15):
    g = axisym_grid(profile.n, N)
    return curvature(profile, g, r0 + amp * np.cos(g.theta))


# --- equality on slices -----------------------------------------------------

@pytest.mark.parametrize("name", ["schw3", "schw3_m2", "desitter3", "schw4", "flat3", "cosh3"])
def test_slice_equality(name, request):
    prof = request.getfixturevalue(name)
    g = axisym_grid(prof.n, 64)
    for r0 in (0.25, 0.5, 0.75):
        c = second_fundamental_form(make_slice(prof, g, r0 * prof.r_max))
        _, _, hk = heintze_karcher(c)
        assert abs(hk) <= 1e-10
        for p in range(1, prof.n):
            lhs, rhs, gap = minkowski(c, p)
            assert abs(gap) <= 1e-10 * max(1.0, abs(lhs))
            pmax, resid, _ = divergence_identity_residual(c, p)
            assert pmax <= 1e-12 * max(1.0, abs(lhs)) and resid <= 1e-10


def test_round_sphere_heintze_karcher(flat3):
    R = 1.5
    c = second_fundamental_form(make_slice(flat3, axisym_grid(3, 64), R))
    lhs, rhs, gap = heintze_karcher(c)
    assert lhs == pytest.approx(4 * math.pi * R ** 3, rel=1e-13)
    assert rhs == pytest.approx(4 * math.pi * R ** 3, rel=1e-13)


def test_round_sphere_minkowski_n4():
    from warpslice.profile import make_euclidean

    R = 2.0
    c = second_fundamental_form(make_slice(make_euclidean(4), axisym_grid(4, 64), R))
    area = 2 * math.pi ** 2 * R ** 3
    lhs, rhs, gap = minkowski(c, 2)
    assert lhs == pytest.approx(6 * area / R, rel=1e-13)
    assert rhs == pytest.approx(6 * area / R, rel=1e-13)


# --- perturbed surfaces -----------------------------------------------------

def test_hk_gap_reference(schw3):
    _, _, gap = heintze_karcher(bump(schw3, 512))
    assert gap > 0
    assert gap == pytest.approx(HK_GAP_REF, abs=2e-5)


def test_mk2_gap_reference(schw3):
    _, _, gap = minkowski(bump(schw3, 512), 2)
    assert gap > 0
    assert gap == pytest.approx(MK2_GAP_REF, abs=1e-6)


def test_mk1_gap_is_an_identity(schw3):
    # for p = 1 both sides agree on every closed graph; only quadrature error remains
    gaps = [minkowski(bump(schw3, N), 1)[2] for N in (256, 512)]
    assert abs(gaps[1]) < 1e-5
    assert 3.5 <= gaps[0] / gaps[1] <= 4.5


def test_gaps_converge(schw3):
    hk = [heintze_karcher(bump(schw3, N))[2] for N in (256, 512, 1024)]
    assert 3.5 <= (hk[1] - hk[0]) / (hk[2] - hk[1]) <= 4.5


# --- hypothesis checks ------------------------------------------------------

def test_mean_convexity_required(flat3):
    g = axisym_grid(3, 128)
    c = curvature(flat3, g, 1 + 0.3 * np.cos(8 * g.theta))
    with pytest.raises(HypothesisError, match="mean convex"):
        heintze_karcher(c)


def test_sigma2_positivity_required(flat3):
    g = axisym_grid(3, 128)
    c = curvature(flat3, g, 1 + 0.08 * np.cos(4 * g.theta))
    heintze_karcher(c)  # mean convex, so this one is fine
    with pytest.raises(HypothesisError, match="sigma_2"):
        minkowski(c, 2)


def test_order_range(schw3):
    c = bump(schw3, 32)
    for p in (0, 3):
        with pytest.raises(ValueError):
            minkowski(c, p)


# --- divergence identity and Ricci term -------------------------------------

@pytest.mark.parametrize("p", [1, 2])
def test_divergence_identity_n3(schw3, p):
    res = [divergence_identity_residual(bump(schw3, N), p)[1] for N in (512, 1024)]
    assert res[0] <= 1e-5
    assert 3.5 <= res[0] / res[1] <= 4.5


@pytest.mark.xfail(strict=True, reason="n = 4 residual at N = 512 is 2.7e-5; needs N ~ 1024 for 1e-5")
def test_divergence_identity_n4_at_512(schw4):
    assert divergence_identity_residual(bump(schw4, 512), 2)[1] <= 1e-5


@pytest.mark.parametrize("p", [1, 2, 3])
def test_divergence_identity_n4_converges(schw4, p):
    res = [divergence_identity_residual(bump(schw4, N), p)[1] for N in (512, 1024)]
    assert res[1] <= 2e-5
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_divergence_identity_flat(flat3):
    # classical Minkowski identity: no Ricci term
    g256, g512 = axisym_grid(3, 256), axisym_grid(3, 512)
    r = lambda g: 1.0 + 0.2 * np.cos(g.theta) + 0.1 * np.cos(2 * g.theta)
    a = divergence_identity_residual(curvature(flat3, g256, r(g256)), 2)[1]
    b = divergence_identity_residual(curvature(flat3, g512, r(g512)), 2)[1]
    assert 3.5 <= a / b <= 4.5


def test_divergence_identity_needs_axisym(schw3):
    c = second_fundamental_form(make_perturbed(schw3, full_s2_grid(8), 5.0, 0.1, 0))
    with pytest.raises(ValueError):
        divergence_identity_residual(c, 1)


def test_ricci_term_nonpositive(schw3, desitter3):
    for prof in (schw3, desitter3):
        g = axisym_grid(3, 256)
        for seed in range(5):
            c = second_fundamental_form(make_perturbed(prof, g, 0.5 * prof.r_max, 0.3, seed))
            term = ricci_term(c)
            assert term.max() <= 1e-12
            assert term.min() < 0


def test_ricci_term_flat_zero(flat3):
    g = axisym_grid(3, 64)
    c = second_fundamental_form(make_perturbed(flat3, g, 2.0, 0.3, 1))
    assert np.all(ricci_term(c) == 0.0)


def test_minkowski_sign_invariant_under_dilation(flat3):
    g = axisym_grid(3, 256)
    base = 1.0 + 0.2 * np.cos(2 * g.theta)
    signs = set()
    for s in (0.5, 1.0, 3.0):
        c = curvature(flat3, g, s * base)
        signs.add(np.sign(minkowski(c, 2)[2]))
        signs.add(np.sign(heintze_karcher(c)[2]) * 10)
    assert signs == {1.0, 10.0}


# --- reports ----------------------------------------------------------------

def test_full_report_fields(schw3):
    rep = full_report(bump(schw3, 128), 2)
    assert rep.p == 2 and rep.N == 128
    assert rep.hk_ok() and rep.mk_ok() and rep.ok()
    assert rep.ricci_term_sign <= 1e-12
    assert rep.note == ""


def test_full_report_full_grid_skips_divergence(schw3):
    rep = full_report(make_perturbed(schw3, full_s2_grid(16), 5.0, 0.1, 0), 1)
    assert math.isnan(rep.div_residual)
    assert "skipped" in rep.note


def test_report_csv_deterministic(schw3):
    def render():
        rows = [("bump", full_report(bump(schw3, 64), p)) for p in (1, 2)]
        buf = io.StringIO()
        write_report_csv(rows, buf)
        return buf.getvalue()

    a, b = render(), render()
    assert a == b
    lines = a.splitlines()
    assert lines[0].split(",")[:3] == ["label", "p", "N"]
    assert len(lines) == 3
