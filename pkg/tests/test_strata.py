"""Spectral strata, their inclusion theorems, and component counts."""

import numpy as np
import pytest

from gzkit import algebra as alg, invariants as inv, regularity as reg, strata as st
from conftest import so


def test_in_g_zero_verdict_from_spectra(rng):
    ctx = so(4)
    # diag[2, 1, -1, -2]: x_k spectrum computed via the projection
    x = alg.cartan_element(ctx, [2.0, 1.0]).entries
    xk = alg.project(ctx, x, 3).entries
    sk = inv.spectrum(ctx.level(3), xk)
    sx = inv.spectrum(ctx, x)
    margin = np.abs(sx.support()[:, None] - sk.support()[None, :]).min()
    r = st.in_g_zero(ctx, x)
    assert r.member == (margin > 1e-7 * r.scale)
    assert r.margin == pytest.approx(margin)


def test_x_with_zero_anti_part_not_in_gzero(rng):
    # x = x_k: sigma(x_k) is contained in sigma(x)
    for n in (4, 5, 6):
        ctx = so(n)
        xk = alg.embed(ctx, ctx.level(n - 1).random_element(rng), n - 1)
        assert not st.in_g_zero(ctx, xk).member


def test_gzero_members_are_nsreg(rng):
    for n in (4, 5, 6, 7):
        ctx = so(n)
        for _ in range(30):
            x, _ = st.random_gzero_witness(ctx, rng)
            assert reg.is_nsreg(ctx, x)
            assert reg.omega_test(ctx, x)


def test_theta_members_are_sreg(rng):
    for n in (4, 5, 6, 7):
        ctx = so(n)
        for _ in range(30):
            x, _ = st.random_theta_witness(ctx, rng)
            assert reg.is_sreg_rank(ctx, x)
            assert reg.is_sreg_chain(ctx, x)


def test_zero_not_in_theta():
    for n in (4, 5, 6):
        rep = st.in_g_theta(so(n), np.zeros((n, n)))
        assert not rep.in_g_theta


def test_fibre_points_stay_in_stratum(rng):
    from gzkit.fibres import FibreSampler

    ctx = so(6)
    x, rep0 = st.random_theta_witness(ctx, rng)
    sam = FibreSampler.at(ctx, x)
    for _ in range(10):
        y = sam.draw(rng)
        rep = st.in_g_theta(ctx, y)
        assert rep.in_g_theta
        assert rep.m == rep0.m      # m depends only on the fibre


def test_count_components_requires_stratum():
    ctx = so(5)
    with pytest.raises(st.StratumError):
        st.count_components(ctx, np.zeros((5, 5)))
    with pytest.raises(st.StratumError):
        st.count_components(so(3), np.zeros((3, 3)))


def test_generic_count_is_one(rng):
    for n in (5, 6, 7):
        ctx = so(n)
        x, _ = st.random_theta_witness(ctx, rng)
        assert st.count_components(ctx, x) == 1


@pytest.mark.parametrize("n,m", [(5, 1), (6, 1), (7, 1), (7, 2)])
def test_component_witnesses(n, m, rng):
    ctx = so(n)
    x, rep = st.component_witness(ctx, m, rng)
    assert rep.m == m and rep.m_levels[0] == 4
    assert st.count_components(ctx, x) == 2 ** m
    # the witness levels carry exactly nilpotent projections
    for i in rep.m_levels:
        xi = alg.project(ctx, x, i).entries
        assert inv.zero_multiplicity(xi) == i
        assert reg.is_regular(ctx.level(i), xi)
    # the stratum forces strong regularity even on the witness
    assert reg.is_sreg_rank(ctx, x)


def test_component_bound(rng):
    for n in (5, 6, 7):
        ctx = so(n)
        bound = ctx.level(n - 1).rank - 1
        for _ in range(20):
            x, rep = st.random_theta_witness(ctx, rng)
            assert rep.m <= bound
        with pytest.raises(st.StratumError):
            st.component_witness(ctx, bound + 1, rng)


def test_stratum_report_json(rng):
    ctx = so(5)
    x, rep = st.random_theta_witness(ctx, rng)
    doc = rep.to_json()
    assert doc["in_g_theta"] is True
    assert set(doc["margins"]) == {"2", "3", "4"}
    assert doc["m"] == len(doc["m_levels"])
    assert "spectra" in doc and "4" in doc["spectra"]
