"""Fibre solver, conjugation parametrization, flows, Hessenberg section."""

import numpy as np
import pytest

from gzkit import algebra as alg, fibres as fib, invariants as inv, regularity as reg
from gzkit.numerics import complex_gaussian
from gzkit.strata import StratumError, random_theta_witness
from conftest import gl, so


# -- solver -------------------------------------------------------------------


def test_solve_feasible_target(rng):
    ctx = so(6)
    x0 = ctx.random_element(rng)
    c = inv.kw_map(ctx, x0).values
    rep = fib.solve_fibre(ctx, c, seed=1)
    assert rep.success
    assert rep.residual < 1e-9 * max(1.0, np.abs(c).max())


def test_solve_nilfibre_target():
    ctx = so(5)
    rep = fib.solve_fibre(ctx, np.zeros(6), seed=2)
    assert rep.success
    assert np.abs(inv.kw_map(ctx, rep.x).values).max() < 1e-9


def test_solve_random_targets(rng):
    ctx = so(5)
    fails = 0
    for k in range(25):
        c = complex_gaussian(rng, 6)
        rep = fib.solve_fibre(ctx, c, seed=300 + k)
        fails += not rep.success
    assert fails == 0


def test_solve_rejects_bad_target_length():
    with pytest.raises(fib.SolveError):
        fib.solve_fibre(so(5), np.zeros(4))


def test_solve_report_json(rng):
    ctx = so(4)
    rep = fib.solve_fibre(ctx, np.zeros(4), seed=3)
    doc = rep.to_json()
    assert doc["success"] and "x" in doc and "residual" in doc


# -- parametrization -------------------------------------------------------------


def test_sampler_identity_draw(rng):
    ctx = so(6)
    x, _ = random_theta_witness(ctx, rng)
    sam = fib.FibreSampler.at(ctx, x)
    y = sam.point([np.zeros(k) for k in sam.coeff_sizes()])
    assert np.abs(y - x).max() < 1e-13


def test_sampler_requires_stratum():
    with pytest.raises(StratumError):
        fib.FibreSampler.at(so(5), np.zeros((5, 5)))


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_fibre_conservation_and_sreg(n, rng):
    ctx = so(n)
    x, _ = random_theta_witness(ctx, rng)
    sam = fib.FibreSampler.at(ctx, x)
    phi0 = inv.kw_map(ctx, x).values
    scale = max(1.0, np.abs(phi0).max())
    for _ in range(25):
        y = sam.draw(rng)
        assert np.abs(inv.kw_map(ctx, y).values - phi0).max() < 1e-8 * scale
        assert reg.is_sreg_rank(ctx, y)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_psi_differential_full_rank(n, rng):
    ctx = so(n)
    x, _ = random_theta_witness(ctx, rng)
    sam = fib.FibreSampler.at(ctx, x)
    assert fib.psi_differential_rank(sam) == sum(ctx.level(i).rank for i in range(2, n))


# -- flows -------------------------------------------------------------------------


def test_flow_time_zero_is_identity(rng):
    ctx = so(6)
    x = ctx.random_element(rng)
    assert np.abs(fib.gz_flow(ctx, x, (4, 1), 0.0) - x).max() < 1e-13


def test_flow_conserves_kw(rng):
    ctx = so(6)
    x = ctx.random_element(rng)
    x = 0.4 * x / np.linalg.norm(x, 2)
    phi0 = inv.kw_map(ctx, x).values
    for ij in inv.gz_index(ctx):
        for t in (0.1, 1.0, 10.0):
            xt = fib.gz_flow(ctx, x, ij, t)
            assert np.abs(inv.kw_map(ctx, xt).values - phi0).max() < 1e-8


def test_top_level_flows_fix_x(rng):
    ctx = so(6)
    x = ctx.random_element(rng)
    x = 0.4 * x / np.linalg.norm(x, 2)
    for j in (1, 2, 3):
        assert np.abs(fib.gz_flow(ctx, x, (6, j), 1.0) - x).max() < 1e-10


def test_flow_commutativity(rng):
    ctx = so(6)
    x, _ = random_theta_witness(ctx, rng)
    x = 0.4 * x / np.linalg.norm(x, 2)
    for a, b in [((3, 1), (5, 1)), ((4, 2), (5, 2)), ((2, 1), (4, 1))]:
        ab = fib.gz_flow(ctx, fib.gz_flow(ctx, x, a, 0.7), b, 1.3)
        ba = fib.gz_flow(ctx, fib.gz_flow(ctx, x, b, 1.3), a, 0.7)
        assert np.abs(ab - ba).max() < 1e-7


def test_flow_rejects_bad_index():
    with pytest.raises(alg.AlgebraError):
        fib.gz_flow(so(5), np.zeros((5, 5)), (5, 3), 1.0)


# -- Hessenberg -----------------------------------------------------------------------


def test_hessenberg_n2_explicit():
    # frozen 2x2 case: x_1 = a fixes the corner; trace/trace-square fix the rest
    ctx = gl(2)
    a, t, s = 0.7 + 0.2j, -0.4 + 1.0j, 0.9 - 0.3j
    H = fib.hessenberg_section(ctx, [a, t, s])
    assert H[0, 0] == pytest.approx(a)
    assert H[1, 0] == 1.0
    assert np.trace(H) == pytest.approx(t)
    assert np.trace(H @ H) == pytest.approx(s, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_hessenberg_round_trip(n, rng):
    ctx = gl(n)
    for _ in range(10):
        H0 = np.zeros((n, n), dtype=complex)
        for k in range(1, n):
            H0[k, k - 1] = 1.0
        iu = np.triu_indices(n)
        H0[iu] = complex_gaussian(rng, len(iu[0]))
        c = inv.kw_map(ctx, H0).values
        H = fib.hessenberg_section(ctx, c)
        assert np.abs(H - H0).max() < 1e-9       # the section is a bijection
        assert np.abs(inv.kw_map(ctx, H).values - c).max() < 1e-9


def test_hessenberg_against_brute_force_newton(rng):
    # oracle: all-at-once Newton on the full entry set, FD Jacobian
    for n in (2, 3, 4):
        ctx = gl(n)
        m = len(inv.gz_index(ctx))
        c = complex_gaussian(rng, m)
        H = fib.hessenberg_section(ctx, c)

        iu = np.triu_indices(n)

        def phi_of(u):
            A = np.zeros((n, n), dtype=complex)
            for k in range(1, n):
                A[k, k - 1] = 1.0
            A[iu] = u
            return inv.kw_map(ctx, A).values

        u = H[iu].copy()
        for _ in range(40):
            r = phi_of(u) - c
            if np.abs(r).max() < 1e-12:
                break
            h = 1e-7
            J = np.zeros((m, len(u)), dtype=complex)
            for k in range(len(u)):
                d = np.zeros_like(u)
                d[k] = h
                J[:, k] = (phi_of(u + d) - phi_of(u - d)) / (2 * h)
            u = u + np.linalg.lstsq(J, -r, rcond=None)[0]
        A = np.zeros((n, n), dtype=complex)
        for k in range(1, n):
            A[k, k - 1] = 1.0
        A[iu] = u
        assert np.abs(A - H).max() < 1e-6


def test_hessenberg_rejects_orthogonal():
    with pytest.raises(alg.AlgebraError):
        fib.hessenberg_section(so(4), np.zeros(4))
