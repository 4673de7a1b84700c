"""Nilfibre constructions: regular nilpotents, nilradicals, the overlap
witness, nullcone components, and the degeneration check."""

import numpy as np
import pytest

from gzkit import algebra as alg, invariants as inv, nilfibre as nil, regularity as reg
from gzkit.numerics import subspace_distance
from conftest import so


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8, 9])
def test_regular_nilpotent_properties(n):
    ctx = so(n)
    e = nil.regular_nilpotent(ctx).entries
    assert np.abs(np.linalg.matrix_power(e, n)).max() == 0.0
    assert inv.partial_kw(ctx, e).norm_inf() == 0.0
    assert reg.centralizer(ctx, e).dim == ctx.rank
    ek = alg.project(ctx, e, n - 1).entries
    assert reg.centralizer(ctx.level(n - 1), ek).dim == ctx.level(n - 1).rank


def test_regular_nilpotent_so5_dims():
    # dims forced by the double-regularity construction
    ctx = so(5)
    e = nil.regular_nilpotent(ctx).entries
    assert reg.centralizer(ctx, e).dim == 2
    assert reg.centralizer(ctx.level(4), alg.project(ctx, e, 4).entries).dim == 2


def test_regular_nilpotent_so6_dims():
    ctx = so(6)
    e = nil.regular_nilpotent(ctx).entries
    assert reg.centralizer(ctx, e).dim == 3
    assert reg.centralizer(ctx.level(5), alg.project(ctx, e, 5).entries).dim == 2


def test_regular_nilpotent_rejects_small():
    with pytest.raises(alg.AlgebraError):
        nil.regular_nilpotent(so(3))


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_standard_nilradicals(n):
    ctx = so(n)
    reps = nil.standard_nilradicals(ctx)
    assert len(reps) == (2 if n % 2 else 1)
    r = ctx.level(n - 1).rank
    for rp in reps:
        assert rp.dim == (ctx.dim - ctx.rank) // 2
        assert len(rp.basis_n_minus_theta) == r
        assert rp.theta_stability_residual() < 1e-12
        # n cap k spans the nilradical of a Borel of k: dimension check
        assert len(rp.basis_n_cap_k) == rp.dim - r
    if len(reps) == 2:
        d = subspace_distance(reps[0].subspace_minus_theta().basis,
                              reps[1].subspace_minus_theta().basis)
        assert d > 0.1


def test_nilradical_members_have_zero_partial_kw(rng):
    for n in (5, 6):
        ctx = so(n)
        for rp in nil.standard_nilradicals(ctx):
            for _ in range(5):
                coeff = rng.standard_normal(rp.dim) + 1j * rng.standard_normal(rp.dim)
                y = np.tensordot(coeff, np.array(rp.basis_n), axes=(0, 0))
                assert inv.partial_kw(ctx, y).norm_inf() < 1e-12


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_partial_nilfibre_samples(n, rng):
    ctx = so(n)
    for _ in range(30):
        y = nil.sample_partial_nilfibre(ctx, rng)
        assert inv.partial_kw(ctx, y).norm_inf() < 1e-9
        assert not reg.is_nsreg(ctx, y)


def test_so3_contrast_nilfibre_is_sreg(rng):
    ctx = so(3)
    hits = 0
    for _ in range(20):
        y = nil.so3_nilfibre_sample(ctx, rng)
        assert inv.kw_map(ctx, y).norm_inf() < 1e-9
        hits += reg.is_sreg_rank(ctx, y)
    assert hits == 20


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_obstruction_witness(n):
    ctx = so(n)
    for rp in nil.standard_nilradicals(ctx):
        y = nil.obstruction_witness(ctx, rp).entries
        assert np.abs(y).max() > 0
        for b in rp.basis_n:
            assert np.abs(alg.bracket(y, b)).max() < 1e-12
        for b in rp.basis_n_cap_k:
            assert np.abs(alg.bracket(y, b)).max() < 1e-12
        assert np.abs(ctx.involution().apply(y) - y).max() < 1e-12


def test_witness_kills_nsreg_on_nilradical_span(rng):
    # bilinearity: the witness centralizes the whole nilradical, so every
    # element of its span fails n-strong regularity
    ctx = so(5)
    rp = nil.standard_nilradicals(ctx)[0]
    y = nil.obstruction_witness(ctx, rp).entries
    for _ in range(10):
        coeff = rng.standard_normal(rp.dim)
        x = np.tensordot(coeff, np.array(rp.basis_n), axes=(0, 0))
        assert np.abs(alg.bracket(y, x)).max() < 1e-12
        assert not reg.is_nsreg(ctx, x)


def test_obstruction_rejects_so3():
    ctx = so(3)
    with pytest.raises(alg.AlgebraError):
        nil.obstruction_witness(ctx, None)


@pytest.mark.parametrize("n,count", [(4, 2), (5, 4), (6, 4), (7, 8)])
def test_nullcone_component_count(n, count):
    assert len(nil.nullcone_components(so(n))) == count


@pytest.mark.parametrize("n", [5, 6, 7])
def test_nullcone_structure(n, rng):
    ctx = so(n)
    comps = nil.nullcone_components(ctx)
    r = ctx.level(n - 1).rank
    inv_data = ctx.involution()
    hk = [alg.cartan_element(ctx, v).entries
          for v in np.eye(ctx.rank)[: r]]       # h cap k directions
    for word, sub in comps:
        assert sub.dim == r
        mats = [ctx.from_coords(sub.basis[:, j]) for j in range(sub.dim)]
        for m in mats:
            # anti-fixed and H cap K weight vectors
            assert np.abs(inv_data.apply(m) + m).max() < 1e-12
            for h in hk:
                lam = np.trace(alg.bracket(h, m) @ m.conj().T) / np.trace(m @ m.conj().T)
                assert np.abs(alg.bracket(h, m) - lam * m).max() < 1e-10
        # positive grading by the integer diagonal element built for the word
        x = nil.grading_element(ctx, word).entries
        for m in mats:
            lam = np.trace(alg.bracket(x, m) @ m.conj().T) / np.trace(m @ m.conj().T)
            assert lam.real > 0.5
            assert np.abs(alg.bracket(x, m) - lam * m).max() < 1e-10


@pytest.mark.parametrize("n", [5, 6, 7])
def test_all_upper_component_is_nilradical_anti_part(n):
    ctx = so(n)
    comps = nil.nullcone_components(ctx)
    all_u = next(s for w, s in comps if all(c == "U" for c in w))
    rp = nil.standard_nilradicals(ctx)[0]
    assert subspace_distance(all_u.basis, rp.subspace_minus_theta().basis) < 1e-12


def test_degeneration_limit(rng):
    # partial_kw(lam x + y) = partial_kw(lam x) -> 0 as lam -> 0, for
    # k-regular diagonal x and y in a standard nilradical
    for n in (5, 6):
        ctx = so(n)
        l = ctx.rank
        vals = np.linspace(1.0, l, l) * (0.8 + 0.1j)
        if n % 2 == 0:
            vals[-1] = 0.0      # h cap k zeroes the anti-fixed coordinate
        x = alg.cartan_element(ctx, vals).entries
        rp = nil.standard_nilradicals(ctx)[0]
        coeff = rng.standard_normal(rp.dim)
        y = np.tensordot(coeff, np.array(rp.basis_n), axes=(0, 0))
        prev = np.inf
        for lam in (1.0, 0.1, 0.01):
            shift = np.abs(inv.partial_kw(ctx, lam * x + y).values
                           - inv.partial_kw(ctx, lam * x).values).max()
            assert shift < 1e-10
            cur = inv.partial_kw(ctx, lam * x + y).norm_inf()
            assert cur < prev
            prev = cur
        assert prev < 1e-3
