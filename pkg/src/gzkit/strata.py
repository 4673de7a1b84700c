"""Spectral strata: the open sets defined by disjointness of consecutive
chain spectra, and the generic-fibre component count.

Membership in either stratum is an open condition, so verdicts carry
margins (minimal distance between the relevant spectra) and a boundary
flag instead of forcing near-collisions into a boolean.

Zero-multiplicity counting for the component count uses the algebraic
multiplicity obtained from ranks of matrix powers rather than eigenvalue
clustering: a float representation of a nilpotent Jordan block of size k
scatters its eigenvalues by roughly eps^(1/k), which no clustering
tolerance can undo, while matrix-power ranks degrade only linearly.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .algebra import (AlgebraContext, AlgebraError, as_matrix, cartan_element, embed,
                      project, root_vector)
from .invariants import Spectrum, spectrum, zero_multiplicity
from .invariants import _pfaffian_slot_gradient, pfaffian
from .numerics import DEFAULT_TOLS, Tolerances, complex_gaussian


class StratumError(AlgebraError):
    pass


@dataclass
class GZeroReport:
    member: bool
    margin: float
    boundary: bool
    scale: float


@dataclass
class StratumReport:
    """Per-level spectra, consecutive disjointness margins, and m-count data."""

    n: int
    spectra: dict                       # level -> Spectrum
    margins: dict                       # level i -> min |lambda - mu| against level i+1
    in_g_zero: bool
    gzero_margin: float
    in_g_theta: bool
    theta_margin: float
    boundary: bool
    m_levels: list = field(default_factory=list)
    m: int = 0
    scale: float = 1.0
    # steps whose margin is attained against a zero eigenvalue of an even
    # (type D) level; the paper's spectrum convention covers odd levels only,
    # so these verdicts rest on our treat-as-ordinary choice for type D zeros
    type_d_zero_steps: list = field(default_factory=list)

    def to_json(self):
        return {
            "n": self.n,
            "in_g_zero": self.in_g_zero,
            "gzero_margin": self.gzero_margin,
            "in_g_theta": self.in_g_theta,
            "theta_margin": self.theta_margin,
            "boundary": self.boundary,
            "margins": {str(i): m for i, m in sorted(self.margins.items())},
            "m_levels": list(self.m_levels),
            "m": self.m,
            "type_d_zero_steps": list(self.type_d_zero_steps),
            "spectra": {
                str(i): {
                    "re": s.values.real.tolist(),
                    "im": s.values.imag.tolist(),
                    "mult": s.multiplicities.tolist(),
                    "zero_suppressed": s.zero_suppressed,
                }
                for i, s in sorted(self.spectra.items())
            },
        }


def _disjointness_margin(sa: Spectrum, sb: Spectrum):
    a, b = sa.support(), sb.support()
    if a.size == 0 or b.size == 0:
        return np.inf
    return float(np.abs(a[:, None] - b[None, :]).min())


def _margin_hits_even_zero(sa: Spectrum, sb: Spectrum, even_a, even_b, margin):
    """Does the margin-attaining pair involve a zero eigenvalue on an even level?"""
    a, b = sa.support(), sb.support()
    if a.size == 0 or b.size == 0 or not np.isfinite(margin):
        return False
    d = np.abs(a[:, None] - b[None, :])
    ia, ib = np.unravel_index(int(np.argmin(d)), d.shape)
    return (even_a and a[ia] == 0.0) or (even_b and b[ib] == 0.0)


def in_g_zero(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> GZeroReport:
    """Is sigma(x_k) disjoint from sigma(x) (with the spectrum conventions)?"""
    if ctx.family != "orthogonal" or ctx.n < 3:
        raise StratumError("g(0) membership needs an orthogonal context with n >= 3")
    X = as_matrix(x)
    scale = max(1.0, float(np.linalg.norm(X, 2)))
    s_top = spectrum(ctx, X, tol)
    s_k = spectrum(ctx.level(ctx.n - 1), project(ctx, X, ctx.n - 1).entries, tol)
    margin = _disjointness_margin(s_top, s_k)
    cut = tol.spec * scale
    return GZeroReport(member=margin > cut, margin=margin,
                       boundary=margin <= tol.band * cut, scale=scale)


def in_g_theta(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> StratumReport:
    """Full stratum report: disjointness at every consecutive chain step."""
    if ctx.family != "orthogonal" or ctx.n < 3:
        raise StratumError("the spectral stratum needs an orthogonal context with n >= 3")
    X = as_matrix(x)
    scale = max(1.0, float(np.linalg.norm(X, 2)))
    cut = tol.spec * scale
    spectra, projections = {}, {}
    for i in range(2, ctx.n + 1):
        xi = project(ctx, X, i).entries
        projections[i] = xi
        spectra[i] = spectrum(ctx.level(i), xi, tol)
    margins = {i: _disjointness_margin(spectra[i], spectra[i + 1])
               for i in range(2, ctx.n)}
    worst = min(margins.values()) if margins else np.inf
    gz_margin = margins.get(ctx.n - 1, np.inf)
    m_levels = []
    for i in range(4, ctx.n):
        if i % 2 == 0 and zero_multiplicity(projections[i], tol) >= 4:
            m_levels.append(i)
    return StratumReport(
        n=ctx.n,
        spectra=spectra,
        margins=margins,
        in_g_zero=gz_margin > cut,
        gzero_margin=float(gz_margin),
        in_g_theta=worst > cut,
        theta_margin=float(worst),
        boundary=worst <= tol.band * cut,
        m_levels=m_levels,
        m=len(m_levels),
        scale=scale,
    )


def count_components(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> int:
    """Number of irreducible components of the KW fibre through x (x in the
    spectral stratum, orthogonal, n > 3): 2^m where m counts the even levels
    4 <= i <= n-1 whose projection has a zero eigenvalue of multiplicity >= 4.
    """
    if ctx.family != "orthogonal" or ctx.n <= 3:
        raise StratumError("component count needs an orthogonal context with n > 3")
    rep = in_g_theta(ctx, x, tol)
    if not rep.in_g_theta:
        raise StratumError(
            f"element is not in the open stratum (margin {rep.theta_margin:.3e})")
    bound = ctx.level(ctx.n - 1).rank - 1
    if rep.m > bound:
        raise StratumError(f"m={rep.m} exceeds the bound {bound}")
    return 2 ** rep.m


# -- witness constructions -------------------------------------------------


def random_theta_witness(ctx: AlgebraContext, rng, tol: Tolerances = DEFAULT_TOLS,
                         max_tries=200):
    """Random member of the stratum with a clear margin (rejection sampling)."""
    for _ in range(max_tries):
        x = ctx.random_element(rng)
        rep = in_g_theta(ctx, x, tol)
        if rep.in_g_theta and not rep.boundary:
            return x, rep
    raise StratumError("failed to sample a stratum member")


def random_gzero_witness(ctx: AlgebraContext, rng, tol: Tolerances = DEFAULT_TOLS,
                         max_tries=200):
    for _ in range(max_tries):
        x = ctx.random_element(rng)
        rep = in_g_zero(ctx, x, tol)
        if rep.member and not rep.boundary:
            return x, rep
    raise StratumError("failed to sample a g(0) member")


def _so4_regular_nilpotent_std(lvl4: AlgebraContext):
    return root_vector(lvl4, "e1-e2").entries + root_vector(lvl4, "e1+e2").entries


def _conjugated_so4_nilpotent(lvl4: AlgebraContext, rng, tol: Tolerances,
                              min_sep=0.05, max_tries=60):
    """Exactly nilpotent regular element of so(4) whose own chain
    projections have well-separated, nonzero spectra."""
    u_std = _so4_regular_nilpotent_std(lvl4)
    for _ in range(max_tries):
        g = expm(0.5 * lvl4.random_element(rng))
        u = g @ u_std @ np.linalg.inv(g)
        s3 = spectrum(lvl4.level(3), project(lvl4, u, 3).entries, tol)
        s2 = spectrum(lvl4.level(2), project(lvl4, u, 2).entries, tol)
        lam3 = np.abs(s3.support())
        if lam3.size == 0 or lam3.min() < min_sep:
            continue
        if _disjointness_margin(s2, s3) < min_sep:
            continue
        return u, g
    raise StratumError("failed to position the so(4) nilpotent")


def _coupled_so6_nilpotent(lvl6: AlgebraContext, rng, tol: Tolerances,
                           min_sep=0.05, newton_tries=20):
    """Exactly nilpotent regular element of so(6) whose level-4 projection is
    the standard so(4) regular nilpotent and whose level-5 projection has
    nonzero spectrum.

    The level-4 projection of so(6) only sees the outer 4x4 block, so fixing
    that block at the standard nilpotent and solving the three nilpotency
    equations (the so(6) invariants) in the remaining coupling coordinates by
    Newton yields a machine-precision point of the nilpotent variety.
    """
    u_emb = embed(lvl6, _so4_regular_nilpotent_std(lvl6.level(4)), 4)
    touch = np.array([b for b in lvl6.basis
                      if np.any(np.abs(b[2:4, :]) > 0) or np.any(np.abs(b[:, 2:4]) > 0)])

    def F_and_J(c):
        y = u_emb + np.tensordot(c, touch, axes=(0, 0))
        y2 = y @ y
        y3 = y2 @ y
        F = np.array([np.trace(y2), np.trace(y2 @ y2), pfaffian(lvl6, y)])
        gpf = _pfaffian_slot_gradient(lvl6, y, 6, tol)
        J = np.array([[2 * np.trace(y @ B) for B in touch],
                      [4 * np.trace(y3 @ B) for B in touch],
                      [np.trace(gpf @ B) for B in touch]])
        return y, F, J

    for _ in range(newton_tries):
        c = complex_gaussian(rng, len(touch))
        y = None
        for _ in range(60):
            y, F, J = F_and_J(c)
            r = np.abs(F).max()
            if r < 1e-13:
                break
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
            lam = 1.0
            for _ in range(12):
                _, F2, _ = F_and_J(c + lam * step)
                if np.abs(F2).max() < r:
                    break
                lam /= 2
            c = c + lam * step
        else:
            continue
        if np.abs(F).max() >= 1e-13:
            continue
        if zero_multiplicity(y, tol) != 6:
            continue
        from .regularity import centralizer

        if centralizer(lvl6, y, tol).dim != lvl6.rank:
            continue
        s5 = spectrum(lvl6.level(5), project(lvl6, y, 5).entries, tol)
        lam5 = np.abs(s5.support())
        if lam5.size and lam5.min() >= min_sep:
            return y
    raise StratumError("coupling construction did not converge")


def _extend_random(ctx: AlgebraContext, y, i, rng, tol: Tolerances,
                   min_sep=0.05, max_tries=80):
    """Extend an embedded member of g_{i-1} to g_i by a random anti-fixed
    component, keeping consecutive spectra separated and even levels free of
    unintended multiplicity >= 4 zeros."""
    lvl = ctx.level(i)
    p_basis = [embed(ctx, b, i) for b in lvl.involution().anti_fixed_basis()]
    prev = spectrum(ctx.level(i - 1), project(ctx, y, i - 1).entries, tol)
    for _ in range(max_tries):
        coeff = complex_gaussian(rng, len(p_basis))
        cand = y + np.tensordot(coeff, np.array(p_basis), axes=(0, 0))
        xi = project(ctx, cand, i).entries
        cur = spectrum(lvl, xi, tol)
        if _disjointness_margin(prev, cur) < min_sep:
            continue
        if i % 2 == 0 and zero_multiplicity(xi, tol) >= 4:
            continue
        return cand
    raise StratumError(f"failed to extend the witness to level {i}")


def component_witness(ctx: AlgebraContext, m, rng, tol: Tolerances = DEFAULT_TOLS,
                      max_tries=20):
    """An element of the spectral stratum whose KW fibre has exactly 2^m
    components, built with exactly nilpotent projections at m even levels.

    Supports m <= 2 (even levels 4 and 6), which covers the full range
    m <= r_{n-1} - 1 for n <= 8.
    """
    if ctx.family != "orthogonal" or ctx.n <= 3:
        raise StratumError("component witnesses need an orthogonal context with n > 3")
    bound = ctx.level(ctx.n - 1).rank - 1
    if not (0 <= m <= bound):
        raise StratumError(f"m={m} outside the feasible range 0..{bound}")
    if m > 2:
        raise StratumError("witness construction implemented for m <= 2 (n <= 8)")
    for _ in range(max_tries):
        try:
            if m == 0:
                x, _ = random_theta_witness(ctx, rng, tol)
            else:
                if m == 1:
                    u, _ = _conjugated_so4_nilpotent(ctx.level(4), rng, tol)
                    x = embed(ctx, u, 4)
                    start = 5
                else:
                    lvl6 = ctx.level(6)
                    y6 = _coupled_so6_nilpotent(lvl6, rng, tol)
                    u, g4 = _conjugated_so4_nilpotent(ctx.level(4), rng, tol)
                    G = embed(lvl6, g4, 4) + (np.eye(6) - embed(lvl6, np.eye(4), 4))
                    y6 = G @ y6 @ np.linalg.inv(G)
                    x = embed(ctx, y6, 6)
                    start = 7
                for i in range(start, ctx.n + 1):
                    x = _extend_random(ctx, x, i, rng, tol)
            rep = in_g_theta(ctx, x, tol)
            if rep.in_g_theta and not rep.boundary and rep.m == m:
                return x, rep
        except StratumError:
            continue
    raise StratumError(f"failed to build a witness with m={m} for n={ctx.n}")
