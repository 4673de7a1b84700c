"""Centralizers and the three regularity notions.

Every verdict is backed by an SVD rank decision and carries a margin
ratio: the distance of the decisive singular values to the cutoff,
relative to the cutoff.  Randomized sweeps exclude samples whose margin
falls inside the band (margin < Tolerances.band) instead of trusting a
coin-flip verdict there.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraContext, AlgebraError, as_matrix, bracket, embed, project
from .invariants import kw_jacobian, level_gradients
from .numerics import DEFAULT_TOLS, Tolerances, null_space, orthonormalize


@dataclass
class Subspace:
    """Orthonormal column stack in basis coordinates of a fixed context."""

    basis: np.ndarray           # (ambient_dim, dim), orthonormal columns
    context: AlgebraContext
    margin: float               # singular-value margin of the defining rank cut

    @property
    def dim(self):
        return self.basis.shape[1]

    def matrices(self):
        return [self.context.from_coords(self.basis[:, j]) for j in range(self.dim)]

    def projector(self):
        return self.basis @ self.basis.conj().T


@dataclass
class Verdict:
    """Boolean with the margin of the rank decision that produced it."""

    value: bool
    margin: float

    def __bool__(self):
        return self.value

    def in_band(self, tol: Tolerances = DEFAULT_TOLS):
        return self.margin < tol.band


def _ad_matrix(ctx, x):
    """Columns [x, b_j] flattened, for b_j in the basis of ctx."""
    X = as_matrix(x)
    cols = X[None] @ ctx.basis - ctx.basis @ X[None]
    return cols.reshape(ctx.dim, -1).T


def centralizer(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> Subspace:
    """z_g(x): null space of ad(x) on the context, in its basis coordinates."""
    ns, dec = null_space(_ad_matrix(ctx, as_matrix(x)), tol)
    return Subspace(ns, ctx, dec.margin)


def embedded_centralizer(ctx: AlgebraContext, x, i, tol: Tolerances = DEFAULT_TOLS) -> Subspace:
    """z_{g_i}(x_i) embedded in g, in the coordinates of the top context."""
    lvl = ctx.level(i)
    xi = project(ctx, x, i).entries
    small = centralizer(lvl, xi, tol)
    cols = [ctx.coords(embed(ctx, z, i)) for z in small.matrices()]
    onb = orthonormalize(np.array(cols).T, tol) if cols else np.zeros((ctx.dim, 0))
    return Subspace(onb, ctx, small.margin)


def intersect(ctx: AlgebraContext, A: Subspace, B: Subspace,
              tol: Tolerances = DEFAULT_TOLS) -> Subspace:
    """A cap B via the null space of stacked orthogonal-complement projectors."""
    if A.context is not B.context and (A.context.family, A.context.n) != (B.context.family, B.context.n):
        raise AlgebraError("subspaces live in different ambient algebras")
    d = A.basis.shape[0]
    if B.basis.shape[0] != d:
        raise AlgebraError("ambient coordinate dimensions differ")
    I = np.eye(d)
    M = np.vstack([I - A.projector(), I - B.projector()])
    ns, dec = null_space(M, tol)
    return Subspace(ns, A.context, dec.margin)


def is_regular(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> bool:
    return bool(regular_decision(ctx, x, tol))


def regular_decision(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> Verdict:
    """dim z(x) == rank(g)?"""
    z = centralizer(ctx, x, tol)
    return Verdict(z.dim == ctx.rank, z.margin)


def _row_normalize(J):
    norms = np.linalg.norm(J, axis=1)
    norms[norms == 0] = 1.0
    return J / norms[:, None]


def is_sreg_rank(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> bool:
    return bool(sreg_rank_decision(ctx, x, tol))


def sreg_rank_decision(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Kostant-Wallach criterion: all GZ differentials independent at x."""
    J = kw_jacobian(ctx, x, tol)
    want = J.shape[0]
    from .numerics import numerical_rank

    dec = numerical_rank(_row_normalize(J), tol)
    return Verdict(dec.rank == want, dec.margin)


def is_sreg_chain(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> bool:
    return bool(sreg_chain_decision(ctx, x, tol))


def sreg_chain_decision(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Consecutive-centralizer criterion:
    z_{g_i}(x_i) cap z_{g_{i+1}}(x_{i+1}) = 0 for i = 2..n-1.

    Regularity of the projections is not tested separately; triviality of
    the consecutive intersections already forces it.
    """
    margin = np.inf
    ok = True
    prev = embedded_centralizer(ctx, x, ctx.chain_start, tol)
    for i in range(ctx.chain_start + 1, ctx.n + 1):
        cur = embedded_centralizer(ctx, x, i, tol)
        margin = min(margin, prev.margin, cur.margin)
        meet = intersect(ctx, prev, cur, tol)
        margin = min(margin, meet.margin)
        if meet.dim != 0:
            ok = False
        prev = cur
    return Verdict(ok, float(margin))


def is_nsreg(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> bool:
    return bool(nsreg_decision(ctx, x, tol))


def nsreg_decision(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> Verdict:
    """n-strong regularity: z_k(x_k) cap z_g(x) = 0 at the top chain step."""
    if ctx.n < 3:
        raise AlgebraError("n-strong regularity needs n >= 3")
    zk = embedded_centralizer(ctx, x, ctx.n - 1, tol)
    zg = centralizer(ctx, x, tol)
    meet = intersect(ctx, zk, zg, tol)
    margin = min(zk.margin, zg.margin, meet.margin)
    return Verdict(meet.dim == 0, float(margin))


def omega_test(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> bool:
    return bool(omega_decision(ctx, x, tol))


def omega_decision(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> Verdict:
    """Nonvanishing of the top two blocks of GZ differentials at x."""
    if ctx.n < 3:
        raise AlgebraError("omega test needs n >= 3")
    rows = []
    for i in (ctx.n - 1, ctx.n):
        for g in level_gradients(ctx, x, i, tol):
            rows.append(ctx.coords(g))
    J = _row_normalize(np.array(rows))
    from .numerics import numerical_rank

    dec = numerical_rank(J, tol)
    return Verdict(dec.rank == J.shape[0], dec.margin)


def centralizer_commutant_residual(ctx: AlgebraContext, x, sub: Subspace):
    """max ||[z, x]|| over the subspace basis; diagnostic for tests."""
    X = as_matrix(x)
    return max((np.abs(bracket(z, X)).max() for z in sub.matrices()), default=0.0)
