"""Nilfibre constructions: regular nilpotents adapted to the chain,
standard theta-stable nilradicals, partial-nilfibre sampling, the
centralizer-overlap obstruction witness, and the nullcone components of
the slice representation.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .algebra import (AlgebraContext, AlgebraError, MatrixElement, as_matrix, bracket,
                      embed, root_vector, simple_roots)
from .numerics import DEFAULT_TOLS, Tolerances, complex_gaussian, orthonormalize
from .regularity import Subspace


@dataclass
class NilradicalRep:
    """A standard theta-stable nilradical with its split parts.

    basis_n spans n, basis_n_cap_k spans n cap k, basis_n_minus_theta
    spans the anti-fixed part n^{-theta}; cartan spans the defining
    Borel's Cartan subalgebra h of diagonal members.
    """

    label: str
    basis_n: list
    basis_n_cap_k: list
    basis_n_minus_theta: list
    cartan: list
    context: AlgebraContext

    @property
    def dim(self):
        return len(self.basis_n)

    def theta_stability_residual(self):
        inv = self.context.involution()
        N = np.array([self.context.coords(b) for b in self.basis_n]).T
        Nonb = orthonormalize(N)
        P = Nonb @ Nonb.conj().T
        worst = 0.0
        for b in self.basis_n:
            tb = self.context.coords(inv.apply(b))
            worst = max(worst, float(np.abs(tb - P @ tb).max()))
        return worst

    def subspace_minus_theta(self):
        cols = np.array([self.context.coords(b) for b in self.basis_n_minus_theta]).T
        return Subspace(orthonormalize(cols), self.context, np.inf)


def regular_nilpotent(ctx: AlgebraContext, tol: Tolerances = DEFAULT_TOLS) -> MatrixElement:
    """A regular nilpotent e whose chain projection e_k is again regular
    nilpotent, with all partial KW values exactly zero.

    Type B: the sum of simple root vectors plus the extra vector in the
    e(l-1)+e(l) root space, whose projection is the full simple-root sum
    of the fixed subalgebra.  Type D: the first l-2 simple root vectors
    plus the theta-symmetrization of the (l-1)-st, which is theta-fixed
    and regular on both levels.
    """
    if ctx.family != "orthogonal" or ctx.n < 4:
        raise AlgebraError("regular nilpotent construction needs an orthogonal context, n >= 4")
    l = ctx.rank
    if ctx.n % 2 == 1:
        e = sum(root_vector(ctx, lab).entries for lab in simple_roots(ctx))
        e = e + root_vector(ctx, f"e{l - 1}+e{l}").entries
    else:
        labs = [f"e{i}-e{i + 1}" for i in range(1, l - 1)]
        e = sum((root_vector(ctx, lab).entries for lab in labs),
                np.zeros((ctx.n, ctx.n), dtype=complex))
        v = root_vector(ctx, f"e{l - 1}-e{l}").entries
        e = e + 0.5 * (v + ctx.involution().apply(v))
    return MatrixElement(e, ctx)


def _upper_triangular_mask(b):
    r, c = np.nonzero(b)
    return np.all(r < c)


def _diagonal_mask(b):
    r, c = np.nonzero(b)
    return np.all(r == c)


def _split_by_theta(ctx, mats, tol):
    inv = ctx.involution()
    cols = np.array([ctx.coords(b) for b in mats]).T
    k_cols = orthonormalize(inv.P_k @ cols, tol)
    p_cols = orthonormalize(inv.P_p @ cols, tol)
    to_mats = lambda C: [ctx.from_coords(C[:, j]) for j in range(C.shape[1])]
    return to_mats(k_cols), to_mats(p_cols)


def reflection_representative(ctx: AlgebraContext):
    """Special-orthogonal representative of the short simple reflection
    (type B): exchange e_l and e_{-l} and negate e_0."""
    if ctx.family != "orthogonal" or ctx.n % 2 == 0:
        raise AlgebraError("the reflection representative is a type-B construction")
    l = ctx.rank
    W = np.eye(ctx.n)
    pl, pml, p0 = ctx.position(l), ctx.position(-l), ctx.position(0)
    W[[pl, pml]] = W[[pml, pl]]
    W[p0, p0] = -1.0
    return W


def standard_nilradicals(ctx: AlgebraContext, tol: Tolerances = DEFAULT_TOLS):
    """Representatives of the standard theta-stable nilradicals that carry
    the partial nilfibre: [n_+] for even n, [n_+, n_-] for odd n, with
    n_- = Ad(s) n_+ for the explicit reflection representative s."""
    if ctx.family != "orthogonal" or ctx.n < 4:
        raise AlgebraError("standard nilradicals need an orthogonal context with n >= 4")
    upper = [b.astype(complex) for b in ctx.basis if _upper_triangular_mask(b)]
    cartan = [b.astype(complex) for b in ctx.basis if _diagonal_mask(b)]
    nk, np_ = _split_by_theta(ctx, upper, tol)
    reps = [NilradicalRep("plus", upper, nk, np_, cartan, ctx)]
    if ctx.n % 2 == 1:
        W = reflection_representative(ctx)
        lower = [W @ b @ W for b in upper]
        nk2, np2 = _split_by_theta(ctx, lower, tol)
        reps.append(NilradicalRep("minus", lower, nk2, np2, cartan, ctx))
    return reps


def sample_partial_nilfibre(ctx: AlgebraContext, rng, rep: NilradicalRep = None,
                            tol: Tolerances = DEFAULT_TOLS):
    """Ad(k) . y for random y in a standard nilradical and random k in the
    identity component of the symmetry subgroup."""
    if ctx.family != "orthogonal" or ctx.n < 4:
        raise AlgebraError("partial nilfibre sampling needs an orthogonal context with n >= 4")
    reps = standard_nilradicals(ctx, tol) if rep is None else [rep]
    choice = reps[int(rng.integers(len(reps)))]
    coeff = complex_gaussian(rng, choice.dim)
    y = np.tensordot(coeff, np.array(choice.basis_n), axes=(0, 0))
    lvl = ctx.level(ctx.n - 1)
    z = embed(ctx, lvl.from_coords(complex_gaussian(rng, lvl.dim, 0.5)), ctx.n - 1)
    g = expm(z)
    out = g @ y @ expm(-z)
    return ctx.from_coords(ctx.coords(out))


def so3_nilfibre_sample(ctx: AlgebraContext, rng, tol: Tolerances = DEFAULT_TOLS):
    """n = 3 contrast: a Kostant-Wallach nilfibre point of so(3) = sl(2);
    these are strongly regular for nonzero samples, unlike every n > 3."""
    if ctx.family != "orthogonal" or ctx.n != 3:
        raise AlgebraError("this sampler is the n = 3 special case")
    sign = 1 if rng.integers(2) else -1
    lab = "e1" if sign > 0 else "-e1"
    y = complex(complex_gaussian(rng, ())) * root_vector(ctx, lab).entries
    lvl = ctx.level(2)
    z = embed(ctx, lvl.from_coords(complex_gaussian(rng, lvl.dim, 0.5)), 2)
    g = expm(z)
    return ctx.from_coords(ctx.coords(g @ y @ expm(-z)))


def obstruction_witness(ctx: AlgebraContext, rep: NilradicalRep,
                        tol: Tolerances = DEFAULT_TOLS) -> MatrixElement:
    """A nonzero element of z_k(n cap k) cap z_g(n): the highest-root vector
    (compact imaginary for n > 4), or its theta-symmetrization for n = 4
    where the top root is complex theta-stable and n is abelian.

    Such a witness certifies that no element of the partial nilfibre is
    n-strongly regular: it commutes with the whole nilradical, hence with
    every sampled element in the component, linearly.
    """
    if ctx.family != "orthogonal" or ctx.n <= 3:
        raise AlgebraError("obstruction witness needs an orthogonal context with n > 3")
    v = root_vector(ctx, "e1+e2").entries
    if ctx.n == 4:
        y = v + ctx.involution().apply(v)
    else:
        y = v
    if rep.label == "minus":
        # the highest root of the reflected Borel is the reflected highest
        # root; for rank 2 it differs from e1+e2, so conjugate the witness
        W = reflection_representative(ctx)
        y = W @ y @ W
    worst = max(float(np.abs(bracket(y, b)).max()) for b in rep.basis_n)
    tfix = float(np.abs(ctx.involution().apply(y) - y).max())
    if worst > 1e-12 or tfix > 1e-12:
        raise AlgebraError(f"witness verification failed: [y,n]={worst:.2e}, theta={tfix:.2e}")
    return MatrixElement(y, ctx)


def nullcone_components(ctx: AlgebraContext, tol: Tolerances = DEFAULT_TOLS):
    """All 2^{r_{n-1}} linear components of the slice-representation
    nullcone inside g^{-theta}, keyed by upper/lower sign words.

    Type B components are spanned by chosen short-root vectors e_{+-e_j};
    type D components by f_{+-j} - theta(f_{+-j}) with the anti-fixed
    Cartan coordinate zeroed.  Returns a list of (word, Subspace).
    """
    if ctx.family != "orthogonal" or ctx.n < 4:
        raise AlgebraError("nullcone enumeration needs an orthogonal context with n >= 4")
    l = ctx.rank
    inv = ctx.involution()
    r = ctx.level(ctx.n - 1).rank
    if ctx.n % 2 == 1:
        up = [root_vector(ctx, f"e{j}").entries for j in range(1, l + 1)]
        lo = [root_vector(ctx, f"-e{j}").entries for j in range(1, l + 1)]
    else:
        up, lo = [], []
        for j in range(1, l):
            f = root_vector(ctx, f"e{j}-e{l}").entries
            fm = root_vector(ctx, f"-e{j}+e{l}").entries
            up.append(f - inv.apply(f))
            lo.append(fm - inv.apply(fm))
    out = []
    for word in range(2 ** r):
        signs = tuple("U" if (word >> j) & 1 == 0 else "L" for j in range(r))
        mats = [up[j] if s == "U" else lo[j] for j, s in enumerate(signs)]
        cols = np.array([ctx.coords(m) for m in mats]).T
        out.append((signs, Subspace(orthonormalize(cols, tol), ctx, np.inf)))
    return out


def grading_element(ctx: AlgebraContext, word) -> MatrixElement:
    """Integer diagonal element of h cap k acting with positive weights on
    the nullcone component labelled by the given U/L word."""
    from .algebra import cartan_element

    l = ctx.rank
    r = ctx.level(ctx.n - 1).rank
    if len(word) != r:
        raise AlgebraError(f"word length {len(word)} != {r}")
    vals = np.zeros(l, dtype=complex)
    for j, s in enumerate(word):
        vals[j] = (r + 1 - j) * (1 if s == "U" else -1)
    # type D: the last Cartan coordinate is anti-fixed, h cap k sets it to zero
    return cartan_element(ctx, vals)
