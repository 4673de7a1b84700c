"""Gelfand-Zeitlin invariants: Pfaffian, chain trace powers, the
Kostant-Wallach map and its gradients.

For the orthogonal family the level-i generators are Tr(y^{2j}) for
j = 1..r_i when i is odd, and Tr(y^{2j}) for j < r_i plus a Pfaffian in
the top slot when i is even.  The Pfaffian convention is fixed as
Pfaff(y) := Pf(S_n y), which is well defined because S_n y is
skew-symmetric for y in so(n); any other nonzero scalar normalization
generates the same invariant ring, so downstream identities are
sign-insensitive.  The general-linear family uses Tr(y^j), j = 1..i.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import AlgebraContext, AlgebraError, MatrixElement, as_matrix, embed, project
from .numerics import DEFAULT_TOLS, Tolerances, numerical_rank, pair_by_negation


# -- Pfaffian -------------------------------------------------------------


@lru_cache(maxsize=None)
def _matchings(m):
    """Perfect matchings of {0..m-1} with permutation signs."""
    if m % 2:
        raise AlgebraError("pfaffian needs even size")

    def parity(perm):
        inv = 0
        for a in range(len(perm)):
            for b in range(a + 1, len(perm)):
                if perm[a] > perm[b]:
                    inv += 1
        return -1 if inv % 2 else 1

    pairs_list, signs = [], []

    def rec(items, acc):
        if not items:
            flat = [k for p in acc for k in p]
            pairs_list.append(list(acc))
            signs.append(parity(flat))
            return
        first = items[0]
        for t in range(1, len(items)):
            rec(items[1:t] + items[t + 1:], acc + [(first, items[t])])

    rec(tuple(range(m)), [])
    idx = np.array(pairs_list, dtype=int)          # (M, m/2, 2)
    return idx, np.array(signs, dtype=float)


def _pfaffian_combinatorial(A):
    A = np.asarray(A, dtype=complex)
    m = A.shape[-1]
    idx, signs = _matchings(m)
    terms = A[..., idx[:, :, 0], idx[:, :, 1]].prod(axis=-1)
    return terms @ signs


def _pfaffian_ltl(A):
    """Parlett-Reid skew-tridiagonalization with partial pivoting."""
    A = np.array(A, dtype=complex)
    m = A.shape[0]
    pf = 1.0 + 0.0j
    for k in range(0, m - 1, 2):
        col = np.abs(A[k + 1:, k])
        p = int(np.argmax(col)) + k + 1
        if A[p, k] == 0:
            return 0.0 + 0.0j
        if p != k + 1:
            A[[k + 1, p]] = A[[p, k + 1]]
            A[:, [k + 1, p]] = A[:, [p, k + 1]]
            pf = -pf
        pf *= A[k, k + 1]
        if k + 2 < m:
            f = A[k + 2:, k] / A[k + 1, k]
            A[k + 2:, :] -= np.outer(f, A[k + 1, :])
            A[:, k + 2:] -= np.outer(A[:, k + 1], f)
    return pf


def pfaffian(ctx: AlgebraContext, y, tol: Tolerances = DEFAULT_TOLS):
    """Pfaff(y) = Pf(S_n y) for y in so(2l).

    Combinatorial expansion for l <= 3, skew-tridiagonalization above.
    Rejects odd sizes and non-members.
    """
    if ctx.family != "orthogonal" or ctx.n % 2:
        raise AlgebraError(f"pfaffian needs an even orthogonal context, got {ctx.family} n={ctx.n}")
    Z = ctx.check_member(y, tol)
    A = ctx.S @ Z
    if ctx.n <= 6:
        return complex(_pfaffian_combinatorial(A))
    return complex(_pfaffian_ltl(A))


def _pfaffian_batch(S, stack, n):
    A = S[None] @ stack
    if n <= 6:
        return _pfaffian_combinatorial(A)
    return np.array([_pfaffian_ltl(a) for a in A])


# -- GZ values ------------------------------------------------------------


def gz_index(ctx: AlgebraContext):
    """Ordered slot index [(i, j)] of the KW map for this context."""
    return [(i, j) for i in range(ctx.chain_start, ctx.n + 1)
            for j in range(1, ctx.level(i).rank + 1)]


@dataclass
class GZValues:
    """Flat GZ value vector with its (i, j) indexing metadata."""

    index: list
    values: np.ndarray
    family: str
    n: int
    _slots: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if len(self.index) != len(self.values):
            raise AlgebraError("index/value length mismatch")
        self._slots = {ij: k for k, ij in enumerate(self.index)}

    def __len__(self):
        return len(self.values)

    def __getitem__(self, ij):
        return self.values[self._slots[tuple(ij)]]

    def block(self, i):
        sel = [k for k, (a, _) in enumerate(self.index) if a == i]
        return self.values[sel]

    def norm_inf(self):
        return float(np.abs(self.values).max()) if len(self.values) else 0.0

    def to_json(self):
        return {
            "index": [list(ij) for ij in self.index],
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }

    @classmethod
    def from_json(cls, doc, family="orthogonal", n=None):
        vals = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
        index = [tuple(ij) for ij in doc["index"]]
        if n is None:
            n = max(i for i, _ in index)
        return cls(index, vals, family, n)


def _is_pfaffian_slot(ctx, i, j):
    return ctx.family == "orthogonal" and i % 2 == 0 and j == ctx.level(i).rank


def _level_values(ctx, xi, i):
    """psi_{i,1..r_i}(xi) for the size-i projection xi."""
    lvl = ctx.level(i)
    r = lvl.rank
    out = np.zeros(r, dtype=complex)
    if ctx.family == "general-linear":
        p = np.eye(i, dtype=complex)
        for j in range(1, r + 1):
            p = p @ xi
            out[j - 1] = np.trace(p)
        return out
    x2 = xi @ xi
    p = np.eye(i, dtype=complex)
    top = r - 1 if i % 2 == 0 else r
    for j in range(1, top + 1):
        p = p @ x2
        out[j - 1] = np.trace(p)
    if i % 2 == 0:
        out[r - 1] = pfaffian(lvl, xi)
    return out


def gz_value(ctx: AlgebraContext, x, i, j, tol: Tolerances = DEFAULT_TOLS):
    """f_{i,j}(x) = psi_{i,j}(x_i)."""
    lvl = ctx.level(i)
    if not (1 <= j <= lvl.rank):
        raise AlgebraError(f"slot j={j} out of range for level {i}")
    ctx.check_member(x, tol)
    xi = project(ctx, x, i).entries
    return complex(_level_values(ctx, xi, i)[j - 1])


def kw_map(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> GZValues:
    """The Kostant-Wallach map: all GZ values along the chain."""
    ctx.check_member(x, tol)
    index = gz_index(ctx)
    vals = []
    for i in range(ctx.chain_start, ctx.n + 1):
        xi = project(ctx, x, i).entries
        vals.append(_level_values(ctx, xi, i))
    fam = "so" if ctx.family == "orthogonal" else "gl"
    return GZValues(index, np.concatenate(vals), fam, ctx.n)


def partial_kw(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> GZValues:
    """The partial KW map: only the i = n-1, n blocks."""
    ctx.check_member(x, tol)
    index, vals = [], []
    for i in (ctx.n - 1, ctx.n):
        xi = project(ctx, x, i).entries
        index += [(i, j) for j in range(1, ctx.level(i).rank + 1)]
        vals.append(_level_values(ctx, xi, i))
    fam = "so" if ctx.family == "orthogonal" else "gl"
    return GZValues(index, np.concatenate(vals), fam, ctx.n)


# -- spectra --------------------------------------------------------------


@dataclass
class Spectrum:
    """Clustered eigenvalue multiset with the type-B zero convention.

    For odd orthogonal sizes a forced singleton zero eigenvalue is not
    part of the spectrum; it is listed only when its raw multiplicity
    exceeds one, and `zero_suppressed` records the suppression.
    """

    values: np.ndarray            # cluster centers
    multiplicities: np.ndarray
    zero_suppressed: bool
    clustering_ok: bool
    scale: float

    def as_multiset(self):
        return np.repeat(self.values, self.multiplicities)

    def support(self):
        return self.values


def spectrum(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS) -> Spectrum:
    """Eigenvalues of a member, clustered at tol.cluster * max(1, ||x||)."""
    Z = as_matrix(x)
    raw = np.linalg.eigvals(Z)
    scale = max(1.0, float(np.linalg.norm(Z, 2))) if Z.size else 1.0
    tc = tol.cluster * scale
    order = np.lexsort((raw.imag, raw.real))
    raw = raw[order]
    # union-find clustering at tolerance tc
    parent = list(range(len(raw)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(len(raw)):
        for b in range(a + 1, len(raw)):
            if abs(raw[a] - raw[b]) <= tc:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    groups = {}
    for a in range(len(raw)):
        groups.setdefault(find(a), []).append(raw[a])
    centers = np.array([np.mean(g) for g in groups.values()])
    mults = np.array([len(g) for g in groups.values()], dtype=int)
    order = np.lexsort((centers.imag, centers.real))
    centers, mults = centers[order], mults[order]
    centers[np.abs(centers) <= tc] = 0.0

    ok = True
    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            if abs(centers[a] - centers[b]) < 10 * tc:
                ok = False

    suppressed = False
    if ctx.family == "orthogonal" and ctx.n % 2 == 1:
        zero_at = np.where(centers == 0.0)[0]
        if zero_at.size and mults[zero_at[0]] == 1:
            keep = np.ones(len(centers), dtype=bool)
            keep[zero_at[0]] = False
            centers, mults = centers[keep], mults[keep]
            suppressed = True
    return Spectrum(centers, mults, suppressed, ok, scale)


def spectrum_negation_defect(spec: Spectrum):
    """How far the multiset is from being closed under negation."""
    vals = spec.as_multiset()
    _, unpaired = pair_by_negation(vals, 10 * DEFAULT_TOLS.cluster * spec.scale)
    unpaired = [v for v in unpaired if v != 0.0]
    return max((abs(v) for v in unpaired), default=0.0)


def zero_multiplicity(x, tol: Tolerances = DEFAULT_TOLS):
    """Algebraic multiplicity of the eigenvalue 0, via rank of a matrix power.

    Jordan-robust: backward error eps in the entries perturbs eigenvalues
    of a size-k nilpotent block by eps^(1/k), which no eigenvalue
    clustering tolerance can absorb, while rank(x^m) degrades only
    linearly with eps.
    """
    Z = as_matrix(x)
    m = Z.shape[0]
    nrm = float(np.linalg.norm(Z, 2))
    if nrm == 0.0:
        return m
    A = np.linalg.matrix_power(Z / nrm, m)
    dec = numerical_rank(A, tol, scale=1.0)
    return m - dec.rank


# -- gradients ------------------------------------------------------------


def _trace_slot_gradient(ctx, xi, i, j):
    if ctx.family == "general-linear":
        if j == 1:
            return np.eye(i, dtype=complex)
        return j * np.linalg.matrix_power(xi, j - 1)
    return 2 * j * np.linalg.matrix_power(xi, 2 * j - 1)


def _pfaffian_slot_gradient(ctx, xi, i, tol):
    """Trace-form gradient of Pfaff on g_i by central finite differences
    along the basis directions, converted through the Gram matrix."""
    lvl = ctx.level(i)
    h = tol.fd_step
    B = lvl.basis
    stack = np.concatenate([xi[None] + h * B, xi[None] - h * B])
    pf = _pfaffian_batch(lvl.S, stack, i)
    d = (pf[: lvl.dim] - pf[lvl.dim:]) / (2 * h)
    c = np.linalg.solve(lvl.gram(), d)
    return lvl.from_coords(c)


def gz_gradient(ctx: AlgebraContext, x, i, j, tol: Tolerances = DEFAULT_TOLS) -> MatrixElement:
    """Trace-form gradient of f_{i,j} at x, as an embedded member of g."""
    lvl = ctx.level(i)
    if not (1 <= j <= lvl.rank):
        raise AlgebraError(f"slot j={j} out of range for level {i}")
    xi = project(ctx, x, i).entries
    if _is_pfaffian_slot(ctx, i, j):
        g = _pfaffian_slot_gradient(ctx, xi, i, tol)
    else:
        g = _trace_slot_gradient(ctx, xi, i, j)
    return MatrixElement(embed(ctx, g, i), ctx)


def level_gradients(ctx: AlgebraContext, x, i, tol: Tolerances = DEFAULT_TOLS):
    """All level-i gradients at x as embedded n x n matrices."""
    lvl = ctx.level(i)
    xi = project(ctx, x, i).entries
    out = []
    for j in range(1, lvl.rank + 1):
        if _is_pfaffian_slot(ctx, i, j):
            g = _pfaffian_slot_gradient(ctx, xi, i, tol)
        else:
            g = _trace_slot_gradient(ctx, xi, i, j)
        out.append(embed(ctx, g, i))
    return out


def kw_jacobian(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS):
    """All GZ gradients stacked as rows in basis coordinates of g."""
    rows = []
    for i in range(ctx.chain_start, ctx.n + 1):
        for g in level_gradients(ctx, x, i, tol):
            rows.append(ctx.coords(g))
    return np.array(rows)


def kw_derivative(ctx: AlgebraContext, x, tol: Tolerances = DEFAULT_TOLS):
    """Derivative of c -> Phi(sum c_j b_j): kw_jacobian pushed through the Gram."""
    return kw_jacobian(ctx, x, tol) @ ctx.gram()
