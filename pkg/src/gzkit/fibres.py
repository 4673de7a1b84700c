"""Fibres of the Kostant-Wallach map: a Gauss-Newton surjectivity witness,
the conjugation parametrization of generic fibres, Hamiltonian GZ flows,
and the general-linear Hessenberg cross-section.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, solve_triangular

from .algebra import AlgebraContext, AlgebraError, as_matrix, embed, project
from .invariants import (GZValues, _is_pfaffian_slot, _pfaffian_slot_gradient,
                         _trace_slot_gradient, gz_index, kw_derivative, kw_map)
from .numerics import DEFAULT_TOLS, Tolerances, complex_gaussian
from .regularity import embedded_centralizer
from .strata import StratumError, in_g_theta


class SolveError(AlgebraError):
    pass


@dataclass
class SolveReport:
    target: np.ndarray
    x: np.ndarray
    residual: float
    iterations: int
    restarts: int
    success: bool
    tol_used: float

    def to_json(self):
        return {
            "success": self.success,
            "residual": self.residual,
            "iterations": self.iterations,
            "restarts": self.restarts,
            "tol": self.tol_used,
            "target": {"re": self.target.real.tolist(), "im": self.target.imag.tolist()},
            "x": {"re": self.x.real.tolist(), "im": self.x.imag.tolist()},
        }


def _cleanup(ctx, y):
    """Project conjugation round-off back onto the algebra (exact in exact
    arithmetic, an l2-orthogonal projection numerically)."""
    return ctx.from_coords(ctx.coords(y))


def _target_array(ctx, c):
    if isinstance(c, GZValues):
        c = c.values
    c = np.asarray(c, dtype=complex).ravel()
    want = len(gz_index(ctx))
    if len(c) != want:
        raise SolveError(f"target length {len(c)} != {want}")
    return c


def solve_fibre(ctx: AlgebraContext, c, seed=0, restarts=20, max_iter=100,
                tol: Tolerances = DEFAULT_TOLS) -> SolveReport:
    """Find x with Phi(x) = c by damped Gauss-Newton from random starts.

    The Jacobian is the shared kw_jacobian code path pushed through the
    basis Gram matrix.  It is full-rank only on the dense strongly regular
    set, so stagnating runs restart from a fresh random point; failure
    after the restart budget reports the best residual and signals a hard
    target, not a disproof of surjectivity.
    """
    target = _target_array(ctx, c)
    scale = max(1.0, float(np.abs(target).max()) if len(target) else 1.0)
    tol_res = tol.solve * scale
    rng = np.random.default_rng(seed)
    start_scale = max(1.0, scale ** 0.5)
    best = (np.inf, np.zeros((ctx.n, ctx.n), dtype=complex))
    total_iters = 0
    for attempt in range(max(1, restarts)):
        x = ctx.from_coords(complex_gaussian(rng, ctx.dim, start_scale / np.sqrt(ctx.n)))
        r = kw_map(ctx, x, tol).values - target
        fn = np.linalg.norm(r)
        for _ in range(max_iter):
            total_iters += 1
            rn = float(np.abs(r).max())
            if rn < best[0]:
                best = (rn, x)
            if rn < tol_res:
                return SolveReport(target, x, rn, total_iters, attempt + 1, True, tol_res)
            D = kw_derivative(ctx, x, tol)
            step = np.linalg.lstsq(D, -r, rcond=None)[0]
            lam = 1.0
            while lam >= 1e-12:
                x_new = x + ctx.from_coords(lam * step)
                r_new = kw_map(ctx, x_new, tol).values - target
                fn_new = np.linalg.norm(r_new)
                if fn_new ** 2 <= (1 - 1e-4 * lam) * fn ** 2:
                    break
                lam *= 0.5
            if lam < 1e-12:
                break                      # stagnation: restart
            x, r, fn = x_new, r_new, fn_new
        rn = float(np.abs(r).max())
        if rn < best[0]:
            best = (rn, x)
        if best[0] < tol_res:
            return SolveReport(target, best[1], best[0], total_iters, attempt + 1, True, tol_res)
    return SolveReport(target, best[1], best[0], total_iters, max(1, restarts), False, tol_res)


# -- fibre parametrization --------------------------------------------------


@dataclass
class FibreSampler:
    """Conjugation parametrization of the fibre through a stratum point.

    Holds the base point and bases of the per-level centralizers
    z_{g_i}(x_i), i = 2..n-1; points are produced by conjugating the base
    with exp of centralizer directions, which stays in the fibre exactly.
    Only identity components are reachable this way.
    """

    context: AlgebraContext
    base: np.ndarray
    seed: int = 0
    level_bases: dict = field(default_factory=dict)
    theta_margin: float = 0.0

    @classmethod
    def at(cls, ctx: AlgebraContext, x, seed=0, tol: Tolerances = DEFAULT_TOLS,
           require_stratum=True):
        X = as_matrix(x)
        margin = np.inf
        if require_stratum:
            rep = in_g_theta(ctx, X, tol)
            if not rep.in_g_theta:
                raise StratumError(
                    f"fibre sampler needs a stratum base point (margin {rep.theta_margin:.3e})")
            margin = rep.theta_margin
        bases = {}
        for i in range(ctx.chain_start, ctx.n):
            sub = embedded_centralizer(ctx, X, i, tol)
            if sub.dim != ctx.level(i).rank:
                raise StratumError(
                    f"level {i} centralizer has dim {sub.dim}, expected {ctx.level(i).rank}")
            bases[i] = [ctx.from_coords(sub.basis[:, j]) for j in range(sub.dim)]
        return cls(ctx, X, seed, bases, float(margin))

    def levels(self):
        return sorted(self.level_bases)

    def coeff_sizes(self):
        return [len(self.level_bases[i]) for i in self.levels()]

    def point(self, coeffs):
        """Ad(exp(s_2)) ... Ad(exp(s_{n-1})) . base for s_i = sum coeffs_i Z_i."""
        levels = self.levels()
        if len(coeffs) != len(levels):
            raise AlgebraError(f"need {len(levels)} coefficient blocks")
        g = np.eye(self.context.n, dtype=complex)
        ginv = np.eye(self.context.n, dtype=complex)
        for i, cf in zip(levels, coeffs):
            cf = np.asarray(cf, dtype=complex)
            basis = self.level_bases[i]
            if cf.shape != (len(basis),):
                raise AlgebraError(f"level {i} expects {len(basis)} coefficients")
            s = np.tensordot(cf, np.array(basis), axes=(0, 0))
            g = g @ expm(s)
            ginv = expm(-s) @ ginv
        return _cleanup(self.context, g @ self.base @ ginv)

    def draw(self, rng, scale=0.5):
        return self.point([complex_gaussian(rng, k, scale) for k in self.coeff_sizes()])


def sample_fibre_point(sampler: FibreSampler, coeffs):
    return sampler.point(coeffs)


def psi_differential_rank(sampler: FibreSampler, tol: Tolerances = DEFAULT_TOLS):
    """Numerical rank of the differential of the parametrization at 0,
    by central finite differences along every centralizer direction."""
    h = tol.fd_step
    sizes = sampler.coeff_sizes()
    cols = []
    for bi, k in enumerate(sizes):
        for j in range(k):
            plus = [np.zeros(s, dtype=complex) for s in sizes]
            minus = [np.zeros(s, dtype=complex) for s in sizes]
            plus[bi][j] = h
            minus[bi][j] = -h
            d = (sampler.point(plus) - sampler.point(minus)) / (2 * h)
            cols.append(d.ravel())
    M = np.array(cols).T
    from .numerics import numerical_rank

    return numerical_rank(M / max(1.0, np.linalg.norm(sampler.base, 2)), tol).rank


# -- GZ flows ---------------------------------------------------------------


def _flow_generator(ctx, x, i, j, tol):
    lvl = ctx.level(i)
    xi = project(ctx, x, i).entries
    if _is_pfaffian_slot(ctx, i, j):
        v = _pfaffian_slot_gradient(ctx, xi, i, tol)
        # the exact gradient centralizes x_i; project off the finite-difference noise
        from .regularity import centralizer

        z = centralizer(lvl, xi, tol)
        cv = lvl.coords(v)
        v = lvl.from_coords(z.basis @ (z.basis.conj().T @ cv))
    else:
        v = _trace_slot_gradient(ctx, xi, i, j)
    return embed(ctx, v, i)


def gz_flow(ctx: AlgebraContext, x, index, t, tol: Tolerances = DEFAULT_TOLS):
    """Time-t Hamiltonian flow of f_{i,j}: x(t) = Ad(exp(t grad psi_{i,j}(x_i))) . x.

    The gradient lies in z_{g_i}(x_i), so every GZ value is conserved along
    the flow; top-level flows fix x.
    """
    i, j = index
    lvl = ctx.level(i)
    if not (1 <= j <= lvl.rank):
        raise AlgebraError(f"invalid GZ index {(i, j)}")
    X = as_matrix(x)
    V = _flow_generator(ctx, X, i, j, tol)
    return _cleanup(ctx, expm(t * V) @ X @ expm(-t * V))


# -- Hessenberg cross-section ----------------------------------------------


def _newton_to_charpoly(power_sums):
    """Monic characteristic polynomial coefficients (ascending degree) from
    the power sums p_1..p_i, via Newton's identities."""
    i = len(power_sums)
    e = np.zeros(i + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, i + 1):
        acc = 0.0 + 0.0j
        for j in range(1, k + 1):
            acc += (-1) ** (j - 1) * e[k - j] * power_sums[j - 1]
        e[k] = acc / k
    chi = np.zeros(i + 1, dtype=complex)
    for k in range(i + 1):
        chi[i - k] = (-1) ** k * e[k]
    return chi


def hessenberg_section(ctx: AlgebraContext, c, tol: Tolerances = DEFAULT_TOLS):
    """The unique upper Hessenberg matrix with unit subdiagonal and Phi = c.

    Processes the corners in order: the characteristic polynomial of the
    i-corner is affine in its last column, so each level is one triangular
    linear solve against the already-fixed (i-1)-corner.
    """
    if ctx.family != "general-linear":
        raise AlgebraError("the Hessenberg section exists for the general-linear family")
    target = _target_array(ctx, c)
    n = ctx.n
    H = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        H[k, k - 1] = 1.0
    chis = [np.array([1.0 + 0.0j])]          # chi_0 = 1
    pos = 0
    for i in range(1, n + 1):
        p = target[pos: pos + i]
        pos += i
        chi_i = _newton_to_charpoly(p)
        lhs = np.zeros(i + 1, dtype=complex)
        lhs[1:] += chis[i - 1]                # t * chi_{i-1}
        lhs -= chi_i
        if abs(lhs[i]) > 1e-8 * max(1.0, np.abs(chi_i).max()):
            raise SolveError("leading coefficient mismatch in Hessenberg solve")
        # a_ii chi_{i-1} + sum_k a_{ki} chi_{k-1} = lhs, triangular in degrees
        M = np.zeros((i, i), dtype=complex)
        for k in range(1, i + 1):
            M[: k, k - 1] = chis[k - 1]
        a = solve_triangular(M, lhs[:i], lower=False, unit_diagonal=True)
        H[: i, i - 1] = a
        chis.append(chi_i)
    got = kw_map(ctx, H, tol).values
    res = float(np.abs(got - target).max())
    if res > tol.solve * max(1.0, float(np.abs(target).max())):
        raise SolveError(f"Hessenberg verification residual {res:.3e}")
    return H
