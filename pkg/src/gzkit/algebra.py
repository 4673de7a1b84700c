"""Matrix realizations of so(n) and gl(n) and the subalgebra chain.

Conventions for the orthogonal family:

* so(n) is realized with respect to the symmetric bilinear form
  beta(x, y) = x^T S_n y where S_n has ones down the skew diagonal, so
  Z in so(n) iff Z^T S_n + S_n Z = 0.  Diagonal members look like
  diag[a_1..a_l, -a_l..-a_1] (even n) or diag[a_1..a_l, 0, -a_l..-a_1]
  (odd n).
* Coordinates carry signed labels: e_{-j} is the mirror of e_j across
  the skew diagonal, and odd sizes have a middle label 0.  The basis
  consists of X_{a,b} = E_{a,b} - E_{-b,-a}, deduplicated by keeping the
  representative whose position pair (p, q) has p + q < n - 1, ordered
  lexicographically in (p, q).  All basis entries are exact integers.
* The chain g_2 c g_3 c ... c g_n descends by fixed spaces of the
  involutions theta_i.  Each step is realized by an explicit isometric
  embedding C^{i-1} -> C^i; composing them gives column-isometries U_i
  with U_i^T S_n U_i = S_i, and the trace-form projection of x onto the
  embedded g_i is P_i x P_i with P_i = U_i U_i^+, U_i^+ = S_i U_i^T S_n.

The general-linear family uses matrix units as basis and top-left corner
embeddings.
"""

import re
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_TOLS, Tolerances, complex_gaussian


def form_matrix(n):
    """S_n: ones down the skew diagonal."""
    return np.eye(n, dtype=float)[::-1].copy()


class AlgebraError(ValueError):
    pass


class MembershipError(AlgebraError):
    pass


@dataclass
class MatrixElement:
    """A dense complex matrix asserted to lie in the tagged algebra."""

    entries: np.ndarray
    context: "AlgebraContext"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (self.context.n, self.context.n):
            raise AlgebraError(
                f"shape {self.entries.shape} does not match n={self.context.n}"
            )

    def member_residual(self):
        return self.context.member_residual(self.entries)

    def to_json(self):
        fam = "so" if self.context.family == "orthogonal" else "gl"
        return {
            "n": self.context.n,
            "family": fam,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }


def matrix_from_json(doc):
    fam = {"so": "orthogonal", "gl": "general-linear"}.get(doc.get("family"))
    if fam is None:
        raise AlgebraError(f"unknown family {doc.get('family')!r}")
    n = int(doc["n"])
    z = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
    return MatrixElement(z, build_algebra(fam, n))


def as_matrix(x):
    return x.entries if isinstance(x, MatrixElement) else np.asarray(x, dtype=complex)


class AlgebraContext:
    """A realized Lie algebra in the chain, immutable after construction."""

    def __init__(self, family, n):
        if family not in ("orthogonal", "general-linear"):
            raise AlgebraError(f"unknown family {family!r}")
        if n < 2 and family == "orthogonal":
            raise AlgebraError(f"orthogonal family needs n >= 2, got {n}")
        if n < 1:
            raise AlgebraError(f"n must be positive, got {n}")
        self.family = family
        self.n = n
        if family == "orthogonal":
            self.rank = n // 2
            self.dim = n * (n - 1) // 2
            self.S = form_matrix(n)
            self.chain_start = 2
        else:
            self.rank = n
            self.dim = n * n
            self.S = np.eye(n)
            self.chain_start = 1
        self.basis = self._build_basis()
        self._basis_flat = self.basis.reshape(self.dim, n * n)
        self._basis_norm2 = np.einsum("ij,ij->i", self._basis_flat, self._basis_flat).real
        self._levels = {}
        self._embeddings = {}
        self._gram = None
        self._involution = None

    # -- construction -------------------------------------------------

    def _build_basis(self):
        n = self.n
        if self.family == "general-linear":
            basis = np.zeros((n * n, n, n))
            k = 0
            for p in range(n):
                for q in range(n):
                    basis[k, p, q] = 1.0
                    k += 1
            return basis
        basis = np.zeros((self.dim, n, n))
        k = 0
        for p in range(n):
            for q in range(n):
                if p + q < n - 1:
                    basis[k, p, q] += 1.0
                    basis[k, n - 1 - q, n - 1 - p] -= 1.0
                    k += 1
        assert k == self.dim
        return basis

    # -- signed labels ------------------------------------------------

    def position(self, label):
        """Position (0-based) of the signed basis label."""
        n, l = self.n, self.n // 2
        if label == 0:
            if n % 2 == 0:
                raise AlgebraError("label 0 only exists for odd sizes")
            return l
        if 1 <= label <= l:
            return label - 1
        if -l <= label <= -1:
            return n + label
        raise AlgebraError(f"label {label} out of range for n={n}")

    def labels(self):
        l = self.n // 2
        out = list(range(1, l + 1))
        if self.n % 2 == 1:
            out.append(0)
        out += list(range(-l, 0))
        return out

    def unit(self, a, b):
        """Matrix unit E_{a,b} in signed labels."""
        E = np.zeros((self.n, self.n), dtype=complex)
        E[self.position(a), self.position(b)] = 1.0
        return E

    def skew_unit(self, a, b):
        """X_{a,b} = E_{a,b} - E_{-b,-a}; zero iff a = -b."""
        return self.unit(a, b) - self.unit(-b, -a)

    # -- membership / coordinates -------------------------------------

    def member_residual(self, Z):
        Z = as_matrix(Z)
        if self.family == "general-linear":
            return 0.0
        num = np.abs(Z.T @ self.S + self.S @ Z).max()
        den = max(np.abs(Z).max(), 1e-300)
        return float(num / den)

    def check_member(self, Z, tol: Tolerances = DEFAULT_TOLS):
        Z = as_matrix(Z)
        if Z.shape != (self.n, self.n):
            raise MembershipError(f"shape {Z.shape} does not match n={self.n}")
        res = self.member_residual(Z)
        if np.abs(Z).max() > 0 and res > tol.member:
            raise MembershipError(f"membership residual {res:.3e} exceeds {tol.member:.1e}")
        return Z

    def coords(self, Z):
        """Coordinates of a member in the ordered basis (exact for members)."""
        v = as_matrix(Z).reshape(-1)
        return (self._basis_flat @ v) / self._basis_norm2

    def from_coords(self, c):
        c = np.asarray(c, dtype=complex)
        return np.tensordot(c, self.basis, axes=(0, 0))

    def gram(self):
        """Trace-form Gram matrix of the basis."""
        if self._gram is None:
            flat_t = self.basis.transpose(0, 2, 1).reshape(self.dim, -1)
            self._gram = flat_t @ self._basis_flat.T
        return self._gram

    def trace_pairing_rows(self, mats):
        """<<m, b_j>> for each matrix in the stack against every basis element."""
        mats = np.asarray(mats, dtype=complex)
        flat = mats.transpose(0, 2, 1).reshape(mats.shape[0], -1)
        return flat @ self._basis_flat.T

    def random_element(self, rng, scale=1.0):
        c = complex_gaussian(rng, self.dim, scale / np.sqrt(self.n))
        return self.from_coords(c)

    # -- chain --------------------------------------------------------

    def level(self, i):
        """AlgebraContext of g_i in the chain (standard realization of size i)."""
        if not (self.chain_start <= i <= self.n):
            raise AlgebraError(f"chain index {i} out of range [{self.chain_start}, {self.n}]")
        if i == self.n:
            return self
        if i not in self._levels:
            self._levels[i] = AlgebraContext(self.family, i)
        return self._levels[i]

    def _step_embedding(self, i):
        """Isometry C^{i-1} -> C^i realizing g_{i-1} = g_i^{theta_i}."""
        if self.family == "general-linear":
            return np.eye(i, i - 1)
        T = np.zeros((i, i - 1))
        if i % 2 == 1:          # type B step: drop the middle label 0 of g_i
            m = i // 2
            for q in range(i - 1):
                T[q if q < m else q + 1, q] = 1.0
        else:                   # type D step: label 0 of g_{i-1} -> (e_l + e_{-l})/sqrt(2)
            m = i // 2
            for q in range(i - 1):
                if q < m - 1:
                    T[q, q] = 1.0
                elif q == m - 1:
                    T[m - 1, q] = T[m, q] = 1.0 / np.sqrt(2.0)
                else:
                    T[q + 1, q] = 1.0
        return T

    def embedding(self, i):
        """(U_i, U_i^+): column isometry C^i -> C^n and its form-adjoint inverse."""
        if not (self.chain_start <= i <= self.n):
            raise AlgebraError(f"chain index {i} out of range [{self.chain_start}, {self.n}]")
        if i not in self._embeddings:
            U = np.eye(self.n)
            for j in range(self.n, i, -1):
                U = U @ self._step_embedding(j)
            Si = self.level(i).S
            Uplus = Si @ U.T @ self.S
            self._embeddings[i] = (U, Uplus)
        return self._embeddings[i]

    def sub_ranks(self):
        """Ranks r_i along the chain, i = chain_start..n."""
        return [self.level(i).rank for i in range(self.chain_start, self.n + 1)]

    # -- involution ----------------------------------------------------

    def involution(self):
        if self.family != "orthogonal" or self.n < 3:
            raise AlgebraError("involution requires an orthogonal context with n >= 3")
        if self._involution is None:
            self._involution = InvolutionData(self)
        return self._involution


class InvolutionData:
    """The involution theta of so(n) with fixed algebra so(n-1).

    Type B (odd n): theta = Ad(t) with t the diagonal torus element
    acting by -1 on every short root space.  Type D (even n): theta is
    induced by the basis map e_l <-> e_{-l} (a diagram automorphism; its
    matrix has determinant -1, so it is stored as a linear map on g, not
    as conjugation by an SO element).
    """

    def __init__(self, ctx: AlgebraContext):
        self.context = ctx
        n, l = ctx.n, ctx.n // 2
        if n % 2 == 1:
            t = -np.ones(n)
            t[ctx.position(0)] = 1.0
            self.representative = np.diag(t)
            self.kind = "torus"
        else:
            P = np.eye(n)
            pl, pml = ctx.position(l), ctx.position(-l)
            P[[pl, pml]] = P[[pml, pl]]
            self.representative = P
            self.kind = "basis-swap"
        R = self.representative
        self._conj = (R, np.linalg.inv(R))
        self.theta_matrix = self._matrix_on_basis()
        d = ctx.dim
        I = np.eye(d)
        self.P_k = 0.5 * (I + self.theta_matrix)
        self.P_p = 0.5 * (I - self.theta_matrix)
        self.fixed_dim = int(round(np.trace(self.P_k).real))

    def apply(self, Z):
        R, Rinv = self._conj
        return R @ as_matrix(Z) @ Rinv

    def _matrix_on_basis(self):
        ctx = self.context
        cols = [ctx.coords(self.apply(b)) for b in ctx.basis]
        return np.array(cols).T.real

    def fixed_basis(self):
        """Matrices spanning the fixed subalgebra g^theta inside g."""
        w, v = np.linalg.eigh(self.theta_matrix)
        keep = v[:, w > 0.5]
        return [self.context.from_coords(keep[:, j]) for j in range(keep.shape[1])]

    def anti_fixed_basis(self):
        w, v = np.linalg.eigh(self.theta_matrix)
        keep = v[:, w < -0.5]
        return [self.context.from_coords(keep[:, j]) for j in range(keep.shape[1])]


# -- public operations ---------------------------------------------------


def build_algebra(family, n) -> AlgebraContext:
    """Explicit realization of so(n) (family 'orthogonal') or gl(n).

    Orthogonal contexts reject n < 2; the basis is exact and ordered
    deterministically, so coordinates are reproducible across runs.
    """
    if family == "orthogonal" and n < 2:
        raise AlgebraError(f"orthogonal family needs n >= 2, got {n}")
    return AlgebraContext(family, n)


def project(ctx: AlgebraContext, x, i) -> MatrixElement:
    """Trace-form projection x_i of x onto g_i, in the size-i realization."""
    U, Uplus = ctx.embedding(i)
    xi = Uplus @ as_matrix(x) @ U
    return MatrixElement(xi, ctx.level(i))


def embed(ctx: AlgebraContext, z, i) -> np.ndarray:
    """Embed a size-i member of g_i into g_n as an n x n matrix."""
    U, Uplus = ctx.embedding(i)
    return U @ as_matrix(z) @ Uplus


def project_embedded(ctx: AlgebraContext, x, i) -> np.ndarray:
    """x_i as an n x n matrix: P_i x P_i."""
    U, Uplus = ctx.embedding(i)
    P = U @ Uplus
    return P @ as_matrix(x) @ P


def theta(ctx: AlgebraContext, x) -> MatrixElement:
    return MatrixElement(ctx.involution().apply(x), ctx)


def cartan_decompose(ctx: AlgebraContext, x):
    """x = x_k + x_p with theta(x_k) = x_k, theta(x_p) = -x_p."""
    inv = ctx.involution()
    Z = as_matrix(x)
    tz = inv.apply(Z)
    return MatrixElement(0.5 * (Z + tz), ctx), MatrixElement(0.5 * (Z - tz), ctx)


_ROOT_RE = re.compile(r"^\s*([+-]?)e(\d+)\s*(?:([+-])\s*e(\d+))?\s*$")


def parse_root_label(label):
    """Parse 'e1-e2', 'e1+e2', 'e3', '-e2', '-e1-e2' into {index: sign}."""
    if isinstance(label, dict):
        return dict(label)
    m = _ROOT_RE.match(str(label))
    if not m:
        raise AlgebraError(f"cannot parse root label {label!r}")
    s1, i1, s2, i2 = m.groups()
    out = {int(i1): -1 if s1 == "-" else 1}
    if i2 is not None:
        j = int(i2)
        if j in out:
            raise AlgebraError(f"repeated index in root label {label!r}")
        out[j] = -1 if s2 == "-" else 1
    return out


def root_vector(ctx: AlgebraContext, label) -> MatrixElement:
    """A nonzero vector in the root space g_alpha for the diagonal Cartan.

    Valid labels: 'ei-ej', 'ei+ej' and their negatives for both types,
    plus the short roots 'ek' / '-ek' for odd n.
    """
    if ctx.family != "orthogonal":
        raise AlgebraError("root vectors implemented for the orthogonal family")
    coeffs = parse_root_label(label)
    l = ctx.rank
    for i in coeffs:
        if not (1 <= i <= l):
            raise AlgebraError(f"root index {i} out of range for rank {l}")
    if len(coeffs) == 1:
        if ctx.n % 2 == 0:
            raise AlgebraError(f"short root {label!r} invalid for type D")
        (i, s), = coeffs.items()
        Z = ctx.skew_unit(i, 0) if s > 0 else ctx.skew_unit(0, i)
    else:
        (i, si), (j, sj) = sorted(coeffs.items())
        if i == j:
            raise AlgebraError(f"invalid root label {label!r}")
        if si > 0 and sj < 0:
            Z = ctx.skew_unit(i, j)
        elif si < 0 and sj > 0:
            Z = ctx.skew_unit(j, i)
        elif si > 0 and sj > 0:
            Z = ctx.skew_unit(i, -j)
        else:
            Z = ctx.skew_unit(-i, j)
    return MatrixElement(Z, ctx)


def simple_roots(ctx: AlgebraContext):
    """Standard simple root labels: alpha_i = ei - e(i+1), plus e(l-1)+e(l) (D) or e(l) (B)."""
    if ctx.family != "orthogonal":
        raise AlgebraError("simple roots implemented for the orthogonal family")
    l = ctx.rank
    out = [f"e{i}-e{i + 1}" for i in range(1, l)]
    if ctx.n % 2 == 1:
        out.append(f"e{l}")
    elif l >= 2:
        out.append(f"e{l - 1}+e{l}")
    return out


def cartan_element(ctx: AlgebraContext, values) -> MatrixElement:
    """diag[a_1..a_l, (0,) -a_l..-a_1] from the given l values."""
    l = ctx.rank
    values = np.asarray(values, dtype=complex)
    if values.shape != (l,):
        raise AlgebraError(f"need {l} Cartan coordinates, got {values.shape}")
    Z = np.zeros((ctx.n, ctx.n), dtype=complex)
    for i, a in enumerate(values, start=1):
        Z[ctx.position(i), ctx.position(i)] = a
        Z[ctx.position(-i), ctx.position(-i)] = -a
    return MatrixElement(Z, ctx)


def bracket(x, y):
    X, Y = as_matrix(x), as_matrix(y)
    return X @ Y - Y @ X


def trace_form(x, y):
    return complex(np.trace(as_matrix(x) @ as_matrix(y)))


def flag_dimension(ctx: AlgebraContext):
    """Dimension of the flag variety: number of positive roots."""
    return (ctx.dim - ctx.rank) // 2 if ctx.family == "orthogonal" else ctx.n * (ctx.n - 1) // 2


def numerical_identities(family, n):
    """The counting identities used throughout: returns a dict of both sides.

    sum_{i} r_i over proper chain levels equals (dim g - r_n)/2, and
    dim B_g + dim B_k = dim g - r_n - r_{n-1} = dim k.
    """
    g = build_algebra(family, n)
    k = build_algebra(family, n - 1)
    subsum = sum(g.level(i).rank for i in range(g.chain_start, n))
    return {
        "subrank_sum": subsum,
        "half_codim": (g.dim - g.rank) // 2,
        "flag_sum": flag_dimension(g) + flag_dimension(k),
        "codim_two_ranks": g.dim - g.rank - k.rank,
        "dim_k": k.dim,
    }
