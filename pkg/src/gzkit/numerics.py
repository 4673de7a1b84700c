"""Shared numerical policy: tolerances, rank decisions, subspaces.

All rank-like decisions in the package go through `numerical_rank` /
`null_space` so that every boolean verdict carries a margin ratio.  A
margin ratio below `Tolerances.band` means the decision was made too
close to the singular-value cutoff to be trusted; sweeps exclude (and
count) such samples instead of letting them flip verdicts.
"""

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    rank_rel: float = 1e-9      # relative SVD cutoff sigma_k > rank_rel * sigma_1
    rank_abs: float = 1e-12     # absolute floor for the SVD cutoff
    cluster: float = 1e-8       # eigenvalue clustering, scaled by max(1, ||x||_2)
    spec: float = 1e-7          # spectral disjointness margin, scaled likewise
    solve: float = 1e-9         # fibre solver residual, scaled by max(1, ||c||_inf)
    member: float = 1e-12       # relative membership residual
    fd_step: float = 1e-6       # central finite-difference step
    band: float = 10.0          # margin-band factor for excluding borderline samples

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


DEFAULT_TOLS = Tolerances()


@dataclass
class RankDecision:
    rank: int
    margin: float   # min distance ratio of singular values to the cutoff (inf if empty)

    @property
    def in_band(self):
        return not np.isfinite(self.margin) is False and self.margin < DEFAULT_TOLS.band

    def in_band_for(self, tol: Tolerances):
        return self.margin < tol.band


def _svd_cutoff(s, tol: Tolerances, scale=None):
    top = s[0] if len(s) else 0.0
    if scale is not None:
        top = max(top, scale)
    return max(tol.rank_rel * top, tol.rank_abs)


def rank_decision(s, tol: Tolerances = DEFAULT_TOLS, scale=None) -> RankDecision:
    """Rank of a singular-value profile, with the margin to the cutoff."""
    s = np.asarray(s, dtype=float)
    cut = _svd_cutoff(s, tol, scale)
    kept = s[s > cut]
    dropped = s[s <= cut]
    margin = np.inf
    if kept.size:
        margin = min(margin, kept.min() / cut)
    if dropped.size:
        nz = dropped[dropped > 0]
        if nz.size:
            margin = min(margin, cut / nz.max())
    return RankDecision(rank=int(kept.size), margin=float(margin))


def numerical_rank(M, tol: Tolerances = DEFAULT_TOLS, scale=None) -> RankDecision:
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return RankDecision(0, np.inf)
    s = np.linalg.svd(M, compute_uv=False)
    return rank_decision(s, tol, scale)


def null_space(M, tol: Tolerances = DEFAULT_TOLS):
    """Orthonormal basis of the (numerical) right null space of M.

    Returns (basis, decision): basis columns span ker M, decision carries
    the retained rank and the margin of the cut.
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    cols = M.shape[1]
    if M.size == 0:
        return np.eye(cols, dtype=complex), RankDecision(0, np.inf)
    _, s, vh = np.linalg.svd(M)
    s = np.concatenate([s, np.zeros(max(0, cols - len(s)))])
    dec = rank_decision(s[: min(len(s), cols)], tol)
    return vh[dec.rank:].conj().T, dec


def orthonormalize(columns, tol: Tolerances = DEFAULT_TOLS):
    """Orthonormal basis for the span of the given columns (may be rank deficient)."""
    A = np.atleast_2d(np.asarray(columns, dtype=complex))
    if A.shape[1] == 0:
        return A
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    dec = rank_decision(s, tol)
    return u[:, : dec.rank]


def subspace_distance(A, B):
    """Projector gap ||P_A - P_B||_2 between spans of two orthonormal stacks."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    PA = A @ A.conj().T
    PB = B @ B.conj().T
    return float(np.linalg.norm(PA - PB, 2))


def complex_gaussian(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def pair_by_negation(values, tol_abs):
    """Greedily pair eigenvalues lambda <-> -lambda; returns (pairs, unpaired).

    Used by spectrum post-processing: orthogonal spectra are closed under
    negation, so every value should find a partner within tolerance.
    """
    vals = list(values)
    used = [False] * len(vals)
    pairs, unpaired = [], []
    for i, v in enumerate(vals):
        if used[i]:
            continue
        used[i] = True
        best, best_d = None, np.inf
        for j in range(i + 1, len(vals)):
            if used[j]:
                continue
            d = abs(v + vals[j])
            if d < best_d:
                best, best_d = j, d
        if best is not None and best_d <= tol_abs:
            used[best] = True
            pairs.append((v, vals[best]))
        else:
            unpaired.append(v)
    return pairs, unpaired


def multiset_distance(a, b):
    """Optimal-matching distance between two complex multisets (inf if sizes differ)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        return np.inf
    if a.size == 0:
        return 0.0
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())
