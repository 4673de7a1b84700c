"""Acceptance suites: property-based verification of the toolkit at desk
scale, with seeded randomness and margin-band bookkeeping.

Each suite returns a SuiteResult whose details are JSON-serializable;
`ALL_SUITES` maps the CLI names.  Sample counts default to the published
acceptance sizes and can be reduced for smoke runs.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from . import fibres as fib
from . import invariants as inv
from . import nilfibre as nil
from . import regularity as reg
from . import strata as st
from .numerics import DEFAULT_TOLS, Tolerances, complex_gaussian, pair_by_negation, subspace_distance


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "details": self.details}


def _rng(seed, *key):
    return np.random.default_rng([seed, *key])


def _map(fn, items):
    threads = int(os.environ.get("GZ_NUM_THREADS", "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def _norm_scale(ctx, x, target):
    nrm = float(np.linalg.norm(x, 2))
    return x if nrm == 0 else target * x / nrm


# -- 1. criterion equivalence ----------------------------------------------


def suite_sreg_equivalence(ns=(4, 5, 6, 7), samples=500, seed=1,
                           tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    """Rank criterion vs consecutive-centralizer criterion on random sweeps."""
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 10, n)
        xs = [ctx.random_element(rng) for _ in range(samples)]

        def one(x):
            a = reg.sreg_rank_decision(ctx, x, tol)
            b = reg.sreg_chain_decision(ctx, x, tol)
            banded = a.in_band(tol) or b.in_band(tol)
            return banded, bool(a) == bool(b)

        res = _map(one, xs)
        banded = sum(1 for b, _ in res if b)
        mismatches = sum(1 for b, agree in res if not b and not agree)
        passed = mismatches == 0 and banded <= max(1, samples // 100)
        ok = ok and passed
        details[str(n)] = {"samples": samples, "mismatches": mismatches, "in_band": banded}
    return SuiteResult("sreg-equivalence", ok, details)


# -- 2. omega-test equivalence ----------------------------------------------


def suite_omega_equivalence(ns=(4, 5, 6, 7), samples=500, seed=2,
                            tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 20, n)
        xs = [ctx.random_element(rng) for _ in range(samples)]

        def one(x):
            a = reg.nsreg_decision(ctx, x, tol)
            b = reg.omega_decision(ctx, x, tol)
            banded = a.in_band(tol) or b.in_band(tol)
            return banded, bool(a) == bool(b)

        res = _map(one, xs)
        banded = sum(1 for b, _ in res if b)
        mismatches = sum(1 for b, agree in res if not b and not agree)
        passed = mismatches == 0 and banded <= max(1, samples // 100)
        ok = ok and passed
        details[str(n)] = {"samples": samples, "mismatches": mismatches, "in_band": banded}
    return SuiteResult("omega-equivalence", ok, details)


# -- 3. strata inclusions ----------------------------------------------------


def suite_strata(ns=(4, 5, 6, 7), samples=300, seed=3,
                 tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    """Constructed stratum members satisfy the regularity theorems."""
    per = max(1, samples // len(ns))
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 30, n)
        theta_fail = gzero_fail = 0
        for _ in range(per):
            x, _ = st.random_theta_witness(ctx, rng, tol)
            if not (reg.is_sreg_rank(ctx, x, tol) and reg.is_sreg_chain(ctx, x, tol)):
                theta_fail += 1
            y, _ = st.random_gzero_witness(ctx, rng, tol)
            if not (reg.is_nsreg(ctx, y, tol) and reg.omega_test(ctx, y, tol)):
                gzero_fail += 1
        passed = theta_fail == 0 and gzero_fail == 0
        ok = ok and passed
        details[str(n)] = {"members_each": per, "theta_failures": theta_fail,
                           "gzero_failures": gzero_fail}
    return SuiteResult("strata", ok, details)


# -- 4. surjectivity witness --------------------------------------------------


def suite_surjectivity(ns=(4, 5, 6), targets=100, seed=4, restarts=20,
                       tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 40, n)
        m = len(inv.gz_index(ctx))
        fails_base = fails_rerun = 0
        worst = 0.0
        for k in range(targets):
            c = complex_gaussian(rng, m)
            rep = fib.solve_fibre(ctx, c, seed=int(rng.integers(2 ** 31)),
                                  restarts=restarts, tol=tol)
            if not rep.success:
                fails_base += 1
                rep = fib.solve_fibre(ctx, c, seed=int(rng.integers(2 ** 31)),
                                      restarts=5 * restarts, tol=tol)
                if not rep.success:
                    fails_rerun += 1
            worst = max(worst, rep.residual / max(1.0, float(np.abs(c).max())))
        passed = fails_base <= targets // 100 and fails_rerun == 0
        ok = ok and passed
        details[str(n)] = {"targets": targets, "base_failures": fails_base,
                           "unresolved": fails_rerun, "worst_rel_residual": worst}
    return SuiteResult("surjectivity", ok, details)


# -- 5. fibre parametrization --------------------------------------------------


def suite_fibres(ns=(4, 5, 6, 7), draws=200, seed=5,
                 tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 50, n)
        x, _ = st.random_theta_witness(ctx, rng, tol)
        sam = fib.FibreSampler.at(ctx, x, seed=seed, tol=tol)
        phi0 = inv.kw_map(ctx, x, tol).values
        scale = max(1.0, float(np.abs(phi0).max()))
        worst = 0.0
        sreg_failures = 0
        for _ in range(draws):
            y = sam.draw(rng)
            worst = max(worst, float(np.abs(inv.kw_map(ctx, y, tol).values - phi0).max()) / scale)
            if not reg.is_sreg_rank(ctx, y, tol):
                sreg_failures += 1
        want = sum(ctx.level(i).rank for i in range(2, n))
        rank = fib.psi_differential_rank(sam, tol)
        passed = worst < 1e-8 and rank == want and sreg_failures == 0
        ok = ok and passed
        details[str(n)] = {"draws": draws, "max_rel_drift": worst,
                           "differential_rank": rank, "expected_rank": want,
                           "sreg_failures": sreg_failures}
    return SuiteResult("fibres", ok, details)


# -- 6. flow conservation ------------------------------------------------------


def suite_flows(ns=(5, 6), samples=10, seed=6,
                tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    """Conservation at t in {0.1, 1, 10}, order-swap commutativity, and
    fixing by top-level flows.  Samples are normalized to spectral norm
    0.4: the flow conjugates by exp(t grad), whose condition number grows
    exponentially in t times the spectral spread, so large-norm samples
    lose conservation to float round-off long before the theory does."""
    details, ok = {}, True
    times = (0.1, 1.0, 10.0)
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 60, n)
        worst_drift = worst_fix = worst_swap = 0.0
        for _ in range(samples):
            x = _norm_scale(ctx, ctx.random_element(rng), 0.4)
            phi0 = inv.kw_map(ctx, x, tol).values
            for ij in inv.gz_index(ctx):
                for t in times:
                    xt = fib.gz_flow(ctx, x, ij, t, tol)
                    worst_drift = max(worst_drift,
                                      float(np.abs(inv.kw_map(ctx, xt, tol).values - phi0).max()))
                    if ij[0] == n:
                        worst_fix = max(worst_fix, float(np.abs(xt - x).max()))
        for _ in range(max(1, samples // 2)):
            x, _ = st.random_theta_witness(ctx, rng, tol)
            x = _norm_scale(ctx, x, 0.4)
            idx = inv.gz_index(ctx)
            pick = rng.choice(len(idx), size=2, replace=False)
            a_ij, b_ij = idx[pick[0]], idx[pick[1]]
            ta, tb = 0.7, 1.3
            ab = fib.gz_flow(ctx, fib.gz_flow(ctx, x, a_ij, ta, tol), b_ij, tb, tol)
            ba = fib.gz_flow(ctx, fib.gz_flow(ctx, x, b_ij, tb, tol), a_ij, ta, tol)
            worst_swap = max(worst_swap, float(np.abs(ab - ba).max()))
        passed = worst_drift < 1e-8 and worst_swap < 1e-7 and worst_fix < 1e-10
        ok = ok and passed
        details[str(n)] = {"samples": samples, "max_drift": worst_drift,
                           "max_swap": worst_swap, "max_top_fix": worst_fix}
    return SuiteResult("flows", ok, details)


# -- 7. component count --------------------------------------------------------


def suite_components(ns=(5, 6, 7), seed=7, bound_samples=50,
                     tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 70, n)
        bound = ctx.level(n - 1).rank - 1
        counts = {}
        passed = True
        for m in range(bound + 1):
            x, rep = st.component_witness(ctx, m, rng, tol)
            got = st.count_components(ctx, x, tol)
            counts[str(m)] = got
            passed = passed and got == 2 ** m and rep.m <= bound
        violations = 0
        for _ in range(bound_samples):
            x, rep = st.random_theta_witness(ctx, rng, tol)
            if rep.m > bound or st.count_components(ctx, x, tol) > 2 ** bound:
                violations += 1
        passed = passed and violations == 0
        ok = ok and passed
        details[str(n)] = {"witness_counts": counts, "bound": bound,
                           "bound_violations": violations}
    return SuiteResult("components", ok, details)


# -- 8. nilfibre ---------------------------------------------------------------


def suite_nilfibre(ns=(4, 5, 6, 7), samples=200, seed=8,
                   tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 80, n)
        e = nil.regular_nilpotent(ctx, tol).entries
        pk = float(np.abs(inv.partial_kw(ctx, e, tol).values).max())
        nilp = float(np.abs(np.linalg.matrix_power(e, n)).max())
        zg = reg.centralizer(ctx, e, tol).dim
        ek = alg.project(ctx, e, n - 1).entries
        zk = reg.centralizer(ctx.level(n - 1), ek, tol).dim
        reg_ok = (pk == 0.0 and nilp == 0.0 and zg == ctx.rank
                  and zk == ctx.level(n - 1).rank)
        nsreg_hits = 0
        worst_pk = 0.0
        for _ in range(samples):
            y = nil.sample_partial_nilfibre(ctx, rng, tol=tol)
            worst_pk = max(worst_pk, float(np.abs(inv.partial_kw(ctx, y, tol).values).max()))
            if reg.is_nsreg(ctx, y, tol):
                nsreg_hits += 1
        wit_ok = True
        for rp in nil.standard_nilradicals(ctx, tol):
            y = nil.obstruction_witness(ctx, rp, tol).entries
            worst = max(float(np.abs(alg.bracket(y, b)).max()) for b in rp.basis_n)
            wit_ok = wit_ok and worst < 1e-12
        passed = reg_ok and nsreg_hits == 0 and worst_pk < 1e-9 and wit_ok
        ok = ok and passed
        details[str(n)] = {
            "regular_nilpotent_ok": reg_ok, "partial_kw_exact": pk,
            "samples": samples, "nsreg_hits": nsreg_hits,
            "worst_sample_partial_kw": worst_pk, "witness_ok": wit_ok,
        }
    ctx3 = alg.build_algebra("orthogonal", 3)
    rng = _rng(seed, 80, 3)
    sreg_found = 0
    for _ in range(20):
        y = nil.so3_nilfibre_sample(ctx3, rng, tol)
        if float(np.abs(inv.kw_map(ctx3, y, tol).values).max()) < 1e-9 \
                and reg.is_sreg_rank(ctx3, y, tol):
            sreg_found += 1
    ok = ok and sreg_found > 0
    details["3"] = {"contrast_sreg_nilfibre_points": sreg_found}
    return SuiteResult("nilfibre", ok, details)


# -- 9. nullcone ---------------------------------------------------------------


def suite_nullcone(ns=(5, 6, 7), seed=9, tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("orthogonal", n)
        r = ctx.level(n - 1).rank
        comps = nil.nullcone_components(ctx, tol)
        all_u = next(s for w, s in comps if all(c == "U" for c in w))
        rep_plus = nil.standard_nilradicals(ctx, tol)[0]
        dist = subspace_distance(all_u.basis, rep_plus.subspace_minus_theta().basis)
        dims_ok = all(s.dim == r for _, s in comps)
        minus_theta_dims = [len(rp.basis_n_minus_theta)
                            for rp in nil.standard_nilradicals(ctx, tol)]
        passed = (len(comps) == 2 ** r and dist < 1e-12 and dims_ok
                  and all(d == r for d in minus_theta_dims))
        ok = ok and passed
        details[str(n)] = {"components": len(comps), "expected": 2 ** r,
                           "all_U_distance": dist,
                           "minus_theta_dims": minus_theta_dims}
    return SuiteResult("nullcone", ok, details)


# -- 10. Hessenberg section ------------------------------------------------------


def suite_hessenberg(ns=(2, 3, 4, 5), targets=100, seed=10,
                     tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    per = max(1, targets // len(ns))
    details, ok = {}, True
    for n in ns:
        ctx = alg.build_algebra("general-linear", n)
        rng = _rng(seed, 100, n)
        m = len(inv.gz_index(ctx))
        worst = 0.0
        failures = 0
        for _ in range(per):
            c = complex_gaussian(rng, m)
            try:
                H = fib.hessenberg_section(ctx, c, tol)
                worst = max(worst, float(np.abs(inv.kw_map(ctx, H, tol).values - c).max())
                            / max(1.0, float(np.abs(c).max())))
            except fib.SolveError:
                failures += 1
        passed = failures == 0 and worst < 1e-9
        ok = ok and passed
        details[str(n)] = {"targets": per, "failures": failures, "worst_rel_residual": worst}
    details["so_contrast"] = "no orthogonal section exists; witnessed by the nilfibre suite"
    return SuiteResult("hessenberg", ok, details)


# -- 11. numerical identities ----------------------------------------------------


def suite_identities(n_max=12, sweeps=100, seed=11,
                     tol: Tolerances = DEFAULT_TOLS) -> SuiteResult:
    details, ok = {}, True
    counting_ok = True
    for family in ("orthogonal", "general-linear"):
        for n in range(3, n_max + 1):
            ids = alg.numerical_identities(family, n)
            if ids["subrank_sum"] != ids["half_codim"]:
                counting_ok = False
            if not (ids["flag_sum"] == ids["codim_two_ranks"] == ids["dim_k"]):
                counting_ok = False
    details["counting_exact"] = counting_ok
    worst = 0.0
    for n in (4, 6, 8):
        ctx = alg.build_algebra("orthogonal", n)
        rng = _rng(seed, 110, n)
        for _ in range(sweeps):
            y = ctx.random_element(rng)
            pf = inv.pfaffian(ctx, y, tol)
            eigs = np.linalg.eigvals(y)
            pairs, unpaired = pair_by_negation(eigs, 1e-6 * max(1.0, np.abs(eigs).max()))
            if unpaired:
                worst = np.inf
                continue
            prod = np.prod([p[0] ** 2 for p in pairs])
            worst = max(worst, float(abs(pf ** 2 - prod) / max(1e-300, abs(prod))))
    details["pfaffian_identity_worst_rel"] = worst
    ok = counting_ok and worst < 1e-9
    return SuiteResult("identities", ok, details)


ALL_SUITES = {
    "sreg-equivalence": suite_sreg_equivalence,
    "omega-equivalence": suite_omega_equivalence,
    "strata": suite_strata,
    "surjectivity": suite_surjectivity,
    "fibres": suite_fibres,
    "flows": suite_flows,
    "components": suite_components,
    "nilfibre": suite_nilfibre,
    "nullcone": suite_nullcone,
    "hessenberg": suite_hessenberg,
    "identities": suite_identities,
}
