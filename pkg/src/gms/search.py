"""Seeded random instance generation and separation-witness search.

Generators never return an unverified structure: every emitted table is
re-checked against the profile it claims, and every separation witness is
returned together with the passing and failing verification reports that
establish it.  All randomness flows through a PCG64 generator seeded by
the caller, so identical inputs reproduce identical witnesses.

Construction recipes:

* metric tables: shortest-path closure of a random symmetric weight table
  (validity by construction, no rejection);
* partial metrics: ``m(u,w) + max(r_u, r_w)`` for nonnegative weights r,
  which preserves all four axioms and keeps every self-distance at or
  below its incident distances;
* constant-coefficient polygon tables: a metric scaled entrywise by
  symmetric factors in [1, s], which satisfies the polygon bound for every
  tuple regime;
* pairwise-coefficient tables: a scaled metric with its pointwise-minimal
  admissible coefficient table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classify import min_coefficient, min_theta
from .solvers import (
    ContractionProfile,
    FiniteContext,
    HypothesisReport,
    PsiFunction,
    TableMap,
    check_hypotheses,
    estimate_constants,
    limit_set,
    picard_orbit,
)
from .spaces import (
    DEFAULT_REL_TOL,
    AxiomProfile,
    DistanceTable,
    ThetaTable,
    VerificationReport,
    verify_axioms,
)

SEARCH_GOALS = (
    "partial_bvs_not_bvs",
    "partial_b_not_partial_metric",
    "bv_theta_not_bvs_const",
    "nonunique_limit",
    "kannan_not_banach",
    "bvs_not_partial_bvs",  # falsification guard: the inclusion is a theorem
)

_GENERATOR_KINDS = (
    "metric",
    "b_metric",
    "rectangular",
    "v_generalized",
    "bvs",
    "partial_metric",
    "partial_b",
    "partial_rect_b",
    "partial_v_generalized",
    "partial_bvs",
)

_RETRY_CAP = 64


class GenerationError(RuntimeError):
    """A generator could not produce a valid instance within its retry cap."""


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SearchTarget:
    goal: str
    n: int
    v: int = 1
    s: float = 1.0
    budget: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.goal not in SEARCH_GOALS:
            raise ValueError(f"unknown goal {self.goal!r}")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.v < 1:
            raise ValueError("v must be >= 1")
        if self.s < 1.0:
            raise ValueError("s must be >= 1")


@dataclass(frozen=True)
class SearchResult:
    found: bool
    attempts: int
    witness: Optional[DistanceTable] = None
    theta: Optional[ThetaTable] = None
    witness_map: Optional[TableMap] = None
    report_pass: object = None
    report_fail: object = None
    note: str = ""


# ---------------------------------------------------------------------------
# Random structure generators


def _random_metric_array(n: int, rng: np.random.Generator, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    w = rng.uniform(lo, hi, size=(n, n))
    w = np.minimum(w, w.T)
    np.fill_diagonal(w, 0.0)
    # Floyd–Warshall closure: the result is a metric with positive
    # off-diagonal entries because all weights are positive.
    d = w.copy()
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def _random_partial_array(n: int, rng: np.random.Generator) -> np.ndarray:
    m = _random_metric_array(n, rng)
    r = rng.uniform(0.0, 1.0, size=n)
    r[rng.integers(0, n)] = 0.0  # keep one zero-self-distance point
    mask = rng.random(n) < 0.3
    r[mask] = 0.0
    return m + np.maximum(r[:, None], r[None, :])


def _random_scaled_metric(n: int, rng: np.random.Generator, s: float) -> np.ndarray:
    m = _random_metric_array(n, rng)
    f = rng.uniform(1.0, s, size=(n, n))
    f = np.maximum(f, f.T)
    np.fill_diagonal(f, 1.0)
    return m * f


def random_space(
    kind: str,
    n: int,
    v: int = 1,
    s: float = 1.0,
    seed: int = 0,
    *,
    rng: Optional[np.random.Generator] = None,
    check: bool = True,
    rel_tol: float = DEFAULT_REL_TOL,
) -> DistanceTable:
    """Random table passing ``verify_axioms`` for the requested profile.

    Deterministic in ``seed``.  Raises GenerationError if the construction
    produces an invalid table repeatedly (which indicates a bug, since the
    recipes are valid by construction).
    """
    if kind not in _GENERATOR_KINDS:
        raise ValueError(f"no generator for kind {kind!r}")
    rng = rng if rng is not None else _rng(seed)
    from .spaces import KIND_SPECS

    spec = KIND_SPECS[kind]
    v = spec.forced_v if spec.forced_v is not None else v
    s = spec.forced_s if spec.forced_s is not None else s
    profile = AxiomProfile.for_kind(kind, v=v, s=s)
    for _ in range(_RETRY_CAP):
        if kind == "metric":
            arr = _random_metric_array(n, rng)
        elif kind == "partial_metric":
            arr = _random_partial_array(n, rng)
        elif kind in ("b_metric", "rectangular", "v_generalized", "bvs"):
            arr = _random_scaled_metric(n, rng, profile.s)
        else:
            arr = _random_partial_array(n, rng) + _random_scaled_metric(n, rng, profile.s)
        table = DistanceTable(arr)
        if not check or verify_axioms(table, profile, rel_tol=rel_tol).passed:
            return table
    raise GenerationError(f"could not generate a valid {kind} table in {_RETRY_CAP} tries")


def random_theta_space(
    n: int,
    v: int,
    seed: int = 0,
    *,
    rng: Optional[np.random.Generator] = None,
    span: float = 3.0,
    check: bool = True,
    rel_tol: float = DEFAULT_REL_TOL,
) -> tuple[DistanceTable, ThetaTable]:
    """Random pairwise-coefficient space: a scaled metric with its minimal
    admissible coefficient table."""
    rng = rng if rng is not None else _rng(seed)
    for _ in range(_RETRY_CAP):
        table = DistanceTable(_random_scaled_metric(n, rng, span))
        theta = min_theta(table, v, rel_tol=rel_tol, validate=False)
        if theta is None:
            continue
        if not check:
            return table, theta
        profile = AxiomProfile.for_kind("bv_theta", v=v, theta=theta)
        if verify_axioms(table, profile, rel_tol=rel_tol).passed:
            return table, theta
    raise GenerationError(f"could not generate a valid theta space in {_RETRY_CAP} tries")


def _spiked_metric_array(n: int, rng: np.random.Generator, spike: float) -> np.ndarray:
    """Metric with one off-diagonal pair inflated by ``spike``: the polygon
    ratio of that pair exceeds any modest constant while staying finite."""
    m = _random_metric_array(n, rng)
    i, j = rng.choice(n, size=2, replace=False)
    m[i, j] *= spike
    m[j, i] = m[i, j]
    return m


def _kannan_witness(n: int, rng: np.random.Generator) -> tuple[np.ndarray, TableMap]:
    """Metric + map where two near points have far images (no contraction
    ratio below 1) yet every image distance is small against the
    displacement sums."""
    eps = rng.uniform(0.005, 0.05)
    big = rng.uniform(2.8, 4.0)
    w = np.full((n, n), 50.0)
    np.fill_diagonal(w, 0.0)
    w[0, 1] = w[1, 0] = eps
    w[0, 2] = w[2, 0] = big
    w[1, 3] = w[3, 1] = big + rng.uniform(0.0, 0.5)
    w[2, 3] = w[3, 2] = 1.0
    for k in range(4, n):
        w[2, k] = w[k, 2] = rng.uniform(1.0, 1.5)
    d = w.copy()
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    images = [2, 3, 2, 2] + [2] * (n - 4)
    return d, TableMap(tuple(images))


def _max_style_partial_array(n: int, rng: np.random.Generator) -> np.ndarray:
    """Partial metric where rho(u,w) = max(val_u, val_w); distinct values keep
    the identity axiom, and equalities rho(u,w) = rho(w,w) produce
    multi-point limit sets."""
    vals = np.sort(rng.uniform(0.5, 2.0, size=n)) + np.arange(n) * 1e-3
    rng.shuffle(vals)
    return np.maximum(vals[:, None], vals[None, :])


def _funnel_map(n: int, rng: np.random.Generator) -> TableMap:
    """Map whose orbit structure funnels every point toward one root."""
    order = rng.permutation(n)
    images = [0] * n
    images[order[0]] = int(order[0])
    for i in range(1, n):
        images[order[i]] = int(order[rng.integers(0, i)])
    return TableMap(tuple(images))


def _candidate_maps(n: int, rng: np.random.Generator, count: int):
    for _ in range(count):
        style = rng.integers(0, 3)
        if style == 0:
            yield TableMap(tuple(int(x) for x in rng.integers(0, n, size=n)))
        elif style == 1:
            yield _funnel_map(n, rng)
        else:
            yield TableMap((int(rng.integers(0, n)),) * n)


def _zero_self_point(table: DistanceTable) -> Optional[int]:
    d = table.as_array()
    for i in range(table.n):
        if d[i, i] == 0.0:
            return i
    return None


def random_contraction(
    ctx: FiniteContext,
    theorem: str,
    seed: int = 0,
    *,
    rng: Optional[np.random.Generator] = None,
    budget: int = 48,
    margin: float = 0.97,
    rel_tol: float = DEFAULT_REL_TOL,
) -> Optional[tuple[TableMap, ContractionProfile]]:
    """Self-map plus fitted profile passing check_hypotheses for ``theorem``.

    Rejection-samples candidate maps ranked by their fitted constants, with
    a constant map to a zero-self-distance point as the guaranteed
    fallback.  Returns None only when even the fallback is inadmissible
    within the budget (e.g. no zero-self-distance point exists).
    """
    rng = rng if rng is not None else _rng(seed)
    n = ctx.table.n

    def fitted(smap: TableMap) -> Optional[ContractionProfile]:
        if theorem == "weak_theta":
            fit = estimate_constants(ctx, smap, "banach_theta", rel_tol=rel_tol)
            if fit.profile is None or fit.profile.lam > margin:
                return None
            lam = fit.profile.lam
            kappa = (1.0 - lam) * rng.uniform(0.5, 1.0)
            if rng.random() < 0.5:
                psi = PsiFunction.linear(kappa)
            else:
                knee = rng.uniform(0.5, 1.5)
                psi = PsiFunction(((0.0, 0.0), (knee, kappa * knee)), kappa * rng.uniform(0.25, 1.0))
            return ContractionProfile(theorem="weak_theta", psi=psi)
        if theorem in ("reich_theta", "kannan_theta"):
            # Cheap closed-form fits; the grid fitter is exercised separately.
            if theorem == "reich_theta" and rng.random() < 0.5:
                fit = estimate_constants(ctx, smap, "banach_theta", rel_tol=rel_tol)
                if fit.profile is None or fit.profile.lam > margin:
                    return None
                eps = rng.uniform(0.0, 0.3) * (1.0 - fit.profile.lam) / 2.0
                return ContractionProfile(
                    theorem="reich_theta",
                    alpha=fit.profile.lam,
                    beta=0.0,
                    gamma=min(eps, 0.9),
                )
            fit = estimate_constants(ctx, smap, "kannan_partial", rel_tol=rel_tol)
            if fit.profile is None or fit.profile.lam >= 0.5 * margin:
                return None
            lam = fit.profile.lam
            alpha = 0.0 if theorem == "kannan_theta" else rng.uniform(0.0, 0.2) * (1.0 - 2 * lam)
            return ContractionProfile(theorem=theorem, alpha=alpha, beta=lam, gamma=lam)
        fit = estimate_constants(ctx, smap, theorem, rel_tol=rel_tol)
        if fit.profile is None:
            return None
        lam = fit.profile.lam
        if theorem == "banach_partial" and lam > margin:
            return None
        if theorem == "kannan_partial" and lam >= min(0.5, 1.0 / ctx.s) * margin:
            return None
        if theorem == "quasi_partial" and lam >= margin / ctx.s:
            return None
        return fit.profile

    candidates = list(_candidate_maps(n, rng, budget))
    fallback_point = _zero_self_point(ctx.table)
    if fallback_point is not None:
        candidates.append(TableMap((fallback_point,) * n))
    for smap in candidates:
        profile = fitted(smap)
        if profile is None:
            continue
        if check_hypotheses(ctx, smap, profile, rel_tol=rel_tol).ok:
            return smap, profile
    return None


# ---------------------------------------------------------------------------
# Separation search


def _verify(table, kind, v, s, theta=None, distinct=None, rel_tol=DEFAULT_REL_TOL) -> VerificationReport:
    profile = AxiomProfile.for_kind(kind, v=v, s=s, theta=theta, distinct_chain=distinct)
    return verify_axioms(table, profile, rel_tol=rel_tol)


def search_separation(target: SearchTarget, *, rel_tol: float = DEFAULT_REL_TOL) -> SearchResult:
    """Hunt a witness that passes one family and fails another.

    The returned witness carries both verification reports (or, for the
    orbit goals, the hypothesis/limit evidence).  "none found in budget" is
    a result, not an error; for the inclusion guard goal it is the only
    sound outcome.
    """
    rng = _rng(target.seed)
    goal, n, v, s = target.goal, target.n, target.v, target.s

    for attempt in range(1, target.budget + 1):
        if goal == "partial_bvs_not_bvs":
            table = DistanceTable(_random_partial_array(n, rng))
            if not np.diagonal(table.as_array()).max() > 0:
                continue
            rp = _verify(table, "partial_bvs", v, s, rel_tol=rel_tol)
            rf = _verify(table, "bvs", v, s, rel_tol=rel_tol)
            if rp.passed and not rf.passed:
                return SearchResult(True, attempt, witness=table, report_pass=rp, report_fail=rf)

        elif goal == "partial_b_not_partial_metric":
            base = _random_partial_array(n, rng) + _random_scaled_metric(n, rng, max(s, 2.0))
            table = DistanceTable(base)
            rp = _verify(table, "partial_b", 1, max(s, 2.0), rel_tol=rel_tol)
            rf = _verify(table, "partial_metric", 1, 1.0, rel_tol=rel_tol)
            if rp.passed and not rf.passed:
                return SearchResult(True, attempt, witness=table, report_pass=rp, report_fail=rf)

        elif goal == "bv_theta_not_bvs_const":
            if rng.random() < 0.5:
                arr = _spiked_metric_array(n, rng, 4.0 * s * (v + 1) + 1.0)
            else:
                arr = _random_scaled_metric(n, rng, max(2.0, 2.0 * s))
            table = DistanceTable(arr)
            smin = min_coefficient(table, v, "plain", rel_tol=rel_tol, validate=False)
            if smin is None or smin <= s:
                continue
            theta = min_theta(table, v, rel_tol=rel_tol, validate=False)
            if theta is None:
                continue
            rp = _verify(table, "bv_theta", v, None, theta=theta, rel_tol=rel_tol)
            rf = _verify(table, "bvs", v, s, rel_tol=rel_tol)
            if rp.passed and not rf.passed:
                return SearchResult(True, attempt, witness=table, theta=theta, report_pass=rp, report_fail=rf)

        elif goal == "nonunique_limit":
            style = rng.integers(0, 2)
            arr = _max_style_partial_array(n, rng) if style == 0 else _random_partial_array(n, rng)
            table = DistanceTable(arr)
            rp = _verify(table, "partial_metric", 1, 1.0, rel_tol=rel_tol)
            if not rp.passed:
                continue
            smap = TableMap((int(rng.integers(0, n)),) * n)
            trace = picard_orbit(FiniteContext(table), smap, int(rng.integers(0, n)), max_iter=4 * n)
            result = limit_set(trace, table)
            if result.settled and len(result.points) >= 2:
                return SearchResult(
                    True,
                    attempt,
                    witness=table,
                    witness_map=smap,
                    report_pass=rp,
                    report_fail=result,
                    note=f"limit set {result.points} from orbit settling at {trace.orbit[-1]}",
                )

        elif goal == "kannan_not_banach":
            table = DistanceTable(_random_metric_array(n, rng))
            ctx = FiniteContext(table)
            smap = TableMap(tuple(int(x) for x in rng.integers(0, n, size=n)))
            kfit = estimate_constants(ctx, smap, "kannan_partial", rel_tol=rel_tol)
            if kfit.profile is None:
                continue
            bfit = estimate_constants(ctx, smap, "banach_partial", rel_tol=rel_tol)
            if bfit.profile is not None:
                continue
            khyp = check_hypotheses(ctx, smap, kfit.profile, rel_tol=rel_tol)
            if khyp.ok:
                return SearchResult(
                    True,
                    attempt,
                    witness=table,
                    witness_map=smap,
                    report_pass=khyp,
                    report_fail=bfit,
                    note=f"kannan ratio {kfit.profile.lam!r}; banach: {bfit.failure}",
                )

        else:  # bvs_not_partial_bvs: guarded impossibility
            table = DistanceTable(_random_scaled_metric(n, rng, s))
            rp = _verify(table, "bvs", v, s, rel_tol=rel_tol)
            if not rp.passed:
                continue
            rf = _verify(table, "partial_bvs", v, s, distinct=True, rel_tol=rel_tol)
            if not rf.passed:
                return SearchResult(True, attempt, witness=table, report_pass=rp, report_fail=rf)

    return SearchResult(False, target.budget, note=f"none found in budget {target.budget}")
