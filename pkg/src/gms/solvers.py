"""Hypothesis-checked Picard-iteration solvers with verifiable certificates.

Each supported fixed-point theorem is a contraction family over a finite
distance table (constant-coefficient or pairwise-coefficient polygon space)
or over the demo family of affine maps on an interval with the usual
metric:

* ``banach_partial``  -- rho(Su,Sw) <= lam*rho(u,w), lam in [0,1)
* ``kannan_partial``  -- rho(Su,Sw) <= lam*[rho(u,Su)+rho(w,Sw)], lam in [0,1/2), lam != 1/s
* ``quasi_partial``   -- rho(Su,Sw) <= lam*max{rho(u,w),rho(u,Su),rho(w,Sw)}, lam in [0,1/s)
* ``banach_theta``    -- pairwise-coefficient space, lam in [0,1)
* ``weak_theta``      -- rho(Su,Sw) <= rho(u,w) - psi(rho(u,w))
* ``reich_theta``     -- alpha*rho(u,w)+beta*rho(u,Su)+gamma*rho(w,Sw), sum < 1,
                         with min{beta,gamma} < 1/max{theta(u,Su),theta(Su,u)}
* ``kannan_theta``    -- the reich family with alpha = 0

A solver run never hides a broken conclusion: non-convergence, a residual
above tolerance, a failed uniqueness scan, or a violated rate bound under
satisfied hypotheses yields a certificate with ``status == "failed"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np

from .spaces import DEFAULT_REL_TOL, DistanceTable, ThetaTable, cmp_tol

THEOREMS = (
    "banach_partial",
    "kannan_partial",
    "quasi_partial",
    "banach_theta",
    "weak_theta",
    "reich_theta",
    "kannan_theta",
)
PARTIAL_THEOREMS = frozenset(("banach_partial", "kannan_partial", "quasi_partial"))
THETA_THEOREMS = frozenset(("banach_theta", "weak_theta", "reich_theta", "kannan_theta"))

DEFAULT_RESIDUAL_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000

_MAX_LISTED_PAIRS = 5


class HypothesisRejected(Exception):
    """solve() was called on a profile that fails its hypothesis check."""

    def __init__(self, report: "HypothesisReport"):
        super().__init__("; ".join(report.violations) or "hypotheses violated")
        self.report = report


# ---------------------------------------------------------------------------
# Spaces the solvers run on


@dataclass(frozen=True)
class FiniteContext:
    """A finite distance table plus the coefficient data the theorems read."""

    table: DistanceTable
    s: float = 1.0
    theta: Optional[ThetaTable] = None

    def __post_init__(self):
        if self.s < 1.0:
            raise ValueError("coefficient s must be >= 1")
        if self.theta is not None and self.theta.n != self.table.n:
            raise ValueError("theta table size must match the distance table")


@dataclass(frozen=True)
class IntervalContext:
    """An interval with the usual metric; pair checks sample a fixed grid."""

    lo: float
    hi: float
    samples: int = 101

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError("interval must satisfy lo < hi")
        if self.samples < 2:
            raise ValueError("need at least two sample points")


Context = Union[FiniteContext, IntervalContext]


@dataclass(frozen=True)
class TableMap:
    """Self-map of a finite space: point i goes to images[i]."""

    images: tuple[int, ...]

    def __post_init__(self):
        if not self.images:
            raise ValueError("map must cover at least one point")
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))


@dataclass(frozen=True)
class AffineMap:
    """Demo self-map x -> a*x + b, evaluated exactly (never through the grid)."""

    a: float
    b: float

    def __call__(self, x: float) -> float:
        return self.a * x + self.b


SelfMap = Union[TableMap, AffineMap]


def validate_selfmap(ctx: Context, smap: SelfMap) -> None:
    if isinstance(ctx, FiniteContext):
        if not isinstance(smap, TableMap):
            raise ValueError("finite context requires a table map")
        n = ctx.table.n
        if len(smap.images) != n or any(not (0 <= i < n) for i in smap.images):
            raise ValueError("map images must be points of the space")
    else:
        if not isinstance(smap, AffineMap):
            raise ValueError("interval context requires an affine map")
        for endpoint in (ctx.lo, ctx.hi):
            y = smap(endpoint)
            if y < ctx.lo - 1e-12 or y > ctx.hi + 1e-12:
                raise ValueError("affine map does not send the interval into itself")


def _apply(smap: SelfMap, x):
    if isinstance(smap, TableMap):
        return smap.images[x]
    return smap(x)


def _dist(ctx: Context, x, y) -> float:
    if isinstance(ctx, FiniteContext):
        return ctx.table.entry(x, y)
    return abs(x - y)


def _theta_at(ctx: Context, x, y) -> float:
    if isinstance(ctx, FiniteContext):
        if ctx.theta is None:
            raise ValueError("context has no theta table")
        return ctx.theta.entry(x, y)
    return 1.0


def _sample_points(ctx: Context) -> list:
    if isinstance(ctx, FiniteContext):
        return list(range(ctx.table.n))
    return [float(x) for x in np.linspace(ctx.lo, ctx.hi, ctx.samples)]


def _coefficient(ctx: Context) -> float:
    return ctx.s if isinstance(ctx, FiniteContext) else 1.0


def _theta_sup(ctx: Context, smap: SelfMap) -> float:
    """max over points u of max{theta(u,Su), theta(Su,u)} (strongest reading)."""
    if isinstance(ctx, IntervalContext):
        return 1.0
    if ctx.theta is None:
        raise ValueError("context has no theta table")
    best = 1.0
    for u in range(ctx.table.n):
        su = _apply(smap, u)
        best = max(best, ctx.theta.entry(u, su), ctx.theta.entry(su, u))
    return best


# ---------------------------------------------------------------------------
# Profiles


@dataclass(frozen=True)
class PsiFunction:
    """Continuous nondecreasing gauge: piecewise linear from (0,0), then a ray.

    ``breakpoints`` is an increasing list of (t, value) knots; beyond the
    last knot the function continues with ``final_slope``.  A valid gauge
    has psi(0)=0, is nondecreasing, and final_slope > 0 so psi(t) -> inf.
    """

    breakpoints: tuple[tuple[float, float], ...] = ((0.0, 0.0),)
    final_slope: float = 1.0

    def __call__(self, t: float) -> float:
        pts = self.breakpoints
        if t <= pts[0][0]:
            return pts[0][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t <= t1:
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        t_last, v_last = pts[-1]
        return v_last + self.final_slope * (t - t_last)

    @classmethod
    def linear(cls, slope: float) -> "PsiFunction":
        return cls(((0.0, 0.0),), slope)


def validate_psi(psi: PsiFunction) -> tuple[str, ...]:
    """Names of violated gauge properties; empty means valid."""
    problems: list[str] = []
    pts = psi.breakpoints
    if not pts:
        return ("no breakpoints",)
    if pts[0] != (0.0, 0.0):
        problems.append("psi(0)=0 violated")
    for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
        if t1 <= t0:
            problems.append(f"breakpoint abscissas not increasing at t={t1!r}")
        if v1 < v0:
            problems.append(f"psi not nondecreasing at t={t1!r}")
    if psi.final_slope <= 0:
        problems.append("psi(t)->inf violated: final slope must be positive")
    return tuple(problems)


@dataclass(frozen=True)
class ContractionProfile:
    """Constant bundle of one contraction family (see module docstring)."""

    theorem: str
    lam: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    psi: Optional[PsiFunction] = None

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem {self.theorem!r}")
        if self.theorem in ("banach_partial", "kannan_partial", "quasi_partial", "banach_theta"):
            if self.lam is None:
                raise ValueError(f"{self.theorem} requires lam")
        elif self.theorem == "weak_theta":
            if self.psi is None:
                raise ValueError("weak_theta requires a psi gauge")
        else:
            if self.beta is None or self.gamma is None:
                raise ValueError(f"{self.theorem} requires beta and gamma")
            if self.theorem == "kannan_theta":
                if self.alpha not in (None, 0.0):
                    raise ValueError("kannan_theta fixes alpha = 0")
                object.__setattr__(self, "alpha", 0.0)
            elif self.alpha is None:
                raise ValueError("reich_theta requires alpha")


def profile_rate(profile: ContractionProfile) -> Optional[float]:
    """Per-step ratio of the consecutive-distance bound, None for weak_theta."""
    t = profile.theorem
    if t in ("banach_partial", "banach_theta", "quasi_partial"):
        return profile.lam
    if t == "kannan_partial":
        return profile.lam / (1.0 - profile.lam) if profile.lam != 1.0 else math.inf
    if t in ("reich_theta", "kannan_theta"):
        if profile.beta == 1.0:
            return math.inf
        return (profile.alpha + profile.gamma) / (1.0 - profile.beta)
    return None


# ---------------------------------------------------------------------------
# Hypothesis checking


@dataclass(frozen=True)
class HypothesisReport:
    ok: bool
    violations: tuple[str, ...]
    warnings: tuple[str, ...]


def _pair_rhs(ctx, smap, profile, u, w):
    t = profile.theorem
    duw = _dist(ctx, u, w)
    if t in ("banach_partial", "banach_theta"):
        return profile.lam * duw
    if t == "kannan_partial":
        return profile.lam * (_dist(ctx, u, _apply(smap, u)) + _dist(ctx, w, _apply(smap, w)))
    if t == "quasi_partial":
        return profile.lam * max(duw, _dist(ctx, u, _apply(smap, u)), _dist(ctx, w, _apply(smap, w)))
    if t == "weak_theta":
        return duw - profile.psi(duw)
    return (
        profile.alpha * duw
        + profile.beta * _dist(ctx, u, _apply(smap, u))
        + profile.gamma * _dist(ctx, w, _apply(smap, w))
    )


def check_hypotheses(
    ctx: Context,
    smap: SelfMap,
    profile: ContractionProfile,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
) -> HypothesisReport:
    """Re-verify the contraction inequality pairwise plus the scalar bounds.

    The inequality runs over every ordered pair of sample points.  The
    reich/kannan_theta coefficient ceiling uses the conservative reading of
    the pairwise-coefficient supremum: the max over *all* points u of
    max{theta(u,Su), theta(Su,u)}.
    """
    validate_selfmap(ctx, smap)
    t = profile.theorem
    violations: list[str] = []
    warnings: list[str] = []

    if t in ("banach_partial", "banach_theta"):
        if not (0.0 <= profile.lam < 1.0):
            violations.append(f"lambda in [0, 1) violated: lambda={profile.lam!r}")
    elif t == "kannan_partial":
        s = _coefficient(ctx)
        if not (0.0 <= profile.lam < 0.5):
            violations.append(f"lambda in [0, 1/2) violated: lambda={profile.lam!r}")
        if abs(profile.lam - 1.0 / s) <= 1e-9:
            violations.append(f"lambda != 1/s violated: lambda={profile.lam!r}, s={s!r}")
        if profile.lam * s >= 1.0:
            warnings.append(
                f"s*lambda >= 1 (s={s!r}, lambda={profile.lam!r}): the fixed-point argument's"
                " 1/(1-s*lambda) factor changes sign in this regime"
            )
    elif t == "quasi_partial":
        s = _coefficient(ctx)
        if not (0.0 <= profile.lam < 1.0 / s):
            violations.append(f"lambda in [0, 1/s) violated: lambda={profile.lam!r}, s={s!r}")
    elif t == "weak_theta":
        for problem in validate_psi(profile.psi):
            violations.append(f"psi invalid: {problem}")
    else:
        abg = (profile.alpha, profile.beta, profile.gamma)
        if any(x < 0 for x in abg):
            violations.append(f"nonnegative constants violated: (alpha,beta,gamma)={abg!r}")
        total = sum(abg)
        label = "alpha+beta+gamma" if t == "reich_theta" else "beta+gamma"
        shown = total if t == "reich_theta" else profile.beta + profile.gamma
        if shown >= 1.0:
            violations.append(f"{label} < 1 violated: {label}={shown!r}")
        g1 = min(profile.beta, profile.gamma)
        g2 = _theta_sup(ctx, smap)
        if g1 * g2 >= 1.0:
            violations.append(
                f"min(beta,gamma) < 1/theta_sup violated: min={g1!r}, theta_sup={g2!r}"
            )

    if not violations or all("psi invalid" not in v for v in violations):
        pts = _sample_points(ctx)
        listed = 0
        extra = 0
        for u in pts:
            su = _apply(smap, u)
            for w in pts:
                lhs = _dist(ctx, su, _apply(smap, w))
                rhs = _pair_rhs(ctx, smap, profile, u, w)
                if lhs > rhs + cmp_tol(lhs, rhs, rel_tol):
                    if listed < _MAX_LISTED_PAIRS:
                        violations.append(
                            f"contraction inequality violated at pair ({u!r}, {w!r}):"
                            f" lhs={lhs!r} rhs={rhs!r}"
                        )
                        listed += 1
                    else:
                        extra += 1
        if extra:
            violations.append(f"contraction inequality violated at {extra} further pairs")

    return HypothesisReport(ok=not violations, violations=tuple(violations), warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# Constant fitting


@dataclass(frozen=True)
class FitResult:
    profile: Optional[ContractionProfile]
    failure: Optional[str] = None


def _ratio_sup(nums, dens, rel_tol, pairs):
    """sup nums/dens over positive denominators; None + witness on 0/positive."""
    best = 0.0
    for (num, den), pair in zip(zip(nums, dens), pairs):
        if den <= cmp_tol(den, 0.0, rel_tol):
            if num > cmp_tol(num, 0.0, rel_tol):
                return None, pair
            continue
        best = max(best, num / den)
    return best, None


def _reich_arrays(ctx: Context, smap: SelfMap):
    pts = _sample_points(ctx)
    A, B, C, N = [], [], [], []
    for u in pts:
        su = _apply(smap, u)
        du = _dist(ctx, u, su)
        for w in pts:
            A.append(_dist(ctx, u, w))
            B.append(du)
            C.append(_dist(ctx, w, _apply(smap, w)))
            N.append(_dist(ctx, su, _apply(smap, w)))
    return (np.array(A), np.array(B), np.array(C), np.array(N))


def _grid_ceil(x: np.ndarray, step: float) -> np.ndarray:
    return np.maximum(0.0, np.ceil(x / step - 1e-9) * step)


def _staircase(A, B, C, N, tolv, alphas, betas, step):
    """Minimal grid gamma per (alpha, beta); rows (total, alpha, beta, gamma)."""
    rows = []
    cpos = C > 0
    czero = ~cpos
    for a in alphas:
        R = N - a * A - tolv
        if czero.any():
            bz, rz = B[czero], R[czero]
            if np.any((bz <= 0) & (rz > 0)):
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                beta_floor = float(np.max(np.where(bz > 0, rz / np.where(bz > 0, bz, 1.0), -np.inf), initial=0.0))
        else:
            beta_floor = 0.0
        ok_beta = betas >= beta_floor - 1e-12
        if not ok_beta.any():
            continue
        bs = betas[ok_beta]
        if cpos.any():
            req = (R[cpos][None, :] - bs[:, None] * B[cpos][None, :]) / C[cpos][None, :]
            gamma_req = np.maximum(req.max(axis=1), 0.0)
        else:
            gamma_req = np.zeros(len(bs))
        gs = _grid_ceil(gamma_req, step)
        totals = a + bs + gs
        rows.append(np.column_stack([totals, np.full(len(bs), a), bs, gs]))
    if not rows:
        return np.zeros((0, 4))
    return np.vstack(rows)


def fit_reich_grid(
    A: np.ndarray,
    B: np.ndarray,
    C: np.ndarray,
    N: np.ndarray,
    *,
    alpha_fixed: Optional[float] = None,
    step: float = 0.01,
    rel_tol: float = DEFAULT_REL_TOL,
) -> Optional[tuple[float, float, float]]:
    """Grid fit of the smallest-sum (alpha, beta, gamma) satisfying
    ``N_k <= alpha*A_k + beta*B_k + gamma*C_k`` for every pair k.

    Coarse pass on a ``step`` grid, then one x10 local refinement around the
    near-optimal coarse candidates.  Deterministic; ties break
    lexicographically.  Returns None when no finite constants exist.
    """
    tolv = rel_tol * np.maximum(1.0, np.abs(N))
    if np.any((A <= 0) & (B <= 0) & (C <= 0) & (N > tolv)):
        return None

    base = np.round(np.arange(0.0, 1.0 + step / 2, step), 12)
    alphas = np.array([alpha_fixed]) if alpha_fixed is not None else base
    coarse = _staircase(A, B, C, N, tolv, alphas, base, step)
    if len(coarse) == 0:
        return None
    order = np.lexsort((coarse[:, 3], coarse[:, 2], coarse[:, 1], coarse[:, 0]))
    coarse = coarse[order]
    best_total = coarse[:, 0].min()
    near = coarse[coarse[:, 0] <= best_total + 3 * step + 1e-9][:8]

    fine_step = step / 10.0
    candidates = [tuple(row[1:]) for row in near]
    results = list(near[:, :4])
    for a0, b0, g0 in candidates:
        if alpha_fixed is not None:
            fine_alphas = np.array([alpha_fixed])
        else:
            fine_alphas = np.round(
                np.arange(max(0.0, a0 - step), a0 + step + fine_step / 2, fine_step), 12
            )
        fine_betas = np.round(np.arange(max(0.0, b0 - step), b0 + step + fine_step / 2, fine_step), 12)
        fine = _staircase(A, B, C, N, tolv, fine_alphas, fine_betas, fine_step)
        if len(fine):
            results.append(fine[np.lexsort((fine[:, 3], fine[:, 2], fine[:, 1], fine[:, 0]))][np.argmin(fine[:, 0])])
    allc = np.vstack(results)
    allc = allc[np.lexsort((allc[:, 3], allc[:, 2], allc[:, 1], allc[:, 0]))]
    best = allc[np.argmin(allc[:, 0])]
    return float(best[1]), float(best[2]), float(best[3])


def reich_lp_optimum(
    A: np.ndarray,
    B: np.ndarray,
    C: np.ndarray,
    N: np.ndarray,
    *,
    slack: float = 1e-7,
) -> Optional[tuple[float, tuple[float, float, float]]]:
    """Exact minimum of alpha+beta+gamma by vertex enumeration.

    Brute-force linear-feasibility oracle: every vertex of the feasible
    polyhedron is the intersection of three active constraints, so all
    3-subsets of {pair constraints} U {alpha>=0, beta>=0, gamma>=0} are
    solved and the feasible ones compared.  Intended for small instances.
    """
    G = np.vstack([np.column_stack([A, B, C]), np.eye(3)])
    h = np.concatenate([N, np.zeros(3)])
    m = len(h)
    triples = np.array(list(combinations(range(m), 3)))
    mats = G[triples]
    rhs = h[triples]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-12
    if not ok.any():
        return None
    sols = np.linalg.solve(mats[ok], rhs[ok])
    feas = np.all(sols @ G.T >= h[None, :] - slack, axis=1)
    if not feas.any():
        return None
    sols = sols[feas]
    sums = sols.sum(axis=1)
    i = int(np.lexsort((sols[:, 2], sols[:, 1], sols[:, 0], sums))[0])
    x = sols[i]
    return float(sums[i]), (float(x[0]), float(x[1]), float(x[2]))


def estimate_constants(
    ctx: Context,
    smap: SelfMap,
    theorem: str,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
) -> FitResult:
    """Tightest constants making the theorem's inequality hold on all pairs.

    Returns a failure (no profile) when a pair forces an impossible ratio
    (positive numerator over a zero denominator) or when the fitted values
    fall outside the theorem's admissible range.
    """
    validate_selfmap(ctx, smap)
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}")
    if theorem == "weak_theta":
        raise ValueError("weak_theta has no constants to fit; supply a psi gauge")

    pts = _sample_points(ctx)
    pairs = [(u, w) for u in pts for w in pts]

    if theorem in ("reich_theta", "kannan_theta"):
        A, B, C, N = _reich_arrays(ctx, smap)
        fit = fit_reich_grid(A, B, C, N, alpha_fixed=0.0 if theorem == "kannan_theta" else None, rel_tol=rel_tol)
        if fit is None:
            return FitResult(None, "no admissible constants: a pair has zero bound terms but positive image distance")
        a, b, g = fit
        total = a + b + g
        if total >= 1.0:
            return FitResult(None, f"no admissible constants: fitted sum {total!r} >= 1")
        g2 = _theta_sup(ctx, smap)
        if min(b, g) * g2 >= 1.0:
            return FitResult(
                None,
                f"no admissible constants: min(beta,gamma)={min(b, g)!r} >= 1/theta_sup={1.0 / g2!r}",
            )
        return FitResult(ContractionProfile(theorem=theorem, alpha=a, beta=b, gamma=g))

    nums = []
    dens = []
    for u, w in pairs:
        su, sw = _apply(smap, u), _apply(smap, w)
        nums.append(_dist(ctx, su, sw))
        duw = _dist(ctx, u, w)
        if theorem in ("banach_partial", "banach_theta"):
            dens.append(duw)
        elif theorem == "kannan_partial":
            dens.append(_dist(ctx, u, su) + _dist(ctx, w, sw))
        else:
            dens.append(max(duw, _dist(ctx, u, su), _dist(ctx, w, sw)))
    lam, witness = _ratio_sup(nums, dens, rel_tol, pairs)
    if lam is None:
        return FitResult(
            None,
            f"no admissible constants: zero denominator with positive image distance at pair {witness!r}",
        )
    s = _coefficient(ctx)
    if theorem in ("banach_partial", "banach_theta") and lam >= 1.0:
        return FitResult(None, f"no admissible constants: fitted ratio {lam!r} >= 1")
    if theorem == "kannan_partial":
        if lam >= 0.5:
            return FitResult(None, f"no admissible constants: fitted ratio {lam!r} >= 1/2")
        if abs(lam - 1.0 / s) <= 1e-9:
            return FitResult(None, f"no admissible constants: fitted ratio {lam!r} equals 1/s")
    if theorem == "quasi_partial" and lam >= 1.0 / s:
        return FitResult(None, f"no admissible constants: fitted ratio {lam!r} >= 1/s={1.0 / s!r}")
    return FitResult(ContractionProfile(theorem=theorem, lam=lam))


# ---------------------------------------------------------------------------
# Orbits


@dataclass(frozen=True)
class IterationTrace:
    """A Picard orbit with its consecutive distances.

    ``sigma[k] = rho(orbit[k], orbit[k+1])``; ``alpha_seq[k]`` (when a lag p
    was requested) is ``rho(orbit[k], orbit[k+p])``.  ``cycle_start`` is the
    index the orbit re-entered when a cycle was detected.
    """

    orbit: tuple
    sigma: tuple[float, ...]
    stop_reason: str  # "residual" | "cycle_detected" | "max_iter"
    alpha_seq: Optional[tuple[float, ...]] = None
    alpha_lag: Optional[int] = None
    cycle_start: Optional[int] = None

    @property
    def iterations(self) -> int:
        return len(self.sigma)


def picard_orbit(
    ctx: Context,
    smap: SelfMap,
    u0,
    *,
    tol: float = DEFAULT_RESIDUAL_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    alpha_lag: Optional[int] = None,
) -> IterationTrace:
    """Iterate ``u_{k+1} = S(u_k)`` until the step distance falls to tol,
    an exact cycle recurs (finite spaces), or max_iter."""
    validate_selfmap(ctx, smap)
    finite = isinstance(ctx, FiniteContext)
    if finite:
        if not isinstance(u0, (int, np.integer)) or not (0 <= u0 < ctx.table.n):
            raise ValueError("u0 must be a point of the space")
        u0 = int(u0)
    else:
        if not (ctx.lo - 1e-12 <= u0 <= ctx.hi + 1e-12):
            raise ValueError("u0 must lie in the interval")
        u0 = float(u0)

    orbit = [u0]
    sigma: list[float] = []
    seen = {u0: 0} if finite else None
    stop = "max_iter"
    cycle_start = None
    cur = u0
    for _ in range(max_iter):
        nxt = _apply(smap, cur)
        orbit.append(nxt)
        sigma.append(_dist(ctx, cur, nxt))
        if sigma[-1] <= tol:
            stop = "residual"
            break
        if finite:
            if nxt in seen:
                stop = "cycle_detected"
                cycle_start = seen[nxt]
                break
            seen[nxt] = len(orbit) - 1
        cur = nxt

    alpha_seq = None
    if alpha_lag is not None:
        if alpha_lag < 1:
            raise ValueError("alpha lag must be >= 1")
        alpha_seq = tuple(
            _dist(ctx, orbit[i], orbit[i + alpha_lag]) for i in range(len(orbit) - alpha_lag)
        )
    return IterationTrace(
        orbit=tuple(orbit),
        sigma=tuple(sigma),
        stop_reason=stop,
        alpha_seq=alpha_seq,
        alpha_lag=alpha_lag,
        cycle_start=cycle_start,
    )


def trace_pair_distances(trace: IterationTrace, ctx: Context) -> np.ndarray:
    """Full table rho(u_i, u_j) over the recorded orbit."""
    L = len(trace.orbit)
    out = np.zeros((L, L))
    for i in range(L):
        for j in range(L):
            out[i, j] = _dist(ctx, trace.orbit[i], trace.orbit[j])
    return out


# ---------------------------------------------------------------------------
# Rate bounds


@dataclass(frozen=True)
class RateCheck:
    ok: bool
    violated_index: Optional[int]
    rate: Optional[float]


def rate_certificate(
    trace: IterationTrace,
    profile: ContractionProfile,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
) -> RateCheck:
    """Check the per-theorem decay bound at every recorded index.

    Geometric families check ``sigma_n <= r^n * sigma_0`` with r the
    profile's per-step ratio.  The weak family checks the descent
    inequality ``alpha_{n+1} <= alpha_n - psi(alpha_n)`` on the recorded
    lagged distances (the step distances when no lag was recorded).
    """
    if profile.theorem == "weak_theta":
        seq = trace.alpha_seq if trace.alpha_seq is not None else trace.sigma
        for i in range(len(seq) - 1):
            bound = seq[i] - profile.psi(seq[i])
            if seq[i + 1] > bound + cmp_tol(seq[i + 1], bound, rel_tol):
                return RateCheck(False, i + 1, None)
        return RateCheck(True, None, None)

    r = profile_rate(profile)
    if not trace.sigma:
        return RateCheck(True, None, r)
    s0 = trace.sigma[0]
    for i, sig in enumerate(trace.sigma):
        bound = (r**i) * s0
        if sig > bound + cmp_tol(sig, bound, rel_tol):
            return RateCheck(False, i, r)
    return RateCheck(True, None, r)


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class FixedPointCertificate:
    """Machine-checkable record of one solver run.

    ``status`` is "certified" only when the orbit converged, the residual
    and (for the partial families) the fixed point's self-distance are
    within tolerance, the uniqueness scan found exactly the computed point,
    and every rate bound held.  Anything else is a loud "failed"
    certificate: under satisfied hypotheses it contradicts the theorem and
    indicates a bug or an incomplete space.
    """

    theorem: str
    status: str  # "certified" | "failed"
    failure_reason: Optional[str]
    fixed_point: object
    residual: float
    self_distance: float
    unique: bool
    uniqueness_evidence: tuple
    rate_ok: bool
    iterations: int
    stop_reason: str
    override_used: bool = False
    warnings: tuple[str, ...] = ()


def solve(
    ctx: Context,
    smap: SelfMap,
    profile: ContractionProfile,
    u0,
    *,
    tol: float = DEFAULT_RESIDUAL_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    override: bool = False,
    rel_tol: float = DEFAULT_REL_TOL,
    alpha_lag: int = 1,
) -> FixedPointCertificate:
    """Run the Picard solver for one theorem and certify its conclusion.

    Raises HypothesisRejected if the hypothesis check fails, unless
    ``override`` is set (the override is recorded in the certificate).
    """
    hyp = check_hypotheses(ctx, smap, profile, rel_tol=rel_tol)
    if not hyp.ok and not override:
        raise HypothesisRejected(hyp)

    lag = alpha_lag if profile.theorem == "weak_theta" else None
    trace = picard_orbit(ctx, smap, u0, tol=tol, max_iter=max_iter, alpha_lag=lag)

    failure: Optional[str] = None
    if trace.stop_reason != "residual":
        failure = f"orbit did not converge ({trace.stop_reason})"

    b = trace.orbit[-1]
    residual = _dist(ctx, b, _apply(smap, b))
    self_distance = _dist(ctx, b, b)
    if failure is None and residual > tol:
        failure = f"residual {residual!r} above tolerance"
    if failure is None and profile.theorem in PARTIAL_THEOREMS and self_distance > tol:
        failure = f"fixed-point self-distance {self_distance!r} above tolerance"

    if isinstance(ctx, FiniteContext):
        n = ctx.table.n
        scan = tuple(x for x in range(n) if _dist(ctx, x, _apply(smap, x)) <= tol)
        exact = tuple(x for x in range(n) if _apply(smap, x) == x)
        unique = len(scan) == 1 and (failure is not None or scan[0] == b)
        evidence = (("residual_scan", scan), ("exact_fixed_points", exact))
    else:
        root = smap.b / (1.0 - smap.a) if smap.a != 1.0 else None
        unique = abs(smap.a) < 1.0
        evidence = (("closed_form_root", root),)
    if failure is None and not unique:
        failure = f"uniqueness scan did not isolate the fixed point: {evidence[0]!r}"

    rate = rate_certificate(trace, profile, rel_tol=rel_tol)
    if failure is None and not rate.ok:
        failure = f"rate bound violated at index {rate.violated_index}"

    return FixedPointCertificate(
        theorem=profile.theorem,
        status="failed" if failure else "certified",
        failure_reason=failure,
        fixed_point=b,
        residual=residual,
        self_distance=self_distance,
        unique=unique,
        uniqueness_evidence=evidence,
        rate_ok=rate.ok,
        iterations=trace.iterations,
        stop_reason=trace.stop_reason,
        override_used=override and not hyp.ok,
        warnings=hyp.warnings,
    )


# ---------------------------------------------------------------------------
# Orbit diagnostics


@dataclass(frozen=True)
class CauchyDiagnostic:
    consistent: bool
    limit_estimate: Optional[float]
    max_deviation: float
    window_start: int
    note: str = "finite-window diagnostic over the orbit tail, not a proof"


def _tail_start(trace: IterationTrace, tol: float, window: int) -> int:
    L = len(trace.orbit)
    m = 0
    for sig in reversed(trace.sigma):
        if sig <= tol:
            m += 1
        else:
            break
    base = L - 1 - m if m > 0 else L - window
    return max(0, base, L - window)


def cauchy_diagnostic(
    trace: IterationTrace,
    ctx: Context,
    kind: str = "partial",
    *,
    tol: float = 1e-9,
    window: int = 8,
) -> CauchyDiagnostic:
    """Tail consistency with the family's Cauchy/limit definition.

    Partial families: all tail pairwise distances must agree with the limit
    estimate rho(last, last).  Pairwise-coefficient families: tail pairwise
    distances must simply fall below tol.  A finite window can only ever
    diagnose, never prove, Cauchy behaviour.
    """
    if len(trace.orbit) < 2:
        raise ValueError("trace must record at least two points")
    if kind not in ("partial", "theta"):
        raise ValueError("kind must be 'partial' or 'theta'")
    start = _tail_start(trace, tol, window)
    pts = trace.orbit[start:]
    if kind == "partial":
        limit = _dist(ctx, trace.orbit[-1], trace.orbit[-1])
        dev = max(
            abs(_dist(ctx, a, b) - limit) for i, a in enumerate(pts) for b in pts[i:]
        )
    else:
        limit = None
        dev = max(_dist(ctx, a, b) for i, a in enumerate(pts) for b in pts[i:])
    return CauchyDiagnostic(
        consistent=dev <= tol,
        limit_estimate=limit,
        max_deviation=dev,
        window_start=start,
    )


@dataclass(frozen=True)
class LimitSetResult:
    points: tuple[int, ...]
    settled: bool


def limit_set(trace: IterationTrace, space: DistanceTable, *, tol: float = 1e-9) -> LimitSetResult:
    """All points whose distance from the orbit tail equals their own
    self-distance: the set of limits under the partial convergence rule.

    May legitimately contain more than one point; that multiplicity is a
    feature of partial families, surfaced as data.  An orbit that never
    settled yields an empty set with ``settled=False``.
    """
    if trace.stop_reason == "residual":
        block = [trace.orbit[-1]]
    elif trace.stop_reason == "cycle_detected" and trace.cycle_start is not None:
        block = list(trace.orbit[trace.cycle_start:-1])
    else:
        return LimitSetResult(points=(), settled=False)
    d = space.as_array()
    members = []
    for x in range(space.n):
        selfd = d[x, x]
        if all(abs(d[c, x] - selfd) <= cmp_tol(d[c, x], selfd, tol) for c in block):
            members.append(x)
    return LimitSetResult(points=tuple(members), settled=True)


@dataclass(frozen=True)
class OrbitDistinctness:
    status: str  # "ok" | "vacuous" | "premise_not_met" | "coincidence"
    witness: Optional[tuple[int, ...]] = None


def distinct_orbit_check(
    trace: IterationTrace,
    ctx: Context,
    c: float,
    *,
    tol: float = DEFAULT_RESIDUAL_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
) -> OrbitDistinctness:
    """Under a verified consecutive-contraction premise, the orbit's points
    must be pairwise distinct until it settles.

    The premise ``sigma_n <= c * sigma_{n-1}`` is checked first; when it
    fails the result is "premise_not_met".  A coincidence under a satisfied
    premise is a failed certificate for the caller.
    """
    if not (0.0 <= c < 1.0):
        raise ValueError("c must lie in [0, 1)")
    settle = len(trace.sigma)
    for i, sig in enumerate(trace.sigma):
        if sig <= tol:
            settle = i
            break
    for i in range(1, settle):
        bound = c * trace.sigma[i - 1]
        if trace.sigma[i] > bound + cmp_tol(trace.sigma[i], bound, rel_tol):
            return OrbitDistinctness("premise_not_met", (i,))
    considered = trace.orbit[: settle + 1]
    if len(considered) < 2:
        return OrbitDistinctness("vacuous")
    seen: dict = {}
    for i, p in enumerate(considered):
        if p in seen:
            return OrbitDistinctness("coincidence", (seen[p], i))
        seen[p] = i
    return OrbitDistinctness("ok")


# ---------------------------------------------------------------------------
# Pairwise Cauchy bound re-check


@dataclass(frozen=True)
class CauchyBoundParams:
    """Constants of the pairwise recurrence bound
    ``rho(u_m, u_n) <= c*rho(u_{m-1}, u_{n-1}) + k1*base^m + k2*base^{m or n}``.

    ``mode`` selects the second correction exponent: "printed" uses base^m in
    both terms, "corrected" uses base^n in the second.  ``base`` defaults to
    ``c``; a separate base supports re-checking proof-style bounds whose
    multiplier and correction decay differ.
    """

    c: float
    k1: float
    k2: float
    n0: Optional[int] = None
    mode: str = "printed"
    base: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.c < 1.0):
            raise ValueError("c must lie in [0, 1)")
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("k1 and k2 must be nonnegative")
        if self.mode not in ("printed", "corrected"):
            raise ValueError("mode must be 'printed' or 'corrected'")
        if self.base is not None and not (0.0 <= self.base < 1.0):
            raise ValueError("base must lie in [0, 1)")
        if self.n0 is not None and self.n0 < 1:
            raise ValueError("n0 must be a positive integer")


def smallest_power_witness(c: float, theta_max: float) -> Optional[int]:
    """Least n0 >= 1 with c**n0 * theta_max < 1, or None when impossible."""
    if not (0.0 <= c < 1.0) or theta_max < 1.0:
        return None
    if c == 0.0:
        return 1
    n0 = 1
    while (c**n0) * theta_max >= 1.0:
        n0 += 1
        if n0 > 10_000:
            return None
    return n0


def validate_cauchy_params(params: CauchyBoundParams, theta_max: float) -> tuple[str, ...]:
    """Violated invariants of the bound parameters against a coefficient sup."""
    problems: list[str] = []
    n0 = params.n0 if params.n0 is not None else smallest_power_witness(params.c, theta_max)
    if n0 is None:
        problems.append("no exponent witness: c**n0 * theta_max < 1 unattainable")
    elif (params.c**n0) * theta_max >= 1.0:
        problems.append(f"c**n0 * theta_max >= 1 at n0={n0}")
    return tuple(problems)


@dataclass(frozen=True)
class CauchyBoundCheck:
    ok: bool
    first_violation: Optional[tuple[int, int]]


def cauchy_bound_check(
    pair_distances: np.ndarray,
    params: CauchyBoundParams,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
) -> CauchyBoundCheck:
    """Verify the pairwise recurrence bound at every recorded (m, n >= 1)."""
    D = np.asarray(pair_distances, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 2:
        raise ValueError("pair_distances must be a square table over >= 2 indices")
    L = D.shape[0]
    base = params.c if params.base is None else params.base
    powers = base ** np.arange(L, dtype=float)
    corr1 = params.k1 * powers[1:, None]
    if params.mode == "printed":
        corr2 = params.k2 * powers[1:, None]
    else:
        corr2 = params.k2 * powers[None, 1:]
    bound = params.c * D[:-1, :-1] + corr1 + corr2
    lhs = D[1:, 1:]
    tol = rel_tol * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(bound)))
    viol = lhs > bound + tol
    if viol.any():
        m, n = np.argwhere(viol)[0]
        return CauchyBoundCheck(False, (int(m) + 1, int(n) + 1))
    return CauchyBoundCheck(True, None)
