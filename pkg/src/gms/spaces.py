"""Finite generalized metric spaces and exhaustive axiom verification.

A space family is treated as a parameter bundle over a finite distance
table: the identity axiom (plain form ``rho(u,w)=0 iff u=w`` or the partial
form ``u=w iff rho(u,u)=rho(u,w)=rho(w,w)``), the small-self-distance axiom
(partial families only), symmetry, and a polygon inequality routed through
``v`` intermediate points with either a constant coefficient ``s >= 1`` or a
pairwise coefficient table ``theta(u,w) >= 1``.  Partial families subtract
the intermediates' self-distances from the polygon bound and allow positive
self-distance.

Every check enumerates each admissible tuple, so a "pass" verdict is a
finite proof rather than a sample.  Tuple enumeration is vectorised but the
reported order is always lexicographic, so output is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, Optional

import numpy as np

DEFAULT_REL_TOL = 1e-9
DEFAULT_REPORT_CAP = 10

# Chain blocks larger than this many rows are split on the leading point to
# bound peak memory; splitting preserves lexicographic order.
_BLOCK_ROW_CAP = 4_000_000


class PreconditionError(ValueError):
    """An operation's input failed the axiom check it is required to pass."""

    def __init__(self, msg: str, report: "VerificationReport | None" = None):
        super().__init__(msg)
        self.report = report


class CombinationError(ValueError):
    """The entrywise sum of two valid spaces failed its claimed axioms."""

    def __init__(self, msg: str, report: "VerificationReport"):
        super().__init__(msg)
        self.report = report


# ---------------------------------------------------------------------------
# Space families


@dataclass(frozen=True)
class KindSpec:
    """Static description of one axiom family."""

    name: str
    partial: bool        # partial identity axiom, small self-distance, self-sum correction
    uses_theta: bool     # polygon coefficient is a pairwise table instead of a constant
    forced_v: Optional[int]
    forced_s: Optional[float]


_KIND_LIST = (
    KindSpec("metric", False, False, 1, 1.0),
    KindSpec("b_metric", False, False, 1, None),
    KindSpec("rectangular", False, False, 2, 1.0),
    KindSpec("v_generalized", False, False, None, 1.0),
    KindSpec("bvs", False, False, None, None),
    KindSpec("extended_b", False, True, 1, None),
    KindSpec("bv_theta", False, True, None, None),
    KindSpec("partial_metric", True, False, 1, 1.0),
    KindSpec("partial_b", True, False, 1, None),
    KindSpec("partial_rect_b", True, False, 2, None),
    KindSpec("partial_v_generalized", True, False, None, 1.0),
    KindSpec("partial_bvs", True, False, None, None),
)

KIND_SPECS = {k.name: k for k in _KIND_LIST}
KIND_NAMES = tuple(KIND_SPECS)
PARTIAL_KINDS = frozenset(k.name for k in _KIND_LIST if k.partial)
THETA_KINDS = frozenset(k.name for k in _KIND_LIST if k.uses_theta)


# ---------------------------------------------------------------------------
# Tables


def _as_square_array(rows, what: str) -> np.ndarray:
    arr = np.array(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{what} must be a nonempty square table")
    if not np.isfinite(arr).all():
        raise ValueError(f"{what} entries must be finite")
    arr.setflags(write=False)
    return arr


class DistanceTable:
    """Square table of pairwise distances over points ``0..n-1``.

    Entries must be finite and nonnegative; self-distances may be nonzero.
    Symmetry is *not* enforced at construction so the verifier can report it
    as an axiom violation (the file parser is stricter and rejects
    asymmetric input outright).
    """

    __slots__ = ("_d",)

    def __init__(self, rows) -> None:
        arr = _as_square_array(rows, "distance table")
        if (arr < 0).any():
            raise ValueError("distance table entries must be nonnegative")
        self._d = arr

    @property
    def n(self) -> int:
        return self._d.shape[0]

    def entry(self, i: int, j: int) -> float:
        return float(self._d[i, j])

    def as_array(self) -> np.ndarray:
        """Read-only ndarray view of the table."""
        return self._d

    def rows(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self._d]

    def is_symmetric(self, rel_tol: float = DEFAULT_REL_TOL) -> bool:
        d = self._d
        return bool(np.all(np.abs(d - d.T) <= rel_tol * np.maximum(1.0, np.maximum(np.abs(d), np.abs(d.T)))))

    def __eq__(self, other) -> bool:
        return isinstance(other, DistanceTable) and np.array_equal(self._d, other._d)

    def __hash__(self):
        return hash(self._d.tobytes())

    def __repr__(self) -> str:
        return f"DistanceTable(n={self.n})"


class ThetaTable:
    """Pairwise polygon coefficients ``theta(u,w) >= 1`` over ``0..n-1``.

    Symmetry is deliberately not required: the pairwise-coefficient axioms
    evaluate theta at ordered pairs.
    """

    __slots__ = ("_t",)

    def __init__(self, rows) -> None:
        arr = _as_square_array(rows, "theta table")
        if (arr < 1.0).any():
            raise ValueError("theta entries must be >= 1")
        self._t = arr

    @property
    def n(self) -> int:
        return self._t.shape[0]

    def entry(self, i: int, j: int) -> float:
        return float(self._t[i, j])

    def as_array(self) -> np.ndarray:
        return self._t

    def rows(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self._t]

    def max_entry(self) -> float:
        return float(self._t.max())

    def __eq__(self, other) -> bool:
        return isinstance(other, ThetaTable) and np.array_equal(self._t, other._t)

    def __hash__(self):
        return hash(self._t.tobytes())

    def __repr__(self) -> str:
        return f"ThetaTable(n={self.n})"


# ---------------------------------------------------------------------------
# Axiom profiles


@dataclass(frozen=True)
class AxiomProfile:
    """Which axiom family a table is claimed to satisfy, with parameters.

    ``distinct_chain`` selects the quantifier regime of the polygon axiom:
    when true, a tuple ``(u, w, z_1..z_v)`` is admissible only if all v+2
    points are pairwise distinct; when false every tuple is admissible.
    Defaults follow the family definitions: distinct for plain families,
    all-tuples for partial families.
    """

    kind: str
    v: int
    s: Optional[float] = None
    theta: Optional[ThetaTable] = None
    distinct_chain: bool = True

    def __post_init__(self):
        spec = KIND_SPECS.get(self.kind)
        if spec is None:
            raise ValueError(f"unknown kind {self.kind!r}")
        if not isinstance(self.v, int) or self.v < 1:
            raise ValueError("order v must be a positive integer")
        if spec.forced_v is not None and self.v != spec.forced_v:
            raise ValueError(f"kind {self.kind} forces v={spec.forced_v}")
        if spec.uses_theta:
            if self.theta is None or self.s is not None:
                raise ValueError(f"kind {self.kind} takes a theta table, not a constant s")
        else:
            if self.s is None or self.theta is not None:
                raise ValueError(f"kind {self.kind} takes a constant coefficient s")
            if self.s < 1.0:
                raise ValueError("coefficient s must be >= 1")
            if spec.forced_s is not None and self.s != spec.forced_s:
                raise ValueError(f"kind {self.kind} forces s={spec.forced_s}")

    @classmethod
    def for_kind(
        cls,
        kind: str,
        v: Optional[int] = None,
        s: Optional[float] = None,
        theta: Optional[ThetaTable] = None,
        distinct_chain: Optional[bool] = None,
    ) -> "AxiomProfile":
        """Build a profile applying the family's forced parameters and defaults."""
        spec = KIND_SPECS.get(kind)
        if spec is None:
            raise ValueError(f"unknown kind {kind!r}")
        if spec.forced_v is not None:
            if v is not None and v != spec.forced_v:
                raise ValueError(f"kind {kind} forces v={spec.forced_v}")
            v = spec.forced_v
        if v is None:
            raise ValueError(f"kind {kind} requires an order v")
        if spec.uses_theta:
            if theta is None:
                raise ValueError(f"kind {kind} requires a theta table")
            s = None
        else:
            if spec.forced_s is not None:
                if s is not None and s != spec.forced_s:
                    raise ValueError(f"kind {kind} forces s={spec.forced_s}")
                s = spec.forced_s
            if s is None:
                raise ValueError(f"kind {kind} requires a coefficient s")
            s = float(s)
            theta = None
        if distinct_chain is None:
            distinct_chain = not spec.partial
        return cls(kind=kind, v=int(v), s=s, theta=theta, distinct_chain=bool(distinct_chain))

    @property
    def partial(self) -> bool:
        return self.kind in PARTIAL_KINDS

    @property
    def uses_theta(self) -> bool:
        return self.kind in THETA_KINDS

    def coefficient_label(self) -> str:
        return "theta" if self.uses_theta else repr(self.s)


# ---------------------------------------------------------------------------
# Verification results


@dataclass(frozen=True)
class ViolationWitness:
    """One concrete tuple of points falsifying one axiom.

    For polygon violations ``points`` is ``(u, w, z_1..z_v)`` and
    ``lhs > rhs + tol``.  For the partial identity axiom the witness records
    ``lhs = rho(u,w)`` and ``rhs = rho(u,u)`` of the offending equal triple.
    """

    axiom_id: str
    points: tuple[int, ...]
    lhs: float
    rhs: float


@dataclass(frozen=True)
class VerificationReport:
    profile: AxiomProfile
    verdict: str  # "pass" | "fail"
    violations: tuple[ViolationWitness, ...]
    tuples_checked: int
    warnings: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def vacuous(self) -> bool:
        return any(w.startswith("vacuous") for w in self.warnings)


# ---------------------------------------------------------------------------
# Tolerances


def cmp_tol(lhs: float, rhs: float, rel: float = DEFAULT_REL_TOL) -> float:
    """Comparison tolerance scaled to the larger operand (floor 1.0)."""
    return rel * max(1.0, abs(lhs), abs(rhs))


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= cmp_tol(a, b, rel)


# ---------------------------------------------------------------------------
# Chain enumeration

_PERM_TEMPLATES: dict[tuple[int, int], np.ndarray] = {}
_CART_TEMPLATES: dict[tuple[int, int], np.ndarray] = {}


def _perm_template(k: int, v: int) -> np.ndarray:
    key = (k, v)
    tmpl = _PERM_TEMPLATES.get(key)
    if tmpl is None:
        tmpl = np.fromiter(
            (i for p in permutations(range(k), v) for i in p),
            dtype=np.intp,
            count=math.perm(k, v) * v,
        ).reshape(-1, v)
        _PERM_TEMPLATES[key] = tmpl
    return tmpl


def _cart_template(k: int, v: int) -> np.ndarray:
    key = (k, v)
    tmpl = _CART_TEMPLATES.get(key)
    if tmpl is None:
        tmpl = np.indices((k,) * v).reshape(v, -1).T.copy()
        _CART_TEMPLATES[key] = tmpl
    return tmpl


def _chain_blocks(pool: np.ndarray, v: int, distinct: bool) -> Iterator[np.ndarray]:
    """Yield ``(m, v)`` arrays of chain points in lexicographic order.

    ``pool`` must be sorted ascending.  With ``distinct`` the chains are the
    v-permutations of the pool, otherwise the full cartesian power.
    """
    k = len(pool)
    if v == 0:
        yield np.zeros((1, 0), dtype=np.intp)
        return
    total = math.perm(k, v) if distinct else k**v
    if total == 0:
        return
    if total <= _BLOCK_ROW_CAP:
        tmpl = _perm_template(k, v) if distinct else _cart_template(k, v)
        yield pool[tmpl]
        return
    for i in range(k):
        rest = np.concatenate((pool[:i], pool[i + 1:])) if distinct else pool
        for block in _chain_blocks(rest, v - 1, distinct):
            head = np.full((len(block), 1), pool[i], dtype=np.intp)
            yield np.hstack((head, block))


def _admissible_pairs(n: int, distinct: bool) -> Iterator[tuple[int, int]]:
    for u in range(n):
        for w in range(n):
            if distinct and u == w:
                continue
            yield u, w


def _pair_pool(n: int, u: int, w: int, distinct: bool) -> np.ndarray:
    if distinct:
        return np.array([p for p in range(n) if p != u and p != w], dtype=np.intp)
    return np.arange(n, dtype=np.intp)


def _path_sums(d: np.ndarray, u: int, w: int, chains: np.ndarray) -> np.ndarray:
    total = d[u, chains[:, 0]].copy()
    for i in range(chains.shape[1] - 1):
        total += d[chains[:, i], chains[:, i + 1]]
    total += d[chains[:, -1], w]
    return total


def polygon_tuple_count(n: int, v: int, distinct: bool) -> int:
    """Number of admissible polygon tuples ``(u, w, z_1..z_v)``."""
    if distinct:
        if n < v + 2:
            return 0
        return n * (n - 1) * math.perm(n - 2, v)
    return n ** (v + 2)


# ---------------------------------------------------------------------------
# Structural axioms (identity, small self-distance, symmetry)


def _structural_violations(d: np.ndarray, partial: bool, rel_tol: float) -> list[ViolationWitness]:
    n = d.shape[0]
    found: list[ViolationWitness] = []
    if partial:
        # u = w  <=>  rho(u,u) = rho(u,w) = rho(w,w).  The forward direction
        # is an identity of table entries; only the backward one can fail.
        for u in range(n):
            for w in range(u + 1, n):
                if _close(d[u, u], d[u, w], rel_tol) and _close(d[w, w], d[u, w], rel_tol):
                    found.append(ViolationWitness("T0_indistancy", (u, w), float(d[u, w]), float(d[u, u])))
    else:
        for u in range(n):
            if d[u, u] > cmp_tol(d[u, u], 0.0, rel_tol):
                found.append(ViolationWitness("T0_indistancy", (u, u), float(d[u, u]), 0.0))
        for u in range(n):
            for w in range(u + 1, n):
                if d[u, w] <= cmp_tol(d[u, w], 0.0, rel_tol):
                    found.append(ViolationWitness("T0_indistancy", (u, w), float(d[u, w]), 0.0))
    if partial:
        for u in range(n):
            for w in range(n):
                if u != w and d[u, u] > d[u, w] + cmp_tol(d[u, u], d[u, w], rel_tol):
                    found.append(ViolationWitness("T1_small_self", (u, w), float(d[u, u]), float(d[u, w])))
    for u in range(n):
        for w in range(u + 1, n):
            if not _close(d[u, w], d[w, u], rel_tol):
                found.append(ViolationWitness("T2_symmetry", (u, w), float(d[u, w]), float(d[w, u])))
    return found


# ---------------------------------------------------------------------------
# Verification


def verify_axioms(
    space: DistanceTable,
    profile: AxiomProfile,
    *,
    report_cap: int = DEFAULT_REPORT_CAP,
    rel_tol: float = DEFAULT_REL_TOL,
) -> VerificationReport:
    """Exhaustively check every axiom of ``profile`` on ``space``.

    The report lists at most ``report_cap`` violations, ordered by axiom id
    (T0, T1, T2, T3) and then lexicographically by point tuple.
    ``tuples_checked`` counts enumerated polygon tuples.  When
    ``distinct_chain`` holds and ``n < v + 2`` the polygon axiom has no
    admissible tuple; the verdict is then a pass carrying a "vacuous"
    warning.
    """
    spec = KIND_SPECS[profile.kind]
    d = space.as_array()
    n = space.n
    if spec.uses_theta:
        if profile.theta is None or profile.theta.n != n:
            raise ValueError("theta table size must match the distance table")
        theta_arr = profile.theta.as_array()
    else:
        theta_arr = None

    structural = _structural_violations(d, spec.partial, rel_tol)
    violated = bool(structural)
    violations: list[ViolationWitness] = structural[:report_cap]
    warnings: list[str] = []

    v = profile.v
    distinct = profile.distinct_chain
    tuples_checked = 0
    if distinct and n < v + 2:
        warnings.append("vacuous polygon axiom: fewer than v+2 points")
    else:
        diag = np.diagonal(d)
        for u, w in _admissible_pairs(n, distinct):
            lhs = float(d[u, w])
            coeff = float(theta_arr[u, w]) if theta_arr is not None else float(profile.s)
            pool = _pair_pool(n, u, w, distinct)
            for chains in _chain_blocks(pool, v, distinct):
                rhs = coeff * _path_sums(d, u, w, chains)
                if spec.partial:
                    rhs -= diag[chains].sum(axis=1)
                tuples_checked += len(chains)
                tol = rel_tol * np.maximum(1.0, np.maximum(abs(lhs), np.abs(rhs)))
                bad = (rhs - lhs) < -tol
                if bad.any():
                    violated = True
                    if len(violations) < report_cap:
                        for bi in np.flatnonzero(bad):
                            if len(violations) >= report_cap:
                                break
                            violations.append(
                                ViolationWitness(
                                    "T3_polygon",
                                    (u, w, *(int(z) for z in chains[bi])),
                                    lhs,
                                    float(rhs[bi]),
                                )
                            )

    return VerificationReport(
        profile=profile,
        verdict="fail" if violated else "pass",
        violations=tuple(violations),
        tuples_checked=tuples_checked,
        warnings=tuple(warnings),
    )


def polygon_slack(
    space: DistanceTable,
    profile: AxiomProfile,
    points: tuple[int, ...],
) -> float:
    """Slack ``rhs - lhs`` of the polygon inequality at one tuple.

    ``points`` lays out ``(u, w, z_1..z_v)``.  Nonnegative slack means the
    tuple satisfies the axiom.  Raises if the tuple is out of range or not
    admissible under the profile's ``distinct_chain`` regime.
    """
    if len(points) != profile.v + 2:
        raise ValueError(f"expected a tuple of length v+2 = {profile.v + 2}")
    n = space.n
    if any(not (0 <= p < n) for p in points):
        raise ValueError("tuple point out of range")
    if profile.distinct_chain and len(set(points)) != len(points):
        raise ValueError("tuple not admissible: distinct_chain requires pairwise distinct points")
    u, w = points[0], points[1]
    chain = points[2:]
    d = space.as_array()
    path = d[u, chain[0]]
    for a, b in zip(chain, chain[1:]):
        path += d[a, b]
    path += d[chain[-1], w]
    coeff = profile.theta.entry(u, w) if profile.uses_theta else profile.s
    rhs = coeff * path
    if profile.partial:
        rhs -= sum(d[z, z] for z in chain)
    return float(rhs - d[u, w])


def zero_offdiag_check(
    space: DistanceTable,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
) -> Optional[ViolationWitness]:
    """First off-diagonal zero, or ``None`` when all are strictly positive.

    On any table passing a partial-family verification this must return
    ``None``: zero distance forces equal points there.
    """
    d = space.as_array()
    n = space.n
    for u in range(n):
        for w in range(u + 1, n):
            if d[u, w] <= cmp_tol(d[u, w], 0.0, rel_tol):
                return ViolationWitness("zero_offdiag", (u, w), float(d[u, w]), 0.0)
    return None


def combine_spaces(
    p: DistanceTable,
    b: DistanceTable,
    v: int,
    s: float,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
    report_cap: int = DEFAULT_REPORT_CAP,
) -> DistanceTable:
    """Entrywise sum of a partial metric and an order-v coefficient-s space.

    Both inputs and the sum are verified, never assumed: the sum must pass
    the partial order-v family at the same coefficient, else
    ``CombinationError`` is raised with the failing report attached.
    """
    if p.n != b.n:
        raise PreconditionError("tables must have the same point count")
    rp = verify_axioms(p, AxiomProfile.for_kind("partial_metric"), report_cap=report_cap, rel_tol=rel_tol)
    if not rp.passed:
        raise PreconditionError("first argument is not a partial metric", rp)
    rb = verify_axioms(b, AxiomProfile.for_kind("bvs", v=v, s=s), report_cap=report_cap, rel_tol=rel_tol)
    if not rb.passed:
        raise PreconditionError(f"second argument is not a bvs(v={v}, s={s}) space", rb)
    total = DistanceTable(p.as_array() + b.as_array())
    rt = verify_axioms(total, AxiomProfile.for_kind("partial_bvs", v=v, s=s), report_cap=report_cap, rel_tol=rel_tol)
    if not rt.passed:
        raise CombinationError("sum failed partial polygon verification", rt)
    return total


def build_affine_theta_example(n_max: int) -> tuple[DistanceTable, ThetaTable]:
    """Two-tier worked example over the naturals ``0..n_max``.

    Distance 6 between the hub points 1 and 2, distance 1 between any other
    distinct pair, zero self-distance; coefficient ``theta(u,w) = 3 + u + w``.
    The result satisfies the pairwise-coefficient polygon axioms at order
    v=5 (and indices equal point labels, so ``d[1][2] == 6``).
    """
    if n_max < 7:
        raise ValueError("n_max must be at least 7 so order-5 chains of distinct points exist")
    n = n_max + 1
    d = np.ones((n, n))
    np.fill_diagonal(d, 0.0)
    d[1, 2] = d[2, 1] = 6.0
    idx = np.arange(n, dtype=float)
    theta = 3.0 + idx[:, None] + idx[None, :]
    return DistanceTable(d), ThetaTable(theta)
