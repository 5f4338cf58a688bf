"""Minimal polygon parameters and family-membership sweeps.

Given a table that already satisfies the structural axioms of a family,
the polygon axiom is monotone in its coefficient: if it holds at ``s`` it
holds at every larger ``s``.  The classifier exploits that to report the
smallest admissible constant coefficient per order, the pointwise-minimal
pairwise coefficient table, the smallest passing order at a fixed
coefficient, and a full membership sweep across the family lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .spaces import (
    DEFAULT_REL_TOL,
    AxiomProfile,
    DistanceTable,
    KIND_SPECS,
    PreconditionError,
    ThetaTable,
    VerificationReport,
    _admissible_pairs,
    _chain_blocks,
    _pair_pool,
    _path_sums,
    _structural_violations,
    cmp_tol,
    verify_axioms,
)

FAMILIES = ("plain", "partial")

# Enumeration is O(n^(v+2)); six orders cover the worked example (v=5) with
# headroom at desk scale.
DEFAULT_V_MAX = 6


def _default_distinct(family: str) -> bool:
    return family == "plain"


def _structural_ok(space: DistanceTable, family: str, rel_tol: float) -> bool:
    return not _structural_violations(space.as_array(), family == "partial", rel_tol)


def _require_structure(space: DistanceTable, family: str, rel_tol: float, what: str) -> None:
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    if not _structural_ok(space, family, rel_tol):
        raise PreconditionError(f"{what}: table fails the {family} identity/self/symmetry axioms")


@dataclass(frozen=True)
class MinOrderResult:
    """Per-order verdicts at a fixed coefficient; vacuous passes kept apart."""

    found_v: Optional[int]
    vacuous: bool
    verdicts: tuple[str, ...]  # index i holds the verdict for v = i + 1


@dataclass(frozen=True)
class HierarchyProfile:
    memberships: tuple[tuple[AxiomProfile, str], ...]
    minimal_s: Mapping[str, Mapping[int, Optional[float]]]  # family -> v -> s_min
    minimal_v: Mapping[str, Mapping[float, Optional[int]]]  # family -> s -> first passing order


def min_coefficient(
    space: DistanceTable,
    v: int,
    family: str = "plain",
    distinct_chain: Optional[bool] = None,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
    validate: bool = True,
) -> Optional[float]:
    """Smallest coefficient ``s >= 1`` making the order-v polygon axiom hold.

    Ratios are taken over every admissible tuple:
    ``(rho(u,w) + self-sum) / path-sum`` with the self-sum present only for
    the partial family.  Zero-path tuples are skipped after asserting their
    left side is within tolerance of zero; otherwise no finite coefficient
    works and ``None`` is returned.
    """
    if distinct_chain is None:
        distinct_chain = _default_distinct(family)
    if validate:
        _require_structure(space, family, rel_tol, "min_coefficient")
    partial = family == "partial"
    d = space.as_array()
    diag = np.diagonal(d)
    n = space.n
    best = 1.0
    for u, w in _admissible_pairs(n, distinct_chain):
        lhs = float(d[u, w])
        pool = _pair_pool(n, u, w, distinct_chain)
        for chains in _chain_blocks(pool, v, distinct_chain):
            paths = _path_sums(d, u, w, chains)
            need = lhs + diag[chains].sum(axis=1) if partial else np.full(len(chains), lhs)
            zero = paths <= rel_tol * max(1.0, lhs)
            if zero.any() and (need[zero] > cmp_tol(lhs, 0.0, rel_tol)).any():
                return None
            live = ~zero
            if live.any():
                best = max(best, float((need[live] / paths[live]).max()))
    return best


def min_theta(
    space: DistanceTable,
    v: int,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
    validate: bool = True,
) -> Optional[ThetaTable]:
    """Pointwise-minimal admissible pairwise coefficient table at order v.

    ``t[u][w] = max(1, max over admissible chains of rho(u,w)/path-sum)``.
    The result is admissible by construction, hence pointwise below any
    other admissible coefficient table.  Returns ``None`` when a zero-path
    chain has a positive left side (no finite coefficient exists).
    """
    if validate:
        _require_structure(space, "plain", rel_tol, "min_theta")
    d = space.as_array()
    n = space.n
    t = np.ones((n, n))
    for u, w in _admissible_pairs(n, True):
        lhs = float(d[u, w])
        pool = _pair_pool(n, u, w, True)
        for chains in _chain_blocks(pool, v, True):
            paths = _path_sums(d, u, w, chains)
            zero = paths <= rel_tol * max(1.0, lhs)
            if zero.any() and lhs > cmp_tol(lhs, 0.0, rel_tol):
                return None
            live = ~zero
            if live.any():
                t[u, w] = max(t[u, w], lhs / float(paths[live].min()))
    return ThetaTable(t)


def min_order(
    space: DistanceTable,
    s: float,
    v_max: int = DEFAULT_V_MAX,
    family: str = "plain",
    distinct_chain: Optional[bool] = None,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
) -> MinOrderResult:
    """First order ``v <= v_max`` at which the family passes with coefficient s.

    A pass whose polygon axiom was vacuous (too few points for a distinct
    chain) is reported as ``"vacuous"`` and still counts as the found order,
    with the ``vacuous`` flag set.
    """
    if v_max < 1:
        raise ValueError("v_max must be >= 1")
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    kind = "partial_bvs" if family == "partial" else "bvs"
    verdicts: list[str] = []
    found: Optional[int] = None
    vacuous = False
    for v in range(1, v_max + 1):
        report = verify_axioms(
            space,
            AxiomProfile.for_kind(kind, v=v, s=s, distinct_chain=distinct_chain),
            rel_tol=rel_tol,
        )
        verdict = "vacuous" if (report.passed and report.vacuous) else report.verdict
        verdicts.append(verdict)
        if found is None and report.passed:
            found = v
            vacuous = report.vacuous
    return MinOrderResult(found_v=found, vacuous=vacuous, verdicts=tuple(verdicts))


def _sweep_cells(v_max: int, s_grid: Sequence[float], with_theta: bool):
    """Deterministic (kind, v, s) sweep over the family lattice."""
    cells: list[tuple[str, int, Optional[float]]] = []
    for kind in (
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
    ):
        spec = KIND_SPECS[kind]
        vs = [spec.forced_v] if spec.forced_v is not None else list(range(1, v_max + 1))
        ss = [spec.forced_s] if spec.forced_s is not None else list(s_grid)
        for v in vs:
            for s in ss:
                cells.append((kind, v, float(s)))
    if with_theta:
        cells.append(("extended_b", 1, None))
        for v in range(1, v_max + 1):
            cells.append(("bv_theta", v, None))
    return cells


def hierarchy_profile(
    space: DistanceTable,
    v_max: int = DEFAULT_V_MAX,
    s_grid: Sequence[float] = (1.0,),
    theta: Optional[ThetaTable] = None,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
) -> HierarchyProfile:
    """Membership verdicts across the whole family lattice.

    Sweeps every constant-coefficient family over ``v = 1..v_max`` and the
    given coefficient grid (families with forced parameters appear once),
    plus the pairwise-coefficient families when a theta table is supplied.
    Also reports, per family, the minimal coefficient for each order and the
    minimal order for each grid coefficient.
    """
    memberships: list[tuple[AxiomProfile, str]] = []
    for kind, v, s in _sweep_cells(v_max, s_grid, theta is not None):
        profile = AxiomProfile.for_kind(kind, v=v, s=s, theta=theta if s is None else None)
        report = verify_axioms(space, profile, rel_tol=rel_tol)
        verdict = "vacuous" if (report.passed and report.vacuous) else report.verdict
        memberships.append((profile, verdict))

    minimal_s: dict[str, dict[int, Optional[float]]] = {}
    minimal_v: dict[str, dict[float, Optional[int]]] = {}
    for family in FAMILIES:
        per_v: dict[int, Optional[float]] = {}
        structural = _structural_ok(space, family, rel_tol)
        for v in range(1, v_max + 1):
            per_v[v] = min_coefficient(space, v, family, rel_tol=rel_tol, validate=False) if structural else None
        minimal_s[family] = per_v
        per_s: dict[float, Optional[int]] = {}
        for s in s_grid:
            per_s[float(s)] = min_order(space, float(s), v_max, family, rel_tol=rel_tol).found_v
        minimal_v[family] = per_s
    return HierarchyProfile(
        memberships=tuple(memberships),
        minimal_s=minimal_s,
        minimal_v=minimal_v,
    )
