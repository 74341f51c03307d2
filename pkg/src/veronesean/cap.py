"""Veronesean caps: data model, axiom verification, tangent spaces, the
associated incidence space, subcaps and the dimensional analysis.

A cap is a spanning point set X of PG(N, p) together with d-dimensional
"rational spaces" whose X-points are rational normal curves.  Verification
checks, with witnesses:

  curves  - every rational space meets X in a recognized degree-d curve
  V1      - two points of X lie in exactly one rational space
  V2      - pairwise intersections of rational spaces stay inside X
  V3      - tangent lines from an outside point to a curve span a plane
  index   - tangent lines at a point fill a subspace of constant dimension
  space   - points and spaces form a projective space (Veblen-Young)

All checks are exhaustive over their quantifiers; nothing is sampled.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .gfp import PrimeField, all_params
from .projlin import (
    ProjPoint,
    ProjSubspace,
    batch_rank,
    intersect,
    is_invertible,
    rref,
    span,
)
from .rnc import (
    NotAnRNC,
    RationalNormalCurve,
    recognize_rnc,
    standard_parametrization,
    tangent_line,
)


class CapPropertyError(Exception):
    """A structural property that every Veronesean cap satisfies failed."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


def jsonable(obj):
    """Recursively convert witness payloads to JSON-serializable values."""
    if isinstance(obj, ProjPoint):
        return list(obj.coords)
    if isinstance(obj, ProjSubspace):
        return [list(row) for row in obj.basis]
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


@dataclass(frozen=True)
class RationalSpace:
    """A rational space: its ambient subspace and the ids of its X-points."""

    subspace: ProjSubspace
    point_ids: tuple[int, ...]


@dataclass(frozen=True)
class VeroneseanCap:
    """A candidate Veronesean cap of degree d in PG(ambient_dim, p).

    Points are deduplicated and lexicographically sorted; each rational
    space stores sorted point ids and the span of those points, so equal
    caps compare equal structurally.
    """

    p: int
    d: int
    ambient_dim: int
    points: tuple[ProjPoint, ...]
    spaces: tuple[RationalSpace, ...]

    @classmethod
    def assemble(cls, p: int, d: int, points, space_point_ids) -> "VeroneseanCap":
        PrimeField(p)
        pts = list(points)
        if not pts:
            raise ValueError("a cap needs at least one point")
        width = len(pts[0].coords)
        for pt in pts:
            if pt.p != p or len(pt.coords) != width:
                raise ValueError("cap points must share the field and ambient space")
        if len(set(pts)) != len(pts):
            dup = next(pt for pt in pts if pts.count(pt) > 1)
            raise ValueError(f"duplicate cap point {dup}")
        order = sorted(range(len(pts)), key=lambda i: pts[i].coords)
        new_id = {old: new for new, old in enumerate(order)}
        sorted_pts = tuple(pts[i] for i in order)
        spaces = []
        for ids in space_point_ids:
            ids = list(ids)
            if not ids:
                raise ValueError("a rational space needs at least one point id")
            if len(set(ids)) != len(ids):
                raise ValueError(f"repeated point id in rational space {ids}")
            if any(not 0 <= i < len(pts) for i in ids):
                raise ValueError(f"point id out of range in rational space {ids}")
            new_ids = tuple(sorted(new_id[i] for i in ids))
            sub = span(*(sorted_pts[i] for i in new_ids))
            spaces.append(RationalSpace(sub, new_ids))
        spaces.sort(key=lambda sp: sp.point_ids)
        return cls(p, d, width - 1, sorted_pts, tuple(spaces))

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    def point_array(self) -> np.ndarray:
        return np.stack([pt.array() for pt in self.points])

    def lines_through(self) -> dict[int, list[int]]:
        through: dict[int, list[int]] = defaultdict(list)
        for sid, sp in enumerate(self.spaces):
            for pid in sp.point_ids:
                through[pid].append(sid)
        return dict(through)


def transform_cap(cap: VeroneseanCap, matrix) -> VeroneseanCap:
    """The image cap under an invertible ambient matrix."""
    mat = np.asarray(matrix, dtype=np.int64) % cap.p
    if not is_invertible(mat, cap.p):
        raise ValueError("cap transforms must be invertible matrices")
    moved = [ProjPoint.make(cap.p, mat @ pt.array()) for pt in cap.points]
    return VeroneseanCap.assemble(
        cap.p, cap.d, moved, [sp.point_ids for sp in cap.spaces]
    )


@dataclass(frozen=True)
class Verdict:
    passed: bool
    witness: dict | None = None

    @staticmethod
    def ok() -> "Verdict":
        return Verdict(True, None)

    @staticmethod
    def fail(**witness) -> "Verdict":
        return Verdict(False, witness)


# ---------------------------------------------------------------------------
# stage 1: curve recognition


def recognize_curves(
    cap: VeroneseanCap,
) -> tuple[Verdict, tuple[RationalNormalCurve, ...] | None]:
    """Recognize every rational space's X-points as a degree-d curve.

    Also verifies that the stored point ids are exactly the X-points lying
    in the space's subspace.
    """
    p = cap.p
    x_arr = cap.point_array()
    curves: list[RationalNormalCurve] = []
    for sid, sp in enumerate(cap.spaces):
        if sp.subspace.dim != cap.d:
            return (
                Verdict.fail(kind="wrong_dimension", space=sid, dim=sp.subspace.dim),
                None,
            )
        basis = sp.subspace.basis_array()
        pivots = sp.subspace.pivots()
        residues = (x_arr - (x_arr[:, pivots] @ basis)) % p
        member_ids = {int(i) for i in np.nonzero(~residues.any(axis=1))[0]}
        if member_ids != set(sp.point_ids):
            return (
                Verdict.fail(
                    kind="curve_points_mismatch",
                    space=sid,
                    stored=list(sp.point_ids),
                    in_subspace=sorted(member_ids),
                ),
                None,
            )
        pts = [cap.points[i] for i in sp.point_ids]
        result = recognize_rnc(pts, sp.subspace, cap.d)
        if isinstance(result, NotAnRNC):
            return (
                Verdict.fail(
                    kind="not_a_curve",
                    space=sid,
                    reason=result.reason,
                    detail=jsonable(result.witness),
                ),
                None,
            )
        curves.append(result)
    return Verdict.ok(), tuple(curves)


# ---------------------------------------------------------------------------
# stage 2: axiom V1


PairTable = dict[tuple[int, int], int]


def check_v1(cap: VeroneseanCap) -> tuple[Verdict, PairTable | None]:
    """Every two points of X lie in exactly one rational space.

    On success the [x, y] lookup table is returned for downstream stages.
    """
    table: PairTable = {}
    for sid, sp in enumerate(cap.spaces):
        for i, j in itertools.combinations(sp.point_ids, 2):
            key = (i, j)
            if key in table:
                return (
                    Verdict.fail(kind="multiple_spaces", pair=[i, j], spaces=[table[key], sid]),
                    None,
                )
            table[key] = sid
    n = len(cap.points)
    if len(table) != n * (n - 1) // 2:
        for i, j in itertools.combinations(range(n), 2):
            if (i, j) not in table:
                return Verdict.fail(kind="no_space", pair=[i, j]), None
    return Verdict.ok(), table


# ---------------------------------------------------------------------------
# stage 3: axiom V2


def check_v2(cap: VeroneseanCap) -> Verdict:
    """Pairwise intersections of rational spaces lie inside X.

    A point of some intersection is exactly a point enumerated by two
    distinct subspaces, so one pass over all subspace points suffices and
    every violating point is found.
    """
    x_set = set(cap.points)
    first_owner: dict[ProjPoint, int] = {}
    for sid, sp in enumerate(cap.spaces):
        for pt in sp.subspace.points():
            if pt in x_set:
                continue
            owner = first_owner.setdefault(pt, sid)
            if owner != sid:
                return Verdict.fail(
                    kind="intersection_outside_x",
                    spaces=[owner, sid],
                    point=jsonable(pt),
                )
    return Verdict.ok()


# ---------------------------------------------------------------------------
# tangent machinery shared by V3 and the index


def tangent_table(
    cap: VeroneseanCap, curves: tuple[RationalNormalCurve, ...]
) -> dict[tuple[int, int], ProjSubspace]:
    """Tangent line of each (space, curve point) incidence."""
    table: dict[tuple[int, int], ProjSubspace] = {}
    for sid, sp in enumerate(cap.spaces):
        for pid in sp.point_ids:
            table[(sid, pid)] = tangent_line(curves[sid], cap.points[pid])
    return table


def _tangent_directions(
    cap: VeroneseanCap,
    x_id: int,
    sids: list[int],
    tangents: Mapping[tuple[int, int], ProjSubspace],
) -> np.ndarray:
    """One representative per tangent line at x, reduced modulo x itself.

    The rows span the tangent lines' directions in the quotient by x, so
    rank questions about spans of tangent lines through x reduce to rank
    questions about these rows plus one.
    """
    p = cap.p
    x = cap.points[x_id]
    xv = x.array()
    jx = next(i for i, v in enumerate(x.coords) if v)
    rows = np.zeros((len(sids), cap.ambient_dim + 1), dtype=np.int64)
    for k, sid in enumerate(sids):
        for brow in tangents[(sid, x_id)].basis_array():
            reduced = (brow - brow[jx] * xv) % p
            if reduced.any():
                rows[k] = reduced
                break
        else:
            raise CapPropertyError(
                "tangent line degenerated to its base point",
                {"space": sid, "point": x_id},
            )
    return rows


def check_v3(
    cap: VeroneseanCap,
    curves: tuple[RationalNormalCurve, ...],
    pair_table: PairTable,
    tangents: Mapping[tuple[int, int], ProjSubspace] | None = None,
) -> Verdict:
    """For x outside a rational space, the tangent lines from x to the
    space's curve points span a plane."""
    if tangents is None:
        tangents = tangent_table(cap, curves)
    p = cap.p
    through = cap.lines_through()
    for x_id in range(len(cap.points)):
        sids = through.get(x_id, [])
        if not sids:
            continue
        rows = _tangent_directions(cap, x_id, sids, tangents)
        row_of = {sid: k for k, sid in enumerate(sids)}
        reduced, rank = rref(rows, p)
        pivots = [next(i for i, v in enumerate(r) if v) for r in reduced[:rank]]
        local = rows[:, pivots]
        incident = set(sids)
        targets = [
            (sid, sp)
            for sid, sp in enumerate(cap.spaces)
            if sid not in incident
        ]
        if not targets:
            continue
        mats = np.stack(
            [
                local[
                    [
                        row_of[pair_table[(min(x_id, y), max(x_id, y))]]
                        for y in sp.point_ids
                    ]
                ]
                for _, sp in targets
            ]
        )
        ranks = batch_rank(mats, p)
        bad = np.nonzero(ranks != 2)[0]
        if bad.size:
            sid = targets[int(bad[0])][0]
            return Verdict.fail(
                kind="tangent_union_not_plane",
                point=x_id,
                space=sid,
                dimension=int(ranks[bad[0]]),
            )
    return Verdict.ok()


def tangent_space(
    cap: VeroneseanCap,
    curves: tuple[RationalNormalCurve, ...],
    x_id: int,
    tangents: Mapping[tuple[int, int], ProjSubspace] | None = None,
) -> ProjSubspace:
    """Span of the tangent lines at x over all rational spaces through x.

    The union of those tangent lines must itself be this subspace; a gap
    raises CapPropertyError with the uncovered point.
    """
    if tangents is None:
        tangents = tangent_table(cap, curves)
    through = cap.lines_through()
    sids = through.get(x_id, [])
    x = cap.points[x_id]
    if not sids:
        return span(x)
    rows = _tangent_directions(cap, x_id, sids, tangents)
    sub = ProjSubspace.from_rows(cap.p, cap.ambient_dim, np.vstack([x.array(), rows]))
    union = set()
    for sid in sids:
        union.update(tangents[(sid, x_id)].points())
    for pt in sub.points():
        if pt not in union:
            raise CapPropertyError(
                "tangent union is smaller than its span",
                {"point": x_id, "uncovered": jsonable(pt)},
            )
    return sub


def cap_index(
    cap: VeroneseanCap,
    curves: tuple[RationalNormalCurve, ...],
    tangents: Mapping[tuple[int, int], ProjSubspace] | None = None,
) -> tuple[Verdict, int | None]:
    """The constant dimension of the tangent spaces, with constancy verified."""
    if tangents is None:
        tangents = tangent_table(cap, curves)
    value: int | None = None
    for x_id in range(len(cap.points)):
        try:
            sub = tangent_space(cap, curves, x_id, tangents)
        except CapPropertyError as exc:
            return Verdict.fail(kind="union_not_subspace", **jsonable(exc.witness)), None
        if value is None:
            value = sub.dim
        elif sub.dim != value:
            return (
                Verdict.fail(kind="nonconstant_index", point=x_id, got=sub.dim, expected=value),
                None,
            )
    return Verdict.ok(), value


# ---------------------------------------------------------------------------
# the associated projective space


@dataclass(frozen=True)
class AbstractSpace:
    """The incidence geometry with the cap's points and rational spaces as
    points and lines, verified to satisfy Veblen-Young."""

    n_points: int
    order: int
    lines: tuple[frozenset[int], ...]
    dimension: int
    pair_line: dict = field(repr=False)
    lines_through: dict = field(repr=False)

    def line_points(self, lid: int) -> frozenset[int]:
        return self.lines[lid]

    def line_of(self, i: int, j: int) -> int:
        return self.pair_line[(min(i, j), max(i, j))]

    def closure(self, ids) -> frozenset[int]:
        """Smallest subset containing ``ids`` and closed under joining lines."""
        current = set(ids)
        fresh = list(current)
        while fresh:
            batch, fresh = fresh, []
            snapshot = list(current)
            for x in batch:
                for y in snapshot:
                    if x == y:
                        continue
                    for z in self.lines[self.line_of(x, y)]:
                        if z not in current:
                            current.add(z)
                            fresh.append(z)
        return frozenset(current)

    def subspace_dim(self, ids) -> int:
        """Dimension of a closed subset, via a greedily built maximal flag."""
        ids = frozenset(ids)
        if not ids:
            return -1
        seed = min(ids)
        current = frozenset([seed])
        dim = 0
        while current != ids:
            nxt = min(ids - current)
            current = self.closure(list(current) + [nxt])
            if not current <= ids:
                raise ValueError("subset is not closed under joins")
            dim += 1
        return dim


def associated_space(
    cap: VeroneseanCap, pair_table: PairTable
) -> tuple[Verdict, AbstractSpace | None]:
    """Build the point/line geometry of the cap and verify it is a
    projective space.

    Line sizes must all be p + 1; the Veblen-Young axiom is verified by
    checking, for every pair of intersecting lines, that their join
    closure is a projective plane of order p.  Any two transversals of
    such a pair lie inside the closure, where all lines pairwise meet, so
    this covers every Veblen-Young configuration; a counterexample search
    produces the witness quadruple on failure.
    """
    p = cap.p
    lines = tuple(frozenset(sp.point_ids) for sp in cap.spaces)
    for lid, pts in enumerate(lines):
        if len(pts) != p + 1:
            return Verdict.fail(kind="line_size", line=lid, size=len(pts)), None
    through: dict[int, list[int]] = defaultdict(list)
    for lid, pts in enumerate(lines):
        for pid in pts:
            through[pid].append(lid)
    space = AbstractSpace(
        n_points=len(cap.points),
        order=p,
        lines=lines,
        dimension=-1,
        pair_line=dict(pair_table),
        lines_through=dict(through),
    )
    verdict = _verify_veblen_young(space)
    if not verdict.passed:
        return verdict, None
    dim = _flag_dimension(space)
    space = AbstractSpace(
        n_points=space.n_points,
        order=p,
        lines=lines,
        dimension=dim,
        pair_line=space.pair_line,
        lines_through=space.lines_through,
    )
    return Verdict.ok(), space


def _flag_dimension(space: AbstractSpace) -> int:
    if space.n_points == 0:
        return -1
    current = space.closure([0]) if space.n_points else frozenset()
    everything = frozenset(range(space.n_points))
    dim = 0
    while current != everything:
        nxt = min(everything - current)
        current = space.closure(list(current) + [nxt])
        dim += 1
    return dim


def _verify_veblen_young(space: AbstractSpace) -> Verdict:
    q = space.order
    plane_size = q * q + q + 1
    settled: set[tuple[int, int]] = set()
    for pid in range(space.n_points):
        incident = space.lines_through.get(pid, [])
        for l1, l2 in itertools.combinations(sorted(incident), 2):
            if (l1, l2) in settled:
                continue
            try:
                closure = space.closure(space.lines[l1] | space.lines[l2])
                ok = len(closure) == plane_size
                if ok:
                    inside_lines = set()
                    for x, y in itertools.combinations(sorted(closure), 2):
                        lid = space.line_of(x, y)
                        if not space.lines[lid] <= closure:
                            ok = False
                            break
                        inside_lines.add(lid)
            except KeyError as exc:
                return Verdict.fail(kind="missing_join", pair=list(exc.args[0]))
            if not ok:
                quad = _veblen_young_counterexample(space, l1, l2, pid)
                return Verdict.fail(
                    kind="veblen_young",
                    lines=[l1, l2],
                    closure_size=len(closure),
                    quadrilateral=quad,
                )
            for la, lb in itertools.combinations(sorted(inside_lines), 2):
                if space.lines[la] & space.lines[lb]:
                    settled.add((la, lb))
    return Verdict.ok()


def _veblen_young_counterexample(space, l1, l2, pid):
    """Search the failing pencil pair for an explicit violating quadruple."""
    others1 = sorted(space.lines[l1] - {pid})
    others2 = sorted(space.lines[l2] - {pid})
    for a, b in itertools.permutations(others1, 2):
        for c, d in itertools.permutations(others2, 2):
            lac = space.lines[space.line_of(a, c)]
            lbd = space.lines[space.line_of(b, d)]
            if not lac & lbd:
                return [a, b, c, d]
    return None


# ---------------------------------------------------------------------------
# subcaps


def subcap(cap: VeroneseanCap, point_ids, pair_table: PairTable) -> VeroneseanCap:
    """The cap induced on a subspace of the associated space.

    ``point_ids`` must be closed under joining lines (checked).  The
    induced points are rewritten in the canonical chart of their span, so
    the result is a standalone cap in its own ambient space.
    """
    selected = sorted(set(point_ids))
    sel_set = set(selected)
    if not selected:
        raise ValueError("a subcap needs at least one point")
    for i, j in itertools.combinations(selected, 2):
        sid = pair_table.get((i, j))
        if sid is None or not set(cap.spaces[sid].point_ids) <= sel_set:
            raise ValueError(f"point set is not closed under the line through {i} and {j}")
    ambient = span(*(cap.points[i] for i in selected))
    new_index = {pid: k for k, pid in enumerate(selected)}
    local_pts = [
        ProjPoint.make(cap.p, ambient.local_coords(cap.points[i])) for i in selected
    ]
    kept = [
        tuple(new_index[i] for i in sp.point_ids)
        for sp in cap.spaces
        if set(sp.point_ids) <= sel_set
    ]
    return VeroneseanCap.assemble(cap.p, cap.d, local_pts, kept)


# ---------------------------------------------------------------------------
# dimensional analysis: general-position hyperplane families


def dual_rnc_hyperplanes(
    coords: Mapping[int, ProjPoint], count: int
) -> list[frozenset[int]]:
    """General-position hyperplanes of the associated space, as point-id
    sets, obtained by dualizing points of a rational normal curve in the
    coordinatized space."""
    some = next(iter(coords.values()))
    p, n = some.p, some.ambient_dim
    if count > p + 1:
        raise ValueError(f"only p + 1 = {p + 1} dual hyperplanes available, wanted {count}")
    params = all_params(PrimeField(p))[:count]
    hyperplanes = []
    for t in params:
        h = standard_parametrization(n, p, t)
        members = frozenset(
            pid for pid, pt in coords.items() if int(h @ pt.array()) % p == 0
        )
        hyperplanes.append(members)
    return hyperplanes


def _binom_or_zero(k: int, j: int) -> int:
    if j < 0 or k < 0:
        return 0
    return math.comb(k, j)


def codim_profile(
    cap: VeroneseanCap, space: AbstractSpace, hyperplanes: list[frozenset[int]]
) -> list[int]:
    """Codimensions of the prefix spans of a general-position hyperplane
    family, verified against the binomial formula, together with the
    prefix intersection identity.

    The i-th codimension (vector codimension in the ambient space) must be
    binom(n + d - i, d - i), and each hyperplane span must meet the span
    of its predecessors exactly in the span of the pairwise intersections.
    """
    n = space.dimension
    for h_idx, h in enumerate(hyperplanes):
        if space.closure(h) != h or space.subspace_dim(h) != n - 1:
            raise ValueError(f"input {h_idx} is not a hyperplane of the associated space")
    for j in range(2, min(len(hyperplanes), n + 2) + 1):
        for combo in itertools.combinations(range(len(hyperplanes)), j):
            inter = frozenset.intersection(*(hyperplanes[k] for k in combo))
            expected = max(n - j, -1)
            got = space.subspace_dim(inter)
            if got != expected:
                raise ValueError(
                    f"hyperplanes {list(combo)} are not in general position: "
                    f"intersection dimension {got}, expected {expected}"
                )
    d = cap.d
    spans = [
        span(*(cap.points[i] for i in sorted(h))) if h else
        ProjSubspace.empty(cap.p, cap.ambient_dim)
        for h in hyperplanes
    ]
    codims = []
    prefix = ProjSubspace.empty(cap.p, cap.ambient_dim)
    prefixes = [prefix]
    for i, pi_span in enumerate(spans, start=1):
        prefix = span(prefix, pi_span)
        prefixes.append(prefix)
        codim = cap.ambient_dim + 1 - prefix.rank
        expected = _binom_or_zero(n + d - i, d - i)
        if codim != expected:
            raise CapPropertyError(
                f"span of the first {i} hyperplanes has codimension {codim}, "
                f"expected {expected}",
                {"i": i, "codim": codim, "expected": expected},
            )
        codims.append(codim)
    for i in range(2, len(spans) + 1):
        lhs = intersect(spans[i - 1], prefixes[i - 1])
        pieces = [intersect(spans[i - 1], spans[k]) for k in range(i - 1)]
        rhs = span(*pieces) if pieces else ProjSubspace.empty(cap.p, cap.ambient_dim)
        if lhs != rhs:
            raise CapPropertyError(
                "prefix intersection identity failed",
                {"i": i, "lhs": jsonable(lhs), "rhs": jsonable(rhs)},
            )
    return codims


def secant_lines(
    space: AbstractSpace, hyperplanes: list[frozenset[int]], x_bar: int
) -> list[int]:
    """Lines through a point avoiding all hyperplanes whose points each lie
    in at most two of the hyperplanes; at least two such lines exist."""
    for h_idx, h in enumerate(hyperplanes):
        if x_bar in h:
            raise ValueError(f"point {x_bar} lies in hyperplane {h_idx}")
    count: dict[int, int] = defaultdict(int)
    for h in hyperplanes:
        for pid in h:
            count[pid] += 1
    result = [
        lid
        for lid in sorted(space.lines_through.get(x_bar, []))
        if all(count[pid] <= 2 for pid in space.lines[lid])
    ]
    if len(result) < 2:
        raise CapPropertyError(
            "fewer than two secant lines found",
            {"point": x_bar, "lines": result},
        )
    return result


# ---------------------------------------------------------------------------
# field-size bounds


@dataclass(frozen=True)
class BoundsReport:
    """Evaluation of the field-size bounds for parameters (n, d, p)."""

    n: int
    d: int
    p: int
    main_holds: bool
    refined_holds: bool
    refined_vacuous: bool
    inequality_holds: bool
    inequality_lhs: int
    inequality_rhs: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "p": self.p,
            "main_p_ge_d_to_3_2": self.main_holds,
            "refined_p_ge_d_plus_2": self.refined_holds,
            "refined_vacuous": self.refined_vacuous,
            "line_count_inequality": self.inequality_holds,
            "inequality_lhs": self.inequality_lhs,
            "inequality_rhs": self.inequality_rhs,
        }


def bounds_check(n: int, d: int, p: int) -> BoundsReport:
    """Exact integer evaluation of the three field-size conditions.

    The main bound p >= d^(3/2) is tested as p^2 >= d^3; the refined bound
    p >= d + 2 applies only for d != 2; the line-count inequality compares
    the number of lines through a point with an alternating sum over
    hyperplane subfamilies.
    """
    main = p * p >= d * d * d
    vacuous = d == 2
    refined = True if vacuous else p >= d + 2
    lhs = (p**n - 1) // (p - 1)
    rhs = 2
    for i in range(2, min(n - 1, d) + 1):
        rhs += (-1) ** i * math.comb(d + 1, i + 1) * ((p ** (n - i) - 1) // (p - 1))
    return BoundsReport(n, d, p, main, refined, vacuous, lhs >= rhs, lhs, rhs)


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class VerificationReport:
    """Ordered per-stage verdicts; JSON-stable via fixed key order."""

    meta: dict
    stages: dict

    @property
    def passed(self) -> bool:
        return all(entry.get("status") != "fail" for entry in self.stages.values())

    def to_json_dict(self) -> dict:
        return {"schema_version": "1", **self.meta, "stages": jsonable(self.stages)}


@dataclass
class VerifiedCap:
    """A cap plus every artifact produced by a full verification run."""

    cap: VeroneseanCap
    report: VerificationReport
    curves: tuple[RationalNormalCurve, ...] | None = None
    pair_table: PairTable | None = None
    tangents: dict | None = None
    space: AbstractSpace | None = None
    index: int | None = None

    @property
    def passed(self) -> bool:
        return self.report.passed

    def tangent(self, sid: int, pid: int) -> ProjSubspace:
        return self.tangents[(sid, pid)]

    def curve_of(self, sid: int) -> RationalNormalCurve:
        return self.curves[sid]


def verify_cap(cap: VeroneseanCap) -> VerifiedCap:
    """Run the full verification pipeline in its fixed order.

    Later stages consume earlier artifacts, so the pipeline stops at the
    first failing stage; unreached stages are reported as skipped.
    """
    order = ["curves", "v1", "v2", "v3", "index", "dimension", "space", "bounds"]
    stages = {name: {"status": "skipped"} for name in order}
    meta = {
        "p": cap.p,
        "d": cap.d,
        "ambient_dim": cap.ambient_dim,
        "n_points": len(cap.points),
        "n_spaces": len(cap.spaces),
    }
    result = VerifiedCap(cap, VerificationReport(meta, stages))

    def record(name: str, verdict: Verdict, **extra) -> bool:
        entry = {"status": "pass" if verdict.passed else "fail"}
        if verdict.witness is not None:
            entry["witness"] = jsonable(verdict.witness)
        entry.update(extra)
        stages[name] = entry
        return verdict.passed

    verdict, curves = recognize_curves(cap)
    if not record("curves", verdict):
        return result
    result.curves = curves

    verdict, pair_table = check_v1(cap)
    if not record("v1", verdict):
        return result
    result.pair_table = pair_table

    if not record("v2", check_v2(cap)):
        return result

    tangents = tangent_table(cap, curves)
    result.tangents = tangents
    if not record("v3", check_v3(cap, curves, pair_table, tangents)):
        return result

    verdict, index = cap_index(cap, curves, tangents)
    if not record("index", verdict, value=index):
        return result
    result.index = index

    expected_dim = math.comb(index + cap.d, cap.d) - 1
    points_span = span(*cap.points).dim
    dim_verdict = Verdict.ok()
    if points_span != cap.ambient_dim or cap.ambient_dim != expected_dim:
        dim_verdict = Verdict.fail(
            kind="ambient_dimension",
            ambient=cap.ambient_dim,
            points_span=points_span,
            expected=expected_dim,
        )
    if not record(
        "dimension",
        dim_verdict,
        ambient=cap.ambient_dim,
        expected=expected_dim,
        points_span=points_span,
    ):
        return result

    verdict, space = associated_space(cap, pair_table)
    space_extra = {}
    if space is not None:
        space_extra = {"dimension": space.dimension, "n_lines": len(space.lines)}
        if verdict.passed and space.dimension != index:
            verdict = Verdict.fail(
                kind="space_dimension_mismatch", space_dim=space.dimension, index=index
            )
    if not record("space", verdict, **space_extra):
        return result
    result.space = space

    bounds = bounds_check(index, cap.d, cap.p)
    record("bounds", Verdict.ok(), **bounds.to_dict())
    return result
