"""Rational normal curves: construction, recognition, tangent lines, cross-ratio.

A degree-d rational normal curve over GF(p) is the image of the standard
parametrization nu(s, t) = (s^d, s^(d-1) t, ..., t^d) under an invertible
change of coordinates inside a d-dimensional ambient subspace.  It has
exactly p + 1 points, one per parameter of the projective line.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .gfp import INFINITY, PrimeField, ProjParam, all_params, crossratio_params
from .projlin import (
    ProjPoint,
    ProjSubspace,
    batch_rank,
    fit_projective_map,
    is_invertible,
    mat_inv,
    rref,
    span,
)


def standard_parametrization(d: int, p: int, t: ProjParam) -> np.ndarray:
    """The moment vector nu(1, t) = (1, t, ..., t^d), or nu(0, 1) at infinity."""
    vec = np.zeros(d + 1, dtype=np.int64)
    if t.is_infinite:
        vec[d] = 1
    else:
        acc = 1
        for k in range(d + 1):
            vec[k] = acc
            acc = (acc * t.value) % p
    return vec


def _partials(d: int, p: int, t: ProjParam) -> tuple[np.ndarray, np.ndarray]:
    """Formal partial derivatives of nu(s, t), coefficients reduced mod p.

    Component k of nu is s^(d-k) t^k, so d/ds has coefficient (d-k) and
    d/dt has coefficient k; both are evaluated at (1, t) or (0, 1).
    """
    ds = np.zeros(d + 1, dtype=np.int64)
    dt = np.zeros(d + 1, dtype=np.int64)
    if t.is_infinite:
        ds[d - 1] = 1
        dt[d] = d % p
    else:
        powers = [1]
        for _ in range(d):
            powers.append((powers[-1] * t.value) % p)
        for k in range(d + 1):
            ds[k] = ((d - k) * powers[k]) % p
            if k >= 1:
                dt[k] = (k * powers[k - 1]) % p
    return ds, dt


@dataclass(frozen=True, eq=False)
class RationalNormalCurve:
    """A recognized degree-d rational normal curve inside an ambient subspace.

    ``transform`` maps standard-curve coordinates to local coordinates of
    ``ambient`` (its canonical basis provides the chart into the full
    space); ``point_table`` lists the p + 1 curve points by parameter.
    """

    d: int
    p: int
    ambient: ProjSubspace
    transform: tuple[tuple[int, ...], ...]
    point_table: tuple[tuple[ProjParam, ProjPoint], ...]
    _param_of: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_param_of", {pt: t for t, pt in self.point_table})
        if len(self._param_of) != self.p + 1:
            raise ValueError("curve point table must have p + 1 distinct points")

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    def points(self) -> tuple[ProjPoint, ...]:
        return tuple(pt for _, pt in self.point_table)

    def point_set(self) -> frozenset[ProjPoint]:
        return frozenset(self._param_of)

    def point_at(self, t: ProjParam) -> ProjPoint:
        vec = self._local_at(t)
        return self.ambient.point_from_local(vec)

    def param_of(self, point: ProjPoint) -> ProjParam:
        try:
            return self._param_of[point]
        except KeyError:
            raise ValueError(f"{point} is not a point of the curve") from None

    def transform_array(self) -> np.ndarray:
        return np.asarray(self.transform, dtype=np.int64)

    def _local_at(self, t: ProjParam) -> np.ndarray:
        nu = standard_parametrization(self.d, self.p, t)
        return (self.transform_array() @ nu) % self.p


def _build_curve(d: int, p: int, ambient: ProjSubspace, transform: np.ndarray) -> RationalNormalCurve:
    trans = tuple(tuple(int(v) for v in row) for row in (transform % p))
    table = []
    for t in all_params(PrimeField(p)):
        nu = standard_parametrization(d, p, t)
        local = (np.asarray(trans, dtype=np.int64) @ nu) % p
        table.append((t, ambient.point_from_local(local)))
    return RationalNormalCurve(d, p, ambient, trans, tuple(table))


def std_rnc(d: int, p: int) -> RationalNormalCurve:
    """The standard degree-d curve in PG(d, p) with the identity transform.

    Requires p + 1 >= d + 3 so that a recognition frame exists on the
    curve; smaller fields leave the curve underdetermined by its points.
    """
    if d < 2:
        raise ValueError(f"curve degree must be at least 2, got {d}")
    field_ = PrimeField(p)
    if field_.p + 1 < d + 3:
        raise ValueError(
            f"GF({p}) is too small for a degree-{d} curve: need p + 1 >= d + 3"
        )
    return _make_standard_curve(d, p)


def _make_standard_curve(d: int, p: int) -> RationalNormalCurve:
    # no field-size validation; used by std_rnc and by characteristic-2 tests
    ambient = ProjSubspace.full(p, d)
    return _build_curve(d, p, ambient, np.eye(d + 1, dtype=np.int64))


def tangent_line(curve: RationalNormalCurve, x: ProjPoint) -> ProjSubspace:
    """The tangent line at a curve point: span of the point and both formal
    partials of the parametrization, mapped into the ambient space.

    In characteristic dividing d this reproduces the nucleus behaviour of
    conics; the span is verified to be one-dimensional.
    """
    t = curve.param_of(x)
    ds, dt = _partials(curve.d, curve.p, t)
    trans = curve.transform_array()
    basis_rows = curve.ambient.basis_array()
    rows = [x.array()]
    for vec in (ds, dt):
        local = (trans @ vec) % curve.p
        rows.append((local @ basis_rows) % curve.p)
    line = ProjSubspace.from_rows(curve.p, curve.ambient.ambient_dim, rows)
    if line.dim != 1:
        raise ArithmeticError(
            f"osculating span at {x} degenerated to dimension {line.dim} "
            f"(d={curve.d}, p={curve.p})"
        )
    return line


def crossratio_points(
    curve: RationalNormalCurve, a: ProjPoint, b: ProjPoint, x: ProjPoint, y: ProjPoint
) -> ProjParam:
    """Cross-ratio of four distinct curve points via their parameters."""
    params = [curve.param_of(z) for z in (a, b, x, y)]
    return crossratio_params(curve.field, *params)


@dataclass(frozen=True)
class NotAnRNC:
    """Recognition failure with a minimal witness.

    ``reason`` is one of 'cardinality', 'dependent_subset', 'no_projective_fit';
    ``witness`` carries the offending data.
    """

    reason: str
    witness: dict


def _dependent_subset_witness(
    local_pts: list[np.ndarray], points: list[ProjPoint], d: int, p: int, limit: int = 5000
):
    n = len(points)
    combos = itertools.combinations(range(n), d + 1)
    if _comb(n, d + 1) > limit:
        # sliding windows keep the scan linear for large fields
        combos = (tuple((s + k) % n for k in range(d + 1)) for s in range(n))
    idx_groups = list(combos)
    mats = np.stack(
        [np.stack([local_pts[i] for i in group]) for group in idx_groups]
    )
    ranks = batch_rank(mats, p)
    for group, rank in zip(idx_groups, ranks):
        if rank != d + 1:
            return tuple(points[i] for i in group)
    return None


def _comb(n: int, k: int) -> int:
    import math

    return math.comb(n, k) if 0 <= k <= n else 0


def recognize_rnc(
    points,
    ambient: ProjSubspace,
    d: int,
    frame: tuple[int, int, int] | None = None,
) -> RationalNormalCurve | NotAnRNC:
    """Decide whether a point set is a degree-d rational normal curve.

    Three points (by default the first three in canonical order; ``frame``
    overrides) are pinned to the parameters infinity, 0, 1.  All
    assignments of d further distinct parameters to the next d points are
    tried; each candidate is fitted by a proportional linear map from the
    standard curve and accepted once the fit carries the whole standard
    point set onto the input set.
    """
    p = ambient.p
    field_ = PrimeField(p)
    if ambient.dim != d:
        raise ValueError(f"recognition ambient must have dimension {d}, got {ambient.dim}")
    pts = sorted(set(points), key=lambda q: q.coords)
    for q in pts:
        if not ambient.contains(q):
            raise ValueError(f"point {q} lies outside the recognition ambient")
    if len(pts) != p + 1:
        return NotAnRNC("cardinality", {"expected": p + 1, "got": len(pts)})

    local_pts = [np.asarray(ambient.local_coords(q), dtype=np.int64) for q in pts]
    dep = _dependent_subset_witness(local_pts, pts, d, p)
    if dep is not None:
        return NotAnRNC("dependent_subset", {"points": dep})

    if frame is None:
        frame = (0, 1, 2)
    if len(set(frame)) != 3:
        raise ValueError("recognition frame must name three distinct points")
    rest = [i for i in range(len(pts)) if i not in frame]
    fit_indices = list(frame) + rest[: d]
    base_params = [INFINITY, ProjParam(0), ProjParam(1)]
    free_params = [t for t in all_params(field_) if t not in base_params]
    target_set = set(pts)
    local_space = ProjSubspace.full(p, d)
    local_proj = [ProjPoint.make(p, local_pts[i]) for i in fit_indices]

    for assignment in itertools.permutations(free_params, d):
        params = base_params + list(assignment)
        pairs = [
            (ProjPoint.make(p, standard_parametrization(d, p, t)), local_proj[k])
            for k, t in enumerate(params)
        ]
        fit = fit_projective_map(pairs)
        if fit.infeasible or fit.freedom != 1:
            continue
        if not is_invertible(fit.matrix, p):
            continue
        candidate = _build_curve(d, p, ambient, fit.matrix)
        if set(candidate.points()) == target_set:
            return candidate
    return NotAnRNC("no_projective_fit", {"points": tuple(pts)})


def project_curve(
    curve: RationalNormalCurve, centers: list[ProjPoint], screen: ProjSubspace
):
    """Project a curve from the span of some of its points onto a screen.

    Returns the list of (parameter, image point) for the surviving curve
    points together with the traces of the tangent lines at the centers;
    by the projection lemma these form a rational normal curve of degree
    d - len(centers).
    """
    from .projlin import intersect, project_from

    center = span(*centers)
    if center.dim != len(centers) - 1:
        raise ValueError("projection centers are not in general position")
    images = []
    for t, pt in curve.point_table:
        if pt in centers:
            continue
        images.append((t, project_from(center, screen, pt)))
    traces = []
    for c in centers:
        tangent = tangent_line(curve, c)
        trace = intersect(span(tangent, center), screen)
        if trace.dim != 0:
            raise ArithmeticError("tangent trace through the center is not a point")
        traces.append((curve.param_of(c), trace.points()[0]))
    return images, traces


def span_dimension_profile(
    curve: RationalNormalCurve, tangent_pts: list[ProjPoint], plain_pts: list[ProjPoint]
) -> int:
    """Projective dimension of span(tangent lines at some points + other points).

    For i tangent points and j plain points with 2i + j <= d + 1 the
    answer is 2i + j - 1.
    """
    chosen = list(tangent_pts) + list(plain_pts)
    if len(set(chosen)) != len(chosen):
        raise ValueError("tangent and plain points must be pairwise distinct")
    items = [tangent_line(curve, x) for x in tangent_pts] + list(plain_pts)
    if not items:
        return -1
    return span(*items).dim
