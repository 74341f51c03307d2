"""Exact linear algebra over GF(p) and the projective-subspace calculus.

Matrices are int64 numpy arrays with entries reduced mod p.  Points and
subspaces are canonicalized at construction: a point's first nonzero
coordinate is 1, a subspace's basis is the unique reduced row-echelon
form of its row space.  Structural equality of these objects is therefore
semantic equality, and both are hashable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gfp import INFINITY, PrimeField, ProjParam, crossratio_params


def as_matrix(rows, p: int) -> np.ndarray:
    a = np.asarray(rows, dtype=np.int64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a % p


@lru_cache(maxsize=None)
def _inverse_table(p: int) -> np.ndarray:
    return np.array([0] + [pow(i, -1, p) for i in range(1, p)], dtype=np.int64)


def rref(mat, p: int) -> tuple[np.ndarray, int]:
    """Unique reduced row-echelon form of ``mat`` over GF(p), with its rank."""
    a = as_matrix(mat, p).copy()
    rows, cols = a.shape
    inv = _inverse_table(p)
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        pivot = r + nz[0]
        if pivot != r:
            a[[r, pivot]] = a[[pivot, r]]
        a[r, c:] = (a[r, c:] * inv[a[r, c]]) % p
        others = np.nonzero(a[:, c])[0]
        for o in others:
            if o != r:
                a[o, c:] = (a[o, c:] - a[o, c] * a[r, c:]) % p
        r += 1
    return a, r


def batch_rank(mats: np.ndarray, p: int) -> np.ndarray:
    """Ranks over GF(p) of a stack of matrices, vectorized over axis 0."""
    a = (np.asarray(mats, dtype=np.int64) % p).copy()
    if a.ndim != 3:
        raise ValueError(f"expected a stack of matrices, got shape {a.shape}")
    nmats, rows, cols = a.shape
    inv = _inverse_table(p)
    piv = np.zeros(nmats, dtype=np.int64)
    row_idx = np.arange(rows)
    batch_idx = np.arange(nmats)
    for c in range(cols):
        cand = (row_idx[None, :] >= piv[:, None]) & (a[:, :, c] != 0)
        has = cand.any(axis=1)
        if not has.any():
            continue
        sel = batch_idx[has]
        prow = np.argmax(cand[has], axis=1)
        pv = piv[has]
        tmp = a[sel, prow, :].copy()
        a[sel, prow, :] = a[sel, pv, :]
        a[sel, pv, :] = tmp
        a[sel, pv, :] = (a[sel, pv, :] * inv[a[sel, pv, c]][:, None]) % p
        pivrow = np.zeros((nmats, cols - c), dtype=np.int64)
        pivrow[sel] = a[sel, pv, c:]
        fac = a[:, :, c].copy()
        fac[~((row_idx[None, :] > piv[:, None]) & has[:, None])] = 0
        a[:, :, c:] = (a[:, :, c:] - fac[:, :, None] * pivrow[:, None, :]) % p
        piv[has] += 1
    return piv


def pivot_columns(reduced: np.ndarray) -> list[int]:
    """Pivot column indices of a matrix already in reduced row-echelon form."""
    cols = []
    for row in reduced:
        nz = np.nonzero(row)[0]
        if nz.size:
            cols.append(int(nz[0]))
    return cols


def nullspace(mat, p: int) -> np.ndarray:
    """Basis of the right kernel of ``mat`` over GF(p), one row per basis vector."""
    a = as_matrix(mat, p)
    ncols = a.shape[1]
    red, rank = rref(a, p)
    pivots = pivot_columns(red[:rank])
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, c in enumerate(pivots):
            basis[k, c] = (-red[i, f]) % p
    return basis


def solve_unique(a, b, p: int) -> np.ndarray | None:
    """The unique solution x of a @ x = b over GF(p), or None.

    Returns None when the system is inconsistent or underdetermined.
    """
    a = as_matrix(a, p)
    b = np.asarray(b, dtype=np.int64) % p
    aug = np.hstack([a, b.reshape(-1, 1)])
    red, rank = rref(aug, p)
    pivots = pivot_columns(red[:rank])
    if a.shape[1] in pivots:
        return None
    if rank != a.shape[1]:
        return None
    return red[: a.shape[1], -1].copy()


def mat_inv(a, p: int) -> np.ndarray:
    a = as_matrix(a, p)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix inverse requires a square matrix")
    aug = np.hstack([a, np.eye(n, dtype=np.int64)])
    red, rank = rref(aug, p)
    if rank != n or pivot_columns(red[:n]) != list(range(n)):
        raise ValueError("matrix is singular over GF(p)")
    return red[:, n:].copy()


def is_invertible(a, p: int) -> bool:
    a = as_matrix(a, p)
    return a.shape[0] == a.shape[1] and rref(a, p)[1] == a.shape[0]


def _normalize_vector(vec: np.ndarray, p: int) -> tuple[int, ...]:
    nz = np.nonzero(vec)[0]
    if nz.size == 0:
        raise ValueError("the zero vector does not define a projective point")
    scaled = (vec * pow(int(vec[nz[0]]), -1, p)) % p
    return tuple(int(v) for v in scaled)


@dataclass(frozen=True)
class ProjPoint:
    """A point of projective space over GF(p), stored as a normalized tuple.

    Normalization scales the homogeneous vector so its first nonzero
    coordinate is 1; two tuples are equal iff the points coincide.
    """

    p: int
    coords: tuple[int, ...]

    @classmethod
    def make(cls, p: int, coords) -> "ProjPoint":
        vec = np.asarray(coords, dtype=np.int64) % p
        return cls(p, _normalize_vector(vec, p))

    @property
    def ambient_dim(self) -> int:
        return len(self.coords) - 1

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.int64)

    def __repr__(self) -> str:
        return f"({':'.join(str(c) for c in self.coords)})"


@dataclass(frozen=True)
class ProjSubspace:
    """A projective subspace, canonicalized as the RREF basis of its row space.

    ``basis`` has full row rank r; the projective dimension is r - 1, with
    the empty subspace (r = 0) of dimension -1.
    """

    p: int
    ambient_dim: int
    basis: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, p: int, ambient_dim: int, rows) -> "ProjSubspace":
        rows = list(rows)
        if not rows:
            return cls(p, ambient_dim, ())
        a = as_matrix(rows, p)
        if a.shape[1] != ambient_dim + 1:
            raise ValueError(
                f"rows of length {a.shape[1]} in ambient of dimension {ambient_dim}"
            )
        red, rank = rref(a, p)
        return cls(p, ambient_dim, tuple(tuple(int(v) for v in row) for row in red[:rank]))

    @classmethod
    def empty(cls, p: int, ambient_dim: int) -> "ProjSubspace":
        return cls(p, ambient_dim, ())

    @classmethod
    def full(cls, p: int, ambient_dim: int) -> "ProjSubspace":
        eye = np.eye(ambient_dim + 1, dtype=np.int64)
        return cls(p, ambient_dim, tuple(tuple(int(v) for v in row) for row in eye))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        """Projective dimension; -1 for the empty subspace."""
        return len(self.basis) - 1

    def basis_array(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, self.ambient_dim + 1), dtype=np.int64)
        return np.asarray(self.basis, dtype=np.int64)

    def pivots(self) -> list[int]:
        return [next(i for i, v in enumerate(row) if v) for row in self.basis]

    def reduce(self, vec: np.ndarray) -> np.ndarray:
        """Residue of ``vec`` after elimination by the basis rows."""
        v = np.asarray(vec, dtype=np.int64) % self.p
        for row, c in zip(self.basis_array(), self.pivots()):
            if v[c]:
                v = (v - v[c] * row) % self.p
        return v

    def contains(self, point: ProjPoint) -> bool:
        self._check_compatible(point)
        return not self.reduce(point.array()).any()

    def contains_subspace(self, other: "ProjSubspace") -> bool:
        if other.p != self.p or other.ambient_dim != self.ambient_dim:
            raise ValueError("subspaces live in different ambient spaces")
        return all(not self.reduce(row).any() for row in other.basis_array())

    def local_coords(self, point: ProjPoint) -> tuple[int, ...]:
        """Coordinates of a member point with respect to the canonical basis.

        Because the basis is in RREF the coefficients are read off at the
        pivot columns.  Raises ValueError if the point is not in the
        subspace.
        """
        self._check_compatible(point)
        vec = point.array()
        local = tuple(int(vec[c]) for c in self.pivots())
        if self.reduce(vec).any():
            raise ValueError(f"point {point} lies outside the subspace")
        return local

    def point_from_local(self, local) -> ProjPoint:
        vec = (np.asarray(local, dtype=np.int64) @ self.basis_array()) % self.p
        return ProjPoint.make(self.p, vec)

    def points(self) -> list[ProjPoint]:
        """All points of the subspace, in a deterministic order."""
        if not self.basis:
            return []
        locals_ = normalized_tuples(self.p, self.rank)
        coords = (locals_ @ self.basis_array()) % self.p
        return [ProjPoint(self.p, _normalize_vector(row, self.p)) for row in coords]

    def _check_compatible(self, point: ProjPoint) -> None:
        if point.p != self.p:
            raise ValueError(f"point over GF({point.p}) in subspace over GF({self.p})")
        if point.ambient_dim != self.ambient_dim:
            raise ValueError(
                f"point of ambient dimension {point.ambient_dim} in ambient {self.ambient_dim}"
            )

    def __repr__(self) -> str:
        return f"ProjSubspace(p={self.p}, N={self.ambient_dim}, dim={self.dim})"


@lru_cache(maxsize=None)
def normalized_tuples(p: int, r: int) -> np.ndarray:
    """All vectors of GF(p)^r with first nonzero entry 1, sorted lexicographically.

    These are canonical representatives of the (p^r - 1)/(p - 1) points of
    the projective space on GF(p)^r.
    """
    vecs = []
    for pivot in range(r):
        tail = r - pivot - 1
        for rest in itertools.product(range(p), repeat=tail):
            vecs.append((0,) * pivot + (1,) + rest)
    vecs.sort()
    return np.asarray(vecs, dtype=np.int64)


def _gather_rows(items) -> tuple[int, int, list[np.ndarray]]:
    p = ambient = None
    rows: list[np.ndarray] = []
    for item in items:
        if isinstance(item, ProjPoint):
            ip, idim, irows = item.p, item.ambient_dim, [item.array()]
        elif isinstance(item, ProjSubspace):
            ip, idim, irows = item.p, item.ambient_dim, list(item.basis_array())
        else:
            raise TypeError(f"cannot span {type(item).__name__}")
        if p is None:
            p, ambient = ip, idim
        elif (ip, idim) != (p, ambient):
            raise ValueError("span operands live in different ambient spaces")
        rows.extend(irows)
    if p is None:
        raise ValueError("span of an empty collection needs an explicit ambient")
    return p, ambient, rows


def span(*items) -> ProjSubspace:
    """Smallest subspace containing all the given points and subspaces."""
    p, ambient, rows = _gather_rows(items)
    return ProjSubspace.from_rows(p, ambient, rows)


def intersect(a: ProjSubspace, b: ProjSubspace) -> ProjSubspace:
    """Intersection of two subspaces of a common ambient space."""
    if a.p != b.p or a.ambient_dim != b.ambient_dim:
        raise ValueError("intersecting subspaces of different ambient spaces")
    if a.rank == 0 or b.rank == 0:
        return ProjSubspace.empty(a.p, a.ambient_dim)
    p = a.p
    am, bm = a.basis_array(), b.basis_array()
    stacked_rank = rref(np.vstack([am, bm]), p)[1]
    expected = a.rank + b.rank - stacked_rank
    if expected == 0:
        return ProjSubspace.empty(p, a.ambient_dim)
    # v in both row spaces: v = x A = y B, i.e. (x | y) in ker [A^T | -B^T]
    combined = np.hstack([am.T, (-bm.T) % p])
    kern = nullspace(combined, p)
    vectors = (kern[:, : a.rank] @ am) % p
    result = ProjSubspace.from_rows(p, a.ambient_dim, vectors)
    if result.rank != expected:
        raise AssertionError("intersection violated the modular dimension law")
    return result


def project_from(center: ProjSubspace, screen: ProjSubspace, x: ProjPoint) -> ProjPoint:
    """Projection of x from ``center`` onto the complementary ``screen``.

    The center and screen must be disjoint with dim center + dim screen =
    N - 1; the result is the unique point of the screen on span(center, x).
    """
    if center.p != screen.p or center.ambient_dim != screen.ambient_dim:
        raise ValueError("center and screen live in different ambient spaces")
    n = center.ambient_dim
    if center.dim + screen.dim != n - 1:
        raise ValueError(
            f"center (dim {center.dim}) and screen (dim {screen.dim}) are not "
            f"complementary in ambient dimension {n}"
        )
    p = center.p
    cm, sm = center.basis_array(), screen.basis_array()
    stacked = np.vstack([cm, sm])
    if rref(stacked, p)[1] != n + 1:
        raise ValueError("center and screen intersect; projection undefined")
    if center.contains(x):
        raise ValueError(f"cannot project the center point {x}")
    coeffs = solve_unique(stacked.T, x.array(), p)
    if coeffs is None:
        raise AssertionError("complementary pair failed to decompose a point")
    screen_part = (coeffs[center.rank:] @ sm) % p
    return ProjPoint.make(p, screen_part)


@dataclass(frozen=True)
class FitResult:
    """Outcome of a proportional-fit problem.

    ``matrix`` is a representative solution (None when infeasible) and
    ``freedom`` the dimension of the homogeneous solution space; a frame
    of correspondences yields freedom == 1.
    """

    matrix: np.ndarray | None
    freedom: int

    @property
    def infeasible(self) -> bool:
        return self.matrix is None


def fit_projective_map(
    pairs: list[tuple[ProjPoint, ProjPoint]], dims: tuple[int, int] | None = None
) -> FitResult:
    """Matrix A, up to scalar, with A @ x_i proportional to y_i for all pairs.

    Solves the homogeneous linear system in the entries of A and one scale
    factor per pair.  Infeasible when only the zero solution exists or no
    solution has all scale factors nonzero.
    """
    if len(pairs) < 2:
        raise ValueError("fitting a projective map needs at least 2 pairs")
    p = pairs[0][0].p
    n_src = pairs[0][0].ambient_dim
    n_dst = pairs[0][1].ambient_dim
    if dims is not None and dims != (n_src, n_dst):
        raise ValueError(f"pairs have dimensions {(n_src, n_dst)}, expected {dims}")
    for x, y in pairs:
        if x.p != p or y.p != p or x.ambient_dim != n_src or y.ambient_dim != n_dst:
            raise ValueError("inconsistent fields or dimensions among pairs")
    rows_a, cols_a = n_dst + 1, n_src + 1
    n_entries = rows_a * cols_a
    k = len(pairs)
    system = np.zeros((k * rows_a, n_entries + k), dtype=np.int64)
    for i, (x, y) in enumerate(pairs):
        xv, yv = x.array(), y.array()
        for r in range(rows_a):
            eq = i * rows_a + r
            system[eq, r * cols_a : (r + 1) * cols_a] = xv
            system[eq, n_entries + i] = (-yv[r]) % p
    kern = nullspace(system, p)
    freedom = kern.shape[0]
    if freedom == 0:
        return FitResult(None, 0)
    solution = _solution_with_nonzero_scales(kern, n_entries, k, p)
    if solution is None:
        return FitResult(None, freedom)
    return FitResult(solution[:n_entries].reshape(rows_a, cols_a), freedom)


def _solution_with_nonzero_scales(kern: np.ndarray, n_entries: int, k: int, p: int):
    for vec in kern:
        if np.all(vec[n_entries:] % p != 0):
            return vec % p
    if kern.shape[0] > 1:
        # deterministic small search over two-vector combinations
        for i, j in itertools.combinations(range(kern.shape[0]), 2):
            for c in range(1, p):
                vec = (kern[i] + c * kern[j]) % p
                if np.all(vec[n_entries:] != 0):
                    return vec
    return None


def apply_matrix(matrix, point: ProjPoint) -> ProjPoint:
    m = as_matrix(matrix, point.p)
    return ProjPoint.make(point.p, (m @ point.array()) % point.p)


def line_parameter(line: ProjSubspace, point: ProjPoint) -> ProjParam:
    """Parameter of a point on a projective line, in the line's canonical chart.

    With canonical basis rows u, v the point u + t*v gets parameter t and
    v itself gets infinity.
    """
    if line.dim != 1:
        raise ValueError(f"expected a line, got dimension {line.dim}")
    a, b = line.local_coords(point)
    if a == 0:
        return INFINITY
    return ProjParam((b * pow(a, -1, line.p)) % line.p)


def crossratio_collinear(
    z1: ProjPoint, z2: ProjPoint, z3: ProjPoint, z4: ProjPoint
) -> ProjParam:
    """Cross-ratio of four distinct collinear points.

    The value does not depend on the choice of chart because any two
    charts differ by a fractional-linear reparametrization.
    """
    if len({z1, z2, z3, z4}) != 4:
        raise ValueError("cross-ratio requires four distinct points")
    line = span(z1, z2)
    if line.dim != 1:
        raise AssertionError("two distinct points failed to span a line")
    params = [line_parameter(line, z) for z in (z1, z2, z3, z4)]
    if any(line.reduce(z.array()).any() for z in (z3, z4)):
        raise ValueError("points are not collinear")
    field = PrimeField(z1.p)
    return crossratio_params(field, *params)


@lru_cache(maxsize=None)
def pg_points(p: int, n: int) -> tuple[ProjPoint, ...]:
    """The points of PG(n, p) in canonical (lexicographic) order."""
    return tuple(
        ProjPoint(p, tuple(int(v) for v in row)) for row in normalized_tuples(p, n + 1)
    )


@lru_cache(maxsize=None)
def pg_lines(p: int, n: int) -> tuple[ProjSubspace, ...]:
    """The lines of PG(n, p), deduplicated, in a deterministic order."""
    points = pg_points(p, n)
    seen: dict[tuple, ProjSubspace] = {}
    for a, b in itertools.combinations(points, 2):
        ln = span(a, b)
        seen.setdefault(ln.basis, ln)
    return tuple(seen[key] for key in sorted(seen))


def random_invertible_matrix(p: int, size: int, rng) -> np.ndarray:
    """Uniformly random invertible size x size matrix over GF(p) by rejection."""
    while True:
        m = np.array(
            [[rng.randrange(p) for _ in range(size)] for _ in range(size)],
            dtype=np.int64,
        )
        if is_invertible(m, p):
            return m
