"""The d-uple Veronese embedding and generation of Veronese varieties as caps.

The embedding sends a point of PG(n, p) to the vector of all its degree-d
monomials; images of lines span d-dimensional subspaces meeting the
variety in rational normal curves, which makes the variety a Veronesean
cap.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cap import VeroneseanCap, bounds_check
from .gfp import PrimeField
from .projlin import ProjPoint, ProjSubspace, pg_lines, pg_points, span


@dataclass(frozen=True)
class MonomialBasis:
    """All exponent vectors of total degree d in n + 1 variables.

    Ordered descending-lexicographically, so the coordinates read
    x_0^d, x_0^(d-1) x_1, ..., x_n^d; the length is binom(n + d, d).
    """

    n: int
    d: int
    exponents: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, n: int, d: int) -> "MonomialBasis":
        if n < 1 or d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        exps = sorted(_compositions(d, n + 1), reverse=True)
        return cls(n, d, tuple(exps))

    @property
    def size(self) -> int:
        """The number M = binom(n + d, d) of monomials."""
        return len(self.exponents)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def veronese_map(basis: MonomialBasis, x: ProjPoint) -> ProjPoint:
    """Image of a point of PG(n, p) under the degree-d Veronese embedding.

    Well-defined on scalar classes because every monomial has the same
    total degree.
    """
    if x.ambient_dim != basis.n:
        raise ValueError(f"point of PG({x.ambient_dim}) fed to an n={basis.n} embedding")
    p = x.p
    coords = []
    for exp in basis.exponents:
        value = 1
        for xi, e in zip(x.coords, exp):
            if e:
                value = (value * pow(xi, e, p)) % p
        coords.append(value)
    return ProjPoint.make(p, coords)


def image_of_line(basis: MonomialBasis, line: ProjSubspace) -> ProjSubspace:
    """Span of the Veronese image of a line of PG(n, p); has dimension d."""
    if line.dim != 1:
        raise ValueError(f"expected a line, got dimension {line.dim}")
    images = [veronese_map(basis, pt) for pt in line.points()]
    sub = span(*images)
    if sub.dim != basis.d:
        raise ArithmeticError(
            f"line image spans dimension {sub.dim}, expected {basis.d}"
        )
    return sub


def build_variety(n: int, d: int, p: int) -> VeroneseanCap:
    """The degree-d Veronese variety of PG(n, p), packaged as a cap.

    Points are the Veronese images of all points of PG(n, p); the rational
    spaces are the spans of the images of all lines, tagged with their
    curve point ids.  Requires p >= d + 2 so the curves are recognizable;
    a warning notes when only the refined field-size regime holds.
    """
    if n < 1 or d < 2:
        raise ValueError(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    PrimeField(p)
    if p < d + 2:
        raise ValueError(
            f"GF({p}) is too small for degree {d}: curves need p + 1 >= d + 3 points"
        )
    regime = bounds_check(n, d, p)
    if not regime.main_holds:
        warnings.warn(
            f"(n={n}, d={d}, p={p}): main field-size bound p^2 >= d^3 fails; "
            "proceeding in the refined-bound regime",
            stacklevel=2,
        )
    basis = MonomialBasis.of(n, d)
    source_pts = pg_points(p, n)
    images = [veronese_map(basis, x) for x in source_pts]
    if len(set(images)) != len(images):
        raise ArithmeticError("Veronese embedding failed to be injective")
    image_id = {pt: i for i, pt in enumerate(images)}
    spaces = []
    for line in pg_lines(p, n):
        ids = tuple(image_id[veronese_map(basis, pt)] for pt in line.points())
        spaces.append(ids)
    cap = VeroneseanCap.assemble(p, d, images, spaces)
    if cap.ambient_dim != basis.size - 1:
        raise ArithmeticError("variety ambient dimension disagrees with binom(n+d, d) - 1")
    for sp in cap.spaces:
        if sp.subspace.dim != d:
            raise ArithmeticError("a line image failed to span dimension d")
    return cap
