"""Multi-index bookkeeping for jet-bundle coordinates.

Coordinates on the order-r jet space of sections of a trivial fibration over
an m-dimensional base are ``(x^i, y^a, z^a_I)`` where ``I`` is a multi-index
of base directions.  Mixed partial derivatives commute, so only one entry per
*non-decreasing* index tuple is stored; contractions that logically run over
all ``m^l`` orderings pick up combinatorial weights instead.

Conventions used throughout the package:

* base indices ``i`` run over ``1..m``, field indices ``a`` over ``1..n``;
* a multi-index is a plain non-decreasing ``tuple`` of base indices;
* a coordinate is a tagged tuple ``("x", i)``, ``("y", a)`` or
  ``("z", a, I)`` so that coordinates are hashable and cheaply comparable.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

MultiIndex = "tuple[int, ...]"
Coordinate = tuple


@dataclass(frozen=True)
class JetConfig:
    """Shape of the problem: m independent, n dependent variables, order k."""

    m: int
    n: int
    k: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need at least one independent variable, got m={self.m}")
        if self.n < 1:
            raise ValueError(f"need at least one dependent variable, got n={self.n}")
        if self.k < 1:
            raise ValueError(f"Lagrangian order must be positive, got k={self.k}")

    @property
    def working_order(self) -> int:
        """Highest jet order carried by forms and boundary coefficients (2k-1)."""
        return 2 * self.k - 1

    @property
    def expression_order(self) -> int:
        """Highest jet order reachable by scalar expressions (2k).

        Lagrange derivatives of an order-k Lagrangian involve jets of order
        2k, one beyond the order-(2k-1) space the forms live on.
        """
        return 2 * self.k


def base_coord(i: int) -> Coordinate:
    return ("x", i)


def field_coord(a: int) -> Coordinate:
    return ("y", a)


def jet_coord(a: int, indices) -> Coordinate:
    return ("z", a, tuple(indices))


def coordinate_order(coord: Coordinate) -> int:
    """Jet order of a coordinate: 0 for x^i and y^a, |I| for z^a_I."""
    return len(coord[2]) if coord[0] == "z" else 0


def coordinate_sort_key(coord: Coordinate):
    """Total order: x by i, then y by a, then z by (|I|, a, I)."""
    tag = coord[0]
    if tag == "x":
        return (0, coord[1])
    if tag == "y":
        return (1, coord[1])
    if tag == "z":
        return (2, len(coord[2]), coord[1], coord[2])
    # coefficient symbols ("c", name) sort after all jet coordinates
    return (3, coord[1])


def check_coordinate(cfg: JetConfig, coord: Coordinate, max_order: int | None = None):
    """Validate a coordinate against a configuration; returns it unchanged."""
    tag = coord[0]
    if tag == "x":
        if not 1 <= coord[1] <= cfg.m:
            raise ValueError(f"base index {coord[1]} out of range 1..{cfg.m}")
    elif tag == "y":
        if not 1 <= coord[1] <= cfg.n:
            raise ValueError(f"field index {coord[1]} out of range 1..{cfg.n}")
    elif tag == "z":
        a, I = coord[1], coord[2]
        if not 1 <= a <= cfg.n:
            raise ValueError(f"field index {a} out of range 1..{cfg.n}")
        if tuple(sorted(I)) != I or not I:
            raise ValueError(f"jet multi-index {I} is not canonical")
        if any(not 1 <= i <= cfg.m for i in I):
            raise ValueError(f"jet multi-index {I} has entries outside 1..{cfg.m}")
        limit = cfg.expression_order if max_order is None else max_order
        if len(I) > limit:
            raise ValueError(f"jet order {len(I)} exceeds maximum {limit}")
    elif tag != "c":
        raise ValueError(f"unknown coordinate {coord!r}")
    return coord


def canonicalize(indices: Sequence[int], m: int) -> tuple:
    """Sort a tuple of base indices into the canonical non-decreasing order."""
    for i in indices:
        if not 1 <= i <= m:
            raise ValueError(f"base index {i} out of range 1..{m}")
    return tuple(sorted(indices))


def multiplicity(indices: Sequence[int]) -> int:
    """Number of distinct orderings of a canonical multi-index.

    This is the weight that converts a sum over canonical multi-indices into
    the corresponding sum over all index tuples of a symmetric table.
    """
    count = math.factorial(len(indices))
    for v in set(indices):
        count //= math.factorial(indices.count(v))
    return count


def splittings(indices: Sequence[int]):
    """Distinct ways of removing one entry: pairs (i1, canonical remainder).

    Splittings enumerate how a canonical multi-index arises as
    ``canonicalize((i1,) + tail)`` with a canonical tail; there is one per
    distinct value occurring in the index.
    """
    out = []
    seen = set()
    tup = tuple(indices)
    for pos, value in enumerate(tup):
        if value in seen:
            continue
        seen.add(value)
        out.append((value, tup[:pos] + tup[pos + 1 :]))
    return out


def splitting_count(indices: Sequence[int]) -> int:
    """Number of distinct (first index, canonical tail) splittings."""
    return len(set(indices))


def multiindices(m: int, length: int):
    """All canonical multi-indices of the given length, lexicographic."""
    return list(itertools.combinations_with_replacement(range(1, m + 1), length))


def enumerate_coordinates(cfg: JetConfig, order: int) -> list:
    """Coordinates of the order-``order`` jet space, in the fixed global order.

    Order: all x^i, all y^a, then z^a_I grouped by |I| ascending and within
    each level by (a, I) lexicographic.
    """
    if not 0 <= order <= cfg.working_order:
        raise ValueError(
            f"order {order} outside supported range 0..{cfg.working_order}"
        )
    coords = [base_coord(i) for i in range(1, cfg.m + 1)]
    coords += [field_coord(a) for a in range(1, cfg.n + 1)]
    for level in range(1, order + 1):
        for a in range(1, cfg.n + 1):
            for I in multiindices(cfg.m, level):
                coords.append(jet_coord(a, I))
    return coords


def coordinate_count(cfg: JetConfig, order: int) -> int:
    """Closed-form count: m + n * sum_{l=0..order} C(m+l-1, l)."""
    return cfg.m + cfg.n * sum(
        math.comb(cfg.m + level - 1, level) for level in range(order + 1)
    )


def symmetrize_table(table: Mapping[tuple, object], length: int | None = None) -> dict:
    """Fully symmetric part of a table indexed by ordered index tuples.

    ``table`` must be defined on all ``m^l`` orderings; the result holds
    ``S(I) = (1/l!) * sum_{permutations p} table[p(I)]`` once per canonical
    multi-index.  Values may be numbers or anything supporting ``+`` and
    multiplication by :class:`~fractions.Fraction`.
    """
    if not table:
        return {}
    keys = list(table)
    if length is None:
        length = len(keys[0])
    if any(len(key) != length for key in keys):
        raise ValueError("all index tuples must have equal length")
    weight = Fraction(1, math.factorial(length))
    out = {}
    for key in keys:
        canonical = tuple(sorted(key))
        if canonical in out:
            continue
        total = None
        for perm in itertools.permutations(canonical):
            value = table[perm]
            total = value if total is None else total + value
        out[canonical] = total * weight
    return out
