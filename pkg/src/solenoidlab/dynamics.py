"""Invertible self-maps of finite spaces and how they distort metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, UnsupportedMapError
from .metric_core import FiniteMetricSpace

Point = Any


@dataclass(frozen=True, eq=False)
class SelfMap:
    """A bijection of a finite point set, stored as forward/backward tables.

    ``kind`` is a free-form tag (``permutation-table``, ``shift-map``,
    ``group-translation``) kept for reports.
    """

    forward: dict
    backward: dict
    kind: str = "permutation-table"

    def __call__(self, p: Point) -> Point:
        try:
            return self.forward[p]
        except KeyError:
            raise InvalidInputError(f"point {p!r} is not in the map's domain") from None

    def inverse(self, p: Point) -> Point:
        try:
            return self.backward[p]
        except KeyError:
            raise InvalidInputError(f"point {p!r} is not in the map's range") from None

    def orbit(self, p: Point) -> tuple:
        """The cycle through ``p``: (p, f(p), f(f(p)), ...) up to first return."""
        out = [p]
        q = self(p)
        while q != p:
            out.append(q)
            q = self(q)
        return tuple(out)

    def order(self) -> int:
        """Least n >= 1 with the n-th iterate equal to the identity."""
        seen: set = set()
        acc = 1
        for p in self.forward:
            if p not in seen:
                cyc = self.orbit(p)
                seen.update(cyc)
                acc = math.lcm(acc, len(cyc))
        return acc


def self_map_from_function(
    points: Iterable[Point], fn: Callable[[Point], Point], kind: str = "permutation-table"
) -> SelfMap:
    """Tabulate ``fn`` over ``points`` and check it permutes them."""
    pts = list(points)
    forward = {p: fn(p) for p in pts}
    if set(forward.values()) != set(pts):
        raise UnsupportedMapError("the map does not permute the given point set")
    backward = {q: p for p, q in forward.items()}
    return SelfMap(forward=forward, backward=backward, kind=kind)


def iterate(mapping: SelfMap, n: int, x: Point) -> Point:
    """n-th iterate (negative n walks the inverse); reduced along the cycle
    through x so large |n| costs one orbit walk."""
    orbit = mapping.orbit(x)
    return orbit[n % len(orbit)]


def _permutation_indices(space: FiniteMetricSpace, mapping: SelfMap) -> np.ndarray:
    if set(mapping.forward.keys()) != set(space.points):
        raise UnsupportedMapError("map domain does not match the space's points")
    return np.array([space.index_of(mapping(p)) for p in space.points])


# ============================================================
# Distortion estimates
# ============================================================

@dataclass(frozen=True)
class BilipschitzEstimate:
    """Smallest constant C with d(x,y)/C <= d(f(x),f(y)) <= C d(x,y) on the
    sample, with the pairs attaining each one-sided bound."""

    constant: float
    c_upper: float
    c_lower: float
    expanding_pair: tuple | None
    contracting_pair: tuple | None


def estimate_bilipschitz_constant(
    space: FiniteMetricSpace, mapping: SelfMap
) -> BilipschitzEstimate:
    n = len(space)
    if n < 2:
        return BilipschitzEstimate(1.0, 1.0, 1.0, None, None)
    idx = _permutation_indices(space, mapping)
    m = space.matrix
    m2 = m[np.ix_(idx, idx)]
    iu, ju = np.triu_indices(n, k=1)
    base = m[iu, ju]
    image = m2[iu, ju]
    if np.any(base == 0) or np.any(image == 0):
        raise InvalidInputError("zero distance between distinct points")
    up = image / base
    down = base / image
    ei = int(np.argmax(up))
    ci = int(np.argmax(down))
    c_upper = float(up[ei])
    c_lower = float(down[ci])
    return BilipschitzEstimate(
        constant=max(c_upper, c_lower),
        c_upper=c_upper,
        c_lower=c_lower,
        expanding_pair=(space.points[iu[ei]], space.points[ju[ei]]),
        contracting_pair=(space.points[iu[ci]], space.points[ju[ci]]),
    )


@dataclass(frozen=True)
class IsometryReport:
    is_isometry: bool
    max_deviation: float
    worst_pair: tuple | None


def verify_isometry(
    space: FiniteMetricSpace, mapping: SelfMap, tol: float = 0.0
) -> IsometryReport:
    """Check |d(f(x),f(y)) - d(x,y)| <= tol over all pairs; the worst pair is
    the first attaining the maximum deviation in index order."""
    n = len(space)
    if n < 2:
        return IsometryReport(True, 0.0, None)
    idx = _permutation_indices(space, mapping)
    dev = np.abs(space.matrix[np.ix_(idx, idx)] - space.matrix)
    iu, ju = np.triu_indices(n, k=1)
    flat = dev[iu, ju]
    worst = int(np.argmax(flat))
    return IsometryReport(
        is_isometry=bool(flat[worst] <= tol),
        max_deviation=float(flat[worst]),
        worst_pair=(space.points[iu[worst]], space.points[ju[worst]]),
    )


def adapted_metric(space: FiniteMetricSpace, mapping: SelfMap) -> FiniteMetricSpace:
    """Largest distance along the joint orbit: sup_n d(f^n(x), f^n(y)).

    The supremum is a maximum over one full period of the permutation, so the
    result dominates d, is again a metric, and makes ``mapping`` an exact
    isometry.
    """
    idx = _permutation_indices(space, mapping)
    out = space.matrix.copy()
    cur = idx
    ident = np.arange(len(space))
    while not np.array_equal(cur, ident):
        out = np.maximum(out, space.matrix[np.ix_(cur, cur)])
        cur = idx[cur]
    label = f"{space.label} (adapted)" if space.label else "adapted"
    return FiniteMetricSpace(points=space.points, matrix=out, label=label)
