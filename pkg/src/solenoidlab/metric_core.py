"""Finite metric spaces: axiom scans, transforms, and covering dimension.

Distances live in a dense symmetric matrix indexed by the point list.  Spaces
whose distances are all integer powers of one base in (0, 1) (shift and
residue-ring models) additionally carry that base together with the integer
exponent of every entry; comparisons that would be noisy in floating point
(ultrametric triples, snowflake identities) are then done on the exponents
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import InvalidInputError

Point = Any

#: Default slack for floating-point comparisons in verification scans.
DEFAULT_TOLERANCE = 1.0e-9


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite point set with a total, precomputed distance matrix.

    ``matrix[i, j]`` is the distance between ``points[i]`` and ``points[j]``.
    When ``power_base`` is set, ``exponents`` holds one exponent per pair and
    ``power_base ** exponents`` reproduces ``matrix`` entry for entry; the
    diagonal uses ``inf`` so equal points get distance exactly 0.
    """

    points: tuple
    matrix: np.ndarray
    label: str = ""
    power_base: float | None = None
    exponents: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = len(self.points)
        if n == 0:
            raise InvalidInputError("a metric space needs at least one point")
        if len(set(self.points)) != n:
            raise InvalidInputError("duplicate points in metric space")
        if self.matrix.shape != (n, n):
            raise InvalidInputError(
                f"distance matrix shape {self.matrix.shape} does not match {n} points"
            )
        if self.power_base is not None:
            if not 0.0 < self.power_base < 1.0:
                raise InvalidInputError(
                    f"power base must lie in (0, 1), got {self.power_base}"
                )
            if self.exponents is None or self.exponents.shape != (n, n):
                raise InvalidInputError("exponent table missing or mis-shaped")
            if not np.array_equal(self.power_base ** self.exponents, self.matrix):
                raise InvalidInputError("exponent table does not reproduce the matrix")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p: Point) -> bool:
        return p in self._index  # type: ignore[attr-defined]

    def index_of(self, p: Point) -> int:
        try:
            return self._index[p]  # type: ignore[attr-defined]
        except KeyError:
            raise InvalidInputError(f"point {p!r} is not in this space") from None

    def dist(self, p: Point, q: Point) -> float:
        return float(self.matrix[self.index_of(p), self.index_of(q)])

    def dist_exponent(self, p: Point, q: Point) -> float:
        """Exact exponent of ``dist(p, q)`` as a power of ``power_base``.

        Returns ``inf`` for equal points.  Raises when the space carries no
        power structure.
        """
        if self.exponents is None:
            raise InvalidInputError(f"space {self.label!r} carries no exponent table")
        return float(self.exponents[self.index_of(p), self.index_of(q)])

    def diameter(self) -> float:
        return float(self.matrix.max())


def metric_space_from_matrix(
    points: Sequence[Point],
    matrix: np.ndarray | Sequence[Sequence[float]],
    label: str = "",
) -> FiniteMetricSpace:
    """Build a space from any square array-like, copying to float64."""
    arr = np.asarray(matrix, dtype=float).copy()
    return FiniteMetricSpace(points=tuple(points), matrix=arr, label=label)


# ============================================================
# Axiom verification
# ============================================================

@dataclass(frozen=True)
class AxiomViolation:
    """One failed comparison.

    ``kind`` is one of ``identity``, ``symmetry``, ``separation``,
    ``triangle``, ``ultrametric``.  For triangle and ultrametric kinds the
    points are ``(x, z, y)``: endpoints first, midpoint last.  ``slack`` is
    the amount by which the inequality failed.
    """

    kind: str
    points: tuple
    slack: float


@dataclass(frozen=True)
class MetricReport:
    """Outcome of a verification scan.

    ``is_ultrametric`` is ``None`` when the strong triangle inequality was
    not part of the scan.
    """

    axiom_violations: tuple[AxiomViolation, ...]
    ultrametric_violations: tuple[AxiomViolation, ...]
    diameter: float
    is_metric: bool
    is_ultrametric: bool | None


def _basic_violations(space: FiniteMetricSpace, tol: float) -> list[AxiomViolation]:
    m = space.matrix
    pts = space.points
    out: list[AxiomViolation] = []
    for i in np.flatnonzero(np.abs(np.diag(m)) > tol):
        out.append(AxiomViolation("identity", (pts[i],), float(abs(m[i, i]))))
    asym = np.abs(m - m.T)
    for i, j in np.argwhere(np.triu(asym, k=1) > tol):
        out.append(AxiomViolation("symmetry", (pts[i], pts[j]), float(asym[i, j])))
    off = np.triu(np.ones_like(m, dtype=bool), k=1)
    for i, j in np.argwhere(off & (m <= tol)):
        out.append(
            AxiomViolation("separation", (pts[i], pts[j]), float(tol - m[i, j]))
        )
    return out


def _triangle_violations(space: FiniteMetricSpace, tol: float) -> list[AxiomViolation]:
    m = space.matrix
    pts = space.points
    upper = np.triu(np.ones_like(m, dtype=bool), k=1)
    out = []
    for k in range(len(pts)):
        through = m[:, k][:, None] + m[k, :][None, :]
        for i, j in np.argwhere(upper & (m > through + tol)):
            out.append(
                AxiomViolation(
                    "triangle",
                    (pts[i], pts[j], pts[k]),
                    float(m[i, j] - through[i, j]),
                )
            )
    return out


def _ultrametric_violations(space: FiniteMetricSpace, tol: float) -> list[AxiomViolation]:
    m = space.matrix
    pts = space.points
    upper = np.triu(np.ones_like(m, dtype=bool), k=1)
    out = []
    if space.exponents is not None:
        # Exact route: a^e decreases in e, so the strong triangle inequality
        # d(x,z) <= max(d(x,y), d(y,z)) is e(x,z) >= min(e(x,y), e(y,z)).
        e = space.exponents
        for k in range(len(pts)):
            floor = np.minimum(e[:, k][:, None], e[k, :][None, :])
            for i, j in np.argwhere(upper & (e < floor)):
                peak = max(m[i, k], m[k, j])
                out.append(
                    AxiomViolation(
                        "ultrametric", (pts[i], pts[j], pts[k]), float(m[i, j] - peak)
                    )
                )
        return out
    for k in range(len(pts)):
        peak = np.maximum(m[:, k][:, None], m[k, :][None, :])
        for i, j in np.argwhere(upper & (m > peak + tol)):
            out.append(
                AxiomViolation(
                    "ultrametric", (pts[i], pts[j], pts[k]), float(m[i, j] - peak[i, j])
                )
            )
    return out


def _scan(space: FiniteMetricSpace, tol: float, with_ultra: bool) -> MetricReport:
    basic = _basic_violations(space, tol)
    triangle = _triangle_violations(space, tol)
    ultra = _ultrametric_violations(space, tol) if with_ultra else []
    axioms = tuple(basic + triangle)
    return MetricReport(
        axiom_violations=axioms,
        ultrametric_violations=tuple(ultra),
        diameter=space.diameter(),
        is_metric=not axioms,
        is_ultrametric=(not axioms and not ultra) if with_ultra else None,
    )


def verify_metric_axioms(space: FiniteMetricSpace, tol: float = 0.0) -> MetricReport:
    """Exhaustively check identity, symmetry, separation and triangle.

    A violation is recorded whenever an inequality fails by more than
    ``tol``; every offending pair or triple is kept.
    """
    return _scan(space, tol, with_ultra=False)


def verify_ultrametric(space: FiniteMetricSpace, tol: float = 0.0) -> MetricReport:
    """Like :func:`verify_metric_axioms`, plus the strong triangle inequality.

    On spaces with an exponent table, ultrametric triples are compared on
    integer exponents so no float slack enters at all.
    """
    return _scan(space, tol, with_ultra=True)


# ============================================================
# Transforms
# ============================================================

def snowflake(space: FiniteMetricSpace, alpha: float) -> FiniteMetricSpace:
    """Raise every distance to the power ``alpha``.

    For 0 < alpha <= 1 this is again a metric, and for any alpha > 0 it
    preserves ultrametricity.  For alpha > 1 the result may only be a
    quasi-metric; nothing is asserted here, run a verification scan if the
    triangle defect matters.  Power-structured spaces stay exact: the base
    becomes ``power_base ** alpha`` and the exponents are untouched.
    """
    if alpha <= 0:
        raise InvalidInputError(f"snowflake exponent must be positive, got {alpha}")
    label = f"{space.label}^{alpha:g}" if space.label else f"snowflake^{alpha:g}"
    if space.power_base is not None:
        new_base = space.power_base ** alpha
        return FiniteMetricSpace(
            points=space.points,
            matrix=new_base ** space.exponents,
            label=label,
            power_base=new_base,
            exponents=space.exponents,
        )
    return FiniteMetricSpace(
        points=space.points, matrix=space.matrix ** alpha, label=label
    )


def truncate(space: FiniteMetricSpace, k: float) -> FiniteMetricSpace:
    """Cap every distance at ``k`` (``min(d, k)``), a metric again for k > 0."""
    if k <= 0:
        raise InvalidInputError(f"truncation level must be positive, got {k}")
    if k >= space.diameter():
        return space
    return FiniteMetricSpace(
        points=space.points,
        matrix=np.minimum(space.matrix, k),
        label=f"{space.label} (capped at {k:g})" if space.label else f"capped at {k:g}",
    )


# ============================================================
# Covering counts and box dimension
# ============================================================

@dataclass(frozen=True)
class DimensionFit:
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    r_squared: float


def covering_number(space: FiniteMetricSpace, scale: float) -> int:
    """Greedy first-fit covering: walk points in index order, opening a new
    closed ball (centered at the current point) whenever the point is farther
    than ``scale`` from every existing center."""
    if scale <= 0:
        raise InvalidInputError(f"scale must be positive, got {scale}")
    m = space.matrix
    covered = np.zeros(len(space.points), dtype=bool)
    count = 0
    for i in range(len(space.points)):
        if not covered[i]:
            count += 1
            covered |= m[i] <= scale
    return count


def box_counting_dimension(
    space: FiniteMetricSpace, scales: Sequence[float]
) -> DimensionFit:
    """Least-squares slope of log(covering count) against log(1/scale).

    Needs at least three strictly decreasing positive scales, each below the
    diameter (no constraint for a degenerate single-point space).
    """
    scales = tuple(float(s) for s in scales)
    if len(scales) < 3:
        raise InvalidInputError("need at least three scales for a dimension fit")
    if any(s <= 0 for s in scales):
        raise InvalidInputError("scales must be positive")
    if any(a <= b for a, b in zip(scales, scales[1:])):
        raise InvalidInputError("scales must be strictly decreasing")
    diam = space.diameter()
    if diam > 0 and any(s >= diam for s in scales):
        raise InvalidInputError(
            f"every scale must be below the diameter {diam:g}"
        )
    counts = tuple(covering_number(space, s) for s in scales)
    if any(c2 < c1 for c1, c2 in zip(counts, counts[1:])):
        raise InvalidInputError(f"covering counts decreased along scales: {counts}")
    x = -np.log(np.array(scales))
    y = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(residuals ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DimensionFit(
        scales=scales, counts=counts, slope=float(slope), r_squared=r_squared
    )


def sup_distance(
    f: Callable[[Point], Point], g: Callable[[Point], Point], space: FiniteMetricSpace
) -> float:
    """Uniform distance ``max_x d(f(x), g(x))`` between two self-maps."""
    worst = 0.0
    for p in space.points:
        worst = max(worst, space.dist(f(p), g(p)))
    return worst
