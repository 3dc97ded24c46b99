"""Ready-made model spaces: full shifts, residue-ring rotations, and friends.

Each builder returns ``(space, mapping, torus)`` with the torus assembled at
diameter bound 1; the snowflaked interval has no dynamics and returns just
the space.  :func:`build_model` drives the same builders from a declarative
:class:`ModelSpec`, which is what the command line feeds in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .dynamics import SelfMap, self_map_from_function
from .errors import InvalidInputError
from .mapping_torus import TorusPoint, TorusSpace, make_torus_space
from .metric_core import FiniteMetricSpace, snowflake
from .shift_space import (
    Alphabet,
    PeriodicSequence,
    ShiftConfig,
    enumerate_periodic_points,
    pairwise_depth_matrix,
    shift,
)

_ALPHABET_TOKENS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _make_alphabet(size: int) -> Alphabet:
    if not 2 <= size <= len(_ALPHABET_TOKENS):
        raise InvalidInputError(
            f"alphabet size must be between 2 and {len(_ALPHABET_TOKENS)}, got {size}"
        )
    return Alphabet(tuple(_ALPHABET_TOKENS[:size]))


def build_full_shift(
    alphabet_size: int, ratio: float, max_period: int
) -> tuple[FiniteMetricSpace, SelfMap, TorusSpace]:
    """All periodic points of period dividing ``max_period`` under the shift.

    The space has ``alphabet_size ** max_period`` points, diameter 1, and an
    exact exponent table; the torus is assembled with bilipschitz constant
    ``1/ratio`` (the exact distortion of one shift step) and diameter bound 1.
    """
    alphabet = _make_alphabet(alphabet_size)
    cfg = ShiftConfig(alphabet=alphabet, ratio=ratio)
    points = tuple(enumerate_periodic_points(alphabet, max_period))
    depths = pairwise_depth_matrix(points)
    space = FiniteMetricSpace(
        points=points,
        matrix=cfg.ratio ** depths,
        label=f"full-shift({alphabet_size},{max_period})",
        power_base=cfg.ratio,
        exponents=depths,
    )
    mapping = self_map_from_function(points, shift, kind="shift-map")
    torus = make_torus_space(
        space, mapping, lipschitz_constant=1.0 / ratio, diameter_bound=1.0
    )
    return space, mapping, torus


def _prime_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def build_padic_cycle(
    prime: int, digits: int
) -> tuple[FiniteMetricSpace, SelfMap, TorusSpace]:
    """The ring Z / prime^digits with the valuation metric and the +1 map.

    d(x, y) = prime^-v where v is the multiplicity of ``prime`` in x - y;
    translation preserves differences, so the map is an exact isometry and
    the torus gets bilipschitz constant 1.
    """
    if prime < 2 or any(prime % q == 0 for q in range(2, int(prime ** 0.5) + 1)):
        raise InvalidInputError(f"{prime} is not prime")
    if digits < 1:
        raise InvalidInputError(f"need at least one digit, got {digits}")
    modulus = prime ** digits
    points = tuple(range(modulus))
    exponents = np.full((modulus, modulus), np.inf)
    for x in points:
        for y in range(x + 1, modulus):
            v = _prime_valuation(y - x, prime)
            exponents[x, y] = exponents[y, x] = v
    base = 1.0 / prime
    space = FiniteMetricSpace(
        points=points,
        matrix=base ** exponents,
        label=f"residue-ring({prime}^{digits})",
        power_base=base,
        exponents=exponents,
    )
    mapping = self_map_from_function(
        points, lambda x: (x + 1) % modulus, kind="group-translation"
    )
    torus = make_torus_space(space, mapping, lipschitz_constant=1.0, diameter_bound=1.0)
    return space, mapping, torus


def build_two_fixed_points() -> tuple[FiniteMetricSpace, SelfMap, TorusSpace]:
    """The two constant binary sequences at distance 1, fixed by the shift.

    The glued space is two disjoint circles; the component scan finds the
    invariant split at any resolution below 1.
    """
    alphabet = _make_alphabet(2)
    points = tuple(
        PeriodicSequence.from_cells(alphabet, (s,)) for s in alphabet.symbols
    )
    exponents = np.array([[np.inf, 0.0], [0.0, np.inf]])
    space = FiniteMetricSpace(
        points=points,
        matrix=0.5 ** exponents,
        label="two-fixed-points",
        power_base=0.5,
        exponents=exponents,
    )
    mapping = self_map_from_function(points, shift, kind="shift-map")
    torus = make_torus_space(space, mapping, lipschitz_constant=1.0, diameter_bound=1.0)
    return space, mapping, torus


def build_snowflake_interval(grid_size: int, alpha: float) -> FiniteMetricSpace:
    """The grid {i / grid_size : 0 <= i <= grid_size} with metric |x-y|^alpha."""
    if grid_size < 2:
        raise InvalidInputError(f"grid size must be at least 2, got {grid_size}")
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1], got {alpha}")
    points = tuple(i / grid_size for i in range(grid_size + 1))
    coords = np.array(points)
    space = FiniteMetricSpace(
        points=points,
        matrix=np.abs(coords[:, None] - coords[None, :]),
        label=f"interval({grid_size})",
    )
    return snowflake(space, alpha)


# ============================================================
# Declarative specs
# ============================================================

MODEL_KINDS = ("full-shift", "padic-cycle", "two-fixed-points", "snowflake-interval")

_PARAMETERS: dict[str, dict[str, type]] = {
    "full-shift": {"alphabet_size": int, "ratio": float, "max_period": int},
    "padic-cycle": {"prime": int, "digits": int},
    "two-fixed-points": {},
    "snowflake-interval": {"grid_size": int, "alpha": float},
}


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A validated (kind, parameters) pair naming one buildable model."""

    kind: str
    parameters: dict

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ModelSpec":
        kind = raw.get("kind")
        if kind not in MODEL_KINDS:
            raise InvalidInputError(
                f"unknown model kind {kind!r}; choose one of {MODEL_KINDS}"
            )
        wanted = _PARAMETERS[kind]
        params = dict(raw.get("parameters", {}))
        missing = sorted(set(wanted) - set(params))
        extra = sorted(set(params) - set(wanted))
        if missing:
            raise InvalidInputError(f"model {kind!r} is missing parameters {missing}")
        if extra:
            raise InvalidInputError(f"model {kind!r} got unknown parameters {extra}")
        for name, typ in wanted.items():
            value = params[name]
            if typ is int and not (isinstance(value, int) and not isinstance(value, bool)):
                raise InvalidInputError(f"parameter {name!r} must be an integer")
            if typ is float:
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise InvalidInputError(f"parameter {name!r} must be a number")
                params[name] = float(value)
        return cls(kind=kind, parameters=params)


@dataclass(frozen=True, eq=False)
class BuiltModel:
    """A built model with whatever structure its kind provides."""

    spec: ModelSpec
    space: FiniteMetricSpace
    mapping: SelfMap | None
    torus: TorusSpace | None
    shift_config: ShiftConfig | None


def build_model(spec: ModelSpec) -> BuiltModel:
    params = spec.parameters
    if spec.kind == "full-shift":
        space, mapping, torus = build_full_shift(
            params["alphabet_size"], params["ratio"], params["max_period"]
        )
        cfg = ShiftConfig(space.points[0].alphabet, params["ratio"])
        return BuiltModel(spec, space, mapping, torus, cfg)
    if spec.kind == "padic-cycle":
        space, mapping, torus = build_padic_cycle(params["prime"], params["digits"])
        return BuiltModel(spec, space, mapping, torus, None)
    if spec.kind == "two-fixed-points":
        space, mapping, torus = build_two_fixed_points()
        cfg = ShiftConfig(space.points[0].alphabet, 0.5)
        return BuiltModel(spec, space, mapping, torus, cfg)
    space = build_snowflake_interval(params["grid_size"], params["alpha"])
    return BuiltModel(spec, space, None, None, None)


def point_label(p: Any) -> str:
    """Stable text form of any model point, safe for CSV headers."""
    if isinstance(p, PeriodicSequence):
        return p.to_text()
    if isinstance(p, TorusPoint):
        return f"{point_label(p.base)}@{p.time!r}"
    if isinstance(p, float):
        return repr(p)
    return str(p)
