"""The four prebuilt model families and their declarative specs."""

import numpy as np
import pytest

from solenoidlab import (
    InvalidInputError,
    ModelSpec,
    PeriodicSequence,
    TorusPoint,
    build_full_shift,
    build_model,
    build_padic_cycle,
    build_snowflake_interval,
    build_two_fixed_points,
    point_label,
    shift,
    verify_metric_axioms,
    verify_ultrametric,
)


def test_full_shift_build():
    space, mapping, ts = build_full_shift(2, 0.5, 4)
    assert len(space) == 16
    assert space.label == "full-shift(2,4)"
    assert space.power_base == 0.5
    assert space.diameter() == 1.0
    assert verify_ultrametric(space).is_ultrametric
    assert all(mapping(p) == shift(p, 1) for p in space.points)
    assert ts.lipschitz_constant == 2.0
    assert ts.diameter_bound == 1.0
    wide, _, _ = build_full_shift(3, 1 / 3, 2)
    assert len(wide) == 9
    assert wide.diameter() == 1.0


def test_full_shift_validation():
    with pytest.raises(InvalidInputError):
        build_full_shift(1, 0.5, 4)
    with pytest.raises(InvalidInputError):
        build_full_shift(2, 1.5, 4)
    with pytest.raises(InvalidInputError):
        build_full_shift(2, 0.5, 0)
    with pytest.raises(InvalidInputError):
        build_full_shift(40, 0.5, 1)  # symbol table holds 36 tokens


def test_padic_cycle_build():
    space, mapping, ts = build_padic_cycle(2, 3)
    assert space.points == tuple(range(8))
    assert space.label == "residue-ring(2^3)"
    assert space.dist(0, 1) == 1.0
    assert space.dist(0, 2) == 0.5
    assert space.dist(0, 4) == 0.25
    assert space.dist(2, 6) == 0.25
    assert space.dist(3, 7) == 0.25
    assert verify_ultrametric(space).is_ultrametric
    assert mapping(7) == 0
    assert ts.lipschitz_constant == 1.0
    trinary, _, _ = build_padic_cycle(3, 2)
    assert trinary.dist(0, 3) == pytest.approx(1 / 3)
    assert trinary.dist(0, 1) == 1.0


def test_padic_cycle_validation():
    with pytest.raises(InvalidInputError):
        build_padic_cycle(4, 2)
    with pytest.raises(InvalidInputError):
        build_padic_cycle(1, 2)
    with pytest.raises(InvalidInputError):
        build_padic_cycle(2, 0)


def test_two_fixed_points_build():
    space, mapping, ts = build_two_fixed_points()
    assert len(space) == 2
    assert space.diameter() == 1.0
    assert all(mapping(p) == p for p in space.points)
    assert ts.lipschitz_constant == 1.0


def test_snowflake_interval_build():
    grid = build_snowflake_interval(16, 1.0)
    assert len(grid) == 17
    assert grid.points[0] == 0.0 and grid.points[-1] == 1.0
    assert grid.dist(0.0, 1.0) == 1.0
    assert verify_metric_axioms(grid).is_metric
    root = build_snowflake_interval(4, 0.5)
    assert root.dist(0.0, 0.25) == 0.5
    with pytest.raises(InvalidInputError):
        build_snowflake_interval(1, 0.5)
    with pytest.raises(InvalidInputError):
        build_snowflake_interval(16, 1.5)
    with pytest.raises(InvalidInputError):
        build_snowflake_interval(16, 0.0)


def test_model_spec_round_trip():
    raw = {
        "kind": "full-shift",
        "parameters": {"alphabet_size": 2, "ratio": 0.5, "max_period": 3},
    }
    spec = ModelSpec.from_dict(raw)
    assert spec.kind == "full-shift"
    assert spec.parameters == {"alphabet_size": 2, "ratio": 0.5, "max_period": 3}
    model = build_model(spec)
    assert len(model.space) == 8
    assert model.shift_config is not None
    assert model.shift_config.ratio == 0.5
    assert model.torus is not None


def test_model_spec_validation():
    with pytest.raises(InvalidInputError):
        ModelSpec.from_dict({"kind": "heptagon", "parameters": {}})
    with pytest.raises(InvalidInputError):
        ModelSpec.from_dict({"kind": "full-shift"})
    with pytest.raises(InvalidInputError):
        ModelSpec.from_dict(
            {"kind": "full-shift", "parameters": {"alphabet_size": 2, "ratio": 0.5}}
        )
    with pytest.raises(InvalidInputError):
        ModelSpec.from_dict(
            {
                "kind": "full-shift",
                "parameters": {
                    "alphabet_size": 2,
                    "ratio": 0.5,
                    "max_period": 3,
                    "extra": 1,
                },
            }
        )
    with pytest.raises(InvalidInputError):
        # bool is not an acceptable stand-in for an integer parameter
        ModelSpec.from_dict(
            {
                "kind": "full-shift",
                "parameters": {"alphabet_size": True, "ratio": 0.5, "max_period": 3},
            }
        )
    with pytest.raises(InvalidInputError):
        ModelSpec.from_dict(
            {
                "kind": "full-shift",
                "parameters": {"alphabet_size": 2, "ratio": "half", "max_period": 3},
            }
        )


def test_build_model_all_kinds():
    specs = [
        {"kind": "full-shift", "parameters": {"alphabet_size": 2, "ratio": 0.5, "max_period": 2}},
        {"kind": "padic-cycle", "parameters": {"prime": 3, "digits": 2}},
        {"kind": "two-fixed-points", "parameters": {}},
        {"kind": "snowflake-interval", "parameters": {"grid_size": 8, "alpha": 0.5}},
    ]
    for raw in specs:
        model = build_model(ModelSpec.from_dict(raw))
        assert verify_metric_axioms(model.space).is_metric
    interval = build_model(ModelSpec.from_dict(specs[-1]))
    assert interval.mapping is None and interval.torus is None
    cycle = build_model(ModelSpec.from_dict(specs[1]))
    assert cycle.shift_config is None
    assert cycle.torus is not None


def test_integer_ratio_accepted_as_float():
    # JSON configs may carry 1 where 1.0 is meant; ints coerce into floats
    spec = ModelSpec.from_dict(
        {"kind": "snowflake-interval", "parameters": {"grid_size": 8, "alpha": 1}}
    )
    model = build_model(spec)
    assert model.space.dist(0.0, 1.0) == 1.0


def test_point_labels():
    bits = build_full_shift(2, 0.5, 2)[0]
    parity = bits.points[1]
    assert isinstance(parity, PeriodicSequence)
    assert point_label(parity) == parity.to_text()
    assert point_label(TorusPoint(parity, 0.5)) == f"{parity.to_text()}@0.5"
    assert point_label(0.1) == "0.1"
    assert point_label(7) == "7"
