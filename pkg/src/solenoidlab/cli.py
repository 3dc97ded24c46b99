"""Config-driven command line: build a model, run checks, export matrices.

``solenoidlab run config.json`` executes the configured checks and writes a
JSON report that is byte-identical across runs for the same config and seed.
``solenoidlab export config.json`` writes one distance matrix as CSV.
``solenoidlab schema`` prints the config schema.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np
import jsonschema

from . import __version__
from .connectedness import dense_orbit_check, invariant_components
from .dynamics import adapted_metric, estimate_bilipschitz_constant
from .errors import InvalidInputError
from .mapping_torus import (
    ChainMetricTable,
    TorusPoint,
    dist_to_integers,
    circle_distance,
    flow,
    product_metric,
    project_to_circle,
    quotient_metric,
    representative_distance,
    representative_distance_matrix,
    torus_points_close,
)
from .measures import (
    CylinderSet,
    WeightVector,
    ahlfors_check,
    doubling_check,
    shift_invariance_check,
)
from .metric_core import (
    DEFAULT_TOLERANCE,
    box_counting_dimension,
    verify_metric_axioms,
    verify_ultrametric,
)
from .models import MODEL_KINDS, ModelSpec, build_model, point_label

CHECK_NAMES = (
    "metric-axioms",
    "ultrametric",
    "bilipschitz",
    "quotient-metric",
    "chain-sandwich",
    "flow-laws",
    "connectedness",
    "dense-orbit",
    "measures",
    "dimension",
)

#: Checks that draw random samples and therefore need a seed.
SAMPLING_CHECKS = frozenset(
    {"quotient-metric", "chain-sandwich", "flow-laws", "measures"}
)

METRIC_NAMES = ("base", "adapted", "product", "quotient", "representative", "chain")

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "solenoidlab experiment config",
    "type": "object",
    "required": ["space"],
    "additionalProperties": False,
    "properties": {
        "space": {
            "type": "object",
            "required": ["kind", "parameters"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(MODEL_KINDS)},
                "parameters": {"type": "object"},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "tolerance": {"type": "number", "minimum": 0},
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "properties": {"name": {"enum": list(CHECK_NAMES)}},
            },
        },
        "export": {
            "type": "object",
            "required": ["metric"],
            "additionalProperties": False,
            "properties": {
                "metric": {"enum": list(METRIC_NAMES)},
                "times": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number"},
                },
            },
        },
        "output": {
            "type": "object",
            "required": ["path"],
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["json", "csv"]},
            },
        },
    },
}


class UsageError(Exception):
    """Bad config or bad flags; maps to exit code 2."""


# ============================================================
# Config plumbing
# ============================================================

def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read config: {e}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"config is not valid JSON: {e}") from None
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise UsageError(f"{first.json_path}: {first.message}")
    return cfg


def _param(check: dict, index: int, key: str, kind: str, default=None, required=False):
    where = f"$.checks[{index}]"
    if key not in check:
        if required:
            raise UsageError(f"{where}: check {check['name']!r} needs parameter {key!r}")
        return default
    value = check[key]
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise UsageError(f"{where}.{key}: expected an integer")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise UsageError(f"{where}.{key}: expected a number")
        return float(value)
    if kind == "floats":
        if not isinstance(value, list) or not value or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
        ):
            raise UsageError(f"{where}.{key}: expected a nonempty list of numbers")
        return [float(v) for v in value]
    if kind == "weights":
        if not isinstance(value, dict):
            raise UsageError(f"{where}.{key}: expected an object of symbol weights")
        return value
    raise AssertionError(kind)


_KNOWN_PARAMS = {
    "metric-axioms": set(),
    "ultrametric": set(),
    "bilipschitz": set(),
    "quotient-metric": {"pairs"},
    "chain-sandwich": {"pairs", "times", "max_bases"},
    "flow-laws": {"triples"},
    "connectedness": {"epsilon"},
    "dense-orbit": {"epsilon", "origin_index", "max_iter"},
    "measures": {"cylinders", "radii", "weights"},
    "dimension": {"scales"},
}


def _reject_unknown_params(check: dict, index: int) -> None:
    extra = set(check) - {"name"} - _KNOWN_PARAMS[check["name"]]
    if extra:
        raise UsageError(
            f"$.checks[{index}]: unknown parameter {sorted(extra)[0]!r} "
            f"for check {check['name']!r}"
        )


def _need_mapping(model, name):
    if model.mapping is None:
        raise UsageError(f"check {name!r} needs a model with a self-map")
    return model.mapping


def _need_torus(model, name):
    if model.torus is None:
        raise UsageError(f"check {name!r} needs a model with a glued torus")
    return model.torus


def _need_sequences(model, name):
    if model.shift_config is None:
        raise UsageError(f"check {name!r} needs a sequence-space model")
    return model.shift_config


def _labels(points):
    return [point_label(p) for p in points]


def _violation_payload(violations, limit=5):
    return [
        {"kind": v.kind, "points": _labels(v.points), "slack": v.slack}
        for v in violations[:limit]
    ]


# ============================================================
# Check implementations
# ============================================================

def _check_metric_axioms(model, check, index, tol, rng):
    report = verify_metric_axioms(model.space, tol)
    return {
        "status": "pass" if report.is_metric else "fail",
        "diameter": report.diameter,
        "violations": len(report.axiom_violations),
        "witnesses": _violation_payload(report.axiom_violations),
    }


def _check_ultrametric(model, check, index, tol, rng):
    report = verify_ultrametric(model.space, tol)
    bad = report.axiom_violations + report.ultrametric_violations
    return {
        "status": "pass" if report.is_ultrametric else "fail",
        "diameter": report.diameter,
        "violations": len(bad),
        "witnesses": _violation_payload(bad),
    }


def _check_bilipschitz(model, check, index, tol, rng):
    est = estimate_bilipschitz_constant(model.space, _need_mapping(model, "bilipschitz"))
    return {
        "status": "report",
        "constant": est.constant,
        "upper": est.c_upper,
        "lower": est.c_lower,
        "expanding_pair": _labels(est.expanding_pair) if est.expanding_pair else None,
        "contracting_pair": _labels(est.contracting_pair) if est.contracting_pair else None,
    }


def _check_quotient_metric(model, check, index, tol, rng):
    ts = _need_torus(model, "quotient-metric")
    if ts.lipschitz_constant != 1.0:
        raise UsageError(
            "check 'quotient-metric' needs an isometric model "
            "(padic-cycle or two-fixed-points)"
        )
    pairs = _param(check, index, "pairs", "int", default=1000)
    points = ts.base_space.points
    violations = 0
    witness = None
    equality_pairs = 0
    max_equality_error = 0.0
    for _ in range(pairs):
        p = TorusPoint(points[rng.randint(len(points))], float(rng.rand()))
        q = TorusPoint(points[rng.randint(len(points))], float(rng.rand()))
        d = quotient_metric(p, q, ts)
        rho = product_metric(p.base, p.time, q.base, q.time, ts)
        bad = d > rho + tol or d < dist_to_integers(p.time - q.time) - tol
        if ts.base_space.dist(p.base, q.base) <= 0.5 and abs(p.time - q.time) <= 0.5:
            equality_pairs += 1
            err = abs(d - rho)
            max_equality_error = max(max_equality_error, err)
            bad = bad or err > tol
        if bad:
            violations += 1
            if witness is None:
                witness = {
                    "pair": [point_label(p), point_label(q)],
                    "quotient": d,
                    "product": rho,
                }
    return {
        "status": "pass" if violations == 0 else "fail",
        "pairs": pairs,
        "equality_pairs": equality_pairs,
        "max_equality_error": max_equality_error,
        "violations": violations,
        "witness": witness,
    }


def _draw_centered_times(rng):
    # representatives must sit within 1/2 of each other and of the seam
    while True:
        r, t = float(rng.rand()), float(rng.rand())
        if abs(r - t) <= 0.5 and (r + t) / 2 <= 0.5:
            return r, t


def _check_chain_sandwich(model, check, index, tol, rng):
    ts = _need_torus(model, "chain-sandwich")
    pairs = _param(check, index, "pairs", "int", default=200)
    times = _param(check, index, "times", "floats", default=[0.0, 0.25, 0.5, 0.75])
    max_bases = _param(check, index, "max_bases", "int", default=16)
    if any(not 0.0 <= t < 1.0 for t in times):
        raise UsageError(f"$.checks[{index}].times: sample times must lie in [0, 1)")
    if max_bases < 1:
        raise UsageError(f"$.checks[{index}].max_bases: need at least one base point")
    points = ts.base_space.points
    step = max(1, math.ceil(len(points) / max_bases))
    chosen = points[::step][:max_bases]
    sample = [TorusPoint(b, t) for b in chosen for t in times]
    table = ChainMetricTable(ts, sample)
    c = ts.lipschitz_constant
    stretch = max(c, 2.0 * ts.diameter_bound)
    violations = 0
    witness = None
    for _ in range(pairs):
        r, t = _draw_centered_times(rng)
        p = TorusPoint(points[rng.randint(len(points))], r)
        q = TorusPoint(points[rng.randint(len(points))], t)
        delta = representative_distance(p, q, ts)
        rho = product_metric(p.base, p.time, q.base, q.time, ts)
        d0 = table.distance_via(p, q)
        ok = (
            min(rho / c, 0.5) <= d0 + tol
            and d0 <= delta + tol
            and delta <= rho + tol
            and rho <= stretch * d0 + tol
        )
        if not ok:
            violations += 1
            if witness is None:
                witness = {
                    "pair": [point_label(p), point_label(q)],
                    "chain": d0,
                    "representative": delta,
                    "product": rho,
                }
    return {
        "status": "pass" if violations == 0 else "fail",
        "pairs": pairs,
        "sample_size": len(table),
        "violations": violations,
        "witness": witness,
    }


def _check_flow_laws(model, check, index, tol, rng):
    ts = _need_torus(model, "flow-laws")
    triples = _param(check, index, "triples", "int", default=1000)
    points = ts.base_space.points
    violations = 0
    witness = None
    for _ in range(triples):
        p = TorusPoint(points[rng.randint(len(points))], float(rng.rand()))
        r, s = (float(v) for v in rng.uniform(-2.0, 2.0, size=2))
        lhs = flow(flow(p, s, ts), r, ts)
        rhs = flow(p, r + s, ts)
        moved = project_to_circle(flow(p, r, ts))
        ok = torus_points_close(lhs, rhs, ts, tol=1e-12) and (
            circle_distance(moved, p.time + r) <= 1e-9
        )
        if not ok:
            violations += 1
            if witness is None:
                witness = {"point": point_label(p), "r": r, "s": s}
    return {
        "status": "pass" if violations == 0 else "fail",
        "triples": triples,
        "violations": violations,
        "witness": witness,
    }


def _check_connectedness(model, check, index, tol, rng):
    epsilon = _param(check, index, "epsilon", "float", required=True)
    parts = invariant_components(
        model.space, _need_mapping(model, "connectedness"), epsilon
    )
    return {
        "status": "report",
        "epsilon": epsilon,
        "components": len(parts.blocks),
        "invariant": parts.invariant,
        "witness": _labels(parts.witness[:8]) if parts.witness else None,
    }


def _check_dense_orbit(model, check, index, tol, rng):
    epsilon = _param(check, index, "epsilon", "float", required=True)
    origin_index = _param(check, index, "origin_index", "int", default=0)
    max_iter = _param(check, index, "max_iter", "int", default=len(model.space))
    if not 0 <= origin_index < len(model.space):
        raise UsageError(f"$.checks[{index}].origin_index: out of range")
    origin = model.space.points[origin_index]
    report = dense_orbit_check(
        model.space, _need_mapping(model, "dense-orbit"), origin, epsilon, max_iter
    )
    return {
        "status": "report",
        "epsilon": epsilon,
        "origin": point_label(origin),
        "max_iter": max_iter,
        "dense": report.dense,
        "covering_fraction": report.covering_fraction,
    }


def _band_payload(band):
    return {
        "c_low": band.c_low,
        "c_high": band.c_high,
        "fitted_exponent": band.fitted_exponent,
    }


def _check_measures(model, check, index, tol, rng):
    cfg = _need_sequences(model, "measures")
    ts = _need_torus(model, "measures")
    cylinders = _param(check, index, "cylinders", "int", default=100)
    radii = _param(
        check, index, "radii", "floats", default=[0.5 ** k for k in range(1, 6)]
    )
    if any(not 0.0 < r <= 0.5 for r in radii):
        raise UsageError(f"$.checks[{index}].radii: radii must lie in (0, 1/2]")
    if cylinders < 0:
        raise UsageError(f"$.checks[{index}].cylinders: must be nonnegative")
    raw_weights = _param(check, index, "weights", "weights")
    if raw_weights is None:
        w = WeightVector.uniform(cfg.alphabet)
    else:
        w = WeightVector.from_dict(cfg.alphabet, raw_weights)
    symbols = cfg.alphabet.symbols
    drawn = []
    for _ in range(cylinders):
        size = int(rng.randint(1, 5))
        idx = rng.choice(np.arange(-6, 7), size=size, replace=False)
        drawn.append(
            CylinderSet.from_dict(
                cfg.alphabet,
                {int(j): symbols[rng.randint(len(symbols))] for j in idx},
            )
        )
    discrepancy = shift_invariance_check(w, drawn) if drawn else 0.0
    base_dim = 2.0 * math.log(len(symbols)) / math.log(1.0 / cfg.ratio)
    bases = ts.base_space.points[:8]
    samples = [TorusPoint(b, 0.25) for b in bases]
    base_band = ahlfors_check(samples, radii, base_dim, ts, w, mode="base")
    torus_band = ahlfors_check(samples, radii, base_dim + 1.0, ts, w, mode="torus")
    doubling = doubling_check(samples, [r / 2 for r in radii], ts, w)
    return {
        "status": "report",
        "cylinders": cylinders,
        "invariance_discrepancy": discrepancy,
        "base_dimension": base_dim,
        "base_band": _band_payload(base_band),
        "torus_dimension": base_dim + 1.0,
        "torus_band": _band_payload(torus_band),
        "doubling_constant": doubling,
    }


def _check_dimension(model, check, index, tol, rng):
    scales = _param(check, index, "scales", "floats", required=True)
    fit = box_counting_dimension(model.space, scales)
    return {
        "status": "report",
        "scales": list(fit.scales),
        "counts": list(fit.counts),
        "slope": fit.slope,
        "r_squared": fit.r_squared,
    }


_CHECKS = {
    "metric-axioms": _check_metric_axioms,
    "ultrametric": _check_ultrametric,
    "bilipschitz": _check_bilipschitz,
    "quotient-metric": _check_quotient_metric,
    "chain-sandwich": _check_chain_sandwich,
    "flow-laws": _check_flow_laws,
    "connectedness": _check_connectedness,
    "dense-orbit": _check_dense_orbit,
    "measures": _check_measures,
    "dimension": _check_dimension,
}


# ============================================================
# Subcommands
# ============================================================

def _build(cfg) -> "BuiltModel":
    try:
        return build_model(ModelSpec.from_dict(cfg["space"]))
    except InvalidInputError as e:
        raise UsageError(f"$.space: {e}") from None


def _resolve_seed(cfg, args, checks):
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None and any(c["name"] in SAMPLING_CHECKS for c in checks):
        raise UsageError(
            "a seed is required when checks sample randomly "
            "(set $.seed or pass --seed)"
        )
    return seed


def _run(cfg, args) -> tuple[str, int]:
    checks = cfg.get("checks")
    if not checks:
        raise UsageError("$.checks: a run needs at least one check")
    out_format = cfg.get("output", {}).get("format", "json")
    if out_format != "json":
        raise UsageError("$.output.format: run reports are JSON")
    model = _build(cfg)
    seed = _resolve_seed(cfg, args, checks)
    tol = args.tol if args.tol is not None else cfg.get("tolerance", DEFAULT_TOLERANCE)
    results = []
    started = time.perf_counter()
    for i, check in enumerate(checks):
        _reject_unknown_params(check, i)
        rng = np.random.RandomState((seed if seed is not None else 0, i))
        try:
            payload = _CHECKS[check["name"]](model, check, i, tol, rng)
        except InvalidInputError as e:
            raise UsageError(f"$.checks[{i}]: {e}") from None
        results.append({"name": check["name"], **payload})
    elapsed = time.perf_counter() - started
    failed = sum(1 for r in results if r["status"] == "fail")
    envelope = {
        "config": cfg,
        "package": {"name": "solenoidlab", "version": __version__},
        "run": {"seed": seed, "tolerance": tol},
        "results": results,
        "summary": {
            "checks": len(results),
            "passed": sum(1 for r in results if r["status"] == "pass"),
            "failed": failed,
            "reported": sum(1 for r in results if r["status"] == "report"),
            "all_passed": failed == 0,
        },
    }
    print(f"{len(results)} checks in {elapsed:.3f}s", file=sys.stderr)
    text = json.dumps(envelope, sort_keys=True, indent=2) + "\n"
    return text, (0 if failed == 0 else 1)


def _torus_sample(ts, times):
    return [TorusPoint(b, t) for b in ts.base_space.points for t in times]


def _export_matrix(cfg, model):
    exp = cfg.get("export")
    if not exp:
        raise UsageError("$.export: an export needs a metric name")
    metric = exp["metric"]
    if metric == "base":
        return _labels(model.space.points), model.space.matrix
    if metric == "adapted":
        mapping = _need_mapping(model, "adapted")
        tilde = adapted_metric(model.space, mapping)
        return _labels(tilde.points), tilde.matrix
    ts = model.torus
    if ts is None:
        raise UsageError(f"export metric {metric!r} needs a model with a glued torus")
    times = exp.get("times")
    if not times:
        raise UsageError(f"$.export.times: required for metric {metric!r}")
    if any(not 0.0 <= t < 1.0 for t in times):
        raise UsageError("$.export.times: sample times must lie in [0, 1)")
    sample = _torus_sample(ts, [float(t) for t in times])
    labels = _labels(sample)
    if metric == "product":
        idx = [ts.base_space.index_of(p.base) for p in sample]
        tvec = np.array([p.time for p in sample])
        base = ts.base_space.matrix[np.ix_(idx, idx)]
        matrix = np.maximum(base, np.abs(tvec[:, None] - tvec[None, :]))
    elif metric == "quotient":
        if ts.lipschitz_constant != 1.0:
            raise UsageError(
                "export metric 'quotient' needs an isometric model "
                "(padic-cycle or two-fixed-points)"
            )
        n = len(sample)
        matrix = np.zeros((n, n))
        for i, p in enumerate(sample):
            for j in range(i + 1, n):
                matrix[i, j] = matrix[j, i] = quotient_metric(p, sample[j], ts)
    elif metric == "representative":
        matrix = representative_distance_matrix(ts, sample)
    else:
        matrix = ChainMetricTable(ts, sample).distance_matrix()
    return labels, matrix


def _export(cfg, args) -> str:
    if cfg.get("output", {}).get("format", "csv") != "csv":
        raise UsageError("$.output.format: matrix exports are CSV")
    model = _build(cfg)
    labels, matrix = _export_matrix(cfg, model)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(labels)
    for row in matrix:
        writer.writerow([repr(float(v)) for v in row])
    return out.getvalue()


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parser():
    parser = argparse.ArgumentParser(
        prog="solenoidlab",
        description="verification checks for glued finite metric models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the configured checks")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--tol", type=float, default=None)
    run.add_argument("--out", default=None)
    exp = sub.add_parser("export", help="write one distance matrix as CSV")
    exp.add_argument("config")
    exp.add_argument("--out", default=None)
    sub.add_parser("schema", help="print the config schema")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "schema":
            sys.stdout.write(json.dumps(CONFIG_SCHEMA, sort_keys=True, indent=2) + "\n")
            return 0
        cfg = _load_config(args.config)
        out_path = args.out or cfg.get("output", {}).get("path")
        if args.command == "run":
            text, code = _run(cfg, args)
            _write(text, out_path)
            return code
        text = _export(cfg, args)
        _write(text, out_path)
        return 0
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
