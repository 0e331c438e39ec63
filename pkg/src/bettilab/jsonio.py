"""Deterministic JSON output and PeriodData (de)serialisation."""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .curve_family import point_from_json, point_to_json
from .errors import SchemaError
from .periods import CycleBasis, PeriodData, assemble
from .quadrature import QuadratureConfig

SCHEMA = "betti-lab/1"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and floats written with 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + _float(obj.real) + ", " + _float(obj.imag) + "]"
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}" if obj.denominator != 1 else str(obj.numerator))
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return json.dumps(obj.value)
    return json.dumps(str(obj))


def encode_matrix(M) -> list:
    """Row-major complex matrix as ``[re, im]`` pairs."""
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(rows) -> np.ndarray:
    try:
        return np.array([[complex(v[0], v[1]) for v in row] for row in rows], dtype=complex)
    except (TypeError, IndexError, ValueError) as exc:
        raise SchemaError(f"bad complex matrix: {exc}") from exc


def period_data_to_json(pd: PeriodData) -> dict:
    b = pd.basis
    return {
        "schema": SCHEMA,
        "point": None if pd.point is None else point_to_json(pd.point),
        "config": pd.config.to_json(),
        "omega1": encode_matrix(pd.omega1),
        "omega2": encode_matrix(pd.omega2),
        "Z": encode_matrix(pd.Z),
        "quadrature_error": pd.quadrature_error,
        "symmetry_residual": pd.symmetry_residual,
        "min_imag_eig": pd.min_imag_eig,
        "basis": {
            "branch_points": [[float(z.real), float(z.imag)] for z in b.branch_points],
            "direction": [b.direction.real, b.direction.imag],
            "cycles": [[c.start, c.end, c.kind, c.sheet] for c in b.cycles],
            "intersection_matrix": b.intersection_matrix.tolist(),
            "transform_to_symplectic": b.transform_to_symplectic.tolist(),
            "odd": b.odd,
        },
        "chain": encode_matrix(pd.chain),
    }


def period_data_from_json(obj: dict) -> PeriodData:
    from .periods import Cycle

    try:
        b = obj["basis"]
        basis = CycleBasis(
            branch_points=np.array([complex(*z) for z in b["branch_points"]]),
            direction=complex(*b["direction"]),
            cycles=tuple(Cycle(*c) for c in b["cycles"]),
            intersection_matrix=np.array(b["intersection_matrix"], dtype=np.int64),
            transform_to_symplectic=np.array(b["transform_to_symplectic"], dtype=np.int64),
            odd=bool(b["odd"]),
        )
        point = None if obj.get("point") is None else point_from_json(obj["point"])
        cfg = QuadratureConfig.from_json(obj.get("config", {}))
        return assemble(
            decode_matrix(obj["chain"]), basis, quadrature_error=float(obj["quadrature_error"]), point=point, config=cfg
        )
    except KeyError as exc:
        raise SchemaError(f"missing field {exc} in period data") from exc
