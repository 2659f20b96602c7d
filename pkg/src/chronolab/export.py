"""Deterministic text outputs: JSON with 17-significant-digit floats, Matrix Market."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np

from .exact import GaussRat
from .timeop import TruncatedOperator


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else "null"
    if isinstance(obj, (Fraction, GaussRat)):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text; floats use 17 significant digits, non-finite floats become null."""
    return _encode(obj, indent, 0) + "\n"


def sidecar(T: TruncatedOperator) -> dict:
    fro = T.frobenius_sq()
    return {
        "spectrum_id": T.spectrum_id,
        "N": T.N,
        "M": T.M,
        "hbar": T.hbar if not isinstance(T.hbar, Fraction) else str(T.hbar),
        "arithmetic": T.arithmetic.value,
        "frobenius_sq": float(fro),
        "frobenius_sq_exact": str(fro) if isinstance(fro, Fraction) else None,
        "alpha_applied": T.alpha_applied,
    }


def matrix_market_text(T: TruncatedOperator) -> str:
    nz = T.nonzeros()
    lines = ["%%MatrixMarket matrix coordinate complex general",
             f"% chronolab truncation spectrum_id={T.spectrum_id} N={T.N} M={T.M}",
             f"{T.dim} {T.dim} {len(nz)}"]
    for i, j, v in nz:
        c = complex(v)
        lines.append(f"{i + 1} {j + 1} {fmt_float(c.real)} {fmt_float(c.imag)}")
    return "\n".join(lines) + "\n"


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def export_matrix(T: TruncatedOperator, path: Union[str, Path]) -> Path:
    """Write Matrix Market coordinate data (1-based, sorted) plus a JSON sidecar."""
    path = Path(path)
    path.write_text(matrix_market_text(T), encoding="utf-8")
    side = sidecar_path(path)
    side.write_text(dumps(sidecar(T)), encoding="utf-8")
    return side
