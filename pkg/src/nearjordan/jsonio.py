"""JSON and CSV encoding of matrices, families and solver results.

Complex scalars are written as ``[re, im]`` pairs and every float with 17
significant digits, so a dump/load round trip is exact.
"""

import csv
import io
import json
import math
from typing import Any, Dict, List

import numpy as np

from nearjordan.families import AffineFamily

__all__ = [
    "dumps",
    "encode",
    "decode_matrix",
    "decode_vector",
    "family_to_dict",
    "family_from_dict",
    "matrix_to_dict",
    "matrix_from_dict",
    "result_to_dict",
    "to_csv",
]


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text; floats use 17 significant digits."""
    out = io.StringIO()
    _write(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _write(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    obj = encode(obj)
    if isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.write(f"{pad}{json.dumps(str(k))}: ")
            _write(v, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.write("[]")
        elif all(not isinstance(v, (list, dict)) for v in obj):
            out.write("[" + ", ".join(_scalar(v) for v in obj) + "]")
        else:
            out.write("[\n")
            for i, v in enumerate(obj):
                out.write(pad)
                _write(v, out, indent, level + 1)
                out.write(",\n" if i < len(obj) - 1 else "\n")
            out.write(end + "]")
    else:
        out.write(_scalar(obj))


def _scalar(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v)
    return json.dumps(v)


def encode(obj) -> Any:
    """Convert numpy/complex values into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {k: encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return encode(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _decode_scalar(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex entries must be [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def decode_vector(data) -> np.ndarray:
    return np.array([_decode_scalar(v) for v in data], dtype=complex)


def decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("matrix must be a non-empty list of rows")
    A = np.array([[_decode_scalar(v) for v in r] for r in rows], dtype=complex)
    if A.ndim != 2:
        raise ValueError("matrix rows have inconsistent lengths")
    return A


def matrix_to_dict(A) -> Dict[str, Any]:
    A = np.asarray(A, dtype=complex)
    return {"m": A.shape[0], "entries": A}


def matrix_from_dict(data) -> np.ndarray:
    A = decode_matrix(data["entries"])
    m = data.get("m", A.shape[0])
    if A.shape != (m, m):
        raise ValueError(f"matrix declared m={m} but entries have shape {A.shape}")
    return A


def family_to_dict(family: AffineFamily) -> Dict[str, Any]:
    return {
        "m": family.m,
        "n": family.n,
        "domain": family.domain,
        "A0": family.A0,
        "derivs": family.D,
    }


def family_from_dict(data) -> AffineFamily:
    """Affine family from ``{"m", "n", "domain", "A0", "derivs"}``."""
    for key in ("A0", "derivs"):
        if key not in data:
            raise ValueError(f"family description lacks {key!r}")
    A0 = decode_matrix(data["A0"])
    derivs = [decode_matrix(D) for D in data["derivs"]]
    m = data.get("m", A0.shape[0])
    n = data.get("n", len(derivs))
    if A0.shape != (m, m):
        raise ValueError(f"family declared m={m} but A0 has shape {A0.shape}")
    if len(derivs) != n:
        raise ValueError(f"family declared n={n} but lists {len(derivs)} derivatives")
    if n == 0:
        raise ValueError("family needs at least one parameter")
    return AffineFamily(A0, derivs, domain=data.get("domain", "complex"), name=data.get("name", ""))


def _point(x):
    x = np.asarray(x)
    if np.iscomplexobj(x) and not np.any(x.imag):
        return x.real
    return x


def result_to_dict(result) -> Dict[str, Any]:
    """Plain-data view of a :class:`~nearjordan.newton.NewtonResult`."""
    chain = None
    if result.chain is not None:
        chain = {
            "lambda": complex(result.chain.lam),
            "U": result.chain.U,
            "residual": result.chain.residual,
            "cond_U": result.chain.cond,
        }
    iterations = []
    for rec in result.iterations:
        iterations.append(
            {
                "iteration": rec.iteration,
                "point": _point(rec.point),
                "q": rec.q,
                "cluster": list(rec.cluster),
                "cluster_eigenvalues": rec.cluster_eigenvalues,
                "separation": rec.separation,
                "step_norm": rec.step_norm,
                "lambda_app": complex(rec.lambda_app),
                "distance": rec.distance,
            }
        )
    out = {
        "converged": bool(result.converged),
        "message": result.message,
        "mode": result.mode,
        "d": result.d,
        "p0": _point(result.p0),
        "p_star": _point(result.p_star),
        "distance": result.distance,
        "one_step_distance": result.one_step_distance,
        "n_iterations": result.n_iterations,
        "q_star": result.q_star,
        "chain": chain,
        "iterations": iterations,
    }
    if result.mode == "matrix":
        out["delta"] = _point(result.p_star - result.p0)
    return out


def to_csv(rows: List[Dict[str, Any]]) -> str:
    """CSV with one line per row dict; complex cells become re/im column pairs."""
    flat = []
    for row in rows:
        r = {}
        for k, v in row.items():
            if isinstance(v, (complex, np.complexfloating)):
                r[f"{k}_re"], r[f"{k}_im"] = float(v.real), float(v.imag)
                continue
            v = encode(v)
            if isinstance(v, list):
                r[k] = json.dumps(v)
            else:
                r[k] = v
        flat.append(r)
    fields: List[str] = []
    for r in flat:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in flat:
        w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
