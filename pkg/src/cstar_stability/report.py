"""Serialization of run artifacts to CSV and JSON.

Floats are written with 17 significant digits so every value round-trips
exactly; non-finite values use the ``Infinity`` / ``NaN`` tokens that
``json.loads`` accepts. Output is a pure function of the artifacts, so equal
runs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

CSV_HEADER = "n,max_cauchy_step,max_bound_margin_min,orbit_distance,rate_estimate"


class ReportIOError(OSError):
    pass


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    # keep integral values floats so parsing returns the same type and sign of zero
    return text if any(c in text for c in ".en") else text + ".0"


def _plain(obj):
    """Convert report objects into JSON-ready builtins."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump(obj, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _dump(v, indent + 1) for v in obj) + "\n" + pad + "]"
    return json.dumps(obj)


def dumps(obj) -> str:
    return _dump(_plain(obj)) + "\n"


def artifacts_to_dict(art) -> dict:
    out = {"config": art.config}
    ax = art.axioms
    out["axioms"] = None if ax is None else {
        "space": ax.space, "tuples": ax.tuples, "tol": ax.tol,
        "residuals": ax.residuals, "passed": ax.passed,
    }
    ad = art.admissibility
    out["admissibility"] = None if ad is None else {
        "regime": ad.regime, "lipschitz": ad.L, "ratios": ad.ratios, "decaying": ad.decaying,
        "min_psi_slack": ad.min_psi_slack, "psi_scaling_ok": ad.psi_scaling_ok,
        "admissible": ad.admissible,
    }
    env = art.envelope
    out["envelope"] = None if env is None else {
        "violations": env.violations,
        "min_margin": env.min_margin,
        "rows": [
            {"mu": r.mu, "args": [list(a) if a else None for a in r.args],
             "defect": r.defect, "phi": r.phi, "margin": r.margin}
            for r in env.rows
        ],
    }
    ob = art.orbit
    out["orbit"] = None if ob is None else {
        "distances": ob.distances, "branch": ob.branch, "n0": ob.n0,
        "contraction_ok": ob.contraction_ok,
    }
    st = art.stabilization
    out["stabilization"] = None if st is None else {
        "regime": st.regime, "lipschitz": st.L, "depth": st.depth, "tol": st.tol,
        "cauchy_step": st.cauchy_step, "raw_cauchy_step": st.raw_cauchy_step,
        "additivity_residual": st.additivity_residual,
        "mu_additivity_residual": st.mu_additivity_residual,
        "mu_linearity_residual": st.mu_linearity_residual,
        "derivation_residual": st.derivation_residual,
        "rate_estimate": st.rate, "rate_estimates": st.rates,
        "branch": st.branch, "violation_count": st.violation_count,
        "envelope_violations": st.envelope_violations,
        "step_history": st.step_history, "margin_history": st.margin_history,
        "notes": st.notes,
        "points": [
            {"label": list(lab), "distance": float(d), "bound": float(b), "margin": float(b - d)}
            for lab, d, b in zip(st.labels, st.distance.reshape(-1), st.bound.reshape(-1))
        ],
    }
    out["uniqueness"] = art.uniqueness
    out["skipped"] = art.skipped
    out["violations"] = art.violations
    return _plain(out)


def convergence_rows(art) -> list[list[float]]:
    st = art.stabilization
    if st is None:
        return []
    orbit = art.orbit.distances if art.orbit is not None else st.orbit
    rows = []
    for n in range(st.depth):
        d = orbit[n] if n < len(orbit) else math.nan
        prev = orbit[n - 1] if 0 < n <= len(orbit) else math.nan
        rate = d / prev if n < len(orbit) and 0 < prev < math.inf else math.nan
        rows.append([n, st.step_history[n], st.margin_history[n], d, rate])
    return rows


def to_csv(art) -> str:
    lines = [CSV_HEADER]
    for n, *vals in convergence_rows(art):
        lines.append(",".join([str(n)] + [fmt(v) for v in vals]))
    return "\n".join(lines) + "\n"


def render(art, format: str = "json") -> str:
    if format == "csv":
        return to_csv(art)
    if format == "json":
        return dumps(artifacts_to_dict(art))
    raise ValueError(f"unknown format {format!r}")


def emit_report(art, format: str, path) -> None:
    try:
        Path(path).write_text(render(art, format))
    except OSError as err:
        raise ReportIOError(f"cannot write report to {path}: {err}") from err
