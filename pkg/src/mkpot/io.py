"""File formats: exact form JSON, grid CSV, analysis/verdict reports.

Form JSON:  {"degree": k, "terms": [{"blades": [i, j, k], "coeff": ...}]}
with coeff either an exact rational string "p/q", a polynomial term list
[{"exponents": [e1..e6], "coeff": "p/q"}], or (extension) a trig term list
[{"freq": [k1..k6], "fn": "cos"|"sin", "coeff": "p/q"}].

Grid CSV: a header line "axes,N,degree,blade-list" (axes space-separated,
blades as digit strings joined by ';'), then one line per blade with the
row-major samples.

Reports are serialized as canonical JSON: sorted keys, two-space indent,
trailing newline; float repr is deterministic, so identical configurations
produce byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .blades import indices_from_mask, mask_from_indices
from .forms import Form
from .gridforms import GridForm
from .scalars import PolyScalar, TrigScalar


def fraction_to_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def fraction_from_str(s: str) -> Fraction:
    return Fraction(s)


def _coeff_to_json(c):
    if isinstance(c, Fraction):
        return fraction_to_str(c)
    if isinstance(c, PolyScalar):
        return [
            {"exponents": list(e), "coeff": fraction_to_str(v)}
            for e, v in c.terms.items()
        ]
    if isinstance(c, TrigScalar):
        return [
            {"freq": list(freq), "fn": "cos" if kind == 0 else "sin",
             "coeff": fraction_to_str(v)}
            for (freq, kind), v in c.terms.items()
        ]
    raise TypeError(f"cannot serialize coefficient of type {type(c).__name__}")


def _coeff_from_json(obj):
    if isinstance(obj, str):
        return fraction_from_str(obj)
    if isinstance(obj, list):
        if not obj:
            return Fraction(0)
        if "exponents" in obj[0]:
            return PolyScalar({
                tuple(t["exponents"]): fraction_from_str(t["coeff"]) for t in obj
            })
        if "freq" in obj[0]:
            return TrigScalar({
                (tuple(t["freq"]), 0 if t["fn"] == "cos" else 1): fraction_from_str(t["coeff"])
                for t in obj
            })
    raise ValueError(f"unrecognized coefficient payload: {obj!r}")


def form_to_json(form: Form) -> dict:
    return {
        "degree": form.degree,
        "terms": [
            {"blades": list(indices_from_mask(mask)), "coeff": _coeff_to_json(c)}
            for mask, c in form.coeffs.items()
        ],
    }


def form_from_json(obj: dict) -> Form:
    degree = int(obj["degree"])
    coeffs = {}
    for term in obj.get("terms", []):
        mask = mask_from_indices(term["blades"])
        coeffs[mask] = coeffs.get(mask, Fraction(0)) + _coeff_from_json(term["coeff"])
    return Form(degree, coeffs)


def write_form(form: Form, path) -> None:
    Path(path).write_text(dump_report(form_to_json(form)))


def read_form(path) -> Form:
    return form_from_json(json.loads(Path(path).read_text()))


def read_potential(path):
    """A degree-0 form file read back as a bare scalar."""
    form = read_form(path)
    if form.degree != 0:
        raise ValueError(f"potential file must have degree 0, got {form.degree}")
    return form.coeffs.get(0, Fraction(0))


# ---------------------------------------------------------------------------
# grid CSV
# ---------------------------------------------------------------------------

def write_grid_csv(grid: GridForm, path) -> None:
    lines = []
    axes = " ".join(str(a) for a in grid.axes)
    blades = ";".join("".join(str(i) for i in indices_from_mask(m)) for m in sorted(grid.coeffs))
    lines.append(f"{axes},{grid.n},{grid.degree},{blades}")
    for mask in sorted(grid.coeffs):
        flat = grid.coeffs[mask].reshape(-1)
        lines.append(",".join(repr(float(x)) for x in flat))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path) -> GridForm:
    text = Path(path).read_text().strip().splitlines()
    axes_s, n_s, degree_s, blades_s = text[0].split(",")
    axes = tuple(int(a) for a in axes_s.split())
    n = int(n_s)
    degree = int(degree_s)
    blade_masks = []
    if blades_s:
        for token in blades_s.split(";"):
            blade_masks.append(mask_from_indices(int(ch) for ch in token))
    elif degree == 0:
        blade_masks = [0]
    shape = (n,) * len(axes)
    coeffs = {}
    for mask, line in zip(blade_masks, text[1:]):
        arr = np.array([float(x) for x in line.split(",")])
        coeffs[mask] = arr.reshape(shape)
    return GridForm(degree, axes, n, coeffs)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def dump_report(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_report(obj, path) -> None:
    Path(path).write_text(dump_report(obj))


def stable_analysis_to_json(analysis) -> dict:
    J = analysis.J_array
    return {
        "lambda": fraction_to_str(analysis.lam),
        "verdict": analysis.verdict,
        "exact": analysis.exact,
        "J": None if J is None else [[float(x) for x in row] for row in J],
        "dual": None if analysis.dual is None else form_to_json(analysis.dual),
    }


def write_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _csv_cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)
