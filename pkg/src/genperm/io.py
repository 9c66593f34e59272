"""JSON and CSV serialisation.

Schemas::

    step permuton: {"lambda": x, "x_cuts": [...], "y_cuts": [...], "cell_mass": [[...]]}
    selection:     {"n": int, "m": int, "values": [...]}

Numbers may be JSON numbers or ``"p/q"`` strings.  When every decimal
literal in a document is short (at most 12 significant digits) they are read
as the rationals they spell, so hand-written fixtures stay exact; otherwise
they are read as floats.  Exact values are written back as ``"p/q"`` and
floats with ``repr``, so both round-trip without loss.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import GenpermError, OrderedSelection, Permutation, StepPermuton


class FormatError(GenpermError, ValueError):
    """A file parsed but does not follow the expected schema."""


def encode(v):
    """JSON-ready form of a value (recursively)."""
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, dict):
        return {str(k): encode(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [encode(x) for x in v]
    if isinstance(v, Permutation):
        return list(v.values)
    if isinstance(v, OrderedSelection):
        return selection_to_dict(v)
    if isinstance(v, StepPermuton):
        return permuton_to_dict(v)
    return v


def dumps(obj, indent: int | None = 2) -> str:
    return json.dumps(encode(obj), indent=indent)


_SHORT_DIGITS = 12


def _significant_digits(lit: str) -> int:
    mant = lit.lower().split("e")[0].lstrip("-").replace(".", "")
    return len(mant.lstrip("0").rstrip("0")) or 1


def loads(text: str, exact: bool | None = None):
    """Parse JSON; ``exact=None`` picks rationals for short decimals only."""
    if exact is None:
        lits = []
        json.loads(text, parse_float=lambda s: lits.append(s) or 0.0)
        exact = all(_significant_digits(s) <= _SHORT_DIGITS for s in lits)
    return json.loads(text, parse_float=Fraction if exact else float)


def permuton_to_dict(mu: StepPermuton) -> dict:
    return {
        "lambda": encode(mu.lam),
        "x_cuts": encode(mu.x_cuts),
        "y_cuts": encode(mu.y_cuts),
        "cell_mass": encode(mu.cell_mass),
    }


def permuton_from_dict(d: dict) -> StepPermuton:
    try:
        return StepPermuton(d["x_cuts"], d["y_cuts"], d["cell_mass"], d.get("lambda"))
    except KeyError as e:
        raise FormatError(f"step permuton is missing field {e}") from None
    except (TypeError, ZeroDivisionError) as e:
        raise FormatError(f"malformed step permuton: {e}") from None


def selection_to_dict(nu: OrderedSelection) -> dict:
    return {"n": nu.n, "m": nu.m, "values": list(nu.values)}


def selection_from_dict(d: dict) -> OrderedSelection:
    try:
        n, values = d["n"], d["values"]
        m = d.get("m", len(values))
    except (KeyError, TypeError) as e:
        raise FormatError(f"selection is missing field {e}") from None
    if not all(isinstance(v, int) for v in [n, m, *values]):
        raise FormatError("selection fields must be integers")
    return OrderedSelection(n, m, tuple(values))


def _read_json(path):
    text = Path(path).read_text()
    try:
        return loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from None


def read_permuton(path) -> StepPermuton:
    return permuton_from_dict(_read_json(path))


def read_selection(path) -> OrderedSelection:
    return selection_from_dict(_read_json(path))


def read_measure(path) -> StepPermuton:
    """A step permuton file, or a selection file taken as its embedding."""
    from .embed import embed_selection

    d = _read_json(path)
    if not isinstance(d, dict):
        raise FormatError(f"{path}: expected a JSON object")
    if "cell_mass" in d:
        return permuton_from_dict(d)
    if "values" in d:
        return embed_selection(selection_from_dict(d))
    raise FormatError(f"{path}: neither a step permuton nor a selection")


def write_json(obj, path=None) -> str:
    text = dumps(obj) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# -- CSV -------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse_value(text: str):
    """Inverse of the CSV cell encoding for numeric cells."""
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        return Fraction(text)
    try:
        return float(text)
    except ValueError:
        return text


def from_csv(text: str):
    """``(header, rows)`` with numeric cells decoded."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty CSV") from None
    return header, [[parse_value(c) for c in row] for row in reader]

