"""JSON and CSV formats for every input and report.

Infinite values are written as the string ``"inf"``. Floats are emitted with
``repr``, the shortest decimal that reads back to the same double.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .concepts import FormalContext
from .entropy import JointDistribution
from .errors import LatdivError, ParseError
from .lattice import Lattice
from .measure import DiscreteMeasure, Partition, RefinementSequence


def _num(x: Any, where: str) -> float:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ParseError(f"{where}: expected a number or 'inf', got {x!r}")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _get(doc: Mapping, key: str, kind: str):
    if not isinstance(doc, Mapping) or key not in doc:
        raise ParseError(f"{kind} document needs a {key!r} field")
    return doc[key]


def load_json(path: str | os.PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as e:
        raise ParseError(f"no such file: {path}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON ({e})") from e


def _wrap(kind: str, fn, *args):
    try:
        return fn(*args)
    except LatdivError:
        raise
    except (TypeError, ValueError) as e:
        raise ParseError(f"malformed {kind} document: {e}") from e


def lattice_from_json(doc: Mapping) -> Lattice:
    elements = _get(doc, "elements", "lattice")
    covers = _get(doc, "covers", "lattice")
    if not isinstance(elements, list) or not isinstance(covers, list):
        raise ParseError("lattice 'elements' and 'covers' must be arrays")
    for c in covers:
        if not isinstance(c, list) or len(c) != 2:
            raise ParseError(f"cover {c!r} is not a [lower, upper] pair")
    return Lattice([str(e) for e in elements], [(str(a), str(b)) for a, b in covers])


def context_from_json(doc: Mapping) -> FormalContext:
    objs = _get(doc, "objects", "context")
    attrs = _get(doc, "attributes", "context")
    inc = _get(doc, "incidence", "context")
    for pair in inc:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"incidence entry {pair!r} is not a [object, attribute] pair")
    return FormalContext(objs, attrs, [tuple(p) for p in inc])


def valuation_from_json(doc: Mapping, lattice: Lattice | None = None, base: Path | None = None) -> tuple[Lattice, dict]:
    """Returns ``(lattice, values)``.

    The ``lattice`` field may be an inline lattice document or a path, resolved
    relative to ``base``. It may be omitted when ``lattice`` is supplied.
    """
    values = _get(doc, "values", "valuation")
    if not isinstance(values, Mapping):
        raise ParseError("valuation 'values' must be an object")
    ref = doc.get("lattice") if isinstance(doc, Mapping) else None
    if isinstance(ref, str):
        p = Path(ref)
        if base is not None and not p.is_absolute():
            p = base / p
        ref = load_json(p)
    if ref is not None:
        own = lattice_from_json(ref)
        if lattice is not None and set(own.elements) != set(lattice.elements):
            raise ParseError("valuation's lattice differs from the one given")
        lattice = lattice or own
    if lattice is None:
        raise ParseError("valuation has no lattice and none was given")
    return lattice, {str(k): _num(v, f"value of {k!r}") for k, v in values.items()}


def valuation_to_json(values: Mapping[str, float], lattice: Lattice | None = None) -> dict:
    out: dict = {}
    if lattice is not None:
        out["lattice"] = lattice.to_json()
    out["values"] = {k: _enc(v) for k, v in values.items()}
    return out


def joint_from_json(doc: Mapping) -> JointDistribution:
    variables = _get(doc, "variables", "joint")
    outcomes = _get(doc, "outcomes", "joint")
    parsed = []
    for o in outcomes:
        vals = _get(o, "values", "outcome")
        parsed.append((tuple(vals), _num(_get(o, "p", "outcome"), "p")))
    return JointDistribution(variables, parsed)


def measure_from_json(doc: Mapping) -> DiscreteMeasure:
    n = _get(doc, "n", "measure")
    weights = [_num(w, "weight") for w in _get(doc, "weights", "measure")]
    if not isinstance(n, int) or n != len(weights):
        raise ParseError(f"measure 'n' = {n!r} does not match {len(weights)} weights")
    cells = doc.get("cells")
    return DiscreteMeasure(np.array(weights), None if cells is None else np.array(cells, dtype=float))


def refinement_from_json(doc: Mapping, n: int | None = None) -> RefinementSequence:
    levels = _get(doc, "levels", "refinement")
    if not isinstance(levels, list) or not levels:
        raise ParseError("refinement 'levels' must be a nonempty array")
    parts = []
    for lev in levels:
        if not isinstance(lev, list):
            raise ParseError("each refinement level must be an array of blocks")
        parts.append(Partition(lev, n))
    return RefinementSequence(tuple(parts))


def load_test_sets(doc: Any) -> list[list[int]]:
    sets = doc.get("sets", doc) if isinstance(doc, Mapping) else doc
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise ParseError("test sets must be an array of index arrays")
    return [[int(i) for i in s] for s in sets]


def parse(kind: str, fn, doc, *args):
    return _wrap(kind, fn, doc, *args)


def _enc(x: Any) -> Any:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_enc(v) for v in x.tolist()]
    if isinstance(x, Mapping):
        return {str(k): _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_enc(v) for v in seq]
    return x


def dumps(doc: Any) -> str:
    return json.dumps(_enc(doc), indent=2, sort_keys=False) + "\n"


def format_cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "inf" if x == math.inf else repr(x)
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_cell(r.get(h)) for h in header])
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
