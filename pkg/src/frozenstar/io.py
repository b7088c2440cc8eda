"""Run configuration and file formats.

Tables are CSV with a fixed column order and floats written with 17
significant digits; structured data is JSON with sorted keys.  Both are
byte-for-byte reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError
from .potential import DEFAULT_M, MIN_GRID, EdgeSpec, GraphSpec, _check_frozen_args

COMMANDS = ("forward", "charfn", "kernels", "invert", "roundtrip", "oracle")

SPECTRUM_COLUMNS = ("k", "j", "rho", "lambda", "cluster_flag")
EIGENVALUE_COLUMNS = ("k", "j", "mu")
KERNEL_COLUMNS = ("t", "N", "W")
CHARFN_COLUMNS = ("lambda", "product", "recursive", "determinant")


@dataclass(frozen=True, eq=False)
class RunConfig:
    command: str | None = None
    graph: GraphSpec | None = None
    known_edges: tuple | None = None
    F_p: tuple | None = None
    eigenvalues: str | None = None
    M: int = DEFAULT_M
    K: int = 40
    K_min: int = 4
    D: int | None = None
    k_max: int = 20
    rho_max: float | None = None
    step: float | None = None
    d00_threshold: float = 1e-10
    tau_sin: float | None = None
    rescaled: bool = True
    w_basis: str = "sin"
    fd_N: int = 2000
    fd_count: int = 8
    fd_method: str = "sparse"
    lambdas: tuple = field(default_factory=lambda: tuple(np.linspace(0.1, 50.0, 50).tolist()))
    base_dir: str = "."

    def known(self) -> tuple:
        if self.known_edges is not None:
            return self.known_edges
        if self.graph is None:
            raise InputError("config needs 'graph' or 'known_edges'")
        return self.graph.known_edges

    def frozen_set(self) -> tuple:
        if self.F_p is not None:
            return self.F_p
        if self.graph is None:
            raise InputError("config needs 'graph' or 'F_p'")
        return tuple(self.graph.edges[-1].frozen_args.tolist())

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p


# (type check, range check, description) per numeric knob
def _int_at_least(lo):
    return (lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= lo,
            f"an integer >= {lo}")


def _pos_float():
    return (lambda v: isinstance(v, (int, float)) and not isinstance(v, bool)
            and math.isfinite(v) and v > 0, "a positive number")


_KNOBS = {
    "M": _int_at_least(MIN_GRID),
    "K": _int_at_least(1),
    "K_min": _int_at_least(1),
    "D": _int_at_least(1),
    "k_max": _int_at_least(1),
    "rho_max": (lambda v: isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0.05,
                "a number > 0.05"),
    "step": (lambda v: isinstance(v, (int, float)) and not isinstance(v, bool) and 0 < v <= 0.01,
             "a number in (0, 0.01]"),
    "d00_threshold": _pos_float(),
    "tau_sin": _pos_float(),
    "fd_N": _int_at_least(100),
    "fd_count": (lambda v: isinstance(v, int) and not isinstance(v, bool) and 1 <= v <= 30,
                 "an integer in [1, 30]"),
    "rescaled": (lambda v: isinstance(v, bool), "true or false"),
    "w_basis": (lambda v: v in ("sin", "sin_half"), "'sin' or 'sin_half'"),
    "fd_method": (lambda v: v in ("sparse", "dense"), "'sparse' or 'dense'"),
    "command": (lambda v: v in COMMANDS, "one of " + ", ".join(COMMANDS)),
    "eigenvalues": (lambda v: isinstance(v, str), "a file path"),
}
_NULLABLE = {"D", "rho_max", "step", "tau_sin"}
_STRUCTURED = {"graph", "known_edges", "F_p", "lambdas"}


def _load_graph(value, base_dir):
    if isinstance(value, str):
        path = Path(value) if Path(value).is_absolute() else Path(base_dir) / value
        try:
            value = json.loads(path.read_text())
        except OSError as exc:
            raise InputError(f"graph: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"graph: {path} is not valid JSON: {exc}") from exc
    if not isinstance(value, dict):
        raise InputError("graph: expected an object with 'edges' or a path to one")
    return GraphSpec.from_json(value)


def parse_config(document: str, base_dir: str = ".") -> RunConfig:
    """Validate a JSON run configuration and fill in defaults."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    unknown = set(doc) - set(_KNOBS) - _STRUCTURED
    if unknown:
        raise InputError(f"unknown config key(s): {sorted(unknown)}")
    kw = {"base_dir": str(base_dir)}
    for key, (ok, expected) in _KNOBS.items():
        if key not in doc:
            continue
        value = doc[key]
        if value is None and key in _NULLABLE:
            kw[key] = None
            continue
        if not ok(value):
            raise InputError(f"config key '{key}' must be {expected}, got {value!r}")
        kw[key] = value
    try:
        if "graph" in doc:
            kw["graph"] = _load_graph(doc["graph"], base_dir)
        if "known_edges" in doc:
            if not isinstance(doc["known_edges"], list) or not doc["known_edges"]:
                raise InputError("config key 'known_edges' must be a non-empty list of edges")
            kw["known_edges"] = tuple(EdgeSpec.from_json(e) for e in doc["known_edges"])
        if "F_p" in doc:
            if not isinstance(doc["F_p"], list):
                raise InputError("config key 'F_p' must be a list of numbers in (0, pi)")
            kw["F_p"] = tuple(_check_frozen_args(doc["F_p"]).tolist())
        if "lambdas" in doc:
            lam = np.asarray(doc["lambdas"], dtype=float).reshape(-1)
            if lam.size == 0 or not np.all(np.isfinite(lam)):
                raise InputError("config key 'lambdas' must be a non-empty list of finite numbers")
            kw["lambdas"] = tuple(lam.tolist())
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed config value: {exc}") from exc
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise InputError(f"row has {len(row)} fields, expected {len(columns)}")
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def json_text(doc) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"


def write_outputs(results: dict, out_dir) -> list:
    """Write ``{filename: table_or_doc}``; a table is ``(columns, rows)``.

    Files ending in ``.csv`` take tables, everything else is JSON.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(results):
        payload = results[name]
        text = csv_text(*payload) if name.endswith(".csv") else json_text(payload)
        path = out / name
        path.write_text(text)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# reading back
# ---------------------------------------------------------------------------

def read_csv(path, columns) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != tuple(columns):
        raise InputError(f"{path}: expected header {','.join(columns)}")
    return rows[1:]


def read_eigenvalues_csv(path):
    """``(mu0, mu1)`` ordered by ``k``; ``j = 0`` is the near-integer sequence."""
    seqs = {0: {}, 1: {}}
    for n, row in enumerate(read_csv(path, EIGENVALUE_COLUMNS), start=2):
        try:
            k, j, mu = int(row[0]), int(row[1]), float(row[2])
        except (ValueError, IndexError) as exc:
            raise InputError(f"{path}:{n}: malformed row {row!r}") from exc
        if j not in seqs or k < 1:
            raise InputError(f"{path}:{n}: need k >= 1 and j in {{0, 1}}, got k={k}, j={j}")
        if k in seqs[j]:
            raise InputError(f"{path}:{n}: duplicate entry k={k}, j={j}")
        seqs[j][k] = mu
    out = []
    for j in (0, 1):
        ks = sorted(seqs[j])
        if ks != list(range(1, len(ks) + 1)):
            raise InputError(f"{path}: j={j} entries must cover k = 1..K without gaps")
        out.append(np.array([seqs[j][k] for k in ks]))
    return out[0], out[1]


def read_kernels_csv(path):
    rows = read_csv(path, KERNEL_COLUMNS)
    a = np.array(rows, dtype=float).reshape(-1, 3)
    return a[:, 0], a[:, 1], a[:, 2]


def read_spectrum_csv(path):
    rows = read_csv(path, SPECTRUM_COLUMNS)
    return [(int(r[0]), int(r[1]), float(r[2]), float(r[3]), r[4] == "1") for r in rows]
