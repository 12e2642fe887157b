"""Tuple files and report serialization.

Tuple files are JSON documents with ``format_version`` 1 and ``kind``
``"dense"`` or ``"lattice"``. Complex numbers are ``[re, im]`` pairs;
exact lattice parameters are integers or ``"p/q"`` strings.

Dense::

    {"format_version": 1, "kind": "dense", "dim": 3,
     "operators": [[[[re, im], ...], ...], ...],      # row-major, one per T_i
     "twist": [{"i": 1, "j": 2, "scalar": [re, im]},  # or "matrix": [...]
               ...],
     "support": [0, 1, ...],                          # optional coordinate support
     "tolerance": {"residual_tol": 1e-8},             # optional overrides
     "seed": 7}                                       # optional, echoed in reports

Lattice::

    {"format_version": 1, "kind": "lattice",
     "shape": {"d_plus": 2, "d_bi": 0}, "window": 8,
     "operators": [{"name": "M_z1", "A": [[1, 0], [0, 1]], "delta": [1, 0],
                    "weight": {"modulus": "1", "radii": ["1", "1"],
                               "turns0": "0", "turns": ["0", "0"]}}, ...],
     "twists": [{"i": 1, "j": 2, "operator": {...}}]}
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import ParseError
from .lattice import LatticeShape, LatticeTuple, MonomialOperator, Weight
from .subspace import SubspaceBasis, ToleranceProfile
from .twisted import TwistFamily

FORMAT_VERSION = 1
SIG_DIGITS = 12
# residuals below this are numerical noise and are printed as 0
FLUSH_BELOW = 1e-11


@dataclass(frozen=True, eq=False)
class TupleFile:
    kind: str
    payload: object
    tolerance: dict
    seed: object = None
    name: str = ""
    window: int | None = None
    digest: str = ""

    def tol(self, base: ToleranceProfile) -> ToleranceProfile:
        return replace(base, **self.tolerance) if self.tolerance else base


@dataclass(frozen=True, eq=False)
class DenseTuple:
    ops: list
    twist: TwistFamily
    support: SubspaceBasis | None


def _fail(path, msg):
    raise ParseError(msg, position=path)


def _get(obj, key, path, types=None):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if key not in obj:
        _fail(f"{path}.{key}", "missing field")
    val = obj[key]
    if types is not None and not isinstance(val, types):
        _fail(f"{path}.{key}", f"expected {_typename(types)}, got {type(val).__name__}")
    return val


def _typename(types):
    types = types if isinstance(types, tuple) else (types,)
    return " or ".join(t.__name__ for t in types)


def _complex(v, path):
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        z = complex(v[0], v[1])
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            _fail(path, "non-finite complex entry")
        return z
    _fail(path, "expected a complex number [re, im]")


def _matrix(v, dim, path):
    if not isinstance(v, list) or len(v) != dim:
        _fail(path, f"expected {dim} rows")
    M = np.empty((dim, dim), dtype=complex)
    for r, row in enumerate(v):
        if not isinstance(row, list) or len(row) != dim:
            _fail(f"{path}[{r}]", f"expected {dim} entries")
        for c, z in enumerate(row):
            M[r, c] = _complex(z, f"{path}[{r}][{c}]")
    return M


def _fraction(v, path):
    if isinstance(v, bool):
        _fail(path, "expected a number or 'p/q' string")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            _fail(path, f"bad rational {v!r}")
    _fail(path, "expected a number or 'p/q' string")


def _int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, "expected an integer")
    return v


def _tolerance(obj, path):
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    known = {"rank_rtol": float, "residual_tol": float, "stabilization_window": int}
    out = {}
    for k, v in obj.items():
        if k not in known:
            _fail(f"{path}.{k}", "unknown tolerance field")
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            _fail(f"{path}.{k}", "expected a number")
        out[k] = known[k](v)
    try:
        ToleranceProfile(**out)
    except ValueError as e:
        _fail(path, str(e))
    return out


def _parse_dense(doc):
    dim = _int(_get(doc, "dim", "$"), "$.dim")
    if dim < 1:
        _fail("$.dim", "must be >= 1")
    raw = _get(doc, "operators", "$", list)
    if not raw:
        _fail("$.operators", "need at least one operator")
    ops = [_matrix(M, dim, f"$.operators[{k}]") for k, M in enumerate(raw)]
    n = len(ops)
    units = {}
    for k, entry in enumerate(doc.get("twist", []) or []):
        p = f"$.twist[{k}]"
        i, j = _int(_get(entry, "i", p), f"{p}.i"), _int(_get(entry, "j", p), f"{p}.j")
        if not 1 <= i < j <= n:
            _fail(p, f"need 1 <= i < j <= {n}")
        if "scalar" in entry:
            units[(i, j)] = _complex(entry["scalar"], f"{p}.scalar")
        elif "matrix" in entry:
            units[(i, j)] = _matrix(entry["matrix"], dim, f"{p}.matrix")
        else:
            _fail(p, "needs 'scalar' or 'matrix'")
    support = None
    if doc.get("support") is not None:
        idx = [_int(x, f"$.support[{k}]") for k, x in enumerate(doc["support"])]
        if any(not 0 <= x < dim for x in idx) or len(set(idx)) != len(idx):
            _fail("$.support", "indices must be distinct and in range")
        support = SubspaceBasis.coordinates(dim, sorted(idx))
    return DenseTuple(ops, TwistFamily(n, dim, units), support)


def _parse_weight(obj, d, path):
    if obj is None:
        return Weight(1, (1,) * d, 0, (0,) * d)
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    mod = _fraction(obj.get("modulus", 1), f"{path}.modulus")
    radii = obj.get("radii", [1] * d)
    turns = obj.get("turns", [0] * d)
    for key, seq in (("radii", radii), ("turns", turns)):
        if not isinstance(seq, list) or len(seq) != d:
            _fail(f"{path}.{key}", f"expected {d} entries")
    return Weight(
        mod,
        tuple(_fraction(x, f"{path}.radii[{k}]") for k, x in enumerate(radii)),
        _fraction(obj.get("turns0", 0), f"{path}.turns0"),
        tuple(_fraction(x, f"{path}.turns[{k}]") for k, x in enumerate(turns)),
    )


def _parse_monomial(obj, shape, path):
    d = shape.ndim
    A = _get(obj, "A", path, list)
    delta = _get(obj, "delta", path, list)
    rows = []
    for r, row in enumerate(A):
        if not isinstance(row, list):
            _fail(f"{path}.A[{r}]", "expected a row")
        rows.append([_int(x, f"{path}.A[{r}][{c}]") for c, x in enumerate(row)])
    A = rows
    delta = [_int(x, f"{path}.delta[{k}]") for k, x in enumerate(delta)]
    weight = _parse_weight(obj.get("weight"), d, f"{path}.weight")
    try:
        return MonomialOperator(shape, A, delta, weight, str(obj.get("name", "")))
    except ValueError as e:
        _fail(path, str(e))


def _parse_lattice(doc):
    sh = _get(doc, "shape", "$", dict)
    try:
        shape = LatticeShape(_int(sh.get("d_plus", 0), "$.shape.d_plus"), _int(sh.get("d_bi", 0), "$.shape.d_bi"))
    except ValueError as e:
        _fail("$.shape", str(e))
    raw = _get(doc, "operators", "$", list)
    if not raw:
        _fail("$.operators", "need at least one operator")
    ops = [_parse_monomial(o, shape, f"$.operators[{k}]") for k, o in enumerate(raw)]
    twists = {}
    for k, entry in enumerate(doc.get("twists", []) or []):
        p = f"$.twists[{k}]"
        i, j = _int(_get(entry, "i", p), f"{p}.i"), _int(_get(entry, "j", p), f"{p}.j")
        if not 1 <= i < j <= len(ops):
            _fail(p, f"need 1 <= i < j <= {len(ops)}")
        twists[(i, j)] = _parse_monomial(_get(entry, "operator", p, dict), shape, f"{p}.operator")
    return LatticeTuple(ops, twists, name=str(doc.get("name", "")))


def parse_tuple(text: str | bytes) -> TupleFile:
    """Parse tuple-file text; errors carry the offending position (a
    ``line:column`` for JSON syntax, a JSON path otherwise)."""
    raw = text.encode() if isinstance(text, str) else bytes(text)
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ParseError("not UTF-8", position=f"byte {e.start}") from None
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, position=f"line {e.lineno} column {e.colno}") from None
    if not isinstance(doc, dict):
        _fail("$", "expected an object")
    version = _get(doc, "format_version", "$")
    if version != FORMAT_VERSION:
        _fail("$.format_version", f"unsupported version {version!r}")
    kind = _get(doc, "kind", "$", str)
    if kind == "dense":
        payload = _parse_dense(doc)
    elif kind == "lattice":
        payload = _parse_lattice(doc)
    else:
        _fail("$.kind", f"unknown kind {kind!r}")
    window = doc.get("window")
    if window is not None:
        window = _int(window, "$.window")
    return TupleFile(kind, payload, _tolerance(doc.get("tolerance"), "$.tolerance"),
                     doc.get("seed"), str(doc.get("name", "")), window, digest)


def read_tuple(path) -> TupleFile:
    with open(path, "rb") as fh:
        return parse_tuple(fh.read())


def _z(z):
    z = complex(z)
    return [z.real, z.imag]


def _mat(M):
    return [[_z(z) for z in row] for row in np.asarray(M)]


def _frac(x: Fraction):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def dense_document(ops, twist=None, *, support=None, tolerance=None, seed=None, name="") -> dict:
    """Tuple-file document for dense operators.

    ``twist`` maps ``(i, j)`` to a scalar or matrix (or is a
    :class:`TwistFamily`); identity twists are omitted.
    """
    ops = [np.asarray(T, dtype=complex) for T in ops]
    dim = ops[0].shape[0]
    units = twist.units if isinstance(twist, TwistFamily) else dict(twist or {})
    entries = []
    for (i, j), U in sorted(units.items()):
        if np.ndim(U) == 0:
            entries.append({"i": i, "j": j, "scalar": _z(U)})
        else:
            U = np.asarray(U, dtype=complex)
            if np.array_equal(U, np.eye(dim)):
                continue
            d = np.diag(U)
            if np.array_equal(U, np.diag(d)) and np.all(d == d[0]):
                entries.append({"i": i, "j": j, "scalar": _z(d[0])})
            else:
                entries.append({"i": i, "j": j, "matrix": _mat(U)})
    doc = {"format_version": FORMAT_VERSION, "kind": "dense"}
    if name:
        doc["name"] = name
    doc.update({"dim": dim, "operators": [_mat(T) for T in ops], "twist": entries})
    if support is not None:
        doc["support"] = [int(x) for x in support]
    if tolerance:
        doc["tolerance"] = dict(tolerance)
    if seed is not None:
        doc["seed"] = seed
    return doc


def _monomial_doc(op: MonomialOperator) -> dict:
    w = op.weight
    out = {"name": op.name} if op.name else {}
    out.update({
        "A": [list(row) for row in op.A],
        "delta": list(op.delta),
        "weight": {
            "modulus": _frac(w.modulus),
            "radii": [_frac(r) for r in w.radii],
            "turns0": _frac(w.turns0),
            "turns": [_frac(t) for t in w.turns],
        },
    })
    return out


def lattice_document(t: LatticeTuple, *, window=None, tolerance=None, seed=None) -> dict:
    doc = {"format_version": FORMAT_VERSION, "kind": "lattice"}
    if t.name:
        doc["name"] = t.name
    doc["shape"] = {"d_plus": t.shape.d_plus, "d_bi": t.shape.d_bi}
    if window is not None:
        doc["window"] = int(window)
    doc["operators"] = [_monomial_doc(op) for op in t.ops]
    doc["twists"] = [{"i": i, "j": j, "operator": _monomial_doc(U)}
                     for (i, j), U in t.twists.items() if not _is_identity(U)]
    if tolerance:
        doc["tolerance"] = dict(tolerance)
    if seed is not None:
        doc["seed"] = seed
    return doc


def _is_identity(U: MonomialOperator) -> bool:
    return all(x == 0 for x in U.delta) and U.unitary and U.weight.turns0 == 0 and not any(U.weight.turns) \
        and all(U.A[r][c] == (r == c) for r in range(len(U.A)) for c in range(len(U.A)))


def dumps(doc) -> str:
    """Stable JSON text (sorted keys off, fixed indentation, trailing newline)."""
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def write_document(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def number(x, residual=False):
    """Report number with 12 significant digits; tiny residuals become 0."""
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    if residual and abs(x) < FLUSH_BELOW:
        return 0.0
    if x == 0:
        return 0.0
    return float(f"{x:.{SIG_DIGITS - 1}e}")


def canonicalize(report: dict) -> dict:
    """Drop fields that legitimately differ between identical runs."""
    return {k: v for k, v in report.items() if k not in ("generated_at", "runtime_s")}


def tolerance_dict(tol: ToleranceProfile) -> dict:
    return asdict(tol)
