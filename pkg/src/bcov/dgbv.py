"""Finite-dimensional dGBV algebras with trace.

A model is a graded-commutative algebra with a unit, a degree +1 derivation
``d`` (the role of the Dolbeault operator), a degree -1 second-order operator
``del`` (the BV operator), a trace and a positive-definite Hermitian inner
product.  :func:`load_model` verifies every axiom exhaustively over basis
tuples and rejects a model at the first violated axiom, in a fixed order:

1. per-entry selection rules (``product-degree``, ``d-degree``,
   ``d-bidegree``, ``del-degree``, ``del-bidegree``, ``trace-support``,
   ``inner-product-grading``);
2. ``unit``, ``graded-commutativity``, ``associativity``;
3. ``d-squared``, ``del-squared``, ``d-del-anticommute``;
4. ``d-derivation``, ``del-second-order``;
5. ``trace-d``, ``trace-del``, ``d-adjoint``, ``del-adjoint``;
6. ``trace-nondegenerate``, ``inner-product``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from . import linalg
from .errors import AxiomError, ModelMismatch, ParseError
from .scalar import ONE, ZERO, conj, format_scalar, imag_part, is_real, parse_scalar, real_part

FIELDS = ("Q", "Q(i)")


@dataclass(frozen=True)
class GradedBasisElement:
    id: str
    degree: int
    bidegree: tuple[int, int] | None = None

    @property
    def parity(self) -> int:
        return self.degree & 1


class GradedElement:
    """Sparse linear combination of basis elements of one model."""

    __slots__ = ("model", "coeffs")

    def __init__(self, model: "DGBVModel", coeffs: Mapping[int, object] | None = None):
        self.model = model
        self.coeffs = {i: c for i, c in (coeffs or {}).items() if c != 0}

    @property
    def coefficients(self) -> dict[str, object]:
        ids = self.model.ids
        return {ids[i]: c for i, c in sorted(self.coeffs.items())}

    def _check(self, other: "GradedElement") -> None:
        if not isinstance(other, GradedElement) or other.model is not self.model:
            raise ModelMismatch("elements belong to different models")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, ZERO) + c
        return GradedElement(self.model, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GradedElement(self.model, {i: -c for i, c in self.coeffs.items()})

    def __rmul__(self, c):
        return GradedElement(self.model, {i: c * x for i, x in self.coeffs.items()})

    def __eq__(self, other):
        return (
            isinstance(other, GradedElement)
            and other.model is self.model
            and other.coeffs == self.coeffs
        )

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items(), key=lambda kv: kv[0])))

    def is_zero(self) -> bool:
        return not self.coeffs

    def degrees(self) -> set[int]:
        return {self.model.basis[i].degree for i in self.coeffs}

    def degree(self) -> int:
        """Degree of a nonzero homogeneous element."""
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError("element is zero or not homogeneous")
        return degs.pop()

    def __repr__(self):
        if not self.coeffs:
            return "0"
        ids = self.model.ids
        return " + ".join(f"({format_scalar(c)}){ids[i]}" for i, c in sorted(self.coeffs.items()))


class DGBVModel:
    """Validated, immutable dGBV model.  Build it with :func:`load_model`."""

    def __init__(
        self,
        name: str,
        field: str,
        dimension: int,
        basis: tuple[GradedBasisElement, ...],
        unit: int,
        mult: list[list[tuple]],
        d: list[list],
        dl: list[list],
        trace: list,
        inner: list[list],
        inner_declared: bool,
    ):
        self.name = name
        self.field = field
        self.dimension = dimension
        self.basis = basis
        self.ids = tuple(b.id for b in basis)
        self.index = {b.id: i for i, b in enumerate(basis)}
        self.parity = tuple(b.parity for b in basis)
        self.n = len(basis)
        self.unit = unit
        self.mult = mult  # mult[a][b] -> tuple of (c, coef)
        self.d = d  # dense matrix, d[target][source]
        self.dl = dl
        self.trace_vec = trace
        self.inner = inner  # inner[a][b] = <e_a, e_b>, Hermitian
        self.inner_declared = inner_declared
        self.has_bidegrees = all(b.bidegree is not None for b in basis)
        self.d_cols = _columns(d)
        self.dl_cols = _columns(dl)
        self._spec = None
        self._hash = None

    # ----- constructors for elements -------------------------------------
    def basis_element(self, ident: str | int) -> GradedElement:
        i = self.index[ident] if isinstance(ident, str) else ident
        return GradedElement(self, {i: ONE})

    def element(self, coeffs: Mapping[str, object]) -> GradedElement:
        return GradedElement(self, {self.index[k]: v for k, v in coeffs.items()})

    def zero(self) -> GradedElement:
        return GradedElement(self)

    # ----- sparse vector kernels (index -> scalar dictionaries) -----------
    def mul_vec(self, x: Mapping[int, object], y: Mapping[int, object]) -> dict[int, object]:
        out: dict[int, object] = {}
        mult = self.mult
        for a, ca in x.items():
            row = mult[a]
            for b, cb in y.items():
                for c, m in row[b]:
                    out[c] = out.get(c, ZERO) + ca * cb * m
        return {k: v for k, v in out.items() if v != 0}

    def op_vec(self, cols: list[tuple], x: Mapping[int, object]) -> dict[int, object]:
        out: dict[int, object] = {}
        for a, ca in x.items():
            for c, m in cols[a]:
                out[c] = out.get(c, ZERO) + ca * m
        return {k: v for k, v in out.items() if v != 0}

    def trace_of(self, x: Mapping[int, object]):
        tv = self.trace_vec
        return sum((c * tv[i] for i, c in x.items() if tv[i] != 0), ZERO)

    # ----- serialization ----------------------------------------------------
    def to_spec(self) -> dict:
        if self._spec is None:
            self._spec = _model_to_spec(self)
        return self._spec

    def canonical_json(self) -> str:
        return json.dumps(self.to_spec(), sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        if self._hash is None:
            self._hash = hashlib.sha256(self.canonical_json().encode()).hexdigest()
        return self._hash

    def __eq__(self, other):
        return isinstance(other, DGBVModel) and self.canonical_json() == other.canonical_json()

    def __hash__(self):
        return hash(self.hash)

    def __repr__(self):
        return f"DGBVModel({self.name!r}, basis_size={self.n}, dimension={self.dimension})"


def _columns(matrix: list[list]) -> list[tuple]:
    n = len(matrix)
    return [tuple((r, matrix[r][c]) for r in range(n) if matrix[r][c] != 0) for c in range(n)]


def _model_to_spec(model: DGBVModel) -> dict:
    ids = model.ids
    basis = []
    for b in model.basis:
        entry = {"id": b.id, "degree": b.degree}
        if b.bidegree is not None:
            entry["bidegree"] = list(b.bidegree)
        basis.append(entry)
    product = [
        [ids[a], ids[b], ids[c], format_scalar(m)]
        for a in range(model.n)
        for b in range(model.n)
        for c, m in model.mult[a][b]
    ]

    def op_entries(matrix):
        return [
            [ids[src], ids[dst], format_scalar(matrix[dst][src])]
            for src in range(model.n)
            for dst in range(model.n)
            if matrix[dst][src] != 0
        ]

    spec = {
        "name": model.name,
        "field": model.field,
        "dimension": model.dimension,
        "basis": basis,
        "unit": ids[model.unit],
        "product": product,
        "d": op_entries(model.d),
        "del": op_entries(model.dl),
        "trace": [[ids[i], format_scalar(c)] for i, c in enumerate(model.trace_vec) if c != 0],
    }
    if model.inner_declared:
        spec["inner_product"] = [
            [ids[a], ids[b], format_scalar(model.inner[a][b])]
            for a in range(model.n)
            for b in range(model.n)
            if model.inner[a][b] != 0
        ]
    return spec


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------


def load_model(source) -> DGBVModel:
    """Load and exhaustively validate a model.

    ``source`` is a path to a JSON ModelSpec file, a JSON string, or an already
    parsed dictionary.  Raises :class:`ParseError` or :class:`AxiomError`.
    """
    if isinstance(source, Mapping):
        spec = source
    else:
        text = None
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            try:
                text = Path(source).read_text(encoding="utf-8")
            except OSError as exc:
                raise ParseError(f"cannot read model file {source}: {exc}") from exc
        else:
            text = source
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    model = _parse(spec)
    validate(model)
    return model


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParseError(msg)


def _parse(spec) -> DGBVModel:
    _require(isinstance(spec, Mapping), "model spec must be a JSON object")
    for key in ("name", "field", "dimension", "basis", "unit", "product", "d", "del", "trace"):
        _require(key in spec, f"missing key {key!r}")
    known = {"name", "field", "dimension", "basis", "unit", "product", "d", "del", "trace", "inner_product"}
    extra = set(spec) - known
    _require(not extra, f"unknown keys {sorted(extra)}")
    name, field, dim = spec["name"], spec["field"], spec["dimension"]
    _require(isinstance(name, str), "name must be a string")
    _require(field in FIELDS, f"field must be one of {FIELDS}")
    _require(isinstance(dim, int) and not isinstance(dim, bool) and dim >= 0, "dimension must be a non-negative integer")
    _require(isinstance(spec["basis"], list) and spec["basis"], "basis must be a non-empty list")

    basis = []
    for entry in spec["basis"]:
        _require(isinstance(entry, Mapping) and "id" in entry and "degree" in entry, f"bad basis entry {entry!r}")
        _require(set(entry) <= {"id", "degree", "bidegree"}, f"unknown keys in basis entry {entry!r}")
        ident, deg = entry["id"], entry["degree"]
        _require(isinstance(ident, str) and ident, f"basis id must be a non-empty string: {entry!r}")
        _require(isinstance(deg, int) and not isinstance(deg, bool), f"degree must be an integer: {entry!r}")
        bideg = entry.get("bidegree")
        if bideg is not None:
            _require(
                isinstance(bideg, list) and len(bideg) == 2
                and all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in bideg),
                f"bidegree must be a pair of non-negative integers: {entry!r}",
            )
            _require(bideg[0] + bideg[1] == deg, f"bidegree does not sum to degree: {entry!r}")
            bideg = (bideg[0], bideg[1])
        basis.append(GradedBasisElement(ident, deg, bideg))
    ids = [b.id for b in basis]
    _require(len(set(ids)) == len(ids), "basis ids must be unique")
    has_bi = [b.bidegree is not None for b in basis]
    _require(all(has_bi) or not any(has_bi), "bidegrees must be given for all basis elements or none")
    index = {b: i for i, b in enumerate(ids)}
    n = len(basis)

    def sc(text):
        try:
            value = parse_scalar(text)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
        if field == "Q" and not is_real(value):
            raise ParseError(f"non-real scalar {text!r} in a model over Q")
        return value

    def idx(ident):
        _require(isinstance(ident, str) and ident in index, f"unknown basis id {ident!r}")
        return index[ident]

    _require(spec["unit"] in index, f"unit {spec['unit']!r} is not a basis id")
    unit = index[spec["unit"]]

    def entries(key, width):
        rows = spec[key]
        _require(isinstance(rows, list), f"{key} must be a list")
        seen = set()
        for row in rows:
            _require(isinstance(row, list) and len(row) == width, f"bad {key} entry {row!r}")
            keyt = tuple(idx(x) for x in row[:-1])
            _require(keyt not in seen, f"duplicate {key} entry {row!r}")
            seen.add(keyt)
            yield keyt, sc(row[-1])

    table: list[list[dict]] = [[{} for _ in range(n)] for _ in range(n)]
    for (a, b, c), v in entries("product", 4):
        if v != 0:
            table[a][b][c] = v
    mult = [[tuple(sorted(table[a][b].items())) for b in range(n)] for a in range(n)]

    def matrix(key):
        m = linalg.zeros(n, n)
        for (src, dst), v in entries(key, 3):
            m[dst][src] = v
        return m

    d = matrix("d")
    dl = matrix("del")
    trace = [ZERO] * n
    for (i,), v in entries("trace", 2):
        trace[i] = v
    declared = spec.get("inner_product") is not None
    if declared:
        inner = linalg.zeros(n, n)
        for (a, b), v in entries("inner_product", 3):
            inner[a][b] = v
    else:
        inner = linalg.identity(n)
    return DGBVModel(name, field, dim, tuple(basis), unit, mult, d, dl, trace, inner, declared)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def _fail(model: DGBVModel, axiom: str, witness: Iterable[int], detail: str = "") -> None:
    raise AxiomError(axiom, tuple(model.ids[i] for i in witness), detail)


def _bi_add(x, y):
    return (x[0] + y[0], x[1] + y[1])


def validate(model: DGBVModel) -> None:
    """Check every dGBV axiom exhaustively; raise AxiomError on the first failure."""
    n, B = model.n, model.basis
    top = 2 * model.dimension
    has_bi = model.has_bidegrees

    # 1. selection rules, entry by entry
    for a in range(n):
        for b in range(n):
            for c, _ in model.mult[a][b]:
                if B[c].degree != B[a].degree + B[b].degree or (
                    has_bi and B[c].bidegree != _bi_add(B[a].bidegree, B[b].bidegree)
                ):
                    _fail(model, "product-degree", (a, b, c))
    for name, matrix, shift, bishift in (
        ("d", model.d, 1, (0, 1)),
        ("del", model.dl, -1, (-1, 0)),
    ):
        for dst in range(n):
            for src in range(n):
                if matrix[dst][src] == 0:
                    continue
                if B[dst].degree != B[src].degree + shift:
                    _fail(model, f"{name}-degree", (src, dst))
                if has_bi and B[dst].bidegree != _bi_add(B[src].bidegree, bishift):
                    _fail(model, f"{name}-bidegree", (src, dst))
    for i, v in enumerate(model.trace_vec):
        if v != 0 and (
            B[i].degree != top or (has_bi and B[i].bidegree != (model.dimension, model.dimension))
        ):
            _fail(model, "trace-support", (i,))
    for a in range(n):
        for b in range(n):
            if model.inner[a][b] != 0 and (
                B[a].degree != B[b].degree or (has_bi and B[a].bidegree != B[b].bidegree)
            ):
                _fail(model, "inner-product-grading", (a, b))

    # 2. algebra axioms
    u = model.unit
    if B[u].degree != 0:
        _fail(model, "unit", (u,), "unit must have degree 0")
    for a in range(n):
        if model.mult[u][a] != ((a, ONE),) or model.mult[a][u] != ((a, ONE),):
            _fail(model, "unit", (u, a))
    par = model.parity
    for a in range(n):
        for b in range(a, n):
            sign = -1 if par[a] and par[b] else 1
            ab = dict(model.mult[a][b])
            ba = {c: sign * v for c, v in model.mult[b][a]}
            if ab != ba:
                _fail(model, "graded-commutativity", (a, b))
    mul = model.mul_vec
    unit_vecs = [{i: ONE} for i in range(n)]
    for a in range(n):
        for b in range(n):
            ab = dict(model.mult[a][b])
            if not ab:
                continue
            for c in range(n):
                left = mul(ab, unit_vecs[c])
                right = mul(unit_vecs[a], dict(model.mult[b][c]))
                if left != right:
                    _fail(model, "associativity", (a, b, c))

    # 3. nilpotence
    for name, x, y, plus in (
        ("d-squared", model.d, model.d, None),
        ("del-squared", model.dl, model.dl, None),
        ("d-del-anticommute", model.d, model.dl, True),
    ):
        prod = linalg.matmul(x, y)
        if plus:
            prod = linalg.add(prod, linalg.matmul(y, x))
        for src in range(n):
            if any(prod[r][src] != 0 for r in range(n)):
                _fail(model, name, (src,))

    # 4. derivation / second-order
    dv = [model.op_vec(model.d_cols, {i: ONE}) for i in range(n)]
    lv = [model.op_vec(model.dl_cols, {i: ONE}) for i in range(n)]
    products = [[dict(model.mult[a][b]) for b in range(n)] for a in range(n)]
    for a in range(n):
        for b in range(n):
            lhs = model.op_vec(model.d_cols, products[a][b])
            rhs = _vadd(mul(dv[a], unit_vecs[b]), mul(unit_vecs[a], dv[b]), -1 if par[a] else 1)
            if lhs != rhs:
                _fail(model, "d-derivation", (a, b))
    br = [[_bracket_vec(model, products[a][b], lv[a], lv[b], unit_vecs[a], unit_vecs[b], par[a]) for b in range(n)] for a in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                lhs = _bracket_general(model, unit_vecs[a], products[b][c], par[a])
                s = -1 if ((par[a] + 1) * par[b]) & 1 else 1
                rhs = _vadd(mul(br[a][b], unit_vecs[c]), mul(unit_vecs[b], br[a][c]), s)
                if lhs != rhs:
                    _fail(model, "del-second-order", (a, b, c))

    # 5. trace compatibility
    for i in range(n):
        if model.trace_of(dv[i]) != 0:
            _fail(model, "trace-d", (i,))
        if model.trace_of(lv[i]) != 0:
            _fail(model, "trace-del", (i,))
    tr = model.trace_of
    for a in range(n):
        for b in range(n):
            sa = -1 if par[a] else 1
            if tr(mul(dv[a], unit_vecs[b])) + sa * tr(mul(unit_vecs[a], dv[b])) != 0:
                _fail(model, "d-adjoint", (a, b))
            if tr(mul(lv[a], unit_vecs[b])) - sa * tr(mul(unit_vecs[a], lv[b])) != 0:
                _fail(model, "del-adjoint", (a, b))

    # 6. nondegeneracy and the inner product
    gram = [[tr(products[a][b]) for b in range(n)] for a in range(n)]
    if linalg.rank(gram) < n:
        kernel = linalg.nullspace(gram)[0]
        _fail(model, "trace-nondegenerate", tuple(i for i, x in enumerate(kernel) if x != 0))
    _check_inner_product(model)


def _vadd(x: dict, y: dict, sign: int) -> dict:
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, ZERO) + (v if sign == 1 else -v)
    return {k: v for k, v in out.items() if v != 0}


def _bracket_vec(model, ab, la, lb, ea, eb, pa) -> dict:
    """{a,b} = del(ab) - del(a) b - (-1)^{|a|} a del(b) on basis vectors."""
    out = model.op_vec(model.dl_cols, ab)
    out = _vadd(out, model.mul_vec(la, eb), -1)
    return _vadd(out, model.mul_vec(ea, lb), 1 if pa else -1)


def _bracket_general(model, ea: dict, y: dict, pa: int) -> dict:
    """{e_a, y} for a basis vector e_a and an arbitrary vector y of mixed degree."""
    out: dict = {}
    la = model.op_vec(model.dl_cols, ea)
    for b, cb in y.items():
        eb = {b: ONE}
        term = _bracket_vec(
            model, model.mul_vec(ea, eb), la, model.op_vec(model.dl_cols, eb), ea, eb, pa
        )
        for k, v in term.items():
            out[k] = out.get(k, ZERO) + cb * v
    return {k: v for k, v in out.items() if v != 0}


def _check_inner_product(model: DGBVModel) -> None:
    h, n = model.inner, model.n
    for a in range(n):
        for b in range(n):
            if h[a][b] != conj(h[b][a]):
                _fail(model, "inner-product", (a, b), "not Hermitian")
    # exact LDL* factorization: all pivots must be positive reals
    m = [list(row) for row in h]
    for k in range(n):
        p = m[k][k]
        if imag_part(p) != 0 or real_part(p) <= 0:
            _fail(model, "inner-product", (k,), "not positive definite")
        for i in range(k + 1, n):
            f = m[i][k] / p
            if f != 0:
                for j in range(k, n):
                    m[i][j] = m[i][j] - f * m[k][j]


# --------------------------------------------------------------------------
# public element operations
# --------------------------------------------------------------------------


def _same(x: GradedElement, y: GradedElement) -> DGBVModel:
    if not isinstance(x, GradedElement) or not isinstance(y, GradedElement) or x.model is not y.model:
        raise ModelMismatch("elements belong to different models")
    return x.model


def multiply(x: GradedElement, y: GradedElement) -> GradedElement:
    """Bilinear extension of the structure constants."""
    model = _same(x, y)
    return GradedElement(model, model.mul_vec(x.coeffs, y.coeffs))


def apply_d(x: GradedElement) -> GradedElement:
    return GradedElement(x.model, x.model.op_vec(x.model.d_cols, x.coeffs))


def apply_del(x: GradedElement) -> GradedElement:
    return GradedElement(x.model, x.model.op_vec(x.model.dl_cols, x.coeffs))


def bracket(x: GradedElement, y: GradedElement) -> GradedElement:
    """{x,y} = del(xy) - del(x) y - (-1)^{|x|} x del(y), extended bilinearly."""
    model = _same(x, y)
    out: dict = {}
    for a, ca in x.coeffs.items():
        ea = {a: ONE}
        part = _bracket_general(model, ea, y.coeffs, model.parity[a])
        for k, v in part.items():
            out[k] = out.get(k, ZERO) + ca * v
    return GradedElement(model, out)


def trace(x: GradedElement):
    """Linear trace functional."""
    return x.model.trace_of(x.coeffs)
