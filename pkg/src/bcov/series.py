"""Truncated supercommutative power series, element-valued series and t-Laurent data.

Conventions
-----------
* A :class:`Coordinate` is dual to a basis element (of the model, or of the
  harmonic subspace) tensored with ``t^k``; its parity is the parity of the
  element's degree.  Odd coordinates anticommute and square to zero.
* Monomials are tuples of coordinate indices sorted ascending; coordinate
  indices follow the canonical order (basis position, t-power).  Every
  product is renormalized to this order with its Koszul sign, so two series
  are equal iff their term dictionaries are equal.
* Derivatives are *left* derivatives: ``d/dx`` is moved to the front of a
  monomial past the coordinates preceding the occurrence of ``x``.
* An :class:`ElementSeries` is an element of ``A (x) C[[tau]]`` written as
  ``sum m (x) e_a`` with the monomial to the left; the product is
  ``(m1 e_a)(m2 e_b) = (-1)^{|e_a||m2|} m1 m2 e_a e_b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ModelMismatch, TruncationMismatch
from .scalar import ONE, ZERO, format_scalar

Monomial = tuple[int, ...]


@dataclass(frozen=True)
class Coordinate:
    basis_id: str
    t_power: int
    parity: int

    def __str__(self) -> str:
        return f"tau[{self.basis_id},{self.t_power}]"


class CoordinateSystem:
    """An ordered universe of coordinates; series over it share this object."""

    def __init__(self, coords: Sequence[Coordinate]):
        keys = [(c.basis_id, c.t_power) for c in coords]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate coordinates")
        self.coords = tuple(coords)
        self.index = {k: i for i, k in enumerate(keys)}
        self.odd = tuple(bool(c.parity) for c in coords)
        self._mul_cache: dict = {}
        self._odd_cache: dict = {}

    @classmethod
    def from_labels(cls, labels: Sequence[tuple[str, int]], kmax: int = 0) -> "CoordinateSystem":
        """Coordinates for ``(label, parity)`` pairs times ``t^0 .. t^kmax``."""
        return cls([Coordinate(lab, k, par & 1) for lab, par in labels for k in range(kmax + 1)])

    def __len__(self) -> int:
        return len(self.coords)

    def coord(self, basis_id: str, t_power: int = 0) -> int:
        return self.index[(basis_id, t_power)]

    def odd_count(self, m: Monomial) -> int:
        r = self._odd_cache.get(m)
        if r is None:
            odd = self.odd
            r = sum(1 for c in m if odd[c])
            self._odd_cache[m] = r
        return r

    def mono_mul(self, m1: Monomial, m2: Monomial):
        """(product monomial, sign) or None when an odd coordinate repeats."""
        key = (m1, m2)
        r = self._mul_cache.get(key, 0)
        if r != 0:
            return r
        odd = self.odd
        o1 = [c for c in m1 if odd[c]]
        sign = 1
        if o1:
            o1set = set(o1)
            for y in m2:
                if odd[y]:
                    if y in o1set:
                        self._mul_cache[key] = None
                        return None
                    # y moves left past every odd coordinate of m1 greater than it
                    if sum(1 for x in o1 if x > y) & 1:
                        sign = -sign
        r = (tuple(sorted(m1 + m2)), sign)
        self._mul_cache[key] = r
        return r

    def monomial_str(self, m: Monomial) -> list[str]:
        return [str(self.coords[c]) for c in m]

    def parity_of(self, m: Monomial) -> int:
        return self.odd_count(m) & 1


def _mul_terms(u: CoordinateSystem, x: Mapping, y: Mapping, nmax: int, twist: bool = False) -> dict:
    """Raw truncated product of term dictionaries.

    With ``twist`` each term picks up (-1)^{|m2|}; used for moving an odd basis
    element of the left factor past the monomial of the right factor.
    """
    out: dict = {}
    if not x or not y:
        return out
    by_deg: dict[int, list] = {}
    for m2, c2 in y.items():
        by_deg.setdefault(len(m2), []).append((m2, c2, (u.odd_count(m2) & 1) if twist else 0))
    degs = sorted(by_deg)
    mono_mul = u.mono_mul
    for m1, c1 in x.items():
        room = nmax - len(m1)
        for dg in degs:
            if dg > room:
                break
            for m2, c2, tw in by_deg[dg]:
                r = mono_mul(m1, m2)
                if r is None:
                    continue
                m, s = r
                if tw:
                    s = -s
                v = c1 * c2
                out[m] = out.get(m, ZERO) + (v if s == 1 else -v)
    return {m: c for m, c in out.items() if c != 0}


def _add_into(out: dict, terms: Mapping, factor=ONE) -> None:
    for m, c in terms.items():
        out[m] = out.get(m, ZERO) + (c if factor == 1 else c * factor)


def _clean(terms: Mapping) -> dict:
    return {m: c for m, c in terms.items() if c != 0}


class SuperSeries:
    """Truncated supercommutative power series with exact coefficients."""

    __slots__ = ("universe", "nmax", "terms")

    def __init__(self, universe: CoordinateSystem, nmax: int, terms: Mapping | None = None):
        self.universe = universe
        self.nmax = nmax
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0 and len(m) <= nmax}

    # ----- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, universe, nmax):
        return cls(universe, nmax)

    @classmethod
    def constant(cls, universe, nmax, c):
        return cls(universe, nmax, {(): c})

    @classmethod
    def variable(cls, universe, nmax, index: int, coeff=ONE):
        return cls(universe, nmax, {(index,): coeff})

    @classmethod
    def monomial(cls, universe, nmax, coords: Iterable[int], coeff=ONE):
        """Ordered product of the given coordinates (sign-normalized)."""
        terms = {(): coeff}
        for c in coords:
            terms = _mul_terms(universe, terms, {(c,): ONE}, nmax)
        return cls(universe, nmax, terms)

    def _same(self, other: "SuperSeries") -> None:
        if other.universe is not self.universe or other.nmax != self.nmax:
            raise TruncationMismatch("series live on different coordinate systems or truncations")

    # ----- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        _add_into(out, other.terms)
        return SuperSeries(self.universe, self.nmax, out)

    def __sub__(self, other):
        self._same(other)
        out = dict(self.terms)
        _add_into(out, other.terms, -ONE)
        return SuperSeries(self.universe, self.nmax, out)

    def __neg__(self):
        return SuperSeries(self.universe, self.nmax, {m: -c for m, c in self.terms.items()})

    def scale(self, c):
        if c == 0:
            return SuperSeries(self.universe, self.nmax)
        return SuperSeries(self.universe, self.nmax, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, SuperSeries):
            return super_mul(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return (
            isinstance(other, SuperSeries)
            and other.universe is self.universe
            and other.nmax == self.nmax
            and other.terms == self.terms
        )

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, m: Monomial):
        return self.terms.get(tuple(m), ZERO)

    def homogeneous(self, n: int) -> "SuperSeries":
        return SuperSeries(self.universe, self.nmax, {m: c for m, c in self.terms.items() if len(m) == n})

    def truncate(self, n: int) -> "SuperSeries":
        return SuperSeries(self.universe, self.nmax, {m: c for m, c in self.terms.items() if len(m) <= n})

    def filter(self, keep: Callable[[Monomial], bool]) -> "SuperSeries":
        return SuperSeries(self.universe, self.nmax, {m: c for m, c in self.terms.items() if keep(m)})

    def restrict(self, allowed: Iterable[int]) -> "SuperSeries":
        """Set every coordinate outside ``allowed`` to zero."""
        allowed = set(allowed)
        return self.filter(lambda m: all(c in allowed for c in m))

    def min_order(self) -> int | None:
        return min((len(m) for m in self.terms), default=None)

    def max_abs(self):
        from .scalar import abs_bound

        return max((abs_bound(c) for c in self.terms.values()), default=ZERO)

    # ----- derivatives --------------------------------------------------------
    def derivative(self, coord: int, side: str = "left") -> "SuperSeries":
        """Graded derivative; ``side='left'`` (default) or ``'right'``."""
        odd = self.universe.odd
        out: dict = {}
        for m, c in self.terms.items():
            if coord not in m:
                continue
            pos = m.index(coord)
            mult = m.count(coord)
            if odd[coord]:
                if side == "left":
                    passed = sum(1 for x in m[:pos] if odd[x])
                else:
                    passed = sum(1 for x in m[pos + 1:] if odd[x])
                sign = -1 if passed & 1 else 1
                rest = m[:pos] + m[pos + 1:]
                v = c if sign == 1 else -c
            else:
                rest = m[:pos] + m[pos + 1:]
                v = c * mult
            out[rest] = out.get(rest, ZERO) + v
        return SuperSeries(self.universe, self.nmax, out)

    # ----- substitution -------------------------------------------------------
    def substitute(self, images: Sequence["SuperSeries"], target: CoordinateSystem | None = None, nmax: int | None = None) -> "SuperSeries":
        """Compose: replace coordinate ``i`` by ``images[i]`` (a series of the same parity).

        Images must have no constant term; the result lives on ``target``.
        """
        target = target or self.universe
        nmax = self.nmax if nmax is None else nmax
        out: dict = {}
        for m, c in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            acc = {(): ONE}
            for x in m:
                acc = _mul_terms(target, acc, images[x].terms, nmax)
                if not acc:
                    break
            _add_into(out, acc, c)
        return SuperSeries(target, nmax, out)

    def transfer(self, target: CoordinateSystem, nmax: int | None = None) -> "SuperSeries":
        """Re-express on another coordinate system, matching coordinates by (basis_id, t_power).

        Terms involving coordinates absent from ``target`` are dropped (those
        coordinates are set to zero).  Coordinates keep their relative order in
        both systems only up to sign normalization, which is recomputed here.
        """
        nmax = self.nmax if nmax is None else nmax
        src = self.universe.coords
        mapping = [target.index.get((c.basis_id, c.t_power)) for c in src]
        out: dict = {}
        for m, c in self.terms.items():
            if len(m) > nmax or any(mapping[x] is None for x in m):
                continue
            acc = {(): c}
            for x in m:
                acc = _mul_terms(target, acc, {(mapping[x],): ONE}, nmax)
            _add_into(out, acc)
        return SuperSeries(target, nmax, out)

    # ----- reporting ------------------------------------------------------------
    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def to_json(self) -> list[dict]:
        u = self.universe
        return [{"monomial": u.monomial_str(m), "coeff": format_scalar(c)} for m, c in self.sorted_items()]

    def __repr__(self):
        if not self.terms:
            return "0"
        u = self.universe
        return " + ".join(f"({format_scalar(c)})" + "*".join(u.monomial_str(m)) for m, c in self.sorted_items())


def super_mul(f: SuperSeries, g: SuperSeries) -> SuperSeries:
    """Graded-commutative product truncated at the common order."""
    f._same(g)
    return SuperSeries(f.universe, f.nmax, _mul_terms(f.universe, f.terms, g.terms, f.nmax))


def partial_derivative(f: SuperSeries, coord: int | Coordinate) -> SuperSeries:
    """Left graded derivative with respect to a coordinate (index or Coordinate)."""
    if isinstance(coord, Coordinate):
        coord = f.universe.coord(coord.basis_id, coord.t_power)
    return f.derivative(coord, "left")


def euler_integrate(gradient: Sequence[SuperSeries], check: bool = True) -> SuperSeries:
    """Reconstruct F (no constant or linear term) from its left gradient.

    The degree-n part of F is (1/n) sum_A tau^A dF/dtau^A.  With ``check``
    the graded symmetry of second derivatives is verified first.
    """
    from .errors import NonIntegrableGradient

    u, nmax = gradient[0].universe, gradient[0].nmax
    if check:
        odd = u.odd
        for a in range(len(gradient)):
            for b in range(a + 1, len(gradient)):
                lhs = gradient[a].derivative(b).truncate(nmax - 1)
                rhs = gradient[b].derivative(a).truncate(nmax - 1)
                if odd[a] and odd[b]:
                    rhs = -rhs
                if lhs != rhs:
                    raise NonIntegrableGradient(
                        f"mixed derivatives differ for {u.coords[a]} and {u.coords[b]}"
                    )
    out: dict = {}
    for a, g in enumerate(gradient):
        for m, c in _mul_terms(u, {(a,): ONE}, g.terms, nmax).items():
            out[m] = out.get(m, ZERO) + c / len(m)
    return SuperSeries(u, nmax, out)


def gradient(f: SuperSeries) -> list[SuperSeries]:
    return [f.derivative(a) for a in range(len(f.universe))]


# ---------------------------------------------------------------------------
# element-valued series  A (x) C[[tau]]
# ---------------------------------------------------------------------------


class ElementSeries:
    """Element of ``A (x) C[[tau]]``: basis index -> term dictionary."""

    __slots__ = ("model", "universe", "nmax", "comps")

    def __init__(self, model, universe: CoordinateSystem, nmax: int, comps: Mapping[int, Mapping] | None = None):
        self.model = model
        self.universe = universe
        self.nmax = nmax
        self.comps = {}
        for a, terms in (comps or {}).items():
            t = {m: c for m, c in terms.items() if c != 0 and len(m) <= nmax}
            if t:
                self.comps[a] = t

    @classmethod
    def zero(cls, model, universe, nmax):
        return cls(model, universe, nmax)

    @classmethod
    def from_element(cls, model, universe, nmax, vec: Mapping[int, object], series: SuperSeries | None = None):
        """``series (x) vec`` (the constant series 1 when ``series`` is None)."""
        terms = series.terms if series is not None else {(): ONE}
        return cls(model, universe, nmax, {a: {m: c * v for m, c in terms.items()} for a, v in vec.items()})

    @classmethod
    def linear(cls, model, universe, nmax, vectors: Mapping[int, Mapping[int, object]]):
        """sum_A tau^A E_A for coordinate index A -> vector E_A."""
        comps: dict = {}
        for coord, vec in vectors.items():
            for a, v in vec.items():
                comps.setdefault(a, {})[(coord,)] = v
        return cls(model, universe, nmax, comps)

    def _same(self, other: "ElementSeries") -> None:
        if other.model is not self.model:
            raise ModelMismatch("element series belong to different models")
        if other.universe is not self.universe or other.nmax != self.nmax:
            raise TruncationMismatch("element series live on different coordinate systems")

    def _new(self, comps) -> "ElementSeries":
        return ElementSeries(self.model, self.universe, self.nmax, comps)

    def __add__(self, other):
        self._same(other)
        out = {a: dict(t) for a, t in self.comps.items()}
        for a, t in other.comps.items():
            _add_into(out.setdefault(a, {}), t)
        return self._new(out)

    def __sub__(self, other):
        self._same(other)
        out = {a: dict(t) for a, t in self.comps.items()}
        for a, t in other.comps.items():
            _add_into(out.setdefault(a, {}), t, -ONE)
        return self._new(out)

    def __neg__(self):
        return self._new({a: {m: -c for m, c in t.items()} for a, t in self.comps.items()})

    def scale(self, c):
        if c == 0:
            return self._new({})
        return self._new({a: {m: c * v for m, v in t.items()} for a, t in self.comps.items()})

    def __eq__(self, other):
        return isinstance(other, ElementSeries) and other.model is self.model and other.comps == self.comps

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.comps

    def __mul__(self, other):
        if isinstance(other, ElementSeries):
            return element_mul(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def times_series(self, f: SuperSeries) -> "ElementSeries":
        """f * X with the scalar series on the left (no sign: f multiplies monomials from the left)."""
        u = self.universe
        return self._new({a: _mul_terms(u, f.terms, t, self.nmax) for a, t in self.comps.items()})

    def apply(self, cols: Sequence[Sequence[tuple]], odd_operator: bool) -> "ElementSeries":
        """Apply a model operator (column lists) as 1 (x) op with the Koszul sign."""
        u = self.universe
        out: dict = {}
        for a, t in self.comps.items():
            for c, v in cols[a]:
                tgt = out.setdefault(c, {})
                for m, x in t.items():
                    s = v
                    if odd_operator and u.odd_count(m) & 1:
                        s = -v
                    tgt[m] = tgt.get(m, ZERO) + s * x
        return self._new(out)

    def apply_matrix(self, matrix: Sequence[Sequence], odd_operator: bool) -> "ElementSeries":
        n = len(matrix)
        cols = [tuple((r, matrix[r][c]) for r in range(n) if matrix[r][c] != 0) for c in range(n)]
        return self.apply(cols, odd_operator)

    def trace(self) -> SuperSeries:
        tv = self.model.trace_vec
        out: dict = {}
        for a, t in self.comps.items():
            if tv[a] != 0:
                _add_into(out, t, tv[a])
        return SuperSeries(self.universe, self.nmax, out)

    def component(self, a: int) -> SuperSeries:
        return SuperSeries(self.universe, self.nmax, self.comps.get(a, {}))

    def homogeneous(self, n: int) -> "ElementSeries":
        return self._new({a: {m: c for m, c in t.items() if len(m) == n} for a, t in self.comps.items()})

    def truncate(self, n: int) -> "ElementSeries":
        return self._new({a: {m: c for m, c in t.items() if len(m) <= n} for a, t in self.comps.items()})

    def derivative(self, coord: int) -> "ElementSeries":
        return self._new({a: SuperSeries(self.universe, self.nmax, t).derivative(coord).terms for a, t in self.comps.items()})

    def substitute(self, images, target=None, nmax=None) -> "ElementSeries":
        target = target or self.universe
        nmax = self.nmax if nmax is None else nmax
        comps = {a: SuperSeries(self.universe, self.nmax, t).substitute(images, target, nmax).terms for a, t in self.comps.items()}
        return ElementSeries(self.model, target, nmax, comps)

    def to_json(self) -> dict:
        ids = self.model.ids
        return {ids[a]: SuperSeries(self.universe, self.nmax, t).to_json() for a, t in sorted(self.comps.items())}

    def __repr__(self):
        ids = self.model.ids
        return "{" + ", ".join(f"{ids[a]}: {SuperSeries(self.universe, self.nmax, t)!r}" for a, t in sorted(self.comps.items())) + "}"


def element_mul(x: ElementSeries, y: ElementSeries) -> ElementSeries:
    """Product in A (x) C[[tau]] with (m1 e_a)(m2 e_b) = (-1)^{|a||m2|} m1 m2 e_a e_b."""
    x._same(y)
    model, u, nmax = x.model, x.universe, x.nmax
    mult, par = model.mult, model.parity
    out: dict = {}
    for a, ta in x.comps.items():
        row = mult[a]
        for b, tb in y.comps.items():
            targets = row[b]
            if not targets:
                continue
            prod = _mul_terms(u, ta, tb, nmax, twist=bool(par[a]))
            if not prod:
                continue
            for c, m in targets:
                _add_into(out.setdefault(c, {}), prod, m)
    return ElementSeries(model, u, nmax, out)


# ---------------------------------------------------------------------------
# t-Laurent data
# ---------------------------------------------------------------------------


class LaurentPoly:
    """Laurent polynomial in t with scalar coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        self.coeffs = {k: c for k, c in (coeffs or {}).items() if c != 0}

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ZERO) + c
        return LaurentPoly(out)

    def __neg__(self):
        return LaurentPoly({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return LaurentPoly({k: c * v for k, v in self.coeffs.items()})

    def subs_neg_t(self) -> "LaurentPoly":
        return LaurentPoly({k: (-c if k & 1 else c) for k, c in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.coeffs == other.coeffs

    __hash__ = None

    def __getitem__(self, k):
        return self.coeffs.get(k, ZERO)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"({format_scalar(c)})t^{k}" for k, c in sorted(self.coeffs.items()))


def t_residue(poly: LaurentPoly):
    """Coefficient of t^{-1}."""
    return poly[-1]


class TLaurent:
    """Laurent polynomial in t with model-element coefficients: power -> vector."""

    __slots__ = ("model", "coeffs")

    def __init__(self, model, coeffs: Mapping[int, Mapping[int, object]] | None = None):
        self.model = model
        self.coeffs = {}
        for k, vec in (coeffs or {}).items():
            v = {a: c for a, c in vec.items() if c != 0}
            if v:
                self.coeffs[k] = v

    @classmethod
    def from_element(cls, element, power: int = 0) -> "TLaurent":
        return cls(element.model, {power: dict(element.coeffs)})

    @property
    def bounds(self) -> tuple[int, int] | None:
        if not self.coeffs:
            return None
        return min(self.coeffs), max(self.coeffs)

    def _same(self, other):
        if other.model is not self.model:
            raise ModelMismatch("t-Laurent values belong to different models")

    def __add__(self, other):
        self._same(other)
        out = {k: dict(v) for k, v in self.coeffs.items()}
        for k, vec in other.coeffs.items():
            tgt = out.setdefault(k, {})
            for a, c in vec.items():
                tgt[a] = tgt.get(a, ZERO) + c
        return TLaurent(self.model, out)

    def __neg__(self):
        return TLaurent(self.model, {k: {a: -c for a, c in v.items()} for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return TLaurent(self.model, {k: {a: c * x for a, x in v.items()} for k, v in self.coeffs.items()})

    def shift(self, j: int) -> "TLaurent":
        """Multiply by t^j."""
        return TLaurent(self.model, {k + j: v for k, v in self.coeffs.items()})

    def times_poly(self, poly: LaurentPoly) -> "TLaurent":
        out = TLaurent(self.model)
        for j, c in poly.coeffs.items():
            out = out + self.shift(j).scale(c)
        return out

    def map(self, fn) -> "TLaurent":
        """Apply a linear map on vectors to every coefficient."""
        return TLaurent(self.model, {k: fn(v) for k, v in self.coeffs.items()})

    def homogeneous_parity(self) -> int | None:
        pars = {self.model.parity[a] for v in self.coeffs.values() for a in v}
        return pars.pop() if len(pars) == 1 else None

    def __eq__(self, other):
        return isinstance(other, TLaurent) and other.model is self.model and other.coeffs == self.coeffs

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.coeffs

    def to_json(self) -> dict:
        ids = self.model.ids
        return {
            str(k): {ids[a]: format_scalar(c) for a, c in sorted(v.items())}
            for k, v in sorted(self.coeffs.items())
        }

    def __repr__(self):
        return f"TLaurent({self.to_json()})"


def loop_pairing(u: TLaurent, v: TLaurent) -> LaurentPoly:
    """<f(t) alpha, g(t) beta> = f(t) g(-t) Tr(alpha beta), extended bilinearly."""
    u._same(v)
    model = u.model
    out: dict = {}
    for i, x in u.coeffs.items():
        for j, y in v.coeffs.items():
            tr = model.trace_of(model.mul_vec(x, y))
            if tr == 0:
                continue
            val = -tr if j & 1 else tr
            out[i + j] = out.get(i + j, ZERO) + val
    return LaurentPoly(out)


def symplectic_form(u: TLaurent, v: TLaurent):
    """omega(u, v) = Res_{t=0} <u, v> dt."""
    return t_residue(loop_pairing(u, v))


def exp_coefficients(n: int) -> list:
    """1/k! for k = 0..n as exact rationals."""
    from gmpy2 import mpq

    return [mpq(1, factorial(k)) for k in range(n + 1)]
