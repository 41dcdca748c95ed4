"""The classical BCOV action, its odd Poisson bracket and the classical master equation.

The action on fields ``mu = sum_k mu_k t^k`` is

    S(mu) = sum_n 1/n! sum_{k_1..k_n} binom(n-3; k_1..k_n) Tr(mu_{k_1} ... mu_{k_n}),

the sum running over ``k_1 + ... + k_n = n - 3``.  Writing
``M(x) = sum_k mu_k x^k / k!`` this is ``sum_n (n-3)!/n! [x^{n-3}] Tr(M(x)^n)``,
which gives a second, independent evaluation route used by the tests and by
the genus-zero recursion.

The bracket contracts one t^0 derivative slot of each argument through the
kernel ``K^{bc} = Tr(del(e^b) e^c)`` (``e^b`` the trace-dual basis):

    {F, H} = - sum_{b,c} (-1)^{|b|} (F <-d_b) K^{bc} (d_c-> H),

right derivative on F, left derivative on H.  For even F this reduces to
``-Tr(del(W_F) W_H)`` in terms of the t^0 gradients, and the overall minus
sign is the normalization for which ``QS + 1/2 {S,S} = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from gmpy2 import mpq

from . import linalg
from .dgbv import DGBVModel, GradedElement
from .errors import ModelMismatch, ParamError, TooFewLegs
from .scalar import ONE, ZERO
from .series import CoordinateSystem, ElementSeries, SuperSeries, _add_into, _mul_terms

BRACKET_SIGN = -1


def multinomial(total: int, parts) -> int:
    parts = list(parts)
    if sum(parts) != total or any(p < 0 for p in parts):
        return 0
    out = factorial(total)
    for p in parts:
        out //= factorial(p)
    return out


def vertex(inputs) -> object:
    """multinomial(n-3; k) Tr(alpha_1 ... alpha_n) when sum k = n - 3, else 0."""
    inputs = list(inputs)
    n = len(inputs)
    if n < 3:
        raise TooFewLegs(f"a vertex needs at least three legs, got {n}")
    model = inputs[0][0].model
    for el, _ in inputs:
        if not isinstance(el, GradedElement) or el.model is not model:
            raise ModelMismatch("vertex legs belong to different models")
    ks = [k for _, k in inputs]
    if any(k < 0 for k in ks) or sum(ks) != n - 3:
        return ZERO
    prod = dict(inputs[0][0].coeffs)
    for el, _ in inputs[1:]:
        prod = model.mul_vec(prod, el.coeffs)
        if not prod:
            return ZERO
    return multinomial(n - 3, ks) * model.trace_of(prod)


def action_universe(model: DGBVModel, k_max: int) -> CoordinateSystem:
    return CoordinateSystem.from_labels([(b.id, b.parity) for b in model.basis], k_max)


@dataclass
class ActionFunctional:
    """Vertex tensors and the series form of S on the full model basis."""

    model: DGBVModel
    n_max: int
    k_max: int
    universe: CoordinateSystem
    vertices: dict  # n -> {sorted coordinate tuple: vertex value D_n(E_A1, ..., E_An)}
    series: SuperSeries
    corrupted: bool = False

    def vertex_tensor(self, n: int) -> dict:
        return self.vertices.get(n, {})

    def to_json(self) -> dict:
        u = self.universe
        from .scalar import format_scalar

        return {
            "n_max": self.n_max,
            "k_max": self.k_max,
            "vertices": {
                str(n): [
                    {"legs": u.monomial_str(legs), "value": format_scalar(v)}
                    for legs, v in sorted(t.items())
                ]
                for n, t in sorted(self.vertices.items())
            },
            "series": self.series.to_json(),
        }


def _coord_vectors(model: DGBVModel, u: CoordinateSystem):
    return [(model.index[c.basis_id], c.t_power, c.parity) for c in u.coords]


def build_action(model: DGBVModel, n_max: int, k_max: int | None = None, *, corrupt_quartic: bool = False) -> ActionFunctional:
    """Enumerate all leg multisets obeying the selection rules and assemble S.

    ``corrupt_quartic`` is the negative control used by the tests: the n = 4
    vertex drops the t-power selection rule and returns the bare trace for every
    leg tuple (the multinomial replaced by 1).
    """
    if n_max < 3:
        raise ParamError("n_max must be at least 3")
    if k_max is None:
        k_max = n_max - 3
    u = action_universe(model, k_max)
    legs = _coord_vectors(model, u)
    top = 2 * model.dimension
    degs = [model.basis[a].degree for a, _, _ in legs]
    min_deg, max_deg = min(degs), max(degs)
    vertices: dict = {}
    terms: dict = {}
    ncoords = len(legs)

    def rec(n, start, chosen, prod, deg, ksum):
        depth = len(chosen)
        if depth == n:
            if deg != top:
                return
            if ksum != n - 3 and not (corrupt_quartic and n == 4):
                return
            tr = model.trace_of(prod)
            if tr == 0:
                return
            ks = [legs[c][1] for c in chosen]
            coef = 1 if (corrupt_quartic and n == 4) else multinomial(n - 3, ks)
            value = coef * tr
            vertices.setdefault(n, {})[tuple(chosen)] = value
            n_odd = sum(1 for c in chosen if legs[c][2])
            sign = -1 if (n_odd * (n_odd - 1) // 2) & 1 else 1
            denom = 1
            for c in set(chosen):
                denom *= factorial(chosen.count(c))
            terms[tuple(chosen)] = mpq(sign * value, denom) if isinstance(value, int) else value * mpq(sign, denom)
            return
        remaining = n - depth
        for c in range(start, ncoords):
            a, k, par = legs[c]
            if par and chosen and chosen[-1] == c:
                continue
            nk = ksum + k
            if nk > n - 3 and not (corrupt_quartic and n == 4):
                continue
            nd = deg + degs[c]
            rest = remaining - 1
            if nd + rest * min_deg > top or nd + rest * max_deg < top:
                continue
            nprod = model.mul_vec(prod, {a: ONE})
            if not nprod:
                continue
            chosen.append(c)
            rec(n, c, chosen, nprod, nd, nk)
            chosen.pop()

    for n in range(3, n_max + 1):
        rec(n, 0, [], {model.unit: ONE}, 0, 0)
    return ActionFunctional(model, n_max, k_max, u, vertices, SuperSeries(u, n_max, terms), corrupt_quartic)


# ---------------------------------------------------------------------------
# field-substitution route
# ---------------------------------------------------------------------------


def _power_table(fields: dict, order: int, xmax: int, upto: int) -> list:
    """P[m][j] = [x^j] M(x)^m for m <= upto, j <= xmax; M(x) = sum_k fields[k] x^k / k!."""
    some = next(iter(fields.values()))
    M = {k: f.scale(mpq(1, factorial(k))) for k, f in fields.items() if k <= xmax and not f.is_zero()}
    one = ElementSeries.from_element(some.model, some.universe, order, {some.model.unit: ONE})
    table = [{0: one}]
    for m in range(1, upto + 1):
        prev = table[-1]
        cur: dict = {}
        for j, pj in prev.items():
            for k, mk in M.items():
                if j + k > xmax:
                    continue
                prod = pj * mk
                if prod.is_zero():
                    continue
                cur[j + k] = cur[j + k] + prod if j + k in cur else prod
        table.append(cur)
    return table


def action_on_fields(fields: dict, order: int) -> SuperSeries:
    """S evaluated on element-valued fields {t-power: ElementSeries}, truncated at ``order``."""
    table = _power_table(fields, order, max(order - 3, 0), order)
    some = next(iter(fields.values()))
    out = SuperSeries(some.universe, order)
    for n in range(3, order + 1):
        piece = table[n].get(n - 3)
        if piece is None:
            continue
        out = out + piece.trace().scale(mpq(factorial(n - 3), factorial(n)))
    return out


def action_gradients(fields: dict, order: int, powers) -> dict:
    """W_j for each j in ``powers``, with dS = sum_j Tr(d mu_j W_j).

    W_j = sum_n (n-3)!/((n-1)! j!) [x^{n-3-j}] M(x)^{n-1}.
    """
    xmax = max(order - 3, 0)
    table = _power_table(fields, order, xmax, order)
    some = next(iter(fields.values()))
    out = {}
    for j in powers:
        acc = ElementSeries(some.model, some.universe, order)
        for n in range(j + 3, order + 2):
            piece = table[n - 1].get(n - 3 - j)
            if piece is None:
                continue
            acc = acc + piece.scale(mpq(factorial(n - 3), factorial(n - 1) * factorial(j)))
        out[j] = acc
    return out


def action_gradient(fields: dict, order: int, j: int = 0) -> ElementSeries:
    """The single gradient W_j (see :func:`action_gradients`)."""
    return action_gradients(fields, order, [j])[j]


def coordinate_fields(model: DGBVModel, u: CoordinateSystem, vectors: dict, order: int) -> dict:
    """Fields mu_k = sum_{A at t^k} tau^A E_A for coordinate -> (t_power, vector) data."""
    by_k: dict = {}
    for coord, (k, vec) in vectors.items():
        by_k.setdefault(k, {})[coord] = vec
    return {k: ElementSeries.linear(model, u, order, vecs) for k, vecs in by_k.items()}


def action_series_by_fields(model: DGBVModel, n_max: int, k_max: int | None = None) -> SuperSeries:
    """S on the full model basis via the generating function (independent of build_action)."""
    if k_max is None:
        k_max = n_max - 3
    u = action_universe(model, k_max)
    vectors = {i: (c.t_power, {model.index[c.basis_id]: ONE}) for i, c in enumerate(u.coords)}
    return action_on_fields(coordinate_fields(model, u, vectors, n_max), n_max)


# ---------------------------------------------------------------------------
# bracket and master equation
# ---------------------------------------------------------------------------


def bracket_kernel(model: DGBVModel) -> list[list]:
    """K^{bc} = Tr(del(e^b) e^c) with e^b the trace-dual basis: Tr(e_a e^b) = delta_ab."""
    n = model.n
    gram = [[model.trace_of(model.mul_vec({a: ONE}, {b: ONE})) for b in range(n)] for a in range(n)]
    dual = linalg.inverse(gram)  # e^b = sum_d dual[d][b] e_d
    duals = [{d: dual[d][b] for d in range(n) if dual[d][b] != 0} for b in range(n)]
    return [
        [model.trace_of(model.mul_vec(model.op_vec(model.dl_cols, duals[b]), duals[c])) for c in range(n)]
        for b in range(n)
    ]


def odd_bracket(f: SuperSeries, h: SuperSeries, model: DGBVModel) -> SuperSeries:
    """Bracket of two series on an action universe (no locality requirement)."""
    f._same(h)
    u = f.universe
    kernel = bracket_kernel(model)
    t0 = [u.coord(b.id, 0) for b in model.basis]
    out: dict = {}
    right = {}
    left = {}
    for b in range(model.n):
        for c in range(model.n):
            k = kernel[b][c]
            if k == 0:
                continue
            if b not in right:
                right[b] = f.derivative(t0[b], "right").terms
            if c not in left:
                left[c] = h.derivative(t0[c], "left").terms
            sign = -BRACKET_SIGN if model.parity[b] else BRACKET_SIGN
            _add_into(out, _mul_terms(u, right[b], left[c], f.nmax), sign * k)
    return SuperSeries(u, f.nmax, out)


def poisson_bracket(F: ActionFunctional, H, model: DGBVModel | None = None) -> SuperSeries:
    """{F, H} for a local functional F (an ActionFunctional) and any H on the same universe."""
    if not isinstance(F, ActionFunctional):
        raise TypeError("the first argument of the bracket must be a local ActionFunctional")
    model = model or F.model
    if F.model is not model:
        raise ModelMismatch("functional and model differ")
    h = H.series if isinstance(H, ActionFunctional) else H
    return odd_bracket(F.series, h, model)


def q_vector_field(model: DGBVModel, u: CoordinateSystem) -> list[dict]:
    """V^B = sum_A (-1)^{|A|} q_{BA} tau^A for Q = d + t del acting on E_A = e_a t^k."""
    V: list[dict] = [dict() for _ in range(len(u))]
    for A, c in enumerate(u.coords):
        a = model.index[c.basis_id]
        sign = -1 if c.parity else 1
        for b, v in model.d_cols[a]:
            B = u.index.get((model.ids[b], c.t_power))
            if B is not None:
                V[B][(A,)] = V[B].get((A,), ZERO) + sign * v
        for b, v in model.dl_cols[a]:
            B = u.index.get((model.ids[b], c.t_power + 1))
            if B is not None:
                V[B][(A,)] = V[B].get((A,), ZERO) + sign * v
    return V


def apply_q(S: SuperSeries, model: DGBVModel) -> SuperSeries:
    """QS = sum_B V^B d_B S."""
    u = S.universe
    out: dict = {}
    for B, vb in enumerate(q_vector_field(model, u)):
        if not vb:
            continue
        dS = S.derivative(B, "left")
        if dS.is_zero():
            continue
        _add_into(out, _mul_terms(u, vb, dS.terms, S.nmax))
    return SuperSeries(u, S.nmax, out)


def cme_residual(S: ActionFunctional, order: int | None = None) -> SuperSeries:
    """QS + 1/2 {S, S} truncated at ``order`` (default: the action's n_max)."""
    order = S.n_max if order is None else order
    if order > S.n_max:
        raise ParamError("order exceeds the action's n_max")
    series = S.series.truncate(order)
    res = apply_q(series, S.model) + poisson_bracket(S, series).scale(mpq(1, 2))
    return res.truncate(order)
