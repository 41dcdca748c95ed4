"""Independent reference implementations used as test oracles.

Nothing here imports the package's algebra code: models are read straight
from the raw ModelSpec dictionaries with ``fractions.Fraction`` arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

AXIOM_ORDER = (
    "product-degree",
    "d-degree",
    "d-bidegree",
    "del-degree",
    "del-bidegree",
    "trace-support",
    "inner-product-grading",
    "unit",
    "graded-commutativity",
    "associativity",
    "d-squared",
    "del-squared",
    "d-del-anticommute",
    "d-derivation",
    "del-second-order",
    "trace-d",
    "trace-del",
    "d-adjoint",
    "del-adjoint",
    "trace-nondegenerate",
    "inner-product",
)


def frac(text: str) -> Fraction:
    return Fraction(text.lstrip("+"))


class RawModel:
    """Dense rational view of a real ModelSpec (no validation, no package code)."""

    def __init__(self, spec: dict):
        self.ids = [b["id"] for b in spec["basis"]]
        self.n = len(self.ids)
        idx = {x: i for i, x in enumerate(self.ids)}
        self.idx = idx
        self.deg = [b["degree"] for b in spec["basis"]]
        self.bideg = [tuple(b["bidegree"]) if "bidegree" in b else None for b in spec["basis"]]
        self.par = [d % 2 for d in self.deg]
        self.dim = spec["dimension"]
        self.unit = idx[spec["unit"]]
        self.mult = {}
        for a, b, c, v in spec["product"]:
            val = frac(v)
            if val:
                self.mult.setdefault((idx[a], idx[b]), {})[idx[c]] = val
        self.d = self._op(spec["d"])
        self.dl = self._op(spec["del"])
        self.tr = {idx[a]: frac(v) for a, v in spec["trace"] if frac(v)}
        self.inner = None
        if spec.get("inner_product") is not None:
            self.inner = {}
            for a, b, v in spec["inner_product"]:
                if frac(v):
                    self.inner[(idx[a], idx[b])] = frac(v)

    def _op(self, rows):
        out = {}
        for s, t, v in rows:
            if frac(v):
                out.setdefault(self.idx[s], {})[self.idx[t]] = frac(v)
        return out

    # vectors are dicts index -> Fraction
    @staticmethod
    def add(*vs, signs=None):
        out = {}
        for k, v in enumerate(vs):
            s = 1 if signs is None else signs[k]
            for a, x in v.items():
                out[a] = out.get(a, 0) + s * x
        return {a: x for a, x in out.items() if x}

    def mul(self, x, y):
        out = {}
        for a, xa in x.items():
            for b, yb in y.items():
                for c, v in self.mult.get((a, b), {}).items():
                    out[c] = out.get(c, 0) + xa * yb * v
        return {a: x for a, x in out.items() if x}

    def apply(self, op, x):
        out = {}
        for a, xa in x.items():
            for c, v in op.get(a, {}).items():
                out[c] = out.get(c, 0) + xa * v
        return {a: x for a, x in out.items() if x}

    def trace(self, x):
        return sum((self.tr.get(a, 0) * v for a, v in x.items()), Fraction(0))

    def e(self, a):
        return {a: Fraction(1)}

    def violations(self) -> set:
        """Every violated axiom name (not just the first)."""
        n, deg, bi, par = self.n, self.deg, self.bideg, self.par
        has_bi = all(b is not None for b in bi)
        out = set()
        for (a, b), row in self.mult.items():
            for c in row:
                if deg[c] != deg[a] + deg[b] or (has_bi and bi[c] != (bi[a][0] + bi[b][0], bi[a][1] + bi[b][1])):
                    out.add("product-degree")
        for name, op, shift, bs in (("d", self.d, 1, (0, 1)), ("del", self.dl, -1, (-1, 0))):
            for s, row in op.items():
                for t in row:
                    if deg[t] != deg[s] + shift:
                        out.add(f"{name}-degree")
                    elif has_bi and bi[t] != (bi[s][0] + bs[0], bi[s][1] + bs[1]):
                        out.add(f"{name}-bidegree")
        for a in self.tr:
            if deg[a] != 2 * self.dim or (has_bi and bi[a] != (self.dim, self.dim)):
                out.add("trace-support")
        inner = self.inner if self.inner is not None else {(a, a): Fraction(1) for a in range(n)}
        for (a, b) in inner:
            if deg[a] != deg[b] or (has_bi and bi[a] != bi[b]):
                out.add("inner-product-grading")
        e = self.e
        u = self.unit
        if deg[u] != 0 or any(self.mul(e(u), e(a)) != e(a) or self.mul(e(a), e(u)) != e(a) for a in range(n)):
            out.add("unit")
        for a in range(n):
            for b in range(n):
                s = -1 if par[a] and par[b] else 1
                if self.mul(e(a), e(b)) != {k: s * v for k, v in self.mul(e(b), e(a)).items()}:
                    out.add("graded-commutativity")
                for c in range(n):
                    if self.mul(self.mul(e(a), e(b)), e(c)) != self.mul(e(a), self.mul(e(b), e(c))):
                        out.add("associativity")
        D, L = self.d, self.dl
        for a in range(n):
            if self.apply(D, self.apply(D, e(a))):
                out.add("d-squared")
            if self.apply(L, self.apply(L, e(a))):
                out.add("del-squared")
            if self.add(self.apply(D, self.apply(L, e(a))), self.apply(L, self.apply(D, e(a)))):
                out.add("d-del-anticommute")
        for a in range(n):
            for b in range(n):
                ab = self.mul(e(a), e(b))
                lhs = self.apply(D, ab)
                rhs = self.add(self.mul(self.apply(D, e(a)), e(b)), self.mul(e(a), self.apply(D, e(b))), signs=[1, -1 if par[a] else 1])
                if lhs != rhs:
                    out.add("d-derivation")
        # seven-term identity for a second-order operator (del(1) = 0 assumed by the degree rules)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    pa, pb = par[a], par[b]
                    abc = self.mul(self.mul(e(a), e(b)), e(c))
                    terms = [
                        self.mul(self.apply(L, self.mul(e(a), e(b))), e(c)),
                        self.mul(e(a), self.apply(L, self.mul(e(b), e(c)))),
                        self.mul(e(b), self.apply(L, self.mul(e(a), e(c)))),
                        self.mul(self.mul(self.apply(L, e(a)), e(b)), e(c)),
                        self.mul(self.mul(e(a), self.apply(L, e(b))), e(c)),
                        self.mul(self.mul(e(a), e(b)), self.apply(L, e(c))),
                    ]
                    signs = [1, (-1) ** pa, (-1) ** ((pa + 1) * pb), -1, -((-1) ** pa), -((-1) ** (pa + pb))]
                    if self.apply(L, abc) != self.add(*terms, signs=signs):
                        out.add("del-second-order")
        for a in range(n):
            if self.trace(self.apply(D, e(a))):
                out.add("trace-d")
            if self.trace(self.apply(L, e(a))):
                out.add("trace-del")
            for b in range(n):
                sa = -1 if par[a] else 1
                if self.trace(self.mul(self.apply(D, e(a)), e(b))) + sa * self.trace(self.mul(e(a), self.apply(D, e(b)))):
                    out.add("d-adjoint")
                if self.trace(self.mul(self.apply(L, e(a)), e(b))) - sa * self.trace(self.mul(e(a), self.apply(L, e(b)))):
                    out.add("del-adjoint")
        gram = [[self.trace(self.mul(e(a), e(b))) for b in range(n)] for a in range(n)]
        if rank(gram) < n:
            out.add("trace-nondegenerate")
        h = [[inner.get((a, b), Fraction(0)) for b in range(n)] for a in range(n)]
        if any(h[a][b] != h[b][a] for a in range(n) for b in range(n)):
            out.add("inner-product")
        elif any(det([row[:k] for row in h[:k]]) <= 0 for k in range(1, n + 1)):
            out.add("inner-product")
        return out

    def first_violation(self) -> str | None:
        v = self.violations()
        for name in AXIOM_ORDER:
            if name in v:
                return name
        return None


def rank(m) -> int:
    m = [list(r) for r in m]
    rows, cols = len(m), len(m[0]) if m else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
    return r


def det(m) -> Fraction:
    """Leibniz-free determinant by fraction elimination."""
    m = [list(map(Fraction, r)) for r in m]
    n, sign, out = len(m), 1, Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        out *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * out


def solve(a, b):
    """Solve a x = b over Fractions (a square, invertible); returns None if singular."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------


def count_trees_by_pruning(n: int) -> int:
    """Count leaf-labelled trees with internal valence >= 3 by removing the last leaf.

    Every such tree on n leaves arises from exactly one tree on n-1 leaves by
    attaching leaf n to a vertex or to the midpoint of an edge; so the count
    is sum over trees T_{n-1} of (#internal vertices + #edges).  Trees are
    tracked by their multiset of (internal vertices, edges) sizes.
    """
    # state: dict (v, e) -> number of trees, e = leaves + v - 1
    states = {(1, 3): 1}
    for leaves in range(3, n):
        nxt: dict = {}
        for (v, e), cnt in states.items():
            # attach to an internal vertex: v same, e + 1
            nxt[(v, e + 1)] = nxt.get((v, e + 1), 0) + cnt * v
            # subdivide an edge: v + 1, e + 2
            nxt[(v + 1, e + 2)] = nxt.get((v + 1, e + 2), 0) + cnt * e
        states = nxt
    return sum(states.values())


def compatible_split_families(n: int):
    """All families of pairwise compatible nontrivial splits of {0..n-1} (sets avoiding n-1)."""
    leaves = range(n - 1)
    splits = [frozenset(c) for r in range(2, n - 1) for c in combinations(leaves, r)]

    def ok(a, b):
        return a <= b or b <= a or not (a & b)

    fams = [frozenset()]
    for s in splits:
        fams += [f | {s} for f in fams if all(ok(s, x) for x in f)]
    return fams


# ---------------------------------------------------------------------------
# Grassmann polynomials (commuting even and anticommuting odd variables)
# ---------------------------------------------------------------------------


class Grassmann:
    """Polynomials as {sorted variable tuple: Fraction} with explicit parities."""

    def __init__(self, parity):
        self.parity = list(parity)

    def sort(self, word):
        """(sorted word, sign) or (None, 0) when an odd variable repeats (bubble sort)."""
        w = list(word)
        sign = 1
        for i in range(len(w)):
            for j in range(len(w) - 1 - i):
                if w[j] > w[j + 1]:
                    if self.parity[w[j]] and self.parity[w[j + 1]]:
                        sign = -sign
                    w[j], w[j + 1] = w[j + 1], w[j]
        for a, b in zip(w, w[1:]):
            if a == b and self.parity[a]:
                return None, 0
        return tuple(w), sign

    def mul(self, f, g):
        out = {}
        for m1, c1 in f.items():
            for m2, c2 in g.items():
                m, s = self.sort(m1 + m2)
                if m is not None:
                    out[m] = out.get(m, 0) + s * c1 * c2
        return {m: c for m, c in out.items() if c}

    def d_left(self, f, v):
        out = {}
        for m, c in f.items():
            if v not in m:
                continue
            i = m.index(v)
            odd_before = sum(self.parity[x] for x in m[:i])
            s = -1 if (self.parity[v] and odd_before % 2) else 1
            rest = m[:i] + m[i + 1:]
            out[rest] = out.get(rest, 0) + s * m.count(v) * c
        return {m: c for m, c in out.items() if c}

    def d_right(self, f, v):
        out = {}
        for m, c in f.items():
            if v not in m:
                continue
            i = len(m) - 1 - m[::-1].index(v)
            odd_after = sum(self.parity[x] for x in m[i + 1:])
            s = -1 if (self.parity[v] and odd_after % 2) else 1
            rest = m[:i] + m[i + 1:]
            out[rest] = out.get(rest, 0) + s * m.count(v) * c
        return {m: c for m, c in out.items() if c}


def cubic_action(raw: RawModel):
    """(1/6) Tr(mu^3), mu = sum_a tau^a e_a, moving coordinates left with Koszul signs."""
    G = Grassmann(raw.par)
    out = {}
    p = raw.par
    for a in range(raw.n):
        for b in range(raw.n):
            ab = raw.mul(raw.e(a), raw.e(b))
            for c in range(raw.n):
                tr = raw.trace(raw.mul(ab, raw.e(c)))
                if not tr:
                    continue
                m, s = G.sort((a, b, c))
                if m is None:
                    continue
                # (t^a e_a)(t^b e_b)(t^c e_c) = (-1)^{|a||b| + (|a|+|b|)|c|} t^a t^b t^c e_a e_b e_c
                k = p[a] * p[b] + (p[a] + p[b]) * p[c]
                sign = s * (-1 if k % 2 else 1)
                out[m] = out.get(m, 0) + sign * tr / 6
    return {m: c for m, c in out.items() if c}


def bracket_kernel(raw: RawModel):
    """K^{bc} = Tr(del(e^b) e^c) with the trace-dual basis."""
    n = raw.n
    gram = [[raw.trace(raw.mul(raw.e(a), raw.e(b))) for b in range(n)] for a in range(n)]
    cols = [solve(gram, [1 if i == b else 0 for i in range(n)]) for b in range(n)]
    # Tr(e_a e^b) = delta_ab with e^b = sum_d x_d e_d  <=>  gram x = delta_b
    duals = [{d: x for d, x in enumerate(col) if x} for col in cols]
    return [[raw.trace(raw.mul(raw.apply(raw.dl, duals[b]), duals[c])) for c in range(n)] for b in range(n)]


def odd_bracket(raw: RawModel, f, h):
    """{F, H} = - sum (-1)^{|b|} (F <- d_b) K^{bc} (d_c -> H)."""
    G = Grassmann(raw.par)
    K = bracket_kernel(raw)
    out = {}
    for b in range(raw.n):
        fb = G.d_right(f, b)
        if not fb:
            continue
        for c in range(raw.n):
            if not K[b][c]:
                continue
            s = -(-1 if raw.par[b] else 1) * K[b][c]
            for m, v in G.mul(fb, G.d_left(h, c)).items():
                out[m] = out.get(m, 0) + s * v
    return {m: c for m, c in out.items() if c}
