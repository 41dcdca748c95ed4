"""Genus-zero BCOV partition function by tree sums and by the perturbation recursion.

Feynman rules.  Vertices are the BCOV vertex tensors; every internal edge
carries t-power 0 at both ends and inserts ``-P``, where ``P`` is the kernel
of ``G o del``.  The minus sign is the bracket normalization fixed by the
classical master equation.  In operator form a subtree whose vertex collects
the product ``Y`` of its other slots feeds ``chi = -(G del)(Y)`` into its
parent slot.

Functional form.  ``F0 = sum_n 1/n! sum_{leaf-labelled trees T} A_T(phi, ..., phi)``
with ``phi = sum tau^{a,k} Delta_a t^k`` the harmonic field.  Leaf-labelled
trees with internal valence >= 3 have no nontrivial leaf-fixing automorphisms
(asserted by :meth:`Tree.automorphism_count`).

Recursion.  The classical field ``Phi = phi - G del W_0(Phi)`` is solved by
fixed-point iteration, and ``dF0/dtau^{a,k} = Tr(Delta_a W_k(Phi))``; the
potential is reassembled from this gradient with the Euler operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import factorial

from gmpy2 import mpq

from .action import action_gradients, multinomial
from .dgbv import DGBVModel
from .errors import ShapeMismatch, TooFewLegs
from .hodge import hodge_data
from .scalar import ONE, ZERO
from .series import CoordinateSystem, ElementSeries, SuperSeries, euler_integrate


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tree:
    """Leaf-labelled tree: leaves 0..n-1, internal vertices n..n+v-1, undirected edges."""

    n_leaves: int
    edges: tuple[tuple[int, int], ...]

    @property
    def n_internal(self) -> int:
        return len(self.edges) + 1 - self.n_leaves

    @property
    def vertices(self) -> range:
        return range(self.n_leaves, self.n_leaves + self.n_internal)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(self.n_leaves + self.n_internal)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def internal_edges(self) -> list[tuple[int, int]]:
        n = self.n_leaves
        return [(a, b) for a, b in self.edges if a >= n and b >= n]

    def leaves_below(self, frm: int, to: int) -> frozenset:
        """Leaves on the ``to`` side of the edge frm-to."""
        adj = self.adjacency()
        seen, stack, out = {frm, to}, [to], set()
        while stack:
            v = stack.pop()
            if v < self.n_leaves:
                out.add(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(out)

    def splits(self) -> frozenset:
        """Canonical form: the leaf bipartitions of internal edges (side without the last leaf)."""
        last = self.n_leaves - 1
        out = set()
        for a, b in self.internal_edges():
            side = self.leaves_below(a, b)
            if last in side:
                side = frozenset(range(self.n_leaves)) - side
            out.add(side)
        return frozenset(out)

    def automorphism_count(self) -> int:
        """Number of leaf-fixing automorphisms (always 1 for valence >= 3; computed, not assumed)."""
        adj = self.adjacency()
        sig = {}
        for v in self.vertices:
            key = frozenset(self.leaves_below(v, w) for w in adj[v])
            sig.setdefault(key, []).append(v)
        count = 1
        for group in sig.values():
            count *= factorial(len(group))
        return count

    @property
    def symmetry_factor(self) -> int:
        return self.automorphism_count()

    def valences(self) -> dict[int, int]:
        adj = self.adjacency()
        return {v: len(adj[v]) for v in self.vertices}


def enumerate_trees(n: int) -> list[Tree]:
    """One representative per isomorphism class of leaf-labelled trees, valence >= 3.

    Built by inserting leaf n-1 into trees on n-1 leaves, either at an internal
    vertex or by subdividing an edge; every tree arises exactly once.
    """
    if n < 3:
        raise TooFewLegs(f"trees need at least three leaves, got {n}")
    return list(_trees(n))


@lru_cache(maxsize=None)
def _trees(n: int) -> tuple[Tree, ...]:
    if n == 3:
        return (Tree(3, ((0, 3), (1, 3), (2, 3))),)
    out = []
    leaf = n - 1
    for t in _trees(n - 1):
        # relabel internal vertices up by one so the new leaf can take label n-1
        shift = lambda v: v + 1 if v >= n - 1 else v  # noqa: E731
        edges = [(shift(a), shift(b)) for a, b in t.edges]
        internal = [shift(v) for v in t.vertices]
        for v in internal:
            out.append(_make(n, edges + [(leaf, v)]))
        new = n + t.n_internal
        for i, (a, b) in enumerate(edges):
            rest = edges[:i] + edges[i + 1:]
            out.append(_make(n, rest + [(a, new), (b, new), (leaf, new)]))
    trees = tuple(out)
    assert len({t.splits() for t in trees}) == len(trees), "duplicate tree generated"
    for t in trees:
        assert t.automorphism_count() == 1, "leaf-labelled tree with a nontrivial automorphism"
    return trees


def _make(n: int, edges) -> Tree:
    return Tree(n, tuple(sorted(tuple(sorted(e)) for e in edges)))


def count_trees_bruteforce(n: int) -> int:
    """Independent count: families of pairwise compatible nontrivial leaf splits.

    A tree with valence >= 3 is determined by its splits, and every compatible
    family occurs (Buneman); splits are taken as subsets avoiding the last leaf.
    """
    leaves = range(n - 1)
    splits = [frozenset(c) for r in range(2, n - 1) for c in combinations(leaves, r)]

    def compatible(a, b):
        return a <= b or b <= a or not (a & b)

    count = 0

    def rec(start, chosen):
        nonlocal count
        count += 1
        for i in range(start, len(splits)):
            s = splits[i]
            if all(compatible(s, c) for c in chosen):
                chosen.append(s)
                rec(i + 1, chosen)
                chosen.pop()

    rec(0, [])
    return count


# ---------------------------------------------------------------------------
# amplitudes
# ---------------------------------------------------------------------------


def _rooted(tree: Tree):
    """Root at the internal vertex adjacent to leaf 0; children ordered by smallest leaf below."""
    adj = tree.adjacency()
    root = adj[0][0]

    def children(v, parent):
        kids = [w for w in adj[v] if w != parent]
        return sorted(kids, key=lambda w: min(tree.leaves_below(v, w)))

    return root, children


def tree_amplitude(tree: Tree, legs, S=None, P=None) -> object:
    """Amplitude of a tree with explicit legs ``(element, t_power)``.

    Each vertex contributes multinomial(val-3; k) Tr(product of slots), slots
    multiplied in the order (parent slot, children by smallest leaf below);
    internal edges insert ``-P`` at t-power 0.  ``S`` (an ActionFunctional) and
    ``P`` (a PropagatorKernel) are accepted for interface symmetry; the vertex
    rule is evaluated directly and ``P`` defaults to the model propagator.
    """
    legs = list(legs)
    if len(legs) != tree.n_leaves:
        raise ShapeMismatch(f"tree has {tree.n_leaves} leaves but {len(legs)} legs were given")
    model = legs[0][0].model
    if P is None and tree.internal_edges():
        from .hodge import propagator

        P = propagator(model)
    gdel = P.operator if P is not None else None
    root, children = _rooted(tree)
    n = tree.n_leaves

    def slot(v, parent):
        """(vector, t_power) delivered into the parent's slot by the branch at v."""
        if v < n:
            el, k = legs[v]
            return dict(el.coeffs), k
        kids = children(v, parent)
        contents = [slot(w, v) for w in kids]
        y = _vertex_product(model, contents, len(kids) + 1, leading=None)
        if y is None:
            return {}, 0
        chi = gdel(y)
        return {a: -c for a, c in chi.items()}, 0

    contents = [slot(w, root) for w in children(root, None)]
    y = _vertex_product(model, contents, len(contents), leading=None)
    return ZERO if y is None else model.trace_of(y)


def _vertex_product(model, contents, valence, leading):
    """multinomial(valence-3; k) times the ordered product of slot vectors, or None."""
    ks = [k for _, k in contents]
    if sum(ks) != valence - 3:
        return None
    prod = {model.unit: ONE}
    for vec, _ in contents:
        prod = model.mul_vec(prod, vec)
        if not prod:
            return None
    c = multinomial(valence - 3, ks + [0] * (valence - len(ks)))
    return {a: c * v for a, v in prod.items()}


# ---------------------------------------------------------------------------
# genus-zero potential
# ---------------------------------------------------------------------------


@dataclass
class Genus0Potential:
    series: SuperSeries
    order: int
    k_max: int
    method: str

    def t0_restriction(self, target: CoordinateSystem) -> SuperSeries:
        return self.series.transfer(target, self.order)


def harmonic_universe(model: DGBVModel, k_max: int) -> CoordinateSystem:
    """Coordinates tau^{a,k} for harmonic labels a and k <= k_max (shared per model)."""
    h = hodge_data(model)
    cache = h.__dict__.setdefault("_universes", {})
    if k_max not in cache:
        labels = list(zip(h.harmonic_labels, h.harmonic_parity))
        cache[k_max] = CoordinateSystem.from_labels(labels, k_max)
    return cache[k_max]


def harmonic_field(model: DGBVModel, u: CoordinateSystem, order: int) -> dict:
    """phi_k = sum_a tau^{a,k} Delta_a for every t-power present in ``u``."""
    h = hodge_data(model)
    label_vec = dict(zip(h.harmonic_labels, h.harmonic_vectors))
    by_k: dict = {}
    for i, c in enumerate(u.coords):
        by_k.setdefault(c.t_power, {})[i] = label_vec[c.basis_id]
    return {k: ElementSeries.linear(model, u, order, vecs) for k, vecs in sorted(by_k.items())}


def _require_kahler(model: DGBVModel):
    h = hodge_data(model)
    h.check_kahler()
    return h


def _field_product(fields_per_slot, valence: int, order: int, model, u) -> ElementSeries | None:
    """sum over t-assignments with sum k = valence - 3 of multinomial * ordered product.

    ``fields_per_slot`` is a list of {t_power: ElementSeries}; equivalently
    (valence-3)! [x^{valence-3}] prod_i M_i(x) with M_i(x) = sum_k X_{i,k} x^k / k!.
    """
    target = valence - 3
    acc = {0: ElementSeries.from_element(model, u, order, {model.unit: ONE})}
    for slot in fields_per_slot:
        nxt: dict = {}
        for j, pj in acc.items():
            for k, xk in slot.items():
                if j + k > target or xk.is_zero():
                    continue
                term = pj * xk.scale(mpq(1, factorial(k)))
                if term.is_zero():
                    continue
                nxt[j + k] = nxt[j + k] + term if j + k in nxt else term
        acc = nxt
        if not acc:
            return None
    res = acc.get(target)
    return None if res is None else res.scale(factorial(target))


def f0_tree_sum(model: DGBVModel, order: int, k_max: int | None = None) -> Genus0Potential:
    """F0 = sum_n 1/n! sum over leaf-labelled trees with n leaves, every leaf = phi."""
    h = _require_kahler(model)
    if order < 3:
        from .errors import ParamError

        raise ParamError("order must be at least 3")
    k_max = order - 3 if k_max is None else k_max
    u = harmonic_universe(model, k_max)
    phi = harmonic_field(model, u, order)
    gdel = h.gdel
    cols = gdel.cols
    total = SuperSeries(u, order)
    for n in range(3, order + 1):
        acc = SuperSeries(u, order)
        for tree in enumerate_trees(n):
            root, children = _rooted(tree)

            def slot(v, parent):
                if v < n:
                    return phi
                kids = children(v, parent)
                contents = [slot(w, v) for w in kids]
                if any(c is None for c in contents):
                    return None
                y = _field_product(contents, len(kids) + 1, order, model, u)
                if y is None:
                    return None
                chi = -y.apply(cols, odd_operator=False)
                return None if chi.is_zero() else {0: chi}

            contents = [slot(w, root) for w in children(root, None)]
            if any(c is None for c in contents):
                continue
            y = _field_product(contents, len(contents), order, model, u)
            if y is not None:
                acc = acc + y.trace().homogeneous(n)
        total = total + acc.scale(mpq(1, factorial(n)))
    return Genus0Potential(total, order, k_max, "trees")


def classical_field(model: DGBVModel, phi: dict, order: int) -> dict:
    """Solve Phi = phi - G del W_0(Phi) (only the t^0 component is corrected)."""
    h = hodge_data(model)
    cols = h.gdel.cols
    fields = dict(phi)
    base = phi[0]
    for _ in range(order):
        w0 = action_gradients(fields, order, [0])[0].truncate(order - 1)
        new0 = base - w0.apply(cols, odd_operator=False)
        if new0 == fields[0]:
            break
        fields[0] = new0
    return fields


def f0_gradient(model: DGBVModel, order: int, k_max: int | None = None, depth: int | None = None):
    """Harmonic gradient dF0/dtau^{a,k} = Tr(Delta_a W_k(Phi)) and its universe.

    ``depth`` limits the number of propagator insertions (``0`` gives the
    single-vertex part only); ``None`` iterates to the fixed point.
    """
    h = _require_kahler(model)
    k_max = order - 3 if k_max is None else k_max
    u = harmonic_universe(model, k_max)
    phi = harmonic_field(model, u, order)
    if depth is None:
        fields = classical_field(model, phi, order)
    else:
        fields = dict(phi)
        cols = h.gdel.cols
        for _ in range(depth):
            w0 = action_gradients(fields, order, [0])[0].truncate(order - 1)
            fields[0] = phi[0] - w0.apply(cols, odd_operator=False)
    powers = sorted({c.t_power for c in u.coords})
    W = action_gradients(fields, order, powers)
    label_vec = dict(zip(h.harmonic_labels, h.harmonic_vectors))
    grads = []
    for c in u.coords:
        delta = ElementSeries.from_element(model, u, order, label_vec[c.basis_id])
        grads.append((delta * W[c.t_power]).trace().truncate(order - 1))
    return grads, u


def f0_hpl(model: DGBVModel, order: int, k_max: int | None = None, depth: int | None = None) -> Genus0Potential:
    """F0 from the perturbation recursion, integrated with the Euler operator."""
    if order < 3:
        from .errors import ParamError

        raise ParamError("order must be at least 3")
    grads, u = f0_gradient(model, order, k_max, depth)
    k_max = order - 3 if k_max is None else k_max
    return Genus0Potential(euler_integrate(grads, check=True), order, k_max, "hpl")
