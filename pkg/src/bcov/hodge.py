"""Finite-dimensional Hodge theory on a dGBV model.

Everything is exact: the pseudo-inverse of the Laplacian is obtained from the
identity ``(Delta + Pi)^{-1} = Delta^+ + Pi`` (valid because the Laplacian is
self-adjoint, so its image is orthogonal to its kernel), so no spectral
decomposition is needed.

The inner product is linear in the first slot: ``<x, y> = sum x_a conj(y_b) h_ab``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import linalg
from .dgbv import DGBVModel
from .errors import KahlerAxiomError, SingularInnerProduct
from .scalar import ONE, ZERO, conj
from .series import TLaurent


@dataclass(frozen=True)
class LinearOperator:
    """Matrix in the model basis (``matrix[target][source]``) with a degree shift."""

    matrix: tuple
    degree: int

    @classmethod
    def of(cls, matrix, degree: int) -> "LinearOperator":
        return cls(tuple(tuple(row) for row in matrix), degree)

    def rows(self) -> list[list]:
        return [list(r) for r in self.matrix]

    @cached_property
    def cols(self) -> list[tuple]:
        n = len(self.matrix)
        return [tuple((r, self.matrix[r][c]) for r in range(n) if self.matrix[r][c] != 0) for c in range(n)]

    def __call__(self, vec: dict) -> dict:
        out: dict = {}
        for a, x in vec.items():
            for r, v in self.cols[a]:
                out[r] = out.get(r, ZERO) + v * x
        return {k: v for k, v in out.items() if v != 0}

    def is_zero(self) -> bool:
        return linalg.is_zero(self.matrix)

    @property
    def odd(self) -> bool:
        return bool(self.degree & 1)


@dataclass(frozen=True)
class PropagatorKernel:
    """Two-tensor P^{ab} with sum_b P^{ab} Tr(e_b beta) = (G del beta)_a."""

    tensor: tuple
    operator: LinearOperator


def adjoint(op: LinearOperator | list, model: DGBVModel) -> LinearOperator:
    """Adjoint with respect to the model inner product."""
    if isinstance(op, LinearOperator):
        m, deg = op.rows(), -op.degree
    else:
        m, deg = op, 0
    h = model.inner
    hc = [[conj(x) for x in row] for row in h]
    hc_inv = linalg.inverse(hc)
    if hc_inv is None:
        raise SingularInnerProduct("inner product matrix is singular")
    adj = linalg.matmul(linalg.matmul(hc_inv, linalg.conj_transpose(m)), hc)
    return LinearOperator.of(adj, deg)


def inner(model: DGBVModel, x: dict, y: dict):
    h = model.inner
    return sum((xa * conj(yb) * h[a][b] for a, xa in x.items() for b, yb in y.items() if h[a][b] != 0), ZERO)


class HodgeData:
    """Cached Hodge-theoretic operators of one model."""

    def __init__(self, model: DGBVModel):
        self.model = model
        n = model.n
        self.d = LinearOperator.of(model.d, 1)
        self.dl = LinearOperator.of(model.dl, -1)
        self.d_star = adjoint(self.d, model)
        d, ds = model.d, self.d_star.rows()
        self.laplacian = LinearOperator.of(linalg.add(linalg.matmul(d, ds), linalg.matmul(ds, d)), 0)
        lap = self.laplacian.rows()
        # harmonic basis: kernel of the Laplacian, one homogeneous vector per free column
        self.harmonic_vectors = [
            {i: v for i, v in enumerate(vec) if v != 0} for vec in linalg.nullspace(lap, n)
        ] if not linalg.is_zero(lap) else [{i: ONE} for i in range(n)]
        self.harmonic_labels = []
        for j, vec in enumerate(self.harmonic_vectors):
            if len(vec) == 1 and next(iter(vec.values())) == 1:
                self.harmonic_labels.append(model.ids[next(iter(vec))])
            else:
                self.harmonic_labels.append(f"H{j}")
        self.harmonic_parity = [model.basis[next(iter(v))].parity for v in self.harmonic_vectors]
        self.harmonic_degree = [model.basis[next(iter(v))].degree for v in self.harmonic_vectors]
        self.projection = LinearOperator.of(self._orthogonal_projector(), 0)
        pi = self.projection.rows()
        inv = linalg.inverse(linalg.add(lap, pi))
        if inv is None:  # pragma: no cover - impossible for a positive-definite inner product
            raise SingularInnerProduct("Laplacian plus projection is singular")
        self.lap_pinv = LinearOperator.of(linalg.sub(inv, pi), 0)
        self.green = LinearOperator.of(linalg.matmul(ds, self.lap_pinv.rows()), -1)
        self.gdel = LinearOperator.of(linalg.matmul(self.green.rows(), model.dl), -2)

    def _orthogonal_projector(self) -> list[list]:
        model, n = self.model, self.model.n
        ks = self.harmonic_vectors
        if len(ks) == n:
            return linalg.identity(n)
        gram = [[inner(model, ki, kj) for ki in ks] for kj in ks]  # gram[j][i] = <k_i, k_j>
        gram_inv = linalg.inverse(gram)
        proj = linalg.zeros(n, n)
        for src in range(n):
            rhs = [inner(model, {src: ONE}, kj) for kj in ks]
            coef = linalg.matvec(gram_inv, rhs)
            for c, k in zip(coef, ks):
                if c == 0:
                    continue
                for a, v in k.items():
                    proj[a][src] = proj[a][src] + c * v
        return proj

    # ----- harmonic coordinates ------------------------------------------------
    @cached_property
    def harmonic_coordinates_matrix(self) -> list[list]:
        """Matrix expressing Pi(x) in the harmonic basis: row j gives coefficient of Delta_j."""
        ks, n = self.harmonic_vectors, self.model.n
        mat = [[ZERO] * len(ks) for _ in range(n)]
        for j, k in enumerate(ks):
            for a, v in k.items():
                mat[a][j] = v
        _, piv = linalg.rref(mat)
        # solve mat * c = Pi(e_src) for each source column
        out = [[ZERO] * n for _ in ks]
        pi = self.projection
        for src in range(n):
            target = pi({src: ONE})
            rhs = [target.get(a, ZERO) for a in range(n)]
            c = linalg.solve(mat, rhs)
            for j in range(len(ks)):
                out[j][src] = c[j]
        return out

    def harmonic_components(self, vec: dict) -> list:
        """Coefficients of Pi(vec) in the harmonic basis."""
        m = self.harmonic_coordinates_matrix
        return [sum((row[a] * x for a, x in vec.items() if row[a] != 0), ZERO) for row in m]

    def is_kahler(self) -> bool:
        try:
            self.check_kahler()
        except KahlerAxiomError:
            return False
        return True

    def check_kahler(self) -> None:
        """Kähler-surrogate identities; raises KahlerAxiomError at the first failure.

        (i) G del + del G = 0, (ii) [Delta, del] = 0, (iii) Pi del = del Pi = 0,
        (iv) Tr(Pi(x) y) = Tr(x Pi(y)) (the harmonic projection is trace-self-adjoint),
        and the propagator is graded-symmetric off the harmonics.
        """
        m = self.model
        g, dl, lap, pi = self.green.rows(), m.dl, self.laplacian.rows(), self.projection.rows()
        checks = [
            ("kahler-green-del", linalg.add(linalg.matmul(g, dl), linalg.matmul(dl, g))),
            ("kahler-laplacian-del", linalg.sub(linalg.matmul(lap, dl), linalg.matmul(dl, lap))),
            ("kahler-projection-del", linalg.matmul(pi, dl)),
            ("kahler-del-projection", linalg.matmul(dl, pi)),
        ]
        for name, mat in checks:
            for src in range(m.n):
                if any(mat[r][src] != 0 for r in range(m.n)):
                    raise KahlerAxiomError(name, (m.ids[src],))
        tr, mul = m.trace_of, m.mul_vec
        for a in range(m.n):
            for b in range(m.n):
                ea, eb = {a: ONE}, {b: ONE}
                if tr(mul(self.projection(ea), eb)) != tr(mul(ea, self.projection(eb))):
                    raise KahlerAxiomError("kahler-trace-projection", (m.ids[a], m.ids[b]))
        self.check_propagator_symmetry()

    def check_propagator_symmetry(self) -> None:
        """Tr((G del x) y) = (-1)^{|x||y|} Tr((G del y) x) on the complement of the harmonics."""
        m = self.model
        tr, mul, par = m.trace_of, m.mul_vec, m.parity
        comp = []
        for a in range(m.n):
            v = {a: ONE}
            pv = self.projection(v)
            for k, c in pv.items():
                v[k] = v.get(k, ZERO) - c
            comp.append({k: c for k, c in v.items() if c != 0})
        for a in range(m.n):
            for b in range(m.n):
                x, y = comp[a], comp[b]
                s = -1 if par[a] and par[b] else 1
                lhs = tr(mul(self.gdel(x), y))
                rhs = tr(mul(self.gdel(y), x))
                if lhs != (rhs if s == 1 else -rhs):
                    raise KahlerAxiomError("propagator-symmetry", (m.ids[a], m.ids[b]))

    # ----- identities used by tests and reports ------------------------------
    def homotopy_defect(self) -> list[list]:
        """1 - (dG + Gd) - Pi; zero on every valid model."""
        m, g = self.model, self.green.rows()
        dg = linalg.add(linalg.matmul(m.d, g), linalg.matmul(g, m.d))
        return linalg.sub(linalg.sub(linalg.identity(m.n), dg), self.projection.rows())

    def hodge_ranks(self) -> dict:
        m = self.model
        return {
            "dimension": m.n,
            "harmonic": len(self.harmonic_vectors),
            "image_d": linalg.rank(m.d),
            "image_d_star": linalg.rank(self.d_star.rows()),
            "kernel_d": m.n - linalg.rank(m.d),
        }


_CACHE: dict = {}


def hodge_data(model: DGBVModel) -> HodgeData:
    key = id(model)
    hit = _CACHE.get(key)
    if hit is None or hit.model is not model:
        hit = HodgeData(model)
        _CACHE[key] = hit
    return hit


def laplacian(model: DGBVModel) -> LinearOperator:
    return hodge_data(model).laplacian


def harmonic_projection(model: DGBVModel) -> tuple[LinearOperator, list[dict]]:
    h = hodge_data(model)
    return h.projection, h.harmonic_vectors


def green_operator(model: DGBVModel) -> LinearOperator:
    return hodge_data(model).green


def propagator(model: DGBVModel) -> PropagatorKernel:
    """Kernel of G o del through the trace pairing; requires the Kähler-surrogate identities."""
    h = hodge_data(model)
    h.check_kahler()
    gram = [[model.trace_of(model.mul_vec({a: ONE}, {b: ONE})) for b in range(model.n)] for a in range(model.n)]
    ginv = linalg.inverse(gram)
    tensor = linalg.matmul(h.gdel.rows(), ginv)
    return PropagatorKernel(tuple(tuple(r) for r in tensor), h.gdel)


def q_class(x: TLaurent, max_terms: int | None = None) -> TLaurent:
    """Pi sum_k (-t del G)^k x: the cohomology class of a Q = d + t del cochain."""
    model = x.model
    h = hodge_data(model)
    h.check_kahler()
    dl = LinearOperator.of(model.dl, -1)
    step = lambda v: {k: -c for k, c in dl(h.green(v)).items()}  # noqa: E731
    total = x.map(h.projection)
    current = x
    limit = max_terms if max_terms is not None else 2 * model.n + 2
    for _ in range(limit):
        current = current.map(step).shift(1)
        if current.is_zero():
            break
        total = total + current.map(h.projection)
    else:
        if not current.is_zero():  # pragma: no cover - del G is nilpotent on a finite model
            raise KahlerAxiomError("kahler-nilpotence", ())
    return total


def q_class_bruteforce(x: TLaurent) -> TLaurent:
    """Oracle: decompose x = h + Q y + w on its (upward-extended) t-window by elimination.

    ``h`` is harmonic, ``y`` and ``w`` lie in the image of the adjoint of ``d``;
    the harmonic part ``h`` is returned.  Independent of the transfer formula.
    """
    model = x.model
    hd = hodge_data(model)
    n = model.n
    if x.is_zero():
        return TLaurent(model)
    kmin, kmax = x.bounds
    # the class map only raises t-powers, by at most the nilpotency length of del G
    kmax += n
    powers = list(range(kmin, kmax + 1))
    ds = hd.d_star.rows()
    # columns spanning im d*
    img = []
    for vec in linalg.transpose(ds):
        if any(v != 0 for v in vec) and linalg.rank(img + [list(vec)]) > len(img):
            img.append(list(vec))
    harm = [[k.get(a, ZERO) for a in range(n)] for k in hd.harmonic_vectors]
    unknowns = []  # (kind, power, vector)
    for p in powers:
        unknowns += [("h", p, v) for v in harm]
        unknowns += [("w", p, v) for v in img]
        if p < kmax:
            unknowns += [("y", p, v) for v in img]
    rows = len(powers) * n
    mat = linalg.zeros(rows, len(unknowns))
    for j, (kind, p, v) in enumerate(unknowns):
        vec = {a: c for a, c in enumerate(v) if c != 0}
        if kind in ("h", "w"):
            contrib = {(p, a): c for a, c in vec.items()}
        else:
            contrib = {}
            for a, c in model.op_vec(model.d_cols, vec).items():
                contrib[(p, a)] = contrib.get((p, a), ZERO) + c
            for a, c in model.op_vec(model.dl_cols, vec).items():
                contrib[(p + 1, a)] = contrib.get((p + 1, a), ZERO) + c
        for (pp, a), c in contrib.items():
            mat[(pp - kmin) * n + a][j] = c
    rhs = [x.coeffs.get(p, {}).get(a, ZERO) for p in powers for a in range(n)]
    sol = linalg.solve(mat, rhs)
    if sol is None:
        raise ValueError("input is not decomposable on its t-window")
    out: dict = {}
    for (kind, p, v), c in zip(unknowns, sol):
        if kind == "h" and c != 0:
            tgt = out.setdefault(p, {})
            for a, val in enumerate(v):
                if val != 0:
                    tgt[a] = tgt.get(a, ZERO) + c * val
    return TLaurent(model, out)
