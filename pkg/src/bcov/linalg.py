"""Exact dense linear algebra over Q(i) on lists of lists.

The matrices in this package are small (at most a few hundred rows) and every
entry is an exact scalar, so plain Gaussian elimination is both adequate and
easy to audit.
"""

from __future__ import annotations

from .scalar import ONE, ZERO, conj


def zeros(rows: int, cols: int) -> list[list]:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> list[list]:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = ONE
    return m


def matmul(a: list[list], b: list[list]) -> list[list]:
    if not a:
        return []
    inner, cols = len(b), len(b[0]) if b else 0
    out = zeros(len(a), cols)
    for i, row in enumerate(a):
        orow = out[i]
        for k in range(inner):
            x = row[k]
            if x == 0:
                continue
            brow = b[k]
            for j in range(cols):
                y = brow[j]
                if y != 0:
                    orow[j] = orow[j] + x * y
    return out


def matvec(a: list[list], v: list) -> list:
    return [sum((x * y for x, y in zip(row, v) if x != 0 and y != 0), ZERO) for row in a]


def add(a: list[list], b: list[list]) -> list[list]:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: list[list], b: list[list]) -> list[list]:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(c, a: list[list]) -> list[list]:
    return [[c * x for x in row] for row in a]


def transpose(a: list[list]) -> list[list]:
    return [list(col) for col in zip(*a)]


def conj_transpose(a: list[list]) -> list[list]:
    return [[conj(x) for x in col] for col in zip(*a)]


def is_zero(a: list[list]) -> bool:
    return all(x == 0 for row in a for x in row)


def rref(a: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(row) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        pivot_row = m[r]
        for i in range(rows):
            if i != r:
                f = m[i][c]
                if f != 0:
                    m[i] = [x - f * y for x, y in zip(m[i], pivot_row)]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: list[list]) -> int:
    return len(rref(a)[1]) if a else 0


def inverse(a: list[list]) -> list[list] | None:
    """Exact inverse, or None when singular."""
    n = len(a)
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        return None
    return [row[n:] for row in red]


def solve(a: list[list], b: list) -> list | None:
    """One solution x of a x = b (free variables set to zero), or None."""
    cols = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, piv = rref(aug)
    if cols in piv:
        return None
    x = [ZERO] * cols
    for i, c in enumerate(piv):
        x[c] = red[i][cols]
    return x


def nullspace(a: list[list], cols: int | None = None) -> list[list]:
    """Basis of {x : a x = 0}."""
    if cols is None:
        cols = len(a[0]) if a else 0
    if not a:
        return identity(cols)
    red, piv = rref(a)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * cols
        v[f] = ONE
        for i, c in enumerate(piv):
            v[c] = -red[i][f]
        basis.append(v)
    return basis
