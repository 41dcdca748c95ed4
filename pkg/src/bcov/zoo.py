"""Model zoo: generators for the built-in dGBV models.

* ``torus(d)``: exterior algebra on ``d`` generators of bidegree (1,0) and
  ``d`` of bidegree (0,1) -- the harmonic polyvector fields of a complex
  ``d``-torus -- with ``d = del = 0`` and the trace reading the top coefficient.
* ``twostep``: ``torus(1)`` plus an acyclic square ``e -> f``, ``g -> h`` for
  ``d``.  A single acyclic pair cannot carry a nondegenerate trace pairing,
  so the square is the smallest acyclic block that can.
* ``twostep-del``: ``twostep`` with ``del(g) = e`` and ``del(h) = -f``.  It
  satisfies the Kähler-surrogate identities and has a nonzero propagator.
  It ships as vetted data under ``bcov/data`` and is re-validated at load.
* ``twostep-del(h)``: the same construction over the cohomology of a genus-``h``
  surface (``h`` odd pairs); ``twostep-del(1)`` is ``twostep-del``.  With
  ``h >= 2`` the Frobenius potential has genuine quartic and higher terms.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path

from .dgbv import DGBVModel, load_model
from .errors import ParamError, UnknownModel
from .scalar import format_scalar

ZOO_NAMES = ("torus(d)", "twostep", "twostep-del", "twostep-del(h)")
_NAME_RE = re.compile(r"^([a-z][a-z-]*)(?:\((\d+)\))?$")


def _sign_exterior(s: int, t: int) -> int:
    """Sign of e_S e_T = sign * e_{S|T} for disjoint generator sets given as bitmasks."""
    swaps = 0
    for j in range(t.bit_length()):
        if t >> j & 1:
            swaps += bin(s >> (j + 1)).count("1")
    return -1 if swaps & 1 else 1


def torus_spec(d: int) -> dict:
    """Exterior algebra on 2d odd generators; bit 2i is theta_i (1,0), bit 2i+1 is eta_i (0,1)."""
    if not isinstance(d, int) or d < 1:
        raise ParamError("torus(d) needs an integer d >= 1")
    size = 1 << (2 * d)
    basis = []
    for s in range(size):
        p = sum(1 for i in range(d) if s >> (2 * i) & 1)
        q = sum(1 for i in range(d) if s >> (2 * i + 1) & 1)
        basis.append({"id": f"e{s}", "degree": p + q, "bidegree": [p, q]})
    product = []
    for s in range(size):
        for t in range(size):
            if s & t == 0:
                product.append([f"e{s}", f"e{t}", f"e{s | t}", f"{_sign_exterior(s, t)}/1"])
    return {
        "name": f"torus({d})",
        "field": "Q",
        "dimension": d,
        "basis": basis,
        "unit": "e0",
        "product": product,
        "d": [],
        "del": [],
        "trace": [[f"e{size - 1}", "1/1"]],
    }


def square_spec(handles: int = 1, with_del: bool = True) -> dict:
    """Genus-``handles`` surface cohomology plus an acyclic square.

    In the auxiliary basis ``u = e - e0`` and ``k = e3 + h`` every product of
    two non-unit elements is a multiple of ``k``, fixed by a graded-symmetric
    pairing:  a_i b_i = k,  g f = k,  u h = k.  The Dolbeault role is
    ``d(e) = f, d(g) = h`` and the BV role ``del(g) = e, del(h) = -f``.
    """
    if not isinstance(handles, int) or handles < 1:
        raise ParamError("twostep-del(h) needs an integer h >= 1")
    if handles == 1:
        odd_a, odd_b = ["e1"], ["e2"]
    else:
        odd_a = [f"a{i}" for i in range(1, handles + 1)]
        odd_b = [f"b{i}" for i in range(1, handles + 1)]
    basis = [("e0", (0, 0))]
    basis += [(x, (1, 0)) for x in odd_a] + [(x, (0, 1)) for x in odd_b]
    basis += [("e3", (1, 1)), ("e", (0, 0)), ("g", (1, 0)), ("f", (0, 1)), ("h", (1, 1))]
    ids = [b for b, _ in basis]
    deg = {b: bd[0] + bd[1] for b, bd in basis}

    # auxiliary basis: names -> vectors in the real basis
    aux = {x: {x: 1} for x in ids if x not in ("e", "e3")}
    aux["u"] = {"e": 1, "e0": -1}
    aux["k"] = {"e3": 1, "h": 1}
    to_aux = {x: {x: 1} for x in ids if x not in ("e", "e3")}
    to_aux["e"] = {"e0": 1, "u": 1}
    to_aux["e3"] = {"k": 1, "h": -1}
    aux_deg = dict(deg, u=0, k=2)
    pairs = [(a, b) for a, b in zip(odd_a, odd_b)] + [("g", "f"), ("u", "h")]
    pairing = {}
    for x, y in pairs:
        pairing[(x, y)] = 1
        pairing[(y, x)] = -1 if aux_deg[x] & 1 and aux_deg[y] & 1 else 1

    def aux_mul(x: str, y: str) -> dict:
        if x == "e0":
            return {y: 1}
        if y == "e0":
            return {x: 1}
        c = pairing.get((x, y), 0)
        return {"k": c} if c else {}

    product = []
    for x in ids:
        for y in ids:
            out: dict[str, int] = {}
            for ax, cx in to_aux[x].items():
                for ay, cy in to_aux[y].items():
                    for az, cz in aux_mul(ax, ay).items():
                        for z, c in aux[az].items():
                            out[z] = out.get(z, 0) + cx * cy * cz * c
            for z in ids:
                if out.get(z, 0):
                    product.append([x, y, z, format_scalar(out[z])])
    name = "twostep" if not with_del else ("twostep-del" if handles == 1 else f"twostep-del({handles})")
    return {
        "name": name,
        "field": "Q",
        "dimension": 1,
        "basis": [{"id": b, "degree": deg[b], "bidegree": list(bd)} for b, bd in basis],
        "unit": "e0",
        "product": product,
        "d": [["e", "f", "1/1"], ["g", "h", "1/1"]],
        "del": [["g", "e", "1/1"], ["h", "f", "-1/1"]] if with_del else [],
        "trace": [["e3", "1/1"]],
    }


def heisenberg_spec() -> dict:
    """Exterior algebra on the Heisenberg Lie algebra plus a central line.

    ``del`` is the Chevalley-Eilenberg boundary ([x, y] = z) and ``d = 0``.
    Every element is d-closed, so ``del(tau tau)`` carries a harmonic class
    and the Maurer-Cartan equation is obstructed at order two.
    """
    gens = ["x", "y", "z", "w"]
    size = 1 << len(gens)

    def name(s: int) -> str:
        return "1" if s == 0 else "".join(g for i, g in enumerate(gens) if s >> i & 1)

    basis = [{"id": name(s), "degree": bin(s).count("1")} for s in range(size)]
    product = []
    for s in range(size):
        for t in range(size):
            if s & t == 0:
                product.append([name(s), name(t), name(s | t), f"{_sign_exterior(s, t)}/1"])
    # boundary: del(g1 ... gk) = sum_{i<j} (-1)^{i+j+1} [gi, gj] g1..^i..^j..gk
    bracket = {(0, 1): 2}  # [x, y] = z (bit indices)
    dl: dict[tuple[int, int], int] = {}
    for s in range(size):
        members = [i for i in range(len(gens)) if s >> i & 1]
        for pi, i in enumerate(members):
            for pj, j in enumerate(members):
                if pj <= pi or (i, j) not in bracket:
                    continue
                rest = s & ~(1 << i) & ~(1 << j)
                z = bracket[(i, j)]
                if rest >> z & 1:
                    continue
                sign = -1 if (pi + pj + 1) & 1 else 1
                sign *= _sign_exterior(1 << z, rest)
                key = (s, rest | (1 << z))
                dl[key] = dl.get(key, 0) + sign
    return {
        "name": "heisenberg",
        "field": "Q",
        "dimension": 2,
        "basis": basis,
        "unit": "1",
        "product": product,
        "d": [],
        "del": [[name(s), name(t), f"{c}/1"] for (s, t), c in sorted(dl.items()) if c],
        "trace": [["xyzw", "1/1"]],
    }


def _parse_name(name: str) -> tuple[str, int | None]:
    m = _NAME_RE.match(name.strip())
    if not m:
        raise UnknownModel(f"unknown model {name!r}; known: {', '.join(ZOO_NAMES)}")
    return m.group(1), int(m.group(2)) if m.group(2) else None


def _shipped(filename: str) -> dict:
    text = resources.files("bcov").joinpath("data", filename).read_text(encoding="utf-8")
    return json.loads(text)


def generate_model(name: str, params: dict | None = None) -> dict:
    """ModelSpec dictionary for a zoo member such as ``"torus(2)"`` or ``"twostep-del"``.

    ``params`` may supply the integer parameter instead of the parenthesized form
    (``{"d": 2}`` for tori, ``{"h": 2}`` for ``twostep-del``).
    """
    base, arg = _parse_name(name)
    params = dict(params or {})
    if base == "torus":
        d = arg if arg is not None else params.pop("d", None)
        if params:
            raise ParamError(f"unexpected parameters {sorted(params)}")
        if d is None:
            raise ParamError("torus needs a dimension, e.g. torus(2)")
        return torus_spec(d)
    if base == "twostep":
        if arg is not None or params:
            raise ParamError("twostep takes no parameters")
        return square_spec(1, with_del=False)
    if base == "twostep-del":
        h = arg if arg is not None else params.pop("h", 1)
        if params:
            raise ParamError(f"unexpected parameters {sorted(params)}")
        if h == 1:
            return _shipped("twostep-del.json")
        if h == 2:
            return _shipped("twostep-del-2.json")
        return square_spec(h, with_del=True)
    raise UnknownModel(f"unknown model {name!r}; known: {', '.join(ZOO_NAMES)}")


def resolve_model(ref: str | Path) -> DGBVModel:
    """Load ``zoo:NAME`` from the zoo or any other string as a ModelSpec path."""
    text = str(ref)
    if text.startswith("zoo:"):
        return load_model(generate_model(text[4:]))
    return load_model(Path(text))


def default_zoo() -> list[str]:
    """Zoo members exercised by the acceptance suite."""
    return ["torus(1)", "torus(2)", "twostep", "twostep-del", "twostep-del(2)"]
