"""Seeded single-entry corruptions of a ModelSpec, labelled by the oracle's first violated axiom."""

from __future__ import annotations

import copy
import random
from fractions import Fraction

from oracles import RawModel

KINDS = ("product-scale", "product-add", "d", "del", "trace", "inner")


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _factor(rng: random.Random) -> Fraction:
    while True:
        f = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        if f not in (0, 1):
            return f


def corrupt(spec: dict, rng: random.Random) -> tuple[dict, str]:
    """One corruption (a changed, added or removed entry); returns (spec, description)."""
    s = copy.deepcopy(spec)
    ids = [b["id"] for b in s["basis"]]
    kind = rng.choice(KINDS)
    if kind == "product-scale" and s["product"]:
        i = rng.randrange(len(s["product"]))
        a, b, c, v = s["product"][i]
        s["product"][i] = [a, b, c, _fmt(Fraction(v) * _factor(rng))]
        return s, f"scale product {a}*{b}->{c}"
    if kind in ("product-add", "product-scale"):
        a, b, c = rng.choice(ids), rng.choice(ids), rng.choice(ids)
        s["product"] = [e for e in s["product"] if (e[0], e[1], e[2]) != (a, b, c)]
        s["product"].append([a, b, c, _fmt(_factor(rng))])
        return s, f"set product {a}*{b}->{c}"
    if kind in ("d", "del"):
        key = kind
        src, dst = rng.choice(ids), rng.choice(ids)
        s[key] = [e for e in s[key] if (e[0], e[1]) != (src, dst)]
        s[key].append([src, dst, _fmt(_factor(rng))])
        return s, f"set {key} {src}->{dst}"
    if kind == "trace":
        a = rng.choice(ids)
        s["trace"] = [e for e in s["trace"] if e[0] != a]
        if rng.random() < 0.2:
            return s, f"remove trace {a}"
        s["trace"].append([a, _fmt(_factor(rng))])
        return s, f"set trace {a}"
    # inner: declare the identity inner product and corrupt one entry
    a, b = rng.choice(ids), rng.choice(ids)
    entries = {(x, x): "1/1" for x in ids}
    entries[(a, b)] = _fmt(_factor(rng))
    s["inner_product"] = [[x, y, v] for (x, y), v in sorted(entries.items())]
    return s, f"inner product {a},{b}"


def mutations(spec: dict, count: int, seed: int) -> list[tuple[dict, str, str]]:
    """``count`` corruptions that the oracle rejects: (spec, description, expected axiom)."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        s, desc = corrupt(spec, rng)
        expected = RawModel(s).first_violation()
        if expected is not None:
            out.append((s, desc, expected))
    return out
