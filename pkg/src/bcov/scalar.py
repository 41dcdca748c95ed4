"""Exact scalars over the Gaussian rationals Q(i).

Real values are plain ``gmpy2.mpq`` objects; values with a nonzero imaginary
part are :class:`GaussianRational`.  Arithmetic between the two is closed and
collapses back to ``mpq`` whenever the imaginary part cancels, so models
defined over Q never leave the fast path.
"""

from __future__ import annotations

import re

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)

_RAT_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def make(re, im):
        if im == 0:
            return mpq(re)
        return GaussianRational(re, im)

    def __add__(self, o):
        if isinstance(o, GaussianRational):
            return GaussianRational.make(self.re + o.re, self.im + o.im)
        return GaussianRational(self.re + o, self.im)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, GaussianRational):
            return GaussianRational.make(self.re - o.re, self.im - o.im)
        return GaussianRational(self.re - o, self.im)

    def __rsub__(self, o):
        return GaussianRational(o - self.re, -self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, o):
        if isinstance(o, GaussianRational):
            return GaussianRational.make(
                self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
            )
        if o == 0:
            return ZERO
        return GaussianRational(self.re * o, self.im * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, GaussianRational):
            n = o.re * o.re + o.im * o.im
            return GaussianRational.make(
                (self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n
            )
        return GaussianRational(self.re / o, self.im / o)

    def __rtruediv__(self, o):
        n = self.re * self.re + self.im * self.im
        return GaussianRational.make(o * self.re / n, -o * self.im / n)

    def __eq__(self, o):
        if isinstance(o, GaussianRational):
            return self.re == o.re and self.im == o.im
        return False  # normalized: never equal to a real value

    def __ne__(self, o):
        return not self.__eq__(o)

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)


def scalar(re, im=0):
    """Build a normalized exact scalar from rational-like parts."""
    return GaussianRational.make(mpq(re), mpq(im))


def real_part(x):
    return x.re if isinstance(x, GaussianRational) else mpq(x)


def imag_part(x):
    return x.im if isinstance(x, GaussianRational) else ZERO


def conj(x):
    if isinstance(x, GaussianRational):
        return GaussianRational(x.re, -x.im)
    return x


def is_real(x) -> bool:
    return not isinstance(x, GaussianRational)


def abs_bound(x):
    """|re| + |im|: an exact norm used for max-norm residual reports."""
    return abs(real_part(x)) + abs(imag_part(x))


def _fmt_rat(q) -> str:
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def format_scalar(x) -> str:
    """Canonical ``p/q`` or ``p/q+r/s*i`` string (always with denominators)."""
    re_, im_ = real_part(x), imag_part(x)
    if im_ == 0:
        return _fmt_rat(re_)
    sign = "-" if im_ < 0 else "+"
    return f"{_fmt_rat(re_)}{sign}{_fmt_rat(abs(im_))}*i"


def _parse_rat(text: str, original: str):
    if not _RAT_RE.match(text):
        raise ValueError(f"malformed scalar {original!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator in scalar {original!r}")
    return mpq(text.lstrip("+"))


def parse_scalar(text: str):
    """Parse ``"p/q"``, ``"p/q+r/s*i"``, ``"3"``, ``"-i"`` and similar forms.

    Raises ValueError on anything else.  Non-lowest-terms input is accepted and
    normalized.
    """
    if not isinstance(text, str):
        raise ValueError(f"scalar must be a string, got {type(text).__name__}")
    s = "".join(text.split())
    if not s.endswith("i"):
        return _parse_rat(s, text)
    body = s[:-1]
    if body.endswith("*"):
        body = body[:-1]
        if body in ("", "+", "-") or body[-1] in "+-":
            raise ValueError(f"malformed scalar {text!r}")
    cut = max(body.rfind("+"), body.rfind("-"))
    if cut > 0:
        re_text, im_text = body[:cut], body[cut:]
        re_ = _parse_rat(re_text, text)
    else:
        re_, im_text = ZERO, body
    if im_text in ("", "+"):
        im_ = ONE
    elif im_text == "-":
        im_ = -ONE
    else:
        im_ = _parse_rat(im_text, text)
    return scalar(re_, im_)
