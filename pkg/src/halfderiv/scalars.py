"""Exact scalar arithmetic.

Scalars live in the rational function field Q(e2, ..., eN) over formal
generator symbols.  The degenerate case of zero generators is plain Q.
Three layers:

  * ``Fraction`` (stdlib) carries all rational coefficients.
  * ``Poly`` is a sparse multivariate polynomial over Q in the formal
    generators ``e2 .. eN`` (the first group generator is pinned to 1 and
    never appears as a symbol).
  * ``Scalar`` is a quotient of two ``Poly`` values.

Scalar fractions are deliberately *not* reduced by multivariate gcd on
every operation; zero tests look at the numerator only and equality uses
cross-multiplication, which is exact regardless of representation.  A
gcd-based :meth:`Scalar.normalized` pass exists for the univariate case.

Everything here is immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Union

Rational = Fraction

#: Hard ceiling on stored polynomial terms.  Window computations keep
#: polynomials tiny; hitting this means a runaway product, and failing
#: loudly beats thrashing.
TERM_LIMIT = 100_000


class TermBudgetError(RuntimeError):
    """Raised when a polynomial product exceeds ``TERM_LIMIT`` terms."""


class ScalarParseError(ValueError):
    """Raised for malformed textual scalars."""


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an integer or Fraction, got {value!r}")


class Poly:
    """Sparse polynomial in ``nvars`` formal generators over Q.

    ``terms`` maps exponent tuples (length ``nvars``) to nonzero
    ``Fraction`` coefficients.  Instances are immutable.
    """

    __slots__ = ("nvars", "terms", "_key")

    def __init__(self, nvars: int, terms: dict):
        self.nvars = nvars
        self.terms = terms
        self._key = None

    # -- constructors -------------------------------------------------

    @classmethod
    def const(cls, value, nvars: int) -> "Poly":
        q = _as_fraction(value)
        if q == 0:
            return cls(nvars, {})
        return cls(nvars, {(0,) * nvars: q})

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        cached = _POLY_ZERO.get(nvars)
        if cached is None:
            cached = _POLY_ZERO[nvars] = cls(nvars, {})
        return cached

    @classmethod
    def one(cls, nvars: int) -> "Poly":
        cached = _POLY_ONE.get(nvars)
        if cached is None:
            cached = _POLY_ONE[nvars] = cls.const(1, nvars)
        return cached

    @classmethod
    def gen(cls, position: int, nvars: int) -> "Poly":
        """The generator at ``position`` (0-based among the formal ones)."""
        if not 0 <= position < nvars:
            raise IndexError(f"generator position {position} out of range")
        exps = tuple(1 if k == position else 0 for k in range(nvars))
        return cls(nvars, {exps: Fraction(1)})

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.nvars in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_const():
            raise ValueError(f"{self} is not a constant")
        return self.terms[(0,) * self.nvars]

    # -- arithmetic ----------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"mixed generator counts: {self.nvars} vs {other.nvars}")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            s = terms.get(exps)
            if s is None:
                terms[exps] = c
            else:
                s = s + c
                if s:
                    terms[exps] = s
                else:
                    del terms[exps]
        return Poly(self.nvars, terms)

    def __sub__(self, other: "Poly") -> "Poly":
        self._check(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            s = terms.get(exps)
            if s is None:
                terms[exps] = -c
            else:
                s = s - c
                if s:
                    terms[exps] = s
                else:
                    del terms[exps]
        return Poly(self.nvars, terms)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        if not self.terms or not other.terms:
            return Poly(self.nvars, {})
        # single-term shortcut covers the vast majority of real traffic
        if len(other.terms) == 1:
            ((oe, oc),) = other.terms.items()
            if oe == (0,) * self.nvars:
                return Poly(self.nvars, {e: c * oc for e, c in self.terms.items()})
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(exps)
                if s is None:
                    terms[exps] = c1 * c2
                else:
                    s = s + c1 * c2
                    if s:
                        terms[exps] = s
                    else:
                        del terms[exps]
        if len(terms) > TERM_LIMIT:
            raise TermBudgetError(
                f"polynomial grew to {len(terms)} terms (limit {TERM_LIMIT}); "
                "shrink the window or raise halfderiv.scalars.TERM_LIMIT"
            )
        return Poly(self.nvars, terms)

    def scale(self, q) -> "Poly":
        q = _as_fraction(q)
        if q == 0:
            return Poly(self.nvars, {})
        return Poly(self.nvars, {e: c * q for e, c in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Poly.one(self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- structure helpers ----------------------------------------------

    def key(self):
        """Hashable canonical form (used for dedup and dict keys)."""
        if self._key is None:
            self._key = tuple(sorted(self.terms.items()))
        return self._key

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, self.key()))

    def content(self) -> Fraction:
        """gcd of the coefficients, with the sign of the leading term.

        Zero polynomial has content 1 so division is always safe.
        """
        if not self.terms:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, abs(c.numerator))
            den = den * c.denominator // math.gcd(den, c.denominator)
        lead = self.terms[max(self.terms)]
        sign = -1 if lead < 0 else 1
        return Fraction(sign * num, den)

    def monomial_gcd(self) -> tuple:
        """Componentwise minimum exponent over all terms."""
        if not self.terms:
            return (0,) * self.nvars
        mins = None
        for exps in self.terms:
            if mins is None:
                mins = list(exps)
            else:
                mins = [min(a, b) for a, b in zip(mins, exps)]
        return tuple(mins)

    def shift_down(self, exps: tuple) -> "Poly":
        if all(e == 0 for e in exps):
            return self
        return Poly(
            self.nvars,
            {tuple(a - b for a, b in zip(e, exps)): c for e, c in self.terms.items()},
        )

    def primitive(self) -> "Poly":
        """Divide out rational content and any common monomial factor."""
        if not self.terms:
            return self
        out = self.shift_down(self.monomial_gcd())
        cont = out.content()
        if cont != 1:
            out = out.scale(1 / cont)
        return out

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


def poly_univariate_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd of two univariate polynomials (Euclid over Q)."""
    if a.nvars != 1 or b.nvars != 1:
        raise ValueError("univariate gcd needs exactly one generator")

    def norm(p: Poly) -> Poly:
        if p.is_zero():
            return p
        lead = max(p.terms)
        return p.scale(1 / p.terms[lead])

    a, b = norm(a), norm(b)
    while not b.is_zero():
        a, b = b, norm(_poly_rem(a, b))
    return a


def _poly_rem(a: Poly, b: Poly) -> Poly:
    lead_b = max(b.terms)
    cb = b.terms[lead_b]
    r = a
    while not r.is_zero():
        lead_r = max(r.terms)
        if lead_r[0] < lead_b[0]:
            break
        shift = (lead_r[0] - lead_b[0],)
        factor = Poly(1, {shift: r.terms[lead_r] / cb})
        r = r - factor * b
    return r


_POLY_ZERO: dict = {}
_POLY_ONE: dict = {}

ScalarLike = Union["Scalar", Poly, Fraction, int]


class Scalar:
    """Element of Q(e2, ..., eN) held as an unreduced fraction of ``Poly``.

    Construction folds constant denominators into the numerator, so plain
    rationals always sit as ``p / 1``.  Use ``==`` for exact comparison
    (cross-multiplied) and :meth:`is_zero` for zero tests.  Scalars are
    unhashable on purpose: distinct representations of equal values would
    break hash consistency.
    """

    __slots__ = ("num", "den")
    __hash__ = None

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.one(num.nvars)
        if num.nvars != den.nvars:
            raise ValueError("numerator and denominator disagree on generators")
        if den.is_zero():
            raise ZeroDivisionError("scalar with zero denominator")
        if num.is_zero():
            den = Poly.one(num.nvars)
        elif den.is_const():
            c = den.const_value()
            if c != 1:
                num = num.scale(1 / c)
            den = Poly.one(num.nvars)
        self.num = num
        self.den = den

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_rational(cls, value, nvars: int = 0) -> "Scalar":
        return cls(Poly.const(value, nvars))

    @classmethod
    def generator(cls, position: int, nvars: int) -> "Scalar":
        return cls(Poly.gen(position, nvars))

    @classmethod
    def zero(cls, nvars: int = 0) -> "Scalar":
        cached = _SCALAR_ZERO.get(nvars)
        if cached is None:
            cached = _SCALAR_ZERO[nvars] = cls(Poly.zero(nvars))
        return cached

    @classmethod
    def one(cls, nvars: int = 0) -> "Scalar":
        cached = _SCALAR_ONE.get(nvars)
        if cached is None:
            cached = _SCALAR_ONE[nvars] = cls(Poly.one(nvars))
        return cached

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar.from_rational(other, self.nvars)
        if isinstance(other, Poly):
            return Scalar(other)
        raise TypeError(f"cannot treat {other!r} as a scalar")

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_rational(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def as_fraction(self) -> Fraction:
        return self.num.const_value() / self.den.const_value()

    # -- field operations -------------------------------------------------

    def __add__(self, other) -> "Scalar":
        other = self._coerce(other)
        if self.den == other.den:
            return Scalar(self.num + other.num, self.den)
        return Scalar(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "Scalar":
        other = self._coerce(other)
        if self.den == other.den:
            return Scalar(self.num - other.num, self.den)
        return Scalar(self.num * other.den - other.num * self.den, self.den * other.den)

    def __rsub__(self, other) -> "Scalar":
        return self._coerce(other) - self

    def __neg__(self) -> "Scalar":
        return Scalar(-self.num, self.den)

    def __mul__(self, other) -> "Scalar":
        other = self._coerce(other)
        return Scalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inv(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        return Scalar(self.den, self.num)

    def __truediv__(self, other) -> "Scalar":
        other = self._coerce(other)
        return self * other.inv()

    def __rtruediv__(self, other) -> "Scalar":
        return self._coerce(other) * self.inv()

    def __eq__(self, other) -> bool:
        if isinstance(other, (Scalar, int, Fraction, Poly)):
            other = self._coerce(other)
            return (self.num * other.den - other.num * self.den).is_zero()
        return NotImplemented

    def normalized(self) -> "Scalar":
        """Reduced representative.

        Exact for zero or fewer than two generators.  The multivariate
        case is returned unchanged: correctness never depends on reduced
        representations, only sizes do.
        """
        if self.num.is_zero() or self.den.is_const():
            return Scalar(self.num, self.den)
        if self.nvars == 1:
            g = poly_univariate_gcd(self.num, self.den)
            if g.degree() > 0:
                num = _poly_exact_div_uni(self.num, g)
                den = _poly_exact_div_uni(self.den, g)
                return Scalar(num, den)
            cont = self.den.content()
            return Scalar(self.num.scale(1 / cont), self.den.scale(1 / cont))
        return self

    def __repr__(self):
        return f"Scalar({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


_SCALAR_ZERO: dict = {}
_SCALAR_ONE: dict = {}


def _poly_exact_div_uni(a: Poly, b: Poly) -> Poly:
    """Quotient of univariate a by b, assuming the division is exact."""
    lead_b = max(b.terms)
    cb = b.terms[lead_b]
    q = Poly.zero(1)
    r = a
    while not r.is_zero():
        lead_r = max(r.terms)
        if lead_r[0] < lead_b[0]:
            raise ArithmeticError("inexact polynomial division")
        shift = (lead_r[0] - lead_b[0],)
        piece = Poly(1, {shift: r.terms[lead_r] / cb})
        q = q + piece
        r = r - piece * b
    return q


# ---------------------------------------------------------------------------
# textual form
# ---------------------------------------------------------------------------

def format_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _format_monomial(exps: tuple, coeff: Fraction) -> str:
    gens = [f"e{k + 2}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(exps) if e]
    if not gens:
        return format_fraction(coeff)
    body = "*".join(gens)
    if coeff == 1:
        return body
    if coeff == -1:
        return f"-{body}"
    return f"{format_fraction(coeff)}*{body}"


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    parts = []
    for exps in sorted(p.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
        text = _format_monomial(exps, p.terms[exps])
        if parts:
            parts.append(f"- {text[1:]}" if text.startswith("-") else f"+ {text}")
        else:
            parts.append(text)
    return " ".join(parts)


def format_scalar(s: Scalar) -> str:
    num = format_poly(s.num)
    if s.den.is_const():
        return num
    den = format_poly(s.den)

    def wrap(text: str) -> str:
        bare = re.fullmatch(r"-?\w+(\^\d+)?", text)
        return text if bare else f"({text})"

    return f"{wrap(num)}/{wrap(den)}"


_TOKEN = re.compile(r"\s*(?:(\d+)|(e\d+)|([()+\-*/^]))")


def parse_scalar(text: str, nvars: int = 0) -> Scalar:
    """Parse the textual scalar form: integers, ``p/q`` and polynomial
    fractions such as ``(e2^2 - 1)/(e2 - 1)``."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ScalarParseError(f"bad scalar syntax at {text[pos:]!r}")
            break
        tokens.append(m.group(m.lastindex))
        pos = m.end()

    state = {"i": 0}

    def peek():
        return tokens[state["i"]] if state["i"] < len(tokens) else None

    def take():
        tok = peek()
        state["i"] += 1
        return tok

    def atom() -> Scalar:
        tok = take()
        if tok is None:
            raise ScalarParseError(f"unexpected end of scalar in {text!r}")
        if tok == "(":
            value = expr()
            if take() != ")":
                raise ScalarParseError(f"missing ')' in {text!r}")
        elif tok == "-":
            return -atom()
        elif tok.isdigit():
            value = Scalar.from_rational(int(tok), nvars)
        elif tok.startswith("e"):
            k = int(tok[1:])
            if k < 2 or k - 2 >= nvars:
                raise ScalarParseError(
                    f"generator {tok} not available (have e2..e{nvars + 1})"
                )
            value = Scalar.generator(k - 2, nvars)
        else:
            raise ScalarParseError(f"unexpected token {tok!r} in {text!r}")
        while peek() == "^":
            take()
            exp = take()
            if exp is None or not exp.isdigit():
                raise ScalarParseError(f"bad exponent in {text!r}")
            value = Scalar(value.num ** int(exp), value.den ** int(exp))
        return value

    def product() -> Scalar:
        value = atom()
        while peek() in ("*", "/"):
            op = take()
            rhs = atom()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ScalarParseError(f"division by zero in {text!r}")
                value = value / rhs
        return value

    def expr() -> Scalar:
        value = product()
        while peek() in ("+", "-"):
            op = take()
            rhs = product()
            value = value + rhs if op == "+" else value - rhs
        return value

    if not tokens:
        raise ScalarParseError("empty scalar")
    value = expr()
    if state["i"] != len(tokens):
        raise ScalarParseError(f"trailing junk in scalar {text!r}")
    return value
