"""Graded Lie algebras given by closed-form structure-constant rules.

An algebra is a list of basis families (graded families carry a group
degree and possibly an integer index; central families are single
symbols of degree zero) plus, per ordered family pair, a list of
:class:`TermRule` clauses.  Each clause contributes

    coefficient(binding) * [delta guards] * target symbol

to the bracket, where the binding assigns the canonical variables
``a, i`` to the left argument and ``b, j`` to the right one.  Querying
the swapped orientation negates the stored rule, so tables only ever
hold one orientation.

Coefficients are expression trees over group values, coordinates,
indices and named parameters; they evaluate to exact scalars.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .groups import GroupElement, GroupSpec, format_element, parse_element, zero_element
from .scalars import Scalar, format_scalar


class AlgebraError(ValueError):
    pass


class UnknownFamilyError(AlgebraError):
    pass


class IndexDomainError(AlgebraError):
    """An index fell outside its family's declared domain."""


class GradingError(AlgebraError):
    """A bracket produced a symbol off the additive grading."""


# ---------------------------------------------------------------------------
# basis symbols and linear combinations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisSymbol:
    """Tagged basis element: family name, group degree, optional index."""

    family: str
    degree: GroupElement
    index: Optional[int] = None

    def __str__(self):
        if self.index is None and self.degree.is_zero() and self.family[0] == "C":
            return self.family
        inner = ",".join(str(c) for c in self.degree)
        if self.index is not None:
            inner += f";{self.index}"
        return f"{self.family}({inner})"


def format_symbol(sym: BasisSymbol, alg: "AlgebraSpec") -> str:
    if alg.family(sym.family).central:
        return sym.family
    inner = ",".join(str(c) for c in sym.degree)
    if sym.index is not None:
        inner += f";{sym.index}"
    return f"{sym.family}({inner})"


def parse_symbol(text: str, alg: "AlgebraSpec") -> BasisSymbol:
    text = text.strip()
    if "(" not in text:
        return alg.symbol(text)
    name, _, rest = text.partition("(")
    if not rest.endswith(")"):
        raise AlgebraError(f"bad symbol syntax {text!r}")
    body = rest[:-1]
    if ";" in body:
        deg_text, _, idx_text = body.partition(";")
        return alg.symbol(name, parse_element(deg_text, alg.group.rank), int(idx_text))
    return alg.symbol(name, parse_element(body, alg.group.rank))


class LinComb:
    """Sparse scalar-weighted combination of basis symbols.

    Stored coefficients are never zero.  Supports addition, scaling and
    exact comparison; iteration yields ``(symbol, coefficient)`` pairs in
    insertion order (use :meth:`sorted_items` for a canonical order).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}

    @classmethod
    def of(cls, *pairs) -> "LinComb":
        out = cls()
        for sym, coeff in pairs:
            out.add_term(sym, coeff)
        return out

    def add_term(self, sym: BasisSymbol, coeff: Scalar) -> None:
        if not isinstance(coeff, Scalar):
            raise TypeError(f"LinComb coefficients must be Scalars, got {coeff!r}")
        if coeff.is_zero():
            return
        cur = self.terms.get(sym)
        if cur is None:
            self.terms[sym] = coeff
        else:
            cur = cur + coeff
            if cur.is_zero():
                del self.terms[sym]
            else:
                self.terms[sym] = cur

    def __iter__(self) -> Iterator:
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, sym: BasisSymbol) -> Scalar | None:
        return self.terms.get(sym)

    def support(self):
        return self.terms.keys()

    def __add__(self, other: "LinComb") -> "LinComb":
        out = LinComb(dict(self.terms))
        for sym, coeff in other.terms.items():
            out.add_term(sym, coeff)
        return out

    def __sub__(self, other: "LinComb") -> "LinComb":
        out = LinComb(dict(self.terms))
        for sym, coeff in other.terms.items():
            out.add_term(sym, -coeff)
        return out

    def __neg__(self) -> "LinComb":
        return LinComb({s: -c for s, c in self.terms.items()})

    def scale(self, coeff) -> "LinComb":
        if isinstance(coeff, Scalar):
            if coeff.is_zero():
                return LinComb()
        elif coeff == 0:
            return LinComb()
        return LinComb({s: c * coeff for s, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinComb):
            return NotImplemented
        for sym in self.terms.keys() | other.terms.keys():
            a = self.terms.get(sym)
            b = other.terms.get(sym)
            if a is None:
                if not b.is_zero():
                    return False
            elif b is None:
                if not a.is_zero():
                    return False
            elif not (a - b).is_zero():
                return False
        return True

    __hash__ = None

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: _symbol_sort_key(kv[0]))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{format_scalar(c)}*{s}" for s, c in self.sorted_items())


def _symbol_sort_key(sym: BasisSymbol):
    return (sym.family, tuple(sym.degree), sym.index if sym.index is not None else 0)


# ---------------------------------------------------------------------------
# coefficient expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Val:
    """Evaluation of a bound group variable into the scalar field."""
    var: str


@dataclass(frozen=True)
class Coord:
    """1-based coordinate of a bound group variable."""
    var: str
    position: int


@dataclass(frozen=True)
class Idx:
    """A bound integer index variable."""
    var: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: "CoeffExpr"
    right: "CoeffExpr"


@dataclass(frozen=True)
class PowOp:
    base: "CoeffExpr"
    exponent: int


@dataclass(frozen=True)
class NegOp:
    operand: "CoeffExpr"


CoeffExpr = object  # union of the node classes above


def eval_coeff(expr, binding: dict, group: GroupSpec, params: dict) -> Scalar:
    """Evaluate a coefficient expression tree to an exact scalar."""
    nvars = group.nvars
    kind = type(expr)
    if kind is Const:
        return Scalar.from_rational(expr.value, nvars)
    if kind is Val:
        return group.value(binding[expr.var])
    if kind is Coord:
        return Scalar.from_rational(binding[expr.var].coordinate(expr.position), nvars)
    if kind is Idx:
        return Scalar.from_rational(binding[expr.var], nvars)
    if kind is Param:
        try:
            return params[expr.name]
        except KeyError:
            raise AlgebraError(f"parameter {expr.name!r} is not bound") from None
    if kind is BinOp:
        left = eval_coeff(expr.left, binding, group, params)
        right = eval_coeff(expr.right, binding, group, params)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right.is_zero():
                raise ZeroDivisionError("coefficient divides by zero at this binding")
            return left / right
        raise AlgebraError(f"unknown operator {expr.op!r}")
    if kind is PowOp:
        base = eval_coeff(expr.base, binding, group, params)
        return Scalar(base.num ** expr.exponent, base.den ** expr.exponent)
    if kind is NegOp:
        return -eval_coeff(expr.operand, binding, group, params)
    raise AlgebraError(f"bad coefficient node {expr!r}")


def coeff_vars(expr) -> set:
    kind = type(expr)
    if kind in (Val, Coord, Idx):
        return {expr.var}
    if kind is BinOp:
        return coeff_vars(expr.left) | coeff_vars(expr.right)
    if kind is PowOp:
        return coeff_vars(expr.base)
    if kind is NegOp:
        return coeff_vars(expr.operand)
    return set()


# ---------------------------------------------------------------------------
# bracket rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaGuard:
    """Kronecker guard: an affine expression that must vanish.

    ``kind`` is ``'group'`` (coefficients act on group variables and the
    condition is coordinatewise) or ``'index'`` (integer condition with a
    constant offset).
    """

    kind: str
    coeffs: tuple  # tuple of (var, int) pairs
    const: int = 0

    def holds(self, binding: dict) -> bool:
        if self.kind == "group":
            total = None
            for var, c in self.coeffs:
                part = binding[var]
                term = tuple(c * x for x in part)
                total = term if total is None else tuple(p + q for p, q in zip(total, term))
            return all(x == 0 for x in total)
        total = self.const
        for var, c in self.coeffs:
            total += c * binding[var]
        return total == 0


@dataclass(frozen=True)
class TermRule:
    """One additive term of a bracket clause, compiled form.

    ``index_affine`` is ``(ci, cj, c0)`` describing the produced index
    ``ci*i + cj*j + c0`` for indexed targets, else ``None``.  The target
    degree is always ``a + b``; that is the grading and it is enforced at
    build time.
    """

    target: str
    index_affine: Optional[tuple]
    guards: tuple
    coeff: CoeffExpr


@dataclass(frozen=True)
class FamilyDecl:
    name: str
    central: bool = False
    index_domain: Optional[str] = None  # None, 'nat' or 'int'

    def __post_init__(self):
        if self.index_domain not in (None, "nat", "int"):
            raise AlgebraError(f"bad index domain {self.index_domain!r}")
        if self.central and self.index_domain is not None:
            raise AlgebraError("central families cannot carry an index")

    def index_ok(self, index: Optional[int]) -> bool:
        if self.index_domain is None:
            return index is None
        if index is None or not isinstance(index, int):
            return False
        return index >= 0 if self.index_domain == "nat" else True


@dataclass(eq=False)
class AlgebraSpec:
    """Compiled algebra: families, parameters and bracket rules.

    Instances are immutable by convention; bracket evaluation is pure and
    memoised, so sharing across threads or processes is safe.
    """

    name: str
    group: GroupSpec
    families: tuple
    rules: dict  # (left_family, right_family) -> tuple of TermRule
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self._family_map = {f.name: f for f in self.families}
        if len(self._family_map) != len(self.families):
            raise AlgebraError("duplicate family declaration")
        self._family_rank = {f.name: k for k, f in enumerate(self.families)}
        for (lf, rf), terms in self.rules.items():
            for fam in (lf, rf):
                decl = self._family_map.get(fam)
                if decl is None:
                    raise UnknownFamilyError(f"bracket rule uses unknown family {fam!r}")
                if decl.central:
                    raise AlgebraError(f"central family {fam!r} cannot head a bracket rule")
            for term in terms:
                if term.target not in self._family_map:
                    raise UnknownFamilyError(f"bracket rule targets unknown family {term.target!r}")
        self._bracket_cache = {}
        self._contrib_cache = {}

    def __getstate__(self):
        return (self.name, self.group, self.families, self.rules, self.params)

    def __setstate__(self, state):
        self.name, self.group, self.families, self.rules, self.params = state
        self.__post_init__()

    # -- family and symbol helpers -------------------------------------

    def family(self, name: str) -> FamilyDecl:
        try:
            return self._family_map[name]
        except KeyError:
            raise UnknownFamilyError(f"unknown family {name!r}") from None

    def family_names(self) -> list:
        return [f.name for f in self.families]

    def central_symbols(self) -> list:
        zero = self.group.zero()
        return [BasisSymbol(f.name, zero) for f in self.families if f.central]

    def is_central(self, sym: BasisSymbol) -> bool:
        return self.family(sym.family).central

    def symbol(self, family: str, degree: GroupElement | None = None,
               index: Optional[int] = None) -> BasisSymbol:
        decl = self.family(family)
        if decl.central:
            if degree is not None and not degree.is_zero():
                raise AlgebraError(f"central symbol {family} cannot have degree {degree}")
            if index is not None:
                raise IndexDomainError(f"central symbol {family} cannot have an index")
            return BasisSymbol(family, self.group.zero())
        if degree is None:
            raise AlgebraError(f"graded symbol {family} needs a degree")
        if degree.rank != self.group.rank:
            raise AlgebraError(f"degree rank {degree.rank} does not match group rank {self.group.rank}")
        if not decl.index_ok(index):
            raise IndexDomainError(
                f"index {index!r} is not valid for family {family} "
                f"(domain {decl.index_domain})"
            )
        return BasisSymbol(family, degree, index)

    def symbol_sort_key(self, sym: BasisSymbol):
        return (self._family_rank[sym.family], tuple(sym.degree),
                sym.index if sym.index is not None else 0)

    def scalar(self, value) -> Scalar:
        if isinstance(value, Scalar):
            return value
        return Scalar.from_rational(value, self.group.nvars)

    # -- bracket evaluation ---------------------------------------------

    def bracket(self, x: BasisSymbol, y: BasisSymbol) -> LinComb:
        """Exact bracket of two basis symbols."""
        cached = self._bracket_cache.get((x, y))
        if cached is not None:
            return cached
        result = self._bracket_uncached(x, y)
        self._bracket_cache[(x, y)] = result
        return result

    def _bracket_uncached(self, x: BasisSymbol, y: BasisSymbol) -> LinComb:
        for sym in (x, y):
            if sym.family not in self._family_map:
                raise UnknownFamilyError(f"unknown family {sym.family!r}")
        if x == y:
            return LinComb()
        if self.is_central(x) or self.is_central(y):
            return LinComb()
        terms = self.rules.get((x.family, y.family))
        if terms is not None:
            return self._eval_terms(terms, x, y, negate=False)
        terms = self.rules.get((y.family, x.family))
        if terms is not None:
            return self._eval_terms(terms, y, x, negate=True)
        return LinComb()

    def _eval_terms(self, terms, left: BasisSymbol, right: BasisSymbol,
                    negate: bool) -> LinComb:
        binding = {"a": left.degree, "b": right.degree}
        if left.index is not None:
            binding["i"] = left.index
        if right.index is not None:
            binding["j"] = right.index
        out = LinComb()
        degree = left.degree + right.degree
        for term in terms:
            if not all(g.holds(binding) for g in term.guards):
                continue
            coeff = eval_coeff(term.coeff, binding, self.group, self.params)
            if coeff.is_zero():
                continue
            decl = self.family(term.target)
            if decl.central:
                if not degree.is_zero():
                    raise GradingError(
                        f"central target {term.target} produced at nonzero degree "
                        f"{format_element(degree)} from [{left}, {right}]"
                    )
                sym = BasisSymbol(term.target, self.group.zero())
            else:
                index = None
                if term.index_affine is not None:
                    ci, cj, c0 = term.index_affine
                    index = c0
                    if ci:
                        index += ci * binding["i"]
                    if cj:
                        index += cj * binding["j"]
                if not decl.index_ok(index):
                    raise IndexDomainError(
                        f"bracket [{left}, {right}] produced index {index} outside "
                        f"the {decl.index_domain} domain of family {term.target} "
                        "with a nonzero coefficient"
                    )
                sym = BasisSymbol(term.target, degree, index)
            out.add_term(sym, -coeff if negate else coeff)
        return out

    def bracket_lin(self, u: LinComb, v: LinComb) -> LinComb:
        """Bilinear extension of the bracket."""
        out = LinComb()
        for xs, xc in u:
            for ys, yc in v:
                piece = self.bracket(xs, ys)
                if piece:
                    coeff = xc * yc
                    if not coeff.is_zero():
                        for sym, c in piece:
                            out.add_term(sym, coeff * c)
        return out

    def jacobi_defect(self, x: BasisSymbol, y: BasisSymbol, z: BasisSymbol) -> LinComb:
        """[x,[y,z]] + [y,[z,x]] + [z,[x,y]], exactly."""
        single = lambda s: LinComb({s: Scalar.one(self.group.nvars)})
        total = self.bracket_lin(single(x), self.bracket(y, z))
        total = total + self.bracket_lin(single(y), self.bracket(z, x))
        total = total + self.bracket_lin(single(z), self.bracket(x, y))
        return total

    def describe(self) -> dict:
        fams = []
        for f in self.families:
            fams.append({
                "name": f.name,
                "central": f.central,
                "index_domain": f.index_domain,
            })
        return {
            "name": self.name,
            "rank": self.group.rank,
            "generators": self.group.describe(),
            "params": {k: format_scalar(v) for k, v in sorted(self.params.items())},
            "families": fams,
        }
