"""Textual algebra-definition language.

A ``.liealg`` file declares a grading rank, parameters, basis families
and bracket clauses, one statement per ``;``:

    # Witt algebra
    algebra witt;
    rank 1;
    family L graded;
    [L a, L b] = (b - a) L(a + b);

Two-index families add an index variable and an index domain:

    family L graded indexed nat;
    [L a i, L b j] = (b - a) L(a+b, i+j) + (j - i) L(a+b, i+j+1)
                   + (1/12) * (val(a)^3 - val(a)) * d(a+b=0) * d(i+j=0) * C;

Each additive term is a product of coefficient factors, optional
Kronecker guards ``d(affine = affine)`` and exactly one target symbol.
Group variables used inside a coefficient mean their evaluated scalar
value (``val(a)`` is the explicit form); ``coord(a, k)`` picks the k-th
integer coordinate.  Guards compare affine expressions of either group
variables or index variables, never both.  ``d``, ``val`` and ``coord``
are reserved words when followed by ``(``.

Alternatively a file may pull in a built-in table with ``import NAME;``
plus parameter bindings.

Parsing never raises anything but :class:`DslError`, and every
diagnostic carries a line/column span.  Compilation checks antisymmetry
of same-family clauses on sampled bindings and enforces that target
degrees are exactly ``a + b`` (the grading).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import (
    AlgebraError,
    AlgebraSpec,
    BasisSymbol,
    BinOp,
    Const,
    Coord,
    DeltaGuard,
    FamilyDecl,
    Idx,
    IndexDomainError,
    NegOp,
    Param,
    PowOp,
    TermRule,
    Val,
)
from .groups import GroupElement, standard_group
from .scalars import Scalar, ScalarParseError, parse_scalar


class DslError(ValueError):
    """Any syntax or compile failure; carries a (line, column) span."""

    def __init__(self, message: str, span=None):
        self.span = span
        if span is not None:
            message = f"{span[0]}:{span[1]}: {message}"
        super().__init__(message)


class AntisymmetryViolation(DslError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ENum:
    value: Fraction
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class EVar:
    name: str
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class ECall:
    fn: str                      # 'val' or 'coord'
    var: str
    arg: Optional[int] = None    # coordinate position for 'coord'
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class EBin:
    op: str
    left: object
    right: object
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class ENeg:
    operand: object
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class EPow:
    base: object
    exponent: int
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class GuardAST:
    lhs: object
    rhs: object
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class TargetAST:
    family: str
    degree: Optional[object]     # None for central targets
    index: Optional[object]
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class TermAST:
    negate: bool
    coeff: object
    guards: tuple
    target: TargetAST
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class SymPattern:
    family: str
    degree_var: str
    index_var: Optional[str]
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class ClauseAST:
    left: SymPattern
    right: SymPattern
    terms: tuple
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class FamilyAST:
    name: str
    central: bool
    index_domain: Optional[str]
    span: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class AlgebraAST:
    name: Optional[str]
    rank: Optional[int]
    params: tuple                # ((name, default_text_or_None), ...)
    families: tuple
    clauses: tuple
    import_name: Optional[str] = None


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_PUNCT = set(";,=[]()+-*/^")


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = (line, col)
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("INT", text[i:j], span))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("IDENT", text[i:j], span))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            tokens.append((ch, ch, span))
            i += 1
            col += 1
            continue
        raise DslError(f"unexpected character {ch!r}", span)
    tokens.append(("EOF", "", (line, col)))
    return tokens


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.families: dict = {}

    # -- token helpers --

    def peek(self, ahead: int = 0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "EOF":
            self.pos += 1
        return tok

    def accept(self, kind: str):
        if self.peek()[0] == kind:
            return self.next()
        return None

    def expect(self, kind: str, what: str = None):
        tok = self.peek()
        if tok[0] != kind:
            raise DslError(f"expected {what or kind}, found {tok[1]!r}", tok[2])
        return self.next()

    # -- statements --

    def parse_file(self) -> AlgebraAST:
        name = None
        rank = None
        params = []
        clauses = []
        import_name = None
        while True:
            tok = self.peek()
            if tok[0] == "EOF":
                break
            if tok[0] == "IDENT":
                word = tok[1]
                if word == "algebra":
                    self.next()
                    name = self.expect("IDENT", "algebra name")[1]
                elif word == "rank":
                    self.next()
                    rank = int(self.expect("INT", "rank")[1])
                elif word == "param":
                    self.next()
                    pname = self.expect("IDENT", "parameter name")[1]
                    default = None
                    if self.accept("="):
                        default = self._scalar_text()
                    params.append((pname, default))
                elif word == "family":
                    self.next()
                    self._family_decl(tok[2])
                elif word == "import":
                    self.next()
                    import_name = self.expect("IDENT", "catalog name")[1]
                else:
                    raise DslError(f"unknown statement {word!r}", tok[2])
                self.expect(";")
                continue
            if tok[0] == "[":
                clauses.append(self._clause())
                self.expect(";")
                continue
            raise DslError(f"unexpected token {tok[1]!r}", tok[2])
        if import_name and (self.families or clauses):
            raise DslError("an import file cannot also declare families or brackets")
        return AlgebraAST(
            name=name, rank=rank, params=tuple(params),
            families=tuple(self.families.values()), clauses=tuple(clauses),
            import_name=import_name,
        )

    def _scalar_text(self) -> str:
        # raw scalar tokens until ';'
        parts = []
        while self.peek()[0] not in (";", "EOF"):
            parts.append(self.next()[1])
        return "".join(parts)

    def _family_decl(self, span):
        name = self.expect("IDENT", "family name")[1]
        if name in self.families:
            raise DslError(f"duplicate family {name!r}", span)
        kind = self.expect("IDENT", "'central' or 'graded'")
        if kind[1] == "central":
            self.families[name] = FamilyAST(name, True, None, span)
            return
        if kind[1] != "graded":
            raise DslError(f"expected 'central' or 'graded', found {kind[1]!r}", kind[2])
        domain = None
        if self.peek()[0] == "IDENT" and self.peek()[1] == "indexed":
            self.next()
            dom = self.expect("IDENT", "'nat' or 'int'")
            if dom[1] not in ("nat", "int"):
                raise DslError(f"index domain must be 'nat' or 'int', found {dom[1]!r}", dom[2])
            domain = dom[1]
        self.families[name] = FamilyAST(name, False, domain, span)

    def _sym_pattern(self) -> SymPattern:
        tok = self.expect("IDENT", "family name")
        fam = tok[1]
        decl = self.families.get(fam)
        if decl is None:
            raise DslError(f"unknown family {fam!r}", tok[2])
        if decl.central:
            raise DslError(f"central family {fam!r} cannot appear in a bracket pattern", tok[2])
        degree_var = self.expect("IDENT", "degree variable")[1]
        index_var = None
        if decl.index_domain is not None:
            index_var = self.expect("IDENT", "index variable")[1]
        return SymPattern(fam, degree_var, index_var, tok[2])

    def _clause(self) -> ClauseAST:
        span = self.expect("[")[2]
        left = self._sym_pattern()
        self.expect(",")
        right = self._sym_pattern()
        self.expect("]")
        self.expect("=")
        bound = {left.degree_var, right.degree_var}
        if left.index_var:
            bound.add(left.index_var)
        if right.index_var:
            bound.add(right.index_var)
        if len(bound) != 2 + (left.index_var is not None) + (right.index_var is not None):
            raise DslError("bracket pattern variables must be distinct", span)
        clash = bound & self.families.keys()
        if clash:
            raise DslError(f"pattern variable {sorted(clash)[0]!r} shadows a family", span)
        terms = self._rhs(bound)
        return ClauseAST(left, right, tuple(terms), span)

    # -- right-hand sides --

    def _rhs(self, bound):
        tok = self.peek()
        if tok[0] == "INT" and tok[1] == "0" and self.peek(1)[0] == ";":
            self.next()
            return []
        terms = [self._term(bound, negate=False)]
        while True:
            if self.accept("+"):
                terms.append(self._term(bound, negate=False))
            elif self.accept("-"):
                terms.append(self._term(bound, negate=True))
            else:
                return terms

    def _term(self, bound, negate: bool) -> TermAST:
        span = self.peek()[2]
        exprs = []
        guards = []
        target = None
        while True:
            item = self._term_item(bound)
            if item is None:
                break
            kind, value = item
            if kind == "expr":
                exprs.append(value)
            elif kind == "guard":
                guards.append(value)
            else:
                if target is not None:
                    raise DslError("a term may contain only one target symbol", value.span)
                target = value
            if self.accept("*"):
                continue
            # implicit product: another factor follows directly
            nxt = self.peek()
            if nxt[0] in ("INT", "(", "IDENT"):
                continue
            break
        if target is None:
            raise DslError("term has no target symbol", span)
        coeff = None
        for e in exprs:
            coeff = e if coeff is None else EBin("*", coeff, e)
        if coeff is None:
            coeff = ENum(Fraction(1))
        return TermAST(negate, coeff, tuple(guards), target, span)

    def _term_item(self, bound):
        tok = self.peek()
        if tok[0] == "IDENT":
            word = tok[1]
            if word == "d" and self.peek(1)[0] == "(":
                return ("guard", self._guard(bound))
            if word in self.families:
                return ("target", self._target(bound))
        if tok[0] in ("INT", "(", "IDENT", "-"):
            return ("expr", self._expr(bound, allow_add=False))
        return None

    def _guard(self, bound) -> GuardAST:
        span = self.expect("IDENT")[2]  # 'd'
        self.expect("(")
        lhs = self._expr(bound, allow_add=True)
        self.expect("=", "'=' inside delta guard")
        rhs = self._expr(bound, allow_add=True)
        self.expect(")")
        return GuardAST(lhs, rhs, span)

    def _target(self, bound) -> TargetAST:
        tok = self.expect("IDENT")
        fam = tok[1]
        decl = self.families[fam]
        if decl.central:
            return TargetAST(fam, None, None, tok[2])
        self.expect("(", f"'(' after graded family {fam}")
        degree = self._expr(bound, allow_add=True)
        index = None
        if decl.index_domain is not None:
            self.expect(",", f"index expression for family {fam}")
            index = self._expr(bound, allow_add=True)
        self.expect(")")
        return TargetAST(fam, degree, index, tok[2])

    # -- expressions (coefficient context; no guards, no targets) --

    def _expr(self, bound, allow_add: bool):
        node = self._expr_mul(bound)
        if not allow_add:
            return node
        while True:
            tok = self.peek()
            if tok[0] == "+":
                self.next()
                node = EBin("+", node, self._expr_mul(bound), span=tok[2])
            elif tok[0] == "-":
                self.next()
                node = EBin("-", node, self._expr_mul(bound), span=tok[2])
            else:
                return node

    def _next_is_term_factor(self, offset: int) -> bool:
        """Does the token at ``offset`` start a delta guard or a target?"""
        tok = self.peek(offset)
        if tok[0] != "IDENT":
            return False
        if tok[1] == "d" and self.peek(offset + 1)[0] == "(":
            return True
        return tok[1] in self.families

    def _expr_mul(self, bound):
        node = self._expr_unary(bound)
        while True:
            tok = self.peek()
            if tok[0] in ("*", "/"):
                # leave '* d(...)' and '* Target(...)' to the term parser
                if tok[0] == "*" and self._next_is_term_factor(1):
                    return node
                self.next()
                node = EBin(tok[0], node, self._expr_unary(bound), span=tok[2])
                continue
            return node

    def _expr_unary(self, bound):
        tok = self.peek()
        if tok[0] == "-":
            self.next()
            return ENeg(self._expr_unary(bound), span=tok[2])
        return self._expr_pow(bound)

    def _expr_pow(self, bound):
        node = self._expr_atom(bound)
        while self.peek()[0] == "^":
            span = self.next()[2]
            exp = self.expect("INT", "integer exponent")
            node = EPow(node, int(exp[1]), span=span)
        return node

    def _expr_atom(self, bound):
        tok = self.peek()
        if tok[0] == "INT":
            self.next()
            return ENum(Fraction(int(tok[1])), span=tok[2])
        if tok[0] == "(":
            self.next()
            node = self._expr(bound, allow_add=True)
            self.expect(")")
            return node
        if tok[0] == "IDENT":
            word = tok[1]
            if word == "d" and self.peek(1)[0] == "(":
                raise DslError("delta guards are not allowed inside a coefficient "
                               "expression; write them as separate term factors", tok[2])
            if word in self.families and self.peek(1)[0] == "(":
                raise DslError("target symbols are not allowed inside a coefficient "
                               "expression", tok[2])
            if word == "val" and self.peek(1)[0] == "(":
                self.next()
                self.expect("(")
                var = self.expect("IDENT", "group variable")[1]
                self.expect(")")
                if var not in bound:
                    raise DslError(f"unbound variable {var!r} in val()", tok[2])
                return ECall("val", var, span=tok[2])
            if word == "coord" and self.peek(1)[0] == "(":
                self.next()
                self.expect("(")
                var = self.expect("IDENT", "group variable")[1]
                self.expect(",")
                pos = int(self.expect("INT", "coordinate position")[1])
                self.expect(")")
                if var not in bound:
                    raise DslError(f"unbound variable {var!r} in coord()", tok[2])
                return ECall("coord", var, pos, span=tok[2])
            if self.peek(1)[0] == "(":
                raise DslError(f"unknown family {word!r} (declared families: "
                               f"{', '.join(self.families) or 'none'})", tok[2])
            self.next()
            return EVar(word, span=tok[2])
        raise DslError(f"expected an expression, found {tok[1]!r}", tok[2])


def parse(text: str) -> AlgebraAST:
    """Parse a .liealg source into an AST.

    Raises :class:`DslError` with a line/column span for any problem;
    never lets another exception type escape on malformed input.
    """
    try:
        return _Parser(text).parse_file()
    except DslError:
        raise
    except RecursionError:
        raise DslError("input nests too deeply")
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise DslError(f"malformed input: {exc}")


# ---------------------------------------------------------------------------
# pretty printer (round-trips through parse)
# ---------------------------------------------------------------------------

def _expr_text(node, prec: int = 0) -> str:
    kind = type(node)
    if kind is ENum:
        q = node.value
        text = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return f"({text})" if q.denominator != 1 and prec >= 3 else text
    if kind is EVar:
        return node.name
    if kind is ECall:
        if node.fn == "val":
            return f"val({node.var})"
        return f"coord({node.var}, {node.arg})"
    if kind is EBin:
        level = 1 if node.op in "+-" else 2
        left = _expr_text(node.left, level)
        right = _expr_text(node.right, level + 1)
        text = f"{left} {node.op} {right}"
        return f"({text})" if prec > level else text
    if kind is ENeg:
        text = f"-{_expr_text(node.operand, 3)}"
        return f"({text})" if prec > 2 else text
    if kind is EPow:
        return f"{_expr_text(node.base, 4)}^{node.exponent}"
    raise TypeError(f"not an expression node: {node!r}")


def pretty(ast: AlgebraAST) -> str:
    lines = []
    if ast.name:
        lines.append(f"algebra {ast.name};")
    if ast.rank is not None:
        lines.append(f"rank {ast.rank};")
    for pname, default in ast.params:
        lines.append(f"param {pname};" if default is None else f"param {pname} = {default};")
    for fam in ast.families:
        if fam.central:
            lines.append(f"family {fam.name} central;")
        elif fam.index_domain:
            lines.append(f"family {fam.name} graded indexed {fam.index_domain};")
        else:
            lines.append(f"family {fam.name} graded;")
    if ast.import_name:
        lines.append(f"import {ast.import_name};")
    for clause in ast.clauses:
        lines.append(_clause_text(clause))
    return "\n".join(lines) + "\n"


def _clause_text(clause: ClauseAST) -> str:
    def pat(p: SymPattern) -> str:
        if p.index_var:
            return f"{p.family} {p.degree_var} {p.index_var}"
        return f"{p.family} {p.degree_var}"

    head = f"[{pat(clause.left)}, {pat(clause.right)}] ="
    if not clause.terms:
        return f"{head} 0;"
    parts = []
    for k, term in enumerate(clause.terms):
        factors = [_expr_text(term.coeff, 3)]
        for g in term.guards:
            factors.append(f"d({_expr_text(g.lhs)} = {_expr_text(g.rhs)})")
        t = term.target
        if t.degree is None:
            factors.append(t.family)
        elif t.index is None:
            factors.append(f"{t.family}({_expr_text(t.degree)})")
        else:
            factors.append(f"{t.family}({_expr_text(t.degree)}, {_expr_text(t.index)})")
        body = " * ".join(factors)
        if k == 0:
            parts.append(f"-{body}" if term.negate else body)
        else:
            parts.append(f"- {body}" if term.negate else f"+ {body}")
    return f"{head} {' '.join(parts)};"


# ---------------------------------------------------------------------------
# compiler
# ---------------------------------------------------------------------------

_CANON = {"left_deg": "a", "right_deg": "b", "left_idx": "i", "right_idx": "j"}


def _affinize(node, var_kinds: dict, span):
    """Reduce an expression to integer-affine form {var: coeff}, const."""
    kind = type(node)
    if kind is ENum:
        if node.value.denominator != 1:
            raise DslError("delta guards must use integer coefficients", span)
        return {}, int(node.value)
    if kind is EVar:
        if node.name not in var_kinds:
            raise DslError(f"unbound variable {node.name!r} in delta guard", span)
        return {node.name: 1}, 0
    if kind is ENeg:
        coeffs, const = _affinize(node.operand, var_kinds, span)
        return {v: -c for v, c in coeffs.items()}, -const
    if kind is EBin and node.op in "+-":
        lc, lk = _affinize(node.left, var_kinds, span)
        rc, rk = _affinize(node.right, var_kinds, span)
        sign = 1 if node.op == "+" else -1
        out = dict(lc)
        for v, c in rc.items():
            out[v] = out.get(v, 0) + sign * c
        return {v: c for v, c in out.items() if c}, lk + sign * rk
    if kind is EBin and node.op == "*":
        lc, lk = _affinize(node.left, var_kinds, span)
        rc, rk = _affinize(node.right, var_kinds, span)
        if lc and rc:
            raise DslError("delta guards must be affine", span)
        if lc:
            return {v: c * rk for v, c in lc.items() if c * rk}, lk * rk
        return {v: c * lk for v, c in rc.items() if c * lk}, lk * rk
    raise DslError("delta guards must be affine expressions of bound variables", span)


def _to_coeff_expr(node, env: dict):
    """Translate a parsed expression into a compiled coefficient tree.

    ``env`` maps user variable names to ('group'|'index'|'param',
    canonical name).  Bare group variables evaluate to their scalar
    value.
    """
    kind = type(node)
    if kind is ENum:
        return Const(node.value)
    if kind is EVar:
        entry = env.get(node.name)
        if entry is None:
            raise DslError(f"unbound variable {node.name!r}", node.span)
        what, canon = entry
        if what == "group":
            return Val(canon)
        if what == "index":
            return Idx(canon)
        return Param(canon)
    if kind is ECall:
        entry = env.get(node.var)
        if entry is None or entry[0] != "group":
            raise DslError(f"{node.fn}() needs a group variable, got {node.var!r}",
                           node.span)
        if node.fn == "val":
            return Val(entry[1])
        return Coord(entry[1], node.arg)
    if kind is EBin:
        return BinOp(node.op, _to_coeff_expr(node.left, env),
                     _to_coeff_expr(node.right, env))
    if kind is ENeg:
        return NegOp(_to_coeff_expr(node.operand, env))
    if kind is EPow:
        if node.exponent < 0:
            raise DslError("negative exponents are not supported", node.span)
        return PowOp(_to_coeff_expr(node.base, env), node.exponent)
    raise DslError(f"bad expression node {node!r}")


def compile_ast(ast: AlgebraAST, params: dict | None = None,
                rank: int | None = None, generators=None,
                antisym_samples: int = 200) -> AlgebraSpec:
    """Compile a parsed file to an executable algebra.

    ``params`` binds (or overrides) declared parameters; every declared
    parameter must end up bound.  Same-family clauses are checked for
    antisymmetry on sampled bindings (coordinates in [-10, 10], indices
    in [0, 10] or [-10, 10] per the domain).
    """
    if ast.import_name:
        from .catalog import catalog

        effective = dict(params or {})
        for pname, default in ast.params:
            effective.setdefault(pname, default)
        return catalog(ast.import_name, lam=effective.get("lambda"),
                       rank=rank or ast.rank or 1, generators=generators)

    rank = rank or ast.rank or 1
    group = standard_group(rank, generators)
    nvars = group.nvars

    bound_params = {}
    overrides = dict(params or {})
    for pname, default in ast.params:
        value = overrides.pop(pname, default)
        if value is None:
            raise DslError(f"parameter {pname!r} is not bound; pass a value at compile time")
        if not isinstance(value, Scalar):
            try:
                value = parse_scalar(str(value), nvars)
            except ScalarParseError as exc:
                raise DslError(f"bad value for parameter {pname!r}: {exc}")
        bound_params[pname] = value
    if overrides:
        raise DslError(f"unknown parameter binding(s): {', '.join(sorted(overrides))}")

    families = tuple(FamilyDecl(f.name, central=f.central, index_domain=f.index_domain)
                     for f in ast.families)
    family_map = {f.name: f for f in families}
    param_names = {p for p, _ in ast.params}
    for f in families:
        if f.name in param_names:
            raise DslError(f"{f.name!r} is both a family and a parameter")

    rules = {}
    for clause in ast.clauses:
        key = (clause.left.family, clause.right.family)
        if key in rules or (key[1], key[0]) in rules:
            raise DslError(f"duplicate bracket clause for {key}", clause.span)
        rules[key] = tuple(_compile_clause(clause, family_map, param_names))

    try:
        alg = AlgebraSpec(name=ast.name or "anonymous", group=group,
                          families=families, rules=rules, params=bound_params)
    except AlgebraError as exc:
        raise DslError(str(exc))

    _check_antisymmetry(alg, ast, antisym_samples)
    return alg


def _compile_clause(clause: ClauseAST, family_map, param_names):
    env = {
        clause.left.degree_var: ("group", "a"),
        clause.right.degree_var: ("group", "b"),
    }
    var_kinds = {clause.left.degree_var: "group", clause.right.degree_var: "group"}
    if clause.left.index_var:
        env[clause.left.index_var] = ("index", "i")
        var_kinds[clause.left.index_var] = "index"
    if clause.right.index_var:
        env[clause.right.index_var] = ("index", "j")
        var_kinds[clause.right.index_var] = "index"
    for p in param_names:
        if p in env:
            raise DslError(f"variable {p!r} shadows a parameter", clause.span)
        env[p] = ("param", p)

    canon_group = {clause.left.degree_var: "a", clause.right.degree_var: "b"}
    canon_index = {}
    if clause.left.index_var:
        canon_index[clause.left.index_var] = "i"
    if clause.right.index_var:
        canon_index[clause.right.index_var] = "j"

    compiled = []
    for term in clause.terms:
        target_decl = family_map.get(term.target.family)
        if target_decl is None:
            raise DslError(f"unknown family {term.target.family!r}", term.target.span)

        guards = []
        for g in term.guards:
            lc, lk = _affinize(g.lhs, var_kinds, g.span)
            rc, rk = _affinize(g.rhs, var_kinds, g.span)
            coeffs = dict(lc)
            for v, c in rc.items():
                coeffs[v] = coeffs.get(v, 0) - c
            coeffs = {v: c for v, c in coeffs.items() if c}
            const = lk - rk
            kinds = {var_kinds[v] for v in coeffs}
            if not kinds:
                raise DslError("delta guard compares constants only", g.span)
            if len(kinds) > 1:
                raise DslError("delta guard mixes group and index variables", g.span)
            kind = kinds.pop()
            if kind == "group":
                if const != 0:
                    raise DslError("group-valued guards may only compare against zero",
                                   g.span)
                coeffs = {canon_group[v]: c for v, c in coeffs.items()}
                guards.append(DeltaGuard("group", tuple(sorted(coeffs.items()))))
            else:
                coeffs = {canon_index[v]: c for v, c in coeffs.items()}
                guards.append(DeltaGuard("index", tuple(sorted(coeffs.items())), const))

        index_affine = None
        if target_decl.central:
            if term.target.degree is not None:
                raise DslError("central targets take no arguments", term.target.span)
        else:
            dc, dk = _affinize(term.target.degree, var_kinds, term.target.span)
            canon = {canon_group.get(v): c for v, c in dc.items()}
            if dk != 0 or canon != {"a": 1, "b": 1}:
                raise DslError(
                    "target degree must be exactly the sum of both argument degrees "
                    "(the bracket is graded)", term.target.span)
            if target_decl.index_domain is not None:
                if term.target.index is None:
                    raise DslError(f"family {target_decl.name} needs an index expression",
                                   term.target.span)
                ic, ik = _affinize(term.target.index, var_kinds, term.target.span)
                bad = [v for v in ic if var_kinds[v] != "index"]
                if bad:
                    raise DslError("target index must be an affine expression of the "
                                   "index variables", term.target.span)
                ic = {canon_index[v]: c for v, c in ic.items()}
                index_affine = (ic.get("i", 0), ic.get("j", 0), ik)
            elif term.target.index is not None:
                raise DslError(f"family {target_decl.name} carries no index",
                               term.target.span)

        coeff = _to_coeff_expr(term.coeff, env)
        if term.negate:
            coeff = NegOp(coeff)
        compiled.append(TermRule(term.target.family, index_affine, tuple(guards), coeff))
    return compiled


def _check_antisymmetry(alg: AlgebraSpec, ast: AlgebraAST, samples: int):
    rng = random.Random(0)
    for clause in ast.clauses:
        if clause.left.family != clause.right.family:
            continue
        fam = clause.left.family
        decl = alg.family(fam)
        terms = alg.rules[(fam, fam)]
        for _ in range(samples):
            deg_a = GroupElement(rng.randint(-10, 10) for _ in range(alg.group.rank))
            deg_b = GroupElement(rng.randint(-10, 10) for _ in range(alg.group.rank))
            if decl.index_domain == "nat":
                ia, ib = rng.randint(0, 10), rng.randint(0, 10)
            elif decl.index_domain == "int":
                ia, ib = rng.randint(-10, 10), rng.randint(-10, 10)
            else:
                ia = ib = None
            x = BasisSymbol(fam, deg_a, ia)
            y = BasisSymbol(fam, deg_b, ib)
            try:
                fwd = alg._eval_terms(terms, x, y, negate=False)
                bwd = alg._eval_terms(terms, y, x, negate=False)
            except IndexDomainError as exc:
                raise DslError(f"bracket clause for [{fam}, {fam}] leaves the index "
                               f"domain: {exc}", clause.span)
            if not (fwd + bwd).is_zero():
                raise AntisymmetryViolation(
                    f"bracket clause for [{fam}, {fam}] is not antisymmetric at "
                    f"{x}, {y}: [x,y]+[y,x] = {fwd + bwd}", clause.span)


def compile_text(text: str, **kwargs) -> AlgebraSpec:
    return compile_ast(parse(text), **kwargs)


def compile_file(path, **kwargs) -> AlgebraSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return compile_text(fh.read(), **kwargs)
