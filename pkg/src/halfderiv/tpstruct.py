"""Commutative products paired with a Lie bracket, and their laws.

A transposed Poisson structure on a Lie algebra is a commutative
associative product satisfying 2 z.[x,y] = [z.x, y] + [x, z.y].  The
classified families are constructed here in closed form:

  * :class:`ShiftFamilyProduct` on the two-index algebra with upward
    shifts: L_{a,i} . L_{b,j} = sum over stored (d, k) of
    coeff * L_{a+b+d, i+j+k+1}, and the central element annihilates
    everything.
  * :class:`CentralSquareProduct` on the deformed family at lambda = -1:
    I_0 . I_0 = beta * C_L, every other basis product zero.
  * :class:`TabulatedProduct`, an explicit symmetric table on a window
    (products falling outside the table are skipped and counted).
  * :class:`ZeroProduct`.

Verification is exact: commutativity, associativity, the transposed
compatibility law above, and the ordinary Poisson-Leibniz law
[x, y.z] = [x,y].z + y.[x,z] (which the upward-shift family must fail;
the failing witness is kept in the report).  Left multiplications are
checked to be half-derivations through the derivation verifier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .algebra import AlgebraSpec, BasisSymbol, LinComb
from .derivations import ExactMap, MapReport, WindowedMap, verify_map
from .groups import GroupElement, parse_element, format_element
from .scalars import Scalar, format_scalar, parse_scalar


class ProductError(ValueError):
    pass


class ProductSpec:
    """Base class: a symmetric bilinear product on basis symbols.

    ``mul`` returns the product as a LinComb, or None when the product
    is outside the product's knowledge (tabulated kinds only).
    """

    kind = "abstract"
    algebra: AlgebraSpec

    def mul(self, x: BasisSymbol, y: BasisSymbol) -> Optional[LinComb]:
        raise NotImplementedError

    def mul_lin(self, u: LinComb, v: LinComb) -> Optional[LinComb]:
        out = LinComb()
        for xs, xc in u:
            for ys, yc in v:
                piece = self.mul(xs, ys)
                if piece is None:
                    return None
                coeff = xc * yc
                if coeff.is_zero():
                    continue
                for sym, c in piece:
                    out.add_term(sym, coeff * c)
        return out

    def left_mult_map(self, z: BasisSymbol):
        """x -> z.x as a verifiable map (total for closed-form kinds)."""
        one = Scalar.one(self.algebra.group.nvars)

        def apply(sym: BasisSymbol) -> LinComb:
            result = self.mul(z, sym)
            if result is None:
                raise ProductError(f"product {z} . {sym} is outside the table")
            return result

        return ExactMap(apply, label=f"left multiplication by {z}")

    def describe(self) -> dict:
        raise NotImplementedError


class ZeroProduct(ProductSpec):
    kind = "zero"

    def __init__(self, algebra: AlgebraSpec):
        self.algebra = algebra

    def mul(self, x, y):
        return LinComb()

    def describe(self):
        return {"kind": self.kind}


class ShiftFamilyProduct(ProductSpec):
    """Finitely many coefficients a(d, k), k >= 0; the product is

        L_{a,i} . L_{b,j} = sum a(d,k) L_{a+b+d, i+j+k+1}

    and the central element multiplies everything to zero."""

    kind = "w_hat"

    def __init__(self, algebra: AlgebraSpec, coeffs: dict):
        if "L" not in algebra.family_names():
            raise ProductError("shift-family product needs the two-index L family")
        if algebra.family("L").index_domain != "nat":
            raise ProductError("shift-family product needs Z+ indices on L")
        self.algebra = algebra
        clean = {}
        for (d, k), c in coeffs.items():
            if not isinstance(d, GroupElement):
                d = GroupElement(d)
            if k < 0:
                raise ProductError(f"index shift k must be >= 0, got {k}")
            c = algebra.scalar(c)
            if not c.is_zero():
                clean[(d, k)] = c
        self.coeffs = clean

    def mul(self, x, y):
        alg = self.algebra
        if alg.is_central(x) or alg.is_central(y):
            return LinComb()
        out = LinComb()
        degree = x.degree + y.degree
        shift = x.index + y.index + 1
        for (d, k), c in self.coeffs.items():
            out.add_term(alg.symbol("L", degree + d, shift + k), c)
        return out

    def describe(self):
        return {
            "kind": self.kind,
            "coeffs": [
                {"d": format_element(d), "k": k, "c": format_scalar(c)}
                for (d, k), c in sorted(self.coeffs.items())
            ],
        }


class CentralSquareProduct(ProductSpec):
    """I_0 . I_0 = beta * C_L on the lambda = -1 algebra; all other
    basis products vanish."""

    kind = "g_minus1"

    def __init__(self, algebra: AlgebraSpec, beta):
        lam = algebra.params.get("lambda")
        if algebra.name != "g" or lam is None or not (lam == -1):
            raise ProductError("central-square product lives on the deformed "
                               "family at lambda = -1")
        self.algebra = algebra
        self.beta = algebra.scalar(beta)
        zero = algebra.group.zero()
        self._i0 = algebra.symbol("I", zero)
        self._cl = algebra.symbol("C_L")

    def mul(self, x, y):
        if x == self._i0 and y == self._i0:
            return LinComb({self._cl: self.beta}) if not self.beta.is_zero() else LinComb()
        return LinComb()

    def describe(self):
        return {"kind": self.kind, "beta": format_scalar(self.beta)}


class TabulatedProduct(ProductSpec):
    """Explicit symmetric table on a window; missing entries mean the
    product escapes the window and the instance is skipped."""

    kind = "tabulated"

    def __init__(self, algebra: AlgebraSpec, table: dict):
        self.algebra = algebra
        self.table = {}
        for (x, y), lc in table.items():
            self.table[(x, y)] = lc
            swapped = self.table.get((y, x))
            if swapped is not None and not (swapped - lc).is_zero() and x != y:
                # keep the explicit entry; commutativity check will flag it
                continue
            self.table.setdefault((y, x), lc)

    def mul(self, x, y):
        return self.table.get((x, y))

    def describe(self):
        return {"kind": self.kind, "entries": len(self.table)}


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class LawFailure:
    law: str
    witness: tuple
    lhs: LinComb
    rhs: LinComb

    def describe(self) -> dict:
        return {
            "law": self.law,
            "witness": [str(s) for s in self.witness],
            "lhs": repr(self.lhs),
            "rhs": repr(self.rhs),
        }


@dataclass
class VerifyReport:
    """Outcome of one law over a batch of instances.  Only the first few
    failing witnesses are kept; ``failed`` counts all of them."""

    law: str
    checked: int = 0
    skipped: int = 0
    failed: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def describe(self) -> dict:
        return {
            "law": self.law,
            "checked": self.checked,
            "skipped": self.skipped,
            "failed": self.failed,
            "passed": self.ok,
            "failures": [f.describe() for f in self.failures],
        }


def _record(report, law, witness, lhs, rhs, max_failures=10):
    if lhs is None or rhs is None:
        report.skipped += 1
        return
    report.checked += 1
    if not (lhs - rhs).is_zero():
        report.failed += 1
        if len(report.failures) < max_failures:
            report.failures.append(LawFailure(law, witness, lhs, rhs))


def verify_commutative(product: ProductSpec, pairs) -> VerifyReport:
    report = VerifyReport("commutative")
    for x, y in pairs:
        _record(report, "commutative", (x, y), product.mul(x, y), product.mul(y, x))
    return report


def verify_associative(product: ProductSpec, triples) -> VerifyReport:
    report = VerifyReport("associative")
    one = Scalar.one(product.algebra.group.nvars)
    for x, y, z in triples:
        xy = product.mul(x, y)
        yz = product.mul(y, z)
        lhs = product.mul_lin(xy, LinComb({z: one})) if xy is not None else None
        rhs = product.mul_lin(LinComb({x: one}), yz) if yz is not None else None
        _record(report, "associative", (x, y, z), lhs, rhs)
    return report


def verify_tp_compat(alg: AlgebraSpec, product: ProductSpec, triples) -> VerifyReport:
    """2 z.[x,y] = [z.x, y] + [x, z.y], exactly, per triple (z, x, y)."""
    report = VerifyReport("transposed_compatibility")
    one = Scalar.one(alg.group.nvars)
    two = alg.scalar(2)
    for z, x, y in triples:
        br = alg.bracket(x, y)
        zxy = product.mul_lin(LinComb({z: one}), br)
        lhs = zxy.scale(two) if zxy is not None else None
        zx = product.mul(z, x)
        zy = product.mul(z, y)
        if zx is None or zy is None:
            rhs = None
        else:
            rhs = alg.bracket_lin(zx, LinComb({y: one})) + \
                alg.bracket_lin(LinComb({x: one}), zy)
        _record(report, "transposed_compatibility", (z, x, y), lhs, rhs)
    return report


def verify_poisson_leibniz(alg: AlgebraSpec, product: ProductSpec, triples) -> VerifyReport:
    """[x, y.z] = [x,y].z + y.[x,z]; failing it separates the transposed
    world from ordinary Poisson algebras."""
    report = VerifyReport("poisson_leibniz")
    one = Scalar.one(alg.group.nvars)
    for x, y, z in triples:
        yz = product.mul(y, z)
        lhs = alg.bracket_lin(LinComb({x: one}), yz) if yz is not None else None
        xy_z = product.mul_lin(alg.bracket(x, y), LinComb({z: one}))
        y_xz = product.mul_lin(LinComb({y: one}), alg.bracket(x, z))
        rhs = (xy_z + y_xz) if (xy_z is not None and y_xz is not None) else None
        _record(report, "poisson_leibniz", (x, y, z), lhs, rhs)
    return report


def left_mult_check(alg: AlgebraSpec, product: ProductSpec, z: BasisSymbol,
                    pairs) -> MapReport:
    """Left multiplication by z must be a half-derivation of the bracket."""
    half = alg.scalar(1) / alg.scalar(2)
    return verify_map(alg, half, product.left_mult_map(z), pairs)


# ---------------------------------------------------------------------------
# JSON product files
# ---------------------------------------------------------------------------

KNOWN_EXPECTATIONS = ("tp_pass", "commutative", "associative", "poisson", "non_poisson")


def product_from_dict(alg: AlgebraSpec, doc: dict) -> ProductSpec:
    kind = doc.get("kind")
    if kind == "w_hat":
        coeffs = {}
        for entry in doc.get("coeffs", []):
            d = parse_element(entry["d"], alg.group.rank)
            k = int(entry["k"])
            c = parse_scalar(str(entry["c"]), alg.group.nvars)
            coeffs[(d, k)] = c
        return ShiftFamilyProduct(alg, coeffs)
    if kind == "g_minus1":
        beta = parse_scalar(str(doc.get("beta", "1")), alg.group.nvars)
        return CentralSquareProduct(alg, beta)
    if kind == "zero":
        return ZeroProduct(alg)
    if kind == "tabulated":
        from .algebra import parse_symbol

        table = {}
        for entry in doc.get("entries", []):
            x = parse_symbol(entry["x"], alg)
            y = parse_symbol(entry["y"], alg)
            value = LinComb()
            for part in entry["value"]:
                sym = parse_symbol(part["sym"], alg)
                value.add_term(sym, parse_scalar(str(part["c"]), alg.group.nvars))
            table[(x, y)] = value
        return TabulatedProduct(alg, table)
    raise ProductError(f"unknown product kind {kind!r}")


def load_product(alg: AlgebraSpec, path) -> tuple:
    """Read a product file; returns (product, expectations)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    expect = doc.get("expect", ["tp_pass"])
    if isinstance(expect, str):
        expect = [e.strip() for e in expect.split(",")]
    for e in expect:
        if e not in KNOWN_EXPECTATIONS:
            raise ProductError(f"unknown expectation {e!r} (choose from "
                               f"{', '.join(KNOWN_EXPECTATIONS)})")
    return product_from_dict(alg, doc), list(expect)


def run_tp_suite(alg: AlgebraSpec, product: ProductSpec, symbols,
                 left_mult_symbols=None) -> dict:
    """All five verifications over an exhaustive window.

    ``symbols`` feeds pairs (commutativity) and ordered triples (the
    three 3-ary laws); left multiplications are checked for every z in
    ``left_mult_symbols`` (default: the same window).
    """
    symbols = list(symbols)
    pairs = [(x, y) for x in symbols for y in symbols]
    triples = [(x, y, z) for x in symbols for y in symbols for z in symbols]
    reports = {
        "commutative": verify_commutative(product, pairs),
        "associative": verify_associative(product, triples),
        "transposed_compatibility": verify_tp_compat(alg, product, triples),
        "poisson_leibniz": verify_poisson_leibniz(alg, product, triples),
    }
    lm_symbols = symbols if left_mult_symbols is None else list(left_mult_symbols)
    distinct_pairs = [(x, y) for i, x in enumerate(symbols)
                      for y in symbols[i + 1:]]
    lm_total = MapReport()
    lm_bad = []
    for z in lm_symbols:
        rep = left_mult_check(alg, product, z, distinct_pairs)
        lm_total.checked += rep.checked
        lm_total.passed += rep.passed
        lm_total.skipped += rep.skipped
        if not rep.ok:
            lm_bad.append((z, rep))
            lm_total.failures.extend(rep.failures)
    reports["left_multiplications"] = lm_total
    return reports


def expectations_met(reports: dict, expect) -> tuple:
    """Evaluate an expectation list against the reports; returns
    (all_met, per_expectation dict)."""
    tp_ok = (reports["commutative"].ok and reports["associative"].ok
             and reports["transposed_compatibility"].ok)
    status = {}
    for e in expect:
        if e == "tp_pass":
            status[e] = tp_ok
        elif e == "commutative":
            status[e] = reports["commutative"].ok
        elif e == "associative":
            status[e] = reports["associative"].ok
        elif e == "poisson":
            status[e] = reports["poisson_leibniz"].ok
        elif e == "non_poisson":
            status[e] = not reports["poisson_leibniz"].ok
    return all(status.values()), status
