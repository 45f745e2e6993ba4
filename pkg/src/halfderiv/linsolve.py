"""Exact kernels of sparse linear systems over the scalar field.

Two independent routes:

``kernel_dense``
    Reference implementation: plain row reduction to reduced echelon
    form over the field, lowest-column pivoting, rows taken in input
    order.  Slow and boring on purpose; it exists to check the fast path.

``kernel_sparse``
    Fraction-free elimination in the style of Bareiss: rows are cleared
    to integer (or integer-coefficient polynomial) form, updates use
    cross-multiplication only, and every updated row is divided by its
    content, so entries never become nested fractions.  Pivots are chosen
    to minimise fill with a Markowitz count, ties broken by lowest column
    index, then lowest row id.

Both return a basis of the right kernel as sparse {column: Scalar} maps.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .scalars import Poly, Scalar

Row = dict  # {col: Scalar}
Vector = dict  # {col: Scalar}


# ---------------------------------------------------------------------------
# dense reference path
# ---------------------------------------------------------------------------

def rref_scalar(rows, ncols: int):
    """Reduced row echelon form over the Scalar field.

    Returns a list of (pivot_col, row) with unit pivots, sorted by pivot
    column.  Input rows are not modified.
    """
    pivots = []  # list of (pivcol, {col: Scalar})
    for row in rows:
        r = {c: v for c, v in row.items() if not v.is_zero()}
        for pc, prow in pivots:
            factor = r.get(pc)
            if factor is None or factor.is_zero():
                continue
            del r[pc]
            for c, v in prow.items():
                if c == pc:
                    continue
                cur = r.get(c)
                nxt = (cur - factor * v) if cur is not None else -(factor * v)
                if nxt.is_zero():
                    r.pop(c, None)
                else:
                    r[c] = nxt
        if not r:
            continue
        pc = min(r)
        pivval = r.pop(pc)
        r = {c: v / pivval for c, v in r.items() if not v.is_zero()}
        for opc, orow in pivots:
            factor = orow.get(pc)
            if factor is None or factor.is_zero():
                continue
            del orow[pc]
            for c, v in r.items():
                cur = orow.get(c)
                nxt = (cur - factor * v) if cur is not None else -(factor * v)
                if nxt.is_zero():
                    orow.pop(c, None)
                else:
                    orow[c] = nxt
        r[pc] = _one_like(pivval)
        pivots.append((pc, r))
    pivots.sort(key=lambda t: t[0])
    return pivots


def _one_like(s: Scalar) -> Scalar:
    return Scalar.one(s.nvars)


def kernel_dense(rows, ncols: int):
    """Kernel basis via the reference rref; one vector per free column."""
    nvars = _system_nvars(rows)
    pivots = rref_scalar(rows, ncols)
    pivot_cols = {pc for pc, _ in pivots}
    basis = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = {f: Scalar.one(nvars)}
        for pc, row in pivots:
            c = row.get(f)
            if c is not None and not c.is_zero():
                vec[pc] = -c
        basis.append(vec)
    return basis


def _system_nvars(rows) -> int:
    for row in rows:
        for v in row.values():
            return v.nvars
    return 0


# ---------------------------------------------------------------------------
# vector-space utilities (rank, canonical bases, span comparison)
# ---------------------------------------------------------------------------

def rank_of(vectors, ncols: int) -> int:
    return len(rref_scalar(vectors, ncols))

def reduce_mod(pivots, vector):
    """Remainder of a vector after reduction by an rref basis."""
    r = {c: v for c, v in vector.items() if not v.is_zero()}
    for pc, prow in pivots:
        factor = r.get(pc)
        if factor is None or factor.is_zero():
            continue
        for c, v in prow.items():
            cur = r.get(c)
            nxt = (cur - factor * v) if cur is not None else -(factor * v)
            if nxt.is_zero():
                r.pop(c, None)
            else:
                r[c] = nxt
    return r


def span_contains(pivots, vectors) -> bool:
    return all(not reduce_mod(pivots, v) for v in vectors)


def same_span(a_vectors, b_vectors, ncols: int) -> bool:
    """Mutual containment of the two spans."""
    pa = rref_scalar(a_vectors, ncols)
    pb = rref_scalar(b_vectors, ncols)
    return span_contains(pa, b_vectors) and span_contains(pb, a_vectors)


def canonical_basis(vectors, ncols: int):
    """Deterministic reduced basis of the span, as sparse vectors."""
    out = []
    for pc, row in rref_scalar(vectors, ncols):
        out.append(dict(row))
    return out


# ---------------------------------------------------------------------------
# fraction-free sparse path
# ---------------------------------------------------------------------------

class _RationalOps:
    """Rows over Z: cleared rationals, content-normalised integers."""

    def __init__(self, nvars: int):
        self.nvars = nvars

    def clear_row(self, row: Row):
        den_lcm = 1
        for v in row.values():
            d = v.as_fraction().denominator
            den_lcm = den_lcm * d // math.gcd(den_lcm, d)
        vals = {}
        for c, v in row.items():
            q = v.as_fraction() * den_lcm
            vals[c] = q.numerator
        return self.normalize(vals)

    @staticmethod
    def normalize(vals):
        if not vals:
            return vals
        g = 0
        for v in vals.values():
            g = math.gcd(g, v)
        if vals[min(vals)] < 0:
            g = -g
        if g not in (0, 1):
            return {c: v // g for c, v in vals.items()}
        return vals

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def key(v):
        return v

    def to_scalar(self, v) -> Scalar:
        return Scalar.from_rational(v, self.nvars)


class _PolyOps:
    """Rows over Z[e2..eN], held as raw {exponents: int} dicts so the
    elimination inner loop never touches Fractions."""

    def __init__(self, nvars: int):
        self.nvars = nvars

    def clear_row(self, row: Row):
        if all(s.den.is_const() for s in row.values()):
            # constant denominators are already folded to 1
            polys = {c: s.num for c, s in row.items()}
        else:
            items = list(row.items())
            dens = [s.den for _, s in items]
            # prefix/suffix products avoid polynomial division
            n = len(items)
            prefix = [Poly.one(self.nvars)] * (n + 1)
            for k in range(n):
                prefix[k + 1] = prefix[k] * dens[k]
            suffix = [Poly.one(self.nvars)] * (n + 1)
            for k in range(n - 1, -1, -1):
                suffix[k] = suffix[k + 1] * dens[k]
            polys = {}
            for k, (c, s) in enumerate(items):
                polys[c] = s.num * prefix[k] * suffix[k + 1]
        den_lcm = 1
        for p in polys.values():
            for q in p.terms.values():
                den_lcm = den_lcm * q.denominator // math.gcd(den_lcm, q.denominator)
        vals = {}
        for c, p in polys.items():
            vals[c] = {e: int(q * den_lcm) for e, q in p.terms.items()}
        return self.normalize(vals)

    @staticmethod
    def normalize(vals):
        if not vals:
            return vals
        g = 0
        mono = None
        for d in vals.values():
            for e, c in d.items():
                g = math.gcd(g, c)
                if mono is None:
                    mono = list(e)
                else:
                    for k, x in enumerate(e):
                        if x < mono[k]:
                            mono[k] = x
        lead = vals[min(vals)]
        if lead[max(lead)] < 0:
            g = -g
        shift = mono is not None and any(mono)
        if g in (0, 1) and not shift:
            return vals
        out = {}
        for c, d in vals.items():
            if shift:
                d = {tuple(a - b for a, b in zip(e, mono)): v for e, v in d.items()}
            if g not in (0, 1):
                d = {e: v // g for e, v in d.items()}
            out[c] = d
        return out

    @staticmethod
    def mul(a, b):
        if len(b) == 1:
            ((be, bc),) = b.items()
            if not any(be):
                return {e: c * bc for e, c in a.items()}
        if len(a) == 1:
            ((ae, ac),) = a.items()
            if not any(ae):
                return {e: c * ac for e, c in b.items()}
        out = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                cur = out.get(e)
                s = c1 * c2 if cur is None else cur + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return out

    @staticmethod
    def sub(a, b):
        out = dict(a)
        for e, c in b.items():
            cur = out.get(e)
            s = -c if cur is None else cur - c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return out

    @staticmethod
    def neg(a):
        return {e: -c for e, c in a.items()}

    @staticmethod
    def key(v):
        return tuple(sorted(v.items()))

    def to_scalar(self, v) -> Scalar:
        return Scalar(Poly(self.nvars, {e: Fraction(c) for e, c in v.items()}))


def _pick_ops(rows, nvars: int):
    for row in rows:
        for v in row.values():
            if not v.is_rational():
                return _PolyOps(nvars)
    return _RationalOps(nvars)


def kernel_sparse(rows, ncols: int, nvars: int | None = None):
    """Kernel basis via fraction-free elimination with Markowitz pivoting."""
    if nvars is None:
        nvars = _system_nvars(rows)
    ops = _pick_ops(rows, nvars)

    # clear, drop empties, dedupe
    cleared = []
    seen = set()
    for row in rows:
        vals = ops.clear_row({c: v for c, v in row.items() if not v.is_zero()})
        if not vals:
            continue
        sig = tuple(sorted((c, ops.key(v)) for c, v in vals.items()))
        if sig in seen:
            continue
        seen.add(sig)
        cleared.append(vals)

    active = dict(enumerate(cleared))
    col_rows: dict = {}
    for rid, vals in active.items():
        for c in vals:
            col_rows.setdefault(c, set()).add(rid)

    echelon = []  # (vals, pivot_col) in elimination order

    def retire(rid):
        for c in active[rid]:
            members = col_rows.get(c)
            if members is not None:
                members.discard(rid)
                if not members:
                    del col_rows[c]
        return active.pop(rid)

    while active:
        # Markowitz-style pivot: scan a few lowest-population columns,
        # minimise (row_nnz-1)*(col_nnz-1), ties by column then row id.
        cols = sorted(col_rows, key=lambda c: (len(col_rows[c]), c))[:4]
        best = None
        for c in cols:
            cn = len(col_rows[c]) - 1
            for rid in col_rows[c]:
                cost = (len(active[rid]) - 1) * cn
                cand = (cost, c, rid)
                if best is None or cand < best:
                    best = cand
        _, pc, prid = best
        pvals = retire(prid)
        pv = pvals[pc]
        for rid in list(col_rows.get(pc, ())):
            rvals = active[rid]
            rv = rvals[pc]
            merged = {}
            for c, v in rvals.items():
                if c != pc:
                    merged[c] = ops.mul(pv, v)
            for c, v in pvals.items():
                if c == pc:
                    continue
                cur = merged.get(c)
                term = ops.mul(rv, v)
                nxt = ops.sub(cur, term) if cur is not None else ops.neg(term)
                if nxt:
                    merged[c] = nxt
                else:
                    merged.pop(c, None)
            merged = ops.normalize(merged)
            # swap the row in place, bookkeeping column membership
            for c in rvals:
                if c not in merged:
                    members = col_rows.get(c)
                    if members is not None:
                        members.discard(rid)
                        if not members:
                            del col_rows[c]
            for c in merged:
                if c not in rvals:
                    col_rows.setdefault(c, set()).add(rid)
            if merged:
                active[rid] = merged
            else:
                del active[rid]

        echelon.append((pvals, pc))

    pivot_cols = {pc for _, pc in echelon}
    basis = []
    one = Scalar.one(nvars)
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = {f: one}
        for pvals, pc in reversed(echelon):
            total = None
            for c, v in pvals.items():
                if c == pc:
                    continue
                x = vec.get(c)
                if x is None:
                    continue
                term = ops.to_scalar(v) * x
                total = term if total is None else total + term
            if total is not None and not total.is_zero():
                vec[pc] = -total / ops.to_scalar(pvals[pc])
        basis.append(vec)
    return basis
