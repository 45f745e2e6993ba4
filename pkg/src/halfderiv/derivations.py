"""Windowed delta-derivation systems and their exact solution spaces.

A linear map phi of degree g is a delta-derivation when

    phi([x, y]) = delta * ([phi x, y] + [x, phi y])

for all x, y.  On an infinite-dimensional algebra we truncate to a
finite *window* of basis symbols.  Unknowns are the coefficients of phi
from window symbols into the degree-shifted window (plus central
symbols when the shifted degree is zero, matching the homogeneous
ansatz).  One equation is generated per (pair, output symbol), but only
when the equation is *complete*: no contribution from a basis symbol
outside the unknown-supported set may touch that output.  Incomplete
equations are dropped, so the computed space is a relaxation; spurious
boundary freedom is then suppressed by projecting solution bases onto
interior coordinates before ranks are reported.

The completeness test enumerates, per output symbol and fixed argument,
all basis symbols of the *infinite* algebra whose bracket with the fixed
argument could hit the output.  Bracket clauses have affine index shifts
and affine delta guards, so these preimages are solved exactly.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from . import linsolve
from .algebra import AlgebraSpec, BasisSymbol, LinComb, eval_coeff
from .groups import GroupElement, zero_element
from .scalars import Scalar


class WindowError(ValueError):
    pass


class EmptyWindowError(WindowError):
    pass


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Finite truncation of the basis: a group-degree box, an index
    interval per indexed family, the included families, and an interior
    margin used when projecting solution spaces."""

    gbox: tuple            # ((lo, hi), ...) one per group coordinate
    iboxes: tuple          # ((family, (lo, hi)), ...) for indexed families
    families: tuple        # family names included in the window
    margin: int = 0

    def __post_init__(self):
        if not self.families:
            raise EmptyWindowError("window selects no families")
        if self.margin < 0:
            raise WindowError("margin must be nonnegative")
        for lo, hi in self.gbox:
            if lo > hi:
                raise WindowError(f"empty degree interval [{lo}, {hi}]")
            if hi - lo < 2 * self.margin:
                raise WindowError(
                    f"margin {self.margin} leaves no interior in [{lo}, {hi}]"
                )
        for fam, (lo, hi) in self.iboxes:
            if lo > hi:
                raise WindowError(f"empty index interval for {fam}")
            if hi - lo < 2 * self.margin:
                raise WindowError(
                    f"margin {self.margin} leaves no interior index range for {fam}"
                )

    def ibox(self, family: str):
        for fam, box in self.iboxes:
            if fam == family:
                return box
        return None

    def degree_in_box(self, degree: GroupElement) -> bool:
        return all(lo <= c <= hi for c, (lo, hi) in zip(degree, self.gbox))

    def degree_interior(self, degree: GroupElement) -> bool:
        m = self.margin
        return all(lo + m <= c <= hi - m for c, (lo, hi) in zip(degree, self.gbox))

    def degrees(self):
        ranges = [range(lo, hi + 1) for lo, hi in self.gbox]
        for coords in itertools.product(*ranges):
            yield GroupElement(coords)

    def describe(self) -> dict:
        return {
            "gbox": [list(b) for b in self.gbox],
            "iboxes": {fam: list(b) for fam, b in self.iboxes},
            "families": list(self.families),
            "margin": self.margin,
        }


def make_window(alg: AlgebraSpec, gbox, ibox=None, margin: int = 0,
                families=None) -> Window:
    """Build a window for an algebra.

    ``gbox`` is one (lo, hi) pair or a list of them (one per coordinate).
    ``ibox`` applies to every indexed family; intervals for Z+ families
    are clamped at zero.  ``families`` defaults to all of them.
    """
    if isinstance(gbox, tuple) and len(gbox) == 2 and isinstance(gbox[0], int):
        gbox = [gbox] * alg.group.rank
    gbox = tuple((int(lo), int(hi)) for lo, hi in gbox)
    if len(gbox) != alg.group.rank:
        raise WindowError(f"need {alg.group.rank} degree intervals, got {len(gbox)}")
    if families is None:
        families = alg.family_names()
    iboxes = []
    for fam in families:
        decl = alg.family(fam)
        if decl.index_domain is None:
            continue
        if ibox is None:
            raise WindowError(f"family {fam} is indexed; an index interval is required")
        lo, hi = int(ibox[0]), int(ibox[1])
        if decl.index_domain == "nat" and lo < 0:
            lo = 0
        iboxes.append((fam, (lo, hi)))
    return Window(gbox=gbox, iboxes=tuple(iboxes), families=tuple(families),
                  margin=margin)


def enumerate_window(alg: AlgebraSpec, window: Window):
    """Window symbols in deterministic order: family declaration order,
    then lexicographic degree, then index.  Central families appear iff
    selected."""
    out = []
    selected = set(window.families)
    for decl in alg.families:
        if decl.name not in selected:
            continue
        if decl.central:
            out.append(alg.symbol(decl.name))
            continue
        box = window.ibox(decl.name)
        for degree in window.degrees():
            if decl.index_domain is None:
                out.append(alg.symbol(decl.name, degree))
            else:
                for k in range(box[0], box[1] + 1):
                    out.append(alg.symbol(decl.name, degree, k))
    if not out:
        raise EmptyWindowError("window contains no symbols")
    return out


def symbol_in_window(alg: AlgebraSpec, window: Window, sym: BasisSymbol) -> bool:
    if sym.family not in window.families:
        return False
    if alg.is_central(sym):
        return True
    if not window.degree_in_box(sym.degree):
        return False
    box = window.ibox(sym.family)
    if box is None:
        return sym.index is None
    return box[0] <= sym.index <= box[1]


def symbol_interior(alg: AlgebraSpec, window: Window, sym: BasisSymbol) -> bool:
    """Central symbols carry no truncated coordinates and count as
    interior; graded symbols must sit ``margin`` away from every edge."""
    if sym.family not in window.families:
        return False
    if alg.is_central(sym):
        return True
    if not window.degree_interior(sym.degree):
        return False
    box = window.ibox(sym.family)
    if box is None:
        return True
    m = window.margin
    return box[0] + m <= sym.index <= box[1] - m


# ---------------------------------------------------------------------------
# derivation problems and unknown supports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivationProblem:
    """delta-derivation problem on a window.

    ``degree`` is a group element for one homogeneous component, or
    ``None`` for the mixed solve whose unknown outputs range over the
    whole window.

    ``index_halo`` widens the unknown *output* index range beyond the
    window interval.  Bracket clauses shift indices by small constants,
    so equations at outputs near the index edge reference symbols one
    step outside the window; without halo coefficients those equations
    would have to be dropped as incomplete.  Halo unknowns are boundary
    coordinates and never enter interior ranks.  ``None`` picks the
    largest index offset used by the algebra's clauses.
    """

    algebra: AlgebraSpec
    delta: Scalar
    degree: Optional[GroupElement]
    window: Window
    index_halo: Optional[int] = None

    def __post_init__(self):
        if self.delta.is_zero():
            raise WindowError("delta must be nonzero")
        if self.degree is not None and self.degree.rank != self.algebra.group.rank:
            raise WindowError("degree rank does not match the algebra")

    def halo(self) -> int:
        if self.index_halo is not None:
            if self.index_halo < 0:
                raise WindowError("index halo must be nonnegative")
            return self.index_halo
        return clause_index_reach(self.algebra)


def clause_index_reach(alg: AlgebraSpec) -> int:
    """Largest constant index offset appearing in any bracket clause."""
    reach = 0
    for terms in alg.rules.values():
        for term in terms:
            if term.index_affine is not None:
                reach = max(reach, abs(term.index_affine[2]))
    return reach


def _graded_symbols_at(alg, window, degree, halo: int):
    out = []
    for decl in alg.families:
        if decl.name not in window.families or decl.central:
            continue
        if decl.index_domain is None:
            out.append(alg.symbol(decl.name, degree))
        else:
            lo, hi = window.ibox(decl.name)
            lo -= halo
            hi += halo
            if decl.index_domain == "nat" and lo < 0:
                lo = 0
            out.extend(alg.symbol(decl.name, degree, k) for k in range(lo, hi + 1))
    return out


def unknown_support(alg: AlgebraSpec, window: Window,
                    degree: Optional[GroupElement], x: BasisSymbol,
                    halo: int = 0):
    """Output symbols carrying an unknown coefficient of phi(x)."""
    selected_centrals = [s for s in alg.central_symbols() if s.family in window.families]
    if degree is None:
        out = []
        for decl in alg.families:
            if decl.name not in window.families or decl.central:
                continue
            for d in window.degrees():
                out.extend(_graded_symbols_at_family(alg, window, decl, d, halo))
        return out + selected_centrals
    target = x.degree + degree
    out = _graded_symbols_at(alg, window, target, halo)
    if target.is_zero():
        out += selected_centrals
    return out


def _graded_symbols_at_family(alg, window, decl, degree, halo: int):
    if decl.index_domain is None:
        return [alg.symbol(decl.name, degree)]
    lo, hi = window.ibox(decl.name)
    lo -= halo
    hi += halo
    if decl.index_domain == "nat" and lo < 0:
        lo = 0
    return [alg.symbol(decl.name, degree, k) for k in range(lo, hi + 1)]


# ---------------------------------------------------------------------------
# preimage enumeration for the completeness test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Unbounded:
    """Marker: infinitely many basis symbols of this family and degree
    can contribute; the equation can never be complete on a window."""
    family: str
    degree: GroupElement


def _contributors(alg: AlgebraSpec, w: BasisSymbol, fixed: BasisSymbol, side: str):
    """Basis symbols u (of the infinite algebra) with a nonzero
    coefficient of ``w`` in [u, fixed] (side 'left') or [fixed, u]
    (side 'right')."""
    cache = alg._contrib_cache
    key = (w, fixed, side)
    hit = cache.get(key)
    if hit is not None:
        return hit
    found = []
    u_degree = w.degree - fixed.degree
    for (f1, f2), terms in alg.rules.items():
        orientations = []
        if side == "left":
            # u occupies the free slot of [u, fixed]
            if f2 == fixed.family:
                orientations.append((f1, "a"))
            if f1 == fixed.family and f1 != f2:
                orientations.append((f2, "b"))
        else:
            if f1 == fixed.family:
                orientations.append((f2, "b"))
            if f2 == fixed.family and f1 != f2:
                orientations.append((f1, "a"))
        for u_family, u_slot, in orientations:
            u_decl = alg.family(u_family)
            fixed_slot = "b" if u_slot == "a" else "a"
            u_ivar = "i" if u_slot == "a" else "j"
            fixed_ivar = "j" if u_slot == "a" else "i"
            binding = {u_slot: u_degree, fixed_slot: fixed.degree}
            if fixed.index is not None:
                binding[fixed_ivar] = fixed.index
            for term in terms:
                if term.target != w.family:
                    continue
                hit_term = _solve_term(alg, term, binding, u_decl, u_ivar, w)
                if hit_term is None:
                    continue
                if hit_term is UNBOUNDED:
                    found.append(Unbounded(u_family, u_degree))
                else:
                    found.append(BasisSymbol(u_family, u_degree, hit_term[0]))
    # dedupe, keep deterministic order
    seen = set()
    result = []
    for item in found:
        if item not in seen:
            seen.add(item)
            result.append(item)
    cache[key] = result
    return result


UNBOUNDED = object()


def _solve_term(alg, term, binding, u_decl, u_ivar, w):
    """Match one clause term against output ``w``; returns None (no
    contribution), UNBOUNDED, or a 1-tuple with the solved index."""
    constraints = []  # (coeff_of_unknown, rest) meaning coeff*u + rest == 0
    if term.index_affine is not None:
        if w.index is None:
            return None
        ci, cj, c0 = term.index_affine
        rest = c0 - w.index
        cu = 0
        for var, c in (("i", ci), ("j", cj)):
            if not c:
                continue
            if var == u_ivar and u_decl.index_domain is not None:
                cu += c
            else:
                known = binding.get(var)
                if known is None:
                    return None  # malformed clause; treat as no contribution
                rest += c * known
        constraints.append((cu, rest))
    for guard in term.guards:
        if guard.kind != "index":
            continue
        cu = 0
        rest = guard.const
        for var, c in guard.coeffs:
            if var == u_ivar and u_decl.index_domain is not None:
                cu += c
            else:
                known = binding.get(var)
                if known is None:
                    return None
                rest += c * known
        constraints.append((cu, rest))

    solved = None
    for cu, rest in constraints:
        if cu == 0:
            if rest != 0:
                return None
        else:
            if rest % cu != 0:
                return None
            value = -rest // cu
            if solved is None:
                solved = value
            elif solved != value:
                return None

    if u_decl.index_domain is not None:
        if solved is None:
            return UNBOUNDED
        if u_decl.index_domain == "nat" and solved < 0:
            return None
        binding = dict(binding)
        binding[u_ivar] = solved

    for guard in term.guards:
        if not guard.holds(binding):
            return None
    coeff = eval_coeff(term.coeff, binding, alg.group, alg.params)
    if coeff.is_zero():
        return None
    return (solved,)


def _equation_closed(alg, x, y, w, bracket_support, gshift,
                     member_x: Callable, member_y: Callable,
                     member_out: Callable) -> bool:
    """True when the (pair, output) equation sees every contribution.

    ``member_x(u)``: is u an unknown-supported output of phi(x)?  Same
    for y.  ``member_out(z)``: does phi(z) carry an unknown at w?
    ``gshift`` None means the mixed solve (any degree possible).
    """
    w_central = alg.is_central(w)
    for z in bracket_support:
        if gshift is None:
            relevant = True
        else:
            out_deg = z.degree + gshift
            relevant = out_deg.is_zero() if w_central else w.degree == out_deg
        if relevant and not member_out(z):
            return False
    for u in _contributors(alg, w, y, "left"):
        if gshift is not None and u.degree != x.degree + gshift:
            continue
        if isinstance(u, Unbounded) or not member_x(u):
            return False
    for u in _contributors(alg, w, x, "right"):
        if gshift is not None and u.degree != y.degree + gshift:
            continue
        if isinstance(u, Unbounded) or not member_y(u):
            return False
    return True


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

@dataclass
class LinearSystem:
    """Sparse constraint system over the unknown phi coefficients.

    ``unknowns[k]`` is the (input symbol, output symbol) pair of column
    k; ``provenance[r]`` tags row r with its generating pair and matched
    output symbol."""

    unknowns: list
    rows: list
    provenance: list
    pairs_total: int = 0
    pairs_skipped: int = 0
    equations_skipped: int = 0
    nvars: int = 0


def assemble(problem: DerivationProblem) -> LinearSystem:
    alg = problem.algebra
    window = problem.window
    gshift = problem.degree
    delta = problem.delta
    nvars = alg.group.nvars

    halo = problem.halo()

    symbols = enumerate_window(alg, window)
    in_window = set(symbols)

    support = {}
    support_set = {}
    if gshift is None:
        shared = unknown_support(alg, window, None, symbols[0], halo)
        shared_set = frozenset(shared)
        for x in symbols:
            support[x] = shared
            support_set[x] = shared_set
    else:
        by_degree = {}
        for x in symbols:
            entry = by_degree.get(x.degree)
            if entry is None:
                sup = unknown_support(alg, window, gshift, x, halo)
                entry = (sup, frozenset(sup))
                by_degree[x.degree] = entry
            support[x], support_set[x] = entry

    unknowns = []
    colindex = {}
    for x in symbols:
        for u in support[x]:
            colindex[(x, u)] = len(unknowns)
            unknowns.append((x, u))

    rows = []
    provenance = []
    pairs_total = 0
    pairs_skipped = 0
    equations_skipped = 0

    # brackets against a fixed right argument, pre-scaled by -delta
    scaled_cache = {}

    def scaled_bracket(u, v):
        key = (u, v)
        hit = scaled_cache.get(key)
        if hit is None:
            hit = tuple((wsym, -(delta * c)) for wsym, c in alg.bracket(u, v))
            scaled_cache[key] = hit
        return hit

    n = len(symbols)
    for ix in range(n):
        x = symbols[ix]
        sup_x = support[x]
        for iy in range(ix + 1, n):
            y = symbols[iy]
            pairs_total += 1
            br = alg.bracket(x, y)
            bsupport = br.support()
            if any(z not in in_window for z in bsupport):
                pairs_skipped += 1
                continue
            row_terms = {}
            for z, cz in br:
                for u in support[z]:
                    col = colindex[(z, u)]
                    row = row_terms.get(u)
                    if row is None:
                        row = row_terms[u] = {}
                    cur = row.get(col)
                    row[col] = cz if cur is None else cur + cz
            for u in sup_x:
                col = colindex[(x, u)]
                for wsym, coeff in scaled_bracket(u, y):
                    row = row_terms.get(wsym)
                    if row is None:
                        row = row_terms[wsym] = {}
                    cur = row.get(col)
                    row[col] = coeff if cur is None else cur + coeff
            for v in support[y]:
                col = colindex[(y, v)]
                for wsym, coeff in scaled_bracket(x, v):
                    row = row_terms.get(wsym)
                    if row is None:
                        row = row_terms[wsym] = {}
                    cur = row.get(col)
                    row[col] = coeff if cur is None else cur + coeff

            member_x = support_set[x].__contains__
            member_y = support_set[y].__contains__

            for wsym in sorted(row_terms, key=alg.symbol_sort_key):
                row = {c: v for c, v in row_terms[wsym].items() if not v.is_zero()}
                if not row:
                    continue
                member_out = lambda z: wsym in support_set[z]
                if _equation_closed(alg, x, y, wsym, bsupport, gshift,
                                    member_x, member_y, member_out):
                    rows.append(row)
                    provenance.append((x, y, wsym))
                else:
                    equations_skipped += 1

    return LinearSystem(
        unknowns=unknowns,
        rows=rows,
        provenance=provenance,
        pairs_total=pairs_total,
        pairs_skipped=pairs_skipped,
        equations_skipped=equations_skipped,
        nvars=nvars,
    )


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------

@dataclass
class SolutionSpace:
    """Kernel of a derivation system.

    ``basis`` holds sparse coordinate vectors over the unknown columns;
    ``full_rank`` is the kernel dimension and ``interior_rank`` the rank
    after projecting onto coordinates whose input and output symbols are
    both interior.  ``solved`` is False for degrees that were reported
    trivial without assembling (no interior unknowns exist)."""

    problem: DerivationProblem
    unknowns: list
    basis: list
    full_rank: Optional[int]
    interior_rank: int
    solved: bool = True
    system: Optional[LinearSystem] = None
    stats: dict = field(default_factory=dict)

    def maps(self):
        """Basis vectors as sparse maps input symbol -> LinComb."""
        out = []
        for vec in self.basis:
            m = {}
            for col, coeff in vec.items():
                x, u = self.unknowns[col]
                m.setdefault(x, LinComb()).add_term(u, coeff)
            out.append(m)
        return out


def interior_columns(alg, window, unknowns):
    cols = []
    for k, (x, u) in enumerate(unknowns):
        if symbol_interior(alg, window, x) and symbol_interior(alg, window, u):
            cols.append(k)
    return cols


def interior_rank(space: SolutionSpace, window: Optional[Window] = None) -> int:
    """Rank of the basis projected onto interior unknown coordinates."""
    if not space.solved:
        return space.interior_rank
    window = window or space.problem.window
    alg = space.problem.algebra
    keep = set(interior_columns(alg, window, space.unknowns))
    if not keep or not space.basis:
        return 0
    projected = [{c: v for c, v in vec.items() if c in keep} for vec in space.basis]
    return linsolve.rank_of(projected, len(space.unknowns))


def interior_basis(space: SolutionSpace, window: Optional[Window] = None):
    """Canonical reduced basis of the interior projection, as sparse
    (input, output) -> Scalar maps."""
    if not space.solved or not space.basis:
        return []
    window = window or space.problem.window
    alg = space.problem.algebra
    keep = set(interior_columns(alg, window, space.unknowns))
    projected = [{c: v for c, v in vec.items() if c in keep} for vec in space.basis]
    reduced = linsolve.canonical_basis(projected, len(space.unknowns))
    out = []
    for vec in reduced:
        out.append({space.unknowns[c]: v for c, v in vec.items()})
    return out


def nullspace(system: LinearSystem, problem: DerivationProblem) -> SolutionSpace:
    """Exact kernel via the sparse fraction-free path."""
    basis = linsolve.kernel_sparse(system.rows, len(system.unknowns),
                                   nvars=system.nvars)
    space = SolutionSpace(
        problem=problem,
        unknowns=system.unknowns,
        basis=basis,
        full_rank=len(basis),
        interior_rank=0,
        system=system,
        stats={
            "unknowns": len(system.unknowns),
            "equations": len(system.rows),
            "pairs_total": system.pairs_total,
            "pairs_skipped": system.pairs_skipped,
            "equations_skipped": system.equations_skipped,
        },
    )
    space.interior_rank = interior_rank(space)
    return space


def dense_nullspace(system: LinearSystem):
    """Independent dense reference kernel (for cross-checks)."""
    return linsolve.kernel_dense(system.rows, len(system.unknowns))


def solve(problem: DerivationProblem) -> SolutionSpace:
    return nullspace(assemble(problem), problem)


def degree_has_interior_unknowns(alg, window, degree: GroupElement) -> bool:
    m = window.margin
    graded_ok = True
    for g, (lo, hi) in zip(degree, window.gbox):
        if max(lo + m, lo + m - g) > min(hi - m, hi - m - g):
            graded_ok = False
            break
    if graded_ok:
        return True
    centrals = [f for f in window.families if alg.family(f).central]
    if centrals:
        if window.degree_interior(degree):
            return True  # central input, graded interior output
        if window.degree_interior(-degree):
            return True  # graded interior input, central output
        if degree.is_zero():
            return True  # central to central
    return False


def reachable_degrees(window: Window):
    """All degree shifts representable inside the window box."""
    ranges = [range(lo - hi, hi - lo + 1) for lo, hi in window.gbox]
    return [GroupElement(c) for c in itertools.product(*ranges)]


# Worker-process state for parallel sweeps.  The algebra is shipped once
# per worker so bracket and preimage caches stay warm across its jobs.
_POOL_STATE: dict = {}


def _pool_init(alg, delta, window, index_halo, keep_systems):
    _POOL_STATE["args"] = (alg, delta, window, index_halo, keep_systems)


def _pool_solve(degree):
    alg, delta, window, index_halo, keep_systems = _POOL_STATE["args"]
    space = solve(DerivationProblem(alg, delta, degree, window,
                                    index_halo=index_halo))
    if not keep_systems:
        space.system = None  # constraint rows are heavy to ship around
    return degree, space


def solve_all_degrees(alg: AlgebraSpec, delta: Scalar, window: Window,
                      degrees: Optional[Iterable] = None,
                      processes: int = 1,
                      index_halo: Optional[int] = None,
                      keep_systems: bool = True) -> dict:
    """One homogeneous solve per reachable degree shift.

    Degrees with no interior unknown coordinates are reported trivial
    (interior rank 0) without solving.  Per-degree solves are
    independent; ``processes > 1`` fans them out and merges results in
    degree order, so reports do not depend on completion order.
    """
    if degrees is None:
        degrees = reachable_degrees(window)
    degrees = list(degrees)
    jobs = []
    results = {}
    for degree in degrees:
        if degree_has_interior_unknowns(alg, window, degree):
            jobs.append(degree)
        else:
            results[degree] = SolutionSpace(
                problem=DerivationProblem(alg, delta, degree, window,
                                          index_halo=index_halo),
                unknowns=[], basis=[], full_rank=None,
                interior_rank=0, solved=False,
            )
    if processes > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(
                max_workers=processes, initializer=_pool_init,
                initargs=(alg, delta, window, index_halo, keep_systems)) as pool:
            for degree, space in pool.map(_pool_solve, jobs):
                results[degree] = space
    else:
        _pool_init(alg, delta, window, index_halo, keep_systems)
        for job in jobs:
            degree, space = _pool_solve(job)
            results[degree] = space
    return {d: results[d] for d in sorted(results)}


# ---------------------------------------------------------------------------
# map verification
# ---------------------------------------------------------------------------

class ExactMap:
    """Total linear map given in closed form; verified by full equality."""

    def __init__(self, fn: Callable, label: str = "map"):
        self.fn = fn
        self.label = label

    def __call__(self, sym: BasisSymbol) -> LinComb:
        return self.fn(sym)


class WindowedMap:
    """Linear map tabulated on a window.

    ``values`` maps domain symbols to LinCombs supported inside
    ``output_support``; outputs beyond that set are unknown (truncated),
    and the verifier only trusts output channels that no truncated
    coefficient can reach.  ``degree`` (optional) declares the map
    homogeneous, which sharpens the trust test.
    """

    def __init__(self, alg: AlgebraSpec, values: dict,
                 output_support: Iterable, degree: Optional[GroupElement] = None,
                 label: str = "map"):
        self.alg = alg
        self.values = values
        self.output_support = frozenset(output_support)
        self.degree = degree
        self.label = label

    def __call__(self, sym: BasisSymbol):
        return self.values.get(sym)

    @classmethod
    def from_solution(cls, space: SolutionSpace, vector: dict, label: str = "basis vector"):
        """Wrap one kernel vector as a verifiable windowed map.  Inputs
        without any nonzero coefficient map to zero; the output support
        is the full unknown-supported output set of the solve."""
        alg = space.problem.algebra
        values = {}
        for col, coeff in vector.items():
            x, u = space.unknowns[col]
            values.setdefault(x, LinComb()).add_term(u, coeff)
        for x, _u in space.unknowns:
            values.setdefault(x, LinComb())
        support = set(u for _x, u in space.unknowns)
        return cls(alg, values, support, degree=space.problem.degree, label=label)


def identity_map(alg: AlgebraSpec) -> ExactMap:
    one = Scalar.one(alg.group.nvars)
    return ExactMap(lambda s: LinComb({s: one}), label="Id")


def ad_map(alg: AlgebraSpec, z) -> ExactMap:
    if isinstance(z, BasisSymbol):
        z = LinComb({z: Scalar.one(alg.group.nvars)})
    return ExactMap(lambda s: alg.bracket_lin(
        z, LinComb({s: Scalar.one(alg.group.nvars)})), label="ad")


@dataclass
class PairFailure:
    x: BasisSymbol
    y: BasisSymbol
    output: Optional[BasisSymbol]
    lhs: LinComb
    rhs: LinComb


@dataclass
class MapReport:
    checked: int = 0
    passed: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        return (f"checked {self.checked}, passed {self.passed}, "
                f"skipped {self.skipped}, failed {len(self.failures)}")


def verify_map(alg: AlgebraSpec, delta: Scalar, phi, pairs,
               max_failures: int = 10) -> MapReport:
    """Exact check of phi([x,y]) = delta([phi x, y] + [x, phi y]).

    Total maps are compared as full linear combinations.  Windowed maps
    are compared per output symbol on the channels the truncation cannot
    corrupt; pairs whose bracket leaves the domain, or with no trusted
    output channel, are counted as skipped.
    """
    report = MapReport()
    windowed = isinstance(phi, WindowedMap)
    for x, y in pairs:
        br = alg.bracket(x, y)
        if windowed:
            outcome = _verify_pair_windowed(alg, delta, phi, x, y, br, report,
                                            max_failures)
        else:
            outcome = _verify_pair_total(alg, delta, phi, x, y, br, report,
                                         max_failures)
        if outcome == "skip":
            report.skipped += 1
        else:
            report.checked += 1
            if outcome:
                report.passed += 1
    return report


def _apply_lin(phi, lc: LinComb):
    out = LinComb()
    for sym, coeff in lc:
        img = phi(sym)
        if img is None:
            return None
        for s2, c2 in img:
            out.add_term(s2, coeff * c2)
    return out


def _verify_pair_total(alg, delta, phi, x, y, br, report, max_failures) -> bool:
    lhs = _apply_lin(phi, br)
    one = Scalar.one(alg.group.nvars)
    rhs = alg.bracket_lin(phi(x), LinComb({y: one}))
    rhs = rhs + alg.bracket_lin(LinComb({x: one}), phi(y))
    rhs = rhs.scale(delta)
    if lhs == rhs:
        return True
    if len(report.failures) < max_failures:
        report.failures.append(PairFailure(x, y, None, lhs, rhs))
    return False


def _verify_pair_windowed(alg, delta, phi, x, y, br, report, max_failures):
    if phi(x) is None or phi(y) is None:
        return "skip"
    lhs = _apply_lin(phi, br)
    if lhs is None:
        return "skip"
    one = Scalar.one(alg.group.nvars)
    rhs = alg.bracket_lin(phi(x), LinComb({y: one}))
    rhs = rhs + alg.bracket_lin(LinComb({x: one}), phi(y))
    rhs = rhs.scale(delta)

    member = phi.output_support.__contains__
    bsupport = br.support()
    outputs = set(lhs.support()) | set(rhs.support())
    trusted = []
    for w in outputs:
        if _equation_closed(alg, x, y, w, bsupport, phi.degree,
                            member, member, lambda z: member(w)):
            trusted.append(w)
    if not trusted:
        return "skip"
    ok = True
    for w in sorted(trusted, key=alg.symbol_sort_key):
        a = lhs.coefficient(w)
        b = rhs.coefficient(w)
        a = a if a is not None else Scalar.zero(alg.group.nvars)
        b = b if b is not None else Scalar.zero(alg.group.nvars)
        if not (a - b).is_zero():
            ok = False
            if len(report.failures) < max_failures:
                report.failures.append(PairFailure(x, y, w, lhs, rhs))
    return ok


def window_pairs(symbols):
    """Unordered pairs of distinct window symbols, canonical order."""
    return list(itertools.combinations(symbols, 2))
