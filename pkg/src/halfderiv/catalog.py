"""Built-in algebra catalog.

Seven families, all over a grading group G = Z^nu with evaluation into
the scalar field:

  witt       L only, [L_a, L_b] = (b - a) L_{a+b}
  virasoro   witt plus the central charge C_L
  g          deformed Heisenberg-Virasoro family with parameter lambda;
             the central branch depends on lambda (0, 1, -2 are special)
  W_hat      two-index family L_{a,i} with i in Z_+, one central C,
             index shift terms i+j and i+j+1
  W_tilde    two-index family with i in Z, shifts i+j and i+j-1, and a
             four-piece central cocycle
  HW         two families L, H with i in Z_+, no center
  HW_tilde   HW plus centrals C_L, C_LH, C_H

Each constructor returns a fresh :class:`AlgebraSpec`; rules are built
from expression trees, not parsed text, so the DSL front end can be
cross-checked against these tables.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import (
    AlgebraError,
    AlgebraSpec,
    BinOp,
    Const,
    Coord,
    DeltaGuard,
    FamilyDecl,
    Idx,
    Param,
    PowOp,
    TermRule,
    Val,
)
from .groups import GroupSpec, standard_group
from .scalars import Scalar, parse_scalar

CATALOG_NAMES = ("g", "W_hat", "W_tilde", "HW", "HW_tilde", "witt", "virasoro")


# -- small expression builders ----------------------------------------------

def _q(value) -> Const:
    return Const(Fraction(value))


def _sub(a, b) -> BinOp:
    return BinOp("-", a, b)


def _add(a, b) -> BinOp:
    return BinOp("+", a, b)


def _mul(*parts) -> object:
    expr = parts[0]
    for p in parts[1:]:
        expr = BinOp("*", expr, p)
    return expr


_VA, _VB = Val("a"), Val("b")
_II, _JJ = Idx("i"), Idx("j")

#: (a^3 - a) / 12, the Virasoro cocycle coefficient
_VIR_COCYCLE = _mul(_q("1/12"), _sub(PowOp(_VA, 3), _VA))

_G_AB = (DeltaGuard("group", (("a", 1), ("b", 1))),)          # a + b = 0
_G_IJ = DeltaGuard("index", (("i", 1), ("j", 1)), 0)           # i + j = 0


def _g_ij(offset: int) -> DeltaGuard:
    """Guard i + j = offset."""
    return DeltaGuard("index", (("i", 1), ("j", 1)), -offset)


def _witt_term(index_affine=None) -> TermRule:
    return TermRule("L", index_affine, (), _sub(_VB, _VA))


# -- constructors ------------------------------------------------------------

def _build_witt(group: GroupSpec) -> AlgebraSpec:
    return AlgebraSpec(
        name="witt",
        group=group,
        families=(FamilyDecl("L"),),
        rules={("L", "L"): (_witt_term(),)},
    )


def _build_virasoro(group: GroupSpec) -> AlgebraSpec:
    return AlgebraSpec(
        name="virasoro",
        group=group,
        families=(FamilyDecl("L"), FamilyDecl("C_L", central=True)),
        rules={("L", "L"): (
            _witt_term(),
            TermRule("C_L", None, _G_AB, _VIR_COCYCLE),
        )},
    )


def _build_g(group: GroupSpec, lam: Scalar) -> AlgebraSpec:
    """Deformed Heisenberg-Virasoro algebra with deformation lambda.

    The family list follows the central branch: lambda = 0 adds C_I and
    C_LI0, lambda = 1 adds C_LI1, lambda = -2 adds C_LI2..C_LInu (empty
    at rank 1).  All other lambda keep just C_L.
    """
    families = [FamilyDecl("L"), FamilyDecl("I"), FamilyDecl("C_L", central=True)]
    ll_terms = [_witt_term(), TermRule("C_L", None, _G_AB, _VIR_COCYCLE)]
    li_coeff = _sub(_VB, _mul(Param("lambda"), _VA))
    li_terms = [TermRule("I", None, (), li_coeff)]
    ii_terms = []

    if lam == 0:
        families += [FamilyDecl("C_I", central=True), FamilyDecl("C_LI0", central=True)]
        li_terms.append(TermRule("C_LI0", None, _G_AB, _add(PowOp(_VA, 2), _VA)))
        ii_terms.append(TermRule("C_I", None, _G_AB, _VA))
    elif lam == 1:
        families.append(FamilyDecl("C_LI1", central=True))
        li_terms.append(TermRule("C_LI1", None, _G_AB, _VIR_COCYCLE))
    elif lam == -2:
        for i in range(2, group.rank + 1):
            families.append(FamilyDecl(f"C_LI{i}", central=True))
            li_terms.append(TermRule(f"C_LI{i}", None, _G_AB, Coord("a", i)))

    rules = {("L", "L"): tuple(ll_terms), ("L", "I"): tuple(li_terms)}
    if ii_terms:
        rules[("I", "I")] = tuple(ii_terms)
    return AlgebraSpec(
        name="g",
        group=group,
        families=tuple(families),
        rules=rules,
        params={"lambda": lam},
    )


def _build_w_hat(group: GroupSpec) -> AlgebraSpec:
    return AlgebraSpec(
        name="W_hat",
        group=group,
        families=(FamilyDecl("L", index_domain="nat"), FamilyDecl("C", central=True)),
        rules={("L", "L"): (
            _witt_term((1, 1, 0)),
            TermRule("L", (1, 1, 1), (), _sub(_JJ, _II)),
            TermRule("C", None, _G_AB + (_G_IJ,), _VIR_COCYCLE),
        )},
    )


def _build_w_tilde(group: GroupSpec) -> AlgebraSpec:
    cocycle = (
        TermRule("C", None, _G_AB + (_g_ij(-1),), PowOp(_VA, 3)),
        TermRule("C", None, _G_AB + (_g_ij(0),), _mul(_q(3), _II, PowOp(_VA, 2))),
        TermRule("C", None, _G_AB + (_g_ij(1),),
                 _mul(_q(3), _II, _sub(_II, _q(1)), _VA)),
        TermRule("C", None, _G_AB + (_g_ij(2),),
                 _mul(_II, _sub(_II, _q(1)), _sub(_II, _q(2)))),
    )
    return AlgebraSpec(
        name="W_tilde",
        group=group,
        families=(FamilyDecl("L", index_domain="int"), FamilyDecl("C", central=True)),
        rules={("L", "L"): (
            _witt_term((1, 1, 0)),
            TermRule("L", (1, 1, -1), (), _sub(_JJ, _II)),
        ) + cocycle},
    )


def _hw_base_rules() -> dict:
    return {
        ("L", "L"): (
            _witt_term((1, 1, 0)),
            TermRule("L", (1, 1, -1), (), _sub(_JJ, _II)),
        ),
        ("L", "H"): (
            TermRule("H", (1, 1, 0), (), _VB),
            TermRule("H", (1, 1, -1), (), _JJ),
        ),
    }


def _build_hw(group: GroupSpec) -> AlgebraSpec:
    return AlgebraSpec(
        name="HW",
        group=group,
        families=(FamilyDecl("L", index_domain="nat"), FamilyDecl("H", index_domain="nat")),
        rules=_hw_base_rules(),
    )


def _build_hw_tilde(group: GroupSpec) -> AlgebraSpec:
    rules = _hw_base_rules()
    rules[("L", "L")] += (TermRule("C_L", None, _G_AB + (_G_IJ,), _VIR_COCYCLE),)
    rules[("L", "H")] += (
        TermRule("C_LH", None, _G_AB + (_G_IJ,), _sub(PowOp(_VA, 2), _VA)),
    )
    rules[("H", "H")] = (TermRule("C_H", None, _G_AB + (_G_IJ,), _VA),)
    return AlgebraSpec(
        name="HW_tilde",
        group=group,
        families=(
            FamilyDecl("L", index_domain="nat"),
            FamilyDecl("H", index_domain="nat"),
            FamilyDecl("C_L", central=True),
            FamilyDecl("C_LH", central=True),
            FamilyDecl("C_H", central=True),
        ),
        rules=rules,
    )


# -- public entry points ------------------------------------------------------

def catalog(name: str, lam=None, rank: int = 1, generators=None) -> AlgebraSpec:
    """Instantiate a catalog algebra.

    ``lam`` (only for ``g``) may be an int, Fraction, Scalar or textual
    scalar.  ``rank`` and ``generators`` fix the grading group; defaults
    give G = Z with generator value 1.
    """
    if name not in CATALOG_NAMES:
        raise AlgebraError(
            f"unknown catalog algebra {name!r}; available: {', '.join(CATALOG_NAMES)}"
        )
    group = standard_group(rank, generators)
    if name == "g":
        if lam is None:
            raise AlgebraError("algebra g needs the deformation parameter lambda")
        if not isinstance(lam, Scalar):
            if isinstance(lam, str):
                lam = parse_scalar(lam, group.nvars)
            else:
                lam = Scalar.from_rational(lam, group.nvars)
        return _build_g(group, lam)
    if lam is not None:
        raise AlgebraError(f"algebra {name} takes no lambda parameter")
    builder = {
        "witt": _build_witt,
        "virasoro": _build_virasoro,
        "W_hat": _build_w_hat,
        "W_tilde": _build_w_tilde,
        "HW": _build_hw,
        "HW_tilde": _build_hw_tilde,
    }[name]
    return builder(group)


def delta_trivial(alg: AlgebraSpec):
    """Whether every half-derivation of the algebra is a multiple of Id.

    Returns True/False for catalog algebras and None when unknown (user
    defined algebras).  Used by reports to flag algebras whose transposed
    Poisson structures are forced to be trivial.
    """
    if alg.name in ("witt", "virasoro", "W_tilde", "HW_tilde"):
        return True
    if alg.name in ("W_hat", "HW"):
        return False
    if alg.name == "g":
        lam = alg.params.get("lambda")
        if lam is None:
            return None
        return not (lam == 1 or lam == -1)
    return None


def catalog_summary() -> list:
    """Static listing for the CLI: names, parameters, family overview."""
    return [
        {"name": "g", "params": "lambda (rational or e-symbolic), rank",
         "families": "L, I, C_L and lambda-dependent extra centrals"},
        {"name": "W_hat", "params": "rank",
         "families": "L (index in Z+), C"},
        {"name": "W_tilde", "params": "rank",
         "families": "L (index in Z), C"},
        {"name": "HW", "params": "rank",
         "families": "L, H (indices in Z+)"},
        {"name": "HW_tilde", "params": "rank",
         "families": "L, H (indices in Z+), C_L, C_LH, C_H"},
        {"name": "witt", "params": "rank", "families": "L"},
        {"name": "virasoro", "params": "rank", "families": "L, C_L"},
    ]
