"""Grading group arithmetic.

The grading group is modelled as the free abelian group Z^nu together
with an evaluation homomorphism into the scalar field: the element with
coordinates ``(a1, ..., anu)`` evaluates to ``a1*g1 + ... + anu*gnu``
where ``g1 = 1`` and the remaining generator values are either formal
symbols ``e2 .. eN`` or user supplied rationals.

Kronecker deltas in bracket rules always compare *coordinates*, never
evaluated values; see :class:`GroupSpec` for why the two can differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .scalars import Scalar, ScalarParseError, format_scalar, parse_scalar


class GroupElement(tuple):
    """Coordinate vector in Z^nu.  Addition is componentwise."""

    def __new__(cls, coords):
        coords = tuple(coords)
        for c in coords:
            if not isinstance(c, int):
                raise TypeError(f"group coordinates must be integers, got {c!r}")
        if not coords:
            raise ValueError("group elements need at least one coordinate")
        return super().__new__(cls, coords)

    @property
    def rank(self) -> int:
        return len(self)

    def __add__(self, other):
        self._match(other)
        return GroupElement(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        self._match(other)
        return GroupElement(a - b for a, b in zip(self, other))

    def __neg__(self):
        return GroupElement(-a for a in self)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self)

    def coordinate(self, i: int) -> int:
        """1-based coordinate access."""
        if not 1 <= i <= len(self):
            raise IndexError(f"coordinate {i} out of range 1..{len(self)}")
        return self[i - 1]

    def _match(self, other):
        if not isinstance(other, GroupElement):
            raise TypeError(f"expected a GroupElement, got {other!r}")
        if len(self) != len(other):
            raise ValueError(f"rank mismatch: {len(self)} vs {len(other)}")

    def __repr__(self):
        return f"GroupElement{tuple(self)!r}"


def zero_element(rank: int) -> GroupElement:
    return GroupElement((0,) * rank)


def format_element(a: GroupElement) -> str:
    return "(" + ",".join(str(c) for c in a) + ")"


def parse_element(text: str, rank: int | None = None) -> GroupElement:
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    try:
        coords = tuple(int(part) for part in body.split(","))
    except ValueError as exc:
        raise ValueError(f"bad group element {text!r}") from exc
    a = GroupElement(coords)
    if rank is not None and a.rank != rank:
        raise ValueError(f"group element {text!r} has rank {a.rank}, expected {rank}")
    return a


@dataclass(frozen=True)
class GroupSpec:
    """Rank plus the generator values used by the evaluation map.

    ``generator_values[0]`` is always 1.  Later entries default to the
    formal symbols ``e2 .. eN`` but may be replaced with rationals, in
    which case distinct coordinates can evaluate to equal scalars.  Delta
    guards still see them as different elements, which is the faithful
    model of a free grading group.
    """

    rank: int
    generator_values: tuple

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("group rank must be at least 1")
        if len(self.generator_values) != self.rank:
            raise ValueError("need one generator value per coordinate")
        first = self.generator_values[0]
        if not (isinstance(first, Scalar) and first == 1):
            raise ValueError("the first generator value must be 1")
        object.__setattr__(self, "_value_cache", {})

    def __getstate__(self):
        return (self.rank, self.generator_values)

    def __setstate__(self, state):
        object.__setattr__(self, "rank", state[0])
        object.__setattr__(self, "generator_values", state[1])
        object.__setattr__(self, "_value_cache", {})

    @property
    def nvars(self) -> int:
        return self.generator_values[0].nvars

    def zero(self) -> GroupElement:
        return zero_element(self.rank)

    def value(self, a: GroupElement) -> Scalar:
        """Evaluation homomorphism Z^nu -> Q(e2, ..., eN)."""
        cached = self._value_cache.get(a)
        if cached is not None:
            return cached
        if a.rank != self.rank:
            raise ValueError(f"element rank {a.rank} does not match group rank {self.rank}")
        total = Scalar.zero(self.nvars)
        for coord, gen in zip(a, self.generator_values):
            if coord:
                total = total + gen * coord
        self._value_cache[a] = total
        return total

    def describe(self) -> list:
        return [format_scalar(g) for g in self.generator_values]


def standard_group(rank: int = 1, generator_texts: list | None = None) -> GroupSpec:
    """Build a :class:`GroupSpec`.

    Without ``generator_texts`` the generators are ``1, e2, ..., eN``
    formal.  Texts are parsed in the field with ``rank - 1`` formal
    generators, so rationals and formal symbols can be mixed.
    """
    nvars = rank - 1
    if generator_texts is None:
        gens = [Scalar.one(nvars)]
        gens += [Scalar.generator(k, nvars) for k in range(nvars)]
    else:
        if len(generator_texts) != rank:
            raise ValueError(f"need {rank} generator values, got {len(generator_texts)}")
        gens = []
        for text in generator_texts:
            if isinstance(text, Scalar):
                gens.append(text)
            elif isinstance(text, (int, Fraction)):
                gens.append(Scalar.from_rational(text, nvars))
            else:
                try:
                    gens.append(parse_scalar(str(text), nvars))
                except ScalarParseError as exc:
                    raise ValueError(f"bad generator value {text!r}: {exc}") from exc
    return GroupSpec(rank=rank, generator_values=tuple(gens))
