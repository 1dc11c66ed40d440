"""Exact arithmetic in Z, Z^2 and the discrete Heisenberg group, plus finite-set algebra.

Elements are stored as integer coordinate tuples in normal form.  Every
algorithm downstream works on these raw tuples for speed; :class:`GroupElement`
and :class:`FinSet` are the typed public wrappers.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Sequence, Tuple, Union

from .errors import TagMismatch

Coords = Tuple[int, ...]


class Group:
    """A finitely generated group with integer normal forms."""

    tag: str = ""
    rank: int = 0
    abelian: bool = True

    @property
    def identity_coords(self) -> Coords:
        return (0,) * self.rank

    def op(self, a: Coords, b: Coords) -> Coords:
        raise NotImplementedError

    def inverse(self, a: Coords) -> Coords:
        raise NotImplementedError

    def box_coords(self, n: int) -> list[Coords]:
        raise NotImplementedError

    def translates(self, D: Sequence[Coords], c: Coords) -> list[Coords]:
        """``[d c for d in D]``, batched because it dominates the constructor's cost."""
        op = self.op
        return [op(d, c) for d in D]

    def element(self, *coords: int) -> "GroupElement":
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        if len(coords) != self.rank:
            raise ValueError(f"{self.tag} elements have {self.rank} coordinates, got {coords!r}")
        return GroupElement(self, tuple(int(c) for c in coords))

    def identity(self) -> "GroupElement":
        return GroupElement(self, self.identity_coords)

    def __repr__(self) -> str:
        return self.tag

    def __reduce__(self):
        return (get_group, (self.tag,))


def _add1(a: Coords, b: Coords) -> Coords:
    return (a[0] + b[0],)


def _add2(a: Coords, b: Coords) -> Coords:
    return (a[0] + b[0], a[1] + b[1])


def _addn(a: Coords, b: Coords) -> Coords:
    return tuple(x + y for x, y in zip(a, b))


class IntegerLattice(Group):
    def __init__(self, rank: int, tag: str):
        self.rank = rank
        self.tag = tag
        # Hot path: the constructor calls op millions of times.
        self.op = {1: _add1, 2: _add2}.get(rank, _addn)

    def inverse(self, a: Coords) -> Coords:
        return tuple(-x for x in a)

    def translates(self, D: Sequence[Coords], c: Coords) -> list[Coords]:
        if self.rank == 2:
            x, y = c
            return [(a + x, b + y) for a, b in D]
        if self.rank == 1:
            x = c[0]
            return [(a + x,) for (a,) in D]
        return [_addn(d, c) for d in D]

    def box_coords(self, n: int) -> list[Coords]:
        side = range(-n, n + 1)
        return [tuple(p) for p in product(side, repeat=self.rank)]


class HeisenbergGroup(Group):
    """Upper unitriangular integer 3x3 matrices in coordinates (a, b, c).

    ``(a, b, c)(a', b', c') = (a + a', b + b', c + c' + a b')``.
    """

    tag = "Heisenberg"
    rank = 3
    abelian = False

    def op(self, a: Coords, b: Coords) -> Coords:
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inverse(self, a: Coords) -> Coords:
        return (-a[0], -a[1], -a[2] + a[0] * a[1])

    def translates(self, D: Sequence[Coords], c: Coords) -> list[Coords]:
        x, y, z = c
        return [(a + x, b + y, w + z + a * y) for a, b, w in D]

    def raw_box_coords(self, n: int) -> list[Coords]:
        """The anisotropic box ``|a|, |b| <= n, |c| <= n^2`` (not inverse-closed)."""
        ab = range(-n, n + 1)
        cs = range(-n * n, n * n + 1)
        return [(a, b, c) for a in ab for b in ab for c in cs]

    def box_coords(self, n: int) -> list[Coords]:
        # The raw box is not closed under inversion; close it so Følner sets are symmetric.
        raw = self.raw_box_coords(n)
        return sorted(set(raw) | {self.inverse(g) for g in raw})


Z = IntegerLattice(1, "Z")
Z2 = IntegerLattice(2, "Z2")
HEISENBERG = HeisenbergGroup()

GROUPS = {"Z": Z, "Z2": Z2, "Heisenberg": HEISENBERG}


def get_group(tag: str) -> Group:
    try:
        return GROUPS[tag]
    except KeyError:
        raise ValueError(f"unknown group tag {tag!r}; expected one of {sorted(GROUPS)}") from None


class GroupElement:
    __slots__ = ("group", "coords")

    def __init__(self, group: Group, coords: Coords):
        self.group = group
        self.coords = coords

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return mul(self, other)

    def inverse(self) -> "GroupElement":
        return inv(self)

    def is_identity(self) -> bool:
        return self.coords == self.group.identity_coords

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group is other.group and self.coords == other.coords

    def __hash__(self) -> int:
        return hash((self.group.tag, self.coords))

    def __lt__(self, other: "GroupElement") -> bool:
        _check_same(self.group, other.group)
        return self.coords < other.coords

    def __repr__(self) -> str:
        return f"{self.group.tag}{self.coords}"


def _check_same(g1: Group, g2: Group) -> None:
    if g1 is not g2:
        raise TagMismatch(f"group tag mismatch: {g1.tag} vs {g2.tag}")


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    _check_same(a.group, b.group)
    return GroupElement(a.group, a.group.op(a.coords, b.coords))


def inv(a: GroupElement) -> GroupElement:
    return GroupElement(a.group, a.group.inverse(a.coords))


ElementLike = Union[GroupElement, Sequence[int]]


def as_coords(group: Group, g: ElementLike) -> Coords:
    """Accept either a :class:`GroupElement` or a raw coordinate sequence."""
    if isinstance(g, GroupElement):
        _check_same(group, g.group)
        return g.coords
    coords = tuple(g)
    if len(coords) != group.rank:
        raise ValueError(f"{group.tag} elements have {group.rank} coordinates, got {coords!r}")
    return coords


class FinSet:
    """Immutable finite subset of a group, iterated in lexicographic coordinate order."""

    __slots__ = ("group", "members", "_sorted")

    def __init__(self, group: Group, coords: Iterable[Coords] = ()):
        self.group = group
        self.members = coords if isinstance(coords, frozenset) else frozenset(coords)
        self._sorted = None

    @classmethod
    def of(cls, group: Group, *elements: ElementLike) -> "FinSet":
        return cls(group, (as_coords(group, e) for e in elements))

    @classmethod
    def from_elements(cls, elements: Iterable[GroupElement], group: Group | None = None) -> "FinSet":
        elements = list(elements)
        if group is None:
            if not elements:
                raise ValueError("group required for an empty FinSet")
            group = elements[0].group
        return cls(group, (as_coords(group, e) for e in elements))

    def coords(self) -> tuple[Coords, ...]:
        if self._sorted is None:
            self._sorted = tuple(sorted(self.members))
        return self._sorted

    def elements(self) -> list[GroupElement]:
        return [GroupElement(self.group, c) for c in self.coords()]

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements())

    def __len__(self) -> int:
        return len(self.members)

    def __bool__(self) -> bool:
        return bool(self.members)

    def __contains__(self, g) -> bool:
        if isinstance(g, GroupElement):
            return g.group is self.group and g.coords in self.members
        return tuple(g) in self.members

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinSet):
            return NotImplemented
        return self.group is other.group and self.members == other.members

    def __hash__(self) -> int:
        return hash((self.group.tag, self.members))

    def __repr__(self) -> str:
        body = ", ".join(str(c) for c in self.coords()[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"FinSet[{self.group.tag}]({{{body}{more}}}, n={len(self)})"

    def _binary(self, other: "FinSet") -> None:
        _check_same(self.group, other.group)

    def __or__(self, other: "FinSet") -> "FinSet":
        self._binary(other)
        return FinSet(self.group, self.members | other.members)

    def __and__(self, other: "FinSet") -> "FinSet":
        self._binary(other)
        return FinSet(self.group, self.members & other.members)

    def __sub__(self, other: "FinSet") -> "FinSet":
        self._binary(other)
        return FinSet(self.group, self.members - other.members)

    def __xor__(self, other: "FinSet") -> "FinSet":
        return set_symdiff(self, other)

    def issubset(self, other: "FinSet") -> bool:
        self._binary(other)
        return self.members <= other.members

    def inverse(self) -> "FinSet":
        return FinSet(self.group, (self.group.inverse(c) for c in self.members))

    def right_translate(self, g: ElementLike) -> "FinSet":
        """``F g``."""
        gc = as_coords(self.group, g)
        op = self.group.op
        return FinSet(self.group, (op(f, gc) for f in self.members))

    def left_translate(self, g: ElementLike) -> "FinSet":
        """``g F``."""
        gc = as_coords(self.group, g)
        op = self.group.op
        return FinSet(self.group, (op(gc, f) for f in self.members))

    def contains_identity(self) -> bool:
        return self.group.identity_coords in self.members

    def is_symmetric(self) -> bool:
        inverse = self.group.inverse
        return all(inverse(c) in self.members for c in self.members)


def set_product(K: FinSet, T: FinSet) -> FinSet:
    """``KT = {gh : g in K, h in T}``."""
    _check_same(K.group, T.group)
    op = K.group.op
    return FinSet(K.group, {op(k, t) for k in K.members for t in T.members})


def set_symdiff(A: FinSet, B: FinSet) -> FinSet:
    _check_same(A.group, B.group)
    return FinSet(A.group, A.members ^ B.members)


@lru_cache(maxsize=256)
def box(group: Group, n: int) -> FinSet:
    """Symmetric Følner box of radius ``n`` containing the identity.

    Intervals ``[-n, n]`` in Z, squares in Z^2, and for the Heisenberg group the
    anisotropic box ``|a|, |b| <= n, |c| <= n^2`` closed under inversion.
    """
    if n < 0:
        raise ValueError("box radius must be non-negative")
    return FinSet(group, group.box_coords(n))


def product_coords(group: Group, K: Iterable[Coords], T: Iterable[Coords]) -> set[Coords]:
    op = group.op
    T = list(T)
    return {op(k, t) for k in K for t in T}
