"""Quasitiling data model, symbolic encoding and the disjointness / covering predicates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import networkx as nx

from .errors import CorruptTiling
from .folner import banach_density_window
from .groups import Coords, FinSet, Group
from .rationals import RationalLike, as_rational, ceil_fraction

TileKey = tuple  # (shape index, center coords)


class Quasitiling:
    """Shapes ``S_k`` with pairwise disjoint center sets ``C(S_k)``; tiles are ``S_k c``.

    ``provenance`` maps a tile key to the ``(level, stage)`` at which the
    constructor placed it.  ``anchored`` demands that every shape contains the
    unit; trimmed tilings relax this (their anchors may fall outside the tile).
    """

    def __init__(
        self,
        group: Group,
        shapes: Sequence[FinSet],
        centers: Sequence[FinSet],
        provenance: Optional[Mapping[TileKey, tuple[int, int]]] = None,
        anchored: bool = True,
    ):
        if len(shapes) != len(centers):
            raise ValueError("one center set per shape")
        self.group = group
        self.shapes = tuple(shapes)
        self.centers = tuple(centers)
        self.provenance = dict(provenance or {})
        self.anchored = anchored
        for S in self.shapes:
            if not S:
                raise CorruptTiling("empty shape")
            if anchored and not S.contains_identity():
                raise CorruptTiling("shape does not contain the unit")
        owner: dict[Coords, int] = {}
        for k, C in enumerate(self.centers):
            for c in C.members:
                if c in owner:
                    raise CorruptTiling(f"center {c} is claimed by shapes {owner[c]} and {k}")
                owner[c] = k
        self._owner = owner
        self._tiles: Optional[dict[TileKey, frozenset]] = None
        seen: dict[frozenset, TileKey] = {}
        for key, t in self.tile_sets().items():
            if t in seen:
                raise CorruptTiling(f"tiles {seen[t]} and {key} coincide; (S, c) -> Sc is not injective")
            seen[t] = key

    @classmethod
    def empty(cls, group: Group, shapes: Sequence[FinSet] = ()) -> "Quasitiling":
        return cls(group, shapes, [FinSet(group) for _ in shapes])

    def keys(self) -> list[TileKey]:
        return sorted((k, c) for k, C in enumerate(self.centers) for c in C.members)

    def __len__(self) -> int:
        return sum(len(C) for C in self.centers)

    def tile(self, key: TileKey) -> frozenset:
        return self.tile_sets()[key]

    def tile_sets(self) -> dict[TileKey, frozenset]:
        if self._tiles is None:
            op = self.group.op
            tiles = {}
            for k, C in enumerate(self.centers):
                shape = self.shapes[k].members
                for c in C.coords():
                    tiles[(k, c)] = frozenset(op(s, c) for s in shape)
            self._tiles = tiles
        return self._tiles

    def union(self) -> frozenset:
        out: set = set()
        for t in self.tile_sets().values():
            out |= t
        return frozenset(out)

    def shape_of(self, c: Coords) -> Optional[int]:
        return self._owner.get(c)

    def restrict(self, centers_in: Iterable[Coords]) -> "Quasitiling":
        """Sub-quasitiling keeping only tiles whose center is in ``centers_in``."""
        keep = set(centers_in)
        centers = [FinSet(self.group, C.members & keep) for C in self.centers]
        prov = {key: v for key, v in self.provenance.items() if key[1] in keep}
        return Quasitiling(self.group, self.shapes, centers, prov, anchored=self.anchored)

    def union_of_shapes(self) -> FinSet:
        out: set = set()
        for S in self.shapes:
            out |= S.members
        return FinSet(self.group, out)


@dataclass
class WindowedTiling:
    """A quasitiling together with the window on which its center sets are final."""

    tiling: Quasitiling
    window: FinSet
    kind: str = "hat"
    eps: Optional[Fraction] = None
    meta: dict = field(default_factory=dict)
    _determined: Optional[frozenset] = field(default=None, repr=False)

    @property
    def group(self) -> Group:
        return self.tiling.group

    def determined_elements(self) -> frozenset:
        """Elements ``t`` whose covering tiles are all known: ``S^-1 t ⊆ window``."""
        if self._determined is None:
            group = self.group
            op, inverse = group.op, group.inverse
            S = self.tiling.union_of_shapes().members
            if not S or not self.window:
                self._determined = frozenset()
                return self._determined
            S_inv = [inverse(s) for s in S]
            W = self.window.members
            candidates = {op(s, w) for s in S for w in W}
            self._determined = frozenset(t for t in candidates if all(op(d, t) in W for d in S_inv))
        return self._determined

    def determined_translates(self, F: FinSet, candidates: Optional[FinSet] = None) -> list[Coords]:
        """Translates ``g`` (from ``candidates``, default the window) with ``Fg`` fully determined."""
        det = self.determined_elements()
        op = self.group.op
        pool = (candidates or self.window).coords()
        shape = F.members
        return [g for g in pool if all(op(f, g) in det for f in shape)]


def encode_symbolic(T: Quasitiling, window: FinSet) -> dict[Coords, Optional[int]]:
    """``g -> k`` if ``g`` is a center of shape ``k``, else ``None`` (the empty symbol)."""
    out: dict[Coords, Optional[int]] = {}
    for g in window.coords():
        owners = [k for k, C in enumerate(T.centers) if g in C.members]
        if len(owners) > 1:
            raise CorruptTiling(f"{g} is a center of shapes {owners}")
        out[g] = owners[0] if owners else None
    return out


def decode_symbolic(pattern: Mapping[Coords, Optional[int]], shapes: Sequence[FinSet],
                    group: Optional[Group] = None, anchored: bool = True) -> Quasitiling:
    if group is None:
        if not shapes:
            raise ValueError("group required when there are no shapes")
        group = shapes[0].group
    buckets: list[set] = [set() for _ in shapes]
    for g, sym in pattern.items():
        if sym is None:
            continue
        if not isinstance(sym, int) or not 0 <= sym < len(shapes):
            raise CorruptTiling(f"unknown symbol {sym!r} at {g}")
        buckets[sym].add(tuple(g))
    return Quasitiling(group, shapes, [FinSet(group, b) for b in buckets], anchored=anchored)


def is_disjoint(T: Quasitiling) -> bool:
    seen: set = set()
    for t in T.tile_sets().values():
        if not seen.isdisjoint(t):
            return False
        seen |= t
    return True


class DisjointnessWitness(dict):
    """Map ``tile key -> core T°``."""


def check_witness(T: Quasitiling, W: Mapping[TileKey, frozenset], eps: RationalLike) -> bool:
    eps = as_rational(eps)
    tiles = T.tile_sets()
    missing = [key for key in tiles if key not in W]
    if missing:
        raise ValueError(f"witness is missing tile {missing[0]}")
    used: set = set()
    for key, tile in tiles.items():
        core = frozenset(W[key])
        if not core <= tile:
            return False
        if len(core) < (1 - eps) * len(tile):
            return False
        if not used.isdisjoint(core):
            return False
        used |= core
    return True


def core_demand(size: int, eps: Fraction) -> int:
    """Least integer ``>= (1 - eps) size``."""
    return ceil_fraction((1 - eps) * size)


def eps_disjoint_flow_check(T: Quasitiling, eps: RationalLike) -> tuple[bool, Optional[DisjointnessWitness]]:
    """Decide eps-disjointness of a quasitiling exactly; see :func:`flow_check_sets`."""
    return flow_check_sets(T.tile_sets(), eps)


def flow_check_sets(tiles: Mapping, eps: RationalLike) -> tuple[bool, Optional[DisjointnessWitness]]:
    """Bipartite demand problem solved by integral max-flow, for any keyed family of finite sets.

    Source -> tile (capacity = demand), tile -> element (1), element -> sink (1).
    """
    eps = as_rational(eps)
    if not tiles:
        return True, DisjointnessWitness()
    G = nx.DiGraph()
    total = 0
    elements: set = set()
    for key, tile in tiles.items():
        d = core_demand(len(tile), eps)
        total += d
        G.add_edge("src", ("tile", key), capacity=d)
        for e in tile:
            G.add_edge(("tile", key), ("elem", e), capacity=1)
        elements |= set(tile)
    for e in elements:
        G.add_edge(("elem", e), "sink", capacity=1)
    value, flow = nx.maximum_flow(G, "src", "sink")
    if value < total:
        return False, None
    witness = DisjointnessWitness()
    for key in tiles:
        out = flow[("tile", key)]
        witness[key] = frozenset(node[1] for node, f in out.items() if f >= 1)
    return True, witness


def covering_on_window(T: Quasitiling, F: FinSet, window: FinSet) -> Fraction:
    return banach_density_window(FinSet(T.group, T.union()), F, window)
