"""Shift-space points as lazy memoized symbol oracles, cylinder sets and separated covers."""

from __future__ import annotations

import json
import math
import threading
from array import array
from typing import Callable, Mapping, Optional, Sequence

from .errors import SeparationFailure
from .groups import Coords, ElementLike, FinSet, Group, as_coords, box, get_group

Symbol = str

_MASK = (1 << 64) - 1


def _splitmix(h: int) -> int:
    h = (h + 0x9E3779B97F4A7C15) & _MASK
    h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & _MASK
    return h ^ (h >> 31)


def _hash_coords(seed: int, coords: Coords) -> int:
    h = _splitmix(seed & _MASK)
    for c in coords:
        h = _splitmix(h ^ (c & _MASK))
    return h


class ShiftPoint:
    """A point ``x`` of ``Λ^G`` evaluated lazily.

    The symbol source is an explicit partial assignment layered over either a
    seeded pseudo-random generator or a default symbol.  Every evaluated
    position is memoized and the memo keys are the recorded query support.
    """

    def __init__(
        self,
        group: Group,
        alphabet: Sequence[Symbol],
        *,
        assignments: Optional[Mapping[Coords, Symbol]] = None,
        default: Optional[Symbol] = None,
        seed: Optional[int] = None,
        _source: Optional[Callable[[Coords], Symbol]] = None,
    ):
        alphabet = tuple(str(a) for a in alphabet)
        if not alphabet or len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet must be a non-empty list of distinct symbols")
        self.group = group
        self.alphabet = alphabet
        self.default = None if default is None else str(default)
        self.seed = seed
        self.assignments = {tuple(int(v) for v in k): str(s) for k, s in (assignments or {}).items()}
        symbols = set(alphabet)
        for c, s in self.assignments.items():
            if s not in symbols:
                raise ValueError(f"assigned symbol {s!r} at {c} is not in the alphabet")
            if len(c) != group.rank:
                raise ValueError(f"bad coordinates {c} for {group.tag}")
        if self.default is not None and self.default not in symbols:
            raise ValueError(f"default symbol {self.default!r} is not in the alphabet")
        if _source is None:
            if seed is not None:
                _source = self._seeded
            elif self.default is not None:
                default_symbol = self.default
                _source = lambda c: default_symbol  # noqa: E731
            else:
                raise ValueError("a point needs a generator seed or a default symbol")
        self._source = _source
        self._memo: dict[Coords, Symbol] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_pattern(cls, group: Group, alphabet, assignments, default) -> "ShiftPoint":
        return cls(group, alphabet, assignments=assignments, default=default)

    @classmethod
    def from_seed(cls, group: Group, alphabet, seed: int) -> "ShiftPoint":
        return cls(group, alphabet, seed=seed)

    def _seeded(self, c: Coords) -> Symbol:
        return self.alphabet[_hash_coords(self.seed, c) % len(self.alphabet)]

    def eval_coords(self, c: Coords) -> Symbol:
        memo = self._memo
        s = memo.get(c)
        if s is None:
            s = self.assignments.get(c)
            if s is None:
                s = self._source(c)
            with self._lock:
                s = memo.setdefault(c, s)
        return s

    def eval_many(self, cs: Sequence[Coords]) -> list:
        get = self._memo.get
        out = [get(c) for c in cs]
        if None in out:
            out = [s if s is not None else self.eval_coords(c) for s, c in zip(out, cs)]
        return out

    def support(self) -> FinSet:
        with self._lock:
            return FinSet(self.group, frozenset(self._memo))

    def support_size(self) -> int:
        return len(self._memo)

    def fresh(self) -> "ShiftPoint":
        """Same symbols, empty memo and support."""
        return ShiftPoint(
            self.group, self.alphabet, assignments=self.assignments,
            default=self.default, seed=self.seed, _source=self._source_for_copy(),
        )

    def _source_for_copy(self):
        if self._source == self._seeded:
            return None
        return self._source

    def with_assignments(self, changes: Mapping[Coords, Symbol]) -> "ShiftPoint":
        """A fresh point equal to this one except at the given positions."""
        merged = dict(self.assignments)
        merged.update({tuple(k): str(v) for k, v in changes.items()})
        return ShiftPoint(
            self.group, self.alphabet, assignments=merged,
            default=self.default, seed=self.seed, _source=self._source_for_copy(),
        )

    def shifted(self, g: ElementLike) -> "ShiftPoint":
        """The point ``gx`` with ``(gx)(h) = x(hg)``, sharing this point's memo."""
        gc = as_coords(self.group, g)
        op = self.group.op
        base = self
        view = ShiftPoint(
            self.group, self.alphabet, default=self.default,
            _source=lambda h: base.eval_coords(op(h, gc)),
        )
        return view

    def describe(self) -> dict:
        return {
            "format": "shift-point/1",
            "group": self.group.tag,
            "alphabet": list(self.alphabet),
            "default": self.default,
            "seed": self.seed,
            "assignments": [[list(c), s] for c, s in sorted(self.assignments.items())],
        }

    def __repr__(self) -> str:
        src = f"seed={self.seed}" if self.seed is not None else f"default={self.default!r}"
        return f"ShiftPoint({self.group.tag}, {src}, {len(self.assignments)} assignments)"


def eval_point(x: ShiftPoint, g: ElementLike) -> Symbol:
    return x.eval_coords(as_coords(x.group, g))


def shift_eval(x: ShiftPoint, g: ElementLike, h: ElementLike) -> Symbol:
    """``(gx)(h) = x(hg)``."""
    op = x.group.op
    return x.eval_coords(op(as_coords(x.group, h), as_coords(x.group, g)))


def load_point(path) -> ShiftPoint:
    with open(path, encoding="utf-8") as fh:
        return point_from_description(json.load(fh))


def point_from_description(desc: dict) -> ShiftPoint:
    if desc.get("format") != "shift-point/1":
        raise ValueError(f"unsupported point format {desc.get('format')!r}")
    group = get_group(desc["group"])
    assignments = {tuple(c): s for c, s in desc.get("assignments", [])}
    return ShiftPoint(
        group, desc["alphabet"], assignments=assignments,
        default=desc.get("default"), seed=desc.get("seed"),
    )


def save_point(x: ShiftPoint, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(x.describe(), fh, indent=1, sort_keys=True)
        fh.write("\n")


class CylinderSpec:
    """The cylinder ``{y : y(v) = p(v) for v in V}``; ``pattern`` follows ``window.coords()``."""

    __slots__ = ("window", "pattern")

    def __init__(self, window: FinSet, pattern: Sequence[Symbol]):
        pattern = tuple(pattern)
        if not window:
            raise ValueError("cylinder window must be non-empty")
        if len(pattern) != len(window):
            raise ValueError("pattern must be total on the window")
        self.window = window
        self.pattern = pattern

    def mapping(self) -> dict[Coords, Symbol]:
        return dict(zip(self.window.coords(), self.pattern))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CylinderSpec):
            return NotImplemented
        return self.window == other.window and self.pattern == other.pattern

    def __hash__(self) -> int:
        return hash((self.window, self.pattern))

    def __repr__(self) -> str:
        return f"CylinderSpec(|V|={len(self.window)}, {''.join(self.pattern[:16])}...)"


def in_cylinder(x: ShiftPoint, U: CylinderSpec, g: ElementLike) -> bool:
    """Whether ``gx`` lies in ``U``, i.e. ``x(vg) = p(v)`` for all ``v in V``."""
    gc = as_coords(x.group, g)
    op = x.group.op
    return all(x.eval_coords(op(v, gc)) == s for v, s in zip(U.window.coords(), U.pattern))


def translate_constraints(U: CylinderSpec, g: ElementLike) -> dict[Coords, Symbol]:
    """Constraints defining ``g(U)``: ``z(v g^-1) = p(v)``."""
    group = U.window.group
    ginv = group.inverse(as_coords(group, g))
    return {group.op(v, ginv): s for v, s in zip(U.window.coords(), U.pattern)}


def _shift_pairs(group: Group, V: FinSet, shifts: Sequence[Coords]) -> list[list[tuple[int, int]]]:
    index = {v: i for i, v in enumerate(V.coords())}
    op = group.op
    pairs = []
    for s in shifts:
        plist = []
        for i, v in enumerate(V.coords()):
            j = index.get(op(v, s))
            if j is not None:
                plist.append((i, j))
        pairs.append(plist)
    return pairs


def _separating_shifts(F: FinSet) -> tuple[Coords, ...]:
    group = F.group
    e = group.identity_coords
    inverse, op = group.inverse, group.op
    shifts = {op(inverse(g), h) for g in F.members for h in F.members}
    shifts.discard(e)
    return tuple(sorted(shifts))


def _witnesses(pattern, pairs) -> tuple[Optional[array], Optional[int]]:
    typecode = "H" if len(pattern) < 65536 else "I"
    out = array(typecode, bytes(array(typecode).itemsize * len(pairs)))
    for si, plist in enumerate(pairs):
        for a, b in plist:
            if pattern[a] != pattern[b]:
                out[si] = a
                break
        else:
            return None, si
    return out, None


class SeparatedCover:
    """Ordered cylinders ``U_1, ..., U_m`` on a common window, each ``F̃``-separated.

    For each cylinder ``U`` and each shift ``s = g^-1 g'`` (``g != g'`` in
    ``F̃``) a witness ``v in V`` with ``vs in V`` and ``p(v) != p(vs)`` is
    stored; it certifies that ``g(U)`` and ``g'(U)`` demand different symbols
    at position ``v g^-1``, hence are disjoint.
    """

    def __init__(self, window: FinSet, patterns: Sequence[tuple], separating: FinSet,
                 witnesses: Sequence[array], radius: Optional[int] = None):
        self.window = window
        self.separating = separating
        self.radius = radius
        self.group = window.group
        self.shifts = _separating_shifts(separating)
        self._shift_index = {s: i for i, s in enumerate(self.shifts)}
        self._patterns = [tuple(p) for p in patterns]
        self._witnesses = list(witnesses)
        self._index = {p: i + 1 for i, p in enumerate(self._patterns)}
        if len(self._index) != len(self._patterns):
            raise ValueError("duplicate cylinder in cover")
        self._vcoords = window.coords()
        width = max(2, len({s for p in self._patterns for s in p}))
        needed = 2 * math.ceil(math.log(len(self._patterns) + 1, width)) + 8
        self._prefix_len = min(len(self._vcoords), needed)
        self._prefixes = {p[: self._prefix_len] for p in self._patterns}

    @property
    def m(self) -> int:
        return len(self._patterns)

    def __len__(self) -> int:
        return self.m

    @property
    def cylinders(self) -> list[CylinderSpec]:
        return [CylinderSpec(self.window, p) for p in self._patterns]

    def cylinder(self, i: int) -> CylinderSpec:
        """``U_i`` with 1-based ``i``."""
        return CylinderSpec(self.window, self._patterns[i - 1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeparatedCover):
            return NotImplemented
        return (self.window == other.window and self.separating == other.separating
                and self._patterns == other._patterns)

    def __hash__(self) -> int:
        return hash((self.window, self.separating, tuple(self._patterns)))

    def stage_of(self, x: ShiftPoint, g: Coords) -> Optional[int]:
        """Index ``i`` with ``gx in U_i``, or ``None`` when ``gx`` lies in no cylinder."""
        vc = self._vcoords
        L = self._prefix_len
        head = tuple(x.eval_many(self.group.translates(vc[:L], g)))
        if head not in self._prefixes:
            return None
        if L == len(vc):
            return self._index.get(head)
        return self._index.get(head + tuple(x.eval_many(self.group.translates(vc[L:], g))))

    def certificate(self, i: int, g: ElementLike, g2: ElementLike) -> tuple[Coords, Symbol, Symbol]:
        """Conflict position and demanded symbols proving ``g(U_i) ∩ g2(U_i) = ∅``."""
        group = self.group
        gc, g2c = as_coords(group, g), as_coords(group, g2)
        if gc == g2c:
            raise ValueError("certificates are for distinct translates")
        s = group.op(group.inverse(gc), g2c)
        try:
            si = self._shift_index[s]
        except KeyError:
            raise ValueError(f"pair {gc}, {g2c} is not inside the separating set") from None
        pattern = self._patterns[i - 1]
        a = self._witnesses[i - 1][si]
        v = self._vcoords[a]
        vs = group.op(v, s)
        b = self._vcoords.index(vs)
        return group.op(v, group.inverse(gc)), pattern[a], pattern[b]

    def is_separated_for(self, subset: FinSet) -> bool:
        if not subset.members <= self.separating.members:
            return False
        return True


def _pair_for_shift(F: FinSet, s: Coords) -> tuple[Coords, Coords]:
    op = F.group.op
    for g in F.coords():
        h = op(g, s)
        if h in F.members:
            return g, h
    raise AssertionError("shift not realised inside the separating set")


def build_separated_cover(
    samples: Sequence[ShiftPoint],
    separating: FinSet,
    probe_window: FinSet,
    max_radius: int = 16,
    min_radius: int = 0,
) -> SeparatedCover:
    """Cover by the cylinders observed on ``V g`` (``g`` in the probe window), ``V = box(R)``.

    ``R`` grows from ``min_radius`` until every observed pattern is separated
    under ``separating``.  Cylinders are ordered by first observation, scanning
    samples in order and probe positions in canonical order.
    """
    if not samples:
        raise ValueError("at least one sample point is required")
    group = separating.group
    op = group.op
    shifts = _separating_shifts(separating)
    probe = probe_window.coords()
    failure = None
    for radius in range(min_radius, max_radius + 1):
        V = box(group, radius)
        vc = V.coords()
        pairs = _shift_pairs(group, V, shifts)
        seen: dict[tuple, int] = {}
        patterns, witnesses = [], []
        ok = True
        for x in samples:
            ev = x.eval_coords
            for g in probe:
                p = tuple([ev(op(v, g)) for v in vc])
                if p in seen:
                    continue
                wit, bad = _witnesses(p, pairs)
                if wit is None:
                    failure = (p, _pair_for_shift(separating, shifts[bad]), radius, g)
                    ok = False
                    break
                seen[p] = len(patterns)
                patterns.append(p)
                witnesses.append(wit)
            if not ok:
                break
        if ok:
            return SeparatedCover(V, patterns, separating, witnesses, radius=radius)
    pattern, pair, radius, where = failure
    raise SeparationFailure(
        f"pattern observed at {where} on box({radius}) is not separated for the pair "
        f"{pair[0]} vs {pair[1]} (radius limit {max_radius})",
        pattern=pattern, pair=pair, radius=radius,
    )
