"""Parameter selection and the dynamical, disjointified and congruent quasitiling constructions.

The dynamical construction is evaluated exactly on a finite window.  A
center decision at level ``j`` only looks at tiles ``F_l c'`` (``l >= j``)
that meet ``F_j c``; at level ``j`` itself only strictly earlier stages
matter.  The set of positions whose decisions are needed is therefore a
finite closure, computed exactly before any decision is made.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence

from .errors import (
    CorruptTiling,
    FamilyTooCoarse,
    InfeasibleParameters,
    MissingProvenance,
    TagMismatch,
)
from .folner import FolnerFamily, is_invariant, perturbation_delta
from .groups import Coords, FinSet, Group, product_coords
from .rationals import RationalLike, as_rational, largest_dyadic
from .symbolic import SeparatedCover, ShiftPoint, build_separated_cover
from .tiling import DisjointnessWitness, Quasitiling, WindowedTiling, is_disjoint

HALF = Fraction(1, 2)


def check_eps(eps: RationalLike) -> Fraction:
    eps = as_rational(eps)
    if not 0 < eps <= HALF:
        raise InfeasibleParameters(f"eps must lie in (0, 1/2], got {eps}")
    return eps


def choose_r(eps: RationalLike) -> int:
    """Least ``r`` with ``(1 - eps/2)^r < eps``."""
    eps = check_eps(eps)
    base = 1 - eps / 2
    r, power = 1, base
    while power >= eps:
        r += 1
        power *= base
    return r


def density_bound(delta: Fraction, eps_t: Fraction, q: Fraction) -> Fraction:
    """Lower bound on the level density after the ``delta``-perturbation, as a function of ``eps_t``."""
    one = 1 + delta
    return (1 - q) / one**2 - delta / one + eps_t * (1 / one - one * (1 - q))


def choose_deltas(eps: RationalLike, r: int) -> list[Fraction]:
    """Largest dyadic ``delta_j`` (``j = 1..r-1``) keeping the density bound above its ``3eps/4`` value."""
    eps = check_eps(eps)
    if r < 1:
        raise InfeasibleParameters("r must be positive")
    deltas = []
    for j in range(1, r):
        q = (1 - eps / 2) ** (r - j)
        target = density_bound(Fraction(0), 3 * eps / 4, q)
        d = largest_dyadic(lambda t: density_bound(t, eps, q) >= target)
        if d is None:
            raise InfeasibleParameters(f"no dyadic delta works for level {j} (eps={eps}, r={r})")
        deltas.append(d)
    return deltas


def choose_shape_indices(fam: FolnerFamily, n0: int, deltas: Sequence[RationalLike],
                         max_index: Optional[int] = None) -> list[int]:
    """``n_1 = n0 + 1``; each next index is the least one invariant enough for every earlier shape."""
    if n0 < 0:
        raise InfeasibleParameters("n0 must be non-negative")
    deltas = [as_rational(d) for d in deltas]
    if any(d <= 0 for d in deltas):
        raise InfeasibleParameters("deltas must be positive")
    limit = fam.max_index if max_index is None else max_index
    indices = [n0 + 1]
    if indices[0] > limit:
        raise FamilyTooCoarse(f"first index {indices[0]} exceeds the search bound {limit}")
    for _ in deltas:
        m = indices[-1] + 1
        while not all(fam.defect(m, indices[j]) < deltas[j] for j in range(len(indices))):
            m += 1
            if m > limit:
                raise FamilyTooCoarse(
                    f"no index up to {limit} is invariant enough for shapes {indices}")
        indices.append(m)
    return indices


@dataclass(frozen=True)
class ShapePlan:
    family: FolnerFamily
    eps: Fraction
    n0: int
    r: int
    deltas: tuple
    indices: tuple

    @property
    def group(self) -> Group:
        return self.family.group

    @cached_property
    def shapes(self) -> tuple:
        return tuple(self.family[n] for n in self.indices)

    @cached_property
    def separating_set(self) -> FinSet:
        out: set = set()
        for F in self.shapes:
            out |= F.members
        return FinSet(self.group, out)

    def defects(self) -> dict[tuple[int, int], Fraction]:
        """``(i, j) -> defect of F_{n_i} w.r.t. F_{n_j}`` for level pairs ``j < i`` (1-based)."""
        return {(i + 1, j + 1): self.family.defect(self.indices[i], self.indices[j])
                for i in range(self.r) for j in range(i)}


def plan_shapes(family: FolnerFamily, eps: RationalLike, n0: int,
                deltas: Optional[Sequence[RationalLike]] = None,
                max_index: Optional[int] = None) -> ShapePlan:
    """Derive ``r``, the deltas (unless given explicitly) and the shape indices."""
    eps = check_eps(eps)
    r = choose_r(eps)
    if deltas is None:
        deltas = choose_deltas(eps, r)
    else:
        deltas = [as_rational(d) for d in deltas]
        if len(deltas) != r - 1:
            raise InfeasibleParameters(f"expected {r - 1} deltas for eps={eps}, got {len(deltas)}")
    indices = choose_shape_indices(family, n0, deltas, max_index=max_index)
    return ShapePlan(family, eps, n0, r, tuple(deltas), tuple(indices))


@dataclass(frozen=True)
class ConstructionParams:
    plan: ShapePlan
    cover: SeparatedCover

    def __post_init__(self):
        if self.cover.group is not self.plan.group:
            raise TagMismatch("cover and family live in different groups")
        if not self.plan.separating_set.members <= self.cover.separating.members:
            raise InfeasibleParameters("cover is not separated for the union of the shapes")

    eps = property(lambda self: self.plan.eps)
    r = property(lambda self: self.plan.r)
    n0 = property(lambda self: self.plan.n0)
    indices = property(lambda self: self.plan.indices)
    deltas = property(lambda self: self.plan.deltas)
    shapes = property(lambda self: self.plan.shapes)
    family = property(lambda self: self.plan.family)
    group = property(lambda self: self.plan.group)

    @cached_property
    def shape_coords(self) -> tuple:
        return tuple(F.coords() for F in self.shapes)

    @cached_property
    def reach(self) -> dict[tuple[int, int], tuple]:
        """``(j, l) -> F_l^-1 F_j`` for levels ``l >= j``: where level-``l`` tiles meeting ``F_j c`` sit."""
        group = self.group
        out = {}
        for j in range(1, self.r + 1):
            for l in range(j, self.r + 1):
                inv_l = [group.inverse(f) for f in self.shape_coords[l - 1]]
                out[(j, l)] = tuple(sorted(product_coords(group, inv_l, self.shape_coords[j - 1])))
        return out

    @cached_property
    def reach_inverse_shapes(self) -> tuple:
        group = self.group
        return tuple(tuple(group.inverse(f) for f in S) for S in self.shape_coords)


def make_params(family: FolnerFamily, eps: RationalLike, n0: int, samples: Sequence[ShiftPoint],
                probe_window: FinSet, deltas: Optional[Sequence[RationalLike]] = None,
                max_cover_radius: int = 16, min_cover_radius: int = 0,
                max_index: Optional[int] = None) -> ConstructionParams:
    plan = plan_shapes(family, eps, n0, deltas=deltas, max_index=max_index)
    cover = build_separated_cover(samples, plan.separating_set, probe_window,
                                  max_radius=max_cover_radius, min_radius=min_cover_radius)
    return ConstructionParams(plan, cover)


class _Recorder:
    """Forwards symbol queries to a point and remembers which positions were read."""

    def __init__(self, x: ShiftPoint):
        self._x = x
        self.seen: set = set()

    def eval_coords(self, c: Coords):
        self.seen.add(c)
        return self._x.eval_coords(c)

    def eval_many(self, cs):
        self.seen.update(cs)
        return self._x.eval_many(cs)


@dataclass
class ConstructionTrace:
    params: ConstructionParams
    window: FinSet
    centers: dict          # level -> {center: stage}, centers inside the window
    cores: dict            # (level, center) -> frozenset, the part of F_j c not yet covered
    unions: dict           # level -> H^(j) ∩ window
    support: FinSet
    stats: dict = field(default_factory=dict)
    point: Optional[ShiftPoint] = None

    @property
    def group(self) -> Group:
        return self.params.group

    @property
    def eps(self) -> Fraction:
        return self.params.eps

    def level_centers(self, j: int) -> FinSet:
        return FinSet(self.group, self.centers[j].keys())

    def stage_set(self, j: int, i: int) -> FinSet:
        """Cumulative ``C_i^(j)`` on the window."""
        return FinSet(self.group, (c for c, s in self.centers[j].items() if s <= i))

    def added(self, j: int, i: int) -> FinSet:
        return FinSet(self.group, (c for c, s in self.centers[j].items() if s == i))

    def tiling(self) -> WindowedTiling:
        shapes = self.params.shapes
        centers = [self.level_centers(j) for j in range(1, self.params.r + 1)]
        prov = {(j - 1, c): (j, s) for j, level in self.centers.items() for c, s in level.items()}
        T = Quasitiling(self.group, shapes, centers, prov)
        return WindowedTiling(T, self.window, kind="hat", eps=self.eps,
                              meta={"indices": self.params.indices})

    def witness(self) -> DisjointnessWitness:
        return DisjointnessWitness({(j - 1, c): core for (j, c), core in self.cores.items()})


def construct_dynamical(x: ShiftPoint, params: ConstructionParams, window: FinSet,
                        max_positions: int = 5_000_000) -> ConstructionTrace:
    """Run the level/stage construction and return it exactly on ``window``."""
    group = params.group
    if x.group is not group or window.group is not group:
        raise TagMismatch("point, window and parameters must share a group")
    r = params.r
    cover = params.cover
    eps = params.eps
    num, den = eps.numerator, eps.denominator
    rec = _Recorder(x)
    stage_cache: dict = {}

    def stage(c):
        s = stage_cache.get(c, 0)
        if s == 0:
            s = cover.stage_of(rec, c)
            stage_cache[c] = s
        return s

    translates = group.translates
    A = window.coords()
    # need[j]: positions whose level-j decision is required.  Seeds are every
    # covered position whose level-j tile can touch the window.
    need: dict[int, dict] = {}
    for j in range(1, r + 1):
        seeds = {}
        shape_inv = params.reach_inverse_shapes[j - 1]
        for a in A:
            for c in translates(shape_inv, a):
                if c not in seeds:
                    s = stage(c)
                    if s is not None:
                        seeds[c] = s
        need[j] = seeds
    for j in range(1, r + 1):
        level = need[j]
        same = params.reach[(j, j)]
        todo = list(level)
        while todo:
            c = todo.pop()
            i = level[c]
            for c2 in translates(same, c):
                if c2 in level:
                    continue
                s = stage(c2)
                if s is not None and s < i:
                    level[c2] = s
                    todo.append(c2)
            if len(level) > max_positions:
                raise InfeasibleParameters(
                    f"dependency closure exceeds {max_positions} positions at level {j}")
        for l in range(j + 1, r + 1):
            up = need[l]
            reach = params.reach[(j, l)]
            for c in level:
                for c2 in translates(reach, c):
                    if c2 not in up:
                        s = stage(c2)
                        if s is not None:
                            up[c2] = s

    covered: set = set()
    A_set = window.members
    centers = {j: {} for j in range(1, r + 1)}
    cores = {}
    unions = {}
    accepted_total = 0
    for j in range(r, 0, -1):
        shape = params.shape_coords[j - 1]
        size = len(shape)
        # Accept iff hits < eps * size, i.e. hits * den < num * size.
        max_hits = -(-num * size // den) - 1
        batches: dict[int, list] = {}
        for c, s in need[j].items():
            batches.setdefault(s, []).append(c)
        for s in sorted(batches):
            placed = []
            for c in sorted(batches[s]):
                tile = translates(shape, c)
                hits = 0
                for t in tile:
                    if t in covered:
                        hits += 1
                        if hits > max_hits:
                            break
                else:
                    placed.append((c, frozenset(t for t in tile if t not in covered)))
            fresh: set = set()
            for c, core in placed:
                if not fresh.isdisjoint(core):
                    raise CorruptTiling(f"same-stage tiles overlap at level {j}, stage {s}, center {c}")
                fresh |= core
                if c in A_set:
                    centers[j][c] = s
                    cores[(j, c)] = core
            covered |= fresh
            accepted_total += len(placed)
        unions[j] = frozenset(t for t in A if t in covered)
    return ConstructionTrace(
        params, window, centers, cores, unions, FinSet(group, rec.seen),
        stats={
            "needed": {j: len(need[j]) for j in need},
            "evaluated": len(stage_cache),
            "placed": accepted_total,
        },
        point=x,
    )


def stage_centers(x: ShiftPoint, j: int, i: int, params: ConstructionParams,
                  prior: Mapping[int, FinSet], window: FinSet) -> FinSet:
    """``C_i^(j) \\ C_{i-1}^(j)`` on ``window``, straight from the set-based definition.

    ``prior[l]`` holds ``C^(l)`` for ``l > j`` and ``prior[j]`` holds
    ``C_{i-1}^(j)``; both must be complete wherever they can reach ``F_j window``.
    """
    group = params.group
    op = group.op
    blocked: set = set()
    for l in range(j, params.r + 1):
        C = prior.get(l)
        if C is None:
            continue
        blocked |= product_coords(group, params.shape_coords[l - 1], C.members)
    F = params.shape_coords[j - 1]
    eps = params.eps
    out = []
    for g in window.coords():
        if params.cover.stage_of(x, g) != i:
            continue
        overlap = sum(1 for f in F if op(f, g) in blocked)
        if overlap < eps * len(F):
            out.append(g)
    return FinSet(group, out)


def disjointify(trace: ConstructionTrace) -> WindowedTiling:
    """Replace every hat tile by its core; shapes are the distinct trimmed sets re-anchored at the center."""
    group = trace.group
    op, inverse = group.op, group.inverse
    by_shape: dict[frozenset, list] = {}
    levels: dict[tuple, tuple] = {}
    for j, level in trace.centers.items():
        for c, s in level.items():
            core = trace.cores.get((j, c))
            if core is None:
                raise MissingProvenance(f"no core recorded for level {j} center {c}")
            ci = inverse(c)
            shape = frozenset(op(t, ci) for t in core)
            by_shape.setdefault(shape, []).append(c)
            levels[c] = (j, s)
    ordered = sorted(by_shape, key=lambda S: (len(S), sorted(S)), reverse=True)
    shapes = [FinSet(group, S) for S in ordered]
    centers = [FinSet(group, by_shape[S]) for S in ordered]
    prov = {(k, c): levels[c] for k, C in enumerate(centers) for c in C.members}
    T = Quasitiling(group, shapes, centers, prov, anchored=False)
    return WindowedTiling(T, trace.window, kind="disjoint", eps=trace.eps,
                          meta={"indices": trace.params.indices})


def static_sequential(window: FinSet, shapes: Sequence[FinSet], eps: RationalLike) -> Quasitiling:
    """Greedy baseline: largest shape first, candidates in canonical order, accept below ``eps`` overlap."""
    eps = as_rational(eps)
    shapes = list(shapes)
    if not shapes:
        raise ValueError("at least one shape is required")
    group = shapes[0].group
    op = group.op
    covered: set = set()
    chosen = [set() for _ in shapes]
    order = sorted(range(len(shapes)), key=lambda k: (-len(shapes[k]), k))
    taken: set = set()
    for k in order:
        F = shapes[k].coords()
        for g in window.coords():
            if g in taken:
                continue
            tile = [op(f, g) for f in F]
            if sum(1 for t in tile if t in covered) < eps * len(F):
                chosen[k].add(g)
                taken.add(g)
                covered.update(tile)
    return Quasitiling(group, shapes, [FinSet(group, C) for C in chosen])


@dataclass(frozen=True)
class CongruenceParams:
    K: FinSet
    delta: Fraction
    eps: Fraction
    delta_prime: Fraction
    eta: Fraction
    delta_second: Fraction
    U: FinSet


def eta_admissible(eps: Fraction, eta: Fraction) -> bool:
    return (1 - eps / 2) * (1 - eta) > 1 - eps


def delta_second_for(u_size: int, eta: Fraction) -> Optional[Fraction]:
    """Largest dyadic ``d`` with ``(|U| + 1) d < eta``."""
    return largest_dyadic(lambda d: (u_size + 1) * d < eta)


def _base_invariance(K: FinSet, delta: Fraction, eta: Fraction) -> Optional[Fraction]:
    def works(d):
        try:
            return perturbation_delta(K, delta, d) >= eta
        except InfeasibleParameters:
            return False
    return largest_dyadic(works)


def derive_congruence_params(K: FinSet, delta: RationalLike, eps: RationalLike,
                             small_shapes: Sequence[FinSet]) -> CongruenceParams:
    delta = as_rational(delta)
    eps = check_eps(eps)
    if not 0 < delta < 1:
        raise InfeasibleParameters(f"delta must lie in (0, 1), got {delta}")
    group = K.group
    u: set = set()
    for S in small_shapes:
        u |= S.members
    # Closing under inverses is what makes U^-1 t ⊆ T'' available for the lower sandwich bound.
    u |= {group.inverse(s) for s in u}
    U = FinSet(group, u)
    eta = largest_dyadic(lambda h: eta_admissible(eps, h) and _base_invariance(K, delta, h) is not None)
    if eta is None:
        raise InfeasibleParameters(f"no dyadic eta works for eps={eps}, |K|={len(K)}, delta={delta}")
    delta_prime = _base_invariance(K, delta, eta)
    delta_second = delta_second_for(len(U), eta)
    if delta_second is None:
        raise InfeasibleParameters(f"no dyadic delta'' works for |U|={len(U)}, eta={eta}")
    return CongruenceParams(K, delta, eps, delta_prime, eta, delta_second, U)


def big_shapes_admissible(cp: CongruenceParams, shapes: Sequence[FinSet]) -> dict[int, tuple[bool, bool]]:
    """Per shape: ``((U, delta'')-invariant, (K, delta')-invariant)``."""
    return {k: (is_invariant(S, cp.U, cp.delta_second), is_invariant(S, cp.K, cp.delta_prime))
            for k, S in enumerate(shapes)}


def refine_tiles(big_tiles: Mapping, small_tiles: Mapping) -> tuple[dict, dict]:
    """Set algebra of the refinement.

    ``small_tiles`` maps a key to ``(center, tile)``.  Each small tile goes to
    the big tile containing its center (or nowhere); each big tile becomes
    ``(T'' ∪ tiles assigned to it) minus tiles assigned elsewhere``.
    Returns ``(refined, assignment)``.
    """
    owner = {t: key for key, tile in big_tiles.items() for t in tile}
    assigned = {skey: owner.get(c) for skey, (c, _) in small_tiles.items()}
    touching: dict = {}
    for skey, (_, tile) in small_tiles.items():
        for t in tile:
            touching.setdefault(t, []).append(skey)
    by_home: dict = {}
    for skey, home in assigned.items():
        by_home.setdefault(home, []).append(skey)
    refined = {}
    for bkey, tile in big_tiles.items():
        grown = set(tile)
        for skey in by_home.get(bkey, ()):
            grown |= small_tiles[skey][1]
        drop = set()
        for t in grown:
            for skey in touching.get(t, ()):
                if assigned[skey] != bkey:
                    drop |= small_tiles[skey][1]
        refined[bkey] = frozenset(grown - drop)
    return refined, assigned


def congruent_refine(small: WindowedTiling, x: ShiftPoint, cp: CongruenceParams,
                     params_big: ConstructionParams, window: FinSet,
                     enforce_invariance: bool = True) -> WindowedTiling:
    """Absorb every small tile into the big tile holding its center; cut it out of the others."""
    if not is_disjoint(small.tiling):
        raise CorruptTiling("small tiling is not disjoint")
    admissible = big_shapes_admissible(cp, params_big.shapes)
    if enforce_invariance and not all(a and b for a, b in admissible.values()):
        bad = [params_big.indices[k] for k, ok in admissible.items() if not all(ok)]
        raise InfeasibleParameters(f"big shapes with indices {bad} are not invariant enough")
    group = x.group
    op, inverse = group.op, group.inverse
    big = disjointify(construct_dynamical(x, params_big, window))
    big_tiles = big.tiling.tile_sets()
    small_tiles = small.tiling.tile_sets()
    refined, assigned = refine_tiles(big_tiles, {k: (k[1], t) for k, t in small_tiles.items()})
    small_owner = {t: key for key, tile in small_tiles.items() for t in tile}
    absorbed: dict = {}
    for skey, bkey in assigned.items():
        if bkey is not None:
            absorbed.setdefault(bkey, []).append(skey)

    big_known = big.determined_elements()
    small_known = small.determined_elements()
    small_window = small.window.members
    inexact = set()
    for bkey, tile in big_tiles.items():
        # Exact only if every small tile that touches or is centered in T'' is
        # known, and so is the big tile owning each of their centers.
        ok = tile <= small_known and tile <= small_window
        if ok:
            touching = {small_owner[t] for t in tile if t in small_owner}
            touching.update(absorbed.get(bkey, ()))
            ok = all(key[1] in big_known for key in touching)
        if not ok:
            inexact.add(bkey[1])

    by_shape: dict[frozenset, list] = {}
    parents = {}
    for bkey, tile in refined.items():
        c = bkey[1]
        if c in inexact:
            continue
        ci = inverse(c)
        by_shape.setdefault(frozenset(op(t, ci) for t in tile), []).append(c)
    ordered = sorted(by_shape, key=lambda S: (len(S), sorted(S)), reverse=True)
    shapes = [FinSet(group, S) for S in ordered]
    centers = [FinSet(group, by_shape[S]) for S in ordered]
    for k, C in enumerate(centers):
        for c in C.members:
            parents[(k, c)] = big_tiles[(big.tiling.shape_of(c), c)]
    T = Quasitiling(group, shapes, centers, anchored=False)
    refined_window = FinSet(group, big.window.members - inexact)
    return WindowedTiling(T, refined_window, kind="refined", eps=cp.eps, meta={
        "big": big,
        "parents": parents,
        "assignment": assigned,
        "admissible": admissible,
        "U": cp.U,
    })
