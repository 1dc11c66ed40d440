"""Recomputation-based checks of the factor-map, density, disjointness and congruence guarantees.

Every check returns a :class:`CheckResult` with status ``pass``, ``fail`` or
``inconclusive``.  A failure always names a concrete counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .constructor import (
    ConstructionParams,
    ConstructionTrace,
    construct_dynamical,
    disjointify,
    stage_centers,
)
from .folner import invariance_defect, is_invariant
from .groups import ElementLike, FinSet, as_coords, product_coords
from .rationals import RationalLike, as_rational, fmt_rational
from .symbolic import ShiftPoint
from .tiling import WindowedTiling, check_witness, eps_disjoint_flow_check

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class CheckResult:
    name: str
    status: str
    metrics: dict = field(default_factory=dict)
    counterexample: Any = None
    detail: str = ""

    def __post_init__(self):
        if self.status == FAIL and self.counterexample is None:
            raise ValueError(f"failed check {self.name!r} must carry a counterexample")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return fmt_rational(v)
            if isinstance(v, (tuple, list)):
                return [enc(u) for u in v]
            if isinstance(v, (set, frozenset)):
                return sorted(enc(u) for u in v)
            if isinstance(v, dict):
                return {str(k): enc(u) for k, u in v.items()}
            return v
        return {
            "name": self.name,
            "status": self.status,
            "metrics": enc(self.metrics),
            "counterexample": enc(self.counterexample),
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    results: list = field(default_factory=list)

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        return result

    @property
    def status(self) -> str:
        statuses = {r.status for r in self.results}
        if FAIL in statuses:
            return FAIL
        if INCONCLUSIVE in statuses or not statuses:
            return INCONCLUSIVE
        return PASS

    def to_dict(self) -> dict:
        return {"format": "quasitiling-report/1", "status": self.status,
                "checks": [r.to_dict() for r in self.results]}


def check_equivariance(x: ShiftPoint, g: ElementLike, params: ConstructionParams,
                       window: FinSet) -> CheckResult:
    """``C_i^(j)(gx) = C_i^(j)(x) g^-1`` on ``window`` for every level and stage."""
    name = "equivariance"
    group = params.group
    gc = as_coords(group, g)
    if not window:
        return CheckResult(name, INCONCLUSIVE, detail="empty window")
    op, inverse = group.op, group.inverse
    gi = inverse(gc)
    shifted = x.shifted(gc)
    left = construct_dynamical(shifted, params, window)
    right = construct_dynamical(x, params, window.right_translate(gc))
    compared = 0
    for j in range(1, params.r + 1):
        moved = {op(c, gi): s for c, s in right.centers[j].items()}
        here = left.centers[j]
        compared += len(here)
        if moved != here:
            diff = sorted(set(moved.items()) ^ set(here.items()))
            c, s = diff[0]
            return CheckResult(name, FAIL, {"level": j, "compared": compared},
                               counterexample={"g": gc, "level": j, "stage": s, "center": c},
                               detail="center sets disagree")
    return CheckResult(name, PASS, {"g": gc, "centers_compared": compared})


def _canonical(trace: ConstructionTrace) -> tuple:
    return tuple((j, tuple(sorted(trace.centers[j].items()))) for j in sorted(trace.centers))


def check_continuity(x: ShiftPoint, y: ShiftPoint, B: FinSet, params: ConstructionParams) -> CheckResult:
    """If ``y`` agrees with ``x`` on the recorded support, the tilings agree on ``B``."""
    name = "continuity"
    tx = construct_dynamical(x.fresh(), params, B)
    for c in tx.support.coords():
        if x.eval_coords(c) != y.eval_coords(c):
            return CheckResult(name, INCONCLUSIVE, {"support": len(tx.support)},
                               detail=f"points differ inside the recorded support at {c}")
    ty = construct_dynamical(y, params, B)
    if _canonical(tx) != _canonical(ty):
        diff = sorted(set(_canonical(tx)) ^ set(_canonical(ty)))
        return CheckResult(name, FAIL, counterexample={"level": diff[0][0]},
                           detail="hat tilings differ on B")
    dx, dy = disjointify(tx).tiling, disjointify(ty).tiling
    if dx.tile_sets() != dy.tile_sets():
        key = sorted(set(dx.tile_sets()) ^ set(dy.tile_sets()))
        return CheckResult(name, FAIL, counterexample={"tile": key[0] if key else None},
                           detail="trimmed tilings differ on B")
    return CheckResult(name, PASS, {"support": len(tx.support), "tiles": len(dx)})


def _covered_positions(trace: ConstructionTrace, candidates) -> tuple[list, int]:
    """Split candidates into those whose orbit point lies in some cylinder, and a count of the rest."""
    x = trace.point
    if x is None:
        return list(candidates), 0
    cover = trace.params.cover
    keep = [g for g in candidates if cover.stage_of(x, g) is not None]
    return keep, len(candidates) - len(keep)


def check_stage_density(trace: ConstructionTrace, j: int, window: Optional[FinSet] = None) -> CheckResult:
    """``|H^(j) ∩ F_{n_j} g| > eps |F_{n_j}|`` on every fully determined covered translate."""
    name = f"stage_density[level={j}]"
    params = trace.params
    F = params.shape_coords[j - 1]
    H = trace.unions[j]
    pool = trace.window if window is None else window
    W = trace.window.members
    op = params.group.op
    inside = [g for g in pool.coords() if all(op(f, g) in W for f in F)]
    inside, uncovered = _covered_positions(trace, inside)
    if not inside:
        return CheckResult(name, INCONCLUSIVE, {"uncovered": uncovered},
                           detail="no fully determined translate")
    eps = params.eps
    size = len(F)
    worst, where = None, None
    for g in inside:
        count = 0
        for f in F:
            if op(f, g) in H:
                count += 1
        if worst is None or count < worst:
            worst, where = count, g
    ratio = Fraction(worst, size)
    metrics = {"min_ratio": ratio, "translates": len(inside), "uncovered": uncovered}
    if ratio > eps:
        return CheckResult(name, PASS, metrics)
    return CheckResult(name, FAIL, metrics, counterexample={"translate": where},
                       detail=f"ratio {ratio} is not above {eps}")


def check_final_covering(tiling: WindowedTiling, F_test: FinSet, window: Optional[FinSet],
                         eps: RationalLike, point: Optional[ShiftPoint] = None,
                         params: Optional[ConstructionParams] = None) -> CheckResult:
    """``min_g |∪tiles ∩ F_test g| / |F_test| > 1 - eps`` over fully determined translates."""
    name = "final_covering"
    eps = as_rational(eps)
    det = tiling.determined_elements()
    op = tiling.group.op
    shape = F_test.coords()
    pool = (tiling.window if window is None else window).coords()
    inside = [g for g in pool if all(op(f, g) in det for f in shape)]
    uncovered = 0
    if point is not None and params is not None:
        keep = [g for g in inside if params.cover.stage_of(point, g) is not None]
        uncovered = len(inside) - len(keep)
        inside = keep
    if not inside:
        return CheckResult(name, INCONCLUSIVE, {"uncovered": uncovered},
                           detail="no fully determined translate of the test set")
    union = tiling.tiling.union()
    worst, where = None, None
    for g in inside:
        count = sum(1 for f in shape if op(f, g) in union)
        if worst is None or count < worst:
            worst, where = count, g
    ratio = Fraction(worst, len(shape))
    metrics = {"min_ratio": ratio, "translates": len(inside), "uncovered": uncovered}
    if ratio > 1 - eps:
        return CheckResult(name, PASS, metrics)
    return CheckResult(name, FAIL, metrics, counterexample={"translate": where},
                       detail=f"ratio {ratio} is not above {1 - eps}")


def check_constructive_witness(trace: ConstructionTrace) -> CheckResult:
    name = "constructive_witness"
    T = trace.tiling().tiling
    W = trace.witness()
    ok = check_witness(T, W, trace.eps)
    if ok:
        return CheckResult(name, PASS, {"tiles": len(T)})
    for key, tile in T.tile_sets().items():
        core = W[key]
        if not core <= tile or len(core) < (1 - trace.eps) * len(tile):
            return CheckResult(name, FAIL, counterexample={"tile": key})
    return CheckResult(name, FAIL, counterexample={"tile": None}, detail="cores overlap")


def check_flow(tiling: WindowedTiling, eps: RationalLike, max_tiles: Optional[int] = None) -> CheckResult:
    """Independent eps-disjointness decision by integral max-flow."""
    name = "flow_disjointness"
    T = tiling.tiling
    if max_tiles is not None and len(T) > max_tiles:
        return CheckResult(name, INCONCLUSIVE, {"tiles": len(T)},
                           detail=f"more than {max_tiles} tiles")
    ok, witness = eps_disjoint_flow_check(T, eps)
    if ok:
        return CheckResult(name, PASS, {"tiles": len(T)})
    return CheckResult(name, FAIL, {"tiles": len(T)}, counterexample={"tiles": len(T)},
                       detail="demand cannot be met")


def check_stage_recomputation(trace: ConstructionTrace, j: int, i: int, inner: FinSet) -> CheckResult:
    """Recompute ``C_i^(j) \\ C_{i-1}^(j)`` on ``inner`` from the set-based definition."""
    name = f"stage_recomputation[level={j},stage={i}]"
    params = trace.params
    group = params.group
    x = trace.point
    if x is None:
        return CheckResult(name, INCONCLUSIVE, detail="trace carries no point")
    W = trace.window.members
    for l in range(j, params.r + 1):
        reach = product_coords(group, [group.inverse(f) for f in params.shape_coords[l - 1]],
                               params.shape_coords[j - 1])
        if not product_coords(group, reach, inner.members) <= W:
            return CheckResult(name, INCONCLUSIVE,
                               detail=f"level-{l} prior sets not determined around the inner window")
    prior = {l: trace.level_centers(l) for l in range(j + 1, params.r + 1)}
    prior[j] = trace.stage_set(j, i - 1)
    got = stage_centers(x, j, i, params, prior, inner)
    want = FinSet(group, trace.added(j, i).members & inner.members)
    if got == want:
        return CheckResult(name, PASS, {"added": len(got)})
    diff = sorted(got.members ^ want.members)
    return CheckResult(name, FAIL, counterexample={"center": diff[0]})


def check_congruence(small: WindowedTiling, refined: WindowedTiling) -> CheckResult:
    """Every small tile inside the common determined region is inside one refined tile or meets none."""
    name = "congruence"
    region = small.determined_elements() & refined.determined_elements()
    owner = {}
    for key, tile in refined.tiling.tile_sets().items():
        for t in tile:
            owner[t] = key
    checked = straddling = inside = outside = 0
    for key, tile in small.tiling.tile_sets().items():
        if not tile <= region:
            straddling += 1
            continue
        checked += 1
        hosts = {owner.get(t) for t in tile}
        if hosts == {None}:
            outside += 1
        elif len(hosts) == 1:
            inside += 1
        else:
            return CheckResult(name, FAIL, {"checked": checked}, counterexample={"small_tile": key},
                               detail="small tile is split between refined tiles or the gaps")
    metrics = {"checked": checked, "inside": inside, "disjoint": outside, "straddling": straddling}
    return CheckResult(name, PASS, metrics)


def check_sandwich(refined: WindowedTiling, U: FinSet) -> CheckResult:
    """``T''_U ⊆ T' ⊆ U T''`` for every refined tile ``T'`` with parent ``T''``."""
    name = "sandwich"
    group = refined.group
    op = group.op
    Uc = U.coords()
    parents = refined.meta.get("parents", {})
    tiles = refined.tiling.tile_sets()
    for key, tile in tiles.items():
        parent = parents.get(key)
        if parent is None:
            return CheckResult(name, FAIL, counterexample={"tile": key}, detail="no parent tile")
        core = {t for t in parent if all(op(u, t) in parent for u in Uc)}
        hull = product_coords(group, Uc, parent)
        if not core <= tile or not tile <= hull:
            return CheckResult(name, FAIL, counterexample={"tile": key})
    return CheckResult(name, PASS, {"tiles": len(tiles)})


def check_shape_invariance(tiling: WindowedTiling, K: FinSet, delta: RationalLike) -> CheckResult:
    name = "shape_invariance"
    delta = as_rational(delta)
    worst = Fraction(0)
    for k, S in enumerate(tiling.tiling.shapes):
        d = invariance_defect(S, K)
        worst = max(worst, d)
        if not is_invariant(S, K, delta):
            return CheckResult(name, FAIL, {"defect": d}, counterexample={"shape": k})
    return CheckResult(name, PASS, {"max_defect": worst, "shapes": len(tiling.tiling.shapes)})


def verify_trace(trace: ConstructionTrace, F_test: Optional[FinSet] = None,
                 flow_tiles: Optional[int] = 300) -> VerificationReport:
    """Standard battery on one construction."""
    report = VerificationReport()
    report.add(check_constructive_witness(trace))
    hat = trace.tiling()
    report.add(check_flow(hat, trace.eps, max_tiles=flow_tiles))
    for j in range(1, trace.params.r + 1):
        report.add(check_stage_density(trace, j))
    F_test = trace.params.shapes[0] if F_test is None else F_test
    report.add(check_final_covering(hat, F_test, None, trace.eps,
                                    point=trace.point, params=trace.params))
    return report

