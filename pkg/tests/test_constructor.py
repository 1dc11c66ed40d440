from fractions import Fraction

import pytest

from oracles import interval_defect, naive_construction_z, oracle_bound, oracle_r
from quasitiling.constructor import (
    ConstructionParams, ShapePlan, choose_deltas, choose_r, choose_shape_indices,
    construct_dynamical, density_bound, disjointify, make_params, plan_shapes, stage_centers,
    static_sequential,
)
from quasitiling.errors import FamilyTooCoarse, InfeasibleParameters
from quasitiling.folner import ExplicitFamily, FolnerFamily
from quasitiling.groups import HEISENBERG, Z, Z2, FinSet, box
from quasitiling.symbolic import ShiftPoint, build_separated_cover
from quasitiling.tiling import check_witness, is_disjoint
from quasitiling.verify import check_stage_recomputation

HALF = Fraction(1, 2)


def zset(*vals):
    return FinSet(Z, [(v,) for v in vals])


# ---------------------------------------------------------------- parameters

@pytest.mark.parametrize("eps,expected", [(HALF, 3), (Fraction(1, 4), 11), (Fraction(49, 100), 3),
                                          (Fraction(2, 5), 5), (Fraction(1, 10), 45)])
def test_choose_r(eps, expected):
    assert oracle_r(eps) == expected
    assert choose_r(eps) == expected
    r = choose_r(eps)
    assert (1 - eps / 2) ** r < eps <= (1 - eps / 2) ** (r - 1)


@pytest.mark.parametrize("eps", [0, Fraction(3, 5), 1, -1])
def test_choose_r_rejects_out_of_range(eps):
    with pytest.raises(InfeasibleParameters):
        choose_r(eps)


def test_bound_forms_agree():
    for delta in (Fraction(0), Fraction(1, 64), Fraction(1, 3), Fraction(3, 2)):
        for q in (Fraction(3, 4), Fraction(9, 16), Fraction(1, 10)):
            assert density_bound(delta, HALF, q) == oracle_bound(delta, HALF, q)


def test_choose_deltas_half():
    deltas = choose_deltas(HALF, 3)
    assert deltas == [Fraction(1, 64), Fraction(1, 32)]
    for j, d in enumerate(deltas, start=1):
        q = (1 - HALF / 2) ** (3 - j)
        target = oracle_bound(Fraction(0), 3 * HALF / 4, q)
        assert oracle_bound(d, HALF, q) >= target
        assert oracle_bound(2 * d, HALF, q) < target
    q = Fraction(3, 4)
    assert oracle_bound(Fraction(0), Fraction(3, 8), q) == Fraction(17, 32)
    assert oracle_bound(Fraction(1, 32), HALF, q) > Fraction(17, 32)
    assert oracle_bound(Fraction(1, 16), HALF, q) < Fraction(17, 32)


def test_zero_delta_always_beats_the_target():
    for eps in (Fraction(1, 10), Fraction(1, 3), HALF):
        r = choose_r(eps)
        for j in range(1, r):
            q = (1 - eps / 2) ** (r - j)
            assert density_bound(Fraction(0), eps, q) > density_bound(Fraction(0), 3 * eps / 4, q)


def test_choose_shape_indices_examples():
    fam = FolnerFamily(Z)
    n1, n2 = choose_shape_indices(fam, 1, [Fraction(1, 10)])
    assert (n1, n2) == (2, 20)
    assert interval_defect(2, 20) < Fraction(1, 10) <= interval_defect(2, 19)
    assert choose_shape_indices(fam, 1, [Fraction(1)]) == [2, 3]
    assert choose_shape_indices(fam, 4, []) == [5]
    with pytest.raises(FamilyTooCoarse):
        choose_shape_indices(fam, 1, [Fraction(1, 10)], max_index=10)


def test_derived_plan_is_consistent():
    plan = plan_shapes(FolnerFamily(Z), HALF, 1)
    assert plan.r == 3 and plan.indices[0] == 2
    for (i, j), d in plan.defects().items():
        assert d < plan.deltas[j - 1]
    assert list(plan.indices) == sorted(set(plan.indices))


def test_heisenberg_indices_with_coarse_deltas():
    plan = plan_shapes(FolnerFamily(HEISENBERG, max_index=6), HALF, 0, deltas=[4, 4])
    assert plan.indices[0] == 1
    for (i, j), d in plan.defects().items():
        assert d < 4


# ---------------------------------------------------------------- small worked instances

def _explicit_params(shape, point, probe, min_radius):
    cover = build_separated_cover([point], shape, probe, min_radius=min_radius)
    plan = ShapePlan(ExplicitFamily([shape]), HALF, -1, 1, (), (0,))
    return ConstructionParams(plan, cover)


@pytest.fixture
def pair_instance():
    # Pattern aba sits at 0 and 5, pattern bab at 1; everything else is uncovered.
    x = ShiftPoint.from_pattern(Z, "abc", {(-1,): "a", (0,): "b", (1,): "a", (2,): "b",
                                           (4,): "a", (5,): "b", (6,): "a"}, "c")
    return x, _explicit_params(zset(0, 1), x, zset(0, 1, 5), 1)


def test_stage_centers_worked_example(pair_instance):
    x, params = pair_instance
    W = zset(*range(7))
    first = stage_centers(x, 1, 1, params, {}, W)
    assert first == zset(0, 5)
    assert stage_centers(x, 1, 2, params, {1: first}, W) == FinSet(Z)
    trace = construct_dynamical(x, params, W)
    assert trace.centers == {1: {(0,): 1, (5,): 1}}
    assert trace.stage_set(1, 2) == trace.stage_set(1, 1) == zset(0, 5)


def test_disjointify_worked_example():
    x = ShiftPoint.from_pattern(Z, "abcd", {(-2,): "a", (-1,): "b", (0,): "c", (1,): "a",
                                            (2,): "b", (3,): "b", (4,): "a"}, "d")
    params = _explicit_params(zset(0, 1, 2), x, zset(0, 2), 2)
    trace = construct_dynamical(x, params, zset(*range(-3, 8)))
    assert trace.centers == {1: {(0,): 1, (2,): 2}}
    tiles = sorted(disjointify(trace).tiling.tile_sets().values(), key=sorted)
    assert tiles == [frozenset({(0,), (1,), (2,)}), frozenset({(3,), (4,)})]


def test_empty_window_and_empty_cylinders(z_params, z_point):
    empty = construct_dynamical(z_point, z_params, FinSet(Z))
    assert len(empty.tiling().tiling) == 0
    x = ShiftPoint.from_pattern(Z, "abc", {}, "c")
    pair = FinSet(Z, [(0,), (1,)])
    y = ShiftPoint.from_pattern(Z, "abc", {(-1,): "a", (0,): "b", (1,): "a"}, "c")
    params = _explicit_params(pair, y, zset(0), 1)
    trace = construct_dynamical(x, params, zset(*range(-10, 11)))
    assert trace.centers == {1: {}}
    assert trace.unions[1] == frozenset()


def test_static_sequential_examples():
    T = static_sequential(zset(*range(6)), [zset(0, 1)], HALF)
    assert T.centers[0] == zset(0, 2, 4)
    assert len(static_sequential(FinSet(Z), [zset(0, 1)], HALF)) == 0
    tiny = static_sequential(zset(*range(6)), [zset(0, 1)], Fraction(1, 1000))
    assert is_disjoint(tiny)
    T2 = static_sequential(box(Z2, 3), [box(Z2, 0), box(Z2, 1)], HALF)
    assert len(T2.centers[1]) > 0
    assert not (T2.centers[0].members & T2.centers[1].members)


# ---------------------------------------------------------------- engine versus the naive oracle

def test_engine_matches_naive_construction_in_z():
    x = ShiftPoint.from_seed(Z, "01", 11)
    probe = 60
    params = make_params(FolnerFamily(Z), HALF, 1, [x], box(Z, probe), deltas=[1, 1])
    cover = params.cover
    V = cover.window.coords()
    ring = [g for g in range(-probe - 40, probe + 41) if abs(g) > probe + 20]
    # Precondition: a wide uncovered ring isolates the region from everything outside it.
    assert all(cover.stage_of(x, (g,)) is None for g in ring)
    cylinders = [c.pattern for c in cover.cylinders]
    shapes = [[c[0] for c in F.coords()] for F in params.shapes]
    naive = naive_construction_z(x.eval_coords, cylinders, V, shapes, HALF,
                                 list(range(-probe - 40, probe + 41)))
    window = box(Z, probe)
    trace = construct_dynamical(x, params, window)
    for j in range(1, params.r + 1):
        expected = {(c,): s for c, s in naive[j].items() if (c,) in window}
        assert trace.centers[j] == expected


# ---------------------------------------------------------------- properties on seeded runs

def test_trace_invariants(z_trace):
    params = z_trace.params
    for j in range(1, params.r + 1):
        prev = FinSet(Z)
        for i in range(1, params.cover.m + 1, 37):
            cur = z_trace.stage_set(j, i)
            assert prev.issubset(cur)
            prev = cur
    # H^(j) is the union of all tiles from level j upwards, seen on the window.
    hat = z_trace.tiling().tiling
    for j in range(1, params.r + 1):
        union = set()
        for (k, c), t in hat.tile_sets().items():
            if k + 1 >= j:
                union |= t
        det = z_trace.tiling().determined_elements()
        assert {t for t in union if t in det} == {t for t in z_trace.unions[j] if t in det}


def test_constructive_witness_and_base_density(z_trace):
    hat = z_trace.tiling()
    assert check_witness(hat.tiling, z_trace.witness(), z_trace.eps)
    params = z_trace.params
    F = params.shape_coords[-1]
    base = set()
    for c in z_trace.centers[params.r]:
        base |= {(f[0] + c[0],) for f in F}
    W = z_trace.window.members
    for g in z_trace.window.coords():
        if all((f[0] + g[0],) in W for f in F):
            assert sum(1 for f in F if (f[0] + g[0],) in base) >= z_trace.eps * len(F)


@pytest.mark.parametrize("j,i", [(3, 1), (2, 5), (1, 40)])
def test_stage_recomputation(z_trace, j, i):
    inner = box(Z, 40)
    assert check_stage_recomputation(z_trace, j, i, inner).passed


def test_disjointify_properties(z_trace, z2_trace):
    for trace in (z_trace, z2_trace):
        hat = trace.tiling()
        trimmed = disjointify(trace)
        assert is_disjoint(trimmed.tiling)
        det = hat.determined_elements()
        assert hat.tiling.union() & det == trimmed.tiling.union() & det
        # Every trimmed shape sits inside the Følner shape it came from, so the anchor stays meaningful.
        for (k, c), (level, _) in trimmed.tiling.provenance.items():
            assert trimmed.tiling.shapes[k].issubset(trace.params.shapes[level - 1])


def test_determinism(z2_point, z2_params):
    a = construct_dynamical(z2_point.fresh(), z2_params, box(Z2, 6))
    b = construct_dynamical(z2_point.fresh(), z2_params, box(Z2, 6))
    assert a.centers == b.centers and a.cores == b.cores and a.support == b.support
