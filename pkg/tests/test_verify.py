import dataclasses
import random
from fractions import Fraction

from quasitiling import FinSet, Z, Z2, box
from quasitiling.groups import product_coords
from quasitiling.tiling import Quasitiling, WindowedTiling
from quasitiling.verify import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    CheckResult,
    VerificationReport,
    check_constructive_witness,
    check_continuity,
    check_equivariance,
    check_final_covering,
    check_flow,
    check_stage_density,
    check_stage_recomputation,
    verify_trace,
)

import pytest

HALF = Fraction(1, 2)


def test_fail_needs_counterexample():
    with pytest.raises(ValueError):
        CheckResult("x", FAIL)


def test_report_status():
    rep = VerificationReport()
    assert rep.status == INCONCLUSIVE
    rep.add(CheckResult("a", PASS))
    assert rep.status == PASS
    rep.add(CheckResult("b", INCONCLUSIVE))
    assert rep.status == INCONCLUSIVE
    rep.add(CheckResult("c", FAIL, counterexample={"g": (1,)}))
    assert rep.status == FAIL
    doc = rep.to_dict()
    assert doc["format"] == "quasitiling-report/1"
    assert [c["status"] for c in doc["checks"]] == [PASS, INCONCLUSIVE, FAIL]


def test_equivariance_identity(z_point, z_params):
    assert check_equivariance(z_point, (0,), z_params, box(Z, 20)).status == PASS


@pytest.mark.parametrize("g", [1, -1, 7])
def test_equivariance_z(z_point, z_params, g):
    res = check_equivariance(z_point, (g,), z_params, box(Z, 20))
    assert res.status == PASS and res.metrics["centers_compared"] > 0


def test_equivariance_composition(z2_point, z2_params):
    g, h = (1, 0), (0, -2)
    hg = z2_params.group.op(h, g)
    W = box(Z2, 5)
    for e in (g, h, hg):
        assert check_equivariance(z2_point, e, z2_params, W).status == PASS


def test_equivariance_empty_window(z_point, z_params):
    assert check_equivariance(z_point, (1,), z_params, FinSet(Z)).status == INCONCLUSIVE


def test_continuity_outside_support(z_point, z_params):
    from quasitiling.constructor import construct_dynamical

    B = box(Z, 10)
    support = construct_dynamical(z_point.fresh(), z_params, B).support.members
    rng = random.Random(3)
    outside = [c for c in box(Z, 140).coords() if c not in support]
    for _ in range(3):
        picks = rng.sample(outside, 5)
        y = z_point.with_assignments({c: "1" if z_point.eval_coords(c) == "0" else "0" for c in picks})
        assert check_continuity(z_point, y, B, z_params).status == PASS


def test_continuity_inside_support_is_vacuous(z_point, z_params):
    flip = "1" if z_point.eval_coords((0,)) == "0" else "0"
    y = z_point.with_assignments({(0,): flip})
    assert check_continuity(z_point, y, box(Z, 10), z_params).status == INCONCLUSIVE


@pytest.mark.parametrize("j", [1, 2, 3])
def test_stage_density_z(z_trace, j):
    res = check_stage_density(z_trace, j)
    assert res.status == PASS and res.metrics["min_ratio"] > HALF


def test_stage_density_hole(z_trace):
    F = z_trace.params.shape_coords[0]
    hole = product_coords(Z, F, [(0,)])
    unions = dict(z_trace.unions)
    unions[1] = frozenset(t for t in unions[1] if t not in hole)
    broken = dataclasses.replace(z_trace, unions=unions)
    res = check_stage_density(broken, 1)
    assert res.status == FAIL
    g = res.counterexample["translate"]
    assert res.metrics["min_ratio"] == 0 and g == (0,)


def test_stage_density_empty_window(z_trace):
    assert check_stage_density(z_trace, 1, window=FinSet(Z)).status == INCONCLUSIVE


def _one_shape_tiling(shape, centers, window):
    T = Quasitiling(Z, [FinSet(Z, shape)], [FinSet(Z, centers)])
    return WindowedTiling(T, window, eps=HALF)


def test_final_covering_full():
    W = box(Z, 30)
    wt = _one_shape_tiling([(0,)], W.coords(), W)
    res = check_final_covering(wt, box(Z, 2), None, HALF)
    assert res.status == PASS and res.metrics["min_ratio"] == 1


def test_final_covering_empty():
    W = box(Z, 30)
    wt = _one_shape_tiling([(0,)], [], W)
    res = check_final_covering(wt, box(Z, 2), None, HALF)
    assert res.status == FAIL and res.metrics["min_ratio"] == 0


def test_final_covering_constructed_z2(z2_trace, z2_params):
    res = check_final_covering(z2_trace.tiling(), z2_params.shapes[0], None, HALF,
                               point=z2_trace.point, params=z2_params)
    assert res.status == PASS and res.metrics["translates"] > 0


def test_witness_and_flow(z2_trace):
    assert check_constructive_witness(z2_trace).status == PASS
    assert check_flow(z2_trace.tiling(), HALF, max_tiles=400).status == PASS


def test_flow_too_many_tiles(z2_trace):
    assert check_flow(z2_trace.tiling(), HALF, max_tiles=1).status == INCONCLUSIVE


def test_flow_fails_on_stacked_tiles():
    shapes = [FinSet(Z, [(0,), (1,), (2,)]), FinSet(Z, [(0,), (1,)])]
    T = Quasitiling(Z, shapes, [FinSet(Z, [(0,)]), FinSet(Z, [(1,)])])
    assert check_flow(WindowedTiling(T, box(Z, 5)), Fraction(1, 4)).status == FAIL


def test_stage_recomputation(z_trace):
    inner = box(Z, 40)
    for j in range(1, z_trace.params.r + 1):
        for i in (1, 2, 3):
            assert check_stage_recomputation(z_trace, j, i, inner).status == PASS


def test_stage_recomputation_needs_room(z_trace):
    assert check_stage_recomputation(z_trace, 1, 1, box(Z, 100)).status == INCONCLUSIVE


def test_verify_trace_z2(z2_trace):
    rep = verify_trace(z2_trace, flow_tiles=400)
    assert rep.status == PASS, [r.to_dict() for r in rep.results if not r.passed]


def test_trimmed_tiling_disjoint_flow(z2_trimmed):
    assert check_flow(z2_trimmed, HALF, max_tiles=400).status == PASS
