"""Independent reference computations used to derive and freeze expected values.

Nothing here imports the constructor or the flow solver; oracles are written
from the definitions with the most naive data structures available.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations, product


# ---------------------------------------------------------------- groups

def heis_matrix(g):
    a, b, c = g
    return ((1, a, c), (0, 1, b), (0, 0, 1))


def mat_mul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)) for i in range(3))


def heis_from_matrix(M):
    return (M[0][1], M[1][2], M[0][2])


def heis_mul(g, h):
    return heis_from_matrix(mat_mul(heis_matrix(g), heis_matrix(h)))


# ---------------------------------------------------------------- parameters

def oracle_r(eps: Fraction) -> int:
    r = 1
    while (1 - eps / 2) ** r >= eps:
        r += 1
    return r


def oracle_bound(delta: Fraction, eps: Fraction, q: Fraction) -> Fraction:
    """Density lower bound written via the minimal level ratio ``beta``."""
    beta = (1 - q) / (1 + delta)
    return (beta - delta) / (1 + delta) + eps * (1 - (1 + delta) ** 3 * beta) / (1 + delta)


def interval_defect(n: int, m: int) -> Fraction:
    """Defect of ``[-m, m]`` with respect to ``[-n, n]`` in Z."""
    return Fraction(2 * n, 2 * m + 1)


def brute_defect(T, K, op):
    KT = {op(k, t) for k in K for t in T}
    return Fraction(len(KT ^ set(T)), len(T))


# ---------------------------------------------------------------- disjointness

def exhaustive_eps_disjoint(tiles, eps: Fraction) -> bool:
    """Search pairwise disjoint cores of the exact minimal size ``ceil((1 - eps)|T|)``."""
    tiles = [sorted(t) for t in tiles]
    demands = [math.ceil((1 - eps) * len(t)) for t in tiles]

    def go(i, used):
        if i == len(tiles):
            return True
        free = [e for e in tiles[i] if e not in used]
        for core in combinations(free, demands[i]):
            if go(i + 1, used | set(core)):
                return True
        return False

    return go(0, frozenset())


# ---------------------------------------------------------------- density

def periodic_min_density(residues, period: int, rank: int, F) -> Fraction:
    """``min_g |S ∩ F + g| / |F|`` for ``S = residues + period Z^rank``, g over one period cell."""
    best = None
    for g in product(range(period), repeat=rank):
        count = sum(1 for f in F if tuple((fi + gi) % period for fi, gi in zip(f, g)) in residues)
        best = count if best is None else min(best, count)
    return Fraction(best, len(F))


# ---------------------------------------------------------------- construction in Z

def naive_stage(x_eval, cylinders, V, g):
    """1-based index of the first cylinder whose pattern matches ``x`` on ``V + g``."""
    seen = tuple(x_eval((v[0] + g,)) for v in V)
    for i, p in enumerate(cylinders):
        if p == seen:
            return i + 1
    return None


def naive_construction_z(x_eval, cylinders, V, shapes, eps: Fraction, region):
    """Level/stage construction in Z over ``region`` (everything outside assumed uncovered).

    ``shapes`` are lists of integers (level 1 first).  Returns
    ``{level: {center: stage}}``.
    """
    stage = {g: naive_stage(x_eval, cylinders, V, g) for g in region}
    m = len(cylinders)
    r = len(shapes)
    centers = {j: {} for j in range(1, r + 1)}
    higher = set()
    for j in range(r, 0, -1):
        F = shapes[j - 1]
        for i in range(1, m + 1):
            prior = set()
            for c in centers[j]:
                prior |= {f + c for f in F}
            blocked = prior | higher
            added = [g for g in region if stage[g] == i
                     and sum(1 for f in F if f + g in blocked) < eps * len(F)]
            for g in added:
                centers[j][g] = i
        for c in centers[j]:
            higher |= {f + c for f in F}
    return centers
