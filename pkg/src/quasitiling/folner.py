"""Følner families, invariance predicates, perturbation constants and windowed density."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .errors import EmptySetError, InfeasibleParameters
from .groups import FinSet, Group, IntegerLattice, box, set_product, set_symdiff
from .rationals import RationalLike, as_rational, largest_dyadic


class FolnerFamily:
    """The sequence ``n -> box(group, n)`` of symmetric Følner sets containing the unit."""

    def __init__(self, group: Group, max_index: int = 100_000):
        self.group = group
        self.max_index = max_index

    def __getitem__(self, n: int) -> FinSet:
        if not 0 <= n <= self.max_index:
            raise IndexError(f"Følner index {n} outside [0, {self.max_index}]")
        return box(self.group, n)

    def size(self, n: int) -> int:
        if isinstance(self.group, IntegerLattice):
            return (2 * n + 1) ** self.group.rank
        return len(self[n])

    def defect(self, i: int, j: int) -> Fraction:
        """Invariance defect of ``F_i`` with respect to ``F_j``.

        For Z^d boxes ``F_j F_i = F_{i+j}``, so the defect has a closed form and
        large indices never get enumerated.
        """
        if isinstance(self.group, IntegerLattice):
            return Fraction(self.size(i + j) - self.size(i), self.size(i))
        return invariance_defect(self[i], self[j])

    def __repr__(self) -> str:
        return f"FolnerFamily({self.group.tag})"


class ExplicitFamily(FolnerFamily):
    """A finite, hand-specified increasing family ``n -> sets[n]`` (for small worked examples)."""

    def __init__(self, sets):
        sets = list(sets)
        if not sets:
            raise ValueError("an explicit family needs at least one set")
        super().__init__(sets[0].group, max_index=len(sets) - 1)
        self.sets = sets

    def __getitem__(self, n: int) -> FinSet:
        if not 0 <= n < len(self.sets):
            raise IndexError(f"index {n} outside the explicit family")
        return self.sets[n]

    def size(self, n: int) -> int:
        return len(self[n])

    def defect(self, i: int, j: int) -> Fraction:
        return invariance_defect(self[i], self[j])

    def __repr__(self) -> str:
        return f"ExplicitFamily({self.group.tag}, {len(self.sets)} sets)"


def invariance_defect(T: FinSet, K: FinSet) -> Fraction:
    """``|KT △ T| / |T|`` as an exact rational."""
    if not T:
        raise EmptySetError("invariance defect of an empty set")
    return Fraction(len(set_symdiff(set_product(K, T), T)), len(T))


def _check_eps(eps: Fraction) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def is_invariant(T: FinSet, K: FinSet, eps: RationalLike) -> bool:
    """Strict ``(K, eps)``-invariance of ``T``."""
    eps = as_rational(eps)
    _check_eps(eps)
    return invariance_defect(T, K) < eps


def is_invariant_simplified(T: FinSet, K: FinSet, eps: RationalLike) -> bool:
    """``|KT| < (1 + eps)|T|``; equals :func:`is_invariant` whenever ``e in K``."""
    eps = as_rational(eps)
    _check_eps(eps)
    return len(set_product(K, T)) < (1 + eps) * len(T)


def perturbation_bound(k_size: int, delta0: Fraction, delta: Fraction) -> Fraction:
    """Upper bound on the defect of any ``T'`` within ``delta|T|`` of a ``(K, delta0)``-invariant ``T``.

    ``KT' △ T'`` lies inside ``(KT △ T) ∪ K(T △ T') ∪ (T △ T')`` and ``|T'| >= (1 - delta)|T|``.
    """
    return (delta0 + (k_size + 1) * delta) / (1 - delta)


def perturbation_delta(K: FinSet, eps: RationalLike, delta0: RationalLike) -> Fraction:
    eps = as_rational(eps)
    delta0 = as_rational(delta0)
    if delta0 >= eps:
        raise InfeasibleParameters(f"base invariance {delta0} is not below target {eps}")
    k = len(K)
    found = largest_dyadic(lambda d: perturbation_bound(k, delta0, d) < eps)
    if found is None:
        raise InfeasibleParameters(f"no dyadic perturbation size works for |K|={k}, eps={eps}, delta0={delta0}")
    return found


def banach_density_window(S: FinSet, F: FinSet, window: FinSet) -> Fraction:
    """``min_{g in window} |S ∩ Fg| / |F|``: an upper bound on the lower density ``D_F(S)``."""
    count, _ = density_minimum(S.members, F, window)
    return Fraction(count, len(F))


def density_minimum(
    S_members, F: FinSet, window: FinSet
) -> tuple[int, Optional[tuple]]:
    """Smallest ``|S ∩ Fg|`` over the window, with the first translate attaining it."""
    if not F:
        raise EmptySetError("density over an empty Følner set")
    if not window:
        raise EmptySetError("density over an empty window")
    op = F.group.op
    shape = F.members
    best = None
    where = None
    for g in window.coords():
        count = 0
        for f in shape:
            if op(f, g) in S_members:
                count += 1
        if best is None or count < best:
            best, where = count, g
            if count == 0:
                break
    return best, where
