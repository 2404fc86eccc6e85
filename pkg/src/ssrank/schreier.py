"""Schreier families S_xi for finite xi, regular-family predicates and
operations, and the index dilation of regular families.

S_1 = {F : |F| <= min F}; S_{xi+1} collects unions of n <= min F_1
successive blocks F_1 < ... < F_n with every block in S_xi (plus the
empty set).  Membership for xi >= 2 is decided by a partition dynamic
program (minimal number of admissible consecutive blocks) rather than
witness enumeration.
"""

from __future__ import annotations

import os
from functools import lru_cache

from .nodes import FiniteTree, order as tree_order

RESTRICT_GUARD = 25


def _check_set(F):
    F = tuple(sorted(set(F)))
    if F and (not all(isinstance(n, int) for n in F) or F[0] < 1):
        raise ValueError(f"set elements must be integers >= 1: {F!r}")
    return F


@lru_cache(maxsize=None)
def _member(xi: int, F: tuple) -> bool:
    if not F:
        return True
    if xi == 1:
        return len(F) <= F[0]
    # minimal number of consecutive blocks, each in S_{xi-1}, covering F
    n = len(F)
    INF = n + 1
    best = [INF] * (n + 1)
    best[n] = 0
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n + 1):
            if _member(xi - 1, F[i:j]) and best[j] + 1 < best[i]:
                best[i] = best[j] + 1
    return best[0] <= F[0]


def schreier_member(xi: int, F) -> bool:
    """F in S_xi?  The empty set is a member for every xi >= 1."""
    if not isinstance(xi, int) or xi < 1:
        raise ValueError(f"Schreier index must be an integer >= 1: {xi!r}")
    return _member(xi, _check_set(F))


def symbolic_order(xi: int) -> str:
    """The (infinite) order of the full family S_xi, as a symbol."""
    if not isinstance(xi, int) or xi < 1:
        raise ValueError(f"Schreier index must be an integer >= 1: {xi!r}")
    return f"w^{xi}"


class FiniteFamily:
    """A collection of finite subsets of {1..M}; the empty set always in."""

    __slots__ = ("universe", "sets")

    def __init__(self, universe: int, sets):
        if universe < 1:
            raise ValueError("universe bound must be >= 1")
        self.universe = universe
        self.sets = frozenset({_check_set(F) for F in sets} | {()})
        for F in self.sets:
            if F and F[-1] > universe:
                raise ValueError(f"member {F} exceeds universe {universe}")

    def __contains__(self, F) -> bool:
        return _check_set(F) in self.sets

    def __iter__(self):
        return iter(sorted(self.sets))

    def __len__(self):
        return len(self.sets)

    def __eq__(self, other):
        return isinstance(other, FiniteFamily) and self.sets == other.sets

    def __hash__(self):
        return hash(self.sets)

    def __repr__(self):
        return f"FiniteFamily(universe={self.universe}, {len(self.sets)} sets)"

    def is_hereditary(self) -> bool:
        for F in self.sets:
            for i in range(len(F)):
                if F[:i] + F[i + 1:] not in self.sets:
                    return False
        return True

    def is_spreading(self) -> bool:
        # single-entry right shifts generate all spreads
        for F in self.sets:
            for i in range(len(F)):
                m = F[i] + 1
                if m > self.universe:
                    continue
                if i + 1 < len(F) and m >= F[i + 1]:
                    continue
                if F[:i] + (m,) + F[i + 1:] not in self.sets:
                    return False
        return True


def is_regular(fam: FiniteFamily) -> tuple:
    """(hereditary, spreading); compactness is vacuous for finite data."""
    return fam.is_hereditary(), fam.is_spreading()


def _guard_ok() -> bool:
    return os.environ.get("SSRANK_GUARD_OVERRIDE") == "1"


def schreier_restrict(xi: int, M: int) -> FiniteFamily:
    """Materialize S_xi intersected with the subsets of {1..M}.

    Generated by depth-first extension: S_xi is hereditary, so every
    member is reachable from the empty set by adding elements in
    increasing order through members only.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if xi >= 2 and M > RESTRICT_GUARD and not _guard_ok():
        raise ValueError(
            f"schreier_restrict guard: M={M} > {RESTRICT_GUARD} for xi={xi} "
            "(set SSRANK_GUARD_OVERRIDE=1 to lift)")
    out = []

    def extend(F):
        out.append(F)
        lo = F[-1] + 1 if F else 1
        for x in range(lo, M + 1):
            G = F + (x,)
            if schreier_member(xi, G):
                extend(G)

    extend(())
    return FiniteFamily(M, out)


def family_restrict(fam: FiniteFamily, L) -> FiniteFamily:
    """The member sets contained in L."""
    L = set(_check_set(L))
    return FiniteFamily(fam.universe, [F for F in fam.sets if set(F) <= L])


def family_spread_image(fam: FiniteFamily, L) -> FiniteFamily:
    """Image under F -> L(F) = {L_i : i in F} for increasing L."""
    L = tuple(L)
    if any(a >= b for a, b in zip(L, L[1:])):
        raise ValueError("L must be strictly increasing")
    need = max((F[-1] for F in fam.sets if F), default=0)
    if need > len(L):
        raise ValueError(f"L too short: need {need} terms, got {len(L)}")
    universe = max(L[-1] if L else 0, 1)
    return FiniteFamily(universe,
                        [tuple(L[i - 1] for i in F) for F in fam.sets])


def family_order(fam: FiniteFamily) -> int:
    """Order of the family as a tree of increasing enumerations."""
    if not fam.is_hereditary():
        raise ValueError("family_order requires a hereditary family")
    return tree_order(FiniteTree(fam.sets, _checked=True))


def dilate(F, N, d: int, xi: int):
    """{n_{dk+i-1} : k in F, i in 1..d} for an increasing sequence N.

    Requires F in S_xi; the result is asserted to be in S_xi as well.
    """
    F = _check_set(F)
    if d < 1:
        raise ValueError("d must be >= 1")
    if not schreier_member(xi, F):
        raise ValueError(f"precondition failed: {set(F)} not in S_{xi}")
    N = tuple(N)
    if any(a >= b for a, b in zip(N, N[1:])):
        raise ValueError("N must be strictly increasing")
    need = max((d * k + d - 1 for k in F), default=0)
    if need > len(N):
        raise ValueError(f"N too short: need {need} terms, got {len(N)}")
    out = tuple(sorted({N[d * k + i - 2] for k in F for i in range(1, d + 1)}))
    assert schreier_member(xi, out), "dilation left the family"
    return set(out)


# ---------------------------------------------------------------------------
# .fam files: one comma-separated set per line; blank line = empty set

def load_family(path, universe=None) -> FiniteFamily:
    sets = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                sets.append(())
                continue
            sets.append(tuple(int(tok) for tok in line.split(",")))
    if universe is None:
        universe = max((max(F) for F in sets if F), default=1)
    return FiniteFamily(universe, sets)


def save_family(fam: FiniteFamily, path) -> None:
    with open(path, "w") as fh:
        for F in fam:
            fh.write(",".join(str(n) for n in F) + "\n")
