"""Finite sections of operators into the tree space, branch-isometry
certificates, asymptotic sparsity of block sequences, certified sphere
minimization, and the truncated singularity tree.
"""

from __future__ import annotations

import heapq
import itertools
import json
import os
from dataclasses import dataclass

import numpy as np

from .nodes import FiniteTree, Node, chi_decode, chi_encode, closure, \
    node_token, parse_token
from .zpq import Exponents, SparseTreeVector, chain_projection_norm, \
    lp_norm, project, znorm

SINGTREE_GUARD_M = 8
SINGTREE_GUARD_CAP = 4


class OperatorSection:
    """Images of the first M unit vectors under an operator into the
    tree space."""

    __slots__ = ("M", "columns")

    def __init__(self, columns):
        self.columns = [c if isinstance(c, SparseTreeVector)
                        else SparseTreeVector(c) for c in columns]
        self.M = len(self.columns)
        if self.M < 1:
            raise ValueError("need at least one column")

    def column(self, n: int) -> SparseTreeVector:
        """1-based column access."""
        return self.columns[n - 1]


def embed_section(M: int) -> OperatorSection:
    """Unit basis vector n maps to the unit vector at the n-th node."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return OperatorSection([SparseTreeVector({chi_decode(n): 1.0})
                            for n in range(1, M + 1)])


def hs_section(S: FiniteTree, M: int) -> OperatorSection:
    """The embedding followed by the projection onto the tree S."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return OperatorSection([project(S.nodes, col)
                            for col in embed_section(M).columns])


def apply(T: OperatorSection, a) -> SparseTreeVector:
    a = list(a)
    if len(a) > T.M:
        raise ValueError(f"coefficient length {len(a)} exceeds M={T.M}")
    out = SparseTreeVector()
    for coeff, col in zip(a, T.columns):
        if coeff:
            out = out + col.scale(coeff)
    return out


@dataclass
class IsometryReport:
    lhs: float
    rhs: float
    passed: bool


def branch_isometry_check(S: FiniteTree, sigma_prefix, a,
                          e: Exponents) -> IsometryReport:
    """Coefficients along a branch: the section must act isometrically.

    Places a_k at basis index chi(sigma|k) and compares the l_p norm of
    the coefficients with the norm of the image under the S-section.
    """
    sigma_prefix = tuple(sigma_prefix)
    a = [float(x) for x in a]
    if len(a) > len(sigma_prefix):
        raise ValueError("more coefficients than branch prefix nodes")
    idx = []
    for k in range(1, len(a) + 1):
        node = sigma_prefix[:k]
        if node not in S:
            raise ValueError(f"branch node {node_token(node)} is not in S")
        idx.append(chi_encode(node))
    M = max(idx)
    coeffs = [0.0] * M
    for n, coeff in zip(idx, a):
        coeffs[n - 1] = coeff
    rhs = znorm(e, apply(hs_section(S, M), coeffs))
    # deepest-first: the same accumulation order as the norm DP, so the
    # two sides agree bit for bit
    lhs = lp_norm(e.p, a[::-1])
    return IsometryReport(lhs, rhs, abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs)))


# ---------------------------------------------------------------------------
# block sequences and asymptotic sparsity

class BlockSequenceData:
    """A finite block sequence: successive supports disjoint and ordered
    by the chi enumeration, with a declared norm bound."""

    __slots__ = ("vectors", "bound", "intervals")

    def __init__(self, vectors, bound: float = 2.0):
        self.vectors = [v if isinstance(v, SparseTreeVector)
                        else SparseTreeVector(v) for v in vectors]
        self.bound = float(bound)
        self.intervals = []
        for v in self.vectors:
            if not len(v):
                raise ValueError("zero vector in block sequence")
            ks = sorted(chi_encode(s) for s in v.support)
            self.intervals.append((ks[0], ks[-1]))
        for (_, hi), (lo, _) in zip(self.intervals, self.intervals[1:]):
            if lo <= hi:
                raise ValueError(
                    f"not a block sequence: chi intervals overlap ({hi} >= {lo})")

    def __len__(self):
        return len(self.vectors)

    def check_bounds(self, e: Exponents) -> bool:
        return all(znorm(e, v) <= self.bound * (1 + 1e-12)
                   for v in self.vectors)


def _maximal_chains(vectors):
    """Maximal chains of the joint support closure, as node lists.

    Any branch of the full tree agrees with one of these on every
    support, so branch quantifiers reduce to this finite list.
    """
    support = set()
    for v in vectors:
        support |= v.support
    tree = closure(support)
    if not len(tree):
        return []
    members = set(tree.nodes)
    chains = []
    for s in tree:
        # leaves only
        if not any(t[:-1] == s for t in members if t):
            chains.append([s[:k] for k in range(len(s) + 1)])
    return chains


def sparsity_check(data: BlockSequenceData, e: Exponents):
    """At most one index n >= k may project mass >= 2^-k on any branch.

    Returns (True, None) or (False, witness) where the witness names the
    level k, the chain, and the offending vector indices (1-based).
    """
    vectors = data.vectors if isinstance(data, BlockSequenceData) else list(data)
    if not vectors:
        return True, None
    chains = _maximal_chains(vectors)
    projs = [[chain_projection_norm(e, chain, v) for v in vectors]
             for chain in chains]
    for k in range(1, len(vectors) + 1):
        thr = 2.0 ** (-k)
        for chain, row in zip(chains, projs):
            hits = [n for n in range(k, len(vectors) + 1) if row[n - 1] >= thr]
            if len(hits) > 1:
                return False, {"k": k, "chain": chain, "indices": hits}
    return True, None


@dataclass
class GreedyResult:
    indices: list
    short: bool


def greedy_sparse_subsequence(data: BlockSequenceData, e: Exponents,
                              target_len: int) -> GreedyResult:
    """Left-to-right greedy: accept a vector iff the selected
    subsequence (re-indexed) still passes the sparsity check."""
    if target_len < 0:
        raise ValueError("target_len must be >= 0")
    chosen = []
    for i in range(len(data)):
        if len(chosen) == target_len:
            break
        candidate = chosen + [i]
        ok, _ = sparsity_check([data.vectors[j] for j in candidate], e)
        if ok:
            chosen = candidate
    return GreedyResult(chosen, len(chosen) < target_len)


# ---------------------------------------------------------------------------
# sphere minimization

@dataclass
class MinRatioResult:
    lo: float
    hi: float
    certified: bool


def _section_norm(T, idx, a, e):
    return znorm(e, apply(T, _scatter(idx, a, T.M)))


def _scatter(idx, a, M):
    out = [0.0] * M
    for n, coeff in zip(idx, a):
        out[n - 1] = coeff
    return out


def min_ratio(T: OperatorSection, span_indices, e: Exponents,
              mode: str = "certified", tol: float = 1e-3,
              seed: int = 0, restarts: int = 32) -> MinRatioResult:
    """Bracket the minimum of ||T x|| over the unit l_p sphere of the
    coordinates in span_indices.

    Certified mode (dimension <= 3): branch-and-bound over the cube
    surface with the Lipschitz bound ||T a - T b|| <= L ||a - b||_p,
    L = (max column norm) * d^(1-1/p); bracket width <= tol.
    Heuristic mode: seeded random-restart coordinate descent; the lower
    end is not certified and is reported as 0.
    """
    idx = sorted(set(int(n) for n in span_indices))
    if not idx or idx[-1] > T.M:
        raise ValueError("span indices must be non-empty and <= M")
    d = len(idx)
    p = e.p

    if d == 1:
        v = znorm(e, T.column(idx[0]))
        return MinRatioResult(v, v, True)

    cols = [T.column(n) for n in idx]
    if all(not len(c) for c in cols):
        return MinRatioResult(0.0, 0.0, True)

    def f(a):
        nrm = lp_norm(p, a)
        return _section_norm(T, idx, [x / nrm for x in a], e)

    if mode == "heuristic":
        rng = np.random.default_rng(seed)
        best = np.inf
        for _ in range(restarts):
            a = rng.standard_normal(d)
            a /= np.linalg.norm(a, ord=p) if p != 1 else np.abs(a).sum()
            step = 0.5
            val = f(list(a))
            while step > 1e-6:
                improved = False
                for j in range(d):
                    for sgn in (1.0, -1.0):
                        b = a.copy()
                        b[j] += sgn * step
                        cand = f(list(b))
                        if cand < val - 1e-15:
                            a, val, improved = b, cand, True
                if not improved:
                    step /= 2
            best = min(best, val)
        return MinRatioResult(0.0, best, False)

    if mode != "certified":
        raise ValueError(f"unknown mode {mode!r}")
    if d > 3:
        raise ValueError("certified mode supports dimension <= 3")

    L = max(znorm(e, c) for c in cols) * d ** (1.0 - 1.0 / p)
    if L == 0.0:
        return MinRatioResult(0.0, 0.0, True)

    # branch and bound over the faces x_j = +1 of the cube surface
    # (antipodal symmetry: the norm is even).  A surface point u has
    # ||u||_p >= 1, so normalized points u/||u|| and v/||v|| are within
    # 2 ||u - v||_p of each other.
    def cell_point(face, center):
        a = list(center)
        a.insert(face, 1.0)
        return a

    heap = []
    counter = itertools.count()
    hi = np.inf
    init_half = 1.0
    for face in range(d):
        center = (0.0,) * (d - 1)
        val = f(cell_point(face, center))
        hi = min(hi, val)
        radius = 2.0 * lp_norm(p, [init_half] * (d - 1))
        heapq.heappush(heap, (val - L * radius, next(counter),
                              face, center, init_half, val))
    lo = min(item[0] for item in heap) if heap else 0.0
    while heap:
        bound, _, face, center, half, _ = heapq.heappop(heap)
        lo = max(bound, 0.0)
        if hi - lo <= tol:
            break
        # split the cell into 2^(d-1) children
        for offs in itertools.product((-half / 2, half / 2), repeat=d - 1):
            c = tuple(x + o for x, o in zip(center, offs))
            val = f(cell_point(face, c))
            hi = min(hi, val)
            radius = 2.0 * lp_norm(p, [half / 2] * (d - 1))
            heapq.heappush(heap, (val - L * radius, next(counter),
                                  face, c, half / 2, val))
    else:
        lo = hi
    return MinRatioResult(max(lo, 0.0), hi, True)


# ---------------------------------------------------------------------------
# singularity tree

@dataclass
class SingTreeResult:
    tree: FiniteTree
    order: int
    flags: dict  # node -> "certified" | "heuristic" | "boundary"


def _node_ok(T, ls, e, thr, seed):
    """Decide min ||T x|| >= thr over the span of basis indices ls.

    Returns (ok, certified, boundary)."""
    d = len(ls)
    # cheap certified upper bounds first: uniform and single-coordinate
    probes = [[0.0] * i + [1.0] + [0.0] * (d - i - 1) for i in range(d)]
    probes.append([d ** (-1.0 / e.p)] * d)
    for a in probes:
        if _section_norm(T, ls, a, e) < thr - 1e-12:
            return False, True, False
    if d <= 3:
        tol = 1e-3
        while True:
            r = min_ratio(T, ls, e, mode="certified", tol=tol)
            if r.lo >= thr - 1e-12:
                return True, True, False
            if r.hi < thr - 1e-12:
                return False, True, False
            if tol <= 1e-4:
                # bracket pinned onto the threshold: exact-equality case
                return True, True, True
            tol /= 10.0
    r = min_ratio(T, ls, e, mode="heuristic", seed=seed)
    return r.hi >= thr - 1e-12, False, False


def sing_tree(T: OperatorSection, m: int, universe: int, depth_cap: int,
              e: Exponents, seed: int = 0) -> SingTreeResult:
    """Truncation of the singularity tree: increasing sequences
    (n_1 < ... < n_k) such that every increasing (l_1 < ... < l_d),
    d <= k, with n_i <= l_i <= universe keeps min ||T x|| / ||x||_p
    over the corresponding span at least 1/m.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    M = min(universe, T.M)
    if (universe > SINGTREE_GUARD_M or depth_cap > SINGTREE_GUARD_CAP) \
            and os.environ.get("SSRANK_GUARD_OVERRIDE") != "1":
        raise ValueError(
            f"sing_tree guard: universe <= {SINGTREE_GUARD_M} and cap <= "
            f"{SINGTREE_GUARD_CAP} (set SSRANK_GUARD_OVERRIDE=1 to lift)")
    thr = 1.0 / m
    nodes = {(): "certified"}
    level = [()]
    for depth in range(1, depth_cap + 1):
        nxt = []
        for base in level:
            lo = base[-1] + 1 if base else 1
            for n_new in range(lo, M + 1):
                cand = base + (n_new,)
                # only d = depth is new; smaller d was checked on the parent
                ok, certified, boundary = True, True, False
                for ls in _increasing_tuples(cand, M):
                    res = _node_ok(T, ls, e, thr, seed)
                    certified = certified and res[1]
                    boundary = boundary or res[2]
                    if not res[0]:
                        ok = False
                        break
                if ok:
                    nodes[cand] = ("boundary" if boundary
                                   else "certified" if certified
                                   else "heuristic")
                    nxt.append(cand)
        level = nxt
        if not level:
            break
    tree = FiniteTree(nodes, _checked=True)
    depth = max((len(s) for s in nodes), default=-1)
    return SingTreeResult(tree, depth + 1, nodes)


def _increasing_tuples(n, M):
    """All increasing l with n_i <= l_i <= M (same length as n)."""
    d = len(n)

    def rec(i, lo):
        if i == d:
            yield ()
            return
        for l in range(max(n[i], lo), M + 1):
            for rest in rec(i + 1, l + 1):
                yield (l,) + rest

    yield from rec(0, 0)


# ---------------------------------------------------------------------------
# .op.json files

def load_section(path) -> OperatorSection:
    with open(path) as fh:
        doc = json.load(fh)
    cols = [SparseTreeVector({parse_token(tok): val
                              for tok, val in colmap.items()})
            for colmap in doc["columns"]]
    if len(cols) != doc["M"]:
        raise ValueError(f"{path}: M={doc['M']} but {len(cols)} columns")
    return OperatorSection(cols)


def save_section(T: OperatorSection, path) -> None:
    doc = {"M": T.M,
           "columns": [{node_token(s): v for s, v in
                        sorted(c.entries.items(),
                               key=lambda kv: chi_encode(kv[0]))}
                       for c in T.columns]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
