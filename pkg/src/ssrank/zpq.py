"""Sparse vectors on the node tree and the exact James-tree-type norm:
the supremum over families of pairwise incomparable segments of the
l_q sum of per-segment l_p masses.

The norm is computed by a linear dynamic program over the support
closure.  With g(t) the best p-mass of a single segment whose minimal
node is t and h(t) the best q-power total inside the subtree at t:

    g(t) = |z(t)|^p + max(0, max_children g)
    h(t) = max(g(t)^(q/p), sum_children h)        norm = h(root)^(1/q)

A family either uses a segment starting at t — which excludes every
other segment from t's subtree, since that segment's minimal node would
be comparable with t — or splits over the children; the two cases are
exactly the two arguments of the max in h.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels
from .nodes import (Segment, chi_encode, closure, comparable, node_token,
                    parse_token)

BRUTE_GUARD = 12


class Exponents:
    """The norm parameters, 1 <= p <= q."""

    __slots__ = ("p", "q")

    def __init__(self, p: float, q: float):
        p, q = float(p), float(q)
        if not 1.0 <= p <= q:
            raise ValueError(f"need 1 <= p <= q, got p={p}, q={q}")
        self.p = p
        self.q = q

    def __repr__(self):
        return f"Exponents(p={self.p}, q={self.q})"


class SparseTreeVector:
    """Finitely supported map node -> value; zeros are dropped."""

    __slots__ = ("entries",)

    def __init__(self, entries=()):
        items = entries.items() if isinstance(entries, dict) else entries
        self.entries = {}
        for s, v in items:
            s = tuple(s)
            v = float(v)
            if v != 0.0:
                self.entries[s] = self.entries.get(s, 0.0) + v
        self.entries = {s: v for s, v in self.entries.items() if v != 0.0}

    @property
    def support(self):
        return set(self.entries)

    def __getitem__(self, s) -> float:
        return self.entries.get(tuple(s), 0.0)

    def __len__(self):
        return len(self.entries)

    def __add__(self, other):
        out = dict(self.entries)
        for s, v in other.entries.items():
            out[s] = out.get(s, 0.0) + v
        return SparseTreeVector(out)

    def scale(self, c: float):
        return SparseTreeVector({s: c * v for s, v in self.entries.items()})

    def __eq__(self, other):
        return (isinstance(other, SparseTreeVector)
                and self.entries == other.entries)

    def __repr__(self):
        items = ", ".join(f"{node_token(s)}={v:g}"
                          for s, v in sorted(self.entries.items(),
                                             key=lambda kv: chi_encode(kv[0])))
        return f"SparseTreeVector({items})"


def _closure_arrays(z: SparseTreeVector):
    """Support closure in chi order, parent indices, values."""
    tree = closure(z.support)
    nodes = tree.nodes  # chi-sorted: parents precede children
    index = {s: i for i, s in enumerate(nodes)}
    parent = np.empty(len(nodes), dtype=np.int32)
    vals = np.empty(len(nodes), dtype=np.float64)
    for i, s in enumerate(nodes):
        parent[i] = index[s[:-1]] if s else -1
        vals[i] = z[s]
    return nodes, parent, vals


def znorm(e: Exponents, z: SparseTreeVector) -> float:
    if not len(z):
        return 0.0
    _, parent, vals = _closure_arrays(z)
    g = np.empty(len(vals))
    h = np.empty(len(vals))
    return _kernels.znorm_dp(parent, vals, e.p, e.q, g, h)


def max_segment_projection(e: Exponents, z: SparseTreeVector):
    """(max over all segments of the segment l_p mass^(1/p), a segment
    attaining it).  Ties broken toward the smallest chi index of the
    segment's minimal node, then greedily down the tree."""
    if not len(z):
        raise ValueError("zero vector has no attaining segment")
    nodes, parent, vals = _closure_arrays(z)
    g = np.empty(len(vals))
    h = np.empty(len(vals))
    _kernels.znorm_dp(parent, vals, e.p, e.q, g, h)
    top = int(np.argmax(g))  # first index = smallest chi
    children = [[] for _ in nodes]
    for i in range(1, len(nodes)):
        children[parent[i]].append(i)
    seg = [top]
    cur = top
    while True:
        best = None
        for c in children[cur]:  # chi order: first best child wins ties
            if g[c] > 0 and (best is None or g[c] > g[best]):
                best = c
        if best is None or g[best] <= 0:
            break
        seg.append(best)
        cur = best
    while len(seg) > 1 and vals[seg[0]] == 0.0:
        seg.pop(0)  # leading zero coordinates contribute nothing
    return float(g[top]) ** (1.0 / e.p), Segment(nodes[i] for i in seg)


def attaining_family(e: Exponents, z: SparseTreeVector):
    """A family of pairwise incomparable segments attaining the norm.

    Backtracks the DP: at each node either the single-segment option or
    the children split won, recursing accordingly.
    """
    if not len(z):
        return []
    nodes, parent, vals = _closure_arrays(z)
    g = np.empty(len(vals))
    h = np.empty(len(vals))
    _kernels.znorm_dp(parent, vals, e.p, e.q, g, h)
    children = [[] for _ in nodes]
    for i in range(1, len(nodes)):
        children[parent[i]].append(i)
    out = []

    def descend(i):
        # best segment whose minimal node is i
        seg = [i]
        cur = i
        while True:
            best = None
            for c in children[cur]:
                if g[c] > 0 and (best is None or g[c] > g[best]):
                    best = c
            if best is None:
                break
            seg.append(best)
            cur = best
        out.append(Segment(nodes[j] for j in seg))

    def walk(i):
        if g[i] ** (e.q / e.p) >= sum(h[c] for c in children[i]):
            if g[i] > 0:
                descend(i)
        else:
            for c in children[i]:
                if h[c] > 0:
                    walk(c)

    walk(0)
    return out


def _all_segments(nodes):
    """Every non-empty segment inside the node set, as index tuples."""
    index = {s: i for i, s in enumerate(nodes)}
    children = {s: [] for s in nodes}
    for s in nodes:
        if s and s[:-1] in children:
            children[s[:-1]].append(s)
    segs = []

    def walk(path):
        segs.append(tuple(index[s] for s in path))
        for c in children[path[-1]]:
            walk(path + [c])

    for s in nodes:
        walk([s])
    return segs


def znorm_bruteforce(e: Exponents, z: SparseTreeVector) -> float:
    """Oracle: enumerate every family of pairwise incomparable segments."""
    if not len(z):
        return 0.0
    nodes, _, vals = _closure_arrays(z)
    if len(nodes) > BRUTE_GUARD and os.environ.get("SSRANK_GUARD_OVERRIDE") != "1":
        raise ValueError(
            f"znorm_bruteforce guard: closure has {len(nodes)} > "
            f"{BRUTE_GUARD} nodes (set SSRANK_GUARD_OVERRIDE=1 to lift)")
    segs = _all_segments(nodes)
    masses = [sum(abs(vals[i]) ** e.p for i in seg) ** (e.q / e.p)
              for seg in segs]
    seg_nodes = [frozenset(seg) for seg in segs]
    incomp = [[not any(comparable(nodes[i], nodes[j])
                       for i in seg_nodes[a] for j in seg_nodes[b])
               for b in range(len(segs))] for a in range(len(segs))]
    best = 0.0

    def search(start, chosen, total):
        nonlocal best
        if total > best:
            best = total
        for a in range(start, len(segs)):
            if all(incomp[a][b] for b in chosen):
                chosen.append(a)
                search(a + 1, chosen, total + masses[a])
                chosen.pop()

    search(0, [], 0.0)
    return best ** (1.0 / e.q)


def project(A, z: SparseTreeVector) -> SparseTreeVector:
    A = {tuple(s) for s in A}
    return SparseTreeVector({s: v for s, v in z.entries.items() if s in A})


def chain_projection_norm(e: Exponents, c, z: SparseTreeVector) -> float:
    """l_p mass of the coordinates along a chain."""
    c = [tuple(s) for s in c]
    for i, s in enumerate(c):
        for t in c[i + 1:]:
            if not comparable(s, t):
                raise ValueError(
                    f"not a chain: {node_token(s)} vs {node_token(t)}")
    # deepest-first: the same accumulation order as the norm DP, so the
    # chain formula holds bit-exactly
    return lp_norm(e.p, [z[s] for s in sorted(set(c), key=len, reverse=True)])


def lp_norm(p: float, a) -> float:
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    return float(sum(abs(x) ** p for x in a)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# .vec files: lines `token=value`, # comments

def load_vector(path) -> SparseTreeVector:
    entries = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tok, _, val = line.partition("=")
            if not _:
                raise ValueError(f"{path}: bad line {line!r}")
            entries.append((parse_token(tok), float(val)))
    return SparseTreeVector(entries)


def save_vector(z: SparseTreeVector, path) -> None:
    with open(path, "w") as fh:
        for s in sorted(z.entries, key=chi_encode):
            fh.write(f"{node_token(s)}={z.entries[s]!r}\n")
