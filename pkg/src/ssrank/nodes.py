"""Nodes of the tree of finite positive-integer sequences, the monotone
enumeration chi, finite prefix-closed trees, and segments.

A node is a plain tuple of ints >= 1; the empty tuple is the root.
chi orders nodes by grade(s) = len(s) + sum(s), then by length, then
lexicographically, and assigns indices 1, 2, 3, ...  A proper extension
raises the grade by at least 2, so chi is strictly monotone along the
extension order.
"""

from __future__ import annotations

import warnings
from functools import lru_cache
from math import comb

Node = tuple  # tuple of ints >= 1

ROOT: Node = ()


def check_node(s) -> Node:
    s = tuple(s)
    if not all(isinstance(e, int) and e >= 1 for e in s):
        raise ValueError(f"node entries must be integers >= 1: {s!r}")
    return s


def is_prefix(s: Node, t: Node) -> bool:
    """s extension-below-or-equal t."""
    return len(s) <= len(t) and t[: len(s)] == s


def comparable(s: Node, t: Node) -> bool:
    return is_prefix(s, t) or is_prefix(t, s)


# ---------------------------------------------------------------------------
# chi: grade-ordered bijection onto {1, 2, ...}

def _n_comps(m: int, length: int) -> int:
    # compositions of m into `length` parts >= 1
    if length == 0:
        return 1 if m == 0 else 0
    if m < length:
        return 0
    return comb(m - 1, length - 1)


@lru_cache(maxsize=None)
def _grade_count(g: int) -> int:
    if g == 0:
        return 1
    return sum(_n_comps(g - l, l) for l in range(1, g // 2 + 1))


_grade_bases = [0]  # prefix sums: nodes of grade < g


def _grade_base(g: int) -> int:
    while len(_grade_bases) <= g:
        gg = len(_grade_bases)
        _grade_bases.append(_grade_bases[-1] + _grade_count(gg - 1))
    return _grade_bases[g]


def chi_encode(s) -> int:
    s = check_node(s)
    if not s:
        return 1
    g = len(s) + sum(s)
    rank = _grade_base(g)
    for l in range(1, len(s)):
        rank += _n_comps(g - l, l)
    # lex rank of s among compositions of (g - len(s)) into len(s) parts
    m = g - len(s)
    for i, a in enumerate(s):
        rem = len(s) - i - 1
        for b in range(1, a):
            rank += _n_comps(m - b, rem)
        m -= a
    return rank + 1


def chi_decode(n: int) -> Node:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"chi index must be an integer >= 1: {n!r}")
    n -= 1
    g = 0
    while n >= _grade_count(g):
        n -= _grade_count(g)
        g += 1
    if g == 0:
        return ()
    length = 1
    while n >= _n_comps(g - length, length):
        n -= _n_comps(g - length, length)
        length += 1
    # unrank composition of m into `length` parts, lex order
    m = g - length
    out = []
    for i in range(length):
        rem = length - i - 1
        a = 1
        while n >= _n_comps(m - a, rem):
            n -= _n_comps(m - a, rem)
            a += 1
        out.append(a)
        m -= a
    return tuple(out)


# ---------------------------------------------------------------------------
# finite trees

class FiniteTree:
    """A finite set of nodes closed under initial segments.

    Stored sorted by chi index: canonical, parents always precede
    children in iteration order.
    """

    __slots__ = ("nodes",)

    def __init__(self, nodes, _checked=False):
        nodes = {check_node(s) for s in nodes}
        if not _checked:
            for t in nodes:
                for k in range(len(t)):
                    if t[:k] not in nodes:
                        raise ValueError(
                            f"not prefix-closed: missing {t[:k]!r} below {t!r}")
        self.nodes = tuple(sorted(nodes, key=chi_encode))

    def __contains__(self, s) -> bool:
        return tuple(s) in set(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteTree) and self.nodes == other.nodes

    def __hash__(self):
        return hash(self.nodes)

    def __repr__(self):
        return f"FiniteTree({[node_token(s) for s in self.nodes]})"


def closure(nodes) -> FiniteTree:
    """Smallest prefix-closed superset of the given nodes."""
    out = set()
    for s in nodes:
        s = check_node(s)
        for k in range(len(s) + 1):
            out.add(s[:k])
    if not nodes:
        return FiniteTree((), _checked=True)
    return FiniteTree(out, _checked=True)


def derivative(tree: FiniteTree) -> FiniteTree:
    """Nodes having a proper extension in the tree."""
    kept = set()
    for t in tree:
        for k in range(len(t)):
            kept.add(t[:k])
    return FiniteTree(kept & set(tree.nodes), _checked=True)


def order(tree: FiniteTree) -> int:
    """Least k with the k-fold derivative empty = longest chain length."""
    if not len(tree):
        return 0
    return 1 + max(len(t) for t in tree)


# ---------------------------------------------------------------------------
# segments

class Segment:
    """A convex chain: consecutive one-step extensions along one branch."""

    __slots__ = ("nodes",)

    def __init__(self, nodes):
        nodes = sorted((check_node(s) for s in nodes), key=len)
        if not nodes:
            raise ValueError("segment must be non-empty")
        for a, b in zip(nodes, nodes[1:]):
            if len(b) != len(a) + 1 or b[:-1] != a:
                raise ValueError(
                    f"not a consecutive chain: {node_token(a)} -> {node_token(b)}")
        self.nodes = tuple(nodes)

    @property
    def min_node(self) -> Node:
        return self.nodes[0]

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        return isinstance(other, Segment) and self.nodes == other.nodes

    def __hash__(self):
        return hash(self.nodes)

    def __repr__(self):
        return f"Segment({[node_token(s) for s in self.nodes]})"


def segments_incomparable(a: Segment, b: Segment) -> bool:
    """True iff every node of a is incomparable with every node of b.

    Equivalent to incomparability of the two minimal nodes: any
    comparable pair (s in a, t in b), say s below t, forces min(a)
    below t, and min(b) on t's branch is then comparable with min(a).
    """
    return not comparable(a.min_node, b.min_node)


# ---------------------------------------------------------------------------
# text format: `e` for the root, else dot-separated entries

def node_token(s: Node) -> str:
    return "e" if not s else ".".join(str(e) for e in s)


def parse_token(tok: str) -> Node:
    tok = tok.strip()
    if tok == "e":
        return ()
    try:
        entries = tuple(int(part) for part in tok.split("."))
    except ValueError:
        raise ValueError(f"bad node token: {tok!r}") from None
    return check_node(entries)


def load_tree(path) -> FiniteTree:
    """Read a .tree file (one node token per line, # comments).

    The closure of the listed nodes is returned; a warning is issued if
    the file was not already prefix-closed.
    """
    nodes = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                nodes.append(parse_token(line))
    tree = closure(nodes)
    if len(tree) != len(set(nodes)):
        warnings.warn(f"{path}: node list was not prefix-closed; closure taken")
    return tree


def save_tree(tree: FiniteTree, path) -> None:
    with open(path, "w") as fh:
        for s in tree:
            fh.write(node_token(s) + "\n")
