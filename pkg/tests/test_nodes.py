"""Node enumeration, finite trees, and segments."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssrank.nodes import (FiniteTree, Segment, check_node, chi_decode,
                          chi_encode, closure, comparable, derivative,
                          is_prefix, load_tree, node_token, order,
                          parse_token, save_tree, segments_incomparable)

nodes_st = st.lists(st.integers(1, 5), max_size=5).map(tuple)


# ---------------------------------------------------------------------------
# chi

def test_chi_frozen_values():
    # grade order, then length, then lex
    assert chi_encode(()) == 1
    assert chi_encode((1,)) == 2
    assert chi_encode((2,)) == 3
    assert chi_encode((3,)) == 4
    assert chi_encode((1, 1)) == 5
    assert chi_encode((1, 1, 1)) == 13
    assert chi_decode(1) == ()
    assert chi_decode(5) == (1, 1)
    assert chi_decode(8) == (2, 1)


def test_chi_bijection_prefix():
    for n in range(1, 100_001):
        assert chi_encode(chi_decode(n)) == n


def test_chi_monotone_under_extension_exhaustive():
    # every proper extension has a strictly larger index
    for n in range(1, 100_001):
        s = chi_decode(n)
        if s:
            assert chi_encode(s[:-1]) < n


@given(nodes_st, st.lists(st.integers(1, 5), min_size=1, max_size=3))
def test_chi_monotone_property(s, ext):
    assert chi_encode(s) < chi_encode(s + tuple(ext))


@given(nodes_st)
def test_chi_roundtrip_property(s):
    assert chi_decode(chi_encode(s)) == s


def test_chi_rejects():
    with pytest.raises(ValueError):
        chi_decode(0)
    with pytest.raises(ValueError):
        chi_encode((0,))
    with pytest.raises(ValueError):
        chi_encode((1, -2))


# ---------------------------------------------------------------------------
# order and prefixes

def test_prefix_comparable():
    assert is_prefix((), (3, 1))
    assert is_prefix((1, 2), (1, 2))
    assert not is_prefix((1, 2), (1, 3))
    assert comparable((1,), (1, 2, 2))
    assert not comparable((1, 2), (2,))


# ---------------------------------------------------------------------------
# trees

def test_closure_examples():
    assert set(closure([(1, 1)])) == {(), (1,), (1, 1)}
    assert len(closure([])) == 0
    assert set(closure([(2,), (1, 3)])) == {(), (1,), (2,), (1, 3)}


def test_tree_validation():
    with pytest.raises(ValueError):
        FiniteTree([(1, 1)])  # missing prefixes
    t = FiniteTree([(), (1,), (1, 1)])
    assert (1,) in t and (2,) not in t


def test_derivative_examples():
    assert set(derivative(closure([(1, 1)]))) == {(), (1,)}
    assert len(derivative(FiniteTree([()]))) == 0
    assert set(derivative(closure([(2,), (1, 1)]))) == {(), (1,)}


def test_order_examples():
    assert order(FiniteTree([])) == 0
    assert order(closure([(1, 1)])) == 3
    assert order(closure([(2,), (1, 1)])) == 3


def test_order_derivative_relation(rng):
    for _ in range(200):
        supp = {tuple(int(rng.integers(1, 4))
                      for _ in range(int(rng.integers(0, 4))))
                for _ in range(int(rng.integers(1, 6)))}
        t = closure(supp)
        assert set(derivative(t).nodes) <= set(t.nodes)
        assert order(derivative(t)) == max(order(t) - 1, 0)


def test_order_recursive_oracle(rng):
    def oracle(t):
        nodes = set(t.nodes)
        if not nodes:
            return 0
        def sub(s):
            kids = [c for c in nodes if len(c) == len(s) + 1
                    and c[:len(s)] == s]
            return 1 + max((sub(c) for c in kids), default=0)
        return sub(())

    for _ in range(100):
        supp = {tuple(int(rng.integers(1, 3))
                      for _ in range(int(rng.integers(0, 5))))
                for _ in range(int(rng.integers(1, 7)))}
        t = closure(supp)
        assert order(t) == oracle(t)


# ---------------------------------------------------------------------------
# segments

def test_segment_validation():
    Segment([(1,), (1, 2), (1, 2, 1)])
    with pytest.raises(ValueError):
        Segment([])
    with pytest.raises(ValueError):
        Segment([(1,), (1, 2, 1)])  # gap
    with pytest.raises(ValueError):
        Segment([(1,), (2,)])  # not a chain


def test_segments_incomparable_examples():
    assert not segments_incomparable(Segment([(), (1,)]), Segment([(2,)]))
    assert segments_incomparable(Segment([(1,)]), Segment([(2,)]))
    assert segments_incomparable(Segment([(1, 2)]),
                                 Segment([(1, 3), (1, 3, 1)]))


def test_segments_incomparable_bruteforce(rng):
    def random_segment():
        base = tuple(int(rng.integers(1, 3))
                     for _ in range(int(rng.integers(0, 3))))
        nodes = [base]
        for _ in range(int(rng.integers(0, 3))):
            nodes.append(nodes[-1] + (int(rng.integers(1, 3)),))
        return Segment(nodes)

    for _ in range(500):
        a, b = random_segment(), random_segment()
        brute = all(not comparable(s, t) for s in a for t in b)
        assert segments_incomparable(a, b) == brute


# ---------------------------------------------------------------------------
# tokens and files

def test_token_roundtrip():
    assert node_token(()) == "e"
    assert node_token((1, 3, 2)) == "1.3.2"
    assert parse_token("e") == ()
    assert parse_token("1.3.2") == (1, 3, 2)
    with pytest.raises(ValueError):
        parse_token("1.x")


def test_tree_file_roundtrip(tmp_path):
    t = closure([(2, 1), (1, 3)])
    path = tmp_path / "t.tree"
    save_tree(t, path)
    assert load_tree(path) == t


def test_tree_file_closure_warning(tmp_path):
    path = tmp_path / "open.tree"
    path.write_text("1.1\n")
    with pytest.warns(UserWarning):
        t = load_tree(path)
    assert set(t) == {(), (1,), (1, 1)}


def test_check_node():
    assert check_node([1, 2]) == (1, 2)
    with pytest.raises(ValueError):
        check_node([1.5])
