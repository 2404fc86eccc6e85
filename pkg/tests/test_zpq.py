"""Exact tree-space norm: DP vs oracle, norm axioms, projections."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PQ_GRID, random_vector
from ssrank.nodes import Segment, closure, comparable, segments_incomparable
from ssrank.zpq import (Exponents, SparseTreeVector, attaining_family,
                        chain_projection_norm, load_vector, lp_norm,
                        max_segment_projection, project, save_vector,
                        znorm, znorm_bruteforce)

REL = 1e-9


def close(a, b, rel=REL):
    return abs(a - b) <= rel * max(1.0, abs(b))


# ---------------------------------------------------------------------------
# basics

def test_exponents_validation():
    Exponents(1, 1)
    Exponents(1.5, 3)
    with pytest.raises(ValueError):
        Exponents(0.5, 2)
    with pytest.raises(ValueError):
        Exponents(2, 1)


def test_vector_basics():
    z = SparseTreeVector({(1,): 1.0, (2,): 0.0})
    assert len(z) == 1 and z[(2,)] == 0.0
    assert (z + SparseTreeVector({(1,): -1.0})).entries == {}
    assert z.scale(3.0)[(1,)] == 3.0


def test_znorm_frozen_examples():
    e = Exponents(1, 2)
    assert close(znorm(e, SparseTreeVector({(1,): 1, (2,): 1})),
                 math.sqrt(2))
    assert close(znorm(e, SparseTreeVector({(): 1, (1,): 1})), 2.0)
    assert close(znorm(e, SparseTreeVector({(): 0.1, (1,): 1, (2,): 1})),
                 math.sqrt(2))
    assert znorm(Exponents(2, 4), SparseTreeVector({(3, 1): -2.5})) == 2.5
    assert close(znorm(Exponents(2, 2),
                       SparseTreeVector({(): 1, (1,): 1, (2,): 1})),
                 math.sqrt(2))
    assert znorm(e, SparseTreeVector()) == 0.0


def test_bruteforce_frozen_examples():
    e = Exponents(1, 2)
    assert znorm_bruteforce(e, SparseTreeVector()) == 0.0
    assert znorm_bruteforce(e, SparseTreeVector({(1,): 3})) == 3.0
    for entries in ({(1,): 1, (2,): 1}, {(): 1, (1,): 1},
                    {(): 0.1, (1,): 1, (2,): 1}):
        z = SparseTreeVector(entries)
        assert close(znorm(e, z), znorm_bruteforce(e, z))


def test_bruteforce_guard(monkeypatch):
    monkeypatch.delenv("SSRANK_GUARD_OVERRIDE", raising=False)
    z = SparseTreeVector({(i,): 1.0 for i in range(1, 14)})
    with pytest.raises(ValueError):
        znorm_bruteforce(Exponents(1, 2), z)
    monkeypatch.setenv("SSRANK_GUARD_OVERRIDE", "1")
    assert znorm_bruteforce(Exponents(1, 1), z) == 13.0


# ---------------------------------------------------------------------------
# oracle equivalence (the full 10^4-instance run lives in the
# acceptance suite; this is the per-module smoke version)

def test_oracle_equivalence_sample(rng):
    for trial in range(500):
        p, q = PQ_GRID[trial % len(PQ_GRID)]
        e = Exponents(p, q)
        z = random_vector(rng)
        assert close(znorm(e, z), znorm_bruteforce(e, z))


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(
    st.lists(st.integers(1, 3), max_size=2).map(tuple),
    st.floats(-4, 4, allow_nan=False), max_size=5),
    st.sampled_from(PQ_GRID))
def test_oracle_equivalence_hypothesis(entries, pq):
    e = Exponents(*pq)
    z = SparseTreeVector(entries)
    assert close(znorm(e, z), znorm_bruteforce(e, z))


# ---------------------------------------------------------------------------
# norm axioms

def test_homogeneity(rng):
    for trial in range(300):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        z = random_vector(rng, max_closure=20)
        c = float(rng.normal())
        assert close(znorm(e, z.scale(c)), abs(c) * znorm(e, z))


def test_triangle(rng):
    for trial in range(300):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        z1 = random_vector(rng, max_closure=20)
        z2 = random_vector(rng, max_closure=20)
        assert znorm(e, z1 + z2) <= znorm(e, z1) + znorm(e, z2) + 1e-12


def test_unconditionality_exact(rng):
    for trial in range(300):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        z = random_vector(rng, max_closure=20)
        flipped = SparseTreeVector(
            {s: v * (1 if rng.random() < 0.5 else -1)
             for s, v in z.entries.items()})
        assert znorm(e, flipped) == znorm(e, z)


def test_projection_contraction(rng):
    for trial in range(300):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        z = random_vector(rng, max_closure=20)
        A = {s for s in z.support if rng.random() < 0.5}
        assert znorm(e, project(A, z)) <= znorm(e, z) + 1e-12


def test_chain_formula_exact(rng):
    # a vector supported on a chain has norm exactly the chain l_p sum
    for trial in range(300):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        base = tuple(int(rng.integers(1, 3))
                     for _ in range(int(rng.integers(0, 3))))
        chain = [base]
        for _ in range(int(rng.integers(0, 4))):
            chain.append(chain[-1] + (int(rng.integers(1, 3)),))
        z = random_vector(rng, max_closure=20)
        c = [s for s in chain]
        assert chain_projection_norm(e, c, z) == znorm(e, project(c, z))


def test_incomparable_additivity_exact(rng):
    for trial in range(300):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        # hang independent random vectors under distinct root children
        parts = []
        for j in range(int(rng.integers(2, 5))):
            sub = random_vector(rng, max_nodes=4, max_closure=8, nonzero=True)
            parts.append(SparseTreeVector(
                {(10 + j,) + s: v for s, v in sub.entries.items()}))
        total = SparseTreeVector()
        for part in parts:
            total = total + part
        lhs = znorm(e, total) ** e.q
        rhs = sum(znorm(e, part) ** e.q for part in parts)
        assert close(lhs, rhs, rel=1e-12)


def test_domination(rng):
    for trial in range(300):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        z = random_vector(rng, max_closure=20)
        assert znorm(e, z) <= lp_norm(e.p, z.entries.values()) * (1 + 1e-12)


# ---------------------------------------------------------------------------
# projections and segments

def test_project_examples():
    z = SparseTreeVector({(): 1, (1,): 2})
    assert project({(1,)}, z).entries == {(1,): 2.0}
    assert len(project(set(), z)) == 0
    assert project({(), (1,), (2,)}, z) == z


def test_chain_projection_examples():
    z = SparseTreeVector({(): 0.1, (1,): 1, (2,): 1})
    assert close(chain_projection_norm(Exponents(1, 2), [(), (1,)], z), 1.1)
    z2 = SparseTreeVector({(): 3, (1,): 4})
    assert close(chain_projection_norm(Exponents(2, 4), [(), (1,)], z2), 5.0)
    assert chain_projection_norm(Exponents(1, 2), [(5,)], z) == 0.0
    with pytest.raises(ValueError):
        chain_projection_norm(Exponents(1, 2), [(1,), (2,)], z)


def test_max_segment_examples():
    e = Exponents(1, 2)
    val, seg = max_segment_projection(
        e, SparseTreeVector({(): 0.1, (1,): 1, (2,): 1}))
    assert close(val, 1.1) and seg == Segment([(), (1,)])
    val, seg = max_segment_projection(e, SparseTreeVector({(3, 1): -2.0}))
    assert val == 2.0 and seg == Segment([(3, 1)])
    # chi-order tie-break between equal siblings
    val, seg = max_segment_projection(
        e, SparseTreeVector({(1,): 1, (2,): 1}))
    assert val == 1.0 and seg == Segment([(1,)])
    with pytest.raises(ValueError):
        max_segment_projection(e, SparseTreeVector())


def test_max_segment_dominates_random_segments(rng):
    for trial in range(200):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        z = random_vector(rng, max_closure=20, nonzero=True)
        val, seg = max_segment_projection(e, z)
        assert close(chain_projection_norm(e, list(seg), z), val)
        nodes = sorted(closure(z.support).nodes)
        for _ in range(20):
            i = int(rng.integers(0, len(nodes)))
            chain = [nodes[i]]
            while rng.random() < 0.5:
                kids = [t for t in nodes if t[:-1] == chain[-1] and t]
                if not kids:
                    break
                chain.append(kids[int(rng.integers(0, len(kids)))])
            assert chain_projection_norm(e, chain, z) <= val * (1 + 1e-12)


def test_attaining_family(rng):
    for trial in range(200):
        e = Exponents(*PQ_GRID[trial % len(PQ_GRID)])
        z = random_vector(rng, max_closure=20)
        fam = attaining_family(e, z)
        for i, a in enumerate(fam):
            for b in fam[i + 1:]:
                assert segments_incomparable(a, b)
        total = sum(chain_projection_norm(e, list(s), z) ** e.q
                    for s in fam)
        assert close(total ** (1.0 / e.q) if total else 0.0, znorm(e, z))


# ---------------------------------------------------------------------------
# lp_norm and files

def test_lp_norm_examples():
    assert lp_norm(1, (0.5, 0.5)) == 1.0
    assert lp_norm(2, (3, 4)) == 5.0
    assert close(lp_norm(1.5, (1, 1)), 2.0 ** (2.0 / 3.0))
    with pytest.raises(ValueError):
        lp_norm(0.5, (1,))


def test_vector_file_roundtrip(tmp_path, rng):
    z = random_vector(rng, max_closure=20, nonzero=True)
    path = tmp_path / "z.vec"
    save_vector(z, path)
    assert load_vector(path) == z
    bad = tmp_path / "bad.vec"
    bad.write_text("1.2\n")
    with pytest.raises(ValueError):
        load_vector(bad)
