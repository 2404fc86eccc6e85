"""Round selection, witness construction, and verification."""

import numpy as np
import pytest

from ssrank.bignum import Value
from ssrank.construction import (AntichainFamily, ConstructionParams,
                                 Selection, SelectionExhausted, build_witness,
                                 choose_N, select, synth_family, verify)
from ssrank.operators import BlockSequenceData, sparsity_check
from ssrank.schreier import schreier_member
from ssrank.zpq import SparseTreeVector, znorm

GRID = [(p, d, t) for p in (1.0, 1.5, 2.0) for d in (0.5, 0.1)
        for t in (1.0, 2.0)]

GRID_N = {(1.0, 0.5, 1.0): 16, (1.0, 0.5, 2.0): 64,
          (1.0, 0.1, 1.0): 400, (1.0, 0.1, 2.0): 1600,
          (1.5, 0.5, 1.0): 64, (1.5, 0.5, 2.0): 512,
          (1.5, 0.1, 1.0): 8000, (1.5, 0.1, 2.0): 64000,
          (2.0, 0.5, 1.0): 256, (2.0, 0.5, 2.0): 4096,
          (2.0, 0.1, 1.0): 160000, (2.0, 0.1, 2.0): 2560000}


# ---------------------------------------------------------------------------
# parameters and N

def test_params_validation():
    par = ConstructionParams(1.5, 0.3, 2.0)
    assert par.q == 3.0
    with pytest.raises(ValueError):
        ConstructionParams(0.9, 0.5, 1.0)
    with pytest.raises(ValueError):
        ConstructionParams(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        ConstructionParams(1.0, 0.5, 0.5)


def test_choose_N_frozen_examples():
    assert choose_N(ConstructionParams(1.0, 0.5, 1.0)) == 16
    assert choose_N(ConstructionParams(2.0, 0.5, 1.0)) == 256
    assert choose_N(ConstructionParams(1.0, 2.0, 1.0)) == 2
    for key, n in GRID_N.items():
        assert choose_N(ConstructionParams(*key)) == n


def test_choose_N_minimality_and_monotonicity():
    for p, d, t in GRID:
        par = ConstructionParams(p, d, t)
        N = choose_N(par)
        bound = d / (2.0 * t)
        expo = 1.0 / par.q - 1.0 / p
        assert N ** expo <= bound * (1 + 1e-9)
        if N > 2:
            assert (N - 1) ** expo > bound * (1 - 1e-9)
    # smaller delta needs more rounds
    ns = [choose_N(ConstructionParams(1.0, d, 1.0))
          for d in (1.0, 0.5, 0.25, 0.1)]
    assert ns == sorted(ns)


# ---------------------------------------------------------------------------
# synthetic families

def test_antichain_family_law():
    par = ConstructionParams(1.0, 0.5, 1.0)
    fam = AntichainFamily(par)
    assert fam.supp_size(3) == 64
    data = fam.materialize(3)
    e = par.exponents
    for n, v in enumerate(data.vectors, start=1):
        assert len(v.support) == fam.supp_size(n)
        assert abs(znorm(e, v) - 1.0) <= 1e-12
        node = next(iter(v.support))
        assert v[node] == 2.0 ** (-n)  # uniform sibling values
    assert sparsity_check(data, e) == (True, None)
    with pytest.raises(ValueError):
        fam.materialize(20)  # materialization guard


def test_comb_family_law():
    par = ConstructionParams(1.0, 0.5, 1.0)
    data = synth_family("comb", par, 30, seed=3)
    e = par.exponents
    assert data.check_bounds(e)
    assert sparsity_check(data, e) == (True, None)
    with pytest.raises(ValueError):
        synth_family("comb", par, 0)
    with pytest.raises(ValueError):
        synth_family("comb", par, 801)
    with pytest.raises(ValueError):
        synth_family("spiral", par, 5)


def test_synth_antichain_matches_materialize():
    par = ConstructionParams(1.0, 0.5, 1.0)
    a = synth_family("antichain", par, 3)
    b = AntichainFamily(par).materialize(3)
    assert all(x == y for x, y in zip(a.vectors, b.vectors))


# ---------------------------------------------------------------------------
# selection

def test_select_first_rounds_frozen():
    par = ConstructionParams(1.0, 0.5, 1.0)
    sel = select(par, AntichainFamily(par))
    assert sel.N == 16
    assert sel.round_dict(1) == {"k": 16, "eps": 0.25,
                                 "F": {"min": 16, "max": 31, "count": 16},
                                 "mu": 1}
    r2 = sel.round_dict(2)
    assert r2["k"] == 39675208388
    assert r2["eps"] == 2.0 ** -35
    assert r2["F"]["min"] == 39675208388
    assert r2["F"]["max"] == 79350416775
    # tower scale from round 3 on
    assert isinstance(sel.round_dict(3)["k"], str)
    assert sel.explicit_F() is None


def test_select_exhausted():
    par = ConstructionParams(1.0, 2.0, 1.0)
    data = synth_family("comb", par, 5, seed=0)  # F_1 = {8..15} needs 15
    with pytest.raises(SelectionExhausted) as exc:
        select(par, data)
    assert exc.value.required == 15 and exc.value.available == 5
    with pytest.raises(TypeError):
        select(par, [1, 2, 3])


def test_select_explicit_comb():
    par = ConstructionParams(1.0, 2.0, 1.0)  # N = 2: desk-scale
    data = synth_family("comb", par, 400, seed=0)
    sel = select(par, data)
    assert sel.N == 2
    assert sel.round_dict(1) == {"k": 8, "eps": 0.25,
                                 "F": {"min": 8, "max": 15, "count": 8},
                                 "mu": 1}
    r2 = sel.round_dict(2)
    assert r2["k"] == 103 and r2["F"]["min"] == 103
    assert r2["eps"] == 2.0 ** -6
    assert sel.explicit_F() == list(range(8, 16)) + list(range(103, 206))
    # mu law recomputed: q-th root of the first block's support mass
    sizes = sum(len(v.support) for v in data.vectors[7:15])
    assert float(sel.mu(2)) == sizes ** 0.5


def test_select_round_conditions_on_grid_prefix():
    # the size and sparsity-threshold laws on the first three rounds,
    # in exact tower arithmetic
    for p, d, t in GRID[:6]:
        par = ConstructionParams(p, d, t)
        sel = select(par, AntichainFamily(par))
        for i in (1, 2, 3):
            k, eps, mu = sel.k(i), sel.eps(i), sel.mu(i)
            assert k <= sel.start(i)
            lhs = (k * eps + Value.of(2.0)) * k ** (-1.0 / p)
            rhs = mu.inv() * Value.of(2.0 ** (-i))
            assert lhs <= rhs, (p, d, t, i)


# ---------------------------------------------------------------------------
# witness

def test_witness_frozen_example():
    par = ConstructionParams(1.0, 0.5, 1.0)
    sel = select(par, AntichainFamily(par))
    w = build_witness(sel, par)
    assert float(w.a_value(1)) == 1.0 / 256.0  # (N k_1)^(-1) = 1/(16*16)
    assert abs(w.lp_norm() - 1.0) <= 1e-12
    assert w.s2_member_structural()
    assert w.explicit() is None  # round 3 alone is tower-sized


def test_witness_explicit_comb():
    par = ConstructionParams(1.0, 2.0, 1.0)
    data = synth_family("comb", par, 400, seed=0)
    sel = select(par, data)
    w = build_witness(sel, par)
    F, a = w.explicit()
    assert F == sel.explicit_F()
    assert schreier_member(2, F)
    assert abs(sum(a.values()) - 1.0) <= 1e-12  # p = 1
    assert a[8] == (2 * 8) ** -1.0 and a[103] == (2 * 103) ** -1.0


def test_witness_uniform_rounds_arithmetic():
    # N = 16 rounds of k = 16 each: a_n = 1/256 on 256 indices
    par = ConstructionParams(1.0, 0.5, 1.0)
    arrays = {}
    for name, val in (("k", 16.0), ("eps", 0.25), ("mu", 1.0)):
        arrays[name] = (np.full(16, -1, np.int32), np.full(16, val),
                        np.ones(16, np.int8))
    starts = np.array([16.0 * (i + 1) for i in range(16)])
    arrays["start"] = (np.full(16, -1, np.int32), starts,
                       np.ones(16, np.int8))
    sel = Selection(16, arrays, "explicit")
    w = build_witness(sel, par)
    F, a = w.explicit()
    assert len(F) == 256 and set(a.values()) == {1.0 / 256.0}
    assert abs(w.lp_norm() - 1.0) <= 1e-12
    assert w.s2_member_structural()


# ---------------------------------------------------------------------------
# verification

def test_verify_analytic_passes_and_closed_form():
    par = ConstructionParams(1.0, 0.5, 1.0)
    fam = AntichainFamily(par)
    sel = select(par, fam)
    rep = verify(sel, fam, par)
    assert rep.passed
    checks = rep.checks
    assert checks["s2"] is True
    assert abs(checks["lp_norm"]["value"] - 1.0) <= 1e-12
    assert all(c["ok"] for c in checks["z_norms"])
    assert all(c["ok"] for c in checks["seg_bounds"])
    # closed form: znorm(z)^q = sum k_i^(-1), dominated by rounds 1-2
    agg = checks["aggregate"]["value"]
    expect = (1.0 / 16.0 + 1.0 / 39675208388.0) ** 0.5
    assert abs(agg - expect) <= 1e-9
    final = checks["final_y_norm"]
    assert final["ok"] and final["value"] == agg / 16.0
    assert final["value"] <= 0.5


def test_closed_form_vs_dp_cross_check():
    # z = k^(-1/p) sum of k normalized sibling-block vectors has
    # znorm exactly k^(-1/q); the DP must reproduce it
    par = ConstructionParams(1.0, 0.5, 1.0)
    e = par.exponents
    ys = AntichainFamily(par).materialize(3).vectors
    k = 3
    z = SparseTreeVector()
    for y in ys:
        z = z + y
    z = z.scale(float(k) ** (-1.0 / par.p))
    closed = float(k) ** (-1.0 / par.q)
    assert abs(znorm(e, z) - closed) <= 1e-12
    # two blocks of sizes 1 and 2: znorm(z_1 + z_2)^q = 1/k_1 + 1/k_2
    z1 = ys[0]
    z2 = (ys[1] + ys[2]).scale(0.5)
    closed = (1.0 + 0.5) ** (1.0 / par.q)
    assert abs(znorm(e, z1 + z2) - closed) <= 1e-12


def test_verify_explicit_comb_passes():
    par = ConstructionParams(1.0, 2.0, 1.0)
    data = synth_family("comb", par, 400, seed=0)
    sel = select(par, data)
    rep = verify(sel, data, par)
    assert rep.passed
    assert rep.checks["norm_bound_precondition"] is True
    assert all(c["ok"] for c in rep.checks["partition_bounds"])
    doc = rep.to_json_dict()
    assert set(doc["checks"]) == {"s2", "lp_norm", "z_norms", "seg_bounds",
                                  "aggregate", "final_y_norm"}
    assert doc["pass"] is True and doc["N"] == 2
    assert doc["F"][0] == 8 and doc["a"]["8"] == 1.0 / 16.0


def test_verify_explicit_second_seed():
    par = ConstructionParams(1.0, 2.0, 1.0)
    data = synth_family("comb", par, 400, seed=1)
    rep = verify(select(par, data), data, par)
    assert rep.passed


def test_verify_adversarial_norm_bound():
    # a vector breaking the declared norm bound trips the precondition
    par = ConstructionParams(1.0, 2.0, 1.0)
    data = synth_family("comb", par, 400, seed=0)
    big = SparseTreeVector({s: 1e6 * v
                            for s, v in data.vectors[9].entries.items()})
    vectors = data.vectors[:9] + [big] + data.vectors[10:]
    bad = BlockSequenceData(vectors, bound=2.0)
    assert not bad.check_bounds(par.exponents)
    sel = select(par, bad)
    rep = verify(sel, bad, par)
    assert rep.checks["norm_bound_precondition"] is False
    assert not rep.passed


def test_report_scaling_identity():
    par = ConstructionParams(1.5, 0.5, 2.0)
    fam = AntichainFamily(par)
    sel = select(par, fam)
    rep = verify(sel, fam, par)
    agg = rep.checks["aggregate"]["value"]
    final = rep.checks["final_y_norm"]["value"]
    assert final == sel.N ** (-1.0 / par.p) * agg
    assert rep.passed and final <= par.delta


def test_report_json_structure_summarized():
    par = ConstructionParams(2.0, 0.1, 1.0)  # N = 160000: summarized
    fam = AntichainFamily(par)
    sel = select(par, fam)
    rep = verify(sel, fam, par)
    doc = rep.to_json_dict()
    assert doc["rounds"]["count"] == 160000
    assert len(doc["rounds"]["first"]) == 3
    assert doc["F"]["structural"] is True
    assert rep.passed
