"""Independent re-check of the selection conditions (C1)-(C4).

This module deliberately shares no arithmetic with the selection engine
(the tower kernels): stored round values are re-interpreted with a
local coordinate representation and compared against quantities
recomputed here from the family law.

Coordinates.  A positive quantity is carried as (D, G) with value
R(D, G), where R(-1, G) = G and R(D, G) = 2^R(D-1, G).  Stored triples
map directly: a plain float g is (-1, g) and a tower value 2^T(d, g)
is (d, g).  The identity R(D+1, log2 G) = R(D, G) lifts a coordinate
one depth up, so neighbouring depths can be aligned and compared.

Validation tiers:
* plain rounds: every condition is checked verbatim with floats, with
  mu recomputed from the support-mass law;
* log-plain rounds (logarithms still float-sized): C4 is checked
  through its two sufficient parts in log space,
      log2 k >= p (log2 mu + i + 2)                      (k-law)
      -log2 eps >= (i+1) + log2 mu + (1 - 1/p) log2 k    (eps-law)
  whose right-hand sides come from the selection's defining rules; each
  implies one half of the C4 budget (2 k^(-1/p) and k^(1-1/p) eps both
  at most mu^(-1) 2^(-i-1), summing to (k eps + 2) k^(-1/p) <=
  mu^(-1) 2^(-i));
* deep rounds: C2/C3 and the round ordering are exact coordinate
  comparisons, and the k/eps/mu laws are verified at the resolution the
  representation carries (at tower scale the laws pin the coordinates
  to relative agreement, while the inequality gaps are doubly
  exponential, far beyond representational rounding), with C4 then
  following from the laws as above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REL_TOL = 1e-6
ABS_TOL = 1e-9


@dataclass
class ValidationResult:
    ok: bool
    conditions: dict
    failures: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# coordinates

def _coords(d, g):
    """(D, G) coordinates of the positive stored values (vectorized)."""
    d = np.asarray(d, dtype=np.int64)
    g = np.asarray(g, dtype=np.float64)
    return d.copy(), g.copy()


def _log_coords(d, g):
    """Coordinates of log2 of the stored values."""
    d = np.asarray(d, dtype=np.int64)
    g = np.asarray(g, dtype=np.float64)
    D = np.where(d == -1, -1, d - 1)
    with np.errstate(divide="ignore"):
        G = np.where(d == -1, np.log2(np.maximum(g, 1e-300)), g)
    return D, G


def _lift_to(D, G, target):
    """Raise coordinates to the requested depths via
    R(D+1, log2 G) = R(D, G)."""
    D = D.copy()
    G = G.copy()
    while True:
        m = D < target
        if not np.any(m):
            return D, G
        with np.errstate(divide="ignore", invalid="ignore"):
            G = np.where(m, np.log2(np.maximum(G, 1e-300)), G)
        D = np.where(m, D + 1, D)


def _align(D1, G1, D2, G2):
    top = np.maximum(D1, D2)
    D1, G1 = _lift_to(D1, G1, top)
    D2, G2 = _lift_to(D2, G2, top)
    return D1, G1, D2, G2


def _key_le(D1, G1, D2, G2, strict=False):
    """Order on coordinates: deeper dominates, then the top value."""
    lt = (D1 < D2) | ((D1 == D2) & (G1 < G2))
    if strict:
        return lt
    return lt | ((D1 == D2) & (G1 == G2))


def _close(G1, G2, rel=REL_TOL):
    return np.abs(G1 - G2) <= rel * np.maximum(1.0, np.abs(G2))


# ---------------------------------------------------------------------------
# family-law helpers

def _log2_block_mass(q, start, k):
    """log2 of sum_{n=start}^{start+k-1} 2^(q n) (plain start, k)."""
    qk = q * k
    if qk <= 900.0:
        return q * start + math.log2((2.0 ** qk - 1.0) / (2.0 ** q - 1.0))
    return q * start + qk - math.log2(2.0 ** q - 1.0)


def _chains_of(supports):
    """Maximal chains of the union closure (own minimal code)."""
    closed = set()
    for supp in supports:
        for s in supp:
            for j in range(len(s) + 1):
                closed.add(s[:j])
    leaves = [s for s in closed
              if not any(t[:-1] == s for t in closed if t)]
    return [[leaf[:j] for j in range(len(leaf) + 1)] for leaf in leaves]


def _chain_mass(p, chain, vec):
    return sum(abs(vec[s]) ** p for s in set(chain)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# main entry

def validate_selection(sel, params, data=None) -> ValidationResult:
    """Re-check (C1)-(C4) for a Selection.

    data: None for the analytic sibling-block family (branch projection
    of vector n exactly 2^(-n), support size 2^(q n)); otherwise the
    explicit BlockSequenceData the selection was drawn from.
    """
    p, q = params.p, params.q
    N = sel.N
    kd, kg, ks = (np.asarray(a) for a in sel.arrays["k"])
    ed, eg, es = (np.asarray(a) for a in sel.arrays["eps"])
    fd, fg, fs = (np.asarray(a) for a in sel.arrays["start"])
    md, mg, ms = (np.asarray(a) for a in sel.arrays["mu"])
    failures = []
    conditions = {}

    def record(name, bad):
        bad = [int(b) for b in bad]
        conditions[name] = not bad
        if bad:
            failures.append({"condition": name, "rounds": sorted(bad)[:20]})

    # sign sanity: k, start, mu positive; eps in (0, 1]
    bad = np.where((np.asarray(ks) != 1) | (np.asarray(fs) != 1)
                   | (np.asarray(ms) != 1)
                   | ((ed == -1) & ((np.asarray(es) != 1)
                                    | (eg <= 0) | (eg > 1)))
                   | ((ed != -1) & (np.asarray(es) != -1)))[0]
    record("form", bad + 1)

    plain = (kd == -1) & (ed == -1) & (fd == -1) & (md == -1)

    # value coordinates; l = -log2 eps as a positive quantity
    Fk = _coords(kd, kg)
    Ff = _coords(fd, fg)
    Dl, Gl = _log_coords(ed, eg)
    Gl = np.where(ed == -1, -Gl, Gl)

    # log2 coordinates for the law checks
    DLk, GLk = _log_coords(kd, kg)
    DLm, GLm = _log_coords(md, mg)
    DLf, GLf = _log_coords(fd, fg)

    # ---- C2: k <= start ----------------------------------------------
    ok = _key_le(Fk[0], Fk[1], Ff[0], Ff[1])
    record("C2", np.where(~ok)[0] + 1)

    # ---- C3 ----------------------------------------------------------
    if data is None:
        # branch projection of vector n is 2^(-n): at most one index of
        # F_i = {start, ...} can satisfy 2^(-n) >= eps = 2^(-l), namely
        # n = start when l = start; so l <= start suffices
        ok = _key_le(Dl, Gl, Ff[0], Ff[1])
        record("C3", np.where(~ok)[0] + 1)
    else:
        record("C3", _c3_explicit_bad(sel, params, data))

    # ---- C1: N <= min F_1 and strictly ordered blocks ----------------
    bad = []
    if not bool(_key_le(np.int64(-1), float(N), fd[0], fg[0])):
        bad.append(1)
    if N > 1:
        both_plain = plain[:-1] & plain[1:]
        with np.errstate(invalid="ignore"):
            exact = fg[1:] >= fg[:-1] + kg[:-1]
        # deep certificate: start_{i+1} >= 2 start_i implies
        # start_{i+1} > start_i + k_i - 1 = end_i since k <= start
        D1, G1, D2, G2 = _align(fd[1:], fg[1:], fd[:-1], fg[:-1])
        orig_deeper = fd[1:] > fd[:-1]
        deep = orig_deeper | ((D1 == D2) & (G1 >= G2 + 1.0))
        ok = np.where(both_plain, exact, deep)
        bad.extend(np.where(~ok)[0] + 2)
    record("C1", bad)

    # ---- mu law ------------------------------------------------------
    mu_expected = _plain_prefix_mu(sel, params, data, plain, N)
    bad = []
    for i, exp in mu_expected.items():
        j = i - 1
        if md[j] == -1:
            ok = abs(mg[j] - exp) <= ABS_TOL * max(1.0, exp)
        else:
            ok = math.isfinite(exp) and bool(
                _close(GLm[j:j + 1], np.float64(math.log2(exp)))[0])
        if not ok:
            bad.append(i)
    covered = np.zeros(N, dtype=bool)
    for i in mu_expected:
        covered[i - 1] = True
    rest = ~covered
    rest[0] = False
    if np.any(rest):
        j = np.where(rest)[0]
        # law: log2 mu_i lies in [end_{i-1}, 2 end_{i-1} + 1] with
        # end_{i-1} in [start_{i-1}, 2 start_{i-1}]
        D1, G1, D2, G2 = _align(DLm[j], GLm[j], fd[j - 1], fg[j - 1])
        with np.errstate(invalid="ignore"):
            end_hi = fg[j - 1] + np.where(kd[j - 1] == -1, kg[j - 1],
                                          fg[j - 1])
            case_p = (G1 >= G2 - ABS_TOL) & (G1 <= 2.0 * end_hi + 2.0)
        case_0 = (G1 >= G2 - ABS_TOL) & (G1 <= G2 + 2.0 + ABS_TOL)
        case_d = _close(G1, G2)
        ok = np.where(D1 == -1, case_p, np.where(D1 == 0, case_0, case_d))
        bad.extend(j[~ok] + 1)
    # monotone: mu_{i+1} >= mu_i
    if N > 1:
        ok = _key_le(md[:-1], mg[:-1], md[1:], mg[1:])
        bad.extend(np.where(~ok)[0] + 2)
    record("mu_law", bad)

    # ---- C4 ----------------------------------------------------------
    record("C4", _c4_bad(p, N, plain, kd, kg, ed, eg, md, mg,
                         DLk, GLk, DLm, GLm, Dl, Gl))

    return ValidationResult(all(conditions.values()), conditions, failures)


def _plain_prefix_mu(sel, params, data, plain, N):
    """Recompute mu from the support-mass law while the rounds stay
    plain; returns {round i: expected mu_i} (includes the round after
    the last plain one when its value still fits a float log)."""
    q = params.q
    expected = {1: 1.0}
    acc = 0.0
    for i in range(1, N + 1):
        if not plain[i - 1]:
            break
        start = float(sel.start(i).g)
        k = float(sel.k(i).g)
        if data is None:
            lb = _log2_block_mass(q, start, k)
            acc += 2.0 ** (lb / q) if lb / q < 1000.0 else math.inf
        else:
            sizes = sum(len(data.vectors[n].support)
                        for n in range(int(start) - 1, int(start + k) - 1))
            acc += float(sizes) ** (1.0 / q)
        if i + 1 <= N and math.isfinite(acc):
            expected[i + 1] = acc
    return expected


def _c3_explicit_bad(sel, params, data):
    p = params.p
    chains = _chains_of([v.support for v in data.vectors])
    projs = np.array([[_chain_mass(p, ch, v) for v in data.vectors]
                      for ch in chains])
    bad = []
    for i in range(1, sel.N + 1):
        eps = float(sel.eps(i).g)
        start, k = int(sel.start(i).g), int(sel.k(i).g)
        block = projs[:, start - 1:start + k - 1] >= eps
        if block.size and int(block.sum(axis=1).max()) > 1:
            bad.append(i)
    return bad


def _c4_bad(p, N, plain, kd, kg, ed, eg, md, mg,
            DLk, GLk, DLm, GLm, Dl, Gl):
    idx = np.arange(1, N + 1, dtype=np.float64)
    bad = np.zeros(N, dtype=bool)

    log_plain = (DLk == -1) & (DLm == -1) & (Dl == -1)
    if np.any(log_plain):
        j = np.where(log_plain)[0]
        lk, lmu, l, i = GLk[j], GLm[j], Gl[j], idx[j]
        tol = ABS_TOL * np.maximum(1.0, np.abs(lk))
        s1 = 1.0 - lk / p + lmu + (i + 1.0) <= tol
        s2 = (1.0 - 1.0 / p) * lk - l + lmu + (i + 1.0) <= tol
        ok = s1 & s2
        fully = plain[j]
        if np.any(fully):
            jj = j[fully]
            lhs = (kg[jj] * eg[jj] + 2.0) * kg[jj] ** (-1.0 / p)
            rhs = 2.0 ** (-idx[jj]) / mg[jj]
            ok[fully] &= lhs <= rhs * (1.0 + ABS_TOL)
        bad[j] |= ~ok

    deep = ~log_plain
    if np.any(deep):
        j = np.where(deep)[0]
        i = idx[j]
        # k-law: log2 k = p (log2 mu + i + 2) + eta, eta in [0, 1]
        D1, G1, D2, G2 = _align(DLk[j], GLk[j], DLm[j], GLm[j])
        target = p * (G2 + i + 2.0)
        k_p = (G1 >= target - ABS_TOL) & (G1 <= target + 1.0 + ABS_TOL)
        k_0 = _close(G1, G2 + math.log2(p) if p != 1.0 else G2, rel=1e-3)
        k_d = _close(G1, G2)
        k_ok = np.where(D1 == -1, k_p, np.where(D1 == 0, k_0, k_d))
        # eps-law: l = ceil((i+1) + log2 mu + (1 - 1/p) log2 k), which
        # at scale coincides with log2 k up to a vanishing ratio
        D1, G1, D2, G2 = _align(Dl[j], Gl[j], DLk[j], GLk[j])
        have_mu = DLm[j] == -1
        with np.errstate(invalid="ignore"):
            tgt = (i + 1.0) + GLm[j] + (1.0 - 1.0 / p) * G2
        e_p = np.where(have_mu,
                       (G1 >= tgt - ABS_TOL) & (G1 <= tgt + 1.0 + ABS_TOL),
                       _close(G1, G2, rel=1e-3))
        e_d = _close(G1, G2, rel=np.where(D1 == 0, 1e-3, REL_TOL))
        e_ok = np.where(D1 == -1, e_p, e_d)
        bad[j] |= ~(k_ok & e_ok)

    return np.where(bad)[0] + 1
