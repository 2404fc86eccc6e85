"""Hot numeric kernels: tower-float arithmetic, the recursive selection
loop, and the segment-family norm DP.

This module is written in Cython "pure Python" mode: the same source runs
interpreted (fallback) or as a compiled extension (built by setup.py).
``COMPILED`` tells which one was imported.

Tower floats
------------
The recursive selection exponentiates its own index ranges round after
round: the support-size sums of round i feed the cardinalities of round
i+1 as 2^(q * max index).  After a handful of rounds the numbers exceed
anything a float or a bignum can hold, so magnitudes are carried in an
iterated-logarithm form.

* tower (d, g): the magnitude 2^2^...^2^g with d twos.  Canonical:
  d == 0 with 0 <= g < 2^53, or d >= 1 with 53 <= g < 2^53.
* signed tower (s, d, g): s * tower(d, g), s in {-1, 0, +1}.  Used for
  exponents / logarithms.
* value (d, g, s): a positive real.  d == -1 means the plain float g
  (used whenever 2^-900 < g < 2^900, so desk-scale arithmetic stays in
  ordinary IEEE doubles); d >= 0 means 2^(s * tower(d, g)) with the
  exponent magnitude >= 900.

Additions drop the smaller operand once the operands differ by a factor
of 2^64 or more.  Every inequality this arithmetic decides carries at
least a factor-two (one bit of log) margin by construction, while the
dropped corrections are below 2^-64 relative, so the drops can never
flip a decision.  Comparisons of canonical forms are exact.
"""

import cython

COMPILED = cython.compiled

if cython.compiled:
    from cython.cimports.libc.math import log2, log1p  # type: ignore
else:
    from math import log2, log1p

LN2 = 0.6931471805599453
TW_HI = 9007199254740992.0  # 2^53
V_CUT = 900.0


# ---------------------------------------------------------------------------
# unsigned towers: pairs (d, g)

@cython.ccall
def tw_norm(d: cython.long, g: cython.double) -> tuple[cython.long, cython.double]:
    while g >= TW_HI:
        g = log2(g)
        d += 1
    while d > 0 and g < 53.0:
        g = 2.0 ** g
        d -= 1
    return d, g


@cython.ccall
def tw_cmp(d1: cython.long, g1: cython.double,
           d2: cython.long, g2: cython.double) -> cython.long:
    if d1 != d2:
        return 1 if d1 > d2 else -1
    if g1 != g2:
        return 1 if g1 > g2 else -1
    return 0


@cython.ccall
def tw_pow2(d: cython.long, g: cython.double) -> tuple[cython.long, cython.double]:
    # 2^tower(d, g); input canonical
    if d == 0 and g < 53.0:
        return tw_norm(0, 2.0 ** g)
    return d + 1, g


@cython.ccall
def tw_add(d1: cython.long, g1: cython.double,
           d2: cython.long, g2: cython.double) -> tuple[cython.long, cython.double]:
    if tw_cmp(d1, g1, d2, g2) < 0:
        d1, g1, d2, g2 = d2, g2, d1, g1
    if d2 == 0 and g2 == 0.0:
        return d1, g1
    if d1 == 0:
        return tw_norm(0, g1 + g2)
    if d1 == 1:
        if d2 == 1:
            delta: cython.double = g1 - g2
            if delta < 64.0:
                return tw_norm(1, g1 + log1p(2.0 ** (-delta)) / LN2)
            return 1, g1
        if g1 <= 1020.0:
            return tw_norm(1, g1 + log1p(g2 * 2.0 ** (-g1)) / LN2)
        return 1, g1
    if d1 == d2 and g1 == g2:
        # a + a = 2^(log2 a + 1)
        dd: cython.long
        gg: cython.double
        dd, gg = tw_add(d1 - 1, g1, 0, 1.0)
        return tw_pow2(dd, gg)
    return d1, g1


@cython.ccall
def tw_sub(d1: cython.long, g1: cython.double,
           d2: cython.long, g2: cython.double) -> tuple[cython.long, cython.double]:
    # a - b for a >= b
    if d1 == d2 and g1 == g2:
        return 0, 0.0
    if d2 == 0 and g2 == 0.0:
        return d1, g1
    if d1 == 0:
        return tw_norm(0, g1 - g2)
    if d1 == 1:
        if d2 == 1:
            delta: cython.double = g1 - g2
            if delta < 64.0:
                return tw_norm(1, g1 + log1p(-(2.0 ** (-delta))) / LN2)
            return 1, g1
        if g1 <= 1020.0:
            return tw_norm(1, g1 + log1p(-(g2 * 2.0 ** (-g1))) / LN2)
        return 1, g1
    return d1, g1


@cython.ccall
def tw_scale(d: cython.long, g: cython.double,
             c: cython.double) -> tuple[cython.long, cython.double]:
    # tower * c for c > 0
    if c == 1.0 or (d == 0 and g == 0.0):
        return d, g
    if d == 0:
        return tw_norm(0, g * c)
    lc: cython.double = log2(c)
    dd: cython.long
    gg: cython.double
    if lc >= 0.0:
        dd, gg = tw_add(d - 1, g, 0, lc)
    else:
        dd, gg = tw_sub(d - 1, g, 0, -lc)
    return tw_pow2(dd, gg)


# ---------------------------------------------------------------------------
# signed towers: triples (s, d, g)

@cython.ccall
def st_from_float(x: cython.double) -> tuple[cython.long, cython.long, cython.double]:
    if x == 0.0:
        return 0, 0, 0.0
    s: cython.long = 1 if x > 0.0 else -1
    d: cython.long
    g: cython.double
    d, g = tw_norm(0, x if x > 0.0 else -x)
    return s, d, g


@cython.ccall
def st_cmp(s1: cython.long, d1: cython.long, g1: cython.double,
           s2: cython.long, d2: cython.long, g2: cython.double) -> cython.long:
    if s1 != s2:
        return 1 if s1 > s2 else -1
    if s1 == 0:
        return 0
    return s1 * tw_cmp(d1, g1, d2, g2)


@cython.ccall
def st_add(s1: cython.long, d1: cython.long, g1: cython.double,
           s2: cython.long, d2: cython.long, g2: cython.double
           ) -> tuple[cython.long, cython.long, cython.double]:
    if s1 == 0:
        return s2, d2, g2
    if s2 == 0:
        return s1, d1, g1
    d: cython.long
    g: cython.double
    if s1 == s2:
        d, g = tw_add(d1, g1, d2, g2)
        return s1, d, g
    mc: cython.long = tw_cmp(d1, g1, d2, g2)
    if mc == 0:
        return 0, 0, 0.0
    if mc > 0:
        d, g = tw_sub(d1, g1, d2, g2)
        return (s1, d, g) if not (d == 0 and g == 0.0) else (0, 0, 0.0)
    d, g = tw_sub(d2, g2, d1, g1)
    return (s2, d, g) if not (d == 0 and g == 0.0) else (0, 0, 0.0)


@cython.ccall
def st_scale(s: cython.long, d: cython.long, g: cython.double,
             c: cython.double) -> tuple[cython.long, cython.long, cython.double]:
    if s == 0 or c == 0.0:
        return 0, 0, 0.0
    sr: cython.long = s if c > 0.0 else -s
    dd: cython.long
    gg: cython.double
    dd, gg = tw_scale(d, g, c if c > 0.0 else -c)
    if dd == 0 and gg == 0.0:
        return 0, 0, 0.0
    return sr, dd, gg


@cython.ccall
def st_floor(s: cython.long, d: cython.long, g: cython.double
             ) -> tuple[cython.long, cython.long, cython.double]:
    if s == 0:
        return 0, 0, 0.0
    if d != 0:
        # magnitude >= 2^53: integral at representable resolution
        return s, d, g
    v: cython.double = s * g
    t: cython.double = float(int(v))
    if t > v:
        t -= 1.0
    return st_from_float(t)


@cython.ccall
def st_to_float(s: cython.long, d: cython.long, g: cython.double) -> cython.double:
    if s == 0:
        return 0.0
    if d == 0:
        return s * g
    if d == 1 and g <= 1020.0:
        return s * (2.0 ** g)
    return s * float("inf")


# ---------------------------------------------------------------------------
# values: triples (d, g, s); d == -1 -> plain float g, d >= 0 -> 2^(s*tower)

@cython.ccall
def v_from_float(x: cython.double) -> tuple[cython.long, cython.double, cython.long]:
    if x == 0.0:
        return -1, 0.0, 1
    if 2.0 ** (-V_CUT) < x < 2.0 ** V_CUT:
        return -1, x, 1
    s: cython.long
    d: cython.long
    g: cython.double
    s, d, g = st_from_float(log2(x))
    return d, g, s


@cython.ccall
def v_from_st(s: cython.long, d: cython.long, g: cython.double
              ) -> tuple[cython.long, cython.double, cython.long]:
    # value 2^(signed tower exponent)
    if s == 0:
        return -1, 1.0, 1
    if d == 0 and g <= V_CUT:
        return -1, 2.0 ** (s * g), 1
    return d, g, s


@cython.ccall
def v_log2(d: cython.long, g: cython.double, s: cython.long
           ) -> tuple[cython.long, cython.long, cython.double]:
    if d == -1:
        return st_from_float(log2(g))
    return s, d, g


@cython.ccall
def v_cmp(d1: cython.long, g1: cython.double, s1: cython.long,
          d2: cython.long, g2: cython.double, s2: cython.long) -> cython.long:
    if d1 == -1 and d2 == -1:
        if g1 != g2:
            return 1 if g1 > g2 else -1
        return 0
    if d1 == -1:
        # plain vs big: positive-exponent big beats any plain; tiny big
        # beats only an exact plain zero
        if s2 > 0:
            return -1
        return 1 if g1 > 0.0 else -1
    if d2 == -1:
        if s1 > 0:
            return 1
        return -1 if g2 > 0.0 else 1
    return st_cmp(s1, d1, g1, s2, d2, g2)


@cython.ccall
def v_mul(d1: cython.long, g1: cython.double, s1: cython.long,
          d2: cython.long, g2: cython.double, s2: cython.long
          ) -> tuple[cython.long, cython.double, cython.long]:
    if (d1 == -1 and g1 == 0.0) or (d2 == -1 and g2 == 0.0):
        return -1, 0.0, 1
    if d1 == -1 and d2 == -1:
        x: cython.double = g1 * g2
        if 2.0 ** (-V_CUT) < x < 2.0 ** V_CUT:
            return -1, x, 1
    ls: cython.long
    ld: cython.long
    lg: cython.double
    ls, ld, lg = v_log2(d1, g1, s1)
    ms: cython.long
    md: cython.long
    mg: cython.double
    ms, md, mg = v_log2(d2, g2, s2)
    ls, ld, lg = st_add(ls, ld, lg, ms, md, mg)
    return v_from_st(ls, ld, lg)


@cython.ccall
def v_add(d1: cython.long, g1: cython.double, s1: cython.long,
          d2: cython.long, g2: cython.double, s2: cython.long
          ) -> tuple[cython.long, cython.double, cython.long]:
    if d1 == -1 and g1 == 0.0:
        return d2, g2, s2
    if d2 == -1 and g2 == 0.0:
        return d1, g1, s1
    x: cython.double
    delta: cython.double
    ls: cython.long
    ld: cython.long
    lg: cython.double
    if d1 == -1 and d2 == -1:
        x = g1 + g2
        if x < 2.0 ** V_CUT:
            return -1, x, 1
        ls, ld, lg = st_from_float(log2(x))
        return v_from_st(ls, ld, lg)
    if d1 == -1 or d2 == -1:
        # one plain, one big
        if d2 == -1:
            d1, g1, s1, d2, g2, s2 = -1, g2, 1, d1, g1, s1
        # now (g1) plain, (d2, g2, s2) big
        if s2 > 0:
            if d2 == 0:
                delta = g2 - log2(g1)
                if delta < 64.0:
                    return v_from_st(1, 0, g2 + log1p(2.0 ** (-delta)) / LN2)
            return d2, g2, s2
        if d2 == 0:
            delta = log2(g1) + g2
            if delta < 64.0:
                return -1, g1 * (1.0 + 2.0 ** (-delta)), 1
        return -1, g1, 1
    # both big
    as_: cython.long
    ad: cython.long
    ag: cython.double
    bs: cython.long
    bd: cython.long
    bg: cython.double
    as_, ad, ag = s1, d1, g1
    bs, bd, bg = s2, d2, g2
    if st_cmp(as_, ad, ag, bs, bd, bg) < 0:
        as_, ad, ag, bs, bd, bg = bs, bd, bg, as_, ad, ag
    if as_ != bs:
        # one huge, one tiny: ratio below 2^-1800
        return v_from_st(as_, ad, ag)
    ds: cython.long
    dd: cython.long
    dg: cython.double
    ds, dd, dg = st_add(as_, ad, ag, -bs, bd, bg)
    rs: cython.long
    rd: cython.long
    rg: cython.double
    if ds == 0:
        rs, rd, rg = st_add(as_, ad, ag, 1, 0, 1.0)
        return v_from_st(rs, rd, rg)
    if ds > 0 and dd == 0 and dg < 64.0:
        corr: cython.double = log1p(2.0 ** (-dg)) / LN2
        rs, rd, rg = st_add(as_, ad, ag, 1, 0, corr)
        return v_from_st(rs, rd, rg)
    return v_from_st(as_, ad, ag)


@cython.ccall
def v_pow(d: cython.long, g: cython.double, s: cython.long,
          r: cython.double) -> tuple[cython.long, cython.double, cython.long]:
    if d == -1:
        if g == 0.0:
            return -1, 0.0, 1
        if g == 1.0:
            return -1, 1.0, 1
        l: cython.double = r * log2(g)
        if -V_CUT < l < V_CUT:
            return -1, g ** r, 1
        es: cython.long
        ed: cython.long
        eg: cython.double
        es, ed, eg = st_from_float(l)
        return v_from_st(es, ed, eg)
    ls: cython.long
    ld: cython.long
    lg: cython.double
    ls, ld, lg = st_scale(s, d, g, r)
    return v_from_st(ls, ld, lg)


@cython.ccall
def v_ceil(d: cython.long, g: cython.double, s: cython.long
           ) -> tuple[cython.long, cython.double, cython.long]:
    if d == -1:
        c: cython.double = float(int(g))
        if c < g:
            c += 1.0
        return -1, c, 1
    if s > 0:
        # integral at representable resolution
        return d, g, s
    return -1, 1.0, 1


@cython.ccall
def v_dec(d: cython.long, g: cython.double, s: cython.long
          ) -> tuple[cython.long, cython.double, cython.long]:
    # value - 1 for values >= 1
    if d == -1:
        return -1, g - 1.0, 1
    return d, g, s


@cython.ccall
def v_to_float(d: cython.long, g: cython.double, s: cython.long) -> cython.double:
    if d == -1:
        return g
    if s > 0:
        return float("inf")
    return 0.0


@cython.ccall
def v_as_tower(d: cython.long, g: cython.double, s: cython.long
               ) -> tuple[cython.long, cython.long, cython.double]:
    # the value itself as a signed-tower real (for use inside exponents)
    if d == -1:
        return st_from_float(g)
    if s < 0:
        # below 2^-900: vanishes at tower resolution
        return 0, 0, 0.0
    dd: cython.long
    gg: cython.double
    dd, gg = tw_pow2(d, g)
    return 1, dd, gg


@cython.ccall
def st_linear_to_v(s: cython.long, d: cython.long, g: cython.double
                   ) -> tuple[cython.long, cython.double, cython.long]:
    # the signed-tower REAL itself as a value (inverse of v_as_tower)
    if s == 0:
        return -1, 0.0, 1
    if d == 0:
        return -1, g, 1
    if d == 1 and g < V_CUT:
        return -1, 2.0 ** g, 1
    return d - 1, g, 1


# ---------------------------------------------------------------------------
# recursive selection over the synthetic sibling-block family
#
# Family law: vector n occupies 2^(q*n) fresh depth-one sibling nodes with
# the uniform value 2^(-n), so every branch projection is exactly 2^(-n)
# and the vector is normalized.

def select_rounds(p: cython.double, n_rounds: cython.long,
                  kd: cython.int[:], kg: cython.double[:], ks: cython.schar[:],
                  ed: cython.int[:], eg: cython.double[:], es: cython.schar[:],
                  fd: cython.int[:], fg: cython.double[:], fs: cython.schar[:],
                  md: cython.int[:], mg: cython.double[:], ms: cython.schar[:]
                  ) -> None:
    """Fill per-round arrays with (k_i, eps_i, min F_i, mu_i).

    F_i is the index range [start, start + k_i - 1]; only the start is
    stored since the length is k_i.  The loop follows the stated rules:
    k_i minimal with k_i >= n_rounds and 2 k_i^(-1/p) <= mu_i^(-1)
    2^(-i) / 2; eps_i the largest power of two with k_i^(1-1/p) eps_i <=
    mu_i^(-1) 2^(-i) / 2; F_i the first k_i indices at or after
    max(k_i, l_i, previous end + 1), where l_i is the sparsity cutoff
    (branch projections 2^(-n) drop below eps_i from l_i + 1 on).
    """
    q: cython.double = 2.0 * p
    i: cython.long
    # running sum of per-round support-mass q-th roots (mu for the NEXT round)
    sm_d: cython.long = -1
    sm_g: cython.double = 0.0
    sm_s: cython.long = 1
    pe_d: cython.long = -1
    pe_g: cython.double = 0.0
    pe_s: cython.long = 1
    cq: cython.double = log2(2.0 ** q - 1.0)
    for i in range(1, n_rounds + 1):
        mu_d: cython.long
        mu_g: cython.double
        mu_s: cython.long
        if i == 1:
            mu_d, mu_g, mu_s = -1, 1.0, 1
        else:
            mu_d, mu_g, mu_s = sm_d, sm_g, sm_s
        # k_i = max(N, ceil((mu * 2^(i+2))^p))
        t_d: cython.long
        t_g: cython.double
        t_s: cython.long
        p2s: cython.long
        p2d: cython.long
        p2g: cython.double
        p2s, p2d, p2g = st_from_float(float(i + 2))
        t_d, t_g, t_s = v_from_st(p2s, p2d, p2g)
        t_d, t_g, t_s = v_mul(mu_d, mu_g, mu_s, t_d, t_g, t_s)
        t_d, t_g, t_s = v_pow(t_d, t_g, t_s, p)
        t_d, t_g, t_s = v_ceil(t_d, t_g, t_s)
        k_d: cython.long
        k_g: cython.double
        k_s: cython.long
        if v_cmp(t_d, t_g, t_s, -1, float(n_rounds), 1) < 0:
            k_d, k_g, k_s = -1, float(n_rounds), 1
        else:
            k_d, k_g, k_s = t_d, t_g, t_s
        # eps_i = 2^floor(log2(2^-(i+1) * mu^-1 * k^(1/p - 1)))
        le_s: cython.long
        le_d: cython.long
        le_g: cython.double
        le_s, le_d, le_g = st_from_float(-float(i + 1))
        a_s: cython.long
        a_d: cython.long
        a_g: cython.double
        a_s, a_d, a_g = v_log2(mu_d, mu_g, mu_s)
        le_s, le_d, le_g = st_add(le_s, le_d, le_g, -a_s, a_d, a_g)
        a_s, a_d, a_g = v_log2(k_d, k_g, k_s)
        a_s, a_d, a_g = st_scale(a_s, a_d, a_g, 1.0 / p - 1.0)
        le_s, le_d, le_g = st_add(le_s, le_d, le_g, a_s, a_d, a_g)
        le_s, le_d, le_g = st_floor(le_s, le_d, le_g)
        e_d: cython.long
        e_g: cython.double
        e_s: cython.long
        e_d, e_g, e_s = v_from_st(le_s, le_d, le_g)
        # sparsity cutoff l_i = -log2(eps_i), as an index value
        l_d: cython.long
        l_g: cython.double
        l_s: cython.long
        l_d, l_g, l_s = st_linear_to_v(-le_s, le_d, le_g)
        # start_i = max(k_i, l_i, prev_end + 1)
        st_d: cython.long
        st_g: cython.double
        st_s: cython.long
        st_d, st_g, st_s = v_add(pe_d, pe_g, pe_s, -1, 1.0, 1)
        if v_cmp(k_d, k_g, k_s, st_d, st_g, st_s) > 0:
            st_d, st_g, st_s = k_d, k_g, k_s
        if v_cmp(l_d, l_g, l_s, st_d, st_g, st_s) > 0:
            st_d, st_g, st_s = l_d, l_g, l_s
        # end_i = start_i + k_i - 1
        t_d, t_g, t_s = v_dec(k_d, k_g, k_s)
        en_d: cython.long
        en_g: cython.double
        en_s: cython.long
        en_d, en_g, en_s = v_add(st_d, st_g, st_s, t_d, t_g, t_s)
        # block support mass B_i = sum_{n=start..end} 2^(q n)
        b_d: cython.long
        b_g: cython.double
        b_s: cython.long
        if en_d == -1 and q * (en_g + 1.0) <= V_CUT:
            b_d, b_g, b_s = v_from_float(
                (2.0 ** (q * (en_g + 1.0)) - 2.0 ** (q * st_g))
                / (2.0 ** q - 1.0))
        elif k_d == -1 and q * k_g <= V_CUT:
            cs: cython.long
            cd: cython.long
            cg: cython.double
            cs, cd, cg = v_as_tower(st_d, st_g, st_s)
            cs, cd, cg = st_scale(cs, cd, cg, q)
            ws: cython.long
            wd: cython.long
            wg: cython.double
            ws, wd, wg = st_from_float(log2(2.0 ** (q * k_g) - 1.0) - cq)
            cs, cd, cg = st_add(cs, cd, cg, ws, wd, wg)
            b_d, b_g, b_s = v_from_st(cs, cd, cg)
        else:
            xs: cython.long
            xd: cython.long
            xg: cython.double
            xs, xd, xg = v_as_tower(st_d, st_g, st_s)
            xs, xd, xg = st_scale(xs, xd, xg, q)
            ys: cython.long
            yd: cython.long
            yg: cython.double
            ys, yd, yg = v_as_tower(k_d, k_g, k_s)
            ys, yd, yg = st_scale(ys, yd, yg, q)
            xs, xd, xg = st_add(xs, xd, xg, ys, yd, yg)
            zs: cython.long
            zd: cython.long
            zg: cython.double
            zs, zd, zg = st_from_float(-cq)
            xs, xd, xg = st_add(xs, xd, xg, zs, zd, zg)
            b_d, b_g, b_s = v_from_st(xs, xd, xg)
        b_d, b_g, b_s = v_pow(b_d, b_g, b_s, 1.0 / q)
        sm_d, sm_g, sm_s = v_add(sm_d, sm_g, sm_s, b_d, b_g, b_s)
        pe_d, pe_g, pe_s = en_d, en_g, en_s
        j: cython.long = i - 1
        kd[j] = cython.cast(cython.int, k_d)
        kg[j] = k_g
        ks[j] = cython.cast(cython.schar, k_s)
        ed[j] = cython.cast(cython.int, e_d)
        eg[j] = e_g
        es[j] = cython.cast(cython.schar, e_s)
        fd[j] = cython.cast(cython.int, st_d)
        fg[j] = st_g
        fs[j] = cython.cast(cython.schar, st_s)
        md[j] = cython.cast(cython.int, mu_d)
        mg[j] = mu_g
        ms[j] = cython.cast(cython.schar, mu_s)


def verify_rounds(p: cython.double, theta: cython.double, n_rounds: cython.long,
                  kd: cython.int[:], kg: cython.double[:], ks: cython.schar[:],
                  fd: cython.int[:], fg: cython.double[:], fs: cython.schar[:],
                  md: cython.int[:], mg: cython.double[:], ms: cython.schar[:]
                  ) -> tuple:
    """Closed-form per-round checks for the sibling-block family.

    Returns (witness_norm_p_sum, max_z_norm, seg_violations, z_q_sum):
    * witness sum of |a_n|^p over all rounds (coefficient exponents
      cancel exactly in tower form, so each round contributes 1/N);
    * largest per-round block norm k_i^(-1/q), to compare with theta;
    * number of rounds whose worst segment projection k_i^(-1/p)
      2^(-min F_i) exceeds mu_i^(-1) 2^(-i);
    * sum over rounds of k_i^(-1), the q-th power of the aggregate norm.
    """
    q: cython.double = 2.0 * p
    i: cython.long
    lim_n: cython.double = log2(float(n_rounds))
    wsum: cython.double = 0.0
    wcomp: cython.double = 0.0
    zq: cython.double = 0.0
    viol: cython.long = 0
    mx_s: cython.long = 0
    mx_d: cython.long = 0
    mx_g: cython.double = 0.0
    have_mx: cython.long = 0
    for i in range(1, n_rounds + 1):
        j: cython.long = i - 1
        lk_s: cython.long
        lk_d: cython.long
        lk_g: cython.double
        lk_s, lk_d, lk_g = v_log2(kd[j], kg[j], ks[j])
        # witness term: log k + (-log k) cancels exactly, leaving -log N
        t_s: cython.long
        t_d: cython.long
        t_g: cython.double
        t_s, t_d, t_g = st_add(lk_s, lk_d, lk_g, -lk_s, lk_d, lk_g)
        n_s: cython.long
        n_d: cython.long
        n_g: cython.double
        n_s, n_d, n_g = st_from_float(-lim_n)
        t_s, t_d, t_g = st_add(t_s, t_d, t_g, n_s, n_d, n_g)
        # compensated accumulation: millions of equal terms would
        # otherwise drift past the unit-norm tolerance
        term: cython.double = 2.0 ** st_to_float(t_s, t_d, t_g) - wcomp
        tsum: cython.double = wsum + term
        wcomp = (tsum - wsum) - term
        wsum = tsum
        # block norm log: -(1/q) log k
        z_s: cython.long
        z_d: cython.long
        z_g: cython.double
        z_s, z_d, z_g = st_scale(lk_s, lk_d, lk_g, -1.0 / q)
        if have_mx == 0 or st_cmp(z_s, z_d, z_g, mx_s, mx_d, mx_g) > 0:
            mx_s, mx_d, mx_g = z_s, z_d, z_g
            have_mx = 1
        i_s: cython.long
        i_d: cython.long
        i_g: cython.double
        i_s, i_d, i_g = st_scale(lk_s, lk_d, lk_g, -1.0)
        zq += 2.0 ** st_to_float(i_s, i_d, i_g)
        # worst segment projection vs the per-round budget
        lhs_s: cython.long
        lhs_d: cython.long
        lhs_g: cython.double
        lhs_s, lhs_d, lhs_g = st_scale(lk_s, lk_d, lk_g, -1.0 / p)
        f_s: cython.long
        f_d: cython.long
        f_g: cython.double
        f_s, f_d, f_g = v_as_tower(fd[j], fg[j], fs[j])
        lhs_s, lhs_d, lhs_g = st_add(lhs_s, lhs_d, lhs_g, -f_s, f_d, f_g)
        r_s: cython.long
        r_d: cython.long
        r_g: cython.double
        r_s, r_d, r_g = v_log2(md[j], mg[j], ms[j])
        w_s: cython.long
        w_d: cython.long
        w_g: cython.double
        w_s, w_d, w_g = st_from_float(-float(i))
        r_s, r_d, r_g = st_add(-r_s, r_d, r_g, w_s, w_d, w_g)
        if st_cmp(lhs_s, lhs_d, lhs_g, r_s, r_d, r_g) > 0:
            viol += 1
    max_z: cython.double = 2.0 ** st_to_float(mx_s, mx_d, mx_g)
    return wsum, max_z, viol, zq


# ---------------------------------------------------------------------------
# segment-family norm DP
#
# Over the support closure (parents before children, root at index 0):
#   g[t] = |z(t)|^p + max(0, max_{children} g)   best mass of a segment
#                                                whose minimal node is t
#   h[t] = max(g[t]^(q/p), sum_{children} h)     best q-sum inside the
#                                                subtree at t
# A family either uses a segment starting at t (excluding the rest of
# t's subtree: any other segment's minimal node there would be
# comparable with t) or splits over the children.  The norm is
# h[root]^(1/q).

def znorm_dp(parent: cython.int[:], vals: cython.double[:],
             p: cython.double, q: cython.double,
             g: cython.double[:], h: cython.double[:]) -> cython.double:
    n: cython.long = parent.shape[0]
    if n == 0:
        return 0.0
    i: cython.long
    for i in range(n):
        g[i] = 0.0
        h[i] = 0.0
    qp: cython.double = q / p
    gmax: cython.double = 0.0
    i = n - 1
    while i >= 0:
        gi: cython.double = abs(vals[i]) ** p + g[i]
        hi: cython.double = gi ** qp
        if h[i] > hi:
            hi = h[i]
        g[i] = gi
        h[i] = hi
        if gi > gmax:
            gmax = gi
        if i > 0:
            pa: cython.long = parent[i]
            if gi > g[pa]:
                g[pa] = gi
            h[pa] = h[pa] + hi
        i -= 1
    # single attaining segment: evaluate its mass directly as gmax^(1/p)
    # rather than (gmax^(q/p))^(1/q), so chain-supported vectors match
    # the chain l_p formula bit for bit
    if h[0] == gmax ** qp:
        return gmax ** (1.0 / p)
    return h[0] ** (1.0 / q)
