"""Command-line entry point.

Exit codes: 0 success with all checks passing, 1 failing mathematical
check (report still emitted), 2 usage or input errors.  Single values
print as plain text with 12 decimal places; structured results print as
deterministic JSON (sorted keys, two-space indent).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import construction, operators, schreier, validation, zpq
from .nodes import (FiniteTree, derivative, load_tree, node_token, order,
                    parse_token, save_tree)


def _fmt(x: float) -> str:
    return f"{x:.12f}"


def _emit_json(doc, out_path=None):
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_int_set(text):
    text = text.strip()
    if not text:
        return []
    return [int(tok) for tok in text.split(",")]


# ---------------------------------------------------------------------------
# subcommands

def _cmd_norm(args) -> int:
    e = zpq.Exponents(args.p, args.q)
    z = zpq.load_vector(args.vector)
    value = zpq.znorm(e, z)
    print(_fmt(value))
    if args.oracle:
        ref = zpq.znorm_bruteforce(e, z)
        if abs(value - ref) > 1e-9 * max(1.0, abs(ref)):
            print(f"oracle mismatch: dp={_fmt(value)} brute={_fmt(ref)}",
                  file=sys.stderr)
            return 1
    return 0


def _cmd_maxseg(args) -> int:
    e = zpq.Exponents(args.p, 2.0 * args.p)
    z = zpq.load_vector(args.vector)
    value, seg = zpq.max_segment_projection(e, z)
    print(_fmt(value), " ".join(node_token(s) for s in seg))
    return 0


def _cmd_schreier(args) -> int:
    if args.action == "member":
        result = schreier.schreier_member(args.xi, _parse_int_set(args.set))
        print("true" if result else "false")
        return 0
    fam = schreier.schreier_restrict(args.xi, args.max)
    if args.out:
        schreier.save_family(fam, args.out)
    print(len(fam))
    return 0


def _cmd_tree(args) -> int:
    tree = load_tree(args.file)
    for _ in range(args.derive):
        tree = derivative(tree)
    print(f"nodes={len(tree)} order={order(tree)}")
    if args.out:
        save_tree(tree, args.out)
    return 0


def _cmd_hs(args) -> int:
    tree = load_tree(args.tree)
    section = operators.hs_section(tree, args.max)
    if args.out:
        operators.save_section(section, args.out)
        print(args.out)
    else:
        _emit_json({"M": section.M,
                    "columns": [{node_token(s): v
                                 for s, v in sorted(c.entries.items())}
                                for c in section.columns]})
    return 0


def _cmd_isom(args) -> int:
    tree = load_tree(args.tree)
    e = zpq.Exponents(args.p, args.q)
    coeffs = [float(tok) for tok in args.coeffs.split(",")]
    rep = operators.branch_isometry_check(tree, parse_token(args.prefix),
                                          coeffs, e)
    print(f"lhs={_fmt(rep.lhs)} rhs={_fmt(rep.rhs)} "
          f"pass={'true' if rep.passed else 'false'}")
    return 0 if rep.passed else 1


def _cmd_singtree(args) -> int:
    section = operators.load_section(args.op)
    e = zpq.Exponents(args.p, 2.0 * args.p)
    res = operators.sing_tree(section, args.m, args.universe, args.cap, e,
                              seed=args.seed)
    _emit_json({"nodes": [node_token(s) for s in res.tree],
                "order": res.order,
                "flags": {node_token(s): f for s, f in res.flags.items()}},
               args.out)
    return 0


def _cmd_construct(args) -> int:
    params = construction.ConstructionParams(args.p, args.delta, args.theta)
    if args.family == "antichain":
        data = construction.AntichainFamily(params)
    else:
        data = construction.synth_family("comb", params, args.nmax,
                                         seed=args.seed)
    try:
        sel = construction.select(params, data)
    except construction.SelectionExhausted as exc:
        print(str(exc), file=sys.stderr)
        return 1
    report = construction.verify(sel, data, params)
    _emit_json(report.to_json_dict(), args.out)
    if args.out:
        print(args.out)
    val = validation.validate_selection(
        sel, params, None if args.family == "antichain" else data)
    if not val.ok:
        print(f"independent validation failed: {val.conditions}",
              file=sys.stderr)
        return 1
    return 0 if report.passed else 1


def _cmd_selftest(args) -> int:
    import numpy as np

    failures = []
    rng = np.random.default_rng(0)
    n_vectors = 50 if args.quick else 500
    pq_pairs = [(1.0, 2.0), (1.5, 3.0), (2.0, 4.0), (1.0, 1.0), (2.0, 2.0)]
    for trial in range(n_vectors):
        p, q = pq_pairs[trial % len(pq_pairs)]
        e = zpq.Exponents(p, q)
        n_nodes = int(rng.integers(1, 7))
        entries = {}
        for _ in range(n_nodes):
            depth = int(rng.integers(0, 3))
            node = tuple(int(rng.integers(1, 4)) for _ in range(depth))
            entries[node] = float(rng.normal())
        z = zpq.SparseTreeVector(entries)
        if len(z) and len(zpq.closure(z.support)) > zpq.BRUTE_GUARD:
            continue
        got = zpq.znorm(e, z)
        ref = zpq.znorm_bruteforce(e, z)
        if abs(got - ref) > 1e-9 * max(1.0, ref):
            failures.append(f"norm oracle trial {trial}: {got} vs {ref}")
    grid = [(1.0, 0.5, 1.0), (1.0, 2.0, 1.0)] if args.quick else [
        (p, d, t) for p in (1.0, 1.5, 2.0) for d in (0.5, 0.1)
        for t in (1.0, 2.0)]
    for p, d, t in grid:
        params = construction.ConstructionParams(p, d, t)
        fam = construction.AntichainFamily(params)
        sel = construction.select(params, fam)
        report = construction.verify(sel, fam, params)
        val = validation.validate_selection(sel, params, None)
        if not report.passed:
            failures.append(f"construct grid {(p, d, t)}: report failed")
        if not val.ok:
            failures.append(f"construct grid {(p, d, t)}: validation "
                            f"{val.conditions}")
    for line in failures:
        print(line, file=sys.stderr)
    print(f"selftest: {len(failures)} failure(s)")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="ssrank")
    sub = top.add_subparsers(dest="command", required=True)

    s = sub.add_parser("norm", help="tree-space norm of a .vec file")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--vector", required=True)
    s.add_argument("--oracle", action="store_true")
    s.set_defaults(fn=_cmd_norm)

    s = sub.add_parser("maxseg", help="largest segment projection")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--vector", required=True)
    s.set_defaults(fn=_cmd_maxseg)

    s = sub.add_parser("schreier", help="Schreier family queries")
    act = s.add_subparsers(dest="action", required=True)
    m = act.add_parser("member")
    m.add_argument("--xi", type=int, required=True)
    m.add_argument("--set", required=True)
    r = act.add_parser("restrict")
    r.add_argument("--xi", type=int, required=True)
    r.add_argument("--max", type=int, required=True)
    r.add_argument("--out")
    s.set_defaults(fn=_cmd_schreier)

    s = sub.add_parser("tree", help="tree file statistics")
    s.add_argument("--file", required=True)
    s.add_argument("--derive", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(fn=_cmd_tree)

    s = sub.add_parser("hs", help="section of the tree projection operator")
    s.add_argument("--tree", required=True)
    s.add_argument("--max", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=_cmd_hs)

    s = sub.add_parser("isom", help="branch isometry certificate")
    s.add_argument("--tree", required=True)
    s.add_argument("--prefix", required=True)
    s.add_argument("--coeffs", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--q", type=float, required=True)
    s.set_defaults(fn=_cmd_isom)

    s = sub.add_parser("singtree", help="truncated singularity tree")
    s.add_argument("--op", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--universe", type=int, required=True)
    s.add_argument("--cap", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--p", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(fn=_cmd_singtree)

    s = sub.add_parser("construct", help="selection run with verification")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--family", choices=("antichain", "comb"),
                   required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--nmax", type=int, default=400,
                   help="vector count for explicit families")
    s.add_argument("--out")
    s.set_defaults(fn=_cmd_construct)

    s = sub.add_parser("selftest", help="oracle and construction grids")
    s.add_argument("--quick", action="store_true")
    s.set_defaults(fn=_cmd_selftest)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
