"""Command-line front end: .rel file I/O, JSON reports, enumeration.

Exit codes: 0 ok, 1 bad usage/unknown flags, 2 relation-file parse error,
3 size-guard violation, 4 budget exceeded (a partial report is still
emitted).  The KEYREL_BUDGET environment variable overrides the default
search-node budget.
"""

import argparse
import json
import os
import sys
from itertools import product

from . import corpus as corpus_mod
from .relcore import (
    GuardError,
    InputError,
    Relation,
    blocks,
    dummy_variables,
    is_essential_relation,
    pattern,
)
from .preserve import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    key_report,
    search_polymorphism,
)
from .structure import (
    MainTheoremWitness,
    compute_core,
    decompose_gf2,
    full_pattern_block_report,
    main_theorem_witness,
    verify_pattern_theorem,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_GUARD = 3
EXIT_BUDGET = 4


class RelParseError(ValueError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_rel(text):
    """Parse the .rel format: `domain k`, `arity n`, then one tuple per line."""
    k = n = None
    tuples = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "domain":
            if k is not None:
                raise RelParseError(line_no, "duplicate domain header")
            if len(parts) != 2 or not parts[1].isdigit():
                raise RelParseError(line_no, "expected: domain <k>")
            k = int(parts[1])
        elif parts[0] == "arity":
            if n is not None:
                raise RelParseError(line_no, "duplicate arity header")
            if len(parts) != 2 or not parts[1].isdigit():
                raise RelParseError(line_no, "expected: arity <n>")
            n = int(parts[1])
        else:
            if k is None or n is None:
                raise RelParseError(line_no, "tuple before domain/arity headers")
            try:
                t = tuple(int(p) for p in parts)
            except ValueError:
                raise RelParseError(line_no, f"not an integer tuple: {line!r}")
            if len(t) != n:
                raise RelParseError(line_no, f"expected {n} entries, got {len(t)}")
            if any(not (0 <= c < k) for c in t):
                raise RelParseError(line_no, f"entry outside domain 0..{k - 1}")
            tuples.append(t)
    if k is None or n is None:
        raise RelParseError(0, "missing domain/arity headers")
    return Relation.from_tuples(k, n, tuples)


def format_rel(rel, comment=None):
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"domain {rel.k}")
    lines.append(f"arity {rel.arity}")
    for t in rel.sorted_members():
        lines.append(" ".join(str(c) for c in t))
    return "\n".join(lines) + "\n"


def load_rel(path):
    try:
        with open(path) as fh:
            return parse_rel(fh.read())
    except OSError as exc:
        raise RelParseError(0, str(exc))


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2)


def _tuples_json(tuples):
    return [list(t) for t in sorted(tuples)]


def _group_json(gs):
    idx = {g: i for i, g in enumerate(gs.elements)}
    return {
        "order": gs.order,
        "zero": idx[gs.zero],
        "table": [
            [idx[gs.add[(a, b)]] for b in gs.elements] for a in gs.elements
        ],
        "maps": [
            sorted([v, idx[g]] for v, g in m.items()) for m in gs.coord_maps
        ],
        "prime_power": gs.prime_power,
    }


def _pattern_json(pat):
    return {
        "matrix": [list(row) for row in pat.related],
        "classification": pat.classification,
        "classes": (
            [[c - 1 for c in cls] for cls in pat.classes]
            if pat.is_equivalence else None
        ),
    }


def _witness_json(w):
    if isinstance(w, MainTheoremWitness):
        return {
            "found": True,
            "verified": w.verified,
            "prime": w.prime,
            "key_tuple": list(w.key_tuple),
            "box": [list(b) for b in w.box],
            "group_coords": [c - 1 for c in w.group_coords],
            "coord_maps": [sorted([v, r] for v, r in m.items()) for m in w.coord_maps],
            "pair_elements": sorted([c - 1, b] for c, b in w.pair_elements.items()),
        }
    return {"found": False, "stage": w.stage, "detail": w.detail}


def _budget_from(args):
    if getattr(args, "budget", None) is not None:
        return args.budget
    env = os.environ.get("KEYREL_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"KEYREL_BUDGET is not an integer: {env!r}")
    return DEFAULT_BUDGET


def cmd_analyze(args):
    rel = load_rel(args.file)
    budget = _budget_from(args)
    report = {
        "schema": 1,
        "input": {
            "domain": rel.k,
            "arity": rel.arity,
            "member_count": len(rel),
            "members": _tuples_json(rel.members),
        },
        "essential": None,
        "dummy_vars": None,
        "key": None,
        "pattern": None,
        "blocks": None,
        "gf2": None,
        "wnu": None,
        "pattern_theorem": None,
        "witness": None,
        "budget": {"outcome": "ok", "nodes": budget},
    }
    exceeded = False
    try:
        report["essential"] = is_essential_relation(rel)
        report["dummy_vars"] = sorted(i - 1 for i in dummy_variables(rel))
        pat = pattern(rel)
        report["pattern"] = _pattern_json(pat)

        kr = key_report(rel, budget)
        report["key"] = {
            "is_key": kr.is_key,
            "key_tuples": _tuples_json(kr.key_tuples),
        }

        if rel.k == 2:
            dec = decompose_gf2(rel)
            report["gf2"] = (
                {"equations": [[list(c), b] for c, b in dec.equations]}
                if dec is not None else {"equations": None}
            )

        wnu_results = {}
        best_wnu = None
        for m in range(2, args.wnu_arity + 1):
            found = search_polymorphism(rel, "wnu", m, budget)
            wnu_results[str(m)] = {
                "outcome": "Found" if found is not None else "ExhaustedNone",
                "table": list(found.table) if found is not None else None,
            }
            if found is not None and best_wnu is None:
                best_wnu = found
        report["wnu"] = wnu_results

        if kr.is_key and best_wnu is not None:
            report["pattern_theorem"] = verify_pattern_theorem(rel, best_wnu)

        wnu_for_blocks = best_wnu if pat.classification == "full" else None
        block_rep = full_pattern_block_report(rel, wnu_for_blocks, budget)
        report["blocks"] = [
            {
                "coord_sets": [list(cs) for cs in b.block.coord_sets],
                "is_product": b.block.is_product,
                "kind": b.block.classification,
                "status": b.status,
                "note": b.note,
                "group": _group_json(b.group) if b.group is not None else None,
            }
            for b in block_rep
        ]
    except BudgetExceeded:
        exceeded = True
        report["budget"]["outcome"] = "BudgetExceeded"

    if args.json:
        print(_dump(report))
    else:
        _print_analysis(report)
    return EXIT_BUDGET if exceeded else EXIT_OK


def _print_analysis(report):
    inp = report["input"]
    print(f"relation: domain {inp['domain']}, arity {inp['arity']}, "
          f"{inp['member_count']} members")
    if report["essential"] is not None:
        print(f"essential relation: {report['essential']}")
    if report["dummy_vars"] is not None:
        print(f"dummy variables (0-based): {report['dummy_vars']}")
    if report["key"] is not None:
        print(f"key relation: {report['key']['is_key']}; "
              f"key tuples: {report['key']['key_tuples']}")
    if report["pattern"] is not None:
        print(f"pattern: {report['pattern']['classification']}")
    if report["gf2"] is not None:
        print(f"gf2 equations: {report['gf2']['equations']}")
    if report["wnu"] is not None:
        for m in sorted(report["wnu"], key=int):
            print(f"wnu arity {m}: {report['wnu'][m]['outcome']}")
    if report["pattern_theorem"] is not None:
        print(f"pattern theorem holds: {report['pattern_theorem']}")
    if report["blocks"] is not None:
        for i, b in enumerate(report["blocks"]):
            extra = f" group order {b['group']['order']}" if b["group"] else ""
            note = f" ({b['note']})" if b["note"] else ""
            print(f"block {i}: {b['kind']}, product={b['is_product']}, "
                  f"status={b['status']}{extra}{note}")
    if report["budget"]["outcome"] != "ok":
        print(f"budget: {report['budget']['outcome']}")


def cmd_poly(args):
    rel = load_rel(args.file)
    budget = _budget_from(args)
    found = search_polymorphism(rel, args.kind, args.arity, budget)
    print(_dump({
        "schema": 1,
        "kind": args.kind,
        "arity": args.arity,
        "outcome": "Found" if found is not None else "ExhaustedNone",
        "table": list(found.table) if found is not None else None,
    }))
    return EXIT_OK


def cmd_gf2(args):
    rel = load_rel(args.file)
    dec = decompose_gf2(rel)
    print(_dump({
        "schema": 1,
        "decomposable": dec is not None,
        "equations": (
            [[list(c), b] for c, b in dec.equations] if dec is not None else None
        ),
    }))
    return EXIT_OK


def _parse_tuple(text, rel):
    try:
        t = tuple(int(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise InputError(f"not a tuple of integers: {text!r}")
    rel._check_tuple(t)
    return t


def cmd_core(args):
    rel = load_rel(args.file)
    budget = _budget_from(args)
    key = _parse_tuple(args.key_tuple, rel)
    result = compute_core(rel, key, budget)
    print(_dump({
        "schema": 1,
        "core": _tuples_json(result.core.members),
        "restrictor": [list(m) for m in result.restrictor.maps],
        "fixed_key_tuple": list(result.fixed_key_tuple),
        "image_sets": [list(s) for s in result.image_sets],
    }))
    return EXIT_OK


def cmd_blocks(args):
    rel = load_rel(args.file)
    print(_dump({
        "schema": 1,
        "blocks": [
            {
                "members": _tuples_json(b.members),
                "coord_sets": [list(cs) for cs in b.coord_sets],
                "is_product": b.is_product,
                "kind": b.classification,
            }
            for b in blocks(rel)
        ],
    }))
    return EXIT_OK


def cmd_witness(args):
    rel = load_rel(args.file)
    budget = _budget_from(args)
    if args.theorem == "full-pattern":
        wnu = search_polymorphism(rel, "wnu", args.wnu_arity, budget)
        rep = full_pattern_block_report(rel, wnu, budget)
        print(_dump({
            "schema": 1,
            "theorem": "full-pattern",
            "wnu_found": wnu is not None,
            "blocks": [
                {
                    "coord_sets": [list(cs) for cs in b.block.coord_sets],
                    "kind": b.block.classification,
                    "status": b.status,
                    "note": b.note,
                    "group": _group_json(b.group) if b.group else None,
                }
                for b in rep
            ],
        }))
        return EXIT_OK
    key = _parse_tuple(args.key_tuple, rel)
    wnu = search_polymorphism(rel, "wnu", args.wnu_arity, budget)
    w = main_theorem_witness(rel, key, wnu, budget)
    print(_dump({"schema": 1, "theorem": "main", "witness": _witness_json(w)}))
    return EXIT_OK


def cmd_corpus(args):
    entry = corpus_mod.corpus_get(args.name)
    if args.export:
        sys.stdout.write(format_rel(entry.relation, comment=f"corpus {entry.name}"))
        return EXIT_OK
    checks = corpus_mod.verify_known_facts(entry, _budget_from(args))
    print(_dump({
        "schema": 1,
        "name": entry.name,
        "domain": entry.relation.k,
        "arity": entry.relation.arity,
        "member_count": len(entry.relation),
        "facts_verified": checks,
        "all_pass": all(checks.values()),
    }))
    return EXIT_OK


def _enumerate_masks(k, n, workers):
    total = k ** n
    if 2 ** total > (1 << 20):
        raise GuardError(f"2^(k^n) = 2^{total} relations is beyond enumeration")
    universe = sorted(product(range(k), repeat=n))
    # Sharding is by index stride so results are worker-count independent
    # after the sorted merge below.
    shard_hits = []
    for w in range(workers):
        hits = []
        for mask in range(w, 1 << total, workers):
            members = [universe[i] for i in range(total) if (mask >> i) & 1]
            hits.append((mask, members))
        shard_hits.append(hits)
    for hits in shard_hits:
        yield from hits


def cmd_enumerate(args):
    k, n = args.domain, args.arity
    budget = _budget_from(args)
    results = []
    for mask, members in _enumerate_masks(k, n, args.workers):
        rel = Relation.from_tuples(k, n, members)
        if args.filter == "key":
            if not key_report(rel, budget).is_key:
                continue
        results.append(mask)
    results.sort()
    if args.count:
        print(len(results))
    else:
        universe = sorted(product(range(k), repeat=n))
        total = k ** n
        listing = [
            _tuples_json(universe[i] for i in range(total) if (mask >> i) & 1)
            for mask in results
        ]
        print(_dump({"schema": 1, "count": len(results), "relations": listing}))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="keyrel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_budget(p):
        p.add_argument("--budget", type=int, default=None,
                       help="search node budget (default from KEYREL_BUDGET or 10^7)")

    p = sub.add_parser("analyze", help="full analysis report for a .rel file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.add_argument("--wnu-arity", type=int, default=3)
    add_budget(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("poly", help="search a shaped polymorphism")
    p.add_argument("file")
    p.add_argument("--kind", required=True,
                   choices=["wnu", "nu", "semilattice", "twoSemilattice", "idempotent"])
    p.add_argument("--arity", type=int, required=True)
    add_budget(p)
    p.set_defaults(func=cmd_poly)

    p = sub.add_parser("gf2", help="GF(2) linear disjunction decomposition")
    p.add_argument("file")
    p.set_defaults(func=cmd_gf2)

    p = sub.add_parser("core", help="compute a core fixing a key tuple")
    p.add_argument("file")
    p.add_argument("--key-tuple", required=True)
    add_budget(p)
    p.set_defaults(func=cmd_core)

    p = sub.add_parser("blocks", help="block decomposition of rho~")
    p.add_argument("file")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("witness", help="theorem witness extraction")
    p.add_argument("file")
    p.add_argument("--key-tuple", default=None)
    p.add_argument("--theorem", choices=["main", "full-pattern"], default="main")
    p.add_argument("--wnu-arity", type=int, default=3)
    add_budget(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("corpus", help="built-in corpus entries")
    p.add_argument("name")
    p.add_argument("--export", action="store_true", help="print the .rel file")
    add_budget(p)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("enumerate", help="enumerate relations over a small domain")
    p.add_argument("--domain", type=int, required=True)
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--filter", choices=["key"], default=None)
    p.add_argument("--count", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    add_budget(p)
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "witness" and args.theorem == "main" and not args.key_tuple:
        parser.error("--key-tuple is required for --theorem main")
    try:
        return args.func(args)
    except RelParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
