"""Built-in worked examples and parameterized relation generators.

The three corpus entries are small relations with known, machine-checkable
facts; the generators produce the families the tests sample from (twisted
linear relations, punctured cubes, random relations, and the order-5
non-group quasigroup graph).
"""

import random
from dataclasses import dataclass
from itertools import permutations, product

from .relcore import GuardError, InputError, Relation

E1_TUPLES = (
    (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 2, 2),
    (1, 0, 0), (1, 1, 0), (1, 2, 0), (1, 2, 1),
    (2, 0, 0), (2, 0, 1), (2, 0, 2), (2, 1, 2),
)

# A Latin square of order 5 not isotopic to Z_5 (the only group of order 5);
# group extraction from its graph fails on associativity.
QUASIGROUP5 = (
    (0, 1, 2, 3, 4),
    (1, 0, 3, 4, 2),
    (2, 3, 4, 0, 1),
    (3, 4, 1, 2, 0),
    (4, 2, 0, 1, 3),
)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    relation: Relation
    known_facts: dict


def _e1():
    rel = Relation.from_tuples(3, 3, E1_TUPLES)
    facts = {
        "member_count": 12,
        "is_key": True,
        "key_tuples": ((0, 0, 0),),
        "pattern_classification": "trivial",
        "wnu3_exists": False,
        "perfect_pair_at_key": False,
    }
    return CorpusEntry("E1", rel, facts)


def _e2():
    members = [
        (x, y, z)
        for x in range(4) for y in range(4) for z in (0, 2)
        if (x + y + z) % 4 in (0, 1)
    ]
    rel = Relation.from_tuples(4, 3, members)
    facts = {
        "member_count": 16,
        "is_key": True,
        "pattern_classification": "not-equivalence",
        "pattern_related_pairs": ((1, 3), (2, 3)),
        "pattern_unrelated_pairs": ((1, 2),),
        "key_tuples_cover_box": True,  # every tuple of (AxAx{0,2}) \ rho is key
    }
    return CorpusEntry("E2", rel, facts)


def _e3():
    # Permutations of {0,1,2} in lexicographic one-line order index the
    # first coordinate.
    perms = sorted(permutations(range(3)))
    members = [(i, a, p[a]) for i, p in enumerate(perms) for a in range(3)]
    rel = Relation.from_tuples(6, 3, members)
    facts = {
        "member_count": 18,
        "is_key": True,
        "pattern_classification": "full",
        "key_fill_is_box": True,  # Key(rho) = {0..5} x {0,1,2} x {0,1,2}
        "rich": True,
        "strongly_rich": False,
        "block_structure_unmet": True,
    }
    return CorpusEntry("E3", rel, facts)


_ENTRIES = {"E1": _e1, "E2": _e2, "E3": _e3}


def corpus_get(name):
    if name not in _ENTRIES:
        raise InputError(f"unknown corpus entry {name!r} (have {sorted(_ENTRIES)})")
    return _ENTRIES[name]()


def linear_relation(k, n, twists=None, seed=None):
    """{x : sum_i pi_i(x_i) = 0 mod k} for per-coordinate bijections pi_i.

    With a seed the bijections are drawn reproducibly; by default they are
    identities.
    """
    if twists is None:
        if seed is None:
            twists = [list(range(k))] * n
        else:
            rng = random.Random(seed)
            twists = [rng.sample(range(k), k) for _ in range(n)]
    if len(twists) != n or any(sorted(tw) != list(range(k)) for tw in twists):
        raise InputError("twists must be n bijections of the domain")
    members = [
        t for t in product(range(k), repeat=n)
        if sum(twists[i][t[i]] for i in range(n)) % k == 0
    ]
    return Relation.from_tuples(k, n, members)


def punctured_cube(n, extra_hole=False):
    """{0,1}^n minus the origin; optionally minus (1,1,0,..,0) as well.

    The second hole gives the standard almost-trivial-pattern example.
    """
    holes = {(0,) * n}
    if extra_hole:
        if n < 2:
            raise InputError("the second hole needs arity >= 2")
        holes.add((1, 1) + (0,) * (n - 2))
    members = [t for t in product((0, 1), repeat=n) if t not in holes]
    return Relation.from_tuples(2, n, members)


def random_relation(k, n, density=0.5, seed=0):
    """A seeded random relation: each tuple kept with the given probability."""
    if k ** n > (1 << 20):
        raise GuardError("random generation above 2^20 tuples is not supported")
    rng = random.Random(f"{seed}|{k}|{n}|{density}")
    members = [t for t in product(range(k), repeat=n) if rng.random() < density]
    return Relation.from_tuples(k, n, members)


def quasigroup5():
    """The graph {(x,y,z) : x*y=z} of a non-group quasigroup of order 5."""
    members = [(x, y, QUASIGROUP5[x][y]) for x in range(5) for y in range(5)]
    return Relation.from_tuples(5, 3, members)


def verify_known_facts(entry, budget=None):
    """Re-check every known fact of a corpus entry; returns fact -> bool."""
    from .preserve import key_fill, key_report, search_polymorphism
    from .relcore import pattern
    from .structure import (
        find_perfect_pair,
        full_pattern_block_report,
        is_rich,
        is_strongly_rich,
    )

    rel = entry.relation
    facts = entry.known_facts
    out = {}
    report = None
    pat = pattern(rel)
    for name, expected in facts.items():
        if name == "member_count":
            out[name] = len(rel) == expected
        elif name == "is_key":
            report = report or key_report(rel, budget)
            out[name] = report.is_key == expected
        elif name == "key_tuples":
            report = report or key_report(rel, budget)
            out[name] = report.key_tuples == frozenset(expected)
        elif name == "pattern_classification":
            out[name] = pat.classification == expected
        elif name == "pattern_related_pairs":
            out[name] = all(pat.related[i - 1][j - 1] for i, j in expected)
        elif name == "pattern_unrelated_pairs":
            out[name] = all(not pat.related[i - 1][j - 1] for i, j in expected)
        elif name == "wnu3_exists":
            found = search_polymorphism(rel, "wnu", 3, budget)
            out[name] = (found is not None) == expected
        elif name == "perfect_pair_at_key":
            key = facts["key_tuples"][0]
            out[name] = (find_perfect_pair(rel, key) is not None) == expected
        elif name == "key_tuples_cover_box":
            report = report or key_report(rel, budget)
            box = [range(rel.k), range(rel.k), (0, 2)]
            expected_tuples = frozenset(
                t for t in product(*box) if t not in rel
            )
            out[name] = (report.key_tuples == expected_tuples) == expected
        elif name == "key_fill_is_box":
            box = [range(rel.k)] + [range(3)] * (rel.arity - 1)
            filled = key_fill(rel, budget)
            out[name] = (filled.members == frozenset(product(*box))) == expected
        elif name == "rich":
            out[name] = is_rich(rel) == expected
        elif name == "strongly_rich":
            out[name] = is_strongly_rich(rel) == expected
        elif name == "block_structure_unmet":
            rep = full_pattern_block_report(rel, None, budget)
            flagged = any(b.status == "theorem hypotheses unmet" for b in rep)
            out[name] = flagged == expected
        else:
            raise InputError(f"unknown fact {name!r}")
    return out


def generate(spec):
    """Dispatcher for generator specs, e.g. {"family": "linear", "k": 3, "n": 3}."""
    spec = dict(spec)
    family = spec.pop("family", None)
    makers = {
        "linear": linear_relation,
        "puncturedCube": punctured_cube,
        "random": random_relation,
        "quasigroup5": quasigroup5,
    }
    if family not in makers:
        raise InputError(f"unknown generator family {family!r}")
    return makers[family](**spec)
