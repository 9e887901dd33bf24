"""Shared oracles and sample generators.

The oracles here deliberately avoid the library's own search machinery:
key decision is by enumeration of every unary vector-function, counts
come from affine-subspace combinatorics, and the essential fill is
re-evaluated from its positive-primitive formula.
"""

from itertools import product

from keyrel import Relation


def all_relations(k, n):
    """Every relation over {0..k-1}^n, in mask order."""
    universe = sorted(product(range(k), repeat=n))
    for mask in range(1 << len(universe)):
        yield Relation.from_tuples(
            k, n, (universe[i] for i in range(len(universe)) if (mask >> i) & 1)
        )


def brute_force_key(rel):
    """(is_key, key_tuples) by enumerating all k^(k*n) unary vector-functions."""
    k, n = rel.k, rel.arity
    maps = list(product(range(k), repeat=k))
    preserving = [
        vf for vf in product(maps, repeat=n)
        if all(tuple(vf[i][t[i]] for i in range(n)) in rel for t in rel.members)
    ]
    outside = list(rel.complement_tuples())
    keys = set()
    for beta in outside:
        if all(
            any(tuple(vf[i][a[i]] for i in range(n)) == beta for vf in preserving)
            for a in outside
        ):
            keys.add(beta)
    return bool(keys), frozenset(keys)


def gaussian_binomial(n, d, q=2):
    num = den = 1
    for i in range(d):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def affine_subspace_count(n):
    """Number of nonempty affine subspaces of GF(2)^n.

    Key relations over a 2-element domain are exactly the complements of
    these, so this is the expected key-relation count.
    """
    return sum(gaussian_binomial(n, d) * 2 ** (n - d) for d in range(n + 1))


def pp_fill(rel):
    """rho~ from its defining formula: for each coordinate some value re-enters rho."""
    members = frozenset(
        t for t in rel.all_tuples()
        if all(
            any(t[:j] + (y,) + t[j + 1:] in rel for y in range(rel.k))
            for j in range(rel.arity)
        )
    )
    return Relation(rel.k, rel.arity, members)


def all_vector_functions(k, n):
    maps = list(product(range(k), repeat=k))
    return list(product(maps, repeat=n))


def preserving_vector_functions(rel):
    return [
        vf for vf in all_vector_functions(rel.k, rel.arity)
        if all(
            tuple(vf[i][t[i]] for i in range(rel.arity)) in rel
            for t in rel.members
        )
    ]
