"""Finite relations over a small domain, and the purely combinatorial ops on them.

A relation is a set of n-tuples over {0..k-1}.  Everything downstream
(preservation search, structure extraction) builds on the operations here:
projections, essential tuples and the fill rho~, the coordinate pattern,
and block decomposition of rho~.
"""

from dataclasses import dataclass
from itertools import product

MAX_DOMAIN = 16
MAX_TUPLES = 1 << 24


class GuardError(ValueError):
    """Input exceeds the desk-scale size guards."""


class InputError(ValueError):
    """An operation was called outside its contract."""


@dataclass(frozen=True)
class Relation:
    """An arity-n relation over {0..k-1}, stored as a frozenset of tuples.

    Canonical tuple index is mixed-radix with coordinate 1 most
    significant; all deterministic orderings derive from it (for int
    tuples this is plain lexicographic order).
    """

    k: int
    arity: int
    members: frozenset

    def __post_init__(self):
        if not (2 <= self.k <= MAX_DOMAIN):
            raise GuardError(f"domain size {self.k} outside [2, {MAX_DOMAIN}]")
        if self.arity < 1:
            raise InputError("arity must be >= 1")
        if self.k ** self.arity > MAX_TUPLES:
            raise GuardError(f"k^n = {self.k}^{self.arity} exceeds {MAX_TUPLES}")
        for t in self.members:
            if len(t) != self.arity:
                raise InputError(f"member {t} has wrong arity")
            if any(not (0 <= c < self.k) for c in t):
                raise InputError(f"member {t} has entries outside the domain")

    @classmethod
    def from_tuples(cls, k, arity, tuples):
        return cls(k, arity, frozenset(tuple(t) for t in tuples))

    @classmethod
    def full(cls, k, arity):
        return cls.from_tuples(k, arity, product(range(k), repeat=arity))

    @classmethod
    def empty(cls, k, arity):
        return cls(k, arity, frozenset())

    def __contains__(self, t):
        return tuple(t) in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.sorted_members())

    def sorted_members(self):
        return sorted(self.members)

    def all_tuples(self):
        """Every tuple of the ambient cube A^n, in index order."""
        return product(range(self.k), repeat=self.arity)

    def complement_tuples(self):
        return (t for t in self.all_tuples() if t not in self.members)

    def index(self, t):
        """Mixed-radix index, coordinate 1 most significant."""
        idx = 0
        for c in t:
            idx = idx * self.k + c
        return idx

    def is_full(self):
        return len(self.members) == self.k ** self.arity

    def _check_tuple(self, t):
        if len(t) != self.arity:
            raise InputError(f"tuple {t} has wrong arity")
        if any(not (0 <= c < self.k) for c in t):
            raise InputError(f"tuple {t} has entries outside the domain")


@dataclass(frozen=True)
class PatternReport:
    """The coordinate pattern: which pairs i,j (1-based) are ~-related."""

    arity: int
    related: tuple  # n x n tuple-of-tuples of bool, index 0 = coordinate 1
    is_equivalence: bool
    classes: tuple  # sorted tuple of sorted tuples of 1-based coords; () when not an equivalence
    classification: str  # trivial | almost-trivial | full | other-equivalence | not-equivalence


@dataclass(frozen=True)
class Block:
    """A connected component of rho~ under one-coordinate-difference adjacency."""

    members: frozenset
    coord_sets: tuple  # per-coordinate projections, as sorted tuples
    is_product: bool
    trivial: bool  # every member already lies in rho

    @property
    def classification(self):
        return "trivial" if self.trivial else "nontrivial"


class UnionFind:
    """Disjoint sets with path compression; roots are the minimum element."""

    def __init__(self):
        self.parent = {}

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = x
            return x
        if self.parent[x] != x:
            self.parent[x] = self.find(self.parent[x])
        return self.parent[x]

    def union(self, x, y):
        px, py = self.find(x), self.find(y)
        self.parent[px] = self.parent[py] = min(px, py)


def projection(rel, i):
    """Set of values appearing at coordinate i (1-based)."""
    if not (1 <= i <= rel.arity):
        raise InputError(f"coordinate {i} out of range 1..{rel.arity}")
    return {t[i - 1] for t in rel.members}


def essential_witness(rel, alpha):
    """Witness that alpha (not in rel) is essential, or None.

    The witness (b_1..b_n) has every single-coordinate substitution
    alpha[i := b_i] inside rel; each b_i is the smallest that works.
    """
    alpha = tuple(alpha)
    rel._check_tuple(alpha)
    if alpha in rel:
        raise InputError(f"{alpha} is a member; essentiality is about non-members")
    witness = []
    for i in range(rel.arity):
        for b in range(rel.k):
            if alpha[:i] + (b,) + alpha[i + 1:] in rel:
                witness.append(b)
                break
        else:
            return None
    return tuple(witness)


def essential_fill(rel):
    """rho~: rel plus all essential tuples."""
    extra = [t for t in rel.complement_tuples() if essential_witness(rel, t) is not None]
    return Relation(rel.k, rel.arity, rel.members | frozenset(extra))


def is_essential_relation(rel):
    """True iff some essential tuple exists."""
    return any(essential_witness(rel, t) is not None for t in rel.complement_tuples())


def dummy_variables(rel):
    """Coordinates (1-based) on which membership never depends."""
    dummies = set()
    for i in range(rel.arity):
        for t in rel.members:
            if any(t[:i] + (c,) + t[i + 1:] not in rel for c in range(rel.k)):
                break
        else:
            dummies.add(i + 1)
    return dummies


def _substitute(t, i, v):
    return t[:i] + (v,) + t[i + 1:]


def _classify(arity, related):
    """Classification labels for a reflexive symmetric coordinate relation."""
    n = arity
    for i in range(n):
        for j in range(n):
            for l in range(n):
                if related[i][j] and related[j][l] and not related[i][l]:
                    return False, (), "not-equivalence"
    seen = set()
    classes = []
    for i in range(n):
        if i in seen:
            continue
        cls = tuple(j + 1 for j in range(n) if related[i][j])
        seen.update(j - 1 for j in cls)
        classes.append(cls)
    classes = tuple(sorted(classes))
    sizes = sorted(len(c) for c in classes)
    if len(classes) == 1 and n > 1:
        label = "full"
    elif sizes[-1] == 1:
        label = "trivial"
    elif sizes[-1] == 2 and (len(sizes) == 1 or sizes[-2] == 1):
        label = "almost-trivial"
    else:
        label = "other-equivalence"
    return True, classes, label


def pattern(rel):
    """The pattern ~ on coordinates: i ~ j unless a witnessing quadruple exists.

    A quadruple for (i,j): a tuple a outside rel whose b_i-, b_j- and
    (b_i,b_j)-substitutions all lie in rel.
    """
    n = rel.arity
    related = [[True] * n for _ in range(n)]
    for a in rel.complement_tuples():
        for i in range(n):
            for j in range(i + 1, n):
                if not related[i][j]:
                    continue
                if _quadruple_exists(rel, a, i, j):
                    related[i][j] = related[j][i] = False
    related = tuple(tuple(row) for row in related)
    is_eq, classes, label = _classify(n, related)
    return PatternReport(n, related, is_eq, classes, label)


def _quadruple_exists(rel, a, i, j):
    for bi in range(rel.k):
        ti = _substitute(a, i, bi)
        if ti not in rel:
            continue
        for bj in range(rel.k):
            if _substitute(a, j, bj) in rel and _substitute(ti, j, bj) in rel:
                return True
    return False


def pattern_given_key_tuple(rel, alpha):
    """Same matrix as pattern(rel) when alpha is a key tuple; anchored scan."""
    alpha = tuple(alpha)
    rel._check_tuple(alpha)
    if alpha in rel:
        raise InputError(f"{alpha} is a member; a key tuple lies outside the relation")
    n = rel.arity
    related = [[True] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if _quadruple_exists(rel, alpha, i, j):
                related[i][j] = related[j][i] = False
    related = tuple(tuple(row) for row in related)
    is_eq, classes, label = _classify(n, related)
    return PatternReport(n, related, is_eq, classes, label)


def connected_components(tuples, k):
    """Components of a tuple set under single-coordinate-difference adjacency.

    Returned as a list of frozensets ordered by smallest member.
    """
    pool = set(tuples)
    uf = UnionFind()
    for t in pool:
        uf.find(t)
        for i in range(len(t)):
            for c in range(t[i]):
                s = _substitute(t, i, c)
                if s in pool:
                    uf.union(t, s)
    comps = {}
    for t in pool:
        comps.setdefault(uf.find(t), set()).add(t)
    return [frozenset(comps[r]) for r in sorted(comps)]


def _make_block(comp, rel):
    coord_sets = tuple(tuple(sorted({t[i] for t in comp})) for i in range(rel.arity))
    size = 1
    for cs in coord_sets:
        size *= len(cs)
    is_product = size == len(comp)
    trivial = all(t in rel for t in comp)
    return Block(comp, coord_sets, is_product, trivial)


def blocks(rel):
    """Connected components of rho~, ordered by smallest member index."""
    fill = essential_fill(rel)
    return [_make_block(comp, rel) for comp in connected_components(fill.members, rel.k)]


def restrict(rel, i, c):
    """Pin coordinate i (1-based) to c and drop it; arity n-1."""
    if not (1 <= i <= rel.arity):
        raise InputError(f"coordinate {i} out of range 1..{rel.arity}")
    if not (0 <= c < rel.k):
        raise InputError(f"element {c} outside the domain")
    if rel.arity < 2:
        raise InputError("cannot restrict an arity-1 relation")
    kept = frozenset(t[:i - 1] + t[i:] for t in rel.members if t[i - 1] == c)
    return Relation(rel.k, rel.arity - 1, kept)


def cylindrify(rel, s):
    """sigma x A^s: append s unconstrained coordinates."""
    if s < 1:
        raise InputError("s must be >= 1")
    if rel.k ** (rel.arity + s) > MAX_TUPLES:
        raise GuardError("cylindrification exceeds the size guard")
    members = frozenset(
        t + ext for t in rel.members for ext in product(range(rel.k), repeat=s)
    )
    return Relation(rel.k, rel.arity + s, members)
