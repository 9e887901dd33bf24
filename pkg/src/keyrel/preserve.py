"""Preservation machinery: vector-function search, key decisions, polymorphisms.

Two backtracking searches live here.  `find_mapping_vf` looks for a unary
vector-function Psi preserving rho with Psi(alpha)=beta (the workhorse of
the key-tuple decision).  `search_polymorphism` looks for an operation
table of a requested shape (wnu/nu/semilattice/twoSemilattice/idempotent)
preserving rho.  Both are complete: a None result means the space was
exhausted, which is what lets tests state nonexistence.
"""

from dataclasses import dataclass, field
from itertools import product
from math import lcm

from .relcore import GuardError, InputError, Relation, dummy_variables, essential_witness

DEFAULT_BUDGET = 10_000_000

SHAPES = ("wnu", "nu", "semilattice", "twoSemilattice", "idempotent")


class BudgetExceeded(RuntimeError):
    """The node budget ran out before the search finished (not a proof of anything)."""

    def __init__(self, nodes):
        super().__init__(f"search budget exceeded after {nodes} nodes")
        self.nodes = nodes


@dataclass
class SearchBudget:
    """Node counter for one search; ExhaustedNone claims require it not to trip."""

    max_nodes: int = DEFAULT_BUDGET
    nodes: int = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise BudgetExceeded(self.nodes)


def _fresh(budget):
    if budget is None:
        return SearchBudget()
    if isinstance(budget, SearchBudget):
        return budget
    return SearchBudget(int(budget))


def _limit(budget):
    if budget is None:
        return DEFAULT_BUDGET
    if isinstance(budget, SearchBudget):
        return budget.max_nodes
    return int(budget)


@dataclass(frozen=True)
class UnaryVectorFunction:
    """Psi = (psi_1..psi_n); maps[i][a] is psi_{i+1}(a)."""

    k: int
    maps: tuple  # n tuples of length k

    @classmethod
    def identity(cls, k, arity):
        return cls(k, tuple(tuple(range(k)) for _ in range(arity)))

    @property
    def arity(self):
        return len(self.maps)

    def apply(self, t):
        if len(t) != self.arity:
            raise InputError("arity mismatch")
        return tuple(self.maps[i][c] for i, c in enumerate(t))

    def compose(self, other):
        """self after other, coordinatewise."""
        if self.arity != other.arity:
            raise InputError("arity mismatch")
        return UnaryVectorFunction(
            self.k,
            tuple(
                tuple(self.maps[i][other.maps[i][a]] for a in range(self.k))
                for i in range(self.arity)
            ),
        )

    def is_idempotent(self):
        return self.compose(self) == self

    def image_sets(self):
        return tuple(tuple(sorted(set(m))) for m in self.maps)

    def idempotent_power(self):
        """The first power Psi^t with Psi^t o Psi^t = Psi^t."""
        power = self
        for _ in range(2 * self.k * self.k):
            if power.is_idempotent():
                return power
            power = power.compose(self)
        raise RuntimeError("no idempotent power found (unreachable on a finite domain)")


def apply_vf(psi, t):
    return psi.apply(t)


def preserves_vf(psi, rel):
    """True iff Psi maps every member of rel into rel."""
    if psi.arity != rel.arity:
        raise InputError("arity mismatch")
    return all(psi.apply(t) in rel for t in rel.members)


@dataclass(frozen=True)
class OperationTable:
    """An m-ary operation on {0..k-1} as a flat table (coordinate 1 most significant)."""

    k: int
    arity: int
    table: tuple

    def apply(self, args):
        idx = 0
        for a in args:
            idx = idx * self.k + a
        return self.table[idx]

    @property
    def shape_flags(self):
        flags = set()
        if is_idempotent_op(self):
            flags.add("idempotent")
        if is_wnu(self):
            flags.add("wnu")
        if is_nu(self):
            flags.add("nu")
        if self.arity == 2:
            if is_semilattice(self):
                flags.add("semilattice")
            if is_two_semilattice(self):
                flags.add("twoSemilattice")
        return frozenset(flags)


def is_idempotent_op(f):
    return all(f.apply((a,) * f.arity) == a for a in range(f.k))


def _one_off_args(x, y, m):
    """All m-tuples with one x and m-1 copies of y."""
    return [(y,) * p + (x,) + (y,) * (m - 1 - p) for p in range(m)]


def is_wnu(f):
    """Idempotent, and all one-off evaluations f(x,y,..,y) etc. agree."""
    if not is_idempotent_op(f):
        return False
    for x in range(f.k):
        for y in range(f.k):
            if x == y:
                continue
            vals = {f.apply(args) for args in _one_off_args(x, y, f.arity)}
            if len(vals) != 1:
                return False
    return True


def is_nu(f):
    """WNU whose one-off value is the repeated argument."""
    if not is_idempotent_op(f):
        return False
    for x in range(f.k):
        for y in range(f.k):
            if x == y:
                continue
            if any(f.apply(args) != y for args in _one_off_args(x, y, f.arity)):
                return False
    return True


def is_commutative(f):
    return f.arity == 2 and all(
        f.apply((a, b)) == f.apply((b, a)) for a in range(f.k) for b in range(f.k)
    )


def is_semilattice(f):
    if f.arity != 2 or not is_idempotent_op(f) or not is_commutative(f):
        return False
    r = range(f.k)
    return all(
        f.apply((f.apply((a, b)), c)) == f.apply((a, f.apply((b, c))))
        for a in r for b in r for c in r
    )


def is_two_semilattice(f):
    if f.arity != 2 or not is_idempotent_op(f) or not is_commutative(f):
        return False
    return all(
        f.apply((a, f.apply((a, b)))) == f.apply((a, b))
        for a in range(f.k) for b in range(f.k)
    )


_SHAPE_CHECKS = {
    "wnu": is_wnu,
    "nu": is_nu,
    "semilattice": is_semilattice,
    "twoSemilattice": is_two_semilattice,
    "idempotent": is_idempotent_op,
}


@dataclass(frozen=True)
class KeyReport:
    is_key: bool
    key_tuples: frozenset
    certificates: dict = field(default_factory=dict, compare=False)


def solve_vector_function(rel, pinned, coord_domains=None, budget=None):
    """Some preserving Psi honoring `pinned` cells, with each psi_i mapping
    into coord_domains[i]; None if no such Psi exists.

    `pinned` maps cells (i, a) to required values (0-based coordinate i).
    Backtracking over the remaining cells that rel's members actually use,
    ordered by descending appearance count, values ascending.  Forward
    checking: a member with all cells assigned must land in rel, and a
    member with one open cell must have at least one completion.  Cells no
    member uses get the smallest allowed value.
    """
    n, k = rel.arity, rel.k
    if coord_domains is None:
        coord_domains = [tuple(range(k))] * n
    sb = _fresh(budget)

    assign = [[-1] * k for _ in range(n)]
    for (i, a), v in pinned.items():
        if v not in coord_domains[i]:
            return None
        if assign[i][a] not in (-1, v):
            return None
        assign[i][a] = v

    members = rel.sorted_members()
    usage = {}
    users = {}  # cell -> member indices
    for mi, t in enumerate(members):
        for i in range(n):
            cell = (i, t[i])
            usage[cell] = usage.get(cell, 0) + 1
            users.setdefault(cell, []).append(mi)

    def consistent(cell):
        """Check members touching `cell` that are now fully or nearly assigned."""
        for mi in users.get(cell, ()):
            t = members[mi]
            open_pos = -1
            image = []
            for i in range(n):
                v = assign[i][t[i]]
                if v == -1:
                    if open_pos != -1:
                        open_pos = -2
                        break
                    open_pos = i
                    image.append(-1)
                else:
                    image.append(v)
            if open_pos == -1:
                if tuple(image) not in rel:
                    return False
            elif open_pos >= 0:
                j = open_pos
                if not any(
                    tuple(image[:j] + [v] + image[j + 1:]) in rel
                    for v in coord_domains[j]
                ):
                    return False
        return True

    for cell in pinned:
        if not consistent(cell):
            return None

    variables = sorted(
        (cell for cell in usage if assign[cell[0]][cell[1]] == -1),
        key=lambda cell: (-usage[cell], cell),
    )

    def solve(pos):
        if pos == len(variables):
            return True
        i, a = variables[pos]
        for v in coord_domains[i]:
            sb.tick()
            assign[i][a] = v
            if consistent((i, a)) and solve(pos + 1):
                return True
            assign[i][a] = -1
        return False

    if not solve(0):
        return None
    maps = tuple(
        tuple(
            assign[i][a] if assign[i][a] != -1 else min(coord_domains[i])
            for a in range(k)
        )
        for i in range(n)
    )
    return UnaryVectorFunction(k, maps)


def find_mapping_vf(rel, alpha, beta, budget=None):
    """Some preserving Psi with Psi(alpha)=beta, or None if none exists."""
    alpha, beta = tuple(alpha), tuple(beta)
    rel._check_tuple(alpha)
    rel._check_tuple(beta)
    if alpha in rel or beta in rel:
        raise InputError("alpha and beta must lie outside the relation")
    pinned = {(i, alpha[i]): beta[i] for i in range(rel.arity)}
    return solve_vector_function(rel, pinned, budget=budget)


def is_key_tuple(rel, beta, budget=None):
    """True iff every alpha outside rel maps onto beta by some preserving Psi."""
    beta = tuple(beta)
    rel._check_tuple(beta)
    if beta in rel:
        raise InputError(f"{beta} is a member; key tuples lie outside the relation")
    limit = _limit(budget)
    for alpha in rel.complement_tuples():
        if find_mapping_vf(rel, alpha, beta, limit) is None:
            return False
    return True


def key_report(rel, budget=None, with_certificates=False):
    """Every key tuple of rel.

    When rel has no dummy variables only essential tuples can be key, so
    the candidate scan is restricted to them; otherwise all non-members
    are tried.
    """
    limit = _limit(budget)
    if dummy_variables(rel):
        candidates = rel.complement_tuples()
    else:
        candidates = (
            t for t in rel.complement_tuples() if essential_witness(rel, t) is not None
        )
    key_tuples = []
    certificates = {}
    for beta in candidates:
        if with_certificates:
            cert = {}
            ok = True
            for alpha in rel.complement_tuples():
                psi = find_mapping_vf(rel, alpha, beta, limit)
                if psi is None:
                    ok = False
                    break
                cert[alpha] = psi
            if ok:
                key_tuples.append(beta)
                certificates[beta] = cert
        elif is_key_tuple(rel, beta, limit):
            key_tuples.append(beta)
    key_tuples = frozenset(key_tuples)
    return KeyReport(bool(key_tuples), key_tuples, certificates)


def key_fill(rel, budget=None):
    """Key(rho): rel plus all its key tuples."""
    return Relation(rel.k, rel.arity, rel.members | key_report(rel, budget).key_tuples)


def preserves_op(f, rel):
    """True iff f applied columnwise to members (with repetition) stays in rel."""
    if f.k != rel.k:
        raise InputError("domain mismatch")
    members = rel.sorted_members()
    n = rel.arity
    for rows in product(members, repeat=f.arity):
        image = tuple(f.apply(tuple(r[j] for r in rows)) for j in range(n))
        if image not in rel:
            return False
    return True


def _shape_classes(k, m, shape):
    """Group the k^m argument tuples into search variables.

    Returns (class_of: dict arg->cid, pinned: dict cid->value, n_classes).
    Idempotency pins the diagonal; wnu unions all one-off tuples per (x,y);
    nu additionally pins them; binary commutative shapes union (a,b),(b,a).
    """
    class_key = {}
    for args in product(range(k), repeat=m):
        vals = set(args)
        if len(vals) == 1:
            class_key[args] = ("diag", args[0])
        elif shape in ("wnu", "nu") and len(vals) == 2:
            x, y = vals
            if args.count(x) == m - 1:
                x, y = y, x
            if args.count(y) == m - 1:
                class_key[args] = ("oneoff", x, y)
            else:
                class_key[args] = ("cell", args)
        elif shape in ("semilattice", "twoSemilattice"):
            class_key[args] = ("pair", tuple(sorted(args)))
        else:
            class_key[args] = ("cell", args)
    keys = sorted(set(class_key.values()))
    cid = {key: i for i, key in enumerate(keys)}
    class_of = {args: cid[key] for args, key in class_key.items()}
    pinned = {}
    for key, i in cid.items():
        if key[0] == "diag":
            pinned[i] = key[1]
        elif key[0] == "oneoff" and shape == "nu":
            pinned[i] = key[2]
    return class_of, pinned, len(keys)


def search_polymorphism(rel, shape, m, budget=None):
    """A shape-constrained m-ary polymorphism of rel, or None (space exhausted).

    Backtracking over cell classes (shape symmetries collapsed up front);
    preservation is checked incrementally as the classes a member-row
    combination needs become assigned.  Binary identities that cross cells
    (associativity, f(x,f(x,y))=f(x,y)) are checked at complete leaves.
    """
    if shape not in SHAPES:
        raise InputError(f"unknown shape {shape!r}")
    if shape in ("semilattice", "twoSemilattice") and m != 2:
        raise InputError(f"{shape} requires arity exactly 2")
    if m < 2:
        raise InputError("arity must be >= 2")
    k = rel.k
    if k ** m > (1 << 24):
        raise GuardError(f"k^m = {k}^{m} exceeds the size guard")
    sb = _fresh(budget)

    class_of, pinned, n_classes = _shape_classes(k, m, shape)
    value = [-1] * n_classes
    for i, v in pinned.items():
        value[i] = v

    members = rel.sorted_members()
    n = rel.arity

    # Unique preservation constraints: each is a tuple of n class ids whose
    # value-tuple must be a member.
    signatures = set()
    for rows in product(members, repeat=m):
        signatures.add(tuple(class_of[tuple(r[j] for r in rows)] for j in range(n)))
    signatures = sorted(signatures)

    free = [i for i in range(n_classes) if value[i] == -1]
    sig_usage = {i: 0 for i in free}
    for sig in signatures:
        for c in set(sig):
            if c in sig_usage:
                sig_usage[c] += 1
    free.sort(key=lambda c: (-sig_usage[c], c))
    order_pos = {c: p for p, c in enumerate(free)}

    ready_at = {}  # variable position -> signatures completed exactly there
    immediate = []
    for sig in signatures:
        positions = [order_pos[c] for c in sig if c in order_pos]
        if positions:
            ready_at.setdefault(max(positions), []).append(sig)
        else:
            immediate.append(sig)

    def sig_ok(sig):
        return tuple(value[c] for c in sig) in rel

    if not all(sig_ok(sig) for sig in immediate):
        return None

    def leaf_ok():
        if shape == "semilattice":
            r = range(k)
            g = lambda a, b: value[class_of[(a, b)]]
            return all(g(g(a, b), c) == g(a, g(b, c)) for a in r for b in r for c in r)
        if shape == "twoSemilattice":
            r = range(k)
            g = lambda a, b: value[class_of[(a, b)]]
            return all(g(a, g(a, b)) == g(a, b) for a in r for b in r)
        return True

    def solve(pos):
        if pos == len(free):
            return leaf_ok()
        c = free[pos]
        for v in range(k):
            sb.tick()
            value[c] = v
            if all(sig_ok(sig) for sig in ready_at.get(pos, ())) and solve(pos + 1):
                return True
            value[c] = -1
        return False

    if not solve(0):
        return None
    table = tuple(
        value[class_of[args]] for args in product(range(k), repeat=m)
    )
    f = OperationTable(k, m, table)
    assert _SHAPE_CHECKS[shape](f), "shape identities must re-verify on the built table"
    assert preserves_op(f, rel)
    return f


@dataclass(frozen=True)
class WnuPower:
    """A power f_t of a WNU f whose unary sections h_a are all idempotent.

    The m^t-ary operation is never materialized; `section(a)` returns the
    unary map h_a(x) = f_t(a,..,a,x) which is all that is needed downstream.
    """

    base: OperationTable
    exponent: int
    sections: tuple  # sections[a][x] = h_a(x)

    @property
    def arity(self):
        return self.base.arity ** self.exponent

    def section(self, a):
        return self.sections[a]


def _one_off_symmetric(f):
    """f(y,x..x) = f(x,y,x..x) = ... for all x,y; idempotency not required."""
    for x in range(f.k):
        for y in range(f.k):
            if x == y:
                continue
            vals = {f.apply(args) for args in _one_off_args(x, y, f.arity)}
            if len(vals) != 1:
                return False
    return True


def wnu_power(f, rel):
    """The first power of f (per-section compositions) with idempotent sections.

    Accepts any operation with symmetric one-off behavior; idempotency of
    f itself is not needed, only the sections' idempotency is produced.
    """
    if not _one_off_symmetric(f):
        raise InputError("f does not have symmetric one-off behavior")
    if rel is not None and not preserves_op(f, rel):
        raise InputError("f does not preserve the relation")
    k, m = f.k, f.arity

    def compose(h, g):
        return tuple(h[g[x]] for x in range(k))

    def exponent_of(h):
        """Minimal t with h^t o h^t = h^t."""
        power = h
        for t in range(1, 2 * k * k + 1):
            if compose(power, power) == power:
                return t
            power = compose(power, h)
        raise RuntimeError("unreachable: every self-map has an idempotent power")

    base_sections = [
        tuple(f.apply((a,) * (m - 1) + (x,)) for x in range(k)) for a in range(k)
    ]
    t = lcm(*(exponent_of(h) for h in base_sections))
    sections = []
    for h in base_sections:
        power = h
        for _ in range(t - 1):
            power = compose(power, h)
        assert compose(power, power) == power
        sections.append(power)
    return WnuPower(f, t, tuple(sections))
