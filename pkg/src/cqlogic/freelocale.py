"""Free locale over a finite ground set, with symbolic elements.

An element is a down-closed family of subsets of the ground set R, stored
extensionally as a frozenset of frozensets. The lattice order is reverse
inclusion (p <= q iff p is a superset of q), so the full powerset family is
the bottom and the empty family the top; the monoid addition is family
intersection, which coincides with the lattice join.

The carrier itself grows like the Dedekind numbers (2, 3, 6, 20, 168, ...),
so it is only enumerated - and only then turned into ordinary co-quantale
tables - for ground sets of at most MATERIALIZE_MAX elements. All element
operations work symbolically for any ground size the powerset fits.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from . import lattice as lat
from .coquantale import validate_coquantale
from .errors import SizeLimit, UnknownElement

MATERIALIZE_MAX = 4   # Dedekind(4) = 168; Dedekind(5) = 7581 is already too big
SYMBOLIC_MAX = 8      # powerset of the ground set must stay enumerable


def _powerset(ground):
    out = []
    for k in range(len(ground) + 1):
        for combo in combinations(ground, k):
            out.append(frozenset(combo))
    return out


def downclose(sets):
    """The down-closure of a family of sets, as a frozenset of frozensets."""
    closed = set()
    for s in sets:
        s = frozenset(s)
        for k in range(len(s) + 1):
            for combo in combinations(sorted(s), k):
                closed.add(frozenset(combo))
    return frozenset(closed)


class FreeLocale:
    """Value universe over ground set R: down-closed families under ⊇."""

    def __init__(self, ground):
        self.ground = tuple(str(g) for g in ground)
        if len(set(self.ground)) != len(self.ground):
            raise ValueError("ground names must be unique")
        if len(self.ground) > SYMBOLIC_MAX:
            raise SizeLimit("free locale ground set capped at %d" % SYMBOLIC_MAX)
        self.name = "freelocale(%s)" % ",".join(self.ground)
        self._psets = _powerset(self.ground)
        self.bottom = frozenset(self._psets)
        self.top = frozenset()
        self._subsets = {s: downclose([s]) for s in self._psets}
        self._carrier = None

    # -- value universe surface ------------------------------------------

    @property
    def size(self):
        if len(self.ground) <= MATERIALIZE_MAX:
            return len(self.carrier())
        return None

    def contains(self, p):
        if not isinstance(p, frozenset):
            return False
        return all(s in self._subsets and self._subsets[s] <= p for s in p)

    def le(self, p, q):
        return q <= p

    def meet(self, p, q):
        return p | q

    def join(self, p, q):
        return p & q

    def plus(self, p, q):
        return p & q

    def meet_of(self, elems):
        acc = self.top
        for e in elems:
            acc = acc | e
        return acc

    def join_of(self, elems):
        acc = self.bottom
        for e in elems:
            acc = acc & e
        return acc

    def sub(self, p, q):
        """p ∸ q = the largest down-closed r with r ∧_family q inside p."""
        return frozenset(s for s in self._psets
                         if all(t not in q or t in p for t in self._subsets[s]))

    def sym_dist(self, p, q):
        return self.sub(p, q) & self.sub(q, p)

    def cwb(self, p, q):
        """p ≺ q iff some member of p contains every member of q."""
        return any(all(t <= s for t in q) for s in p)

    def is_positive(self, p):
        return self.cwb(self.bottom, p)

    def positives(self):
        return [p for p in self.carrier() if self.is_positive(p)]

    def carrier(self):
        if self._carrier is None:
            if len(self.ground) > MATERIALIZE_MAX:
                raise SizeLimit("carrier of %s is not enumerable" % self.name)
            self._carrier = self._enumerate()
        return self._carrier

    def _enumerate(self):
        psets = self._psets
        m = len(psets)
        pos = {s: i for i, s in enumerate(psets)}
        need = [0] * m
        for i, s in enumerate(psets):
            for t in self._subsets[s]:
                need[i] |= 1 << pos[t]
        families = []
        for mask in range(1 << m):
            ok = True
            probe = mask
            while probe:
                low = probe & -probe
                if need[low.bit_length() - 1] & ~mask:
                    ok = False
                    break
                probe ^= low
            if ok:
                families.append(frozenset(psets[i] for i in range(m) if mask >> i & 1))
        families.sort(key=self._sort_key)
        return families

    def _sort_key(self, p):
        return (len(p), sorted((len(s), tuple(sorted(s))) for s in p))

    # -- naming ------------------------------------------------------------

    def maximal_members(self, p):
        return [s for s in p if not any(s < t for t in p)]

    def element_name(self, p):
        parts = sorted((len(s), tuple(sorted(s))) for s in self.maximal_members(p))
        return "{%s}" % ",".join("+".join(names) if names else "0"
                                 for _, names in parts)

    def parse_element(self, text):
        text = text.strip()
        if not (text.startswith("{") and text.endswith("}")):
            raise UnknownElement("%r is not a family literal" % text)
        body = text[1:-1]
        gens = []
        if body:
            for token in body.split(","):
                token = token.strip()
                if token == "0":
                    gens.append(frozenset())
                    continue
                names = token.split("+")
                for nm in names:
                    if nm not in self.ground:
                        raise UnknownElement("%r is not a ground element" % nm)
                gens.append(frozenset(names))
        return downclose(gens)

    # -- table form ---------------------------------------------------------

    def materialize(self, name=None):
        """Enumerate the carrier and run it through full table validation."""
        families = self.carrier()
        n = len(families)
        index = {p: i for i, p in enumerate(families)}
        order = np.zeros((n, n), dtype=bool)
        add = np.zeros((n, n), dtype=np.int32)
        for i, p in enumerate(families):
            for j, q in enumerate(families):
                order[i, j] = self.le(p, q)
                add[i, j] = index[p & q]
        lattice = lat.validate_lattice(order, [self.element_name(p) for p in families])
        return validate_coquantale(lattice, add, name=name or self.name)

    def __repr__(self):
        return "FreeLocale(ground=%r)" % (self.ground,)
