"""Finite complete lattices and the co-well-below relation.

Elements are opaque indices 0..n-1 into shared tables; user-facing names
live in a parallel list. All tables are filled and frozen at validation
time, so every operation afterwards is a pure table lookup.
"""

from __future__ import annotations

import numpy as np

from .errors import NoBoundedness, NotALattice, NotAPartialOrder, SizeLimit

ORACLE_LIMIT = 16  # 2^n subsets; keep the brute-force oracle honest but bounded


class FiniteLattice:
    """A validated finite complete lattice.

    Fields: ``elements`` (names), ``leq`` (n x n bool), ``bottom``/``top``
    (indices), ``meet``/``join`` (n x n element tables) and ``cwb`` caching
    the co-well-below relation x ≺ y.
    """

    def __init__(self, elements, leq, bottom, top, meet, join, cwb):
        self.elements = list(elements)
        self.n = len(self.elements)
        self.leq = leq
        self.bottom = int(bottom)
        self.top = int(top)
        self.meet = meet
        self.join = join
        self.cwb = cwb
        self._index = {name: i for i, name in enumerate(self.elements)}
        for table in (self.leq, self.meet, self.join, self.cwb):
            table.setflags(write=False)

    # -- element helpers ---------------------------------------------------

    def index(self, name):
        return self._index[name]

    def name(self, e):
        return self.elements[e]

    def carrier(self):
        return range(self.n)

    def le(self, x, y):
        return bool(self.leq[x, y])

    def meet2(self, x, y):
        return int(self.meet[x, y])

    def join2(self, x, y):
        return int(self.join[x, y])

    def meet_of(self, elems):
        acc = self.top
        for e in elems:
            acc = int(self.meet[acc, e])
        return acc

    def join_of(self, elems):
        acc = self.bottom
        for e in elems:
            acc = int(self.join[acc, e])
        return acc

    def __repr__(self):
        return "FiniteLattice(n=%d)" % self.n


def validate_lattice(order, names=None) -> FiniteLattice:
    """Check a binary relation table and derive all lattice tables.

    Raises NotAPartialOrder / NotALattice / NoBoundedness with a witness.
    """
    leq = np.asarray(order, dtype=bool)
    if leq.ndim != 2 or leq.shape[0] != leq.shape[1] or leq.shape[0] == 0:
        raise NotAPartialOrder("order must be a nonempty square table")
    n = leq.shape[0]
    if names is None:
        names = ["e%d" % i for i in range(n)]
    names = [str(x) for x in names]
    if len(names) != n or len(set(names)) != n:
        raise NotAPartialOrder("element names must be unique and match the table size")

    if not leq.diagonal().all():
        x = int(np.flatnonzero(~leq.diagonal())[0])
        raise NotAPartialOrder("not reflexive at %s" % names[x])
    sym = leq & leq.T & ~np.eye(n, dtype=bool)
    if sym.any():
        x, y = map(int, np.argwhere(sym)[0])
        raise NotAPartialOrder("not antisymmetric at (%s, %s)" % (names[x], names[y]))
    closure = (leq.astype(np.uint8) @ leq.astype(np.uint8)) > 0
    broken = closure & ~leq
    if broken.any():
        x, z = map(int, np.argwhere(broken)[0])
        y = int(np.flatnonzero(leq[x] & leq[:, z])[0])
        raise NotAPartialOrder(
            "not transitive: %s <= %s <= %s but not %s <= %s"
            % (names[x], names[y], names[z], names[x], names[z]))

    below_all = leq.all(axis=1)   # candidates for bottom
    above_all = leq.all(axis=0)
    if not below_all.any() or not above_all.any():
        raise NoBoundedness("no global bottom or top element")
    bottom = int(np.flatnonzero(below_all)[0])
    top = int(np.flatnonzero(above_all)[0])

    meet = _bound_table(leq, names, kind="meet")
    join = _bound_table(leq.T, names, kind="join")
    cwb = _cwb_table(leq, meet, top)
    return FiniteLattice(names, leq, bottom, top, meet, join, cwb)


def _bound_table(leq, names, kind):
    """Greatest lower bounds for every pair (meets for leq, joins for leq.T)."""
    n = leq.shape[0]
    # lb[z, x, y]: z is a lower bound of {x, y}
    lb = leq[:, :, None] & leq[:, None, :]
    flat = lb.reshape(n, n * n)
    # dominated[z, xy]: some lower bound w is not <= z
    dominated = ((~leq.T).astype(np.uint8) @ flat.astype(np.uint8)) > 0
    ok = flat & ~dominated
    counts = ok.sum(axis=0)
    if (counts == 0).any():
        pos = int(np.flatnonzero(counts == 0)[0])
        x, y = divmod(pos, n)
        raise NotALattice("no %s for pair (%s, %s)" % (kind, names[x], names[y]))
    return ok.argmax(axis=0).reshape(n, n).astype(np.int32)


def _cwb_table(leq, meet, top):
    """x ≺ y computed by the closed form ⋀{a : a ≰ y} ≰ x, one fold per y."""
    n = leq.shape[0]
    cwb = np.zeros((n, n), dtype=bool)
    for y in range(n):
        m = top
        for a in np.flatnonzero(~leq[:, y]):
            m = meet[m, a]
        cwb[:, y] = ~leq[m]
    return cwb


# -- operations ---------------------------------------------------------------


def subset_meet(lat: FiniteLattice, elems) -> int:
    """Greatest lower bound of a subset; the empty meet is top."""
    return lat.meet_of(elems)


def subset_join(lat: FiniteLattice, elems) -> int:
    """Least upper bound of a subset; the empty join is bottom."""
    return lat.join_of(elems)


def co_well_below(lat: FiniteLattice, x, y) -> bool:
    """x ≺ y via the cached closed-form table."""
    return bool(lat.cwb[x, y])


def co_well_below_oracle(lat: FiniteLattice, x, y) -> bool:
    """The quantified definition over all 2^n subsets, kept as a permanent
    cross-check of the closed form.  Exponential; refuses large carriers."""
    n = lat.n
    if n > ORACLE_LIMIT:
        raise SizeLimit("oracle limited to %d elements" % ORACLE_LIMIT)
    meets = _subset_meets(lat)
    below_y = [lat.le(a, y) for a in range(n)]
    for mask in range(1 << n):
        if lat.le(meets[mask], x):
            if not any(below_y[a] for a in _bits(mask)):
                return False
    return True


def _subset_meets(lat):
    """Meet of every bitmask subset, via the fold-from-top convention."""
    meets = [lat.top] * (1 << lat.n)
    for mask in range(1, 1 << lat.n):
        low = (mask & -mask).bit_length() - 1
        meets[mask] = lat.meet2(meets[mask & (mask - 1)], low)
    return meets


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def is_completely_distributive(lat: FiniteLattice) -> bool:
    """a = ⋀{b : a ≺ b} for every a."""
    return all(lat.meet_of(np.flatnonzero(lat.cwb[a])) == a for a in lat.carrier())


def positives(lat: FiniteLattice):
    """The set {ε : 0 ≺ ε} as a sorted list of element indices."""
    return [int(e) for e in np.flatnonzero(lat.cwb[lat.bottom])]


def is_value_lattice(lat: FiniteLattice) -> bool:
    """Completely distributive, 0 ≺ 1, and positives closed under meet."""
    if not is_completely_distributive(lat):
        return False
    if not lat.cwb[lat.bottom, lat.top]:
        return False
    pos = positives(lat)
    return all(lat.cwb[lat.bottom, lat.meet2(d, e)] for d in pos for e in pos)
