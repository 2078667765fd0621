"""Value co-quantale arithmetic over validated finite lattices.

The monoid addition, the cached truncated subtraction a ∸ b, the symmetric
value distance, structural property flags and the builtin example carriers
all live here. Everything is exact integer table arithmetic; no floats.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass

import numpy as np

from . import lattice as lat
from .errors import (BadIdentity, NotAssociative, NotCommutative,
                     NotMeetDistributive, NotPositive, NotValueCoquantale,
                     NoWitness, SizeLimit, UnknownBuiltin, UnknownElement)

DEFAULT_SEED = 20260810


class CoQuantale:
    """A validated co-quantale: lattice + commutative monoid tables.

    ``add``, ``tsub`` and ``dsym`` are n x n element tables; ``tsub[a, b]``
    caches a ∸ b = ⋀{r : r + b ≥ a} and ``dsym[a, b]`` the symmetric value
    distance (a ∸ b) ∨ (b ∸ a). Instances are immutable after validation.
    """

    def __init__(self, lattice, add, tsub, dsym, value_flag,
                 co_divisible_flag, dualizers, safa_flag, name=""):
        self.lattice = lattice
        self.add = add
        self.tsub = tsub
        self.dsym = dsym
        self.value_flag = bool(value_flag)
        self.co_divisible_flag = bool(co_divisible_flag)
        self.dualizers = list(dualizers)
        self.safa_flag = bool(safa_flag)
        self.name = name or "coquantale"
        for table in (self.add, self.tsub, self.dsym):
            table.setflags(write=False)

    # -- value universe surface (shared with the symbolic free locale) -----

    @property
    def size(self):
        return self.lattice.n

    @property
    def bottom(self):
        return self.lattice.bottom

    @property
    def top(self):
        return self.lattice.top

    def carrier(self):
        return self.lattice.carrier()

    def contains(self, e):
        return isinstance(e, (int, np.integer)) and 0 <= e < self.lattice.n

    def le(self, a, b):
        return self.lattice.le(a, b)

    def meet(self, a, b):
        return self.lattice.meet2(a, b)

    def join(self, a, b):
        return self.lattice.join2(a, b)

    def meet_of(self, elems):
        return self.lattice.meet_of(elems)

    def join_of(self, elems):
        return self.lattice.join_of(elems)

    def plus(self, a, b):
        return int(self.add[a, b])

    def sub(self, a, b):
        return int(self.tsub[a, b])

    def sym_dist(self, a, b):
        return int(self.dsym[a, b])

    def cwb(self, a, b):
        return bool(self.lattice.cwb[a, b])

    def is_positive(self, e):
        return bool(self.lattice.cwb[self.lattice.bottom, e])

    def positives(self):
        return lat.positives(self.lattice)

    def element_name(self, e):
        return self.lattice.name(e)

    def parse_element(self, text):
        try:
            return self.lattice.index(text)
        except KeyError:
            raise UnknownElement("%r is not an element of %s" % (text, self.name))

    def __repr__(self):
        return "CoQuantale(%s, n=%d)" % (self.name, self.size)


def validate_coquantale(lattice, add, name="") -> CoQuantale:
    """Exhaustively verify the co-quantale axioms and fill all tables."""
    n = lattice.n
    add = np.asarray(add, dtype=np.int32)
    if add.shape != (n, n) or add.min() < 0 or add.max() >= n:
        raise BadIdentity("add table must be total on the carrier")
    names = lattice.elements
    leq, meet = lattice.leq, lattice.meet

    bad = add != add.T
    if bad.any():
        a, b = map(int, np.argwhere(bad)[0])
        raise NotCommutative("%s + %s != %s + %s" % (names[a], names[b], names[b], names[a]))
    ident = add[:, lattice.bottom] != np.arange(n)
    if ident.any():
        a = int(np.flatnonzero(ident)[0])
        raise BadIdentity("%s + 0 != %s" % (names[a], names[a]))
    left = add[add, :]                                    # (a+b)+c
    right = add[np.arange(n)[:, None, None], add[None]]   # a+(b+c)
    bad = left != right
    if bad.any():
        a, b, c = map(int, np.argwhere(bad)[0])
        raise NotAssociative("(%s+%s)+%s != %s+(%s+%s)"
                             % (names[a], names[b], names[c], names[a], names[b], names[c]))
    dist_l = add[np.arange(n)[:, None, None], meet[None]]          # a + (b ∧ c)
    dist_r = meet[add[:, :, None], add[:, None, :]]                # (a+b) ∧ (a+c)
    bad = dist_l != dist_r
    if bad.any():
        a, b, c = map(int, np.argwhere(bad)[0])
        raise NotMeetDistributive("a+(b∧c) != (a+b)∧(a+c) at (%s, %s, %s)"
                                  % (names[a], names[b], names[c]))
    bad = add[:, lattice.top] != lattice.top
    if bad.any():
        a = int(np.flatnonzero(bad)[0])
        raise NotMeetDistributive("%s + 1 != 1 (empty-meet distribution)" % names[a])

    tsub = _tsub_table(lattice, add)
    dsym = lattice.join[tsub, tsub.T].astype(np.int32)
    # (V, d^s) is T0 by antisymmetry; D-ultralimit uniqueness relies on it
    assert ((dsym == lattice.bottom) == np.eye(n, dtype=bool)).all()
    value_flag = lat.is_value_lattice(lattice)
    cq = CoQuantale(lattice, add, tsub, dsym, value_flag, False, [], False, name)
    cq.co_divisible_flag = is_co_divisible(cq)
    cq.dualizers = dualizing_elements(cq)
    cq.safa_flag = has_safa(cq)[0]
    return cq


def _tsub_table(lattice, add):
    """tsub[a, b] = ⋀{r : r + b ≥ a}, folded meet per (a, b) pair.

    Distribution over meets puts the fold result inside the set, so the
    infimum is attained; this is asserted before returning.
    """
    n = lattice.n
    leq, meet = lattice.leq, lattice.meet
    # member[r, b, a]: r + b >= a
    member = leq.T[add]
    acc = np.full((n, n), lattice.top, dtype=np.int32)  # indexed [b, a]
    for r in range(n):
        acc = np.where(member[r], meet[acc, r], acc)
    tsub = acc.T.astype(np.int32)
    attained = leq[np.arange(n)[:, None], add[tsub, np.arange(n)[None, :]]]
    assert attained.all(), "tsub infimum not attained: co-quantale axioms broken"
    return tsub


def trunc_sub(vq: CoQuantale, a, b) -> int:
    """The cached truncated subtraction a ∸ b."""
    return vq.sub(a, b)


# -- residuation law suite ------------------------------------------------


@dataclass
class LawResult:
    law: str
    passed: bool
    witness: str | None
    mode: str


@dataclass
class ResiduationReport:
    coquantale: str
    seed: int
    results: list

    @property
    def all_pass(self):
        return all(r.passed for r in self.results)

    def lines(self):
        out = ["residuation report for %s" % self.coquantale]
        for r in self.results:
            status = "pass" if r.passed else "FAIL at %s" % r.witness
            out.append("  %-22s %s  [%s]" % (r.law, status, r.mode))
        return out


def check_residuation_laws(vq: CoQuantale, exhaustive_subset_limit=6,
                           sample_count=200, seed=None) -> ResiduationReport:
    """Check Prop. adjunction (1)-(6), both family laws and the monotonicity
    exchange law, reporting the first counterexample per law if any.

    Family laws run over all subsets when the carrier has at most
    ``exhaustive_subset_limit`` elements, otherwise over ``sample_count``
    seeded random subsets (seed recorded in the report).
    """
    if seed is None:
        seed = int(os.environ.get("CQL_SEED", DEFAULT_SEED))
    n = vq.size
    leq = vq.lattice.leq
    add, tsub = vq.add, vq.tsub
    names = vq.lattice.elements
    idx = np.arange(n)
    results = []

    def record(law, ok_array, mode="exhaustive"):
        if bool(np.asarray(ok_array).all()):
            results.append(LawResult(law, True, None, mode))
        else:
            where = np.argwhere(~np.asarray(ok_array))[0]
            witness = "(" + ", ".join(names[int(i)] for i in where) + ")"
            results.append(LawResult(law, False, witness, mode))

    record("adjunction-1", leq[tsub][:, :, :] == leq[:, add])
    record("adjunction-2", leq[idx[:, None], add[tsub, idx[None, :]]])
    record("adjunction-3", leq[tsub[add, idx[None, :]], idx[:, None]])
    record("adjunction-4", (tsub == vq.bottom) == leq)
    a5a = tsub[:, add]
    a5b = tsub[tsub, :]
    record("adjunction-5", (a5a == a5b) & (a5a == a5b.transpose(0, 2, 1)))
    rhs6 = add[tsub[:, :, None], tsub[None, :, :]]
    record("adjunction-6", leq[np.broadcast_to(tsub[:, None, :], rhs6.shape), rhs6])
    ok = np.ones((n, n, n), dtype=bool)
    for a in range(n):
        for b in range(n):
            if leq[a, b]:
                ok[a, b] = leq[tsub[:, b], tsub[:, a]] & leq[tsub[a], tsub[b]]
    record("monotone-exchange", ok)

    masks, mode = _subset_masks(n, exhaustive_subset_limit, sample_count, seed)
    join_tab = vq.lattice.join
    ok_join = True
    ok_meet = True
    witness_join = witness_meet = None
    for mask in masks:
        members = [i for i in range(n) if mask >> i & 1]
        jfold = vq.join_of(members)
        mfold = vq.meet_of(members)
        lhs_join = tsub[jfold]                      # (⋁ b_i) ∸ a per a
        lhs_meet = tsub[:, mfold]                   # a ∸ (⋀ b_i) per a
        rhs_join = np.full(n, vq.bottom, dtype=np.int32)
        rhs_meet = np.full(n, vq.bottom, dtype=np.int32)
        for b in members:
            rhs_join = join_tab[rhs_join, tsub[b]]
            rhs_meet = join_tab[rhs_meet, tsub[:, b]]
        if ok_join and (lhs_join != rhs_join).any():
            a = int(np.flatnonzero(lhs_join != rhs_join)[0])
            witness_join = "(a=%s, S={%s})" % (names[a], ",".join(names[i] for i in members))
            ok_join = False
        if ok_meet and (lhs_meet != rhs_meet).any():
            a = int(np.flatnonzero(lhs_meet != rhs_meet)[0])
            witness_meet = "(a=%s, S={%s})" % (names[a], ",".join(names[i] for i in members))
            ok_meet = False
    results.append(LawResult("join-family", ok_join, witness_join, mode))
    results.append(LawResult("meet-family", ok_meet, witness_meet, mode))
    return ResiduationReport(vq.name, seed, results)


def _subset_masks(n, limit, sample_count, seed):
    if n <= limit:
        return range(1 << n), "exhaustive"
    rng = random.Random(seed)
    masks = [rng.getrandbits(n) for _ in range(sample_count)]
    return masks, "sampled(seed=%d, count=%d)" % (seed, sample_count)


# -- structural property detectors ---------------------------------------------


def is_co_divisible(vq: CoQuantale) -> bool:
    """a ≤ b implies b = a + (b ∸ a), checked for all pairs."""
    n = vq.size
    idx = np.arange(n)
    rebuilt = vq.add[idx[:, None], vq.tsub.T]      # a + (b ∸ a) at [a, b]
    return bool(np.where(vq.lattice.leq, rebuilt == idx[None, :], True).all())


def dualizing_elements(vq: CoQuantale):
    """All d with a = d ∸ (d ∸ a) for every a."""
    n = vq.size
    idx = np.arange(n)
    return [int(d) for d in range(n) if (vq.tsub[d][vq.tsub[d]] == idx).all()]


def is_co_girard(vq: CoQuantale) -> bool:
    return bool(dualizing_elements(vq))


def has_safa(vq: CoQuantale):
    """Decide the sequential-approximation-from-above property.

    On a finite carrier a decreasing positive sequence with meet 0 is
    eventually constant, so one exists iff 0 ≺ 0; the witness is then the
    constant sequence at 0.
    """
    if vq.cwb(vq.bottom, vq.bottom):
        return True, [vq.bottom]
    return False, None


# -- epsilon arguments -----------------------------------------------------------


def epsilon_halver(vq: CoQuantale, eps) -> int:
    """A maximal δ ∈ V⁺ with δ + δ ≺ ε (ties broken by lowest index)."""
    return epsilon_n_divider(vq, eps, 2)


def epsilon_n_divider(vq: CoQuantale, eps, n) -> int:
    """A maximal θ ∈ V⁺ with nθ ≺ ε (ties broken by lowest index)."""
    if not vq.value_flag:
        raise NotValueCoquantale("%s is not a value co-quantale" % vq.name)
    if not vq.is_positive(eps):
        raise NotPositive("%s is not in the positives filter" % vq.element_name(eps))
    if n < 1:
        raise ValueError("n must be positive")
    good = []
    for theta in vq.positives():
        total = theta
        for _ in range(n - 1):
            total = vq.plus(total, theta)
        if vq.cwb(total, eps):
            good.append(theta)
    if not good:
        raise NoWitness("no θ with %dθ ≺ %s; value axioms violated"
                        % (n, vq.element_name(eps)))
    maximal = [d for d in good if not any(e != d and vq.le(d, e) for e in good)]
    return min(maximal)


# -- builtin carriers ---------------------------------------------------------------

CHAIN_MAX = 64
FREELOCALE_MAX = 3


def builtin(spec: str) -> CoQuantale:
    """Construct a named example co-quantale.

    Accepted: ``bool2``, ``chain:n`` (1 <= n <= 64), ``lukasiewicz:n``
    (1 <= n <= 64) and ``freelocale:k`` (0 <= k <= 3). Every builtin goes
    through full validation.
    """
    kind, _, arg = spec.partition(":")
    if kind == "bool2" and not arg:
        return _chain_like(1, ["0", "1"], "bool2")
    if kind in ("chain", "lukasiewicz"):
        try:
            n = int(arg)
        except ValueError:
            raise UnknownBuiltin("bad size in %r" % spec)
        if n < 1:
            raise UnknownBuiltin("chain size must be positive")
        if n > CHAIN_MAX:
            raise SizeLimit("chain size capped at %d" % CHAIN_MAX)
        if kind == "chain":
            return _chain_like(n, [str(i) for i in range(n + 1)], spec)
        # Lukasiewicz levels, stored with the order already reversed: index i
        # is the grid point (n-i)/n, so the monoid identity (the real 1) sits
        # at the lattice bottom and add(i, j) = min(n, i+j) on indices.
        return _chain_like(n, ["%d/%d" % (n - i, n) for i in range(n + 1)], spec)
    if kind == "freelocale":
        try:
            k = int(arg)
        except ValueError:
            raise UnknownBuiltin("bad size in %r" % spec)
        if k < 0:
            raise UnknownBuiltin("freelocale size must be >= 0")
        if k > FREELOCALE_MAX:
            raise SizeLimit("freelocale ground set capped at %d" % FREELOCALE_MAX)
        from .freelocale import FreeLocale
        return FreeLocale(tuple("abc"[:k])).materialize(name=spec)
    raise UnknownBuiltin(spec)


def _chain_like(n, names, name):
    size = n + 1
    order = np.fromfunction(lambda i, j: i <= j, (size, size), dtype=int)
    lattice = lat.validate_lattice(order, names)
    add = np.minimum(np.add.outer(np.arange(size), np.arange(size)), n)
    return validate_coquantale(lattice, add, name=name)
