"""Finite V-continuity spaces, their topologies, and the two dictionaries
(preorders over the two-element carrier, topological spaces over free
locales).

A space stores its value universe V (a table co-quantale or a symbolic free
locale), an ordered point list and a dist table of V elements. Point sets
returned by operations are frozensets of point names.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .coquantale import builtin
from .errors import (NotAPreorder, NotATopology, NotPositive,
                     ReflexivityViolation, SizeLimit, TransitivityViolation)
from .freelocale import FreeLocale, downclose

TOPOLOGY_SCAN_MAX = 16
THEOREM_SCAN_MAX = 8
FLAGG_POINTS_MAX = 3


class ContinuitySpace:
    def __init__(self, values, points, dist):
        self.V = values
        self.points = list(points)
        self.dist = [list(row) for row in dist]
        self._index = {p: i for i, p in enumerate(self.points)}

    @property
    def m(self):
        return len(self.points)

    def index(self, point):
        return self._index[point]

    def d(self, x, y):
        return self.dist[x][y]

    def point_set(self, indices):
        return frozenset(self.points[i] for i in indices)

    def indices(self, names):
        return [self._index[p] for p in names]

    def __repr__(self):
        return "ContinuitySpace(points=%r over %s)" % (self.points, getattr(self.V, "name", "V"))


def validate_space(values, points, dist) -> ContinuitySpace:
    """Check reflexivity and the triangle law exhaustively."""
    points = [str(p) for p in points]
    if not points or len(set(points)) != len(points):
        raise ReflexivityViolation("points must be a nonempty list of unique names")
    m = len(points)
    if len(dist) != m or any(len(row) != m for row in dist):
        raise ReflexivityViolation("dist table must be %d x %d" % (m, m))
    contains = getattr(values, "contains", None)
    for row in dist:
        for e in row:
            if contains is not None and not contains(e):
                raise ReflexivityViolation("dist entry %r is not a V element" % (e,))
    for x in range(m):
        if dist[x][x] != values.bottom:
            raise ReflexivityViolation("d(%s,%s) != 0" % (points[x], points[x]))
    if hasattr(values, "add") and hasattr(values, "lattice"):
        table = np.asarray(dist, dtype=np.int32)
        path = values.add[table[:, :, None], table[None, :, :]]   # [x,z,y] = d(x,z) + d(z,y)
        ok = values.lattice.leq[table[:, :, None], path.transpose(0, 2, 1)]
        if not ok.all():
            x, y, z = map(int, np.argwhere(~ok)[0])
            raise TransitivityViolation(
                "d(%s,%s) > d(%s,%s) + d(%s,%s)"
                % (points[x], points[y], points[x], points[z], points[z], points[y]))
    else:
        for x in range(m):
            for y in range(m):
                for z in range(m):
                    if not values.le(dist[x][y], values.plus(dist[x][z], dist[z][y])):
                        raise TransitivityViolation(
                            "d(%s,%s) > d(%s,%s) + d(%s,%s)"
                            % (points[x], points[y], points[x], points[z], points[z], points[y]))
    return ContinuitySpace(values, points, dist)


def dual_space(space: ContinuitySpace) -> ContinuitySpace:
    """Transpose the distance table."""
    m = space.m
    dist = [[space.dist[y][x] for y in range(m)] for x in range(m)]
    return validate_space(space.V, space.points, dist)


def symmetric_space(space: ContinuitySpace) -> ContinuitySpace:
    """d^s(x,y) = d(x,y) ∨ d(y,x)."""
    V, m = space.V, space.m
    dist = [[V.join(space.dist[x][y], space.dist[y][x]) for y in range(m)]
            for x in range(m)]
    return validate_space(V, space.points, dist)


def product_space(left: ContinuitySpace, right: ContinuitySpace) -> ContinuitySpace:
    """Pointwise-max product distance on the cartesian product."""
    if left.V is not right.V:
        raise ValueError("product factors must share a value universe")
    V = left.V
    points = ["%s|%s" % (p, q) for p in left.points for q in right.points]
    pairs = [(i, j) for i in range(left.m) for j in range(right.m)]
    dist = [[V.join(left.dist[i1][i2], right.dist[j1][j2])
             for (i2, j2) in pairs] for (i1, j1) in pairs]
    return validate_space(V, points, dist)


def is_symmetric(space: ContinuitySpace) -> bool:
    return all(space.dist[x][y] == space.dist[y][x]
               for x in range(space.m) for y in range(space.m))


# -- discs, topology, closure ---------------------------------------------------


def disc(space: ContinuitySpace, x, eps):
    """Open disc {y : d(x,y) ≺ ε}; ε must be positive."""
    V = space.V
    if not V.is_positive(eps):
        raise NotPositive("%s is not positive" % V.element_name(eps))
    i = space.index(x)
    return space.point_set(y for y in range(space.m) if V.cwb(space.dist[i][y], eps))


def closed_disc(space: ContinuitySpace, x, eps):
    """Closed disc {y : d(x,y) ≤ ε}; any ε is allowed."""
    V = space.V
    i = space.index(x)
    return space.point_set(y for y in range(space.m) if V.le(space.dist[i][y], eps))


@dataclass(frozen=True)
class Topology:
    points: tuple
    opens: frozenset

    def __contains__(self, subset):
        return frozenset(subset) in self.opens


def validate_topology(points, opens) -> Topology:
    """Exhaustively check the finite topology axioms."""
    points = tuple(str(p) for p in points)
    full = frozenset(points)
    opens = frozenset(frozenset(u) for u in opens)
    for u in opens:
        if not u <= full:
            raise NotATopology("open set %r is not a subset of the points" % (set(u),))
    if frozenset() not in opens or full not in opens:
        raise NotATopology("must contain the empty set and the full set")
    for u in opens:
        for w in opens:
            if u & w not in opens:
                raise NotATopology("not closed under intersection: %r, %r" % (set(u), set(w)))
            if u | w not in opens:
                raise NotATopology("not closed under union: %r, %r" % (set(u), set(w)))
    return Topology(points, opens)


def induced_topology(space: ContinuitySpace) -> Topology:
    """All subsets U such that every x in U has a positive disc inside U.

    With an enumerable positives filter this is the definitional scan. When
    the carrier is too large to enumerate but the bottom itself is positive
    (every finite free locale), membership of a minimal disc suffices: ≺ is
    monotone in its right argument, so B_0(x) is contained in every disc.
    """
    if space.m > TOPOLOGY_SCAN_MAX:
        raise SizeLimit("induced topology scan capped at %d points" % TOPOLOGY_SCAN_MAX)
    V = space.V
    m = space.m
    try:
        positives = V.positives()
        all_discs = [{frozenset(y for y in range(m) if V.cwb(space.dist[x][y], e))
                      for e in positives} for x in range(m)]
    except SizeLimit:
        if not V.is_positive(V.bottom):
            raise
        all_discs = [{frozenset(y for y in range(m) if V.cwb(space.dist[x][y], V.bottom))}
                     for x in range(m)]
    disc_sets = [_minimal_sets(discs) for discs in all_discs]
    opens = []
    for mask in range(1 << m):
        members = [x for x in range(m) if mask >> x & 1]
        inside = frozenset(members)
        if all(any(d <= inside for d in disc_sets[x]) for x in members):
            opens.append(space.point_set(members))
    topo = validate_topology(space.points, opens)
    for x in range(m):
        for d in all_discs[x]:
            assert space.point_set(d) in topo.opens, "disc is not open: theorem violated"
    return topo


def _minimal_sets(sets):
    return [s for s in sets if not any(t < s for t in sets)]


def dist_to_set(space: ContinuitySpace, x, subset):
    """d(x, A) = ⋀{d(x,a) : a ∈ A}; the empty meet is top."""
    i = space.index(x)
    return space.V.meet_of(space.dist[i][space.index(a)] for a in subset)


def closure(space: ContinuitySpace, subset):
    """{y : d(y, A) = 0}, the τ_d-closure of A."""
    V = space.V
    subset = frozenset(subset)
    return frozenset(p for p in space.points
                     if dist_to_set(space, p, subset) == V.bottom)


def diameter(space: ContinuitySpace, subset=None):
    names = space.points if subset is None else list(subset)
    idx = [space.index(p) for p in names]
    return space.V.join_of(space.dist[x][y] for x in idx for y in idx)


# -- theorem checks ---------------------------------------------------------------


@dataclass
class TheoremEntry:
    name: str
    passed: bool
    witness: str | None


@dataclass
class TheoremReport:
    entries: list
    notes: list

    @property
    def all_pass(self):
        return all(e.passed for e in self.entries)

    def lines(self):
        out = []
        for e in self.entries:
            out.append("  %-28s %s" % (e.name, "pass" if e.passed else "FAIL at %s" % e.witness))
        out.extend("  note: %s" % n for n in self.notes)
        return out


def check_topology_theorems(space: ContinuitySpace) -> TheoremReport:
    """Instantiate the closure/duality/neighborhood/separation statements
    exhaustively over all points, subsets and positive radii."""
    if space.m > THEOREM_SCAN_MAX:
        raise SizeLimit("theorem scan capped at %d points" % THEOREM_SCAN_MAX)
    V = space.V
    m = space.m
    positives = V.positives()
    dual = dual_space(space)
    sym = symmetric_space(space)
    tau = induced_topology(space)
    tau_star = induced_topology(dual)
    tau_sym = induced_topology(sym)
    entries = []
    notes = []
    if V.is_positive(V.bottom):
        notes.append("positives filter contains 0; radius-0 discs are legal")

    witness = None
    for mask in range(1 << m):
        subset = frozenset(space.points[i] for i in range(m) if mask >> i & 1)
        closed = frozenset(space.points) - subset in tau.opens
        char = all(p in subset for p in space.points
                   if dist_to_set(space, p, subset) == V.bottom)
        if closed != char:
            witness = "A=%s" % sorted(subset)
            break
    entries.append(TheoremEntry("closed-characterization", witness is None, witness))

    witness = None
    for p in space.points:
        for eps in positives:
            cstar = closed_disc(dual, p, eps)
            if frozenset(space.points) - cstar not in tau.opens:
                witness = "(x=%s, eps=%s)" % (p, V.element_name(eps))
                break
        if witness:
            break
    entries.append(TheoremEntry("dual-discs-closed", witness is None, witness))

    witness = None
    for p in space.points:
        discs = [closed_disc(space, p, eps) for eps in positives]
        for c in discs:
            if not any(p in o and o <= c for o in tau.opens):
                witness = "(x=%s: closed disc is not a neighborhood)" % p
                break
        if witness is None:
            for o in tau.opens:
                if p in o and not any(c <= o for c in discs):
                    witness = "(x=%s, U=%s)" % (p, sorted(o))
                    break
        if witness:
            break
    entries.append(TheoremEntry("fundamental-neighborhoods", witness is None, witness))

    # {V ∩ W} is a base of τ^s: every intersection is τ^s-open and every
    # τ^s-open is the union of the intersections it contains. (The literal
    # set equality fails on finite examples; the family of intersections is
    # not closed under unions.)
    meets = frozenset(u & w for u in tau.opens for w in tau_star.opens)
    witness = None
    for m_open in meets:
        if m_open not in tau_sym.opens:
            witness = "V∩W=%s not symmetric-open" % sorted(m_open)
            break
    if witness is None:
        for u in tau_sym.opens:
            union = frozenset().union(*(v for v in meets if v <= u)) if meets else frozenset()
            if union != u:
                witness = "U=%s is not a union of intersections" % sorted(u)
                break
    entries.append(TheoremEntry("symmetric-decomposition", witness is None, witness))

    witness = None
    for x in space.points:
        for y in space.points:
            if x in closure(space, {y}):
                continue
            found = any(x in u and y in w and not (u & w)
                        for u in tau.opens for w in tau_star.opens)
            if not found:
                witness = "(x=%s, y=%s)" % (x, y)
                break
        if witness:
            break
    entries.append(TheoremEntry("pseudo-hausdorff", witness is None, witness))

    witness = None
    star_closed = frozenset(frozenset(space.points) - u for u in tau_star.opens)
    for x in space.points:
        for a in tau.opens:
            if x not in a:
                continue
            found = any(x in u and u <= c and c <= a
                        for u in tau.opens for c in star_closed)
            if not found:
                witness = "(x=%s, A=%s)" % (x, sorted(a))
                break
        if witness:
            break
    entries.append(TheoremEntry("regularity", witness is None, witness))
    return TheoremReport(entries, notes)


def is_T0(space: ContinuitySpace) -> bool:
    V = space.V
    for x in range(space.m):
        for y in range(space.m):
            if x != y and space.dist[x][y] == V.bottom and space.dist[y][x] == V.bottom:
                return False
    return True


def is_v_domain(space: ContinuitySpace) -> bool:
    """T0 plus compactness of the symmetric topology; finite carriers are
    always compact, so this reduces to the T0 check."""
    return is_T0(space)


# -- the Flagg dictionary: topological spaces over free locales ----------------


def sorted_opens(topology: Topology):
    """Canonical open order used for free-locale ground names U0, U1, ..."""
    return sorted(topology.opens, key=lambda u: (len(u), sorted(u)))


def space_from_topology(topology: Topology, materialize="auto") -> ContinuitySpace:
    """Represent a topology as a continuity space over the free locale on
    its own open-set family.

    d(a,b) is the family of all finite sets A of opens such that every
    member of A containing a also contains b; that family is the down
    closure of the single set {U : a ∈ U implies b ∈ U}. The universe is
    materialized into validated tables when the ground set allows it,
    otherwise the symbolic free locale is used.
    """
    if len(topology.points) > FLAGG_POINTS_MAX:
        raise SizeLimit("space_from_topology capped at %d points" % FLAGG_POINTS_MAX)
    opens = sorted_opens(topology)
    ground = ["U%d" % i for i in range(len(opens))]
    open_of = dict(zip(ground, opens))
    locale = FreeLocale(ground)
    points = list(topology.points)
    dist = []
    for a in points:
        row = []
        for b in points:
            good = frozenset(g for g in ground if a not in open_of[g] or b in open_of[g])
            row.append(downclose([good]))
        dist.append(row)
    if materialize == "auto":
        materialize = len(ground) <= 4
    if materialize:
        table = locale.materialize()
        families = locale.carrier()
        index = {fam: i for i, fam in enumerate(families)}
        dist = [[index[e] for e in row] for row in dist]
        return validate_space(table, points, dist)
    return validate_space(locale, points, dist)


def enumerate_topologies(points):
    """Every topology on the given finite point list, by exhaustive filter."""
    points = [str(p) for p in points]
    subsets = [frozenset(c) for k in range(len(points) + 1)
               for c in combinations(points, k)]
    full = frozenset(points)
    out = []
    for mask in range(1 << len(subsets)):
        fam = [subsets[i] for i in range(len(subsets)) if mask >> i & 1]
        sel = frozenset(fam)
        if frozenset() not in sel or full not in sel:
            continue
        if all(u & w in sel and u | w in sel for u in fam for w in fam):
            out.append(Topology(tuple(points), sel))
    return out


# -- the preorder dictionary ----------------------------------------------------


def preorder_dictionary(points, relation, values=None) -> ContinuitySpace:
    """Encode a reflexive transitive relation as a two-valued space:
    d(x,y) = 0 iff (x,y) is related, else top."""
    points = [str(p) for p in points]
    rel = {(str(a), str(b)) for a, b in relation}
    for a, b in rel:
        if a not in points or b not in points:
            raise NotAPreorder("pair (%s, %s) mentions unknown points" % (a, b))
    for p in points:
        if (p, p) not in rel:
            raise NotAPreorder("not reflexive at %s" % p)
    for a, b in rel:
        for c in points:
            if (b, c) in rel and (a, c) not in rel:
                raise NotAPreorder("not transitive at (%s, %s, %s)" % (a, b, c))
    V = values if values is not None else builtin("bool2")
    dist = [[V.bottom if (a, b) in rel else V.top for b in points] for a in points]
    return validate_space(V, points, dist)


def space_to_preorder(space: ContinuitySpace):
    """Read back the relation {(x,y) : d(x,y) = 0} from a two-valued space."""
    if getattr(space.V, "size", None) != 2:
        raise NotAPreorder("preorder dictionary requires a two-element carrier")
    return {(space.points[x], space.points[y])
            for x in range(space.m) for y in range(space.m)
            if space.dist[x][y] == space.V.bottom}
