from itertools import combinations, product

import pytest

from cqlogic import spaces as sp
from cqlogic.errors import (NotAPreorder, NotATopology, NotPositive,
                            ReflexivityViolation, SizeLimit,
                            TransitivityViolation)

from conftest import space_corpus


# -- validation -----------------------------------------------------------------


def test_one_point_space(bool2):
    X = sp.validate_space(bool2, ["p"], [[0]])
    assert X.m == 1


def test_asymmetric_distances_allowed(bool2, sierpinski):
    assert sierpinski.d(0, 1) == 0 and sierpinski.d(1, 0) == 1
    assert not sp.is_symmetric(sierpinski)


def test_validation_errors(bool2):
    with pytest.raises(ReflexivityViolation):
        sp.validate_space(bool2, ["p"], [[1]])
    with pytest.raises(TransitivityViolation):
        sp.validate_space(bool2, ["p", "q", "r"],
                          [[0, 1, 0], [1, 0, 1], [1, 0, 0]])
    with pytest.raises(ReflexivityViolation):
        sp.validate_space(bool2, ["p", "q"], [[0, 7], [0, 0]])


# -- constructions ------------------------------------------------------------------


def test_dual_transposes(sierpinski):
    dual = sp.dual_space(sierpinski)
    assert dual.d(0, 1) == 1 and dual.d(1, 0) == 0


def test_symmetric_idempotent(chain4):
    X = sp.validate_space(chain4, ["p", "q"], [[0, 2], [2, 0]])
    Y = sp.symmetric_space(X)
    assert Y.dist == X.dist
    Z = sp.symmetric_space(sp.validate_space(chain4, ["p", "q"], [[0, 1], [3, 0]]))
    assert Z.d(0, 1) == Z.d(1, 0) == 3


def test_product_of_single_points(bool2):
    one = sp.validate_space(bool2, ["p"], [[0]])
    two = sp.product_space(one, one)
    assert two.m == 1 and two.d(0, 0) == 0


def test_product_distance_is_pairwise_join(chain4):
    X = sp.validate_space(chain4, ["a", "b"], [[0, 1], [2, 0]])
    Y = sp.validate_space(chain4, ["u", "v"], [[0, 3], [1, 0]])
    P = sp.product_space(X, Y)
    for (i1, j1) in product(range(2), repeat=2):
        for (i2, j2) in product(range(2), repeat=2):
            got = P.d(P.index("%s|%s" % (X.points[i1], Y.points[j1])),
                      P.index("%s|%s" % (X.points[i2], Y.points[j2])))
            assert got == max(X.d(i1, i2), Y.d(j1, j2))


# -- discs ---------------------------------------------------------------------------


def test_center_in_own_disc(sierpinski, bool2):
    for p in sierpinski.points:
        for eps in bool2.positives():
            assert p in sp.disc(sierpinski, p, eps)


def test_sierpinski_disc_at_zero(sierpinski):
    assert sp.disc(sierpinski, "q", 0) == frozenset({"q"})
    assert sp.disc(sierpinski, "p", 0) == frozenset({"p", "q"})


def test_closed_disc_at_top_is_everything(sierpinski, bool2):
    for p in sierpinski.points:
        assert sp.closed_disc(sierpinski, p, bool2.top) == frozenset(sierpinski.points)


def test_disc_requires_positive_radius(diamond_join):
    X = sp.validate_space(diamond_join, ["p", "q"],
                          [[0, diamond_join.top], [diamond_join.top, 0]])
    with pytest.raises(NotPositive):
        sp.disc(X, "p", diamond_join.bottom)
    assert sp.closed_disc(X, "p", diamond_join.bottom) == frozenset({"p"})


# -- topology -----------------------------------------------------------------------


def test_indiscrete_and_discrete(bool2):
    allzero = sp.validate_space(bool2, ["a", "b", "c"],
                                [[0, 0, 0], [0, 0, 0], [0, 0, 0]])
    topo = sp.induced_topology(allzero)
    assert topo.opens == frozenset({frozenset(), frozenset("abc")})
    alltop = sp.validate_space(bool2, ["a", "b"], [[0, 1], [1, 0]])
    assert len(sp.induced_topology(alltop).opens) == 4


def test_sierpinski_topology(sierpinski):
    topo = sp.induced_topology(sierpinski)
    assert topo.opens == frozenset({frozenset(), frozenset({"q"}),
                                    frozenset({"p", "q"})})


def test_topology_validation_errors():
    with pytest.raises(NotATopology):
        sp.validate_topology(["a", "b"], [frozenset(), frozenset("a")])
    with pytest.raises(NotATopology):
        sp.validate_topology(["a", "b", "c"],
                             [frozenset(), frozenset("abc"),
                              frozenset("ab"), frozenset("bc")])


# -- closure -----------------------------------------------------------------------


def test_dist_to_set_and_closure(sierpinski, bool2):
    assert sp.dist_to_set(sierpinski, "p", {"q"}) == 0
    assert sp.dist_to_set(sierpinski, "q", {"p"}) == 1
    assert sp.dist_to_set(sierpinski, "p", set()) == bool2.top
    assert sp.closure(sierpinski, {"q"}) == frozenset({"p", "q"})
    assert sp.closure(sierpinski, set()) == frozenset()


def test_member_has_zero_distance(chain4):
    X = sp.validate_space(chain4, ["a", "b"], [[0, 2], [1, 0]])
    for p in X.points:
        assert sp.dist_to_set(X, p, set(X.points)) == 0
        assert p in sp.closure(X, set(X.points))


def test_closure_is_kuratowski_on_corpus(bool2, chain4):
    corpus = space_corpus(bool2, 6, 4, seed=11) + space_corpus(chain4, 6, 4, seed=12)
    for X in corpus:
        pts = list(X.points)
        for mask in range(1 << X.m):
            A = frozenset(pts[i] for i in range(X.m) if mask >> i & 1)
            cl = sp.closure(X, A)
            assert A <= cl
            assert sp.closure(X, cl) == cl
            for mask2 in range(1 << X.m):
                B = frozenset(pts[i] for i in range(X.m) if mask2 >> i & 1)
                assert sp.closure(X, A | B) == sp.closure(X, A) | sp.closure(X, B)


def test_closure_agrees_with_topological_closure(bool2, chain4):
    for X in space_corpus(bool2, 4, 4, seed=3) + space_corpus(chain4, 4, 4, seed=4):
        topo = sp.induced_topology(X)
        closed = {frozenset(X.points) - u for u in topo.opens}
        for mask in range(1 << X.m):
            A = frozenset(X.points[i] for i in range(X.m) if mask >> i & 1)
            smallest = frozenset(X.points)
            for c in closed:
                if A <= c and c < smallest:
                    smallest = c
            assert sp.closure(X, A) == smallest


def test_diameter(chain4):
    X = sp.validate_space(chain4, ["a", "b", "c"],
                          [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    assert sp.diameter(X, set()) == chain4.bottom
    assert sp.diameter(X, {"a", "b"}) == 1
    assert sp.diameter(X) == 3
    for small in combinations(X.points, 2):
        assert chain4.le(sp.diameter(X, set(small)), sp.diameter(X))


# -- theorem checks ---------------------------------------------------------------


def test_theorems_hold_on_seeded_corpus(bool2, chain4):
    chain3 = __import__("cqlogic.coquantale", fromlist=["builtin"]).builtin("chain:3")
    corpus = (space_corpus(bool2, 8, 4, seed=21)
              + space_corpus(chain3, 8, 4, seed=22))
    for X in corpus:
        report = sp.check_topology_theorems(X)
        assert report.all_pass, (X.points, report.lines())


def test_one_point_space_theorems(bool2):
    X = sp.validate_space(bool2, ["p"], [[0]])
    assert sp.check_topology_theorems(X).all_pass


def test_symmetric_topology_generated_by_meet_refinement(bool2, chain4):
    for X in space_corpus(chain4, 5, 4, seed=31) + space_corpus(bool2, 5, 4, seed=32):
        tau = sp.induced_topology(X)
        tau_star = sp.induced_topology(sp.dual_space(X))
        tau_sym = sp.induced_topology(sp.symmetric_space(X))
        meets = frozenset(u & w for u in tau.opens for w in tau_star.opens)
        assert meets <= tau_sym.opens
        for u in tau_sym.opens:
            assert frozenset().union(*(v for v in meets if v <= u)) == u


def test_meet_refinement_set_equality_has_counterexamples(chain4):
    """The literal reading of the decomposition (the symmetric opens ARE
    the pairwise intersections) is refuted by a concrete 4-point space:
    the intersections are not closed under unions."""
    chain3 = __import__("cqlogic.coquantale", fromlist=["builtin"]).builtin("chain:3")
    X = sp.validate_space(chain3, ["p0", "p1", "p2", "p3"],
                          [[0, 1, 0, 1], [0, 0, 0, 1], [0, 1, 0, 1], [0, 0, 0, 0]])
    tau = sp.induced_topology(X)
    tau_star = sp.induced_topology(sp.dual_space(X))
    tau_sym = sp.induced_topology(sp.symmetric_space(X))
    meets = frozenset(u & w for u in tau.opens for w in tau_star.opens)
    assert frozenset({"p0", "p2", "p3"}) in tau_sym.opens - meets


# -- separation -------------------------------------------------------------------


def test_T0_cases(sierpinski, bool2):
    assert sp.is_T0(sierpinski)
    merged = sp.validate_space(bool2, ["x", "y"], [[0, 0], [0, 0]])
    assert not sp.is_T0(merged)
    dsym_space = sp.validate_space(bool2, ["0", "1"],
                                   [[bool2.sym_dist(a, b) for b in (0, 1)]
                                    for a in (0, 1)])
    assert sp.is_T0(dsym_space)
    assert sp.is_v_domain(dsym_space)


# -- Flagg dictionary ---------------------------------------------------------------


def test_indiscrete_distances_are_bottom():
    topo = sp.validate_topology(["a", "b"], [frozenset(), frozenset("ab")])
    X = sp.space_from_topology(topo, materialize=False)
    for i in range(2):
        for j in range(2):
            assert X.dist[i][j] == X.V.bottom
    assert sp.induced_topology(X).opens == topo.opens


def test_flagg_round_trip_small_topologies():
    for pts in (["a"], ["a", "b"]):
        for topo in sp.enumerate_topologies(pts):
            both = []
            for mode in (False, True):
                X = sp.space_from_topology(topo, materialize=mode)
                got = sp.induced_topology(X)
                assert got.opens == topo.opens, (pts, sorted(map(sorted, topo.opens)))
                both.append(got)
            assert both[0].opens == both[1].opens


def test_flagg_materialized_and_symbolic_agree_on_distances():
    topo = sp.validate_topology(["a", "b"], [frozenset(), frozenset("b"),
                                             frozenset("ab")])
    sym = sp.space_from_topology(topo, materialize=False)
    mat = sp.space_from_topology(topo, materialize=True)
    fl = sym.V
    for i in range(2):
        for j in range(2):
            assert mat.V.element_name(mat.dist[i][j]) == fl.element_name(sym.dist[i][j])


def test_flagg_rejects_large_point_sets():
    topo = sp.validate_topology(["a", "b", "c", "d"],
                                [frozenset(), frozenset("abcd")])
    with pytest.raises(SizeLimit):
        sp.space_from_topology(topo)


def test_enumerate_topologies_count():
    assert len(sp.enumerate_topologies(["a"])) == 1
    assert len(sp.enumerate_topologies(["a", "b"])) == 4
    assert len(sp.enumerate_topologies(["a", "b", "c"])) == 29


# -- preorder dictionary ----------------------------------------------------------


def test_preorder_round_trips(bool2):
    pts = ["a", "b", "c"]
    identity = {(p, p) for p in pts}
    total = {(p, q) for p in pts for q in pts}
    chain = identity | {("a", "b"), ("b", "c"), ("a", "c")}
    for rel in (identity, total, chain):
        X = sp.preorder_dictionary(pts, rel)
        assert sp.space_to_preorder(X) == rel
    X = sp.preorder_dictionary(pts, identity)
    assert all(X.d(i, j) == (bool2.bottom if i == j else bool2.top)
               for i in range(3) for j in range(3))
    Y = sp.preorder_dictionary(pts, total)
    assert all(Y.d(i, j) == 0 for i in range(3) for j in range(3))


def test_preorder_errors():
    with pytest.raises(NotAPreorder):
        sp.preorder_dictionary(["a", "b"], {("a", "a")})
    with pytest.raises(NotAPreorder):
        sp.preorder_dictionary(["a", "b", "c"],
                               {("a", "a"), ("b", "b"), ("c", "c"),
                                ("a", "b"), ("b", "c")})


def test_preorder_dictionary_is_bijective_on_three_points(bool2):
    pts = ["a", "b", "c"]
    relations = []
    for mask in range(1 << 6):
        rel = {(p, p) for p in pts}
        off = [(a, b) for a in pts for b in pts if a != b]
        rel |= {off[i] for i in range(6) if mask >> i & 1}
        try:
            X = sp.preorder_dictionary(pts, rel)
        except NotAPreorder:
            continue
        assert sp.space_to_preorder(X) == rel
        relations.append(frozenset(rel))
    assert len(relations) == len(set(relations)) == 29  # preorders on 3 points
