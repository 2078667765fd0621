"""Principal ultrafilters, D-ultralimits, D-products of spaces and
structures, the quotient ultraproduct, the V-ultrapower equivalence, the
Łoś verifier and the compactness construction.

D-limits are always computed by the definitional candidate scan (every
positive radius must put the tail set into D); the principal shortcut is
never assumed, so the Łoś checks stay genuine two-sided computations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product as iproduct

import numpy as np

from .coquantale import CoQuantale
from .errors import (NoLimit, NotCoDivisible, NotFinitelySatisfiable, NotT0,
                     NotSymmetricFactors, NotValueCoquantale, SizeLimit,
                     SignatureMismatch, VerificationFailed)
from .formulas import Inf, Sup, Conn, free_vars, print_formula
from .semantics import (LStructure, eval_formula, eval_table, satisfies,
                        theory, validate_structure)
from .spaces import ContinuitySpace, is_symmetric, validate_space

PRODUCT_POINT_CAP = 4096
PRODUCT_TABLE_CAP = 1_000_000


class PrincipalUltrafilter:
    """The ultrafilter {A ⊆ I : j0 ∈ A} on a finite index set."""

    def __init__(self, index_count, generator):
        if not 0 <= generator < index_count:
            raise ValueError("generator outside the index set")
        self.index_count = int(index_count)
        self.generator = int(generator)

    def contains(self, subset) -> bool:
        return self.generator in set(subset)

    def contains_mask(self, masks):
        """Vectorized membership for bitmask-encoded subsets."""
        return (np.asarray(masks) >> self.generator) & 1 == 1

    def __repr__(self):
        return "PrincipalUltrafilter(|I|=%d, j0=%d)" % (self.index_count, self.generator)


def is_ultrafilter(D, index_count) -> bool:
    """Exhaustive check of the ultrafilter axioms on a small index set."""
    subsets = [frozenset(i for i in range(index_count) if mask >> i & 1)
               for mask in range(1 << index_count)]
    member = {s: D.contains(s) for s in subsets}
    if member[frozenset()] or not member[frozenset(range(index_count))]:
        return False
    for a in subsets:
        if member[a] != (not member[frozenset(range(index_count)) - a]):
            return False
        for b in subsets:
            if member[a] and a <= b and not member[b]:
                return False
            if member[a] and member[b] and not member[a & b]:
                return False
    return True


# -- D-ultralimits ---------------------------------------------------------------


def d_ultralimit(vq: CoQuantale, seq, D: PrincipalUltrafilter) -> int:
    """The unique a with {j : d^s(a, a_j) ≤ ε} ∈ D for every positive ε,
    found by scanning every candidate (no principal shortcut)."""
    if not vq.value_flag:
        raise NotValueCoquantale("D-limits live in value co-quantales")
    seq = list(seq)
    if len(seq) != D.index_count:
        raise NoLimit("sequence length does not match the index set")
    positives = vq.positives()
    dsym = vq.dsym
    found = []
    for a in vq.carrier():
        if all(D.contains([j for j in range(len(seq)) if vq.le(dsym[a, seq[j]], eps)])
               for eps in positives):
            found.append(a)
    if not found:
        raise NoLimit("no candidate satisfies the large-set condition")
    if len(found) > 1:
        raise NotT0("multiple ultralimit candidates: %s"
                    % [vq.element_name(a) for a in found])
    return found[0]


def dlim_batch(vq: CoQuantale, seqs, D: PrincipalUltrafilter):
    """d_ultralimit over the rows of an (N, I) array, vectorized but still
    running the definitional per-ε membership test."""
    seqs = np.asarray(seqs, dtype=np.int32)
    count, width = seqs.shape
    positives = vq.positives()
    weights = (1 << np.arange(width)).astype(np.int64)
    ok = np.zeros((vq.size, count), dtype=bool)
    for a in range(vq.size):
        dmat = vq.dsym[a][seqs]
        good = np.ones(count, dtype=bool)
        for eps in positives:
            masks = (vq.lattice.leq[dmat, eps] @ weights)
            good &= D.contains_mask(masks)
        ok[a] = good
    counts = ok.sum(axis=0)
    if (counts == 0).any():
        raise NoLimit("a row has no ultralimit")
    if (counts > 1).any():
        raise NotT0("a row has multiple ultralimits")
    return ok.argmax(axis=0).astype(np.int32)


# -- D-products of spaces -----------------------------------------------------------


def d_product_space(spaces, D: PrincipalUltrafilter):
    """Tuple point set with d_D((x_i), (y_i)) = lim_D of the factor
    distances; validated as a continuity space afterwards."""
    spaces = list(spaces)
    if len(spaces) != D.index_count:
        raise SizeLimit("need one factor per index")
    vq = spaces[0].V
    if any(s.V is not vq for s in spaces):
        raise SignatureMismatch("factors must share their value co-quantale")
    total = 1
    for s in spaces:
        total *= s.m
    if total > PRODUCT_POINT_CAP:
        raise SizeLimit("product would have %d points (cap %d)" % (total, PRODUCT_POINT_CAP))
    tuples = list(iproduct(*[range(s.m) for s in spaces]))
    names = ["|".join(s.points[i] for s, i in zip(spaces, combo)) for combo in tuples]
    seqs = np.array([[spaces[i].dist[x[i]][y[i]] for i in range(len(spaces))]
                     for x in tuples for y in tuples], dtype=np.int32)
    limits = dlim_batch(vq, seqs, D).reshape(total, total)
    dist = [[int(limits[i, j]) for j in range(total)] for i in range(total)]
    space = validate_space(vq, names, dist)
    space.tuples = tuples
    return space


def quotient_ultraproduct(spaces, D: PrincipalUltrafilter):
    """Quotient the D-product by (x_i) ~ (y_i) iff lim d(x_i, y_i) = 0.

    Requires symmetric factors; the equivalence axioms and representative
    independence of the class distance are verified exhaustively. Returns
    the quotient space and the canonical map (product tuple index → class
    index)."""
    spaces = list(spaces)
    for s in spaces:
        if not is_symmetric(s):
            raise NotSymmetricFactors("every factor distance must be symmetric")
    product = d_product_space(spaces, D)
    vq = product.V
    count = product.m
    dist = np.asarray(product.dist, dtype=np.int32)
    related = dist == vq.bottom
    if not related.diagonal().all():
        raise VerificationFailed("~ is not reflexive")
    if (related != related.T).any():
        raise VerificationFailed("~ is not symmetric")
    composed = (related.astype(np.uint8) @ related.astype(np.uint8)) > 0
    if (composed & ~related).any():
        raise VerificationFailed("~ is not transitive")
    classes = []
    theta = [-1] * count
    for i in range(count):
        if theta[i] >= 0:
            continue
        cls = [int(j) for j in np.flatnonzero(related[i])]
        for j in cls:
            theta[j] = len(classes)
        classes.append(cls)
    for cls_a in classes:
        for cls_b in classes:
            block = dist[np.ix_(cls_a, cls_b)]
            if (block != block[0, 0]).any():
                raise VerificationFailed("class distance depends on representatives")
    names = ["[%s]" % product.points[cls[0]] for cls in classes]
    dist = [[product.dist[a[0]][b[0]] for b in classes] for a in classes]
    quotient = validate_space(vq, names, dist)
    quotient.classes = classes
    return quotient, theta


@dataclass
class UltrapowerResult:
    quotient: ContinuitySpace
    diagonal: dict
    limits: dict
    bijective: bool
    inverse_ok: bool
    preserves_distance: bool

    @property
    def equivalent(self):
        return self.bijective and self.inverse_ok and self.preserves_distance


def ultrapower_V(vq: CoQuantale, D: PrincipalUltrafilter) -> UltrapowerResult:
    """Build the D-ultrapower of (V, d^s) and verify that the diagonal map
    T and the limit map T' witness a distance-preserving bijection."""
    base = validate_space(vq, [vq.element_name(e) for e in vq.carrier()],
                          [[vq.sym_dist(a, b) for b in vq.carrier()] for a in vq.carrier()])
    quotient, theta = quotient_ultraproduct([base] * D.index_count, D)
    tuples = list(iproduct(*[range(vq.size)] * D.index_count))
    diagonal = {e: theta[tuples.index(tuple([e] * D.index_count))] for e in vq.carrier()}
    limits = {}
    for cls_index, cls in enumerate(quotient.classes):
        limits[cls_index] = d_ultralimit(vq, list(tuples[cls[0]]), D)
    bijective = sorted(diagonal.values()) == list(range(len(quotient.classes)))
    inverse_ok = all(limits[diagonal[e]] == e for e in vq.carrier())
    preserves = all(quotient.dist[diagonal[a]][diagonal[b]] == vq.sym_dist(a, b)
                    for a in vq.carrier() for b in vq.carrier())
    return UltrapowerResult(quotient, diagonal, limits, bijective, inverse_ok, preserves)


# -- D-products of structures ----------------------------------------------------------


@dataclass
class DProductStructure:
    structure: LStructure
    factors: list
    D: PrincipalUltrafilter
    tuples: list


def d_product_structure(factors, D: PrincipalUltrafilter) -> DProductStructure:
    """Predicates take the D-ultralimit of the factor values, functions act
    componentwise, constants become constant tuples; the declared moduli
    are re-verified on the product."""
    factors = list(factors)
    vq = factors[0].V
    if not vq.co_divisible_flag:
        raise NotCoDivisible("the D-product interpretation needs a co-divisible carrier")
    sig = factors[0].sig
    for f in factors[1:]:
        if f.V is not vq:
            raise SignatureMismatch("factors must share their value co-quantale")
        if f.sig != sig:
            raise SignatureMismatch("factors must share their signature")
    space = d_product_space([f.space for f in factors], D)
    tuples = space.tuples
    width = len(factors)
    position = {t: i for i, t in enumerate(tuples)}
    pred_tables = {}
    for pname, (arity, _) in sig.predicates.items():
        if len(tuples) ** arity > PRODUCT_TABLE_CAP:
            raise SizeLimit("product predicate table too large for %s" % pname)
        combos = list(iproduct(range(len(tuples)), repeat=arity))
        seqs = np.array([[int(factors[i].pred_tables[pname][tuple(tuples[c][i] for c in combo)])
                          for i in range(width)] for combo in combos], dtype=np.int32)
        table = dlim_batch(vq, seqs, D).reshape((len(tuples),) * arity)
        pred_tables[pname] = table.astype(np.int32)
    fun_tables = {}
    for fname, (arity, _) in sig.functions.items():
        if len(tuples) ** arity > PRODUCT_TABLE_CAP:
            raise SizeLimit("product function table too large for %s" % fname)
        table = np.zeros((len(tuples),) * arity, dtype=np.int32)
        for combo in iproduct(range(len(tuples)), repeat=arity):
            image = tuple(int(factors[i].fun_tables[fname][tuple(tuples[c][i] for c in combo)])
                          for i in range(width))
            table[combo] = position[image]
        fun_tables[fname] = table
    consts = {c: position[tuple(f.const_points[c] for f in factors)]
              for c in sig.constants}
    structure = validate_structure(space, sig, pred_tables, fun_tables, consts,
                                   name="D-product")
    return DProductStructure(structure, factors, D, tuples)


# -- the Łoś verifier ----------------------------------------------------------------


@dataclass
class LosEntry:
    assignment: tuple
    left: int
    right: int

    @property
    def equal(self):
        return self.left == self.right


@dataclass
class LosReport:
    formula: str
    entries: list
    hypothesis: list   # (factor name, subformula, sup_ok, inf_ok)

    @property
    def all_equal(self):
        return all(e.equal for e in self.entries)

    def lines(self, vq=None):
        render = (lambda e: vq.element_name(e)) if vq else str
        out = ["los-check %s" % self.formula]
        for factor, sub, sup_ok, inf_ok in self.hypothesis:
            out.append("  hypothesis %-24s %s: sup-side %s, inf-side %s"
                       % (sub, factor, "holds" if sup_ok else "FAILS",
                          "holds" if inf_ok else "FAILS"))
        for e in self.entries:
            mark = "==" if e.equal else "!="
            out.append("  %s: product %s %s limit %s"
                       % (",".join(e.assignment) or "<sentence>",
                          render(e.left), mark, render(e.right)))
        return out


def quantified_subformulas(phi):
    match phi:
        case Sup(body=b) | Inf(body=b):
            return [phi] + quantified_subformulas(b)
        case Conn(args=args):
            out = []
            for a in args:
                out.extend(quantified_subformulas(a))
            return out
        case _:
            return []


def los_hypothesis_check(struct: LStructure, phi):
    """For φ with an outer quantifier, compute both discrete-Cauchy sums of
    the body's value family and report whether each vanishes (over every
    assignment of the remaining free variables)."""
    match phi:
        case Sup(var=x, body=body) | Inf(var=x, body=body):
            pass
        case _:
            raise ValueError("hypothesis check needs an outer sup/inf")
    vq = struct.V
    rest = sorted(free_vars(phi))
    sup_ok = True
    inf_ok = True
    for combo in iproduct(range(struct.m), repeat=len(rest)):
        sigma = dict(zip(rest, combo))
        family = [eval_formula(struct, body, {**sigma, x: c}) for c in range(struct.m)]
        sup_side = vq.meet_of(
            vq.join_of(vq.sub(fl, fk) for fl in family) for fk in family)
        inf_side = vq.meet_of(
            vq.join_of(vq.sub(fk, fl) for fl in family) for fk in family)
        sup_ok = sup_ok and sup_side == vq.bottom
        inf_ok = inf_ok and inf_side == vq.bottom
    return sup_ok, inf_ok


def los_check(dp: DProductStructure, phi, assignments=None) -> LosReport:
    """Compare φ on the D-product against the D-ultralimit of the factor
    evaluations, tuple by tuple."""
    vq = dp.structure.V
    fv = sorted(free_vars(phi))
    hypothesis = []
    for sub in quantified_subformulas(phi):
        for factor in dp.factors:
            sup_ok, inf_ok = los_hypothesis_check(factor, sub)
            hypothesis.append((factor.name, print_formula(sub, vq), sup_ok, inf_ok))
    if assignments is None:
        assignments = list(iproduct(range(dp.structure.m), repeat=len(fv)))
    window = tuple(fv)
    left_table = np.asarray(eval_table(dp.structure, phi, window))
    factor_tables = [np.asarray(eval_table(f, phi, window)) for f in dp.factors]
    entries = []
    for combo in assignments:
        combo = tuple(dp.structure.space.index(p) if isinstance(p, str) else p
                      for p in combo)
        left = int(left_table[combo])
        seq = [int(factor_tables[i][tuple(dp.tuples[p][i] for p in combo)])
               for i in range(len(dp.factors))]
        right = d_ultralimit(vq, seq, dp.D)
        entries.append(LosEntry(tuple(dp.structure.points[p] for p in combo),
                                left, right))
    return LosReport(print_formula(phi, vq), entries, hypothesis)


# -- compactness --------------------------------------------------------------------


@dataclass
class CompactnessResult:
    model: DProductStructure
    subsets: list
    chosen: list
    generator: int

    @property
    def factor_names(self):
        return [m.name for m in self.chosen]


def compactness_build(conditions, candidates) -> CompactnessResult:
    """Mirror the compactness proof at finite scale: index the finite
    subsets of the theory, pick a model per subset, extend the
    finite-intersection family to the (principal) ultrafilter generated at
    the full-theory index, build the D-product and verify it models T."""
    conds = theory(conditions)
    candidates = list(candidates)
    subsets = []
    for k in range(len(conds) + 1):
        subsets.extend(combinations(range(len(conds)), k))
    chosen = []
    for subset in subsets:
        pick = None
        for cand in candidates:
            if all(satisfies(cand, conds[i]) for i in subset):
                pick = cand
                break
        if pick is None:
            raise NotFinitelySatisfiable(
                "no candidate models the subset %s" % (list(subset),))
        chosen.append(pick)
    generator = subsets.index(tuple(range(len(conds))))
    D = PrincipalUltrafilter(len(subsets), generator)
    dp = d_product_structure(chosen, D)
    for cond in conds:
        if not satisfies(dp.structure, cond):
            raise VerificationFailed(
                "the D-product fails %s" % print_formula(cond.formula, dp.structure.V))
    return CompactnessResult(dp, subsets, chosen, generator)
