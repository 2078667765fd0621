"""L-structures, formula evaluation, theories, substructures, depth-bounded
formula enumeration and the Tarski-Vaught machinery.

Two evaluators are provided: the definitional single-assignment recursion
(`eval_formula`) and a table-at-a-time batch evaluator (`eval_table`) used
by the exhaustive sweeps; the unit suite cross-checks them against each
other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, product as iproduct

import numpy as np

from .coquantale import CoQuantale
from .errors import (ArityMismatch, FreeVariableMismatch,
                     MissingInterpretation, ModulusViolated, NotCoGirard,
                     NotSubstructure, NotValueCoquantale, SizeLimit,
                     SignatureMismatch, UnboundVariable)
from .formulas import (App, Conn, Const, DistAtom, Inf, PredAtom, Signature,
                       Sup, Val, Var, default_kit, free_vars, print_formula,
                       validate_modulus)
from .spaces import ContinuitySpace

MODULUS_SCAN_MAX = 4_000_000


class LStructure:
    """An interpreted structure over a validated continuity space."""

    def __init__(self, space, sig, pred_tables, fun_tables, const_points, name=""):
        self.space = space
        self.V = space.V
        self.sig = sig
        self.pred_tables = pred_tables
        self.fun_tables = fun_tables
        self.const_points = const_points
        self.name = name or "structure"
        self.m = space.m
        self.dist = np.asarray(space.dist, dtype=np.int32)
        self.dist.setflags(write=False)

    @property
    def points(self):
        return self.space.points

    def __repr__(self):
        return "LStructure(%s: %d points over %s)" % (self.name, self.m, self.V.name)


def validate_structure(space: ContinuitySpace, sig: Signature, pred_tables,
                       fun_tables=None, const_points=None, name="") -> LStructure:
    """Check totality of every interpretation and verify each declared
    modulus exhaustively (directed product distance on the domain; the
    symmetric value distance on predicate outputs, the structure distance
    on function outputs)."""
    vq = space.V
    if not isinstance(vq, CoQuantale) or not vq.value_flag:
        raise NotValueCoquantale("structures need a table-backed value co-quantale")
    fun_tables = dict(fun_tables or {})
    const_points = dict(const_points or {})
    pred_tables = dict(pred_tables or {})
    m = space.m

    for kind, declared, given in (("predicate", sig.predicates, pred_tables),
                                  ("function", sig.functions, fun_tables)):
        missing = set(declared) - set(given)
        extra = set(given) - set(declared)
        if missing:
            raise MissingInterpretation("missing %s table for %s" % (kind, sorted(missing)[0]))
        if extra:
            raise MissingInterpretation("undeclared %s table %s" % (kind, sorted(extra)[0]))
    if set(const_points) != set(sig.constants):
        raise MissingInterpretation("constant interpretations must match the signature")

    norm_preds = {}
    for pname, (arity, modulus) in sig.predicates.items():
        table = np.asarray(pred_tables[pname], dtype=np.int32)
        if table.shape != (m,) * arity or table.min() < 0 or table.max() >= vq.size:
            raise MissingInterpretation("%s table must be total on M^%d" % (pname, arity))
        validate_modulus(vq, modulus)
        norm_preds[pname] = table
    norm_funs = {}
    for fname, (arity, modulus) in sig.functions.items():
        table = np.asarray(fun_tables[fname], dtype=np.int32)
        if table.shape != (m,) * arity or table.min() < 0 or table.max() >= m:
            raise MissingInterpretation("%s table must map M^%d into M" % (fname, arity))
        validate_modulus(vq, modulus)
        norm_funs[fname] = table
    consts = {}
    for cname in sig.constants:
        point = const_points[cname]
        if isinstance(point, str):
            point = space.index(point)
        if not 0 <= point < m:
            raise MissingInterpretation("constant %s maps outside the universe" % cname)
        consts[cname] = int(point)

    dist = np.asarray(space.dist, dtype=np.int32)
    for pname, (arity, modulus) in sig.predicates.items():
        out_vals = norm_preds[pname].reshape(-1)
        _check_symbol_modulus(vq, dist, arity, modulus,
                              vq.dsym[out_vals[:, None], out_vals[None, :]],
                              "predicate %s" % pname)
    for fname, (arity, modulus) in sig.functions.items():
        out_pts = norm_funs[fname].reshape(-1)
        _check_symbol_modulus(vq, dist, arity, modulus,
                              dist[out_pts[:, None], out_pts[None, :]],
                              "function %s" % fname)
    for table in list(norm_preds.values()) + list(norm_funs.values()):
        table.setflags(write=False)
    return LStructure(space, sig, norm_preds, norm_funs, consts, name)


def _check_symbol_modulus(vq, dist, arity, modulus, out_dist, label):
    m = dist.shape[0]
    count = m ** arity
    if count * count * max(len(modulus.table), 1) > MODULUS_SCAN_MAX:
        raise SizeLimit("modulus verification too large for %s" % label)
    grids = np.indices((m,) * arity).reshape(arity, -1)
    tuple_dist = np.zeros((count, count), dtype=np.int32)
    join = vq.lattice.join
    for i in range(arity):
        coord = dist[grids[i][:, None], grids[i][None, :]]
        tuple_dist = join[tuple_dist, coord]
    leq = vq.lattice.leq
    for eps, delta in modulus.table.items():
        bad = leq[tuple_dist, delta] & ~leq[out_dist, eps]
        if bad.any():
            s, t = map(int, np.argwhere(bad)[0])
            raise ModulusViolated(
                "%s jumps more than its modulus allows (tuples %d, %d at ε=%s)"
                % (label, s, t, vq.element_name(eps)))


# -- evaluation -------------------------------------------------------------


def eval_term(struct: LStructure, t, assignment) -> int:
    match t:
        case Var(index=i):
            if i not in assignment:
                raise UnboundVariable("x%d is not assigned" % i)
            return assignment[i]
        case Const(name=name):
            return struct.const_points[name]
        case App(func=f, args=args):
            vals = tuple(eval_term(struct, a, assignment) for a in args)
            return int(struct.fun_tables[f][vals])
    raise TypeError("not a term: %r" % (t,))


def eval_formula(struct: LStructure, phi, assignment=None) -> int:
    """Structural recursion per the five interpretation clauses; sup/inf
    range over the whole universe."""
    sigma = assignment or {}
    match phi:
        case DistAtom(left=l, right=r):
            return int(struct.dist[eval_term(struct, l, sigma),
                                   eval_term(struct, r, sigma)])
        case PredAtom(pred=p, args=args):
            vals = tuple(eval_term(struct, a, sigma) for a in args)
            return int(struct.pred_tables[p][vals])
        case Conn(connective=c, args=args):
            return c.apply(eval_formula(struct, a, sigma) for a in args)
        case Val(element=e):
            return e
        case Sup(var=x, body=b):
            return struct.V.join_of(
                eval_formula(struct, b, {**sigma, x: a}) for a in range(struct.m))
        case Inf(var=x, body=b):
            return struct.V.meet_of(
                eval_formula(struct, b, {**sigma, x: a}) for a in range(struct.m))
    raise TypeError("not a formula: %r" % (phi,))


def term_table(struct: LStructure, t, window):
    shape = (struct.m,) * len(window)
    match t:
        case Var(index=i):
            if i not in window:
                raise UnboundVariable("x%d is not in the evaluation window" % i)
            axis = window.index(i)
            grid = np.arange(struct.m, dtype=np.int32)
            grid = grid.reshape([-1 if k == axis else 1 for k in range(len(window))])
            return np.broadcast_to(grid, shape)
        case Const(name=name):
            return np.broadcast_to(np.int32(struct.const_points[name]), shape)
        case App(func=f, args=args):
            parts = tuple(term_table(struct, a, window) for a in args)
            return struct.fun_tables[f][parts]
    raise TypeError("not a term: %r" % (t,))


def eval_table(struct: LStructure, phi, window=None):
    """Evaluate over every assignment of the window variables at once.

    Returns an array of V elements with one axis per window variable, in
    window order; cross-checked against eval_formula in the test suite.
    """
    if window is None:
        window = tuple(sorted(free_vars(phi)))
    window = tuple(window)
    shape = (struct.m,) * len(window)
    match phi:
        case DistAtom(left=l, right=r):
            return struct.dist[term_table(struct, l, window), term_table(struct, r, window)]
        case PredAtom(pred=p, args=args):
            return struct.pred_tables[p][tuple(term_table(struct, a, window) for a in args)]
        case Conn(connective=c, args=args):
            return c.table[tuple(eval_table(struct, a, window) for a in args)]
        case Val(element=e):
            return np.broadcast_to(np.int32(e), shape)
        case Sup(var=x, body=b) | Inf(var=x, body=b):
            inner_window = tuple(v for v in window if v != x) + (x,)
            inner = eval_table(struct, b, inner_window)
            fold = struct.V.lattice.join if isinstance(phi, Sup) else struct.V.lattice.meet
            start = struct.V.bottom if isinstance(phi, Sup) else struct.V.top
            acc = np.full(inner.shape[:-1], start, dtype=np.int32)
            for k in range(struct.m):
                acc = fold[acc, inner[..., k]]
            axis = window.index(x) if x in window else None
            if axis is None:
                return np.broadcast_to(acc, shape)
            return np.broadcast_to(np.expand_dims(acc, axis), shape)
    raise TypeError("not a formula: %r" % (phi,))


# -- conditions and theories ---------------------------------------------------


@dataclass(frozen=True)
class Condition:
    """The formal statement 'formula = 0'."""
    formula: object


def theory(conditions):
    out = tuple(conditions)
    for cond in out:
        if free_vars(cond.formula):
            raise FreeVariableMismatch("theory members must be sentences")
    return out


def satisfies(struct: LStructure, condition: Condition, points=()) -> bool:
    """M ⊨ E(a₁..aₙ): the formula evaluates exactly to 0. Points are bound
    to the free variables in increasing index order."""
    fv = sorted(free_vars(condition.formula))
    if len(points) != len(fv):
        raise ArityMismatch("condition has %d free variables, got %d points"
                            % (len(fv), len(points)))
    sigma = {}
    for var, point in zip(fv, points):
        sigma[var] = struct.space.index(point) if isinstance(point, str) else point
    return eval_formula(struct, condition.formula, sigma) == struct.V.bottom


def models_theory(struct: LStructure, conditions) -> bool:
    return all(satisfies(struct, cond) for cond in theory(conditions))


def logical_distance(phi1, phi2, struct: LStructure) -> int:
    """⋁ over all tuples of the symmetric value distance of the two
    evaluations (the single-structure clause only)."""
    if free_vars(phi1) != free_vars(phi2):
        raise FreeVariableMismatch("formulas must share their free variables")
    window = tuple(sorted(free_vars(phi1)))
    t1 = eval_table(struct, phi1, window)
    t2 = eval_table(struct, phi2, window)
    sym = struct.V.dsym[t1, t2]
    return struct.V.join_of(int(v) for v in np.asarray(sym).reshape(-1))


# -- substructures ----------------------------------------------------------------


def is_substructure(sub: LStructure, sup: LStructure) -> bool:
    """Point containment plus restriction equality of every table."""
    if sub.V is not sup.V:
        raise SignatureMismatch("structures must share their value co-quantale")
    if sub.sig != sup.sig:
        raise SignatureMismatch("structures must share their signature")
    if not set(sub.points) <= set(sup.points):
        return False
    lift = np.array([sup.space.index(p) for p in sub.points], dtype=np.int32)
    if (sub.dist != sup.dist[lift[:, None], lift[None, :]]).any():
        return False
    for pname, (arity, _) in sub.sig.predicates.items():
        got = sup.pred_tables[pname]
        for idx in iproduct(range(sub.m), repeat=arity):
            if sub.pred_tables[pname][idx] != got[tuple(int(lift[i]) for i in idx)]:
                return False
    for fname, (arity, _) in sub.sig.functions.items():
        got = sup.fun_tables[fname]
        for idx in iproduct(range(sub.m), repeat=arity):
            image = sub.points[int(sub.fun_tables[fname][idx])]
            if image != sup.points[int(got[tuple(int(lift[i]) for i in idx)])]:
                return False
    for cname in sub.sig.constants:
        if sub.points[sub.const_points[cname]] != sup.points[sup.const_points[cname]]:
            return False
    return True


# -- formula enumeration -----------------------------------------------------------


def enumeration_kit(vq: CoQuantale):
    """Join, meet and b∸□ per dualizer, in a fixed order."""
    kit = default_kit(vq)
    names = ["vee", "wedge"] + sorted(k for k in kit if k.startswith("dual:"))
    return [kit[k] for k in names]


def enumerate_formulas(sig: Signature, vq: CoQuantale, depth, max_free_vars,
                       kit=None):
    """Deterministic duplicate-free list of all formulas of tree depth up
    to ``depth`` over the kit connectives and both quantifiers, with
    variables x0..x(k-1) and signature constants as the terms."""
    if kit is None:
        kit = enumeration_kit(vq)
    terms = [Var(i) for i in range(max_free_vars)]
    terms += [Const(c) for c in sig.constants]
    seen = set()
    pool = []

    def push(phi):
        if phi not in seen:
            seen.add(phi)
            pool.append(phi)

    for t1 in terms:
        for t2 in terms:
            push(DistAtom(t1, t2))
    for pname in sorted(sig.predicates):
        arity = sig.predicates[pname][0]
        for combo in iproduct(terms, repeat=arity):
            push(PredAtom(pname, combo))

    for _ in range(depth):
        snapshot = list(pool)
        for conn in kit:
            if conn.arity == 1:
                for phi in snapshot:
                    push(Conn(conn, (phi,)))
            elif conn.arity == 2:
                for a, b in combinations_with_replacement(snapshot, 2):
                    push(Conn(conn, (a, b)))
            else:
                for combo in iproduct(snapshot, repeat=conn.arity):
                    push(Conn(conn, combo))
        for phi in snapshot:
            for x in sorted(free_vars(phi)):
                push(Sup(x, phi))
                push(Inf(x, phi))
    return pool


# -- elementarity and the Tarski-Vaught test ------------------------------------


@dataclass
class Verdict:
    passed: bool
    depth: int
    checked: int
    witness: dict | None

    def describe(self):
        if self.passed:
            return "pass up to depth %d (%d checks)" % (self.depth, self.checked)
        parts = ", ".join("%s=%s" % (k, v) for k, v in sorted(self.witness.items()))
        return "FAIL at depth <= %d: %s" % (self.depth, parts)


def _require_pair(sub, sup):
    if not is_substructure(sub, sup):
        raise NotSubstructure("%s is not a substructure of %s" % (sub.name, sup.name))
    if not sub.V.dualizers:
        raise NotCoGirard("%s has no dualizing element" % sub.V.name)


def elementary_upto(sub: LStructure, sup: LStructure, depth,
                    max_free_vars=2) -> Verdict:
    """Check φ^M(ā) = φ^N(ā) for every enumerated formula up to the given
    depth and every tuple from the substructure."""
    _require_pair(sub, sup)
    lift = np.array([sup.space.index(p) for p in sub.points], dtype=np.int32)
    checked = 0
    for phi in enumerate_formulas(sub.sig, sub.V, depth, max_free_vars):
        window = tuple(sorted(free_vars(phi)))
        inner = eval_table(sub, phi, window)
        outer = eval_table(sup, phi, window)
        restricted = outer[np.ix_(*([lift] * len(window)))] if window else outer
        checked += int(np.asarray(inner).size)
        if (np.asarray(inner) != np.asarray(restricted)).any():
            idx = np.argwhere(np.asarray(inner) != np.asarray(restricted))[0]
            assign = {("x%d" % v): sub.points[int(i)] for v, i in zip(window, idx)}
            val_pair = (int(np.asarray(inner)[tuple(idx)]), int(np.asarray(restricted)[tuple(idx)]))
            return Verdict(False, depth, checked, {
                "formula": print_formula(phi, sub.V),
                **assign,
                "sub_value": sub.V.element_name(val_pair[0]),
                "sup_value": sub.V.element_name(val_pair[1])})
    return Verdict(True, depth, checked, None)


def tarski_vaught_upto(sub: LStructure, sup: LStructure, depth,
                       max_free_vars=2) -> Verdict:
    """Check the inf-equality ⋀{φ^M(c, ā)} = ⋀{φ^N(c, ā)} over the same
    enumerated pool, for every choice of quantified variable and every
    parameter tuple drawn from the substructure."""
    _require_pair(sub, sup)
    V = sub.V
    lift = np.array([sup.space.index(p) for p in sub.points], dtype=np.int32)
    meet = V.lattice.meet
    checked = 0
    for phi in enumerate_formulas(sub.sig, V, depth, max_free_vars):
        fv = tuple(sorted(free_vars(phi)))
        if not fv:
            continue
        inner_full = eval_table(sub, phi, fv)
        outer_full = eval_table(sup, phi, fv)
        for pos, x in enumerate(fv):
            rest = [i for i in range(len(fv)) if i != pos]
            inner_moved = np.moveaxis(np.asarray(inner_full), pos, -1)
            outer_moved = np.moveaxis(np.asarray(outer_full), pos, -1)
            if rest:
                outer_params = outer_moved[np.ix_(*([lift] * len(rest)), np.arange(sup.m))]
            else:
                outer_params = outer_moved
            inf_m = np.full(inner_moved.shape[:-1], V.top, dtype=np.int32)
            for k in range(sub.m):
                inf_m = meet[inf_m, inner_moved[..., k]]
            inf_n = np.full(outer_params.shape[:-1], V.top, dtype=np.int32)
            for k in range(sup.m):
                inf_n = meet[inf_n, outer_params[..., k]]
            checked += int(inf_m.size)
            if (inf_m != inf_n).any():
                idx = np.argwhere(inf_m != inf_n)[0]
                others = [v for v in fv if v != x]
                assign = {("x%d" % v): sub.points[int(i)] for v, i in zip(others, idx)}
                return Verdict(False, depth, checked, {
                    "formula": print_formula(phi, V),
                    "inf_var": "x%d" % x,
                    **assign,
                    "sub_inf": V.element_name(int(inf_m[tuple(idx)])),
                    "sup_inf": V.element_name(int(inf_n[tuple(idx)]))})
    return Verdict(True, depth, checked, None)
