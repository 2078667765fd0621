"""Syntax of the logic: signatures, terms, formulas, connectives with
declared moduli, the s-expression parser and modulus inference.

Grammar (s-expressions, '#'-free, whitespace separated):

    formula := "(d" term term ")"
             | "(" predname term* ")"
             | "(conn" connname formula* ")"
             | "(val" element ")"
             | "(sup" var formula ")"
             | "(inf" var formula ")"
    term    := var | constname | "(" funname term* ")"
    var     := "x" digits

All moduli are tables from the positives filter to itself. Connective
moduli are measured with the symmetric value distance on both sides and
max-combined tuple distance on the inputs; the claim is verified
exhaustively before a connective is accepted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
import numpy as np

from .coquantale import CoQuantale, epsilon_halver
from .errors import (ArityMismatch, FormulaSyntaxError, ModulusViolated,
                     NotValueCoquantale, SizeLimit, UnknownSymbol)

RESERVED = {"d", "conn", "val", "sup", "inf"}
VAR_RE = re.compile(r"^x(\d+)$")
CONNECTIVE_CHECK_MAX = 4_000_000


class Modulus:
    """An ε ↦ δ table, total on the positives filter."""

    def __init__(self, table):
        self.table = dict(table)

    def delta(self, eps):
        return self.table[eps]

    def __eq__(self, other):
        return isinstance(other, Modulus) and self.table == other.table

    def __hash__(self):
        return hash(frozenset(self.table.items()))

    def __repr__(self):
        return "Modulus(%r)" % (self.table,)


def validate_modulus(vq: CoQuantale, modulus: Modulus) -> Modulus:
    pos = vq.positives()
    if set(modulus.table) != set(pos):
        raise ModulusViolated("modulus must be total on the positives filter")
    for eps, delta in modulus.table.items():
        if not vq.is_positive(delta):
            raise ModulusViolated("delta %s is not positive" % vq.element_name(delta))
    return modulus


def identity_modulus(vq: CoQuantale) -> Modulus:
    return Modulus({e: e for e in vq.positives()})


def halver_modulus(vq: CoQuantale) -> Modulus:
    return Modulus({e: epsilon_halver(vq, e) for e in vq.positives()})


def compose_moduli(inner: Modulus, outer: Modulus) -> Modulus:
    """Modulus for g∘f from f's (inner) and g's (outer) moduli."""
    return Modulus({e: inner.delta(outer.delta(e)) for e in outer.table})


def meet_moduli(vq: CoQuantale, moduli) -> Modulus:
    """Pointwise meet; stays positive because V⁺ is meet-closed."""
    moduli = list(moduli)
    out = {}
    for eps in vq.positives():
        out[eps] = vq.meet_of(m.delta(eps) for m in moduli) if moduli else eps
    return Modulus(out)


class Connective:
    """A uniformly continuous map V^n -> V with a verified modulus.

    Equality and hashing go by (name, arity) so formulas stay hashable;
    names are expected to be unique within a kit.
    """

    def __init__(self, name, arity, table, modulus):
        self.name = name
        self.arity = arity
        self.table = table
        self.modulus = modulus

    def apply(self, args):
        return int(self.table[tuple(args)])

    def __eq__(self, other):
        return isinstance(other, Connective) and (self.name, self.arity) == (other.name, other.arity)

    def __hash__(self):
        return hash((self.name, self.arity))

    def __repr__(self):
        return "Connective(%s/%d)" % (self.name, self.arity)


def register_connective(vq: CoQuantale, name, table, claimed: Modulus) -> Connective:
    """Verify the claimed modulus exhaustively and wrap the table.

    The check: for all argument tuples x, y and every positive ε, if the
    max-combined symmetric distance of x and y is ≤ Δ(ε) then the symmetric
    distance of the outputs is ≤ ε.
    """
    table = np.asarray(table, dtype=np.int32)
    arity = table.ndim
    if arity < 1:
        raise ArityMismatch("connectives must have arity >= 1")
    n = vq.size
    if table.shape != (n,) * arity or table.min() < 0 or table.max() >= n:
        raise ModulusViolated("connective table must be total on V^%d" % arity)
    validate_modulus(vq, claimed)
    count = n ** arity
    if count * count > CONNECTIVE_CHECK_MAX:
        raise SizeLimit("connective verification too large (%d pairs)" % (count * count))
    grids = np.indices((n,) * arity).reshape(arity, -1)
    vals = table.reshape(-1)
    tuple_dist = np.zeros((count, count), dtype=np.int32)
    join = vq.lattice.join
    for i in range(arity):
        coord = vq.dsym[grids[i][:, None], grids[i][None, :]]
        tuple_dist = join[tuple_dist, coord]
    out_dist = vq.dsym[vals[:, None], vals[None, :]]
    leq = vq.lattice.leq
    for eps, delta in claimed.table.items():
        bad = leq[tuple_dist, delta] & ~leq[out_dist, eps]
        if bad.any():
            s, t = map(int, np.argwhere(bad)[0])
            x = tuple(vq.element_name(int(grids[i][s])) for i in range(arity))
            y = tuple(vq.element_name(int(grids[i][t])) for i in range(arity))
            raise ModulusViolated(
                "%s: inputs %s, %s within Δ(%s)=%s but outputs %s apart"
                % (name, x, y, vq.element_name(eps), vq.element_name(delta),
                   vq.element_name(int(out_dist[s, t]))))
    return Connective(name, arity, table, claimed)


def default_kit(vq: CoQuantale) -> dict:
    """Join, meet, monoid addition, identity and b∸□ per dualizer.

    Built lazily per co-quantale and cached on the instance; the addition
    connective needs the ε-halver so it only ships on value co-quantales.
    """
    cached = getattr(vq, "_default_kit", None)
    if cached is not None:
        return cached
    ident = identity_modulus(vq)
    n = vq.size
    kit = {}
    kit["id"] = register_connective(vq, "id", np.arange(n, dtype=np.int32), ident)
    kit["vee"] = register_connective(vq, "vee", vq.lattice.join, ident)
    kit["wedge"] = register_connective(vq, "wedge", vq.lattice.meet, ident)
    if vq.value_flag:
        kit["oplus"] = register_connective(vq, "oplus", vq.add, halver_modulus(vq))
    for b in vq.dualizers:
        name = "dual:%s" % vq.element_name(b)
        kit[name] = register_connective(vq, name, vq.tsub[b], ident)
    vq._default_kit = kit
    return kit


# -- terms and formulas -------------------------------------------------------


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    func: str
    args: tuple


@dataclass(frozen=True)
class DistAtom:
    left: object
    right: object


@dataclass(frozen=True)
class PredAtom:
    pred: str
    args: tuple


@dataclass(frozen=True)
class Conn:
    connective: Connective
    args: tuple


@dataclass(frozen=True)
class Val:
    element: int


@dataclass(frozen=True)
class Sup:
    var: int
    body: object


@dataclass(frozen=True)
class Inf:
    var: int
    body: object


def term_free_vars(t):
    match t:
        case Var(index=i):
            return frozenset([i])
        case Const():
            return frozenset()
        case App(args=args):
            out = frozenset()
            for a in args:
                out |= term_free_vars(a)
            return out
    raise TypeError("not a term: %r" % (t,))


def free_vars(phi):
    match phi:
        case DistAtom(left=l, right=r):
            return term_free_vars(l) | term_free_vars(r)
        case PredAtom(args=args):
            out = frozenset()
            for a in args:
                out |= term_free_vars(a)
            return out
        case Conn(args=args):
            out = frozenset()
            for a in args:
                out |= free_vars(a)
            return out
        case Val():
            return frozenset()
        case Sup(var=x, body=b) | Inf(var=x, body=b):
            return free_vars(b) - {x}
    raise TypeError("not a formula: %r" % (phi,))


def is_quantifier_free(phi):
    match phi:
        case Sup() | Inf():
            return False
        case Conn(args=args):
            return all(is_quantifier_free(a) for a in args)
        case _:
            return True


def is_sentence(phi):
    return not free_vars(phi)


def formula_depth(phi):
    match phi:
        case Conn(args=args):
            return 1 + max(formula_depth(a) for a in args)
        case Sup(body=b) | Inf(body=b):
            return 1 + formula_depth(b)
        case _:
            return 0


# -- signatures ------------------------------------------------------------------


class Signature:
    """Non-logical symbol declarations: predicates and functions carry an
    arity and a declared modulus, constants are bare names."""

    def __init__(self, predicates=(), functions=(), constants=()):
        self.predicates = {}
        self.functions = {}
        self.constants = tuple(str(c) for c in constants)
        for name, arity, modulus in predicates:
            self.predicates[str(name)] = (int(arity), modulus)
        for name, arity, modulus in functions:
            self.functions[str(name)] = (int(arity), modulus)
        names = list(self.predicates) + list(self.functions) + list(self.constants)
        if len(set(names)) != len(names):
            raise UnknownSymbol("symbol names must be unique across kinds")
        for name in names:
            if name in RESERVED or VAR_RE.match(name):
                raise UnknownSymbol("%r is a reserved name" % name)
        for name, (arity, _) in list(self.predicates.items()) + list(self.functions.items()):
            if arity < 1:
                raise ArityMismatch("%s: arity must be >= 1" % name)

    def __eq__(self, other):
        return (isinstance(other, Signature)
                and self.predicates == other.predicates
                and self.functions == other.functions
                and self.constants == other.constants)

    def __repr__(self):
        return ("Signature(preds=%r, funs=%r, consts=%r)"
                % (sorted(self.predicates), sorted(self.functions), list(self.constants)))


# -- parsing -------------------------------------------------------------------


_TOKEN_RE = re.compile(r"[()]|[^()\s]+")


def _tokenize(text):
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        tokens.append((match.group(0), match.start()))
    return tokens


class _Parser:
    def __init__(self, text, sig, vq, kit):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.sig = sig
        self.vq = vq
        self.kit = kit
        self.length = len(text)

    def peek(self):
        if self.pos >= len(self.tokens):
            return None, self.length
        return self.tokens[self.pos]

    def next(self):
        tok, at = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", at)
        self.pos += 1
        return tok, at

    def expect(self, symbol):
        tok, at = self.next()
        if tok != symbol:
            raise FormulaSyntaxError("expected %r, got %r" % (symbol, tok), at)

    def done(self):
        tok, at = self.peek()
        if tok is not None:
            raise FormulaSyntaxError("trailing input %r" % tok, at)

    # terms ------------------------------------------------------------

    def term(self):
        tok, at = self.next()
        if tok == ")":
            raise FormulaSyntaxError("unexpected ')'", at)
        if tok == "(":
            head, hat = self.next()
            if head not in self.sig.functions:
                raise UnknownSymbol("unknown function symbol %r" % head)
            arity = self.sig.functions[head][0]
            args = self.args_until_close(self.term)
            if len(args) != arity:
                raise ArityMismatch("%s expects %d arguments, got %d"
                                    % (head, arity, len(args)))
            return App(head, tuple(args))
        m = VAR_RE.match(tok)
        if m:
            return Var(int(m.group(1)))
        if tok in self.sig.constants:
            return Const(tok)
        raise UnknownSymbol("unknown term symbol %r" % tok)

    def args_until_close(self, parse_one):
        args = []
        while True:
            tok, _ = self.peek()
            if tok == ")":
                self.next()
                return args
            if tok is None:
                raise FormulaSyntaxError("missing ')'", self.length)
            args.append(parse_one())

    # formulas ----------------------------------------------------------

    def formula(self):
        tok, at = self.next()
        if tok != "(":
            raise FormulaSyntaxError("formulas start with '('", at)
        head, hat = self.next()
        if head == "d":
            left = self.term()
            right = self.term()
            self.expect(")")
            return DistAtom(left, right)
        if head == "val":
            name, nat = self.next()
            element = self.vq.parse_element(name)
            self.expect(")")
            return Val(element)
        if head in ("sup", "inf"):
            var, vat = self.next()
            m = VAR_RE.match(var)
            if not m:
                raise FormulaSyntaxError("quantifier variable must be xN", vat)
            body = self.formula()
            self.expect(")")
            node = Sup if head == "sup" else Inf
            return node(int(m.group(1)), body)
        if head == "conn":
            name, nat = self.next()
            if name not in self.kit:
                raise UnknownSymbol("unknown connective %r" % name)
            conn = self.kit[name]
            args = self.args_until_close(self.formula)
            if len(args) != conn.arity:
                raise ArityMismatch("%s expects %d arguments, got %d"
                                    % (name, conn.arity, len(args)))
            return Conn(conn, tuple(args))
        if head in self.sig.predicates:
            arity = self.sig.predicates[head][0]
            args = self.args_until_close(self.term)
            if len(args) != arity:
                raise ArityMismatch("%s expects %d arguments, got %d"
                                    % (head, arity, len(args)))
            return PredAtom(head, tuple(args))
        raise UnknownSymbol("unknown formula head %r" % head)


def parse_formula(text, sig: Signature, vq: CoQuantale, kit=None):
    parser = _Parser(text, sig, vq, kit if kit is not None else default_kit(vq))
    phi = parser.formula()
    parser.done()
    return phi


def parse_term(text, sig: Signature, vq: CoQuantale):
    parser = _Parser(text, sig, vq, {})
    t = parser.term()
    parser.done()
    return t


def print_term(t):
    match t:
        case Var(index=i):
            return "x%d" % i
        case Const(name=name):
            return name
        case App(func=f, args=args):
            return "(%s %s)" % (f, " ".join(print_term(a) for a in args))
    raise TypeError("not a term: %r" % (t,))


def print_formula(phi, vq: CoQuantale = None):
    match phi:
        case DistAtom(left=l, right=r):
            return "(d %s %s)" % (print_term(l), print_term(r))
        case PredAtom(pred=p, args=args):
            return "(%s %s)" % (p, " ".join(print_term(a) for a in args))
        case Conn(connective=c, args=args):
            return "(conn %s %s)" % (c.name, " ".join(print_formula(a, vq) for a in args))
        case Val(element=e):
            return "(val %s)" % (vq.element_name(e) if vq is not None else e)
        case Sup(var=x, body=b):
            return "(sup x%d %s)" % (x, print_formula(b, vq))
        case Inf(var=x, body=b):
            return "(inf x%d %s)" % (x, print_formula(b, vq))
    raise TypeError("not a formula: %r" % (phi,))


# -- modulus inference ----------------------------------------------------------


def term_modulus(t, sig: Signature, vq: CoQuantale):
    """Modulus for a term's interpretation, or None when the term cannot
    move at all (it contains no variables)."""
    match t:
        case Var():
            return identity_modulus(vq)
        case Const():
            return None
        case App(func=f, args=args):
            theta = sig.functions[f][1]
            parts = [term_modulus(a, sig, vq) for a in args]
            live = [compose_moduli(p, theta) for p in parts if p is not None]
            if not live:
                return None
            return meet_moduli(vq, live)
    raise TypeError("not a term: %r" % (t,))


def infer_modulus(phi, sig: Signature, vq: CoQuantale) -> Modulus:
    """A modulus valid for the formula's interpretation in every structure.

    Atoms compose the declared predicate modulus with the term moduli; the
    distance atom uses the ε-halver (moving both arguments by δ moves the
    distance by at most δ + δ); connectives compose; quantifiers pass the
    body's modulus through unchanged.
    """
    if not vq.value_flag:
        raise NotValueCoquantale("modulus inference needs a value co-quantale")
    result = _infer(phi, sig, vq)
    return result if result is not None else identity_modulus(vq)


def _infer(phi, sig, vq):
    match phi:
        case DistAtom(left=l, right=r):
            halver = halver_modulus(vq)
            parts = [term_modulus(t, sig, vq) for t in (l, r)]
            live = [compose_moduli(p, halver) for p in parts if p is not None]
            if not live:
                return None
            return meet_moduli(vq, live)
        case PredAtom(pred=p, args=args):
            delta = sig.predicates[p][1]
            parts = [term_modulus(a, sig, vq) for a in args]
            live = [compose_moduli(part, delta) for part in parts if part is not None]
            if not live:
                return None
            return meet_moduli(vq, live)
        case Conn(connective=c, args=args):
            parts = [_infer(a, sig, vq) for a in args]
            live = [compose_moduli(p, c.modulus) for p in parts if p is not None]
            if not live:
                return None
            return meet_moduli(vq, live)
        case Val():
            return None
        case Sup(body=b) | Inf(body=b):
            return _infer(b, sig, vq)
    raise TypeError("not a formula: %r" % (phi,))
