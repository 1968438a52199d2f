"""Index terms: the arithmetic and resource-operator language used in annotations.

Index terms annotate wire types, effects, and circuit signatures.  Pure
arithmetic (literals, variables, +, truncated -, *, max, bounded sums and
maxima) has a fixed meaning; the abstract operators (identity size, append,
per-gate output, empty, wire, sequential and parallel composition) only gain
meaning under a metric profile, which supplies the interpreting functions.
"""
from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

# ---------------------------------------------------------------------------
# Term syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NatLit:
    n: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Plus:
    l: IndexTerm
    r: IndexTerm


@dataclass(frozen=True)
class Minus:
    """Truncated natural subtraction: never goes below zero."""

    l: IndexTerm
    r: IndexTerm


@dataclass(frozen=True)
class Times:
    l: IndexTerm
    r: IndexTerm


@dataclass(frozen=True)
class Max:
    l: IndexTerm
    r: IndexTerm


@dataclass(frozen=True)
class IdOp:
    """Size of an identity layer over a literal multiset of wire kinds."""

    wires: tuple  # tuple of wire kinds, canonically ordered by constructor

    @staticmethod
    def of(wires: Iterable) -> IdOp:
        return IdOp(tuple(sorted(wires, key=lambda w: w.value)))


@dataclass(frozen=True)
class AppendOp:
    """Global size after appending `gate` to a circuit.

    `before` is the size so far, `beside` the identity size of untouched live
    wires, `into` that of the wires the gate consumes, `outof` that of the
    wires it produces.
    """

    gate: str
    before: IndexTerm
    beside: IndexTerm
    into: IndexTerm
    outof: IndexTerm


@dataclass(frozen=True)
class GateOp:
    """Local annotation of output `pos` (1-based) of `gate`, from input annotations."""

    gate: str
    pos: int
    args: tuple


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class WireOp:
    wire: object  # a wire kind; interpreted by the profile


@dataclass(frozen=True)
class Seq:
    l: IndexTerm
    r: IndexTerm


@dataclass(frozen=True)
class Par:
    l: IndexTerm
    r: IndexTerm


@dataclass(frozen=True)
class BoundedSeq:
    """Fold of the profile's sequential composition over binder = 0..bound-1."""

    binder: str
    bound: IndexTerm
    body: IndexTerm


@dataclass(frozen=True)
class BoundedPar:
    binder: str
    bound: IndexTerm
    body: IndexTerm


@dataclass(frozen=True)
class BoundedSum:
    """Concrete arithmetic sum over binder = 0..bound-1 (profile-independent)."""

    binder: str
    bound: IndexTerm
    body: IndexTerm


@dataclass(frozen=True)
class BoundedMax:
    """Concrete maximum over binder = 0..bound-1; empty range gives 0."""

    binder: str
    bound: IndexTerm
    body: IndexTerm


IndexTerm = Union[
    NatLit, Var, Plus, Minus, Times, Max,
    IdOp, AppendOp, GateOp, Empty, WireOp, Seq, Par,
    BoundedSeq, BoundedPar, BoundedSum, BoundedMax,
]

#: Ordered set of index variable names (no duplicates).
IndexVarSet = tuple  # tuple[str, ...]

#: Assignment of naturals to variable names.
Valuation = Mapping  # Mapping[str, int]

_BINDERS = (BoundedSeq, BoundedPar, BoundedSum, BoundedMax)
_BINARY = {Plus, Minus, Times, Max, Seq, Par}


def nat(n: int) -> NatLit:
    return NatLit(n)


def var(name: str) -> Var:
    return Var(name)


class EvaluationError(Exception):
    pass


class ExportError(Exception):
    pass


# ---------------------------------------------------------------------------
# Free variables and substitution
# ---------------------------------------------------------------------------


def free_vars(i: IndexTerm) -> IndexVarSet:
    """Unbound variable names of `i`, in first-appearance order."""
    seen: dict[str, None] = {}

    def walk(t: IndexTerm, bound: frozenset) -> None:
        if isinstance(t, Var):
            if t.name not in bound and t.name not in seen:
                seen[t.name] = None
        elif isinstance(t, _BINDERS):
            walk(t.bound, bound)
            walk(t.body, bound | {t.binder})
        elif type(t) in _BINARY:
            walk(t.l, bound)
            walk(t.r, bound)
        elif isinstance(t, AppendOp):
            for s in (t.before, t.beside, t.into, t.outof):
                walk(s, bound)
        elif isinstance(t, GateOp):
            for s in t.args:
                walk(s, bound)
        # NatLit, IdOp, Empty, WireOp: no variables

    walk(i, frozenset())
    return tuple(seen)


def _fresh_name(base: str, avoid: frozenset) -> str:
    k = 1
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


def substitute(i: IndexTerm, replacement: IndexTerm, name: str) -> IndexTerm:
    """Capture-avoiding substitution of `replacement` for variable `name` in `i`."""
    repl_free = frozenset(free_vars(replacement))

    def walk(t: IndexTerm) -> IndexTerm:
        if isinstance(t, Var):
            return replacement if t.name == name else t
        if isinstance(t, _BINDERS):
            new_bound = walk(t.bound)
            if t.binder == name:
                return type(t)(t.binder, new_bound, t.body)
            body = t.body
            binder = t.binder
            if binder in repl_free and name in free_vars(body):
                avoid = repl_free | frozenset(free_vars(body)) | {name}
                binder = _fresh_name(t.binder, avoid)
                body = substitute(body, Var(binder), t.binder)
            return type(t)(binder, new_bound, walk(body))
        if type(t) in _BINARY:
            return type(t)(walk(t.l), walk(t.r))
        if isinstance(t, AppendOp):
            return AppendOp(t.gate, walk(t.before), walk(t.beside), walk(t.into), walk(t.outof))
        if isinstance(t, GateOp):
            return GateOp(t.gate, t.pos, tuple(walk(s) for s in t.args))
        return t

    return walk(i)


def substitute_all(i: IndexTerm, mapping: Mapping) -> IndexTerm:
    """Apply several independent substitutions (no variable appears in a replacement)."""
    out = i
    for name, repl in mapping.items():
        out = substitute(out, repl, name)
    return out


# ---------------------------------------------------------------------------
# Evaluation under a metric profile
# ---------------------------------------------------------------------------


def evaluate(i: IndexTerm, v: Valuation, p) -> int:
    """Evaluate a term to a natural under valuation `v` and metric profile `p`.

    Raises EvaluationError for variables missing from the valuation.
    """
    if isinstance(i, NatLit):
        return i.n
    if isinstance(i, Var):
        try:
            return v[i.name]
        except KeyError:
            raise EvaluationError(f"unbound index variable '{i.name}'") from None
    if isinstance(i, Plus):
        return evaluate(i.l, v, p) + evaluate(i.r, v, p)
    if isinstance(i, Minus):
        return max(0, evaluate(i.l, v, p) - evaluate(i.r, v, p))
    if isinstance(i, Times):
        return evaluate(i.l, v, p) * evaluate(i.r, v, p)
    if isinstance(i, Max):
        return max(evaluate(i.l, v, p), evaluate(i.r, v, p))
    if isinstance(i, IdOp):
        return p.cmi.id_fn(i.wires)
    if isinstance(i, AppendOp):
        return p.cmi.append_fn(
            i.gate,
            evaluate(i.before, v, p),
            evaluate(i.beside, v, p),
            evaluate(i.into, v, p),
            evaluate(i.outof, v, p),
        )
    if isinstance(i, GateOp):
        return p.cmi.gate_fn(i.gate, i.pos, [evaluate(a, v, p) for a in i.args])
    if isinstance(i, Empty):
        return p.rmi.empty_val
    if isinstance(i, WireOp):
        return p.rmi.wire_fn(i.wire)
    if isinstance(i, Seq):
        return p.rmi.seq_fn(evaluate(i.l, v, p), evaluate(i.r, v, p))
    if isinstance(i, Par):
        return p.rmi.par_fn(evaluate(i.l, v, p), evaluate(i.r, v, p))
    if isinstance(i, (BoundedSeq, BoundedPar)):
        op = p.rmi.seq_fn if isinstance(i, BoundedSeq) else p.rmi.par_fn
        acc = p.rmi.empty_val
        inner = dict(v)
        for k in range(evaluate(i.bound, v, p)):
            inner[i.binder] = k
            acc = op(acc, evaluate(i.body, inner, p))
        return acc
    if isinstance(i, (BoundedSum, BoundedMax)):
        acc = 0
        inner = dict(v)
        for k in range(evaluate(i.bound, v, p)):
            inner[i.binder] = k
            x = evaluate(i.body, inner, p)
            acc = acc + x if isinstance(i, BoundedSum) else max(acc, x)
        return acc
    raise EvaluationError(f"cannot evaluate {i!r}")


# ---------------------------------------------------------------------------
# Bounded entailment checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HoldsBounded:
    """The relation held on every tested valuation (not a proof)."""


@dataclass(frozen=True)
class Counterexample:
    valuation: tuple  # tuple of (name, value) pairs, ordered like the var set


EntailmentVerdict = Union[HoldsBounded, Counterexample]

LE = "LE"
EQ = "EQ"


@dataclass(frozen=True)
class CheckStrategy:
    """How many valuations a bounded entailment check walks through.

    `grid_max` is the per-axis radius of the exhaustive grid; on obligations
    with many free variables the radius shrinks until the whole grid fits in
    `grid_budget` points.  Random samples draw components below `sample_max`,
    except that obligations containing nested bounded operators (whose
    evaluation cost grows with the components) have their draw ceiling capped
    so one point costs roughly `point_budget` operations.
    """

    grid_max: int = 8
    samples: int = 256
    sample_max: int = 1 << 10
    grid_budget: int = 4096
    point_budget: int = 4096


def _obligation_seed(vars: Sequence, lhs: IndexTerm, rhs: IndexTerm, rel: str, pname: str) -> int:
    text = "|".join([",".join(vars), pretty_index(lhs), pretty_index(rhs), rel, pname])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def compile_index(i: IndexTerm, p):
    """Compile a term to a closure `env -> int` equivalent to `evaluate`.

    Entailment checking evaluates the same pair of terms at thousands of
    valuations; building the dispatch once makes that loop several times faster.
    """
    rmi, cmi = p.rmi, p.cmi

    def go(i: IndexTerm):
        if isinstance(i, NatLit):
            n = i.n
            return lambda env: n
        if isinstance(i, Var):
            name = i.name

            def var_fn(env):
                try:
                    return env[name]
                except KeyError:
                    raise EvaluationError(f"unbound index variable '{name}'") from None

            return var_fn
        if isinstance(i, Plus):
            l, r = go(i.l), go(i.r)
            return lambda env: l(env) + r(env)
        if isinstance(i, Minus):
            l, r = go(i.l), go(i.r)
            return lambda env: max(0, l(env) - r(env))
        if isinstance(i, Times):
            l, r = go(i.l), go(i.r)
            return lambda env: l(env) * r(env)
        if isinstance(i, Max):
            l, r = go(i.l), go(i.r)
            return lambda env: max(l(env), r(env))
        if isinstance(i, IdOp):
            n = cmi.id_fn(i.wires)
            return lambda env: n
        if isinstance(i, AppendOp):
            gate = i.gate
            fn = cmi.append_fn
            before, beside = go(i.before), go(i.beside)
            into, outof = go(i.into), go(i.outof)
            return lambda env: fn(gate, before(env), beside(env), into(env), outof(env))
        if isinstance(i, GateOp):
            gate, pos, fn = i.gate, i.pos, cmi.gate_fn
            args = [go(a) for a in i.args]
            return lambda env: fn(gate, pos, [a(env) for a in args])
        if isinstance(i, Empty):
            n = rmi.empty_val
            return lambda env: n
        if isinstance(i, WireOp):
            n = rmi.wire_fn(i.wire)
            return lambda env: n
        if isinstance(i, Seq):
            fn, l, r = rmi.seq_fn, go(i.l), go(i.r)
            return lambda env: fn(l(env), r(env))
        if isinstance(i, Par):
            fn, l, r = rmi.par_fn, go(i.l), go(i.r)
            return lambda env: fn(l(env), r(env))
        if isinstance(i, (BoundedSeq, BoundedPar)):
            op = rmi.seq_fn if isinstance(i, BoundedSeq) else rmi.par_fn
            empty = rmi.empty_val
            binder, bound, body = i.binder, go(i.bound), go(i.body)

            def folded(env):
                acc = empty
                inner = dict(env)
                for k in range(bound(env)):
                    inner[binder] = k
                    acc = op(acc, body(inner))
                return acc

            return folded
        if isinstance(i, (BoundedSum, BoundedMax)):
            summing = isinstance(i, BoundedSum)
            binder, bound, body = i.binder, go(i.bound), go(i.body)

            def arith(env):
                acc = 0
                inner = dict(env)
                for k in range(bound(env)):
                    inner[binder] = k
                    x = body(inner)
                    acc = acc + x if summing else max(acc, x)
                return acc

            return arith
        raise EvaluationError(f"cannot evaluate {i!r}")

    return go(i)


def _loop_depth(i: IndexTerm) -> int:
    """Nesting depth of bounded operators: evaluation cost grows like m**depth."""
    if isinstance(i, (BoundedSeq, BoundedPar, BoundedSum, BoundedMax)):
        return max(_loop_depth(i.bound), 1 + _loop_depth(i.body))
    if isinstance(i, (Plus, Minus, Times, Max, Seq, Par)):
        return max(_loop_depth(i.l), _loop_depth(i.r))
    if isinstance(i, AppendOp):
        return max(
            _loop_depth(i.before), _loop_depth(i.beside),
            _loop_depth(i.into), _loop_depth(i.outof),
        )
    if isinstance(i, GateOp):
        return max((_loop_depth(a) for a in i.args), default=0)
    return 0


def check_entailment(
    vars: Sequence,
    lhs: IndexTerm,
    rhs: IndexTerm,
    rel: str,
    p,
    strategy: CheckStrategy | None = None,
) -> EntailmentVerdict:
    """Test `lhs rel rhs` under every valuation the strategy produces.

    The default strategy is an exhaustive grid over {0..grid_max}^|vars| plus
    `samples` pseudo-random valuations with components below `sample_max`,
    seeded deterministically from the obligation itself.  A HoldsBounded
    verdict means no tested valuation failed; it is not a proof.
    """
    strategy = strategy or CheckStrategy()
    names = list(vars)
    lf = compile_index(lhs, p)
    rf = compile_index(rhs, p)

    if rel == LE:
        def holds(valuation: Mapping) -> bool:
            return lf(valuation) <= rf(valuation)
    else:
        def holds(valuation: Mapping) -> bool:
            return lf(valuation) == rf(valuation)

    g = strategy.grid_max
    while names and g > 2 and (g + 1) ** len(names) > strategy.grid_budget:
        g -= 1
    for combo in itertools.product(range(g + 1), repeat=len(names)):
        valuation = dict(zip(names, combo))
        if not holds(valuation):
            return Counterexample(tuple(zip(names, combo)))
    if names:
        depth = max(_loop_depth(lhs), _loop_depth(rhs))
        cap = strategy.sample_max
        if depth > 1:
            cap = min(cap, max(4, round(strategy.point_budget ** (1.0 / depth))))
        rng = random.Random(_obligation_seed(names, lhs, rhs, rel, p.name))
        for _ in range(strategy.samples):
            combo = tuple(rng.randrange(cap) for _ in names)
            valuation = dict(zip(names, combo))
            if not holds(valuation):
                return Counterexample(tuple(zip(names, combo)))
    return HoldsBounded()


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------

_PREC_SUM = 1      # + and -
_PREC_PROD = 2     # *
_PREC_ATOM = 3


def pretty_index(i: IndexTerm) -> str:
    """Deterministic text for an index term, in the surface syntax where one exists."""
    return _pp(i, 0)


def _pp(i: IndexTerm, ctx: int) -> str:
    def wrap(s: str, prec: int) -> str:
        return f"({s})" if prec < ctx else s

    if isinstance(i, NatLit):
        return str(i.n)
    if isinstance(i, Var):
        return i.name
    if isinstance(i, Plus):
        return wrap(f"{_pp(i.l, _PREC_SUM)}+{_pp(i.r, _PREC_SUM + 1)}", _PREC_SUM)
    if isinstance(i, Minus):
        return wrap(f"{_pp(i.l, _PREC_SUM)}-{_pp(i.r, _PREC_SUM + 1)}", _PREC_SUM)
    if isinstance(i, Times):
        return wrap(f"{_pp(i.l, _PREC_PROD)}*{_pp(i.r, _PREC_PROD + 1)}", _PREC_PROD)
    if isinstance(i, Max):
        return f"max({_pp(i.l, 0)},{_pp(i.r, 0)})"
    if isinstance(i, BoundedSum):
        # the body extends to the end of the expression, so any operand
        # position needs parentheses
        return wrap(f"sum[{i.binder}<{_pp(i.bound, 0)}] {_pp(i.body, 0)}", 0)
    if isinstance(i, BoundedMax):
        return wrap(f"max[{i.binder}<{_pp(i.bound, 0)}] {_pp(i.body, 0)}", 0)
    if isinstance(i, IdOp):
        return "id{%s}" % ",".join(w.value for w in i.wires)
    if isinstance(i, AppendOp):
        parts = ",".join(_pp(s, 0) for s in (i.before, i.beside, i.into, i.outof))
        return f"append_{i.gate}({parts})"
    if isinstance(i, GateOp):
        return f"d[{i.gate},{i.pos}](%s)" % ",".join(_pp(a, 0) for a in i.args)
    if isinstance(i, Empty):
        return "empty"
    if isinstance(i, WireOp):
        return f"wire_{i.wire.value}"
    if isinstance(i, Seq):
        return f"seq({_pp(i.l, 0)},{_pp(i.r, 0)})"
    if isinstance(i, Par):
        return f"par({_pp(i.l, 0)},{_pp(i.r, 0)})"
    if isinstance(i, BoundedSeq):
        return wrap(f"seq[{i.binder}<{_pp(i.bound, 0)}] {_pp(i.body, 0)}", 0)
    if isinstance(i, BoundedPar):
        return wrap(f"par[{i.binder}<{_pp(i.bound, 0)}] {_pp(i.body, 0)}", 0)
    raise TypeError(f"not an index term: {i!r}")


# ---------------------------------------------------------------------------
# Profile-aware simplification
# ---------------------------------------------------------------------------
#
# Under a fixed profile the abstract operators are ordinary functions, so a
# term can be partially evaluated: abstract nodes expand through the profile's
# symbolic templates, pure arithmetic canonicalizes as integer polynomials
# (with truncated subtraction treated exactly only when provably in range),
# and bounded forms collapse where sound.  Every rewrite preserves the value
# of the term on all naturals, given the binder-range assumptions collected
# while descending into bounded bodies.

Poly = dict  # Monomial -> int, where Monomial = tuple of atom terms (sorted by repr)

_ZERO = NatLit(0)


def _poly_const(c: int) -> Poly:
    return {(): c} if c else {}


def _poly_atom(t: IndexTerm) -> Poly:
    return {(t,): 1}


def _poly_add(a: Poly, b: Poly, negate_b: bool = False) -> Poly:
    out = dict(a)
    for m, c in b.items():
        c = -c if negate_b else c
        out[m] = out.get(m, 0) + c
        if out[m] == 0:
            del out[m]
    return out


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(sorted(ma + mb, key=repr))
            out[m] = out.get(m, 0) + ca * cb
            if out[m] == 0:
                del out[m]
    return out


def _poly_nonneg(pl: Poly) -> bool:
    return all(c >= 0 for c in pl.values())


class _Simplifier:
    def __init__(self, profile):
        self.p = profile

    # -- assumption reasoning ------------------------------------------------

    def _le(self, a: Poly, b: Poly, assumptions: tuple) -> bool:
        """Is a <= b on all naturals, given the assumption polynomials (each >= 0)?"""
        diff = _poly_add(b, a, negate_b=True)
        if _poly_nonneg(diff):
            return True
        for gap in assumptions:
            for lam in (1, 2, 3, 4):
                scaled = {m: c * lam for m, c in gap.items()}
                if _poly_nonneg(_poly_add(diff, scaled, negate_b=True)):
                    return True
        return False

    # -- polynomial view -----------------------------------------------------

    def _to_poly(self, t: IndexTerm, assumptions: tuple) -> Poly:
        if isinstance(t, NatLit):
            return _poly_const(t.n)
        if isinstance(t, Var):
            return _poly_atom(t)
        if isinstance(t, Plus):
            return _poly_add(self._to_poly(t.l, assumptions), self._to_poly(t.r, assumptions))
        if isinstance(t, Times):
            return _poly_mul(self._to_poly(t.l, assumptions), self._to_poly(t.r, assumptions))
        if isinstance(t, Minus):
            pl = self._to_poly(t.l, assumptions)
            pr = self._to_poly(t.r, assumptions)
            if self._le(pr, pl, assumptions):
                return _poly_add(pl, pr, negate_b=True)
            if self._le(pl, pr, assumptions):
                return _poly_const(0)  # truncation bottoms out
            return _poly_atom(t)
        return _poly_atom(t)

    def _atom_order(self, t: IndexTerm) -> list:
        """Atoms of the original term in first-appearance order (render stability)."""
        order: list = []

        def walk(s: IndexTerm) -> None:
            if isinstance(s, (Plus, Minus, Times)):
                walk(s.l)
                walk(s.r)
            elif isinstance(s, NatLit):
                pass
            else:
                if s not in order:
                    order.append(s)

        walk(t)
        return order

    def _from_poly(self, pl: Poly, order: list) -> IndexTerm:
        pos = {m: c for m, c in pl.items() if c > 0}
        neg = {m: -c for m, c in pl.items() if c < 0}
        pos_term = self._render_sum(pos, order)
        if not neg:
            return pos_term
        return Minus(pos_term, self._render_sum(neg, order))

    def _render_sum(self, pl: Poly, order: list) -> IndexTerm:
        if not pl:
            return _ZERO

        def mono_key(m: tuple) -> tuple:
            if not m:
                return (1, 0)  # constants last
            ranks = [order.index(a) if a in order else len(order) for a in m]
            return (0, min(ranks))

        terms = []
        for m in sorted(pl, key=mono_key):
            c = pl[m]
            if not m:
                terms.append(NatLit(c))
                continue
            factor: IndexTerm | None = None
            for a in m:
                factor = a if factor is None else Times(factor, a)
            if c != 1:
                factor = Times(NatLit(c), factor)
            terms.append(factor)
        out = terms[0]
        for t in terms[1:]:
            out = Plus(out, t)
        return out

    # -- expansion of profile operators --------------------------------------

    def _expand(self, t: IndexTerm) -> IndexTerm:
        rmi, cmi = self.p.rmi, self.p.cmi
        if isinstance(t, Empty):
            return NatLit(rmi.empty_val)
        if isinstance(t, WireOp):
            return NatLit(rmi.wire_fn(t.wire))
        if isinstance(t, IdOp):
            return NatLit(cmi.id_fn(t.wires))
        if isinstance(t, (Seq, Par)):
            kind = rmi.seq_kind if isinstance(t, Seq) else rmi.par_kind
            l, r = self._expand(t.l), self._expand(t.r)
            if kind == "plus":
                return Plus(l, r)
            if kind == "max":
                return Max(l, r)
            return type(t)(l, r)
        if isinstance(t, (BoundedSeq, BoundedPar)):
            kind = rmi.seq_kind if isinstance(t, BoundedSeq) else rmi.par_kind
            bound, body = self._expand(t.bound), self._expand(t.body)
            if rmi.empty_val == 0 and kind == "plus":
                return BoundedSum(t.binder, bound, body)
            if rmi.empty_val == 0 and kind == "max":
                return BoundedMax(t.binder, bound, body)
            return type(t)(t.binder, bound, body)
        if isinstance(t, AppendOp):
            template = cmi.append_sym(t.gate)
            args = [self._expand(s) for s in (t.before, t.beside, t.into, t.outof)]
            if template is not None:
                return template(*args)
            return AppendOp(t.gate, *args)
        if isinstance(t, GateOp):
            template = cmi.gate_sym(t.gate, t.pos)
            args = [self._expand(a) for a in t.args]
            if template is not None:
                return template(args)
            return GateOp(t.gate, t.pos, tuple(args))
        if type(t) in _BINARY:
            return type(t)(self._expand(t.l), self._expand(t.r))
        if isinstance(t, (BoundedSum, BoundedMax)):
            return type(t)(t.binder, self._expand(t.bound), self._expand(t.body))
        return t

    # -- normalization -------------------------------------------------------

    def _norm(self, t: IndexTerm, assumptions: tuple) -> IndexTerm:
        if isinstance(t, (NatLit, Var, Empty, WireOp, IdOp)):
            return t
        if isinstance(t, Max):
            return self._norm_max(t, assumptions)
        if isinstance(t, (Plus, Minus, Times)):
            l = self._norm(t.l, assumptions)
            r = self._norm(t.r, assumptions)
            poly = self._to_poly(type(t)(l, r), assumptions)
            return self._from_poly(poly, self._atom_order(type(t)(l, r)))
        if isinstance(t, (BoundedSum, BoundedMax)):
            return self._norm_bounded(t, assumptions)
        if isinstance(t, (BoundedSeq, BoundedPar)):
            bound = self._norm(t.bound, assumptions)
            inner = assumptions + (self._gap_poly(t.binder, bound, assumptions),)
            return type(t)(t.binder, bound, self._norm(t.body, inner))
        if type(t) in _BINARY:
            return type(t)(self._norm(t.l, assumptions), self._norm(t.r, assumptions))
        if isinstance(t, AppendOp):
            return AppendOp(
                t.gate,
                self._norm(t.before, assumptions),
                self._norm(t.beside, assumptions),
                self._norm(t.into, assumptions),
                self._norm(t.outof, assumptions),
            )
        if isinstance(t, GateOp):
            return GateOp(t.gate, t.pos, tuple(self._norm(a, assumptions) for a in t.args))
        return t

    def _gap_poly(self, binder: str, bound: IndexTerm, assumptions: tuple) -> Poly:
        # binder + 1 <= bound, recorded as the nonnegative gap bound - binder - 1
        pb = self._to_poly(bound, assumptions)
        return _poly_add(pb, _poly_add(_poly_atom(Var(binder)), _poly_const(1)), negate_b=True)

    def _norm_max(self, t: Max, assumptions: tuple) -> IndexTerm:
        args: list = []

        def flatten(s: IndexTerm) -> None:
            if isinstance(s, Max):
                flatten(s.l)
                flatten(s.r)
            else:
                args.append(s)

        def collect(s: IndexTerm) -> None:
            if isinstance(s, Max):
                collect(s.l)
                collect(s.r)
            else:
                flatten(self._norm(s, assumptions))

        collect(t.l)
        collect(t.r)
        kept: list = []
        for a in args:
            if a == _ZERO or a in kept:
                continue
            kept.append(a)
        pruned: list = []
        for i, a in enumerate(kept):
            dominated = False
            for j, b in enumerate(kept):
                if i == j:
                    continue
                if self._dominated(a, b, assumptions) and not (
                    self._dominated(b, a, assumptions) and j > i
                ):
                    dominated = True
                    break
            if not dominated:
                pruned.append(a)
        if not pruned:
            return _ZERO
        out = pruned[0]
        for a in pruned[1:]:
            out = Max(out, a)
        return out

    def _dominated(self, a: IndexTerm, b: IndexTerm, assumptions: tuple) -> bool:
        """Is a <= b provable (so a can be dropped from a max with b)?"""
        if isinstance(a, BoundedMax) and a.binder not in free_vars(b):
            # the fold's value is 0 or some body instance, each <= b
            inner = assumptions + (self._gap_poly(a.binder, a.bound, assumptions),)
            return self._le(self._to_poly(a.body, inner), self._to_poly(b, inner), inner)
        pa = self._to_poly(a, assumptions)
        pb = self._to_poly(b, assumptions)
        return self._le(pa, pb, assumptions)

    def _norm_bounded(self, t: BoundedSum | BoundedMax, assumptions: tuple) -> IndexTerm:
        bound = self._norm(t.bound, assumptions)
        inner = assumptions + (self._gap_poly(t.binder, bound, assumptions),)
        body = self._norm(t.body, inner)
        if body == _ZERO:
            return _ZERO
        if isinstance(bound, NatLit):
            pieces = [
                self._norm(substitute(body, NatLit(k), t.binder), assumptions)
                for k in range(bound.n)
            ]
            if not pieces:
                return _ZERO
            out = pieces[0]
            for piece in pieces[1:]:
                out = Plus(out, piece) if isinstance(t, BoundedSum) else Max(out, piece)
            return self._norm(out, assumptions)
        if t.binder not in free_vars(body):
            if isinstance(t, BoundedSum):
                return self._norm(Times(bound, body), assumptions)
            if body == bound:
                return bound
        return type(t)(t.binder, bound, body)


def simplify(i: IndexTerm, p, assumptions: Sequence = ()) -> IndexTerm:
    """Normalize `i` under profile `p`, preserving its value on all naturals.

    `assumptions` is a sequence of (small, large) index-term pairs known to
    satisfy small <= large wherever the term is used (e.g. binder ranges).
    """
    s = _Simplifier(p)
    base: tuple = ()
    for small, large in assumptions:
        gap = _poly_add(
            s._to_poly(s._expand(large), ()), s._to_poly(s._expand(small), ()), negate_b=True
        )
        base = base + (gap,)
    return s._norm(s._expand(i), base)


# ---------------------------------------------------------------------------
# SMT-LIB export
# ---------------------------------------------------------------------------

_SMT_HEADER = """(set-logic ALL)
(define-fun natmax ((a Int) (b Int)) Int (ite (>= a b) a b))
(define-fun natsub ((a Int) (b Int)) Int (ite (>= a b) (- a b) 0))
"""


def export_smtlib(vars: Sequence, lhs: IndexTerm, rhs: IndexTerm, rel: str, p) -> str:
    """Render the negation of `lhs rel rhs` as an SMT-LIB v2 script.

    Unsatisfiability of the script implies the judgment holds for all
    naturals.  Abstract operators are expanded through the profile's symbolic
    templates; bounded forms must have closed bounds (they are unrolled).
    """
    s = _Simplifier(p)
    expanded_l = s._expand(lhs)
    expanded_r = s._expand(rhs)
    lines = [_SMT_HEADER.rstrip()]
    for name in vars:
        lines.append(f"(declare-const {name} Int)")
        lines.append(f"(assert (>= {name} 0))")
    el = _smt(expanded_l)
    er = _smt(expanded_r)
    op = "<=" if rel == LE else "="
    lines.append(f"(assert (not ({op} {el} {er})))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _smt(t: IndexTerm) -> str:
    if isinstance(t, NatLit):
        return str(t.n)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Plus):
        return f"(+ {_smt(t.l)} {_smt(t.r)})"
    if isinstance(t, Minus):
        return f"(natsub {_smt(t.l)} {_smt(t.r)})"
    if isinstance(t, Times):
        return f"(* {_smt(t.l)} {_smt(t.r)})"
    if isinstance(t, Max):
        return f"(natmax {_smt(t.l)} {_smt(t.r)})"
    if isinstance(t, (BoundedSum, BoundedMax)):
        if free_vars(t.bound):
            raise ExportError(
                f"cannot export bounded operator with open bound: {pretty_index(t)}"
            )
        n = _eval_closed_arith(t.bound)
        pieces = [_smt(substitute(t.body, NatLit(k), t.binder)) for k in range(n)]
        if not pieces:
            return "0"
        glue = "+" if isinstance(t, BoundedSum) else "natmax"
        out = pieces[0]
        for piece in pieces[1:]:
            out = f"({glue} {out} {piece})"
        return out
    raise ExportError(f"operator not expressible under this profile: {pretty_index(t)}")


def _eval_closed_arith(t: IndexTerm) -> int:
    """Evaluate closed pure arithmetic without a profile (abstract ops rejected)."""
    if isinstance(t, NatLit):
        return t.n
    if isinstance(t, Plus):
        return _eval_closed_arith(t.l) + _eval_closed_arith(t.r)
    if isinstance(t, Minus):
        return max(0, _eval_closed_arith(t.l) - _eval_closed_arith(t.r))
    if isinstance(t, Times):
        return _eval_closed_arith(t.l) * _eval_closed_arith(t.r)
    if isinstance(t, Max):
        return max(_eval_closed_arith(t.l), _eval_closed_arith(t.r))
    if isinstance(t, (BoundedSum, BoundedMax)):
        n = _eval_closed_arith(t.bound)
        vals = [_eval_closed_arith(substitute(t.body, NatLit(k), t.binder)) for k in range(n)]
        if isinstance(t, BoundedSum):
            return sum(vals)
        return max(vals, default=0)
    raise ExportError(f"not closed arithmetic: {pretty_index(t)}")
