"""Big-step evaluation: running terms to build concrete circuits.

A configuration pairs the circuit built so far with the term under
evaluation.  Evaluation is substitution-based and deterministic; applying a
boxed circuit emits a freshly-relabeled copy of it into the configuration's
circuit.  Checker-accepted closed programs never get stuck — a stuck
configuration here is reported loudly as a bug.
"""
from __future__ import annotations

from dataclasses import dataclass

from .circuits import (
    Bundle,
    Circuit,
    CircuitError,
    ConsB,
    GateApp,
    NilB,
    PairB,
    SingleB,
    UnitB,
    WireType,
    bundle_labels,
    concat,
    identity,
    relabel,
    relabel_bundle,
)
from .indices import (
    BoundedMax,
    BoundedSum,
    IndexTerm,
    Max,
    Minus,
    NatLit,
    Plus,
    Times,
    Var,
    substitute_all,
)
from .checker import labs
from .surface import (
    App,
    ApplyCirc,
    BoxT,
    Dest,
    Fold,
    Force,
    IndexApp,
    Let,
    Return,
    Term,
    TList,
    TTensor,
    TUnit,
    TWire,
    Type,
    VAbs,
    VBoxed,
    VIndexAbs,
    VLabel,
    VLift,
    VNil,
    VPair,
    VRCons,
    VUnit,
    VVar,
    Value,
    pretty,
)
from .checker import substitute_type


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class Configuration:
    circuit: Circuit
    term: Term


@dataclass(frozen=True)
class _QRevVal:
    """`qrev @n`, waiting for its list."""

    n: int


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def subst_value(v: Value, name: str, w: Value) -> Value:
    if isinstance(v, VVar):
        return w if v.name == name else v
    if isinstance(v, (VUnit, VLabel, VNil, VBoxed, _QRevVal)):
        return v
    if isinstance(v, VAbs):
        if v.var == name:
            return v
        return VAbs(v.var, v.ann, subst_term(v.body, name, w))
    if isinstance(v, VLift):
        return VLift(subst_term(v.body, name, w))
    if isinstance(v, VIndexAbs):
        return VIndexAbs(v.binder, subst_term(v.body, name, w))
    if isinstance(v, VPair):
        return VPair(subst_value(v.left, name, w), subst_value(v.right, name, w))
    if isinstance(v, VRCons):
        return VRCons(subst_value(v.init, name, w), subst_value(v.last, name, w))
    raise EvalError(f"cannot substitute into value {v!r}")


def subst_term(m: Term, name: str, w: Value) -> Term:
    if isinstance(m, Return):
        return Return(subst_value(m.value, name, w))
    if isinstance(m, App):
        return App(subst_value(m.fn, name, w), subst_value(m.arg, name, w))
    if isinstance(m, IndexApp):
        return IndexApp(subst_value(m.value, name, w), m.index)
    if isinstance(m, Force):
        return Force(subst_value(m.value, name, w))
    if isinstance(m, ApplyCirc):
        return ApplyCirc(subst_value(m.circ, name, w), subst_value(m.arg, name, w))
    if isinstance(m, BoxT):
        return BoxT(m.ann, subst_value(m.value, name, w))
    if isinstance(m, Let):
        bound = subst_term(m.bound, name, w)
        body = m.body if m.var == name else subst_term(m.body, name, w)
        return Let(m.var, bound, body)
    if isinstance(m, Dest):
        pair = subst_value(m.pair, name, w)
        body = m.body if name in (m.left, m.right) else subst_term(m.body, name, w)
        return Dest(m.left, m.right, pair, body)
    if isinstance(m, Fold):
        return Fold(
            subst_value(m.step, name, w),
            subst_value(m.acc, name, w),
            subst_value(m.lst, name, w),
        )
    raise EvalError(f"cannot substitute into term {m!r}")


def _subst_index_circuit(c: Circuit, name: str, idx: IndexTerm) -> Circuit:
    changed = False
    gates = []
    for g in c.gates:
        if g.param is not None:
            p = substitute_all(g.param, {name: idx})
            if p != g.param:
                changed = True
                gates.append(GateApp(g.gate, g.ins, g.outs, p))
                continue
        gates.append(g)
    return Circuit(c.initial, tuple(gates), c.live, c.counter) if changed else c


def subst_index_value(v: Value, name: str, idx: IndexTerm) -> Value:
    if isinstance(v, (VUnit, VVar, VLabel, VNil, _QRevVal)):
        return v
    if isinstance(v, VBoxed):
        return VBoxed(v.in_bundle, _subst_index_circuit(v.circuit, name, idx), v.out_bundle)
    if isinstance(v, VAbs):
        return VAbs(
            v.var,
            substitute_type(v.ann, {name: idx}),
            subst_index_term(v.body, name, idx),
        )
    if isinstance(v, VLift):
        return VLift(subst_index_term(v.body, name, idx))
    if isinstance(v, VIndexAbs):
        if v.binder == name:
            return v
        return VIndexAbs(v.binder, subst_index_term(v.body, name, idx))
    if isinstance(v, VPair):
        return VPair(subst_index_value(v.left, name, idx), subst_index_value(v.right, name, idx))
    if isinstance(v, VRCons):
        return VRCons(subst_index_value(v.init, name, idx), subst_index_value(v.last, name, idx))
    raise EvalError(f"cannot substitute into value {v!r}")


def subst_index_term(m: Term, name: str, idx: IndexTerm) -> Term:
    if isinstance(m, Return):
        return Return(subst_index_value(m.value, name, idx))
    if isinstance(m, App):
        return App(subst_index_value(m.fn, name, idx), subst_index_value(m.arg, name, idx))
    if isinstance(m, IndexApp):
        return IndexApp(
            subst_index_value(m.value, name, idx), substitute_all(m.index, {name: idx})
        )
    if isinstance(m, Force):
        return Force(subst_index_value(m.value, name, idx))
    if isinstance(m, ApplyCirc):
        return ApplyCirc(
            subst_index_value(m.circ, name, idx), subst_index_value(m.arg, name, idx)
        )
    if isinstance(m, BoxT):
        return BoxT(
            substitute_type(m.ann, {name: idx}), subst_index_value(m.value, name, idx)
        )
    if isinstance(m, Let):
        return Let(
            m.var,
            subst_index_term(m.bound, name, idx),
            subst_index_term(m.body, name, idx),
        )
    if isinstance(m, Dest):
        return Dest(
            m.left, m.right,
            subst_index_value(m.pair, name, idx),
            subst_index_term(m.body, name, idx),
        )
    if isinstance(m, Fold):
        return Fold(
            subst_index_value(m.step, name, idx),
            subst_index_value(m.acc, name, idx),
            subst_index_value(m.lst, name, idx),
        )
    raise EvalError(f"cannot substitute into term {m!r}")


# ---------------------------------------------------------------------------
# Index evaluation (closed arithmetic)
# ---------------------------------------------------------------------------


def eval_closed_index(i: IndexTerm) -> int:
    if isinstance(i, NatLit):
        return i.n
    if isinstance(i, Plus):
        return eval_closed_index(i.l) + eval_closed_index(i.r)
    if isinstance(i, Minus):
        return max(0, eval_closed_index(i.l) - eval_closed_index(i.r))
    if isinstance(i, Times):
        return eval_closed_index(i.l) * eval_closed_index(i.r)
    if isinstance(i, Max):
        return max(eval_closed_index(i.l), eval_closed_index(i.r))
    if isinstance(i, (BoundedSum, BoundedMax)):
        bound = eval_closed_index(i.bound)
        vals = [
            eval_closed_index(substitute_all(i.body, {i.binder: NatLit(k)}))
            for k in range(bound)
        ]
        if isinstance(i, BoundedSum):
            return sum(vals)
        return max(vals, default=0)
    if isinstance(i, Var):
        raise EvalError(f"open index variable '{i.name}' in an operational position")
    raise EvalError(f"index {i!r} is not closed arithmetic")


# ---------------------------------------------------------------------------
# Bundles <-> values
# ---------------------------------------------------------------------------


def value_to_bundle(v: Value) -> Bundle:
    return labs(v)


def bundle_to_value(b: Bundle, types: dict) -> Value:
    if isinstance(b, UnitB):
        return VUnit()
    if isinstance(b, SingleB):
        return VLabel(b.label, types[b.label])
    if isinstance(b, PairB):
        return VPair(bundle_to_value(b.l, types), bundle_to_value(b.r, types))
    if isinstance(b, NilB):
        return VNil()
    if isinstance(b, ConsB):
        return VRCons(bundle_to_value(b.init, types), bundle_to_value(b.last, types))
    raise EvalError(f"not a bundle: {b!r}")


def freshlabels(t: Type, prefix: str = "l"):
    """One fresh label per wire leaf of `t`; returns (context, bundle)."""
    ctx: list = []

    def go(t: Type) -> Bundle:
        if isinstance(t, TUnit):
            return UnitB()
        if isinstance(t, TWire):
            lab = f"{prefix}{len(ctx)}"
            ctx.append((lab, t.wire))
            return SingleB(lab)
        if isinstance(t, TTensor):
            left = go(t.left)
            return PairB(left, go(t.right))
        if isinstance(t, TList):
            n = eval_closed_index(t.length)
            b: Bundle = NilB()
            for k in range(n):
                elem = substitute_type(t.elem, {t.binder: NatLit(k)})
                b = ConsB(b, go(elem))
            return b
        raise EvalError(f"cannot make labels for non-bundle type {pretty(t)}")

    b = go(t)
    return ctx, b


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def emit(c: Circuit, on: Bundle, boxed: VBoxed):
    """Splice `boxed` into `c`, entering on the live labels of `on`.

    The boxed circuit is relabeled so that the labels it shares with `c` are
    exactly those of `on` (everything else becomes fresh), then concatenated.
    Returns the extended circuit and the relabeled output bundle.
    """
    d = boxed.circuit
    on_labels = bundle_labels(on)
    in_labels = bundle_labels(boxed.in_bundle)
    if len(on_labels) != len(in_labels):
        raise EvalError(
            f"emission interface mismatch: {len(in_labels)} wires boxed, "
            f"{len(on_labels)} supplied"
        )
    mapping = dict(zip(in_labels, on_labels))
    counter = c.counter
    taken = c.all_labels() | set(on_labels)
    for lab in sorted(d.all_labels()):
        if lab in mapping:
            continue
        fresh = f"w{counter}"
        while fresh in taken:
            counter += 1
            fresh = f"w{counter}"
        counter += 1
        taken.add(fresh)
        mapping[lab] = fresh
    d2 = relabel(d, mapping)
    try:
        merged = concat(c, d2)
    except CircuitError as e:
        raise EvalError(f"emission failed: {e}") from e
    merged = Circuit(merged.initial, merged.gates, merged.live, max(merged.counter, counter))
    return merged, relabel_bundle(boxed.out_bundle, mapping)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_config(conf: Configuration) -> tuple:
    """Run `conf.term` to a value, growing the circuit; returns (circuit, value)."""
    c, m = conf.circuit, conf.term

    while True:
        if isinstance(m, Return):
            return c, m.value

        if isinstance(m, Let):
            c, v = eval_config(Configuration(c, m.bound))
            m = subst_term(m.body, m.var, v)
            continue

        if isinstance(m, Dest):
            if not isinstance(m.pair, VPair):
                raise EvalError(f"destructuring a non-pair: {pretty(m.pair)}")
            body = subst_term(m.body, m.left, m.pair.left)
            m = subst_term(body, m.right, m.pair.right)
            continue

        if isinstance(m, App):
            if isinstance(m.fn, _QRevVal):
                return c, _reverse_list(m.arg, m.fn.n)
            if not isinstance(m.fn, VAbs):
                raise EvalError(f"applying a non-function: {pretty(m.fn)}")
            m = subst_term(m.fn.body, m.fn.var, m.arg)
            continue

        if isinstance(m, IndexApp):
            n = eval_closed_index(m.index)
            if isinstance(m.value, VVar) and m.value.name == "rep":
                v: Value = VNil()
                for _ in range(n):
                    v = VRCons(v, VUnit())
                return c, v
            if isinstance(m.value, VVar) and m.value.name == "qrev":
                return c, _QRevVal(n)
            if not isinstance(m.value, VIndexAbs):
                raise EvalError(f"index-applying a non-family: {pretty(m.value)}")
            m = subst_index_term(m.value.body, m.value.binder, NatLit(n))
            continue

        if isinstance(m, Force):
            if not isinstance(m.value, VLift):
                raise EvalError(f"forcing a non-suspension: {pretty(m.value)}")
            m = m.value.body
            continue

        if isinstance(m, ApplyCirc):
            if not isinstance(m.circ, VBoxed):
                raise EvalError(f"applying a non-circuit: {pretty(m.circ)}")
            c, out_bundle = emit(c, value_to_bundle(m.arg), m.circ)
            return c, bundle_to_value(out_bundle, dict(c.live))

        if isinstance(m, BoxT):
            ctx, in_bundle = freshlabels(m.ann, prefix="b")
            inner = identity(ctx)
            d, fn = eval_config(Configuration(inner, Force(m.value)))
            arg = bundle_to_value(in_bundle, dict(ctx))
            e, out_val = eval_config(Configuration(d, App(fn, arg)))
            return c, VBoxed(in_bundle, e, value_to_bundle(out_val))

        if isinstance(m, Fold):
            c, v = _eval_fold(c, m)
            return c, v

        raise EvalError(f"stuck configuration at {m!r}")


def _reverse_list(v: Value, n: int) -> Value:
    elems = []
    cur = v
    while isinstance(cur, VRCons):
        elems.append(cur.last)
        cur = cur.init
    if not isinstance(cur, VNil):
        raise EvalError("qrev applied to a non-list")
    if len(elems) != n:
        raise EvalError(f"qrev @{n} applied to a list of length {len(elems)}")
    out: Value = VNil()
    for e in elems:  # elems is outermost-first, so appending reverses
        out = VRCons(out, e)
    return out


def _eval_fold(c: Circuit, m: Fold) -> tuple:
    acc = m.acc
    lst = m.lst
    k = 0
    while True:
        if isinstance(lst, VNil):
            return c, acc
        if not isinstance(lst, VRCons):
            raise EvalError(f"folding over a non-list: {pretty(lst)}")
        c, fam = eval_config(Configuration(c, Force(m.step)))
        if not isinstance(fam, VIndexAbs):
            raise EvalError(f"fold step is not an index family: {pretty(fam)}")
        c, fn = eval_config(
            Configuration(c, subst_index_term(fam.body, fam.binder, NatLit(k)))
        )
        if not isinstance(fn, VAbs):
            raise EvalError(f"fold step did not yield a function: {pretty(fn)}")
        arg = VPair(acc, lst.last)
        c, acc = eval_config(Configuration(c, subst_term(fn.body, fn.var, arg)))
        lst = lst.init
        k += 1
