"""Type-and-effect checking.

Synthesizes, for every term, a type together with an index that bounds the
size of every circuit the term can build, under the chosen metric profile.
Linear resources (wire-typed variables and labels) are tracked in a used-set
so each is consumed exactly once; annotation obligations are discharged by
bounded entailment checking over the index language.

Global profiles ignore wire annotations entirely; the local (depth-style)
profile threads them through every rule and suppresses the global effect.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .circuits import Bundle, ConsB, NilB, PairB, SingleB, UnitB, WireType
from .indices import (
    BoundedPar,
    BoundedSeq,
    CheckStrategy,
    Counterexample,
    Empty,
    EQ,
    IndexTerm,
    LE,
    Max,
    Minus,
    NatLit,
    Par,
    Plus,
    Seq,
    Var,
    WireOp,
    check_entailment,
    free_vars,
    pretty_index,
    substitute_all,
)
from .profiles import MetricProfile, ProfileKind
from .signatures import bundle_type, infer_signature
from .surface import (
    App,
    ApplyCirc,
    Binding,
    BoxT,
    Dest,
    Fold,
    Force,
    IndexApp,
    Let,
    Program,
    Return,
    TArrow,
    TBang,
    TCirc,
    Term,
    TIndexAll,
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
    is_value_term,
    pretty,
)


class TypeCheckError(Exception):
    def __init__(self, code: str, message: str, obligation: str | None = None):
        self.code = code
        self.obligation = obligation
        extra = f" [{obligation}]" if obligation else ""
        super().__init__(f"{code}: {message}{extra}")


# ---------------------------------------------------------------------------
# Type size, wire content, labs
# ---------------------------------------------------------------------------


def type_size(a: Type) -> IndexTerm:
    """The index bounding the wires held inside a value of type `a`."""
    if isinstance(a, (TUnit, TBang, TCirc, TIndexAll, _QRevType)):
        return Empty()
    if isinstance(a, TWire):
        return WireOp(a.wire)
    if isinstance(a, TTensor):
        return Par(type_size(a.left), type_size(a.right))
    if isinstance(a, TList):
        return BoundedPar(a.binder, a.length, type_size(a.elem))
    if isinstance(a, TArrow):
        return type_size(a.capture)
    raise TypeError(f"not a type: {a!r}")


def wire_content(a: Type) -> Type:
    """Strip `a` down to the bundle type of the wires inside its values."""
    if isinstance(a, (TUnit, TBang, TCirc, TIndexAll, _QRevType)):
        return TUnit()
    if isinstance(a, TWire):
        return a
    if isinstance(a, TTensor):
        return TTensor(wire_content(a.left), wire_content(a.right))
    if isinstance(a, TList):
        return TList(a.binder, a.length, wire_content(a.elem))
    if isinstance(a, TArrow):
        return a.capture
    raise TypeError(f"not a type: {a!r}")


def _collect_labels(x, out: list) -> None:
    if isinstance(x, VLabel):
        out.append((x.label, x.wire))
    elif isinstance(x, VBoxed):
        pass  # internal labels are not free
    elif isinstance(x, (VUnit, VVar, VNil)):
        pass
    elif isinstance(x, VPair):
        _collect_labels(x.left, out)
        _collect_labels(x.right, out)
    elif isinstance(x, VRCons):
        _collect_labels(x.init, out)
        _collect_labels(x.last, out)
    elif isinstance(x, VAbs):
        _collect_labels(x.body, out)
    elif isinstance(x, (VLift, VIndexAbs)):
        _collect_labels(x.body, out)
    elif isinstance(x, App):
        _collect_labels(x.fn, out)
        _collect_labels(x.arg, out)
    elif isinstance(x, Dest):
        _collect_labels(x.pair, out)
        _collect_labels(x.body, out)
    elif isinstance(x, (Force, Return)):
        _collect_labels(x.value, out)
    elif isinstance(x, ApplyCirc):
        _collect_labels(x.circ, out)
        _collect_labels(x.arg, out)
    elif isinstance(x, BoxT):
        _collect_labels(x.value, out)
    elif isinstance(x, Let):
        _collect_labels(x.bound, out)
        _collect_labels(x.body, out)
    elif isinstance(x, Fold):
        _collect_labels(x.step, out)
        _collect_labels(x.acc, out)
        _collect_labels(x.lst, out)
    elif isinstance(x, IndexApp):
        _collect_labels(x.value, out)
    else:
        raise TypeError(f"not a term or value: {x!r}")


def _assemble_bundle(labels: Sequence) -> Bundle:
    if not labels:
        return UnitB()
    b: Bundle = SingleB(labels[0][0])
    for lab, _ in labels[1:]:
        b = PairB(b, SingleB(lab))
    return b


def labs(x) -> Bundle:
    """The bundle of labels inside `x`, mirroring wire_content of its type."""
    if isinstance(x, VLabel):
        return SingleB(x.label)
    if isinstance(x, VUnit):
        return UnitB()
    if isinstance(x, VNil):
        return NilB()
    if isinstance(x, VPair):
        return PairB(labs(x.left), labs(x.right))
    if isinstance(x, VRCons):
        return ConsB(labs(x.init), labs(x.last))
    collected: list = []
    _collect_labels(x, collected)
    return _assemble_bundle(collected)


# ---------------------------------------------------------------------------
# Type utilities
# ---------------------------------------------------------------------------


def is_param_type(a: Type) -> bool:
    """Parameter (duplicable) types: no wires outside of suspended contexts."""
    if isinstance(a, (TUnit, TBang, TCirc, TIndexAll)):
        return True
    if isinstance(a, TTensor):
        return is_param_type(a.left) and is_param_type(a.right)
    if isinstance(a, TList):
        return is_param_type(a.elem)
    return False


def substitute_type(a: Type, mapping: Mapping) -> Type:
    """Substitute index variables through every annotation of `a`."""
    if not mapping:
        return a
    if isinstance(a, (TUnit,)):
        return a
    if isinstance(a, TWire):
        if a.ann is None:
            return a
        return TWire(a.wire, substitute_all(a.ann, mapping))
    if isinstance(a, TBang):
        return TBang(substitute_all(a.effect, mapping), substitute_type(a.inner, mapping))
    if isinstance(a, TTensor):
        return TTensor(substitute_type(a.left, mapping), substitute_type(a.right, mapping))
    if isinstance(a, TArrow):
        return TArrow(
            substitute_type(a.dom, mapping),
            substitute_type(a.cod, mapping),
            substitute_all(a.effect, mapping),
            substitute_type(a.capture, mapping),
        )
    if isinstance(a, TList):
        inner = {k: v for k, v in mapping.items() if k != a.binder}
        return TList(a.binder, substitute_all(a.length, mapping), substitute_type(a.elem, inner))
    if isinstance(a, TCirc):
        inner = {k: v for k, v in mapping.items() if k not in a.local_vars}
        return TCirc(
            substitute_all(a.size, mapping),
            a.local_vars,
            substitute_type(a.in_t, inner),
            substitute_type(a.out_t, inner),
        )
    if isinstance(a, TIndexAll):
        inner = {k: v for k, v in mapping.items() if k != a.binder}
        return TIndexAll(a.binder, substitute_all(a.effect, inner), substitute_type(a.body, inner))
    raise TypeError(f"not a type: {a!r}")


def strip_annotations(a: Type) -> Type:
    """Drop every wire annotation (global profiles do not read them)."""
    if isinstance(a, TWire):
        return TWire(a.wire, None)
    if isinstance(a, TBang):
        return TBang(a.effect, strip_annotations(a.inner))
    if isinstance(a, TTensor):
        return TTensor(strip_annotations(a.left), strip_annotations(a.right))
    if isinstance(a, TArrow):
        return TArrow(
            strip_annotations(a.dom), strip_annotations(a.cod),
            a.effect, strip_annotations(a.capture),
        )
    if isinstance(a, TList):
        return TList(a.binder, a.length, strip_annotations(a.elem))
    if isinstance(a, TCirc):
        return TCirc(a.size, (), strip_annotations(a.in_t), strip_annotations(a.out_t))
    if isinstance(a, TIndexAll):
        return TIndexAll(a.binder, a.effect, strip_annotations(a.body))
    return a


def type_index_vars(a: Type) -> set:
    """Free index variables appearing anywhere in `a`'s annotations."""
    out: set = set()

    def go(t: Type, bound: frozenset) -> None:
        if isinstance(t, TWire):
            if t.ann is not None:
                out.update(v for v in free_vars(t.ann) if v not in bound)
        elif isinstance(t, TBang):
            out.update(v for v in free_vars(t.effect) if v not in bound)
            go(t.inner, bound)
        elif isinstance(t, TTensor):
            go(t.left, bound)
            go(t.right, bound)
        elif isinstance(t, TArrow):
            out.update(v for v in free_vars(t.effect) if v not in bound)
            go(t.dom, bound)
            go(t.cod, bound)
            go(t.capture, bound)
        elif isinstance(t, TList):
            out.update(v for v in free_vars(t.length) if v not in bound)
            go(t.elem, bound | {t.binder})
        elif isinstance(t, TCirc):
            out.update(v for v in free_vars(t.size) if v not in bound)
            inner = bound | set(t.local_vars)
            go(t.in_t, inner)
            go(t.out_t, inner)
        elif isinstance(t, TIndexAll):
            inner = bound | {t.binder}
            out.update(v for v in free_vars(t.effect) if v not in inner)
            go(t.body, inner)

    go(a, frozenset())
    return out


# ---------------------------------------------------------------------------
# Environments and results
# ---------------------------------------------------------------------------


@dataclass
class TypeEnv:
    param_ctx: dict = field(default_factory=dict)    # var -> parameter Type
    linear_ctx: dict = field(default_factory=dict)   # var -> Type, used exactly once
    label_ctx: dict = field(default_factory=dict)    # label -> (WireType, ann | None)
    global_vars: tuple = ()                          # index vars in scope
    local_vars: tuple = ()                           # scheme vars (inside Circ types)

    def child(self, **overrides) -> "TypeEnv":
        base = dict(
            param_ctx=dict(self.param_ctx),
            linear_ctx=dict(self.linear_ctx),
            label_ctx=dict(self.label_ctx),
            global_vars=self.global_vars,
            local_vars=self.local_vars,
        )
        base.update(overrides)
        return TypeEnv(**base)


@dataclass(frozen=True)
class JudgmentResult:
    type: Type
    effect: IndexTerm
    used: frozenset


_SPECIALS = ("qrev", "rep")


@dataclass(frozen=True)
class _QRevType:
    """Internal marker: `qrev @n` awaiting its list argument."""

    n: IndexTerm


# ---------------------------------------------------------------------------
# The checker
# ---------------------------------------------------------------------------


class Checker:
    def __init__(self, profile: MetricProfile, strategy: CheckStrategy | None = None):
        self.profile = profile
        self.strategy = strategy or CheckStrategy()
        self._entail_cache: dict = {}

    @property
    def local_mode(self) -> bool:
        return self.profile.kind is ProfileKind.LOCAL

    # -- entailment layer ---------------------------------------------------

    def entails(self, vars: Sequence, lhs: IndexTerm, rhs: IndexTerm, rel: str) -> bool:
        # Quantify over everything loose in the obligation (fresh annotation
        # variables included), so evaluation is always total.
        names = dict.fromkeys(tuple(vars) + tuple(free_vars(lhs)) + tuple(free_vars(rhs)))
        key = (tuple(names), lhs, rhs, rel)
        hit = self._entail_cache.get(key)
        if hit is None:
            verdict = check_entailment(
                tuple(names), lhs, rhs, rel, self.profile, self.strategy
            )
            hit = verdict if isinstance(verdict, Counterexample) else True
            self._entail_cache[key] = hit
        return hit is True

    def require_entailment(self, vars, lhs, rhs, rel, what: str) -> None:
        if not self.entails(vars, lhs, rhs, rel):
            op = "<=" if rel == LE else "="
            raise TypeCheckError(
                "entailment",
                f"{what} requires {pretty_index(lhs)} {op} {pretty_index(rhs)}",
                obligation=f"{pretty_index(lhs)} {op} {pretty_index(rhs)}",
            )

    # -- subtyping ------------------------------------------------------------

    def subtype(self, vars: Sequence, a: Type, b: Type) -> Optional[str]:
        """None when `a` may be used where `b` is expected, else the failed obligation."""
        local = self.local_mode
        if isinstance(a, TUnit) and isinstance(b, TUnit):
            return None
        if isinstance(a, TWire) and isinstance(b, TWire):
            if a.wire is not b.wire:
                return f"wire kinds differ: {a.wire.value} vs {b.wire.value}"
            if local and (a.ann is not None or b.ann is not None):
                if a.ann is None or b.ann is None:
                    return "wire annotation missing on one side"
                if not self.entails(vars, a.ann, b.ann, LE):
                    return f"{pretty_index(a.ann)} <= {pretty_index(b.ann)}"
            return None
        if isinstance(a, TBang) and isinstance(b, TBang):
            if not self.entails(vars, a.effect, b.effect, LE):
                return f"{pretty_index(a.effect)} <= {pretty_index(b.effect)}"
            return self.subtype(vars, a.inner, b.inner)
        if isinstance(a, TTensor) and isinstance(b, TTensor):
            return self.subtype(vars, a.left, b.left) or self.subtype(vars, a.right, b.right)
        if isinstance(a, TArrow) and isinstance(b, TArrow):
            bad = self.subtype(vars, b.dom, a.dom)
            if bad:
                return bad
            bad = self.subtype(vars, a.cod, b.cod)
            if bad:
                return bad
            if not self.entails(vars, a.effect, b.effect, LE):
                return f"{pretty_index(a.effect)} <= {pretty_index(b.effect)}"
            ca, cb = type_size(a.capture), type_size(b.capture)
            if not self.entails(vars, ca, cb, LE):
                return f"{pretty_index(ca)} <= {pretty_index(cb)}"
            return None
        if isinstance(a, TList) and isinstance(b, TList):
            if not self.entails(vars, a.length, b.length, EQ):
                return f"{pretty_index(a.length)} = {pretty_index(b.length)}"
            belem = substitute_type(b.elem, {b.binder: Var(a.binder)}) \
                if b.binder != a.binder else b.elem
            return self.subtype(tuple(vars) + (a.binder,), a.elem, belem)
        if isinstance(a, TCirc) and isinstance(b, TCirc):
            if not self.entails(vars, a.size, b.size, LE):
                return f"{pretty_index(a.size)} <= {pretty_index(b.size)}"
            for x, y in ((a.in_t, b.in_t), (a.out_t, b.out_t)):
                bad = self.subtype(vars, x, y) or self.subtype(vars, y, x)
                if bad:
                    return bad
            return None
        if isinstance(a, TIndexAll) and isinstance(b, TIndexAll):
            bbody = b.body
            beff = b.effect
            if b.binder != a.binder:
                bbody = substitute_type(bbody, {b.binder: Var(a.binder)})
                beff = substitute_all(beff, {b.binder: Var(a.binder)})
            inner = tuple(vars) + (a.binder,)
            if not self.entails(inner, a.effect, beff, LE):
                return f"{pretty_index(a.effect)} <= {pretty_index(beff)}"
            return self.subtype(inner, a.body, bbody)
        return f"type shapes differ: {pretty(a)} vs {pretty(b)}"

    def require_subtype(self, vars, a: Type, b: Type, what: str) -> None:
        bad = self.subtype(vars, a, b)
        if bad is not None:
            raise TypeCheckError(
                "subtype", f"{what}: {pretty(a)} is not a subtype of {pretty(b)}",
                obligation=bad,
            )

    # -- helpers ----------------------------------------------------------------

    def _prepare_annotation(self, env: TypeEnv, a: Type) -> Type:
        """Adapt a source type annotation to the current mode.

        Global profiles discard wire annotations; the local profile reads an
        unannotated wire as starting at zero, matching freshly created wires.
        """
        if not self.local_mode:
            return strip_annotations(a)

        def fill(t: Type) -> Type:
            if isinstance(t, TWire) and t.ann is None:
                return TWire(t.wire, NatLit(0))
            if isinstance(t, TBang):
                return TBang(t.effect, fill(t.inner))
            if isinstance(t, TTensor):
                return TTensor(fill(t.left), fill(t.right))
            if isinstance(t, TArrow):
                return TArrow(fill(t.dom), fill(t.cod), t.effect, fill(t.capture))
            if isinstance(t, TList):
                return TList(t.binder, t.length, fill(t.elem))
            if isinstance(t, TIndexAll):
                return TIndexAll(t.binder, t.effect, fill(t.body))
            return t

        return fill(a)

    def _check_wf(self, env: TypeEnv, a: Type, what: str) -> None:
        allowed = set(env.global_vars) | set(env.local_vars)
        loose = type_index_vars(a) - allowed
        if loose:
            raise TypeCheckError(
                "wf", f"{what} mentions unbound index variables {sorted(loose)}"
            )

    def _used_size(self, env: TypeEnv, used: frozenset) -> IndexTerm:
        """R of the still-relevant resources in `used` (a parallel composition)."""
        total: IndexTerm = Empty()
        for name in sorted(used):
            if name in env.linear_ctx:
                piece = type_size(env.linear_ctx[name])
            elif name in env.label_ctx:
                piece = WireOp(env.label_ctx[name][0])
            else:
                continue
            total = piece if isinstance(total, Empty) else Par(total, piece)
        return total

    def _capture_type(self, env: TypeEnv, body: Term, used: frozenset) -> Type:
        """Assemble the bundle type of the wires `body` captures, in occurrence order."""
        order: list = []

        def walk(x) -> None:
            if isinstance(x, VVar):
                if x.name in used and x.name in env.linear_ctx and x.name not in order:
                    order.append(x.name)
                return
            if isinstance(x, VLabel):
                if x.label in used and x.label not in order:
                    order.append(x.label)
                return
            if isinstance(x, (VUnit, VNil, VBoxed)):
                return
            if isinstance(x, (VLift, VIndexAbs, VAbs)):
                walk(x.body)
                return
            if isinstance(x, VPair):
                walk(x.left), walk(x.right)
                return
            if isinstance(x, VRCons):
                walk(x.init), walk(x.last)
                return
            if isinstance(x, App):
                walk(x.fn), walk(x.arg)
                return
            if isinstance(x, Dest):
                walk(x.pair), walk(x.body)
                return
            if isinstance(x, (Force, Return)):
                walk(x.value)
                return
            if isinstance(x, ApplyCirc):
                walk(x.circ), walk(x.arg)
                return
            if isinstance(x, BoxT):
                walk(x.value)
                return
            if isinstance(x, Let):
                walk(x.bound), walk(x.body)
                return
            if isinstance(x, Fold):
                walk(x.step), walk(x.acc), walk(x.lst)
                return
            if isinstance(x, IndexApp):
                walk(x.value)
                return
            raise TypeError(f"not a term or value: {x!r}")

        walk(body)
        pieces = []
        for name in order:
            if name in env.linear_ctx:
                pieces.append(wire_content(env.linear_ctx[name]))
            else:
                wt, ann = env.label_ctx[name]
                pieces.append(TWire(wt, ann))
        if not pieces:
            return TUnit()
        t = pieces[0]
        for piece in pieces[1:]:
            t = TTensor(t, piece)
        return t

    @staticmethod
    def _bind(env: TypeEnv, name: str, a: Type) -> TypeEnv:
        child = env.child()
        if is_param_type(a):
            child.param_ctx[name] = a
        else:
            child.linear_ctx[name] = a
        return child

    def _consume(self, env: TypeEnv, inner_used: frozenset, name: str, a: Type,
                 what: str) -> frozenset:
        if not is_param_type(a) and name not in inner_used:
            raise TypeCheckError("linear", f"{what}: linear variable '{name}' is never used")
        return inner_used - {name}

    # -- values -------------------------------------------------------------------

    def check_value(self, env: TypeEnv, v: Value, expected: Optional[Type] = None):
        """Returns (type, used).  With `expected`, subtyping is applied at the end."""
        a, used = self._synth_value(env, v, expected)
        if expected is not None:
            self.require_subtype(env.global_vars, a, expected, "value")
            return expected, used
        return a, used

    def _synth_value(self, env: TypeEnv, v: Value, expected: Optional[Type]):
        if isinstance(v, VUnit):
            return TUnit(), frozenset()
        if isinstance(v, VVar):
            if v.name in env.linear_ctx:
                return env.linear_ctx[v.name], frozenset([v.name])
            if v.name in env.param_ctx:
                return env.param_ctx[v.name], frozenset()
            if v.name in _SPECIALS:
                raise TypeCheckError(
                    "special", f"'{v.name}' must be applied to an index argument"
                )
            raise TypeCheckError("unbound", f"unbound variable '{v.name}'")
        if isinstance(v, VLabel):
            if v.label not in env.label_ctx:
                raise TypeCheckError("unbound", f"unbound label '{v.label}'")
            wt, ann = env.label_ctx[v.label]
            return TWire(wt, ann), frozenset([v.label])
        if isinstance(v, VAbs):
            ann = self._prepare_annotation(env, v.ann)
            self._check_wf(env, ann, "lambda annotation")
            inner = self._bind(env, v.var, ann)
            body = self.synth_term(inner, v.body)
            used = self._consume(env, body.used, v.var, ann, "lambda")
            capture = self._capture_type(env, v.body, used)
            return TArrow(ann, body.type, body.effect, capture), used
        if isinstance(v, VLift):
            body = self.synth_term(env, v.body)
            leaked = {u for u in body.used if u in env.linear_ctx or u in env.label_ctx}
            if leaked:
                raise TypeCheckError(
                    "linear", f"lift body consumes linear resources {sorted(leaked)}"
                )
            return TBang(body.effect, body.type), frozenset()
        if isinstance(v, VIndexAbs):
            if v.binder in env.global_vars:
                raise TypeCheckError("wf", f"index variable '{v.binder}' already in scope")
            inner = env.child(global_vars=env.global_vars + (v.binder,))
            body = self.synth_term(inner, v.body)
            leaked = {u for u in body.used if u in env.linear_ctx or u in env.label_ctx}
            if leaked:
                raise TypeCheckError(
                    "linear",
                    f"index abstraction consumes linear resources {sorted(leaked)}",
                )
            return TIndexAll(v.binder, body.effect, body.type), frozenset()
        if isinstance(v, VPair):
            el = er = None
            if isinstance(expected, TTensor):
                el, er = expected.left, expected.right
            lt, lu = self.check_value(env, v.left, el)
            rt, ru = self.check_value(env, v.right, er)
            overlap = lu & ru
            if overlap:
                raise TypeCheckError("linear", f"pair reuses resources {sorted(overlap)}")
            return TTensor(lt, rt), lu | ru
        if isinstance(v, VNil):
            if isinstance(expected, TList):
                self.require_entailment(
                    env.global_vars, expected.length, NatLit(0), EQ, "empty list"
                )
                return expected, frozenset()
            if expected is None:
                return TList("_i", NatLit(0), TUnit()), frozenset()
            raise TypeCheckError("shape", f"[] cannot have type {pretty(expected)}")
        if isinstance(v, VRCons):
            return self._synth_rcons(env, v, expected)
        if isinstance(v, VBoxed):
            return self._synth_boxed(env, v), frozenset()
        raise TypeCheckError("shape", f"cannot type value {v!r}")

    def _synth_rcons(self, env: TypeEnv, v: VRCons, expected: Optional[Type]):
        if isinstance(expected, TList):
            shorter = TList(
                expected.binder, Minus(expected.length, NatLit(1)), expected.elem
            )
            it, iu = self.check_value(env, v.init, shorter)
            last_t = substitute_type(
                expected.elem, {expected.binder: Minus(expected.length, NatLit(1))}
            )
            lt, lu = self.check_value(env, v.last, last_t)
            overlap = iu & lu
            if overlap:
                raise TypeCheckError("linear", f"list reuses resources {sorted(overlap)}")
            return expected, iu | lu
        it, iu = self.check_value(env, v.init)
        if not isinstance(it, TList):
            raise TypeCheckError("shape", f"`:` needs a list on the left, got {pretty(it)}")
        lt, lu = self.check_value(env, v.last)
        overlap = iu & lu
        if overlap:
            raise TypeCheckError("linear", f"list reuses resources {sorted(overlap)}")
        if isinstance(it.elem, TUnit) and it.length == NatLit(0) and not isinstance(lt, TUnit):
            # []-rooted chain adopts the first real element as a constant family
            elem = lt
        else:
            want = substitute_type(it.elem, {it.binder: it.length})
            self.require_subtype(env.global_vars, lt, want, "list element")
            elem = it.elem
        return TList(it.binder, Plus(it.length, NatLit(1)), elem), iu | lu

    def _synth_boxed(self, env: TypeEnv, v: VBoxed) -> Type:
        sig = infer_signature(v.circuit)
        if self.local_mode:
            in_ctx = list(sig.input_ctx)
            out_ctx = list(sig.output_ctx)
            local_vars = sig.local_vars
        else:
            in_ctx = [(l, w) for l, w, _ in sig.input_ctx]
            out_ctx = [(l, w) for l, w, _ in sig.output_ctx]
            local_vars = ()
        t = bundle_type(in_ctx, v.in_bundle)
        u = bundle_type(out_ctx, v.out_bundle)
        rq: IndexTerm = Empty()
        for _, wt in v.circuit.initial:
            rq = WireOp(wt) if isinstance(rq, Empty) else Par(rq, WireOp(wt))
        rl: IndexTerm = Empty()
        for _, wt in v.circuit.live:
            rl = WireOp(wt) if isinstance(rl, Empty) else Par(rl, WireOp(wt))
        j = Max(Max(rq, sig.global_index), rl)
        return TCirc(j, local_vars, t, u)

    # -- scheme instantiation for apply -------------------------------------------

    def _match_scheme(self, env: TypeEnv, scheme: Type, actual: Type, vars: set,
                      delta: dict, eqns: list) -> None:
        if isinstance(scheme, TUnit) and isinstance(actual, TUnit):
            return
        if isinstance(scheme, TWire) and isinstance(actual, TWire):
            if scheme.wire is not actual.wire:
                raise TypeCheckError("apply", "argument wire kinds do not match the circuit")
            if not self.local_mode:
                return
            if scheme.ann is None or actual.ann is None:
                return
            if isinstance(scheme.ann, Var) and scheme.ann.name in vars:
                name = scheme.ann.name
                if name in delta:
                    eqns.append((Var(name), actual.ann))
                else:
                    delta[name] = actual.ann
            else:
                eqns.append((scheme.ann, actual.ann))
            return
        if isinstance(scheme, TTensor) and isinstance(actual, TTensor):
            self._match_scheme(env, scheme.left, actual.left, vars, delta, eqns)
            self._match_scheme(env, scheme.right, actual.right, vars, delta, eqns)
            return
        if isinstance(scheme, TList) and isinstance(actual, TList):
            self.require_entailment(
                env.global_vars, actual.length, scheme.length, EQ, "apply list length"
            )
            elem = scheme.elem
            if scheme.binder != actual.binder:
                elem = substitute_type(elem, {scheme.binder: Var(actual.binder)})
            self._match_scheme(env, elem, actual.elem, vars, delta, eqns)
            return
        raise TypeCheckError(
            "apply",
            f"argument shape {pretty(actual)} does not fit circuit input {pretty(scheme)}",
        )

    # -- terms -----------------------------------------------------------------------

    def synth_term(self, env: TypeEnv, m: Term) -> JudgmentResult:
        if isinstance(m, Return):
            a, used = self.check_value(env, m.value)
            return JudgmentResult(a, type_size(a), used)

        if isinstance(m, App):
            ft, fu = self.check_value(env, m.fn)
            if isinstance(ft, _QRevType):
                return self._apply_qrev(env, ft, m.arg, fu)
            if not isinstance(ft, TArrow):
                raise TypeCheckError("shape", f"applying a non-function of type {pretty(ft)}")
            at, au = self.check_value(env, m.arg, ft.dom)
            overlap = fu & au
            if overlap:
                raise TypeCheckError("linear", f"application reuses {sorted(overlap)}")
            return JudgmentResult(ft.cod, ft.effect, fu | au)

        if isinstance(m, IndexApp):
            if isinstance(m.value, VVar) and m.value.name in _SPECIALS \
                    and m.value.name not in env.param_ctx \
                    and m.value.name not in env.linear_ctx:
                self._check_index_wf(env, m.index)
                if m.value.name == "rep":
                    return JudgmentResult(
                        TList("_i", m.index, TUnit()), Empty(), frozenset()
                    )
                return JudgmentResult(_QRevType(m.index), Empty(), frozenset())
            vt, vu = self.check_value(env, m.value)
            if not isinstance(vt, TIndexAll):
                raise TypeCheckError(
                    "shape", f"index application to non-quantified type {pretty(vt)}"
                )
            self._check_index_wf(env, m.index)
            mapping = {vt.binder: m.index}
            return JudgmentResult(
                substitute_type(vt.body, mapping),
                substitute_all(vt.effect, mapping),
                vu,
            )

        if isinstance(m, Force):
            vt, vu = self.check_value(env, m.value)
            if not isinstance(vt, TBang):
                raise TypeCheckError("shape", f"forcing a non-suspended type {pretty(vt)}")
            return JudgmentResult(vt.inner, vt.effect, vu)

        if isinstance(m, ApplyCirc):
            return self._synth_apply(env, m)

        if isinstance(m, BoxT):
            return self._synth_box(env, m)

        if isinstance(m, Let):
            bound = self.synth_term(env, m.bound)
            inner_env = self._bind(env, m.var, bound.type)
            body = self.synth_term(inner_env, m.body)
            used2 = self._consume(env, body.used, m.var, bound.type, "let")
            overlap = bound.used & used2
            if overlap:
                raise TypeCheckError("linear", f"let reuses {sorted(overlap)}")
            bystanders = self._used_size(env, used2)
            effect = Seq(Par(bound.effect, bystanders), body.effect)
            return JudgmentResult(body.type, effect, bound.used | used2)

        if isinstance(m, Dest):
            pt, pu = self.check_value(env, m.pair)
            if not isinstance(pt, TTensor):
                raise TypeCheckError("shape", f"destructuring a non-pair type {pretty(pt)}")
            inner_env = self._bind(self._bind(env, m.left, pt.left), m.right, pt.right)
            body = self.synth_term(inner_env, m.body)
            used2 = self._consume(env, body.used, m.left, pt.left, "let-pair")
            used2 = self._consume(env, used2, m.right, pt.right, "let-pair")
            overlap = pu & used2
            if overlap:
                raise TypeCheckError("linear", f"let-pair reuses {sorted(overlap)}")
            bystanders = self._used_size(env, used2)
            effect = Seq(Par(type_size(pt), bystanders), body.effect)
            return JudgmentResult(body.type, effect, pu | used2)

        if isinstance(m, Fold):
            return self._synth_fold(env, m)

        raise TypeCheckError("shape", f"cannot type term {m!r}")

    def _check_index_wf(self, env: TypeEnv, i: IndexTerm) -> None:
        loose = [v for v in free_vars(i) if v not in env.global_vars]
        if loose:
            raise TypeCheckError("wf", f"index mentions unbound variables {loose}")

    def _apply_qrev(self, env: TypeEnv, marker: _QRevType, arg: Value, fu: frozenset):
        at, au = self.check_value(env, arg)
        if not isinstance(at, TList):
            raise TypeCheckError("shape", f"qrev needs a list, got {pretty(at)}")
        if not isinstance(wire_content(at.elem), TWire):
            raise TypeCheckError("shape", "qrev reverses lists of single wires")
        self.require_entailment(env.global_vars, at.length, marker.n, EQ, "qrev length")
        flipped = substitute_type(
            at.elem, {at.binder: Minus(Minus(marker.n, Var(at.binder)), NatLit(1))}
        )
        out = TList(at.binder, at.length, flipped)
        return JudgmentResult(out, type_size(at), fu | au)

    def _synth_apply(self, env: TypeEnv, m: ApplyCirc) -> JudgmentResult:
        ct, cu = self.check_value(env, m.circ)
        if not isinstance(ct, TCirc):
            raise TypeCheckError("shape", f"apply needs a circuit, got {pretty(ct)}")
        at, au = self.check_value(env, m.arg)
        overlap = cu & au
        if overlap:
            raise TypeCheckError("linear", f"apply reuses {sorted(overlap)}")
        delta: dict = {}
        eqns: list = []
        self._match_scheme(env, ct.in_t, at, set(ct.local_vars), delta, eqns)
        if self.local_mode:
            unbound = [x for x in ct.local_vars if x not in delta]
            if unbound:
                raise TypeCheckError(
                    "apply", f"cannot instantiate circuit scheme variables {unbound}"
                )
            for lhs, rhs in eqns:
                self.require_entailment(
                    env.global_vars, substitute_all(lhs, delta), rhs, EQ,
                    "apply annotation",
                )
        out_t = substitute_type(ct.out_t, delta) if delta else ct.out_t
        return JudgmentResult(out_t, ct.size, cu | au)

    def _synth_box(self, env: TypeEnv, m: BoxT) -> JudgmentResult:
        ann = self._prepare_annotation(env, m.ann)
        self._check_wf(env, ann, "box annotation")
        vt, vu = self.check_value(env, m.value)
        if not isinstance(vt, TBang) or not isinstance(vt.inner, TArrow):
            raise TypeCheckError(
                "shape", f"box needs a suspended function, got {pretty(vt)}"
            )
        arrow = vt.inner
        self.require_subtype(env.global_vars, ann, arrow.dom, "box annotation")
        self.require_subtype(env.global_vars, arrow.dom, ann, "box annotation")
        effect = Seq(Par(vt.effect, type_size(ann)), arrow.effect)
        circ = TCirc(arrow.effect, (), wire_content(arrow.dom), wire_content(arrow.cod))
        return JudgmentResult(circ, effect, vu)

    def _synth_fold(self, env: TypeEnv, m: Fold) -> JudgmentResult:
        st, su = self.check_value(env, m.step)
        if not isinstance(st, TBang) or not isinstance(st.inner, TIndexAll) \
                or not isinstance(st.inner.body, TArrow) \
                or not isinstance(st.inner.body.dom, TTensor):
            raise TypeCheckError(
                "fold",
                "the step must be a suspended index family of functions on pairs, "
                f"got {pretty(st)}",
            )
        i = st.inner.binder
        step_cost = Seq(st.effect, st.inner.effect)
        arrow = st.inner.body
        b_fam = arrow.dom.left
        elem_dom = arrow.dom.right
        b_out = arrow.cod
        j_eff = arrow.effect

        lt, lu = self.check_value(env, m.lst)
        if not isinstance(lt, TList):
            raise TypeCheckError("fold", f"folding over a non-list type {pretty(lt)}")
        e_len = lt.length
        list_binder = lt.binder
        a_fam = lt.elem
        if list_binder == i:
            fresh = list_binder + "'"
            a_fam = substitute_type(a_fam, {list_binder: Var(fresh)})
            list_binder = fresh

        inner_vars = env.global_vars + (i,)
        b0 = substitute_type(b_fam, {i: NatLit(0)})
        at, au = self.check_value(env, m.acc, b0)

        # output side condition: the step's result advances the accumulator family
        b_next = substitute_type(b_fam, {i: Plus(Var(i), NatLit(1))})
        self.require_subtype(inner_vars, b_out, b_next, "fold step output")
        # element side condition: step consumes the elements back-to-front
        elem_at = substitute_type(
            a_fam, {list_binder: Minus(e_len, Plus(Var(i), NatLit(1)))}
        )
        self.require_subtype(inner_vars, elem_at, elem_dom, "fold step element")

        overlap = (su & au) | (su & lu) | (au & lu)
        if overlap:
            raise TypeCheckError("linear", f"fold reuses {sorted(overlap)}")

        r_b = type_size(b_fam)
        r_a = type_size(a_fam)
        r_elem_at = type_size(elem_at)
        per_step = Seq(Par(Par(step_cost, r_b), r_elem_at), j_eff)
        remaining = BoundedPar(
            list_binder, Minus(e_len, Plus(Var(i), NatLit(1))), r_a
        )
        effect = Max(
            type_size(b0),
            BoundedSeq(i, e_len, Par(per_step, remaining)),
        )
        out_t = substitute_type(b_fam, {i: e_len})
        return JudgmentResult(out_t, effect, su | au | lu)


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BindingReport:
    name: str
    type: Type
    effect: IndexTerm
    ascribed: bool


def check_program(
    prog: Program,
    profile: MetricProfile,
    strategy: CheckStrategy | None = None,
    stdlib: Mapping | None = None,
    checker: Checker | None = None,
) -> dict:
    """Check every binding (and main, if present) under `profile`.

    Returns {name: BindingReport}, with the main expression under "".
    Earlier bindings are visible to later ones — duplicably when their type
    is a parameter type, linearly otherwise.  Pass `checker` to keep access
    to the entailment obligations it accumulated (e.g. for SMT export).
    """
    checker = checker or Checker(profile, strategy)
    env = TypeEnv()
    if stdlib:
        env.param_ctx.update(stdlib)
    reports: dict = {}
    for b in prog.bindings:
        res = checker.synth_term(env, b.body)
        ty = res.type
        ascribed = False
        if b.ascription is not None:
            want = checker._prepare_annotation(env, b.ascription)
            checker._check_wf(env, want, f"ascription of {b.name}")
            checker.require_subtype((), ty, want, f"ascription of {b.name}")
            ty = want
            ascribed = True
        reports[b.name] = BindingReport(b.name, ty, res.effect, ascribed)
        env = checker._bind(env, b.name, ty)
    if prog.main is not None:
        res = checker.synth_term(env, prog.main)
        reports[""] = BindingReport("", res.type, res.effect, False)
    return reports
