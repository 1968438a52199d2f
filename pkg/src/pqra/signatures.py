"""Resource-aware circuit signatures.

A signature summarizes a concrete circuit symbolically: each input wire gets
a fresh variable, each output wire an index term over those variables (its
local metric), and the whole circuit a single variable-free global index
built from abstract identity/append operators.  Nothing here depends on a
metric profile — one replay serves every interpretation, and `evaluate`
specializes the result later.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .circuits import (
    Bundle,
    Circuit,
    CircuitError,
    ConsB,
    GATES,
    NilB,
    PairB,
    SingleB,
    UnitB,
    WireType,
)
from .indices import AppendOp, GateOp, IdOp, IndexTerm, Var, pretty_index
from .surface import TList, TTensor, TUnit, TWire, Type


@dataclass(frozen=True)
class Signature:
    local_vars: tuple                 # one fresh variable name per input wire
    input_ctx: tuple                  # (label, WireType, Var)
    output_ctx: tuple                 # (label, WireType, IndexTerm)
    global_index: IndexTerm           # variable-free, over IdOp/AppendOp

    @property
    def input_vars(self) -> Mapping[str, str]:
        return {lab: v.name for lab, _, v in self.input_ctx}

    def render(self) -> str:
        q = ", ".join(f"{l}:{w.value}{{{pretty_index(a)}}}" for l, w, a in self.input_ctx)
        l = ", ".join(f"{l}:{w.value}{{{pretty_index(a)}}}" for l, w, a in self.output_ctx)
        vs = ", ".join(self.local_vars)
        return f"{{{q}}} <{vs}> -> {{{l}}} ; {pretty_index(self.global_index)}"


def infer_signature(c: Circuit) -> Signature:
    """Replay `c` once, building its symbolic global index and output annotations.

    Inputs are annotated with variables named by position, so relabeling a
    circuit only renames labels, never the variables.
    """
    local_vars = tuple(f"v{i}" for i in range(len(c.initial)))
    ann: dict = {}
    input_ctx = []
    for (lab, wt), v in zip(c.initial, local_vars):
        ann[lab] = Var(v)
        input_ctx.append((lab, wt, Var(v)))

    live = dict(c.initial)
    global_index: IndexTerm = IdOp.of(wt for wt in live.values())
    for g in c.gates:
        decl = GATES[g.gate]
        bystanders = [wt for lab, wt in live.items() if lab not in g.ins]
        global_index = AppendOp(
            g.gate,
            global_index,
            IdOp.of(bystanders),
            IdOp.of(decl.inputs),
            IdOp.of(decl.outputs),
        )
        args = tuple(ann[lab] for lab in g.ins)
        for lab in g.ins:
            del live[lab]
        for pos, lab in enumerate(g.outs):
            ann[lab] = GateOp(g.gate, pos + 1, args)
            live[lab] = decl.outputs[pos]

    output_ctx = tuple((lab, wt, ann[lab]) for lab, wt in c.live)
    return Signature(local_vars, tuple(input_ctx), output_ctx, global_index)


def bundle_type(q: Sequence, b: Bundle) -> Type:
    """The bundle type mirroring `b`, with wire types (and any annotations) from `q`.

    `q` holds (label, WireType) pairs or (label, WireType, annotation)
    triples; its domain must be exactly the labels of `b`.  List bundles are
    reconstructible only when every element comes out the same type.
    """
    ctx = {}
    for entry in q:
        lab, wt = entry[0], entry[1]
        ctx[lab] = (wt, entry[2] if len(entry) > 2 else None)
    seen: set = set()

    def go(b: Bundle) -> Type:
        if isinstance(b, UnitB):
            return TUnit()
        if isinstance(b, SingleB):
            if b.label not in ctx:
                raise CircuitError(f"label '{b.label}' not in context")
            seen.add(b.label)
            wt, a = ctx[b.label]
            return TWire(wt, a)
        if isinstance(b, PairB):
            return TTensor(go(b.l), go(b.r))
        if isinstance(b, (NilB, ConsB)):
            elems = []
            cur = b
            while isinstance(cur, ConsB):
                elems.append(go(cur.last))
                cur = cur.init
            if not isinstance(cur, NilB):
                raise CircuitError("improper list bundle")
            elems.reverse()
            if elems and any(e != elems[0] for e in elems):
                raise CircuitError(
                    "cannot reconstruct a parametric list type from unequal elements"
                )
            from .indices import NatLit

            elem = elems[0] if elems else TWire(WireType.QUBIT)
            return TList("j", NatLit(len(elems)), elem)
        raise CircuitError(f"not a bundle: {b!r}")

    t = go(b)
    if seen != set(ctx):
        missing = sorted(set(ctx) - seen)
        raise CircuitError(f"context labels not covered by bundle: {missing}")
    return t
