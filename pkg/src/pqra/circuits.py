"""Gate-by-gate circuits over typed, labeled wires, plus the ground-truth metric oracles.

A circuit is an identity layer over some input wires followed by a sequence of
gate applications.  Labels are globally unique across a circuit's history: a
gate consumes live labels and produces fresh ones.  The oracles at the bottom
of this module measure finished circuits directly by replaying that history;
they are the reference values every inferred bound is validated against.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence, Union

from .indices import IndexTerm, pretty_index


class WireType(Enum):
    QUBIT = "Qubit"
    BIT = "Bit"


class LocalRule(Enum):
    """How a gate transforms per-wire annotations (e.g. depth)."""

    MAX_PLUS_ONE = "max_plus_one"
    ZERO_OUTPUTS = "zero_outputs"


@dataclass(frozen=True)
class GateDecl:
    name: str
    inputs: tuple
    outputs: tuple
    counts_as_gate: bool
    is_t: bool = False
    local_rule: LocalRule = LocalRule.MAX_PLUS_ONE
    parameterized: bool = False


def _decl(name, ins, outs, counts, **kw) -> GateDecl:
    return GateDecl(name, tuple(ins), tuple(outs), counts, **kw)


_Q = WireType.QUBIT
_B = WireType.BIT

GATES: dict = {
    g.name: g
    for g in [
        _decl("H", [_Q], [_Q], True),
        _decl("X", [_Q], [_Q], True),
        _decl("Z", [_Q], [_Q], True),
        _decl("T", [_Q], [_Q], True, is_t=True),
        _decl("CNOT", [_Q, _Q], [_Q, _Q], True),
        _decl("CR", [_Q, _Q], [_Q, _Q], True, parameterized=True),
        _decl("CX_classical", [_B, _Q], [_B, _Q], True),
        _decl("CZ_classical", [_B, _Q], [_B, _Q], True),
        _decl("Meas", [_Q], [_B], True),
        _decl("Init0", [], [_Q], False, local_rule=LocalRule.ZERO_OUTPUTS),
        _decl("Init1", [], [_Q], False, local_rule=LocalRule.ZERO_OUTPUTS),
        _decl("Discard", [_Q], [], False, local_rule=LocalRule.ZERO_OUTPUTS),
        _decl("CDiscard", [_B], [], False, local_rule=LocalRule.ZERO_OUTPUTS),
    ]
}


class CircuitError(Exception):
    pass


# ---------------------------------------------------------------------------
# Wire bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitB:
    pass


@dataclass(frozen=True)
class SingleB:
    label: str


@dataclass(frozen=True)
class PairB:
    l: Bundle
    r: Bundle


@dataclass(frozen=True)
class NilB:
    pass


@dataclass(frozen=True)
class ConsB:
    """A list bundle grown rightward: init is the list, last the new element."""

    init: Bundle
    last: Bundle


Bundle = Union[UnitB, SingleB, PairB, NilB, ConsB]


def bundle_labels(b: Bundle) -> tuple:
    """All labels in a bundle, in syntax-tree order."""
    if isinstance(b, SingleB):
        return (b.label,)
    if isinstance(b, PairB):
        return bundle_labels(b.l) + bundle_labels(b.r)
    if isinstance(b, ConsB):
        return bundle_labels(b.init) + bundle_labels(b.last)
    return ()


def list_bundle(items: Sequence[Bundle]) -> Bundle:
    out: Bundle = NilB()
    for item in items:
        out = ConsB(out, item)
    return out


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------

#: Ordered label context: tuple of (label, WireType) pairs.
LabelContext = tuple


@dataclass(frozen=True)
class GateApp:
    gate: str
    ins: tuple
    outs: tuple
    param: IndexTerm | None = None


@dataclass(frozen=True)
class Circuit:
    initial: LabelContext
    gates: tuple
    live: LabelContext
    counter: int

    def live_types(self) -> dict:
        return dict(self.live)

    def all_labels(self) -> set:
        out = {lab for lab, _ in self.initial}
        for g in self.gates:
            out.update(g.outs)
        return out


def _fresh_counter_for(labels: Iterable[str]) -> int:
    top = 0
    for lab in labels:
        if lab.startswith("w") and lab[1:].isdigit():
            top = max(top, int(lab[1:]) + 1)
    return top


def identity(q: Sequence) -> Circuit:
    """The no-gate circuit over input context `q` (pairs of label, wire type)."""
    entries = tuple((lab, wt) for lab, wt in q)
    labels = [lab for lab, _ in entries]
    if len(set(labels)) != len(labels):
        raise CircuitError(f"duplicate labels in identity context: {labels}")
    return Circuit(entries, (), entries, _fresh_counter_for(labels))


def append(
    c: Circuit,
    gate: str,
    in_bundle: Bundle | Sequence[str],
    param: IndexTerm | None = None,
) -> Circuit:
    """Extend `c` with one application of `gate`, consuming the bundled labels.

    Output labels are drawn fresh from the circuit's own counter.  Raises
    CircuitError for non-live labels, wire-type or arity mismatches.
    """
    decl = GATES.get(gate)
    if decl is None:
        raise CircuitError(f"unknown gate '{gate}'")
    ins = tuple(in_bundle) if not isinstance(in_bundle, (UnitB, SingleB, PairB, NilB, ConsB)) \
        else bundle_labels(in_bundle)
    if len(ins) != len(decl.inputs):
        raise CircuitError(f"{gate} expects {len(decl.inputs)} inputs, got {len(ins)}")
    if len(set(ins)) != len(ins):
        raise CircuitError(f"{gate} applied to duplicated label(s): {ins}")
    live = c.live_types()
    for lab, want in zip(ins, decl.inputs):
        have = live.get(lab)
        if have is None:
            raise CircuitError(f"label '{lab}' is not a live output")
        if have is not want:
            raise CircuitError(f"label '{lab}' is {have.value}, {gate} wants {want.value}")
    if decl.parameterized and param is None:
        raise CircuitError(f"{gate} requires a parameter")
    if not decl.parameterized and param is not None:
        raise CircuitError(f"{gate} takes no parameter")
    counter = c.counter
    outs = []
    for _ in decl.outputs:
        outs.append(f"w{counter}")
        counter += 1
    new_live = tuple((lab, wt) for lab, wt in c.live if lab not in ins)
    new_live += tuple(zip(outs, decl.outputs))
    app = GateApp(gate, ins, tuple(outs), param)
    return Circuit(c.initial, c.gates + (app,), new_live, counter)


def concat(c: Circuit, d: Circuit) -> Circuit:
    """`c` followed by all of `d`'s gates; `d`'s inputs must be live outputs of `c`."""
    live = c.live_types()
    for lab, wt in d.initial:
        if live.get(lab) is not wt:
            raise CircuitError(f"interface mismatch at '{lab}'")
    d_fresh = {lab for g in d.gates for lab in g.outs}
    collisions = d_fresh & c.all_labels()
    if collisions:
        raise CircuitError(f"label collision in concat: {sorted(collisions)}")
    d_inputs = {lab for lab, _ in d.initial}
    new_live = tuple((lab, wt) for lab, wt in c.live if lab not in d_inputs) + d.live
    return Circuit(c.initial, c.gates + d.gates, new_live, max(c.counter, d.counter))


def relabel(c: Circuit, mapping: Mapping) -> Circuit:
    """Rename every label through `mapping` (must be injective and total)."""
    labels = c.all_labels()
    missing = labels - set(mapping)
    if missing:
        raise CircuitError(f"relabeling not total, missing {sorted(missing)}")
    images = [mapping[lab] for lab in labels]
    if len(set(images)) != len(images):
        raise CircuitError("relabeling not injective")

    def ctx(entries: LabelContext) -> LabelContext:
        return tuple((mapping[lab], wt) for lab, wt in entries)

    gates = tuple(
        GateApp(g.gate, tuple(mapping[x] for x in g.ins), tuple(mapping[x] for x in g.outs),
                g.param)
        for g in c.gates
    )
    new = Circuit(ctx(c.initial), gates, ctx(c.live), 0)
    return Circuit(new.initial, new.gates, new.live, _fresh_counter_for(new.all_labels()))


def relabel_bundle(b: Bundle, mapping: Mapping) -> Bundle:
    if isinstance(b, SingleB):
        return SingleB(mapping[b.label])
    if isinstance(b, PairB):
        return PairB(relabel_bundle(b.l, mapping), relabel_bundle(b.r, mapping))
    if isinstance(b, ConsB):
        return ConsB(relabel_bundle(b.init, mapping), relabel_bundle(b.last, mapping))
    return b


# ---------------------------------------------------------------------------
# Ground-truth oracles
# ---------------------------------------------------------------------------


def oracle_gatecount(c: Circuit) -> int:
    """Number of appended operations that count as gates (unitaries, measurements)."""
    return sum(1 for g in c.gates if GATES[g.gate].counts_as_gate)


def oracle_gatecount_all(c: Circuit) -> int:
    """Every appended operation, including initializations and discards."""
    return len(c.gates)


def oracle_tcount(c: Circuit) -> int:
    return sum(1 for g in c.gates if GATES[g.gate].is_t)


def oracle_width(c: Circuit) -> int:
    """Maximum number of wires ever simultaneously in use.

    Replays the defining recursion: appending a gate grows the width by the
    number of new wires it needs beyond what discarded wires have freed.
    """
    width = len(c.initial)
    alive = len(c.initial)
    for g in c.gates:
        produced, consumed = len(g.outs), len(g.ins)
        discarded = width - alive
        width += max(0, produced - consumed - discarded)
        alive += produced - consumed
    return width


def _kinded_width(c: Circuit, kind: WireType) -> int:
    width = sum(1 for _, wt in c.initial if wt is kind)
    alive = width
    for g in c.gates:
        decl = GATES[g.gate]
        produced = sum(1 for wt in decl.outputs if wt is kind)
        consumed = sum(1 for wt in decl.inputs if wt is kind)
        discarded = width - alive
        width += max(0, produced - consumed - discarded)
        alive += produced - consumed
    return width


def oracle_qubit_width(c: Circuit) -> int:
    return _kinded_width(c, WireType.QUBIT)


def oracle_bit_width(c: Circuit) -> int:
    return _kinded_width(c, WireType.BIT)


def oracle_depth(c: Circuit, in_depths: Mapping) -> dict:
    """Per-wire depth of the live outputs, given input depths.

    Counting gates assign max(input depths) + 1 to their outputs; non-counting
    operations propagate the max unchanged, so initializations start at 0 and
    discards never deepen anything.
    """
    depth = {}
    for lab, _ in c.initial:
        if lab not in in_depths:
            raise CircuitError(f"missing input depth for '{lab}'")
        depth[lab] = in_depths[lab]
    for g in c.gates:
        decl = GATES[g.gate]
        base = max((depth[lab] for lab in g.ins), default=0)
        out_d = base + 1 if decl.counts_as_gate else base
        for lab in g.ins:
            del depth[lab]
        for lab in g.outs:
            depth[lab] = out_d
    return depth


# ---------------------------------------------------------------------------
# Serialization (golden-test format) and random generation
# ---------------------------------------------------------------------------


def serialize(c: Circuit) -> str:
    lines = ["inputs " + " ".join(f"{lab}:{wt.value}" for lab, wt in c.initial)]
    for g in c.gates:
        name = g.gate if g.param is None else f"{g.gate}[{pretty_index(g.param)}]"
        ins = ",".join(g.ins)
        outs = ",".join(g.outs)
        lines.append(f"{name}({ins};{' ' + outs if outs else ''})")
    lines.append("outputs " + " ".join(f"{lab}:{wt.value}" for lab, wt in c.live))
    return "\n".join(lines) + "\n"


def random_circuit(rng: random.Random, max_gates: int = 10, max_inputs: int = 4) -> Circuit:
    """A small random well-formed circuit; used by soundness sweeps and tests."""
    from .indices import NatLit

    n_inputs = rng.randint(0, max_inputs)
    ctx = [(f"in{i}", rng.choice([_Q, _B])) for i in range(n_inputs)]
    c = identity(ctx)
    names = list(GATES)
    for _ in range(rng.randint(0, max_gates)):
        rng.shuffle(names)
        for gate in names:
            decl = GATES[gate]
            pool = {_Q: [], _B: []}
            for lab, wt in c.live:
                pool[wt].append(lab)
            need = {_Q: decl.inputs.count(_Q), _B: decl.inputs.count(_B)}
            if len(pool[_Q]) < need[_Q] or len(pool[_B]) < need[_B]:
                continue
            picks = {
                kind: rng.sample(pool[kind], need[kind]) for kind in (_Q, _B)
            }
            ins = []
            for wt in decl.inputs:
                ins.append(picks[wt].pop())
            param = NatLit(rng.randint(1, 4)) if decl.parameterized else None
            c = append(c, gate, ins, param)
            break
    return c


def random_circuits(count: int, seed: int, max_gates: int = 10) -> list:
    rng = random.Random(seed)
    return [random_circuit(rng, max_gates) for _ in range(count)]
