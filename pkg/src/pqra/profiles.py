"""Metric profiles: paired circuit-level and type-level metric interpretations.

A profile gives meaning to the abstract operators of the index language.  The
circuit-level half (CMI) interprets identity layers, gate appends, and
per-wire gate output annotations; the type-level half (RMI) interprets empty,
single-wire, sequential, and parallel sizes.  Each built-in profile also
carries the matching ground-truth oracle so analyses can be validated
differentially, and the validators at the bottom check the algebraic laws the
soundness story rests on — exhaustively, up to a bound.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from . import circuits as cir
from .indices import IndexTerm, Max, Minus, NatLit, Plus, evaluate
from .circuits import GATES, LocalRule, WireType


@dataclass(frozen=True)
class CMI:
    """Circuit-level metric: identity size, append size, per-output gate annotation."""

    id_fn: Callable
    append_fn: Callable   # (gate name, before, beside, into, outof) -> natural
    gate_fn: Callable     # (gate name, output position, input values) -> natural
    append_sym: Callable  # gate name -> template over 4 index terms, or None
    gate_sym: Callable    # (gate name, position) -> template over arg list, or None


@dataclass(frozen=True)
class RMI:
    """Type-level metric: how wire sizes compose in sequence and in parallel."""

    empty_val: int
    wire_fn: Callable     # WireType -> natural
    seq_fn: Callable
    par_fn: Callable
    seq_kind: Optional[str] = None  # "plus" | "max" | None (drives simplification/export)
    par_kind: Optional[str] = None


class ProfileKind(Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class MetricProfile:
    name: str
    rmi: RMI
    cmi: CMI
    oracle: Callable
    kind: ProfileKind


# ---------------------------------------------------------------------------
# Built-in profiles
# ---------------------------------------------------------------------------


def _max_chain(args: Sequence[IndexTerm]) -> IndexTerm:
    if not args:
        return NatLit(0)
    out = args[0]
    for a in args[1:]:
        out = Max(out, a)
    return out


def _width_like_cmi(count_wire: Callable) -> CMI:
    """Width-style CMI over the wires selected by `count_wire` (1 or 0 per kind)."""

    def id_fn(wires) -> int:
        return sum(count_wire(w) for w in wires)

    def append_fn(gate, n, l, h, k) -> int:
        return n + max(0, (k + l) - n)

    def append_sym(gate):
        return lambda n, l, h, k: Plus(n, Minus(Plus(k, l), n))

    return CMI(
        id_fn=id_fn,
        append_fn=append_fn,
        gate_fn=lambda gate, pos, args: 0,
        append_sym=append_sym,
        gate_sym=lambda gate, pos: (lambda args: NatLit(0)),
    )


def _counting_cmi(weight: Callable) -> CMI:
    """Gate-count-style CMI: appending a gate adds its weight (0 or 1)."""

    def append_fn(gate, n, l, h, k) -> int:
        return n + weight(GATES[gate])

    def append_sym(gate):
        w = weight(GATES[gate])
        return (lambda n, l, h, k: Plus(n, NatLit(w))) if w else (lambda n, l, h, k: n)

    return CMI(
        id_fn=lambda wires: 0,
        append_fn=append_fn,
        gate_fn=lambda gate, pos, args: 0,
        append_sym=append_sym,
        gate_sym=lambda gate, pos: (lambda args: NatLit(0)),
    )


def _depth_cmi() -> CMI:
    def gate_fn(gate, pos, args) -> int:
        decl = GATES[gate]
        if decl.local_rule is LocalRule.ZERO_OUTPUTS:
            return 0
        base = max(args, default=0)
        return base + 1 if decl.counts_as_gate else base

    def gate_sym(gate, pos):
        decl = GATES[gate]
        if decl.local_rule is LocalRule.ZERO_OUTPUTS:
            return lambda args: NatLit(0)
        if decl.counts_as_gate:
            return lambda args: Plus(_max_chain(args), NatLit(1))
        return lambda args: _max_chain(args)

    return CMI(
        id_fn=lambda wires: 0,
        append_fn=lambda gate, n, l, h, k: 0,
        gate_fn=gate_fn,
        append_sym=lambda gate: (lambda n, l, h, k: NatLit(0)),
        gate_sym=gate_sym,
    )


_WIDTH_RMI = RMI(0, lambda w: 1, max, lambda a, b: a + b, "max", "plus")
_COUNT_RMI = RMI(0, lambda w: 0, lambda a, b: a + b, lambda a, b: a + b, "plus", "plus")
_TRIVIAL_RMI = RMI(0, lambda w: 0, max, max, "max", "max")


def _kind_weight(kind: WireType) -> Callable:
    return lambda w: 1 if w is kind else 0


def _make_builtin_profiles() -> list:
    width = MetricProfile(
        "width", _WIDTH_RMI, _width_like_cmi(lambda w: 1), cir.oracle_width,
        ProfileKind.GLOBAL,
    )
    gatecount = MetricProfile(
        "gatecount", _COUNT_RMI,
        _counting_cmi(lambda d: 1 if d.counts_as_gate else 0),
        cir.oracle_gatecount, ProfileKind.GLOBAL,
    )
    gatecount_all = MetricProfile(
        "gatecount_all", _COUNT_RMI, _counting_cmi(lambda d: 1),
        cir.oracle_gatecount_all, ProfileKind.GLOBAL,
    )
    tcount = MetricProfile(
        "tcount", _COUNT_RMI, _counting_cmi(lambda d: 1 if d.is_t else 0),
        cir.oracle_tcount, ProfileKind.GLOBAL,
    )
    qubitcount = MetricProfile(
        "qubitcount",
        RMI(0, _kind_weight(WireType.QUBIT), max, lambda a, b: a + b, "max", "plus"),
        _width_like_cmi(_kind_weight(WireType.QUBIT)),
        cir.oracle_qubit_width, ProfileKind.GLOBAL,
    )
    bitcount = MetricProfile(
        "bitcount",
        RMI(0, _kind_weight(WireType.BIT), max, lambda a, b: a + b, "max", "plus"),
        _width_like_cmi(_kind_weight(WireType.BIT)),
        cir.oracle_bit_width, ProfileKind.GLOBAL,
    )
    depth = MetricProfile(
        "depth", _TRIVIAL_RMI, _depth_cmi(), cir.oracle_depth, ProfileKind.LOCAL,
    )
    return [width, gatecount, gatecount_all, tcount, qubitcount, bitcount, depth]


_BUILTINS = _make_builtin_profiles()


def builtin_profiles() -> list:
    """The registered profiles, global ones first, in a fixed order."""
    return list(_BUILTINS)


_ALIASES = {"qubits": "qubitcount", "bits": "bitcount"}


def get_profile(name: str) -> MetricProfile:
    name = _ALIASES.get(name, name)
    for p in builtin_profiles():
        if p.name == name:
            return p
    raise KeyError(f"no profile named '{name}'")


# ---------------------------------------------------------------------------
# Validators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    constraint: str | None = None
    witness: tuple | None = None
    detail: str = ""

    def render(self) -> str:
        if self.ok:
            return "pass"
        return f"FAIL {self.constraint} witness={self.witness} -- {self.detail}"


def validate_well_behaved(r: RMI, bound: int) -> ValidationReport:
    """Exhaustively check the composition laws of an RMI up to `bound`.

    (1) parallel composition: commutative, associative, monotone, identity empty;
    (2) sequential composition: associative, monotone, identity empty;
    (3) a single wire distributes over sequencing;
    (4) either every wire is empty-sized, or sequencing is maximum.
    """
    rng = range(bound + 1)
    e = r.empty_val
    for n in rng:
        if r.par_fn(e, n) != n or r.par_fn(n, e) != n:
            return ValidationReport(False, "par-identity", (n,), f"par with empty != {n}")
        if r.seq_fn(e, n) != n or r.seq_fn(n, e) != n:
            return ValidationReport(False, "seq-identity", (n,), f"seq with empty != {n}")
    for n, m in itertools.product(rng, rng):
        if r.par_fn(n, m) != r.par_fn(m, n):
            return ValidationReport(False, "par-commutative", (n, m), "")
        if n < bound and r.par_fn(n + 1, m) < r.par_fn(n, m):
            return ValidationReport(False, "par-monotone", (n, m), "")
        if n < bound and (r.seq_fn(n + 1, m) < r.seq_fn(n, m)
                          or r.seq_fn(m, n + 1) < r.seq_fn(m, n)):
            return ValidationReport(False, "seq-monotone", (n, m), "")
    for n, m, o in itertools.product(rng, rng, rng):
        if r.par_fn(r.par_fn(n, m), o) != r.par_fn(n, r.par_fn(m, o)):
            return ValidationReport(False, "par-associative", (n, m, o), "")
        if r.seq_fn(r.seq_fn(n, m), o) != r.seq_fn(n, r.seq_fn(m, o)):
            return ValidationReport(False, "seq-associative", (n, m, o), "")
    wires = [r.wire_fn(w) for w in WireType]
    for wv in wires:
        for n, m in itertools.product(rng, rng):
            if r.par_fn(wv, r.seq_fn(n, m)) != r.seq_fn(r.par_fn(wv, n), r.par_fn(wv, m)):
                return ValidationReport(False, "wire-distributes", (wv, n, m), "")
    if any(wv != e for wv in wires):
        for n, m in itertools.product(rng, rng):
            if r.seq_fn(n, m) != max(n, m) or r.seq_fn(m, n) != max(n, m):
                return ValidationReport(
                    False, "seq-is-max", (n, m),
                    "wires are not all empty-sized, so sequencing must be maximum",
                )
    return ValidationReport(True)


def validate_local_coherence(r: RMI, c: CMI, bound: int) -> ValidationReport:
    """Check that circuit-level sizes stay below type-level compositions.

    (1) identity layers are bounded by parallel wire sizes (multisets up to 4);
    (2) appending commutes laxly with putting a wire in parallel;
    (3) appending commutes laxly with sequencing a prefix.
    """
    kinds = list(WireType)
    if c.id_fn(()) > r.empty_val:
        return ValidationReport(False, "id-empty", ((),), "identity of nothing exceeds empty")
    for size in range(0, 5):
        for q in itertools.combinations_with_replacement(kinds, size):
            for w in kinds:
                lhs = c.id_fn(q + (w,))
                rhs = r.par_fn(c.id_fn(q), r.wire_fn(w))
                if lhs > rhs:
                    return ValidationReport(
                        False, "id-extension", (tuple(x.value for x in q), w.value),
                        f"{lhs} > {rhs}",
                    )
    rng = range(bound + 1)
    for gate, decl in GATES.items():
        i = c.id_fn(decl.inputs)
        o = c.id_fn(decl.outputs)
        for n, m in itertools.product(rng, rng):
            base = c.append_fn(gate, n, m, i, o)
            for w in kinds:
                wv = r.wire_fn(w)
                lhs = c.append_fn(gate, r.par_fn(wv, n), r.par_fn(wv, m), i, o)
                if lhs > r.par_fn(wv, base):
                    return ValidationReport(
                        False, "append-par", (gate, w.value, n, m),
                        f"{lhs} > par({wv},{base})",
                    )
            for p in rng:
                lhs = c.append_fn(gate, r.seq_fn(p, n), m, i, o)
                if lhs > r.seq_fn(p, base):
                    return ValidationReport(
                        False, "append-seq", (gate, p, n, m),
                        f"{lhs} > seq({p},{base})",
                    )
    return ValidationReport(True)


def validate_cmi_sound(p: MetricProfile, corpus: Sequence, samples: int = 16) -> ValidationReport:
    """Differentially check derived signature bounds against the oracle on a corpus.

    Global profiles: the signature's global index must evaluate to at least the
    oracle value (the report notes whether it was exactly equal throughout).
    The depth profile: every output annotation, evaluated under sampled input
    depths, must match the oracle's per-wire answer.
    """
    from .signatures import infer_signature

    all_equal = True
    for idx, circuit in enumerate(corpus):
        sig = infer_signature(circuit)
        if p.kind is ProfileKind.GLOBAL:
            bound_val = evaluate(sig.global_index, {}, p)
            actual = p.oracle(circuit)
            if bound_val < actual:
                return ValidationReport(
                    False, "global-bound", (idx,),
                    f"bound {bound_val} < oracle {actual}",
                )
            all_equal = all_equal and bound_val == actual
        else:
            rng = random.Random(0xD0C0 + idx)
            in_labels = [lab for lab, _ in circuit.initial]
            for s in range(samples):
                depths = {lab: rng.randrange(8) for lab in in_labels}
                want = p.oracle(circuit, depths)
                valuation = {
                    sig.input_vars[lab]: depths[lab] for lab in in_labels
                }
                for lab, _, ann in sig.output_ctx:
                    got = evaluate(ann, valuation, p)
                    if got < want[lab]:
                        return ValidationReport(
                            False, "local-annotation", (idx, lab, s),
                            f"annotation {got} < oracle {want[lab]}",
                        )
                    all_equal = all_equal and got == want[lab]
    detail = "bounds exactly equal oracles" if all_equal else "bounds overapproximate"
    return ValidationReport(True, detail=detail)
