"""Built-in gate wrappers: the names every program can use without binding.

Each wrapper is an ordinary value of the surface language whose body applies
a one-gate boxed circuit, so programs only ever spend resources through
`apply`.  Wrappers take the depth annotation of each argument wire as an
explicit index argument; global metrics strip wire annotations, so a single
set of definitions serves every metric and the extra index arguments are
inert there.  Shapes:

    qinit0, qinit1          suspended, no arguments; the new wire starts at 0
    hadamard, xgate, zgate,
    tgate, meas, qdiscard,
    cdiscard                @d. lift \\w :: W{d}. apply(gate, w)
    cnot, cxc, czc          @d. @e. lift \\x :: W1{d}. \\y :: W2{e}. apply(gate, (x, y))
    cR                      @k. @d. lift \\x :: Qubit{d}. \\y :: Qubit{d}. apply(CR[k], (x, y))

`rep` and `qrev` are not here; the checker and evaluator treat them as
primitives.
"""
from __future__ import annotations

from .checker import Checker, TypeEnv
from .circuits import GATES, PairB, SingleB, UnitB, WireType, append, identity
from .indices import Var
from .profiles import MetricProfile
from .surface import (
    ApplyCirc,
    Return,
    TWire,
    VAbs,
    VBoxed,
    VIndexAbs,
    VLift,
    VPair,
    VUnit,
    VVar,
    Value,
)

_Q = WireType.QUBIT


def _shape(items):
    if not items:
        return UnitB()
    out = items[0]
    for b in items[1:]:
        out = PairB(out, b)
    return out


def gate_box(gate: str, param=None) -> VBoxed:
    """A boxed circuit holding exactly one application of `gate`."""
    decl = GATES[gate]
    ctx = [(f"a{i}", wt) for i, wt in enumerate(decl.inputs)]
    c = append(identity(ctx), gate, [lab for lab, _ in ctx], param)
    return VBoxed(
        _shape([SingleB(lab) for lab, _ in ctx]),
        c,
        _shape([SingleB(lab) for lab, _ in c.live]),
    )


def _wrap1(gate: str) -> Value:
    decl = GATES[gate]
    fn = VAbs("w", TWire(decl.inputs[0], Var("d")), ApplyCirc(gate_box(gate), VVar("w")))
    return VIndexAbs("d", Return(VLift(Return(fn))))


def _wrap2(gate: str) -> Value:
    decl = GATES[gate]
    inner = VAbs(
        "y",
        TWire(decl.inputs[1], Var("e")),
        ApplyCirc(gate_box(gate), VPair(VVar("x"), VVar("y"))),
    )
    outer = VAbs("x", TWire(decl.inputs[0], Var("d")), Return(inner))
    return VIndexAbs("d", Return(VIndexAbs("e", Return(VLift(Return(outer))))))


def _controlled_rotation() -> Value:
    # first index argument is the rotation parameter recorded on the gate;
    # the second is the (shared) depth of the two operand wires
    box = gate_box("CR", Var("k"))
    inner = VAbs("y", TWire(_Q, Var("d")), ApplyCirc(box, VPair(VVar("x"), VVar("y"))))
    outer = VAbs("x", TWire(_Q, Var("d")), Return(inner))
    return VIndexAbs("k", Return(VIndexAbs("d", Return(VLift(Return(outer))))))


def _init(gate: str) -> Value:
    return VLift(ApplyCirc(gate_box(gate), VUnit()))


_VALUES = {
    "qinit0": _init("Init0"),
    "qinit1": _init("Init1"),
    "hadamard": _wrap1("H"),
    "xgate": _wrap1("X"),
    "zgate": _wrap1("Z"),
    "tgate": _wrap1("T"),
    "meas": _wrap1("Meas"),
    "qdiscard": _wrap1("Discard"),
    "cdiscard": _wrap1("CDiscard"),
    "cnot": _wrap2("CNOT"),
    "cxc": _wrap2("CX_classical"),
    "czc": _wrap2("CZ_classical"),
    "cR": _controlled_rotation(),
}

# short aliases for the single-qubit unitaries
_VALUES["x"] = _VALUES["xgate"]
_VALUES["z"] = _VALUES["zgate"]
_VALUES["t"] = _VALUES["tgate"]

_TYPE_CACHE: dict = {}


def stdlib_values() -> dict:
    """Name -> closed value for every built-in wrapper."""
    return dict(_VALUES)


def stdlib_types(profile: MetricProfile) -> dict:
    """Name -> type of every built-in wrapper, derived under `profile`."""
    cached = _TYPE_CACHE.get(profile.name)
    if cached is not None and cached[0] is profile:
        return dict(cached[1])
    checker = Checker(profile)
    env = TypeEnv()
    types = {name: checker.check_value(env, v)[0] for name, v in _VALUES.items()}
    _TYPE_CACHE[profile.name] = (profile, types)
    return dict(types)
