"""Execute checked programs and compare built circuits against derived bounds.

The checker produces parametric cost expressions; this module closes the loop:
instantiate a program at concrete index values, feed it fresh input wires, run
it to a circuit, measure that circuit with the profile's oracle, and compare
the measurement against the evaluated bound.  `verify_bounds` sweeps a grid of
index values and reports one soundness row per instantiation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from .checker import (
    CheckStrategy,
    Checker,
    check_program,
    substitute_type,
)
from .circuits import Circuit, identity, oracle_depth
from .indices import Empty, IndexTerm, NatLit, Seq, evaluate, substitute_all
from .interp import (
    Configuration,
    EvalError,
    bundle_to_value,
    eval_config,
    freshlabels,
    subst_term,
)
from .profiles import MetricProfile, ProfileKind
from .stdlib import stdlib_types, stdlib_values
from .surface import (
    Program,
    TArrow,
    TBang,
    TIndexAll,
    TList,
    TTensor,
    TUnit,
    TWire,
    Type,
    VLabel,
    VNil,
    VPair,
    VRCons,
    VUnit,
    App,
    Force,
    IndexApp,
    parse,
    pretty,
)


class RunError(Exception):
    """The program cannot be driven to a circuit at this instantiation."""


@dataclass(frozen=True)
class RunOutcome:
    """One concrete execution: the circuit built and the bound it must obey."""

    circuit: Circuit
    value: object  # output value, congruent to `out_type`
    out_type: Type
    bound_index: IndexTerm
    in_depths: dict  # input label -> starting level (local profiles only)


@dataclass(frozen=True)
class BoundCheck:
    program: str
    profile: str
    valuation: tuple  # ((name, int), ...) in application order
    measured: int
    bound: int
    sound: bool
    exact: bool


@dataclass(frozen=True)
class BoundReport:
    program: str
    profile: str
    rows: tuple

    @property
    def sound(self) -> bool:
        return all(r.sound for r in self.rows)


def check(
    prog: Program,
    profile: MetricProfile,
    strategy: CheckStrategy | None = None,
    checker: Checker | None = None,
) -> dict:
    """Type-check `prog` with the standard gate wrappers in scope."""
    return check_program(
        prog, profile, strategy, stdlib=stdlib_types(profile), checker=checker
    )


def target_binding(prog: Program) -> str:
    """The runnable entry point: main if present, else the last binding."""
    if prog.main is not None:
        return ""
    if not prog.bindings:
        raise RunError("program has no bindings and no main expression")
    return prog.bindings[-1].name


def binder_names(t: Type) -> tuple:
    """Index binders a runnable target expects, in application order."""
    names: list = []
    while True:
        if isinstance(t, TIndexAll):
            names.append(t.binder)
            t = t.body
        elif isinstance(t, TBang):
            t = t.inner
        else:
            return tuple(names)


def _is_bundle_type(t: Type) -> bool:
    if isinstance(t, TUnit) or isinstance(t, TWire):
        return True
    if isinstance(t, TTensor):
        return _is_bundle_type(t.left) and _is_bundle_type(t.right)
    if isinstance(t, TList):
        return _is_bundle_type(t.elem)
    return False


def _wire_levels(t: Type, env: Mapping, profile: MetricProfile) -> list:
    """Starting level of each wire leaf of `t`, in label-creation order."""
    out: list = []

    def go(t: Type) -> None:
        if isinstance(t, TWire):
            out.append(0 if t.ann is None else evaluate(t.ann, env, profile))
        elif isinstance(t, TTensor):
            go(t.left)
            go(t.right)
        elif isinstance(t, TList):
            n = evaluate(t.length, env, profile)
            for k in range(n):
                go(substitute_type(t.elem, {t.binder: NatLit(k)}))
        elif not isinstance(t, TUnit):
            raise RunError(f"cannot assign levels to non-bundle type {pretty(t)}")

    go(t)
    return out


def _leaf_bounds(v, t: Type, env: Mapping, profile: MetricProfile) -> list:
    """Pair each output label with its promised level, walking value and type together."""
    if isinstance(v, VLabel) and isinstance(t, TWire):
        if t.ann is None:
            raise RunError("output wire carries no level annotation")
        return [(v.label, evaluate(t.ann, env, profile))]
    if isinstance(v, VPair) and isinstance(t, TTensor):
        return _leaf_bounds(v.left, t.left, env, profile) + _leaf_bounds(
            v.right, t.right, env, profile
        )
    if isinstance(v, VUnit) and isinstance(t, TUnit):
        return []
    if isinstance(v, (VNil, VRCons)) and isinstance(t, TList):
        n = evaluate(t.length, env, profile)
        if isinstance(v, VNil):
            if n != 0:
                raise RunError(f"empty list value against length-{n} type")
            return []
        if n < 1:
            raise RunError("non-empty list value against length-0 type")
        init_t = TList(t.binder, NatLit(n - 1), t.elem)
        last_t = substitute_type(t.elem, {t.binder: NatLit(n - 1)})
        return _leaf_bounds(v.init, init_t, env, profile) + _leaf_bounds(
            v.last, last_t, env, profile
        )
    raise RunError(f"output value does not match type {pretty(t)}")


def _eval_bindings(prog: Program, c: Circuit, upto: int):
    """Evaluate the first `upto` bindings on top of `c`; returns (circuit, values)."""
    values = dict(stdlib_values())
    for b in prog.bindings[:upto]:
        body = b.body
        for name, w in values.items():
            body = subst_term(body, name, w)
        c, v = eval_config(Configuration(c, body))
        values[b.name] = v
    return c, values


def _chain(parts) -> IndexTerm:
    bound: IndexTerm = Empty()
    for e in parts:
        if isinstance(e, Empty):
            continue
        bound = e if isinstance(bound, Empty) else Seq(bound, e)
    return bound


def run(
    prog: Program,
    profile: MetricProfile,
    valuation: Mapping,
    target: Optional[str] = None,
    strategy: CheckStrategy | None = None,
    reports: Optional[Mapping] = None,
) -> RunOutcome:
    """Instantiate `target` at `valuation`, feed it fresh wires, and run it.

    Every binding up to the target is re-evaluated on the measured circuit, so
    circuit-building work outside the target still counts.  The returned bound
    sequences those binding costs with the instantiated costs of the target's
    own index applications, forces, and final application.
    """
    if reports is None:
        reports = check(prog, profile, strategy)
    if target is None:
        target = target_binding(prog)
    if target not in reports:
        raise RunError(f"no binding named '{target or 'main'}'")
    rep = reports[target]

    if target == "":
        idx = len(prog.bindings)
    else:
        idx = next(i for i, b in enumerate(prog.bindings) if b.name == target)
    parts = [reports[b.name].effect for b in prog.bindings[:idx]]
    parts.append(rep.effect)

    env = {name: int(v) for name, v in valuation.items()}
    ty = rep.type
    steps: list = []
    while True:
        if isinstance(ty, TIndexAll):
            if ty.binder not in env:
                raise RunError(f"missing value for index parameter '{ty.binder}'")
            k = NatLit(env[ty.binder])
            parts.append(substitute_all(ty.effect, {ty.binder: k}))
            ty = substitute_type(ty.body, {ty.binder: k})
            steps.append(("index", k))
            continue
        if isinstance(ty, TBang):
            parts.append(ty.effect)
            ty = ty.inner
            steps.append(("force",))
            continue
        break
    if not isinstance(ty, TArrow):
        raise RunError(
            f"target '{target or 'main'}' is not runnable: {pretty(rep.type, profile)}"
        )
    if not _is_bundle_type(ty.dom):
        raise RunError(f"cannot synthesize inputs of type {pretty(ty.dom, profile)}")
    if not _is_bundle_type(ty.cod):
        raise RunError(
            "target is curried; its result is a function, not a wire bundle"
        )
    parts.append(ty.effect)

    try:
        ctx, bundle = freshlabels(ty.dom, prefix="in")
    except EvalError as e:
        raise RunError(str(e)) from e

    in_depths: dict = {}
    if profile.kind is ProfileKind.LOCAL:
        levels = _wire_levels(ty.dom, env, profile)
        in_depths = {ctx[i][0]: lvl for i, lvl in enumerate(levels)}

    c = identity(ctx)
    try:
        c, values = _eval_bindings(prog, c, idx + (0 if target == "" else 1))
        if target == "":
            body = prog.main
            for name, w in values.items():
                body = subst_term(body, name, w)
            c, v = eval_config(Configuration(c, body))
        else:
            v = values[target]
        for step in steps:
            if step[0] == "index":
                c, v = eval_config(Configuration(c, IndexApp(v, step[1])))
            else:
                c, v = eval_config(Configuration(c, Force(v)))
        arg = bundle_to_value(bundle, dict(ctx))
        c, v = eval_config(Configuration(c, App(v, arg)))
    except EvalError as e:
        raise RunError(f"evaluation failed: {e}") from e

    return RunOutcome(c, v, ty.cod, _chain(parts), in_depths)


def measure(outcome: RunOutcome, profile: MetricProfile, valuation: Mapping):
    """Compare the built circuit against the bound; returns (measured, bound, sound, exact).

    Global profiles compare the oracle's single number against the evaluated
    bound.  The local profile compares every output wire's measured level
    against its promised annotation pointwise; the returned numbers are the
    maxima over output wires, purely for display.
    """
    env = {name: int(v) for name, v in valuation.items()}
    if profile.kind is ProfileKind.GLOBAL:
        measured = profile.oracle(outcome.circuit)
        bound = evaluate(outcome.bound_index, env, profile)
        return measured, bound, measured <= bound, measured == bound

    depths = oracle_depth(outcome.circuit, outcome.in_depths)
    sound = True
    exact = True
    measured_max = 0
    bound_max = 0
    for lab, promised in _leaf_bounds(outcome.value, outcome.out_type, env, profile):
        got = depths[lab]
        sound = sound and got <= promised
        exact = exact and got == promised
        measured_max = max(measured_max, got)
        bound_max = max(bound_max, promised)
    return measured_max, bound_max, sound, exact


def verify_bounds(
    prog: Program,
    profile: MetricProfile,
    ranges: Optional[Mapping] = None,
    target: Optional[str] = None,
    strategy: CheckStrategy | None = None,
) -> BoundReport:
    """Sweep index parameters over integer ranges and bound-check each point.

    `ranges` maps binder names to inclusive (lo, hi) pairs; parameters not
    mentioned default to (0, 8).  A program with no index parameters is run
    exactly once.
    """
    reports = check(prog, profile, strategy)
    if target is None:
        target = target_binding(prog)
    if target not in reports:
        raise RunError(f"no binding named '{target or 'main'}'")
    names = binder_names(reports[target].type)
    ranges = dict(ranges or {})
    spans = []
    for name in names:
        lo, hi = ranges.get(name, (0, 8))
        spans.append(range(int(lo), int(hi) + 1))

    display = target or "main"
    rows = []
    for combo in itertools.product(*spans):
        valuation = dict(zip(names, combo))
        outcome = run(prog, profile, valuation, target=target, reports=reports)
        measured, bound, sound, exact = measure(outcome, profile, valuation)
        rows.append(
            BoundCheck(
                display,
                profile.name,
                tuple(zip(names, combo)),
                measured,
                bound,
                sound,
                exact,
            )
        )
    return BoundReport(display, profile.name, tuple(rows))


# ---------------------------------------------------------------------------
# Bundled example programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    source: str
    program: Program
    profiles: tuple  # names of profiles the entry typechecks under


_GLOBALS = ("width", "gatecount", "gatecount_all", "tcount", "qubitcount", "bitcount")

_CORPUS_FILES = {
    "teleport": "teleport.pqr",
    "dumbNot": "dumbnot.pqr",
    "iterDumbNot": "iter_dumbnot.pqr",
    "mapHadamard": "maphadamard.pqr",
    "qft": "qft.pqr",
    "qft_depth": "qft_depth.pqr",
}

_CORPUS_PROFILES = {
    "teleport": _GLOBALS + ("depth",),
    "dumbNot": _GLOBALS + ("depth",),
    "iterDumbNot": _GLOBALS + ("depth",),
    "mapHadamard": _GLOBALS + ("depth",),
    # qft fixes every rotation's level argument at literal zero, which only
    # the level-free profiles accept; qft_depth is the level-aware version,
    # and its ascription pins arrow costs at zero, which rules the global
    # profiles out.
    "qft": _GLOBALS,
    "qft_depth": ("depth",),
}


def builtin_corpus() -> list:
    """The bundled example programs, parsed, with their applicable profiles."""
    root = Path(__file__).parent / "corpus"
    out = []
    for name, fname in _CORPUS_FILES.items():
        source = (root / fname).read_text()
        out.append(CorpusEntry(name, source, parse(source), _CORPUS_PROFILES[name]))
    return out
