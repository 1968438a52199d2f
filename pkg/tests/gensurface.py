"""Seeded random surface-AST generators covering the printable source language.

Labels and boxed-circuit literals are runtime-only values with no source
syntax, so they never appear here.
"""

import random

from genindex import random_arith
from pqra.circuits import WireType
from pqra.indices import Empty, NatLit
from pqra.surface import (
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
    TIndexAll,
    TList,
    TTensor,
    TUnit,
    TWire,
    VAbs,
    VIndexAbs,
    VLift,
    VNil,
    VPair,
    VRCons,
    VUnit,
    VVar,
)

_TERM_VARS = ("f", "g", "x", "y", "z", "q", "r", "acc", "u", "w")
_INDEX_VARS = ("n", "m", "i")
_BINDERS = ("j", "k")


def _ann(rng):
    return random_arith(rng, rng.randrange(3), vars=_INDEX_VARS)


def random_type(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.35:
        r = rng.random()
        if r < 0.5:
            wire = rng.choice(list(WireType))
            ann = _ann(rng) if rng.random() < 0.5 else None
            return TWire(wire, ann)
        if r < 0.65:
            return TUnit()
        return TWire(WireType.QUBIT, None)
    kind = rng.randrange(6)
    if kind == 0:
        return TTensor(random_type(rng, depth - 1), random_type(rng, depth - 1))
    if kind == 1:
        return TList(rng.choice(_BINDERS), _ann(rng), random_type(rng, depth - 1))
    if kind == 2:
        effect = Empty() if rng.random() < 0.5 else _ann(rng)
        return TBang(effect, random_type(rng, depth - 1))
    if kind == 3:
        effect = Empty() if rng.random() < 0.5 else _ann(rng)
        return TArrow(random_type(rng, depth - 1), random_type(rng, depth - 1),
                      effect, TUnit())
    if kind == 4:
        effect = Empty() if rng.random() < 0.5 else _ann(rng)
        return TIndexAll(rng.choice(_INDEX_VARS), effect, random_type(rng, depth - 1))
    return TCirc(_ann(rng), (), random_type(rng, depth - 1), random_type(rng, depth - 1))


def random_value(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.4:
        r = rng.random()
        if r < 0.55:
            return VVar(rng.choice(_TERM_VARS))
        if r < 0.75:
            return VUnit()
        return VNil()
    kind = rng.randrange(6)
    if kind == 0:
        return VPair(random_value(rng, depth - 1), random_value(rng, depth - 1))
    if kind == 1:
        return VRCons(random_value(rng, depth - 1), random_value(rng, depth - 1))
    if kind == 2:
        return VAbs(rng.choice(_TERM_VARS), random_type(rng, min(depth - 1, 2)),
                    random_term(rng, depth - 1))
    if kind == 3:
        return VLift(random_term(rng, depth - 1))
    if kind == 4:
        return VIndexAbs(rng.choice(_INDEX_VARS), random_term(rng, depth - 1))
    return VVar(rng.choice(_TERM_VARS))


def random_term(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.3:
        return Return(random_value(rng, depth - 1 if depth > 0 else 0))
    kind = rng.randrange(9)
    if kind == 0:
        return App(random_value(rng, depth - 1), random_value(rng, depth - 1))
    if kind == 1:
        return IndexApp(random_value(rng, depth - 1), _ann(rng))
    if kind == 2:
        return Force(random_value(rng, depth - 1))
    if kind == 3:
        return ApplyCirc(random_value(rng, depth - 1), random_value(rng, depth - 1))
    if kind == 4:
        return BoxT(random_type(rng, min(depth - 1, 2)), random_value(rng, depth - 1))
    if kind == 5:
        return Fold(random_value(rng, depth - 1), random_value(rng, depth - 1),
                    random_value(rng, depth - 1))
    if kind == 6:
        return Let(rng.choice(_TERM_VARS), random_term(rng, depth - 1),
                   random_term(rng, depth - 1))
    if kind == 7:
        a, b = rng.sample(_TERM_VARS, 2)
        return Dest(a, b, random_value(rng, depth - 1), random_term(rng, depth - 1))
    return Return(random_value(rng, depth - 1))


def random_program(rng: random.Random):
    bindings = []
    for _ in range(rng.randrange(1, 4)):
        name = rng.choice(_TERM_VARS)
        asc = random_type(rng, 2) if rng.random() < 0.3 else None
        bindings.append(Binding(name, random_term(rng, rng.randrange(1, 4)), asc))
    main = random_term(rng, 2) if rng.random() < 0.5 else None
    return Program(tuple(bindings), main)


def ast_sample(count: int, seed: int):
    """`count` random ASTs: an even mix of types, terms, and programs."""
    rng = random.Random(seed)
    out = []
    for idx in range(count):
        r = idx % 3
        if r == 0:
            out.append(("type", random_type(rng, 3)))
        elif r == 1:
            out.append(("term", random_term(rng, 3)))
        else:
            out.append(("program", random_program(rng)))
    return out
