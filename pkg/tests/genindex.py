"""Seeded random index-term generators shared by several test modules."""

import random

from pqra.circuits import GATES, WireType
from pqra.indices import (
    AppendOp,
    BoundedMax,
    BoundedPar,
    BoundedSeq,
    BoundedSum,
    GateOp,
    IdOp,
    Max,
    Minus,
    NatLit,
    Par,
    Plus,
    Seq,
    Times,
    Var,
    WireOp,
)

ARITH_VARS = ("n", "m", "i")
_BINDER_POOL = ("j", "k")


def random_arith(rng: random.Random, depth: int, vars=ARITH_VARS, binders=()):
    """A random pure-arithmetic term (no abstract operators).

    Bounded sums/maxes appear with small bounds so evaluation stays cheap.
    """
    leafy = depth <= 0 or rng.random() < 0.3
    if leafy:
        pool = list(vars) + list(binders)
        if pool and rng.random() < 0.6:
            return Var(rng.choice(pool))
        return NatLit(rng.randrange(4))
    kind = rng.randrange(10)
    if kind < 2:
        return Plus(random_arith(rng, depth - 1, vars, binders),
                    random_arith(rng, depth - 1, vars, binders))
    if kind < 4:
        return Minus(random_arith(rng, depth - 1, vars, binders),
                     random_arith(rng, depth - 1, vars, binders))
    if kind < 6:
        return Max(random_arith(rng, depth - 1, vars, binders),
                   random_arith(rng, depth - 1, vars, binders))
    if kind < 8:
        return Times(NatLit(rng.randrange(3)),
                     random_arith(rng, depth - 1, vars, binders))
    b = rng.choice(_BINDER_POOL)
    bound = NatLit(rng.randrange(4)) if rng.random() < 0.5 else Var(rng.choice(list(vars)))
    body = random_arith(rng, depth - 1, vars, tuple(binders) + (b,))
    return (BoundedSum if rng.random() < 0.5 else BoundedMax)(b, bound, body)


def random_profiled(rng: random.Random, depth: int, vars=ARITH_VARS, binders=()):
    """Like random_arith, but sprinkled with abstract circuit/wire operators."""
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.25:
            return WireOp(rng.choice(list(WireType)))
        if r < 0.45:
            size = rng.randrange(4)
            return IdOp.of(rng.choice(list(WireType)) for _ in range(size))
        return random_arith(rng, 0, vars, binders)
    kind = rng.randrange(8)
    sub = lambda: random_profiled(rng, depth - 1, vars, binders)
    if kind == 0:
        return Seq(sub(), sub())
    if kind == 1:
        return Par(sub(), sub())
    if kind == 2:
        gate = rng.choice(sorted(GATES))
        return AppendOp(gate, sub(), sub(), sub(), sub())
    if kind == 3:
        gate = rng.choice([g for g in sorted(GATES) if GATES[g].outputs])
        decl = GATES[gate]
        pos = rng.randrange(len(decl.outputs)) + 1
        args = tuple(random_arith(rng, 1, vars, binders) for _ in decl.inputs)
        return GateOp(gate, pos, args)
    if kind in (4, 5):
        b = rng.choice(_BINDER_POOL)
        bound = NatLit(rng.randrange(3)) if rng.random() < 0.5 else Var(rng.choice(list(vars)))
        body = random_profiled(rng, depth - 1, vars, tuple(binders) + (b,))
        return (BoundedSeq if kind == 4 else BoundedPar)(b, bound, body)
    return random_arith(rng, depth, vars, binders)
