"""Index terms: evaluation, entailment checking, simplification, SMT export."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genindex import ARITH_VARS, random_arith, random_profiled
from pqra.circuits import WireType
from pqra.indices import (
    BoundedMax,
    BoundedPar,
    BoundedSeq,
    BoundedSum,
    CheckStrategy,
    Counterexample,
    EQ,
    EvaluationError,
    ExportError,
    HoldsBounded,
    IdOp,
    LE,
    Max,
    Minus,
    NatLit,
    Par,
    Plus,
    Seq,
    Times,
    Var,
    WireOp,
    check_entailment,
    compile_index,
    evaluate,
    export_smtlib,
    free_vars,
    pretty_index,
    simplify,
    substitute,
    substitute_all,
)
from pqra.profiles import get_profile

GC = get_profile("gatecount")
WIDTH = get_profile("width")

n, m, i = Var("n"), Var("m"), Var("i")


class TestEvaluate:
    def test_arithmetic(self):
        t = Plus(Times(NatLit(2), n), Max(m, NatLit(3)))
        assert evaluate(t, {"n": 4, "m": 1}, GC) == 11
        assert evaluate(t, {"n": 0, "m": 7}, GC) == 7

    def test_minus_truncates(self):
        assert evaluate(Minus(NatLit(2), NatLit(5)), {}, GC) == 0
        assert evaluate(Minus(NatLit(5), NatLit(2)), {}, GC) == 3

    def test_unbound_variable(self):
        with pytest.raises(EvaluationError, match="unbound"):
            evaluate(n, {}, GC)

    def test_bounded_sum_and_max(self):
        s = BoundedSum("k", NatLit(5), Plus(Var("k"), NatLit(1)))
        assert evaluate(s, {}, GC) == 1 + 2 + 3 + 4 + 5
        mx = BoundedMax("k", n, Times(NatLit(2), Var("k")))
        assert evaluate(mx, {"n": 4}, GC) == 6
        assert evaluate(mx, {"n": 0}, GC) == 0

    def test_profile_operators_differ_by_profile(self):
        q = WireOp(WireType.QUBIT)
        assert evaluate(q, {}, WIDTH) == 1
        assert evaluate(q, {}, GC) == 0
        ids = IdOp.of([WireType.QUBIT, WireType.BIT])
        assert evaluate(ids, {}, WIDTH) == 2
        assert evaluate(ids, {}, GC) == 0

    def test_seq_par_follow_profile(self):
        t = Seq(NatLit(2), NatLit(3))
        assert evaluate(t, {}, GC) == 5       # sequencing adds gate counts
        assert evaluate(t, {}, WIDTH) == 3    # width sequencing is max
        u = Par(NatLit(2), NatLit(3))
        assert evaluate(u, {}, WIDTH) == 5    # side-by-side widths add

    def test_bounded_seq_folds_profile_op(self):
        t = BoundedSeq("k", NatLit(4), Plus(Var("k"), NatLit(1)))
        assert evaluate(t, {}, GC) == 10
        assert evaluate(t, {}, WIDTH) == 4


class TestSubstitute:
    def test_basic(self):
        t = Plus(n, Times(NatLit(2), m))
        assert substitute(t, NatLit(3), "n") == Plus(NatLit(3), Times(NatLit(2), m))

    def test_shadowed_binder_not_replaced(self):
        t = BoundedSum("n", m, n)  # inner n is the binder
        out = substitute(t, NatLit(9), "n")
        assert out == t

    def test_bound_position_is_replaced(self):
        t = BoundedSum("k", n, Var("k"))
        out = substitute(t, NatLit(3), "n")
        assert evaluate(out, {}, GC) == 0 + 1 + 2

    def test_capture_avoidance(self):
        t = BoundedSum("k", n, Plus(Var("k"), Var("x")))
        out = substitute(t, Var("k"), "x")
        # the binder must have been renamed away from the incoming k
        assert evaluate(out, {"n": 3, "k": 9}, GC) == (0 + 9) + (1 + 9) + (2 + 9)

    def test_substitute_all(self):
        t = Plus(n, m)
        out = substitute_all(t, {"n": NatLit(1), "m": NatLit(2)})
        assert evaluate(out, {}, GC) == 3

    def test_free_vars(self):
        t = BoundedSum("k", n, Plus(Var("k"), m))
        assert free_vars(t) == ("n", "m")  # first-appearance order


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(0, 12),
       env=st.fixed_dictionaries({v: st.integers(0, 12) for v in ARITH_VARS}))
def test_substitution_evaluation_coherence(seed, k, env):
    """evaluate(t[k/x]) == evaluate(t) with x := k in the environment."""
    t = random_arith(random.Random(seed), depth=4)
    x = random.Random(seed ^ 0xA5A5).choice(ARITH_VARS)
    lhs = evaluate(substitute(t, NatLit(k), x), env, GC)
    rhs = evaluate(t, {**env, x: k}, GC)
    assert lhs == rhs


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1),
       env=st.fixed_dictionaries({v: st.integers(0, 6) for v in ARITH_VARS}))
def test_compile_index_matches_evaluate(seed, env):
    rng = random.Random(seed)
    for p in (GC, WIDTH, get_profile("depth")):
        t = random_profiled(rng, depth=3)
        assert compile_index(t, p)(env) == evaluate(t, env, p)


class TestEntailment:
    def test_holds(self):
        assert isinstance(check_entailment(("n",), n, Plus(n, NatLit(1)), LE, GC),
                          HoldsBounded)

    def test_counterexample_is_smallest_grid_point(self):
        v = check_entailment(("n",), Plus(n, NatLit(1)), n, LE, GC)
        assert v == Counterexample((("n", 0),))

    def test_eq_both_directions(self):
        assert isinstance(check_entailment(("n",), Plus(n, n), Times(NatLit(2), n), EQ, GC),
                          HoldsBounded)
        v = check_entailment(("n",), Times(n, n), n, EQ, GC)
        assert v == Counterexample((("n", 2),))

    def test_closed_obligation(self):
        assert isinstance(check_entailment((), NatLit(3), NatLit(3), EQ, GC), HoldsBounded)
        assert check_entailment((), NatLit(4), NatLit(3), LE, GC) == Counterexample(())

    def test_profile_dependence(self):
        q = WireOp(WireType.QUBIT)
        assert isinstance(check_entailment((), q, NatLit(0), LE, GC), HoldsBounded)
        assert check_entailment((), q, NatLit(0), LE, WIDTH) == Counterexample(())

    def test_deterministic(self):
        args = (("n", "m"), Plus(n, m), Times(Plus(n, NatLit(1)), Plus(m, NatLit(1))), LE, GC)
        assert check_entailment(*args) == check_entailment(*args)
        assert isinstance(check_entailment(*args), HoldsBounded)

    def test_verdict_is_bounded_not_a_proof(self):
        # violated only at n >= 5: a tiny grid with no sampling misses it
        lhs = Minus(n, NatLit(4))
        blind = CheckStrategy(grid_max=2, samples=0)
        assert isinstance(check_entailment(("n",), lhs, NatLit(0), LE, GC, blind),
                          HoldsBounded)
        v = check_entailment(("n",), lhs, NatLit(0), LE, GC)
        assert v == Counterexample((("n", 5),))

    def test_random_sampling_beyond_grid(self):
        # violated only above the default grid radius; sampling catches it
        lhs = Minus(n, NatLit(100))
        v = check_entailment(("n",), lhs, NatLit(0), LE, GC)
        assert isinstance(v, Counterexample)
        assert dict(v.valuation)["n"] > 100

    def test_many_variables_grid_shrinks_but_completes(self):
        vars6 = tuple("abcdef")
        total = None
        for v in vars6:
            t = Var(v) if total is None else Plus(total, Var(v))
            total = t
        verdict = check_entailment(vars6, total, Plus(total, NatLit(1)), LE, GC)
        assert isinstance(verdict, HoldsBounded)

    def test_nested_bounded_operators_complete_quickly(self):
        body = BoundedSum("a", Var("b"), Plus(Var("a"), NatLit(1)))
        t = BoundedSum("b", n, body)
        verdict = check_entailment(("n",), t, Plus(t, NatLit(1)), LE, GC)
        assert isinstance(verdict, HoldsBounded)


class TestSimplify:
    def test_constant_folding(self):
        assert simplify(Plus(Minus(NatLit(0), NatLit(1)), NatLit(2)), GC) == NatLit(2)

    def test_minus_bottoms_out_when_provably_nonpositive(self):
        assert simplify(Minus(n, Plus(n, NatLit(1))), GC) == NatLit(0)

    def test_minus_exact_when_provably_nonnegative(self):
        t = simplify(Minus(Plus(n, NatLit(2)), NatLit(1)), GC)
        assert pretty_index(t) == "n+1"

    def test_opaque_minus_stays(self):
        t = simplify(Minus(n, m), GC)
        assert pretty_index(t) == "n-m"

    def test_closed_bounded_sum_unrolls(self):
        assert simplify(BoundedSum("i", NatLit(3), i), GC) == NatLit(3)

    def test_binder_free_sum_becomes_product(self):
        t = simplify(BoundedSum("i", n, NatLit(2)), GC)
        assert pretty_index(t) == "2*n"

    def test_max_flatten_dedup(self):
        assert simplify(Max(n, Max(n, NatLit(0))), WIDTH) == n

    def test_bounded_seq_of_bound_is_bound(self):
        # under a max-sequencing profile, seq[j<n] n collapses to n (0 at n=0)
        assert simplify(BoundedSeq("j", n, n), WIDTH) == n
        assert simplify(BoundedMax("j", n, n), WIDTH) == n

    def test_profile_expansion(self):
        assert simplify(Seq(NatLit(2), NatLit(3)), GC) == NatLit(5)
        assert simplify(Seq(NatLit(2), NatLit(3)), WIDTH) == NatLit(3)
        assert simplify(Par(WireOp(WireType.QUBIT), NatLit(1)), WIDTH) == NatLit(2)

    def test_assumptions_resolve_binder_ranges(self):
        # with k+1 <= n assumed, n - (k+1) + (k+1) is exactly n
        t = Plus(Minus(n, Plus(Var("k"), NatLit(1))), Plus(Var("k"), NatLit(1)))
        out = simplify(t, GC, assumptions=((Plus(Var("k"), NatLit(1)), n),))
        assert out == n

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1),
           env=st.fixed_dictionaries({v: st.integers(0, 8) for v in ARITH_VARS}))
    def test_simplify_preserves_value(self, seed, env):
        rng = random.Random(seed)
        for p in (GC, WIDTH):
            t = random_profiled(rng, depth=3)
            assert evaluate(simplify(t, p), env, p) == evaluate(t, env, p)


class TestPrettyIndex:
    @pytest.mark.parametrize(
        "term,text",
        [
            (BoundedSum("m", n, Plus(m, NatLit(1))), "sum[m<n] m+1"),
            (Max(NatLit(1), BoundedMax("m", n, NatLit(2))), "max(1,max[m<n] 2)"),
            (Times(NatLit(2), Plus(n, NatLit(1))), "2*(n+1)"),
            (Minus(n, Plus(m, NatLit(1))), "n-(m+1)"),
            (Times(NatLit(3), n), "3*n"),
            (Plus(Plus(i, n), Var("j")), "i+n+j"),
        ],
    )
    def test_golden(self, term, text):
        assert pretty_index(term) == text


class TestSmtExport:
    def test_golden_script(self):
        script = export_smtlib(("n",), Plus(n, NatLit(1)), Max(n, NatLit(5)), LE, GC)
        assert script == (
            "(set-logic ALL)\n"
            "(define-fun natmax ((a Int) (b Int)) Int (ite (>= a b) a b))\n"
            "(define-fun natsub ((a Int) (b Int)) Int (ite (>= a b) (- a b) 0))\n"
            "(declare-const n Int)\n"
            "(assert (>= n 0))\n"
            "(assert (not (<= (+ n 1) (natmax n 5))))\n"
            "(check-sat)\n"
        )

    def test_eq_uses_equality(self):
        script = export_smtlib((), NatLit(2), NatLit(2), EQ, GC)
        assert "(assert (not (= 2 2)))" in script

    def test_abstract_operators_expand_through_profile(self):
        script = export_smtlib((), Seq(WireOp(WireType.QUBIT), NatLit(2)), NatLit(2), LE, WIDTH)
        assert "natmax" in script and "(check-sat)" in script

    def test_closed_bounds_unroll(self):
        t = BoundedSum("k", NatLit(3), Plus(Var("k"), NatLit(1)))
        script = export_smtlib((), t, NatLit(6), EQ, GC)
        assert "(+ (+ (+ 0 1) (+ 1 1)) (+ 2 1))" in script

    def test_open_bound_is_an_export_error(self):
        t = BoundedSum("k", n, Var("k"))
        with pytest.raises(ExportError, match="open bound"):
            export_smtlib(("n",), t, n, LE, GC)

    def test_truncated_minus_uses_natsub(self):
        script = export_smtlib(("n",), Minus(n, NatLit(1)), n, LE, GC)
        assert "(natsub n 1)" in script
