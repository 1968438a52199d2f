"""Symbolic circuit signatures, checked differentially against the oracles."""

import random

import pytest

from pqra.circuits import (
    CircuitError,
    ConsB,
    NilB,
    PairB,
    SingleB,
    UnitB,
    WireType,
    append,
    identity,
    oracle_depth,
    random_circuits,
    relabel,
)
from pqra.indices import NatLit, Var, evaluate, free_vars, pretty_index
from pqra.profiles import ProfileKind, builtin_profiles, get_profile
from pqra.signatures import Signature, bundle_type, infer_signature
from pqra.surface import TList, TTensor, TUnit, TWire

Q = WireType.QUBIT
B = WireType.BIT

EQUAL_PROFILES = ("width", "gatecount", "tcount", "qubitcount", "bitcount")
CORPUS = random_circuits(200, seed=2024, max_gates=10)


def test_identity_signature():
    sig = infer_signature(identity([("q", Q), ("b", B)]))
    assert sig.local_vars == ("v0", "v1")
    assert [lab for lab, _, _ in sig.input_ctx] == ["q", "b"]
    # outputs are the untouched inputs, still annotated by their own variables
    assert [(lab, ann) for lab, _, ann in sig.output_ctx] == [("q", Var("v0")), ("b", Var("v1"))]
    assert free_vars(sig.global_index) == ()
    assert evaluate(sig.global_index, {}, get_profile("width")) == 2
    assert evaluate(sig.global_index, {}, get_profile("gatecount")) == 0


def test_global_index_is_closed():
    for c in CORPUS[:20]:
        assert free_vars(infer_signature(c).global_index) == ()


@pytest.mark.parametrize("name", EQUAL_PROFILES)
def test_global_bounds_equal_oracles(name):
    p = get_profile(name)
    for idx, c in enumerate(CORPUS):
        sig = infer_signature(c)
        assert evaluate(sig.global_index, {}, p) == p.oracle(c), (name, idx)


def test_global_bounds_dominate_all_oracles():
    for p in builtin_profiles():
        if p.kind is not ProfileKind.GLOBAL:
            continue
        for c in CORPUS:
            assert evaluate(infer_signature(c).global_index, {}, p) >= p.oracle(c)


def test_gatecount_all_bound_counts_every_operation():
    p = get_profile("gatecount_all")
    for c in CORPUS:
        assert evaluate(infer_signature(c).global_index, {}, p) == len(c.gates)


def test_depth_annotations_match_oracle_pointwise():
    p = get_profile("depth")
    for idx, c in enumerate(CORPUS):
        sig = infer_signature(c)
        in_labels = [lab for lab, _ in c.initial]
        rng = random.Random(0xD0C0 + idx)
        for _ in range(16):
            depths = {lab: rng.randrange(8) for lab in in_labels}
            want = oracle_depth(c, depths)
            valuation = {sig.input_vars[lab]: depths[lab] for lab in in_labels}
            for lab, _, ann in sig.output_ctx:
                assert evaluate(ann, valuation, p) == want[lab], (idx, lab, depths)


def test_relabeling_only_renames_labels():
    for c in CORPUS[:40]:
        mapping = {lab: f"r{idx}" for idx, lab in enumerate(sorted(c.all_labels()))}
        sig = infer_signature(c)
        rsig = infer_signature(relabel(c, mapping))
        assert rsig.local_vars == sig.local_vars
        assert pretty_index(rsig.global_index) == pretty_index(sig.global_index)
        renamed = {(mapping[lab], wt, pretty_index(ann)) for lab, wt, ann in sig.output_ctx}
        assert {(lab, wt, pretty_index(ann)) for lab, wt, ann in rsig.output_ctx} == renamed


def test_render():
    c = append(identity([("q", Q)]), "Meas", ("q",))
    out = c.gates[-1].outs[0]
    text = infer_signature(c).render()
    assert text.startswith("{q:Qubit{v0}} <v0> -> {" + out)
    assert ";" in text


def test_output_annotation_shape():
    c = identity([("a", Q), ("b", Q)])
    c = append(c, "CNOT", ("a", "b"))
    o1, o2 = c.gates[-1].outs
    sig = infer_signature(c)
    anns = {lab: pretty_index(ann) for lab, _, ann in sig.output_ctx}
    assert anns == {o1: "d[CNOT,1](v0,v1)", o2: "d[CNOT,2](v0,v1)"}


class TestBundleType:
    def test_unit(self):
        assert bundle_type([], UnitB()) == TUnit()

    def test_single_with_annotation(self):
        t = bundle_type([("l", Q, Var("i"))], SingleB("l"))
        assert t == TWire(Q, Var("i"))

    def test_pair(self):
        t = bundle_type([("l", Q, Var("i")), ("k", B, Var("j"))],
                        PairB(SingleB("l"), SingleB("k")))
        assert t == TTensor(TWire(Q, Var("i")), TWire(B, Var("j")))

    def test_uniform_list(self):
        b = ConsB(ConsB(NilB(), SingleB("a")), SingleB("b"))
        t = bundle_type([("a", Q), ("b", Q)], b)
        assert t == TList("j", NatLit(2), TWire(Q, None))

    def test_empty_list(self):
        t = bundle_type([], NilB())
        assert isinstance(t, TList) and t.length == NatLit(0)

    def test_ununiform_list_rejected(self):
        b = ConsB(ConsB(NilB(), SingleB("a")), SingleB("b"))
        with pytest.raises(CircuitError, match="unequal"):
            bundle_type([("a", Q), ("b", B)], b)

    def test_unknown_label_rejected(self):
        with pytest.raises(CircuitError, match="not in context"):
            bundle_type([("a", Q)], SingleB("z"))

    def test_uncovered_context_rejected(self):
        with pytest.raises(CircuitError, match="not covered"):
            bundle_type([("a", Q), ("b", Q)], SingleB("a"))


def test_signature_is_frozen():
    sig = infer_signature(identity([("q", Q)]))
    assert isinstance(sig, Signature)
    with pytest.raises(AttributeError):
        sig.local_vars = ()
